use std::time::{Duration, Instant};

use super::dct::Dct8;
use super::encoder::EncodedStream;
use super::format::{self, FrameKind, PayloadSink};
use super::frame::{Frame, RawVideo};
use super::motion::MotionVector;
use super::quant::QuantConfig;
use super::recon::{self, CodedFrame, CodedMacroblock};
use crate::bitio::BitReader;
use crate::error::{Error, Result};
use crate::partial_decode::{parse_headers, FrameEntry, StreamInfo};

/// Wall-clock spent in each decoder phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecodeTiming {
    pub header_parse: Duration,
    pub entropy_decode: Duration,
    pub idct: Duration,
    pub motion_comp: Duration,
    pub total: Duration,
}

/// Collects a whole frame's macroblocks.
pub(crate) struct FrameBuilder {
    frame: CodedFrame,
}

impl FrameBuilder {
    pub fn new(entry: &FrameEntry, info: &StreamInfo) -> Self {
        let n = info.mb_cols() * info.mb_rows();
        Self {
            frame: CodedFrame {
                frame_no: entry.header.frame_no,
                kind: entry.header.kind,
                mb_cols: info.mb_cols(),
                mb_rows: info.mb_rows(),
                macroblocks: vec![
                    CodedMacroblock {
                        inter: false,
                        mv: MotionVector::ZERO,
                        blocks: [[0; 64]; 6],
                    };
                    n
                ],
            },
        }
    }

    pub fn finish(self) -> CodedFrame {
        self.frame
    }
}

impl PayloadSink for FrameBuilder {
    #[inline]
    fn macroblock(&mut self, mb: usize, inter: bool, mv: MotionVector) {
        let m = &mut self.frame.macroblocks[mb];
        m.inter = inter;
        m.mv = mv;
    }

    #[inline]
    fn block(&mut self, mb: usize, blk: usize, levels: &[i32; 64]) {
        self.frame.macroblocks[mb].blocks[blk] = *levels;
    }
}

/// Entropy-decodes one frame into its coded form.
pub(crate) fn parse_coded_frame(
    bytes: &[u8],
    info: &StreamInfo,
    entry: &FrameEntry,
) -> Result<CodedFrame> {
    let payload = &bytes[entry.offset..entry.offset + entry.header.payload_len as usize];
    let mut r = BitReader::with_len(payload, entry.header.payload_bits())
        .with_base(entry.offset as u64 * 8);
    let mut b = FrameBuilder::new(entry, info);
    format::parse_payload(
        &mut r,
        entry.header.kind,
        &info.tables,
        info.mb_cols() * info.mb_rows(),
        &mut b,
    )?;
    Ok(b.finish())
}

pub fn decode_video_full(stream: &EncodedStream) -> Result<RawVideo> {
    decode_video_timed(stream.as_bytes()).map(|(v, _)| v)
}

/// Full decode: entropy decode, dequantize + inverse DCT, motion compensation.
pub fn decode_video_timed(bytes: &[u8]) -> Result<(RawVideo, DecodeTiming)> {
    let start = Instant::now();
    let mut t = DecodeTiming::default();
    let info = parse_headers(bytes)?;
    t.header_parse = start.elapsed();

    let q = QuantConfig::new(u32::from(info.header.quality))?;
    let dct = Dct8::<f64>::new();
    let mut frames: Vec<Frame> = Vec::with_capacity(info.frames.len());
    for entry in &info.frames {
        let frame_no = entry.header.frame_no;
        let t0 = Instant::now();
        let coded = parse_coded_frame(bytes, &info, entry).map_err(|e| e.in_frame(frame_no))?;
        let t1 = Instant::now();
        let res = recon::residual_planes(&coded, q, &dct);
        let t2 = Instant::now();
        let anchor = match coded.kind {
            FrameKind::I => None,
            FrameKind::P => Some(frames.last().ok_or_else(|| {
                Error::corrupt(entry.offset as u64 * 8, "P-frame without an anchor")
                    .in_frame(frame_no)
            })?),
            FrameKind::B => return Err(Error::Unsupported("B-frames".into()).in_frame(frame_no)),
        };
        let frame = recon::compose_frame(&coded, &res, anchor).map_err(|e| e.in_frame(frame_no))?;
        let t3 = Instant::now();
        t.entropy_decode += t1 - t0;
        t.idct += t2 - t1;
        t.motion_comp += t3 - t2;
        frames.push(frame);
    }
    t.total = start.elapsed();
    let video = RawVideo::new(
        usize::from(info.header.width),
        usize::from(info.header.height),
        info.header.fps,
        frames,
    )?;
    Ok((video, t))
}
