use std::collections::BTreeMap;

use super::dct::{Block, Dct8};
use super::format::{self, FrameHeader, FrameKind, StreamHeader, Tables};
use super::frame::{check_dims, Frame, Plane, RawVideo};
use super::motion::{self, MotionVector, MB_SIZE};
use super::quant::QuantConfig;
use super::recon::{self, CodedFrame, CodedMacroblock, INTRA_PREDICTION};
use crate::bitio::{self, BitWriter, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderConfig {
    pub gop_size: u8,
    /// Flat quantizer step.
    pub quality: u8,
    pub search_range: u32,
    /// A P-frame macroblock is inter-coded when its best SAD is at most this
    /// fraction of the intra proxy cost.
    pub inter_threshold: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            gop_size: 12,
            quality: 4,
            search_range: 8,
            inter_threshold: 0.9,
        }
    }
}

impl EncoderConfig {
    pub fn new(gop_size: u8, quality: u8, search_range: u32) -> Self {
        Self {
            gop_size,
            quality,
            search_range,
            ..Self::default()
        }
    }
}

/// A serialized bitstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream(Vec<u8>);

impl EncodedStream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn encode_video(video: &RawVideo, cfg: &EncoderConfig) -> Result<EncodedStream> {
    encode_video_traced(video, cfg).map(|(s, _)| s)
}

/// Encodes and also returns the coded frames exactly as they were written,
/// for use as golden values.
pub fn encode_video_traced(
    video: &RawVideo,
    cfg: &EncoderConfig,
) -> Result<(EncodedStream, Vec<CodedFrame>)> {
    check_dims(video.width, video.height)?;
    video.validate()?;
    if cfg.gop_size == 0 {
        return Err(Error::param("gop size must be >= 1"));
    }
    if cfg.search_range > 255 {
        return Err(Error::param("search range must be <= 255"));
    }
    let q = QuantConfig::new(u32::from(cfg.quality))?;
    let dct = Dct8::<f64>::new();

    let mut coded = Vec::with_capacity(video.frames.len());
    let mut anchor: Option<Frame> = None;
    for (i, frame) in video.frames.iter().enumerate() {
        let kind = if i % cfg.gop_size as usize == 0 {
            FrameKind::I
        } else {
            FrameKind::P
        };
        let cf = code_frame(frame, i as u32, kind, anchor.as_ref(), cfg, q, &dct);
        anchor = Some(recon::reconstruct_frame(&cf, anchor.as_ref(), q, &dct)?);
        coded.push(cf);
    }

    let tables = build_tables(&coded)?;
    let mut out = Vec::new();
    StreamHeader {
        version: format::VERSION,
        width: video.width as u16,
        height: video.height as u16,
        fps: video.fps,
        gop_size: cfg.gop_size,
        quality: cfg.quality,
    }
    .write(&mut out);
    tables.write(&mut out);
    for cf in &coded {
        write_frame(&mut out, cf, &tables)?;
    }
    Ok((EncodedStream(out), coded))
}

fn intra_blocks(
    frame: &Frame,
    mb_x: usize,
    mb_y: usize,
    q: QuantConfig,
    dct: &Dct8<f64>,
) -> [[i32; 64]; 6] {
    std::array::from_fn(|blk| {
        let (x, y, p) = recon::block_origin(mb_x, mb_y, blk);
        let plane = frame.planes()[p];
        let shifted = plane
            .block8(x, y)
            .map(|row| row.map(|v| v - f64::from(INTRA_PREDICTION)));
        recon::code_block(dct, q, &shifted)
    })
}

fn diff_block(target: &Plane, anchor: &Plane, x: usize, y: usize, mv: MotionVector) -> Block<f64> {
    let ax = (x as i64 + i64::from(mv.dx)) as usize;
    let ay = (y as i64 + i64::from(mv.dy)) as usize;
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            f64::from(target.at(x + c, y + r)) - f64::from(anchor.at(ax + c, ay + r))
        })
    })
}

fn code_frame(
    frame: &Frame,
    frame_no: u32,
    kind: FrameKind,
    anchor: Option<&Frame>,
    cfg: &EncoderConfig,
    q: QuantConfig,
    dct: &Dct8<f64>,
) -> CodedFrame {
    let mb_cols = frame.width() / MB_SIZE;
    let mb_rows = frame.height() / MB_SIZE;
    let mut macroblocks = Vec::with_capacity(mb_cols * mb_rows);
    for mb_y in 0..mb_rows {
        for mb_x in 0..mb_cols {
            let inter = match (kind, anchor) {
                (FrameKind::P, Some(a)) => {
                    let (mv, sad) =
                        motion::motion_estimate(&frame.y, &a.y, mb_x, mb_y, cfg.search_range);
                    let proxy = motion::intra_cost(&frame.y, mb_x, mb_y);
                    (f64::from(sad) <= cfg.inter_threshold * proxy).then_some(mv)
                }
                _ => None,
            };
            let mb = match (inter, anchor) {
                (Some(mv), Some(a)) => CodedMacroblock {
                    inter: true,
                    mv,
                    blocks: std::array::from_fn(|blk| {
                        let (x, y, p) = recon::block_origin(mb_x, mb_y, blk);
                        let v = if p == 0 { mv } else { mv.chroma() };
                        let d = diff_block(frame.planes()[p], a.planes()[p], x, y, v);
                        recon::code_block(dct, q, &d)
                    }),
                },
                _ => CodedMacroblock {
                    inter: false,
                    mv: MotionVector::ZERO,
                    blocks: intra_blocks(frame, mb_x, mb_y, q, dct),
                },
            };
            macroblocks.push(mb);
        }
    }
    CodedFrame {
        frame_no,
        kind,
        mb_cols,
        mb_rows,
        macroblocks,
    }
}

fn build_tables(coded: &[CodedFrame]) -> Result<Tables> {
    let mut coeff: BTreeMap<Symbol, u64> = BTreeMap::new();
    let mut mv: BTreeMap<Symbol, u64> = BTreeMap::new();
    for cf in coded {
        for mb in &cf.macroblocks {
            for b in &mb.blocks {
                for s in bitio::block_symbols(&bitio::rle_encode(b)) {
                    *coeff.entry(s).or_default() += 1;
                }
            }
        }
        if let Some(field) = cf.mv_field() {
            for d in motion::diff_code_mv(&field) {
                for s in format::mv_delta_symbols(d) {
                    *mv.entry(s).or_default() += 1;
                }
            }
        }
    }
    if coeff.is_empty() {
        coeff.insert(bitio::EOB, 1);
    }
    Ok(Tables {
        coeff: bitio::build_huffman(&coeff)?,
        mv: if mv.is_empty() {
            None
        } else {
            Some(bitio::build_huffman(&mv)?)
        },
    })
}

fn write_frame(out: &mut Vec<u8>, cf: &CodedFrame, tables: &Tables) -> Result<()> {
    let mut w = BitWriter::new();
    let deltas = cf
        .mv_field()
        .map(|f| motion::diff_code_mv(&f))
        .unwrap_or_default();
    let mut deltas = deltas.into_iter();
    for mb in &cf.macroblocks {
        if cf.kind == FrameKind::P {
            w.put_bit(mb.inter);
            if mb.inter {
                let d = deltas.next().expect("one delta per inter macroblock");
                format::write_mv_delta(&mut w, tables.mv_table(0)?, d)?;
            }
        }
        for b in &mb.blocks {
            bitio::write_block(&mut w, &tables.coeff, &bitio::rle_encode(b))?;
        }
    }
    let (payload, pad_bits) = w.finish();
    let payload_len =
        u32::try_from(payload.len()).map_err(|_| Error::param("frame payload exceeds 4 GiB"))?;
    FrameHeader {
        frame_no: cf.frame_no,
        kind: cf.kind,
        pad_bits,
        payload_len,
    }
    .write(out);
    out.extend_from_slice(&payload);
    Ok(())
}
