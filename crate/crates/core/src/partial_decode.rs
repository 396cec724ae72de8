//! Partial decoding: frame types, quantized DCT coefficients and motion
//! vectors recovered by parsing and entropy decoding alone. Nothing here runs
//! an inverse transform, motion compensation or writes a pixel.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::bitio::BitReader;
use crate::codec::format::{
    self, ByteCursor, FrameHeader, FrameKind, PayloadSink, StreamHeader, Tables,
};
use crate::codec::{MotionVector, MvField};
use crate::error::{Error, Result};
use crate::tensor::CoeffTensor;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameEntry {
    pub header: FrameHeader,
    /// Byte offset of the payload within the stream.
    pub offset: usize,
}

/// Everything known about a stream without touching frame payloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamInfo {
    pub header: StreamHeader,
    pub tables: Tables,
    pub frames: Vec<FrameEntry>,
    /// Bytes the header parse actually read.
    pub header_bytes_read: usize,
    pub stream_len: usize,
}

impl StreamInfo {
    pub fn width(&self) -> usize {
        usize::from(self.header.width)
    }

    pub fn height(&self) -> usize {
        usize::from(self.header.height)
    }

    pub fn mb_cols(&self) -> usize {
        self.width() / 16
    }

    pub fn mb_rows(&self) -> usize {
        self.height() / 16
    }

    pub fn frame(&self, frame_no: u32) -> Option<&FrameEntry> {
        self.frames
            .binary_search_by_key(&frame_no, |f| f.header.frame_no)
            .ok()
            .map(|i| &self.frames[i])
    }

    /// Frame numbers of the given type, in display order.
    pub fn frames_of_kind(&self, kind: FrameKind) -> Vec<u32> {
        self.frames
            .iter()
            .filter(|f| f.header.kind == kind)
            .map(|f| f.header.frame_no)
            .collect()
    }
}

/// Reads the stream header, Huffman tables and every frame header, skipping
/// payloads by their recorded length.
pub fn parse_headers(bytes: &[u8]) -> Result<StreamInfo> {
    let mut c = ByteCursor::new(bytes);
    let header = format::read_stream_header(&mut c)?;
    let tables = format::read_tables(&mut c)?;
    let mut frames: Vec<FrameEntry> = Vec::new();
    while !c.at_end() {
        let h = format::read_frame_header(&mut c).map_err(|e| match frames.last() {
            Some(prev) => e.in_frame(prev.header.frame_no + 1),
            None => e.in_frame(0),
        })?;
        if let Some(prev) = frames.last() {
            if h.frame_no <= prev.header.frame_no {
                return Err(
                    Error::corrupt(c.pos() as u64 * 8, "frame numbers not increasing")
                        .in_frame(h.frame_no),
                );
            }
        }
        let offset = c.pos();
        c.skip(h.payload_len as usize)
            .map_err(|e| e.in_frame(h.frame_no))?;
        frames.push(FrameEntry { header: h, offset });
    }
    Ok(StreamInfo {
        header,
        tables,
        frames,
        header_bytes_read: c.touched(),
        stream_len: bytes.len(),
    })
}

/// Partial-decode output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub frame_no: u32,
    pub kind: FrameKind,
    /// Quantized coefficients, I-frames only.
    pub dct: Option<CoeffTensor<i32>>,
    /// Motion field with intra mask, P-frames only.
    pub mv_field: Option<MvField>,
    /// P-frame residual levels per macroblock, only when requested.
    pub residuals: Option<Vec<[[i32; 64]; 6]>>,
}

impl FrameFeatures {
    pub fn intra_mask(&self) -> Option<&[bool]> {
        self.mv_field.as_ref().map(|f| f.intra.as_slice())
    }
}

/// Which features [`Extractor::extract_all`] should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Want {
    pub i_dct: bool,
    pub p_mv: bool,
}

impl Want {
    pub const ALL: Want = Want {
        i_dct: true,
        p_mv: true,
    };
    pub const I_DCT: Want = Want {
        i_dct: true,
        p_mv: false,
    };
    pub const P_MV: Want = Want {
        i_dct: false,
        p_mv: true,
    };

    fn wants(&self, kind: FrameKind) -> bool {
        match kind {
            FrameKind::I => self.i_dct,
            FrameKind::P => self.p_mv,
            FrameKind::B => false,
        }
    }
}

struct CoeffSink {
    tensor: CoeffTensor<i32>,
    mb_cols: usize,
}

impl PayloadSink for CoeffSink {
    #[inline]
    fn macroblock(&mut self, _mb: usize, _inter: bool, _mv: MotionVector) {}

    #[inline]
    fn block(&mut self, mb: usize, blk: usize, levels: &[i32; 64]) {
        let (bx, by) = (2 * (mb % self.mb_cols), 2 * (mb / self.mb_cols));
        match blk {
            0..=3 => self
                .tensor
                .block_mut(by + (blk >> 1), bx + (blk & 1), 0)
                .copy_from_slice(levels),
            _ => {
                // chroma covers the macroblock's 2×2 luma blocks
                let ch = blk - 3;
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    self.tensor
                        .block_mut(by + dy, bx + dx, ch)
                        .copy_from_slice(levels);
                }
            }
        }
    }
}

struct MvSink {
    vectors: Vec<MotionVector>,
    intra: Vec<bool>,
    residuals: Option<Vec<[[i32; 64]; 6]>>,
}

impl PayloadSink for MvSink {
    #[inline]
    fn macroblock(&mut self, mb: usize, inter: bool, mv: MotionVector) {
        self.vectors[mb] = mv;
        self.intra[mb] = !inter;
    }

    #[inline]
    fn block(&mut self, mb: usize, blk: usize, levels: &[i32; 64]) {
        if let Some(r) = self.residuals.as_mut() {
            r[mb][blk] = *levels;
        }
    }
}

/// Random-access partial decoder over an immutable stream.
#[derive(Debug)]
pub struct Extractor<'a> {
    bytes: &'a [u8],
    info: StreamInfo,
    keep_residuals: bool,
    payload_bytes_read: AtomicU64,
}

impl<'a> Extractor<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self> {
        Ok(Self::with_info(bytes, parse_headers(bytes)?))
    }

    pub fn with_info(bytes: &'a [u8], info: StreamInfo) -> Self {
        Self {
            bytes,
            info,
            keep_residuals: false,
            payload_bytes_read: AtomicU64::new(0),
        }
    }

    /// Also surface P-frame residual levels (they are entropy-decoded either way).
    pub fn keep_residuals(mut self, keep: bool) -> Self {
        self.keep_residuals = keep;
        self
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    /// Header bytes plus every payload byte decoded so far.
    pub fn bytes_read(&self) -> u64 {
        self.info.header_bytes_read as u64 + self.payload_bytes_read.load(Ordering::Relaxed)
    }

    pub fn payload_bytes_read(&self) -> u64 {
        self.payload_bytes_read.load(Ordering::Relaxed)
    }

    pub fn extract_frame(&self, frame_no: u32) -> Result<FrameFeatures> {
        let entry = self
            .info
            .frame(frame_no)
            .ok_or_else(|| Error::param(format!("no frame {frame_no} in stream")))?;
        self.extract_entry(entry).map_err(|e| e.in_frame(frame_no))
    }

    fn extract_entry(&self, entry: &FrameEntry) -> Result<FrameFeatures> {
        let h = &entry.header;
        let payload = &self.bytes[entry.offset..entry.offset + h.payload_len as usize];
        self.payload_bytes_read
            .fetch_add(u64::from(h.payload_len), Ordering::Relaxed);
        let mut r =
            BitReader::with_len(payload, h.payload_bits()).with_base(entry.offset as u64 * 8);
        let (cols, rows) = (self.info.mb_cols(), self.info.mb_rows());
        let n = cols * rows;
        let mut out = FrameFeatures {
            frame_no: h.frame_no,
            kind: h.kind,
            dct: None,
            mv_field: None,
            residuals: None,
        };
        match h.kind {
            FrameKind::I => {
                let mut sink = CoeffSink {
                    tensor: CoeffTensor::zeros(rows * 2, cols * 2, 64),
                    mb_cols: cols,
                };
                format::parse_payload(&mut r, h.kind, &self.info.tables, n, &mut sink)?;
                out.dct = Some(sink.tensor);
            }
            FrameKind::P => {
                let mut sink = MvSink {
                    vectors: vec![MotionVector::ZERO; n],
                    intra: vec![false; n],
                    residuals: self.keep_residuals.then(|| vec![[[0; 64]; 6]; n]),
                };
                format::parse_payload(&mut r, h.kind, &self.info.tables, n, &mut sink)?;
                out.mv_field = Some(MvField {
                    mb_cols: cols,
                    mb_rows: rows,
                    vectors: sink.vectors,
                    intra: sink.intra,
                });
                out.residuals = sink.residuals;
            }
            FrameKind::B => return Err(Error::Unsupported("B-frames".into())),
        }
        Ok(out)
    }

    /// Features of every wanted frame in display order; unwanted payloads
    /// are skipped without being read.
    pub fn extract_all(&self, want: Want) -> impl Iterator<Item = Result<FrameFeatures>> + '_ {
        self.info
            .frames
            .iter()
            .filter(move |e| want.wants(e.header.kind))
            .map(move |e| {
                self.extract_entry(e)
                    .map_err(|err| err.in_frame(e.header.frame_no))
            })
    }
}

pub fn extract_frame(bytes: &[u8], frame_no: u32) -> Result<FrameFeatures> {
    Extractor::new(bytes)?.extract_frame(frame_no)
}

pub fn extract_all(bytes: &[u8], want: Want) -> Result<Vec<FrameFeatures>> {
    let ex = Extractor::new(bytes)?;
    let out = ex.extract_all(want).collect();
    out
}
