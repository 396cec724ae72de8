//! Bitstream layout.
//!
//! ```text
//! stream   := "FCV1" version:u8 width:u16 height:u16 fps:u8 gop_size:u8 quality:u8
//!             tables frame*
//! tables   := table_mode:u8 coeff_table mv_table
//! table    := count:u16 (symbol:u16 length:u8){count}
//! frame    := frame_no:u32 flags:u8 payload_len:u32 payload
//! flags    := type:2 (I=0, P=1, B=2 reserved) pad_bits:3 reserved:3
//! ```
//!
//! Integers are big-endian. Payloads are MSB-first bit strings padded to a
//! byte boundary; `pad_bits` says how many trailing bits are padding.
//!
//! Frame payloads are a raster scan of macroblocks. An I-frame macroblock is
//! six coefficient blocks (Y0 Y1 Y2 Y3 Cb Cr). A P-frame macroblock starts
//! with one mode bit (1 = inter); inter macroblocks follow it with the
//! differential motion vector, then the six residual blocks. A block is a
//! sequence of `(run, size)` Huffman symbols each followed by `size` raw
//! magnitude bits, terminated by the end-of-block symbol. A motion delta
//! component is a Huffman-coded size followed by `size` raw bits.

use crate::bitio::{self, BitReader, BitWriter, HuffmanTable, Symbol};
use crate::error::{Error, Result};

use super::motion::MotionVector;

pub const MAGIC: &[u8; 4] = b"FCV1";
pub const VERSION: u8 = 1;
pub const FRAME_HEADER_LEN: usize = 9;

/// Tables are built per stream from the stream's own symbol counts.
pub const TABLE_MODE_PER_STREAM: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    I,
    P,
    /// Reserved code point; never produced by the encoder.
    B,
}

impl FrameKind {
    pub fn code(self) -> u8 {
        match self {
            FrameKind::I => 0,
            FrameKind::P => 1,
            FrameKind::B => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(FrameKind::I),
            1 => Some(FrameKind::P),
            2 => Some(FrameKind::B),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub width: u16,
    pub height: u16,
    pub fps: u8,
    pub gop_size: u8,
    pub quality: u8,
}

impl StreamHeader {
    pub const LEN: usize = 12;

    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.push(self.version);
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.push(self.fps);
        out.push(self.gop_size);
        out.push(self.quality);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    pub coeff: HuffmanTable,
    /// Absent when the stream has no inter macroblocks.
    pub mv: Option<HuffmanTable>,
}

impl Tables {
    pub fn write(&self, out: &mut Vec<u8>) {
        out.push(TABLE_MODE_PER_STREAM);
        write_table(out, Some(&self.coeff));
        write_table(out, self.mv.as_ref());
    }

    pub(crate) fn mv_table(&self, bit_offset: u64) -> Result<&HuffmanTable> {
        self.mv.as_ref().ok_or_else(|| {
            Error::corrupt(
                bit_offset,
                "inter macroblock in a stream without a motion table",
            )
        })
    }
}

fn write_table(out: &mut Vec<u8>, t: Option<&HuffmanTable>) {
    let lengths = t.map(|t| t.code_lengths()).unwrap_or(&[]);
    out.extend_from_slice(&(lengths.len() as u16).to_be_bytes());
    for &(s, l) in lengths {
        out.extend_from_slice(&s.to_be_bytes());
        out.push(l);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub frame_no: u32,
    pub kind: FrameKind,
    pub pad_bits: u8,
    pub payload_len: u32,
}

impl FrameHeader {
    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.frame_no.to_be_bytes());
        out.push((self.kind.code() << 6) | ((self.pad_bits & 7) << 3));
        out.extend_from_slice(&self.payload_len.to_be_bytes());
    }

    pub fn payload_bits(&self) -> u64 {
        u64::from(self.payload_len) * 8 - u64::from(self.pad_bits)
    }
}

/// Byte cursor that records how many bytes it has handed out.
pub(crate) struct ByteCursor<'a> {
    data: &'a [u8],
    pos: usize,
    touched: usize,
}

impl<'a> ByteCursor<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self {
            data,
            pos: 0,
            touched: 0,
        }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn touched(&self) -> usize {
        self.touched
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.data.len()
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self
            .data
            .get(self.pos..self.pos + n)
            .ok_or(Error::Truncated {
                bit_offset: self.data.len() as u64 * 8,
            })?;
        self.pos += n;
        self.touched += n;
        Ok(s)
    }

    pub fn skip(&mut self, n: usize) -> Result<()> {
        if self.pos + n > self.data.len() {
            return Err(Error::Truncated {
                bit_offset: self.data.len() as u64 * 8,
            });
        }
        self.pos += n;
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub(crate) fn read_stream_header(c: &mut ByteCursor<'_>) -> Result<StreamHeader> {
    let magic = c
        .take(4)
        .map_err(|_| Error::Unsupported("stream shorter than its magic".into()))?;
    if magic != MAGIC {
        return Err(Error::Unsupported(format!("bad magic {magic:?}")));
    }
    let version = c.u8()?;
    if version != VERSION {
        return Err(Error::Unsupported(format!("stream version {version}")));
    }
    let h = StreamHeader {
        version,
        width: c.u16()?,
        height: c.u16()?,
        fps: c.u8()?,
        gop_size: c.u8()?,
        quality: c.u8()?,
    };
    super::frame::check_dims(h.width as usize, h.height as usize)
        .map_err(|e| Error::corrupt(32, format!("header: {e}")))?;
    if h.gop_size == 0 || h.quality == 0 {
        return Err(Error::corrupt(72, "zero gop size or quality"));
    }
    Ok(h)
}

fn read_table(c: &mut ByteCursor<'_>) -> Result<Option<HuffmanTable>> {
    let at = c.pos() as u64 * 8;
    let n = c.u16()? as usize;
    if n == 0 {
        return Ok(None);
    }
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let s: Symbol = c.u16()?;
        let l = c.u8()?;
        pairs.push((s, l));
    }
    HuffmanTable::from_code_lengths(&pairs)
        .map(Some)
        .map_err(|e| Error::corrupt(at, format!("Huffman table: {e}")))
}

pub(crate) fn read_tables(c: &mut ByteCursor<'_>) -> Result<Tables> {
    let at = c.pos() as u64 * 8;
    let mode = c.u8()?;
    if mode != TABLE_MODE_PER_STREAM {
        return Err(Error::Unsupported(format!("table mode {mode}")));
    }
    let coeff = read_table(c)?.ok_or_else(|| Error::corrupt(at, "missing coefficient table"))?;
    let mv = read_table(c)?;
    Ok(Tables { coeff, mv })
}

pub(crate) fn read_frame_header(c: &mut ByteCursor<'_>) -> Result<FrameHeader> {
    let at = c.pos() as u64 * 8;
    let frame_no = c.u32()?;
    let flags = c.u8()?;
    let payload_len = c.u32()?;
    let kind = FrameKind::from_code(flags >> 6)
        .ok_or_else(|| Error::corrupt(at + 32, "invalid frame type"))?;
    let pad_bits = (flags >> 3) & 7;
    if flags & 7 != 0 || (payload_len == 0 && pad_bits != 0) {
        return Err(Error::corrupt(at + 32, "invalid frame flags"));
    }
    Ok(FrameHeader {
        frame_no,
        kind,
        pad_bits,
        payload_len,
    })
}

pub(crate) fn write_mv_delta(
    w: &mut BitWriter,
    table: &HuffmanTable,
    d: MotionVector,
) -> Result<()> {
    for v in [d.dx, d.dy] {
        let size = bitio::magnitude_size(v);
        table.encode_symbol(w, size as Symbol)?;
        if size > 0 {
            w.push(bitio::magnitude_bits(v, size), size);
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn read_mv_delta(r: &mut BitReader<'_>, table: &HuffmanTable) -> Result<MotionVector> {
    let mut comp = [0i32; 2];
    for v in comp.iter_mut() {
        let at = r.bit_offset();
        let size = u32::from(table.decode_symbol(r)?);
        if size > bitio::MAX_SIZE {
            return Err(Error::corrupt(at, format!("motion size {size}")));
        }
        if size > 0 {
            *v = bitio::magnitude_from_bits(r.get_bits(size)?, size);
        }
    }
    Ok(MotionVector::new(comp[0], comp[1]))
}

pub(crate) fn mv_delta_symbols(d: MotionVector) -> [Symbol; 2] {
    [
        bitio::magnitude_size(d.dx) as Symbol,
        bitio::magnitude_size(d.dy) as Symbol,
    ]
}

/// Receives the parsed contents of a frame payload.
pub(crate) trait PayloadSink {
    /// Called once per macroblock before its blocks; `mv` is the absolute
    /// vector (zero for intra).
    fn macroblock(&mut self, mb: usize, inter: bool, mv: MotionVector);
    /// Called for each of the six blocks with zigzag-ordered levels.
    fn block(&mut self, mb: usize, blk: usize, levels: &[i32; 64]);
}

/// Entropy-decodes one frame payload, feeding a sink. No pixel work.
pub(crate) fn parse_payload(
    r: &mut BitReader<'_>,
    kind: FrameKind,
    tables: &Tables,
    mb_count: usize,
    sink: &mut impl PayloadSink,
) -> Result<()> {
    let mut pred = MotionVector::ZERO;
    for mb in 0..mb_count {
        let (inter, mv) = match kind {
            FrameKind::I => (false, MotionVector::ZERO),
            FrameKind::P => {
                if r.get_bit()? {
                    let at = r.bit_offset();
                    let d = read_mv_delta(r, tables.mv_table(at)?)?;
                    pred = MotionVector::new(pred.dx + d.dx, pred.dy + d.dy);
                    (true, pred)
                } else {
                    (false, MotionVector::ZERO)
                }
            }
            FrameKind::B => return Err(Error::Unsupported("B-frames".into())),
        };
        sink.macroblock(mb, inter, mv);
        for blk in 0..6 {
            let levels = bitio::read_block(r, &tables.coeff)?;
            sink.block(mb, blk, &levels);
        }
    }
    if r.remaining() != 0 {
        return Err(Error::corrupt(
            r.bit_offset(),
            format!("{} trailing payload bits", r.remaining()),
        ));
    }
    Ok(())
}
