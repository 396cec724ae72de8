//! Block coding and frame reconstruction shared by the encoder's closed loop
//! and the full decoder, so both produce identical pictures.

use super::dct::{Block, Dct8};
use super::format::FrameKind;
use super::frame::{Frame, Plane};
use super::motion::{MotionVector, MvField, MB_SIZE};
use super::quant::{self, QuantConfig};
use super::zigzag;
use crate::error::{Error, Result};
use crate::probe;

/// Level shift applied to intra samples; also the intra prediction value.
pub const INTRA_PREDICTION: i16 = 128;

/// One macroblock as it appears in the bitstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedMacroblock {
    pub inter: bool,
    /// Zero for intra macroblocks.
    pub mv: MotionVector,
    /// Y0 Y1 Y2 Y3 Cb Cr, zigzag-ordered quantized levels.
    pub blocks: [[i32; 64]; 6],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedFrame {
    pub frame_no: u32,
    pub kind: FrameKind,
    pub mb_cols: usize,
    pub mb_rows: usize,
    pub macroblocks: Vec<CodedMacroblock>,
}

impl CodedFrame {
    /// Motion field of a P-frame; `None` for I-frames.
    pub fn mv_field(&self) -> Option<MvField> {
        (self.kind == FrameKind::P).then(|| MvField {
            mb_cols: self.mb_cols,
            mb_rows: self.mb_rows,
            vectors: self.macroblocks.iter().map(|m| m.mv).collect(),
            intra: self.macroblocks.iter().map(|m| !m.inter).collect(),
        })
    }
}

/// Origin (in plane samples) and plane index of block `blk` of a macroblock.
#[inline]
pub(crate) fn block_origin(mb_x: usize, mb_y: usize, blk: usize) -> (usize, usize, usize) {
    match blk {
        0..=3 => (
            mb_x * MB_SIZE + (blk & 1) * 8,
            mb_y * MB_SIZE + (blk >> 1) * 8,
            0,
        ),
        4 => (mb_x * 8, mb_y * 8, 1),
        _ => (mb_x * 8, mb_y * 8, 2),
    }
}

/// Forward path: DCT, quantize and zigzag a block of differences.
pub(crate) fn code_block(dct: &Dct8<f64>, q: QuantConfig, diff: &Block<f64>) -> [i32; 64] {
    zigzag::zigzag(&quant::quantize(&dct.forward(diff), q))
}

/// Inverse path: dequantize, inverse DCT and round half away from zero.
pub(crate) fn residual_block(dct: &Dct8<f64>, q: QuantConfig, levels: &[i32; 64]) -> Block<i16> {
    let coeffs: Block<f64> = quant::dequantize(&zigzag::inverse_zigzag(levels), q);
    let spatial = dct.inverse(&coeffs);
    spatial.map(|row| row.map(|v| v.round().clamp(-32768.0, 32767.0) as i16))
}

/// Per-sample residuals of a frame in the layout of its planes.
#[derive(Debug, Clone)]
pub struct ResidualPlanes {
    pub width: usize,
    pub height: usize,
    pub planes: [Vec<i16>; 3],
}

/// Runs the inverse transform over every block of a coded frame.
pub fn residual_planes(coded: &CodedFrame, q: QuantConfig, dct: &Dct8<f64>) -> ResidualPlanes {
    let width = coded.mb_cols * MB_SIZE;
    let height = coded.mb_rows * MB_SIZE;
    let mut planes = [
        vec![0i16; width * height],
        vec![0i16; width * height / 4],
        vec![0i16; width * height / 4],
    ];
    for (i, mb) in coded.macroblocks.iter().enumerate() {
        let (mb_x, mb_y) = (i % coded.mb_cols, i / coded.mb_cols);
        for (blk, levels) in mb.blocks.iter().enumerate() {
            let (x, y, p) = block_origin(mb_x, mb_y, blk);
            let stride = if p == 0 { width } else { width / 2 };
            if levels.iter().all(|&l| l == 0) {
                continue;
            }
            let res = residual_block(dct, q, levels);
            for (r, row) in res.iter().enumerate() {
                planes[p][(y + r) * stride + x..][..8].copy_from_slice(row);
            }
        }
    }
    ResidualPlanes {
        width,
        height,
        planes,
    }
}

#[inline]
fn add_clamped(pred: u8, res: i16) -> u8 {
    (i32::from(pred) + i32::from(res)).clamp(0, 255) as u8
}

fn compose_block(
    dst: &mut Plane,
    res: &[i16],
    anchor: Option<&Plane>,
    x: usize,
    y: usize,
    size: usize,
    mv: Option<MotionVector>,
) -> Result<()> {
    let stride = dst.width;
    match (mv, anchor) {
        (Some(mv), Some(src)) => {
            let sx = x as i64 + i64::from(mv.dx);
            let sy = y as i64 + i64::from(mv.dy);
            if sx < 0 || sy < 0 || sx as usize + size > src.width || sy as usize + size > src.height
            {
                return Err(Error::corrupt(
                    0,
                    format!(
                        "motion vector ({}, {}) at ({x}, {y}) points outside the anchor",
                        mv.dx, mv.dy
                    ),
                ));
            }
            let (sx, sy) = (sx as usize, sy as usize);
            for r in 0..size {
                let s = &src.data[(sy + r) * src.width + sx..][..size];
                let rr = &res[(y + r) * stride + x..][..size];
                let d = &mut dst.data[(y + r) * stride + x..][..size];
                for ((o, &p), &e) in d.iter_mut().zip(s).zip(rr) {
                    *o = add_clamped(p, e);
                }
            }
        }
        (Some(_), None) => {
            return Err(Error::corrupt(
                0,
                "inter macroblock without an anchor frame",
            ))
        }
        (None, _) => {
            for r in 0..size {
                let rr = &res[(y + r) * stride + x..][..size];
                let d = &mut dst.data[(y + r) * stride + x..][..size];
                for (o, &e) in d.iter_mut().zip(rr) {
                    *o = add_clamped(INTRA_PREDICTION as u8, e);
                }
            }
        }
    }
    probe::count_pixel_writes((size * size) as u64);
    Ok(())
}

/// Prediction plus residual for every macroblock.
pub fn compose_frame(
    coded: &CodedFrame,
    res: &ResidualPlanes,
    anchor: Option<&Frame>,
) -> Result<Frame> {
    let mut out = Frame::new(res.width, res.height);
    for (i, mb) in coded.macroblocks.iter().enumerate() {
        let (mb_x, mb_y) = (i % coded.mb_cols, i / coded.mb_cols);
        let mv = mb.inter.then_some(mb.mv);
        compose_block(
            &mut out.y,
            &res.planes[0],
            anchor.map(|a| &a.y),
            mb_x * 16,
            mb_y * 16,
            16,
            mv,
        )?;
        let cmv = mv.map(MotionVector::chroma);
        compose_block(
            &mut out.cb,
            &res.planes[1],
            anchor.map(|a| &a.cb),
            mb_x * 8,
            mb_y * 8,
            8,
            cmv,
        )?;
        compose_block(
            &mut out.cr,
            &res.planes[2],
            anchor.map(|a| &a.cr),
            mb_x * 8,
            mb_y * 8,
            8,
            cmv,
        )?;
    }
    Ok(out)
}

pub fn reconstruct_frame(
    coded: &CodedFrame,
    anchor: Option<&Frame>,
    q: QuantConfig,
    dct: &Dct8<f64>,
) -> Result<Frame> {
    compose_frame(coded, &residual_planes(coded, q, dct), anchor)
}
