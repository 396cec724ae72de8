//! Block motion estimation and compensation, and differential MV coding.

use super::frame::{Frame, Plane};
use crate::error::{Error, Result};
use crate::probe;

pub const MB_SIZE: usize = 16;

/// Displacement from a target macroblock to its match in the anchor frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    /// Chroma vector: each component halved, rounded toward zero.
    pub fn chroma(self) -> Self {
        Self::new(self.dx / 2, self.dy / 2)
    }
}

/// Per-macroblock vectors of one frame in raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvField {
    pub mb_cols: usize,
    pub mb_rows: usize,
    pub vectors: Vec<MotionVector>,
    /// Intra-coded macroblocks; their vector is always zero.
    pub intra: Vec<bool>,
}

impl MvField {
    pub fn uniform(mb_cols: usize, mb_rows: usize, mv: MotionVector) -> Self {
        Self {
            mb_cols,
            mb_rows,
            vectors: vec![mv; mb_cols * mb_rows],
            intra: vec![false; mb_cols * mb_rows],
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, mb_x: usize, mb_y: usize) -> MotionVector {
        self.vectors[mb_y * self.mb_cols + mb_x]
    }

    pub fn inter_count(&self) -> usize {
        self.intra.iter().filter(|&&i| !i).count()
    }
}

#[inline]
fn sad_16(
    target: &Plane,
    tx: usize,
    ty: usize,
    anchor: &Plane,
    ax: usize,
    ay: usize,
    bail: u32,
) -> u32 {
    let mut sad = 0u32;
    for r in 0..MB_SIZE {
        let t = &target.row(ty + r)[tx..tx + MB_SIZE];
        let a = &anchor.row(ay + r)[ax..ax + MB_SIZE];
        sad += t
            .iter()
            .zip(a)
            .map(|(&p, &q)| u32::from(p.abs_diff(q)))
            .sum::<u32>();
        if sad > bail {
            return sad;
        }
    }
    sad
}

/// Sum of absolute differences between the target macroblock at
/// `(mb_x, mb_y)` and the anchor block displaced by `mv`.
pub fn block_sad(
    target: &Plane,
    anchor: &Plane,
    mb_x: usize,
    mb_y: usize,
    mv: MotionVector,
) -> Option<u32> {
    let (x, y) = ((mb_x * MB_SIZE) as i64, (mb_y * MB_SIZE) as i64);
    let (ax, ay) = (x + i64::from(mv.dx), y + i64::from(mv.dy));
    if ax < 0
        || ay < 0
        || ax as usize + MB_SIZE > anchor.width
        || ay as usize + MB_SIZE > anchor.height
    {
        return None;
    }
    Some(sad_16(
        target,
        x as usize,
        y as usize,
        anchor,
        ax as usize,
        ay as usize,
        u32::MAX,
    ))
}

/// Exhaustive SAD search over a `±range` window clipped to the anchor.
///
/// Ties resolve to the smallest `|dx| + |dy|`, then smallest `dy`, then
/// smallest `dx`.
pub fn motion_estimate(
    target: &Plane,
    anchor: &Plane,
    mb_x: usize,
    mb_y: usize,
    range: u32,
) -> (MotionVector, u32) {
    let x = (mb_x * MB_SIZE) as i32;
    let y = (mb_y * MB_SIZE) as i32;
    let r = range as i32;
    let min_dx = (-r).max(-x);
    let max_dx = r.min(anchor.width as i32 - MB_SIZE as i32 - x);
    let min_dy = (-r).max(-y);
    let max_dy = r.min(anchor.height as i32 - MB_SIZE as i32 - y);

    let key = |mv: MotionVector, sad: u32| (sad, mv.dx.abs() + mv.dy.abs(), mv.dy, mv.dx);
    let mut best_mv = MotionVector::ZERO;
    let mut best_sad = sad_16(
        target,
        x as usize,
        y as usize,
        anchor,
        x as usize,
        y as usize,
        u32::MAX,
    );
    for dy in min_dy..=max_dy {
        for dx in min_dx..=max_dx {
            if dx == 0 && dy == 0 {
                continue;
            }
            let sad = sad_16(
                target,
                x as usize,
                y as usize,
                anchor,
                (x + dx) as usize,
                (y + dy) as usize,
                best_sad,
            );
            let mv = MotionVector::new(dx, dy);
            if key(mv, sad) < key(best_mv, best_sad) {
                best_mv = mv;
                best_sad = sad;
            }
        }
    }
    (best_mv, best_sad)
}

/// Sum of `|pixel - mean|` over a 16×16 luma macroblock; the intra cost proxy.
pub fn intra_cost(target: &Plane, mb_x: usize, mb_y: usize) -> f64 {
    let (x, y) = (mb_x * MB_SIZE, mb_y * MB_SIZE);
    let mut sum = 0u32;
    for r in 0..MB_SIZE {
        sum += target.row(y + r)[x..x + MB_SIZE]
            .iter()
            .map(|&p| u32::from(p))
            .sum::<u32>();
    }
    let mean = f64::from(sum) / (MB_SIZE * MB_SIZE) as f64;
    let mut dev = 0.0;
    for r in 0..MB_SIZE {
        dev += target.row(y + r)[x..x + MB_SIZE]
            .iter()
            .map(|&p| (f64::from(p) - mean).abs())
            .sum::<f64>();
    }
    dev
}

/// Copies a `size`×`size` block from `src` at `(x+dx, y+dy)` into `dst` at `(x, y)`.
pub(crate) fn copy_block(
    src: &Plane,
    dst: &mut Plane,
    x: usize,
    y: usize,
    size: usize,
    mv: MotionVector,
) -> Result<()> {
    let sx = x as i64 + i64::from(mv.dx);
    let sy = y as i64 + i64::from(mv.dy);
    if sx < 0 || sy < 0 || sx as usize + size > src.width || sy as usize + size > src.height {
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
        dst.data[(y + r) * dst.width + x..][..size].copy_from_slice(s);
    }
    probe::count_pixel_writes((size * size) as u64);
    Ok(())
}

/// Predicts one macroblock (luma 16×16 plus both 8×8 chroma blocks).
pub(crate) fn predict_macroblock(
    anchor: &Frame,
    out: &mut Frame,
    mb_x: usize,
    mb_y: usize,
    mv: MotionVector,
) -> Result<()> {
    copy_block(
        &anchor.y,
        &mut out.y,
        mb_x * MB_SIZE,
        mb_y * MB_SIZE,
        MB_SIZE,
        mv,
    )?;
    let c = mv.chroma();
    copy_block(&anchor.cb, &mut out.cb, mb_x * 8, mb_y * 8, 8, c)?;
    copy_block(&anchor.cr, &mut out.cr, mb_x * 8, mb_y * 8, 8, c)
}

/// Builds the motion-compensated prediction of a whole frame.
pub fn motion_compensate(anchor: &Frame, field: &MvField) -> Result<Frame> {
    if field.mb_cols * MB_SIZE != anchor.width() || field.mb_rows * MB_SIZE != anchor.height() {
        return Err(Error::param(
            "motion field does not match anchor dimensions",
        ));
    }
    let mut out = anchor.clone();
    for mb_y in 0..field.mb_rows {
        for mb_x in 0..field.mb_cols {
            predict_macroblock(anchor, &mut out, mb_x, mb_y, field.get(mb_x, mb_y))?;
        }
    }
    Ok(out)
}

/// Differential MV coding: each inter macroblock's vector minus the previous
/// inter macroblock's vector in raster order; the predictor starts at zero.
/// Intra macroblocks emit nothing.
pub fn diff_code_mv(field: &MvField) -> Vec<MotionVector> {
    let mut pred = MotionVector::ZERO;
    let mut out = Vec::with_capacity(field.inter_count());
    for (mv, &intra) in field.vectors.iter().zip(&field.intra) {
        if intra {
            continue;
        }
        out.push(MotionVector::new(mv.dx - pred.dx, mv.dy - pred.dy));
        pred = *mv;
    }
    out
}

/// Inverse of [`diff_code_mv`] given the intra layout.
pub fn diff_decode_mv(
    deltas: &[MotionVector],
    intra: &[bool],
    mb_cols: usize,
    mb_rows: usize,
) -> Result<MvField> {
    if intra.len() != mb_cols * mb_rows {
        return Err(Error::param("intra mask does not match macroblock grid"));
    }
    let inter = intra.iter().filter(|&&i| !i).count();
    if deltas.len() != inter {
        return Err(Error::corrupt(
            0,
            format!(
                "{} motion deltas for {} inter macroblocks",
                deltas.len(),
                inter
            ),
        ));
    }
    let mut pred = MotionVector::ZERO;
    let mut it = deltas.iter();
    let vectors = intra
        .iter()
        .map(|&is_intra| {
            if is_intra {
                MotionVector::ZERO
            } else {
                let d = it.next().unwrap();
                pred = MotionVector::new(pred.dx + d.dx, pred.dy + d.dy);
                pred
            }
        })
        .collect();
    Ok(MvField {
        mb_cols,
        mb_rows,
        vectors,
        intra: intra.to_vec(),
    })
}
