use std::ops::Neg;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::zigzag;
use crate::codec::{MvField, MB_SIZE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{CoeffTensor, Tensor3};

fn crop_side(scale: f64, target: usize) -> usize {
    ((scale * target as f64).round() as usize).max(1)
}

/// Random scale-jittered crop resized back to `target`. Scales whose window
/// does not fit the source are skipped.
pub fn crop_jitter_with<T: Scalar>(
    t: &Tensor3<T>,
    scales: &[f64],
    target: (usize, usize),
    rng: &mut impl Rng,
) -> Result<Tensor3<T>> {
    let fitting: Vec<f64> = scales
        .iter()
        .copied()
        .filter(|&s| crop_side(s, target.0) <= t.height() && crop_side(s, target.1) <= t.width())
        .collect();
    let &scale = fitting.choose(rng).ok_or_else(|| {
        Error::param(format!(
            "{}x{} source is smaller than every crop for target {}x{} and scales {scales:?}",
            t.height(),
            t.width(),
            target.0,
            target.1
        ))
    })?;
    let (ch, cw) = (crop_side(scale, target.0), crop_side(scale, target.1));
    let y0 = rng.gen_range(0..=t.height() - ch);
    let x0 = rng.gen_range(0..=t.width() - cw);
    Ok(t.crop(y0, x0, ch, cw)?.resize_bilinear(target.0, target.1))
}

pub fn crop_jitter<T: Scalar>(
    t: &Tensor3<T>,
    scales: &[f64],
    target: (usize, usize),
    seed: u64,
) -> Result<Tensor3<T>> {
    crop_jitter_with(t, scales, target, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Horizontal flip in the DCT domain: block columns reversed and every band
/// with an odd horizontal frequency negated. Works on any band prefix.
pub fn hflip_dct<T: Copy + Neg<Output = T>>(t: &CoeffTensor<T>) -> CoeffTensor<T> {
    let bands = t.bands();
    let odd: Vec<bool> = (0..bands).map(|b| zigzag::position(b).1 % 2 == 1).collect();
    let mut grid = t.grid().mirror_columns();
    for cell in grid.data_mut().chunks_exact_mut(bands) {
        for (v, &neg) in cell.iter_mut().zip(&odd) {
            if neg {
                *v = -*v;
            }
        }
    }
    CoeffTensor::from_grid(grid, bands).expect("shape preserved")
}

/// Horizontal flip of a `(dx, dy)` motion grid.
pub fn hflip_mv<T: Copy + Neg<Output = T>>(t: &Tensor3<T>) -> Tensor3<T> {
    let mut out = t.mirror_columns();
    for cell in out.data_mut().chunks_exact_mut(2) {
        cell[0] = -cell[0];
    }
    out
}

/// Crop origins of [`test_expand`]: top-left, top-right, bottom-left,
/// bottom-right, centre.
pub fn five_crop_origins(
    src: (usize, usize),
    target: (usize, usize),
) -> Result<[(usize, usize); 5]> {
    if src.0 < target.0 || src.1 < target.1 {
        return Err(Error::param(format!(
            "{}x{} source is smaller than the {}x{} target",
            src.0, src.1, target.0, target.1
        )));
    }
    let (dy, dx) = (src.0 - target.0, src.1 - target.1);
    Ok([(0, 0), (0, dx), (dy, 0), (dy, dx), (dy / 2, dx / 2)])
}

/// Ten test views: each of the five crops followed by its flip.
pub fn test_expand<T: Copy>(
    t: &Tensor3<T>,
    target: (usize, usize),
    flip: impl Fn(&Tensor3<T>) -> Tensor3<T>,
) -> Result<Vec<Tensor3<T>>> {
    let mut out = Vec::with_capacity(10);
    for (y, x) in five_crop_origins((t.height(), t.width()), target)? {
        let c = t.crop(y, x, target.0, target.1)?;
        out.push(flip(&c));
        out.insert(out.len() - 1, c);
    }
    Ok(out)
}

/// Native-resolution motion grid: each vector covers its macroblock's
/// 16×16 pixels; intra macroblocks are zero.
pub fn mv_grid<T: Scalar>(field: &MvField) -> Tensor3<T> {
    Tensor3::from_fn(
        field.mb_rows * MB_SIZE,
        field.mb_cols * MB_SIZE,
        2,
        |y, x, c| {
            let i = (y / MB_SIZE) * field.mb_cols + x / MB_SIZE;
            if field.intra[i] {
                return T::zero();
            }
            let mv = field.vectors[i];
            T::of(f64::from(if c == 0 { mv.dx } else { mv.dy }))
        },
    )
}

/// Motion grid resized to `target` pixels.
pub fn rasterize_mv<T: Scalar>(field: &MvField, target: (usize, usize)) -> Result<Tensor3<T>> {
    if field.is_empty() {
        return Err(Error::param("empty motion field"));
    }
    Ok(mv_grid::<T>(field).resize_bilinear(target.0, target.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::MotionVector;

    #[test]
    fn scale_one_on_target_sized_source_is_identity() {
        let t = Tensor3::from_fn(28, 28, 3, |y, x, c| (y * 31 + x * 7 + c) as f32);
        for seed in 0..10 {
            assert_eq!(crop_jitter(&t, &[1.0], (28, 28), seed).unwrap(), t);
        }
    }

    #[test]
    fn jitter_shapes_and_errors() {
        let t = Tensor3::from_fn(30, 40, 2, |y, x, _| (y + x) as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let o = crop_jitter_with(&t, &[1.0, 0.875, 0.75, 0.66], (28, 28), &mut rng).unwrap();
            assert_eq!(o.shape(), (28, 28, 2));
        }
        let small = Tensor3::filled(10, 10, 1, 0.0f32);
        assert!(crop_jitter(&small, &[1.0, 0.66], (28, 28), 0).is_err());
        assert_eq!(
            crop_jitter(&t, &[0.75], (28, 28), 1).unwrap(),
            crop_jitter(&t, &[0.75], (28, 28), 1).unwrap()
        );
    }

    #[test]
    fn flip_involution_and_dc() {
        let g = Tensor3::from_fn(3, 5, 192, |y, x, c| (y * 1000 + x * 100 + c) as i32 - 700);
        let t = CoeffTensor::from_grid(g, 64).unwrap();
        let f = hflip_dct(&t);
        assert_eq!(hflip_dct(&f), t);
        for ch in 0..3 {
            assert_eq!(f.get(1, 0, ch, 0), t.get(1, 4, ch, 0));
            // band 1 is (0, 1): odd horizontal frequency
            assert_eq!(f.get(1, 0, ch, 1), -t.get(1, 4, ch, 1));
            // band 2 is (1, 0)
            assert_eq!(f.get(1, 0, ch, 2), t.get(1, 4, ch, 2));
        }
    }

    #[test]
    fn ten_views_in_order() {
        let t = Tensor3::from_fn(6, 8, 2, |y, x, c| (y * 100 + x * 10 + c) as i32);
        let v = test_expand(&t, (4, 4), hflip_mv).unwrap();
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], t.crop(0, 0, 4, 4).unwrap());
        assert_eq!(v[2], t.crop(0, 4, 4, 4).unwrap());
        assert_eq!(v[8], t.crop(1, 2, 4, 4).unwrap());
        for p in v.chunks(2) {
            assert_eq!(hflip_mv(&p[1]), p[0]);
        }
        let same = test_expand(&t, (6, 8), hflip_mv).unwrap();
        assert_eq!(same[8], t);
        assert!(test_expand(&t, (7, 4), hflip_mv).is_err());
    }

    #[test]
    fn uniform_and_intra_fields() {
        let f = MvField::uniform(20, 15, MotionVector::new(3, -1));
        let r = rasterize_mv::<f32>(&f, (224, 224)).unwrap();
        assert!(r.data().chunks(2).all(|c| c == [3.0, -1.0]));
        let mut f = f;
        f.intra.fill(true);
        assert!(rasterize_mv::<f32>(&f, (224, 224))
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn resize_preserves_means() {
        let mut f = MvField::uniform(20, 15, MotionVector::ZERO);
        for (i, mv) in f.vectors.iter_mut().enumerate() {
            *mv = MotionVector::new((i % 7) as i32 - 3, (i % 5) as i32 - 2);
        }
        let native = mv_grid::<f64>(&f).channel_means();
        let resized = rasterize_mv::<f64>(&f, (224, 224)).unwrap().channel_means();
        for (a, b) in native.iter().zip(&resized) {
            assert!((a - b).abs() <= 0.01 * a.abs().max(1.0), "{a} {b}");
        }
    }
}
