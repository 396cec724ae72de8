//! Frequency band selection: keep the lowest `k` zigzag bands of every
//! color channel.

use crate::error::{Error, Result};
use crate::tensor::{CoeffTensor, Tensor3, COLOR_CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FbsConfig {
    k: usize,
}

impl FbsConfig {
    pub fn new(k: usize) -> Result<Self> {
        if !(1..=64).contains(&k) {
            return Err(Error::param(format!("band count {k} outside 1..=64")));
        }
        Ok(Self { k })
    }

    pub fn all() -> Self {
        Self { k: 64 }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// First `min(k, bands)` bands of each channel, values untouched.
pub fn select_bands<T: Copy>(t: &CoeffTensor<T>, cfg: FbsConfig) -> CoeffTensor<T> {
    let (src, dst) = (t.bands(), cfg.k.min(t.bands()));
    if dst == src {
        return t.clone();
    }
    let (h, w, _) = t.grid().shape();
    let mut data = Vec::with_capacity(h * w * COLOR_CHANNELS * dst);
    for cell in t.grid().data().chunks_exact(COLOR_CHANNELS * src) {
        for ch in cell.chunks_exact(src) {
            data.extend_from_slice(&ch[..dst]);
        }
    }
    let grid = Tensor3::new(h, w, COLOR_CHANNELS * dst, data).expect("shape preserved");
    CoeffTensor::from_grid(grid, dst).expect("band count in range")
}

/// Mean squared coefficient of each band over all blocks and channels.
pub fn band_energy(t: &CoeffTensor<i32>) -> Vec<f64> {
    let bands = t.bands();
    let mut sums = vec![0.0f64; bands];
    for ch in t.grid().data().chunks_exact(bands) {
        for (s, &c) in sums.iter_mut().zip(ch) {
            *s += f64::from(c) * f64::from(c);
        }
    }
    let n = (t.h_blocks() * t.w_blocks() * COLOR_CHANNELS).max(1) as f64;
    sums.into_iter().map(|s| s / n).collect()
}

/// Fraction of total energy held by the first `k` bands.
pub fn retained_energy(energy: &[f64], k: usize) -> f64 {
    let total: f64 = energy.iter().sum();
    if total == 0.0 {
        return 1.0;
    }
    energy[..k.min(energy.len())].iter().sum::<f64>() / total
}
