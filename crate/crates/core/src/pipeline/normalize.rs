use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CoeffTensor, Tensor3, COLOR_CHANNELS};

/// Per channel-band mean and standard deviation of quantized coefficients,
/// indexed `channel * 64 + band`. Stored as a JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

const FULL: usize = COLOR_CHANNELS * 64;

impl BandStats {
    pub fn identity() -> Self {
        Self {
            mean: vec![0.0; FULL],
            std: vec![1.0; FULL],
        }
    }

    /// Statistics over every block of the given 64-band tensors. Bands with
    /// no variation get unit deviation.
    pub fn fit<'a>(tensors: impl IntoIterator<Item = &'a CoeffTensor<i32>>) -> Result<Self> {
        let mut sum = vec![0.0f64; FULL];
        let mut sq = vec![0.0f64; FULL];
        let mut n = 0usize;
        for t in tensors {
            if t.bands() != 64 {
                return Err(Error::param("band statistics need 64-band tensors"));
            }
            for cell in t.grid().data().chunks_exact(FULL) {
                for (i, &v) in cell.iter().enumerate() {
                    let v = f64::from(v);
                    sum[i] += v;
                    sq[i] += v * v;
                }
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::EmptyStream("no coefficient blocks to fit".into()));
        }
        let n = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                let s = (q / n - m * m).max(0.0).sqrt();
                if s > 1e-9 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    /// Standardizes a `(h, w, 3 × bands)` grid in place.
    pub fn apply(&self, t: &mut Tensor3<f32>, bands: usize) -> Result<()> {
        if t.channels() != COLOR_CHANNELS * bands
            || bands > 64
            || self.mean.len() != FULL
            || self.std.len() != FULL
        {
            return Err(Error::param(format!(
                "{} channels do not match 3 x {bands} bands",
                t.channels()
            )));
        }
        let scale: Vec<(f32, f32)> = (0..COLOR_CHANNELS * bands)
            .map(|i| {
                let j = (i / bands) * 64 + i % bands;
                (self.mean[j] as f32, (1.0 / self.std[j]) as f32)
            })
            .collect();
        for cell in t.data_mut().chunks_exact_mut(COLOR_CHANNELS * bands) {
            for (v, &(m, s)) in cell.iter_mut().zip(&scale) {
                *v = (*v - m) * s;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        super::export::write_atomic(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        let stats: Self = serde_json::from_str(&s)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if stats.mean.len() != FULL || stats.std.len() != FULL {
            return Err(Error::Format(format!(
                "{}: expected {FULL} entries",
                path.display()
            )));
        }
        Ok(stats)
    }
}

/// Motion vectors are divided by the encoder's search range.
pub fn normalize_mv(t: &mut Tensor3<f32>, search_range: u32) {
    let s = 1.0 / search_range.max(1) as f32;
    for v in t.data_mut() {
        *v *= s;
    }
}
