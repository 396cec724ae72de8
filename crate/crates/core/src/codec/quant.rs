use super::dct::Block;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Flat quantizer: every coefficient is divided by the same step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantConfig {
    q_step: u32,
}

impl QuantConfig {
    pub fn new(q_step: u32) -> Result<Self> {
        if q_step == 0 {
            return Err(Error::param("quantizer step must be >= 1"));
        }
        Ok(Self { q_step })
    }

    pub fn q_step(&self) -> u32 {
        self.q_step
    }
}

/// `round_half_away_from_zero(x / q_step)`.
#[inline]
pub fn quantize_value<T: Scalar>(x: T, cfg: QuantConfig) -> i32 {
    let q = (x / T::of(f64::from(cfg.q_step))).round();
    q.to_i32()
        .unwrap_or(if q > T::zero() { i32::MAX } else { i32::MIN })
}

#[inline]
pub fn dequantize_value<T: Scalar>(q: i32, cfg: QuantConfig) -> T {
    T::of(f64::from(q) * f64::from(cfg.q_step))
}

pub fn quantize<T: Scalar>(coeffs: &Block<T>, cfg: QuantConfig) -> Block<i32> {
    coeffs.map(|row| row.map(|x| quantize_value(x, cfg)))
}

pub fn dequantize<T: Scalar>(q: &Block<i32>, cfg: QuantConfig) -> Block<T> {
    q.map(|row| row.map(|v| dequantize_value(v, cfg)))
}
