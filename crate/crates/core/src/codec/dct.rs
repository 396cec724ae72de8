//! Orthonormal 8×8 DCT-II pair.
//!
//! `coeff[u][v]`: `u` is the vertical frequency (row), `v` the horizontal one
//! (column). The basis table is built mirror-symmetric
//! (`basis[u][7 - x] == (-1)^u * basis[u][x]` exactly), which makes a
//! horizontal flip in the coefficient domain bit-exact in the pixel domain.

use crate::probe;
use crate::scalar::Scalar;

pub type Block<T> = [[T; 8]; 8];

#[derive(Debug, Clone)]
pub struct Dct8<T> {
    basis: Block<T>,
}

impl<T: Scalar> Default for Dct8<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Dct8<T> {
    pub fn new() -> Self {
        let mut basis = [[T::zero(); 8]; 8];
        for (u, row) in basis.iter_mut().enumerate() {
            let alpha = if u == 0 {
                (1.0f64 / 8.0).sqrt()
            } else {
                (2.0f64 / 8.0).sqrt()
            };
            for x in 0..4 {
                let angle = ((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0;
                let v = T::of(alpha * angle.cos());
                row[x] = v;
                row[7 - x] = if u % 2 == 0 { v } else { -v };
            }
        }
        Self { basis }
    }

    pub fn basis(&self) -> &Block<T> {
        &self.basis
    }

    pub fn forward(&self, block: &Block<T>) -> Block<T> {
        let b = &self.basis;
        let mut tmp = [[T::zero(); 8]; 8];
        for r in 0..8 {
            for v in 0..8 {
                let mut acc = T::zero();
                for c in 0..8 {
                    acc += block[r][c] * b[v][c];
                }
                tmp[r][v] = acc;
            }
        }
        let mut out = [[T::zero(); 8]; 8];
        for u in 0..8 {
            for v in 0..8 {
                let mut acc = T::zero();
                for r in 0..8 {
                    acc += b[u][r] * tmp[r][v];
                }
                out[u][v] = acc;
            }
        }
        out
    }

    pub fn inverse(&self, coeffs: &Block<T>) -> Block<T> {
        probe::count_idct();
        let b = &self.basis;
        // horizontal pass first, then vertical
        let mut tmp = [[T::zero(); 8]; 8];
        for u in 0..8 {
            for c in 0..8 {
                let mut acc = T::zero();
                for v in 0..8 {
                    acc += coeffs[u][v] * b[v][c];
                }
                tmp[u][c] = acc;
            }
        }
        let mut out = [[T::zero(); 8]; 8];
        for r in 0..8 {
            for c in 0..8 {
                let mut acc = T::zero();
                for u in 0..8 {
                    acc += b[u][r] * tmp[u][c];
                }
                out[r][c] = acc;
            }
        }
        out
    }
}

/// Free-function form of [`Dct8::forward`].
pub fn dct8x8_forward<T: Scalar>(block: &Block<T>) -> Block<T> {
    Dct8::new().forward(block)
}

/// Free-function form of [`Dct8::inverse`].
pub fn dct8x8_inverse<T: Scalar>(coeffs: &Block<T>) -> Block<T> {
    Dct8::new().inverse(coeffs)
}
