//! Dense `(height, width, channels)` grids and DCT coefficient tensors.

use crate::error::{Error, Result};
use crate::scalar::{lerp, Scalar};

/// Row-major `(h, w, c)` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    h: usize,
    w: usize,
    c: usize,
    data: Vec<T>,
}

impl<T: Copy> Tensor3<T> {
    pub fn new(h: usize, w: usize, c: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != h * w * c {
            return Err(Error::param(format!(
                "{} values for shape ({h}, {w}, {c})",
                data.len()
            )));
        }
        Ok(Self { h, w, c, data })
    }

    pub fn filled(h: usize, w: usize, c: usize, value: T) -> Self {
        Self {
            h,
            w,
            c,
            data: vec![value; h * w * c],
        }
    }

    pub fn from_fn(
        h: usize,
        w: usize,
        c: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Self {
        let mut data = Vec::with_capacity(h * w * c);
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    data.push(f(y, x, ch));
                }
            }
        }
        Self { h, w, c, data }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.h, self.w, self.c)
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn channels(&self) -> usize {
        self.c
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize, ch: usize) -> T {
        self.data[(y * self.w + x) * self.c + ch]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, ch: usize, v: T) {
        self.data[(y * self.w + x) * self.c + ch] = v;
    }

    /// All channels of one cell.
    #[inline]
    pub fn cell(&self, y: usize, x: usize) -> &[T] {
        &self.data[(y * self.w + x) * self.c..][..self.c]
    }

    #[inline]
    pub fn cell_mut(&mut self, y: usize, x: usize) -> &mut [T] {
        let c = self.c;
        &mut self.data[(y * self.w + x) * c..][..c]
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        if y0 + h > self.h || x0 + w > self.w || h == 0 || w == 0 {
            return Err(Error::param(format!(
                "crop {h}x{w} at ({y0}, {x0}) does not fit {}x{}",
                self.h, self.w
            )));
        }
        let mut data = Vec::with_capacity(h * w * self.c);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[(y * self.w + x0) * self.c..][..w * self.c]);
        }
        Ok(Self {
            h,
            w,
            c: self.c,
            data,
        })
    }

    /// Reverses the column order; channel values are untouched.
    pub fn mirror_columns(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.h {
            for x in 0..self.w {
                out.cell_mut(y, self.w - 1 - x)
                    .copy_from_slice(self.cell(y, x));
            }
        }
        out
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Tensor3<U> {
        Tensor3 {
            h: self.h,
            w: self.w,
            c: self.c,
            data: self.data.iter().copied().map(f).collect(),
        }
    }
}

impl<T: Scalar> Tensor3<T> {
    /// Bilinear resize with half-pixel sample centres, per channel.
    pub fn resize_bilinear(&self, h: usize, w: usize) -> Self {
        if h == self.h && w == self.w {
            return self.clone();
        }
        let ys: Vec<(usize, usize, T)> = (0..h).map(|i| sample_pos(i, self.h, h)).collect();
        let xs: Vec<(usize, usize, T)> = (0..w).map(|i| sample_pos(i, self.w, w)).collect();
        let mut data = Vec::with_capacity(h * w * self.c);
        for &(y0, y1, ty) in &ys {
            for &(x0, x1, tx) in &xs {
                for ch in 0..self.c {
                    let top = lerp(self.at(y0, x0, ch), self.at(y0, x1, ch), tx);
                    let bottom = lerp(self.at(y1, x0, ch), self.at(y1, x1, ch), tx);
                    data.push(lerp(top, bottom, ty));
                }
            }
        }
        Self {
            h,
            w,
            c: self.c,
            data,
        }
    }

    /// Per-channel mean.
    pub fn channel_means(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.c];
        for cell in self.data.chunks_exact(self.c) {
            for (s, &v) in sums.iter_mut().zip(cell) {
                *s += v;
            }
        }
        let n = T::of((self.h * self.w) as f64);
        sums.into_iter().map(|s| s / n).collect()
    }
}

fn sample_pos<T: Scalar>(i: usize, src: usize, dst: usize) -> (usize, usize, T) {
    let scale = src as f64 / dst as f64;
    let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(src - 1);
    (i0, i1, T::of(s - i0 as f64))
}

/// Block-grid tensor of DCT coefficients: shape `(h_blocks, w_blocks, 3 × bands)`,
/// channel-major in the last axis (`channel * bands + band`), bands in zigzag
/// order. Band 0 of each channel is the DC coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor<T = i32> {
    bands: usize,
    grid: Tensor3<T>,
}

pub const COLOR_CHANNELS: usize = 3;

impl<T: Copy + Default> CoeffTensor<T> {
    pub fn zeros(h_blocks: usize, w_blocks: usize, bands: usize) -> Self {
        Self {
            bands,
            grid: Tensor3::filled(h_blocks, w_blocks, COLOR_CHANNELS * bands, T::default()),
        }
    }
}

impl<T: Copy> CoeffTensor<T> {
    pub fn from_grid(grid: Tensor3<T>, bands: usize) -> Result<Self> {
        if bands == 0 || bands > 64 || grid.channels() != COLOR_CHANNELS * bands {
            return Err(Error::param(format!(
                "{} channels is not 3 x {bands} bands",
                grid.channels()
            )));
        }
        Ok(Self { bands, grid })
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn h_blocks(&self) -> usize {
        self.grid.height()
    }

    pub fn w_blocks(&self) -> usize {
        self.grid.width()
    }

    pub fn grid(&self) -> &Tensor3<T> {
        &self.grid
    }

    pub fn into_grid(self) -> Tensor3<T> {
        self.grid
    }

    #[inline]
    pub fn get(&self, by: usize, bx: usize, ch: usize, band: usize) -> T {
        self.grid.at(by, bx, ch * self.bands + band)
    }

    /// The zigzag coefficients of one channel of one block.
    #[inline]
    pub fn block(&self, by: usize, bx: usize, ch: usize) -> &[T] {
        &self.grid.cell(by, bx)[ch * self.bands..][..self.bands]
    }

    #[inline]
    pub fn block_mut(&mut self, by: usize, bx: usize, ch: usize) -> &mut [T] {
        let bands = self.bands;
        &mut self.grid.cell_mut(by, bx)[ch * bands..][..bands]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> CoeffTensor<U> {
        CoeffTensor {
            bands: self.bands,
            grid: self.grid.map(f),
        }
    }
}
