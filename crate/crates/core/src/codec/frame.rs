use crate::error::{Error, Result};

/// One 8-bit sample plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Copies the `size`×`size` block at `(x, y)` as floats.
    pub fn block8(&self, x: usize, y: usize) -> [[f64; 8]; 8] {
        std::array::from_fn(|r| std::array::from_fn(|c| f64::from(self.at(x + c, y + r))))
    }
}

/// A YCbCr 4:2:0 picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub cb: Plane,
    pub cr: Plane,
}

impl Frame {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            y: Plane::new(width, height),
            cb: Plane::filled(width / 2, height / 2, 128),
            cr: Plane::filled(width / 2, height / 2, 128),
        }
    }

    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.cb, &self.cr]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawVideo {
    pub width: usize,
    pub height: usize,
    pub fps: u8,
    pub frames: Vec<Frame>,
}

impl RawVideo {
    pub fn new(width: usize, height: usize, fps: u8, frames: Vec<Frame>) -> Result<Self> {
        let v = Self {
            width,
            height,
            fps,
            frames,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.width, self.height)?;
        for (i, f) in self.frames.iter().enumerate() {
            let ok = f.y.width == self.width
                && f.y.height == self.height
                && f.cb.width == self.width / 2
                && f.cb.height == self.height / 2
                && f.cr.width == self.width / 2
                && f.cr.height == self.height / 2
                && f.y.data.len() == self.width * self.height
                && f.cb.data.len() == self.width * self.height / 4
                && f.cr.data.len() == self.width * self.height / 4;
            if !ok {
                return Err(Error::param(format!(
                    "frame {i} does not match {}x{} 4:2:0",
                    self.width, self.height
                )));
            }
        }
        Ok(())
    }

    pub fn mb_cols(&self) -> usize {
        self.width / 16
    }

    pub fn mb_rows(&self) -> usize {
        self.height / 16
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || !width.is_multiple_of(16) || !height.is_multiple_of(16) {
        return Err(Error::param(format!(
            "dimensions {width}x{height} must be nonzero multiples of 16"
        )));
    }
    if width > u16::MAX as usize || height > u16::MAX as usize {
        return Err(Error::param(format!(
            "dimensions {width}x{height} exceed 16 bits"
        )));
    }
    Ok(())
}

/// Mean squared error over all three planes.
pub fn mse(a: &Frame, b: &Frame) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pa, pb) in a.planes().into_iter().zip(b.planes()) {
        for (&x, &y) in pa.data.iter().zip(&pb.data) {
            let d = f64::from(x) - f64::from(y);
            sum += d * d;
        }
        n += pa.data.len();
    }
    sum / n as f64
}

/// PSNR in dB over every sample of both videos; infinite for identical input.
pub fn psnr(a: &RawVideo, b: &RawVideo) -> f64 {
    let total: f64 = a.frames.iter().zip(&b.frames).map(|(x, y)| mse(x, y)).sum();
    let m = total / a.frames.len().max(1) as f64;
    if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / m).log10()
    }
}

/// Largest absolute per-sample difference.
pub fn max_abs_diff(a: &RawVideo, b: &RawVideo) -> u8 {
    a.frames
        .iter()
        .zip(&b.frames)
        .flat_map(|(x, y)| {
            x.planes()
                .into_iter()
                .zip(y.planes())
                .flat_map(|(p, q)| p.data.iter().zip(&q.data).map(|(&s, &t)| s.abs_diff(t)))
        })
        .max()
        .unwrap_or(0)
}
