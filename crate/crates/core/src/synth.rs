//! Deterministic synthetic videos with natural-image-like statistics.
//!
//! Textures are sums of bilinearly interpolated random grids whose amplitude
//! grows with the grid cell size, giving the roughly 1/f spectrum of natural
//! images. Every generator is a pure function of its spec and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{Frame, Plane, RawVideo};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: u8,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, frames: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            frames,
            fps: 25,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.width == 0
            || self.height == 0
            || !self.width.is_multiple_of(16)
            || !self.height.is_multiple_of(16)
        {
            return Err(Error::param(format!(
                "dimensions {}x{} must be positive multiples of 16",
                self.width, self.height
            )));
        }
        if self.frames == 0 {
            return Err(Error::param("frame count must be positive"));
        }
        Ok(())
    }

    fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Static,
    /// Whole scene moves right by `dx` pixels per frame, wrapping around.
    Translate {
        dx: i32,
    },
    Noise,
    /// A textured square moving horizontally (label 0) or vertically (label 1).
    TwoClassMotion {
        label: usize,
    },
}

/// Full-resolution scene layers in the 0..255 range; chroma is subsampled
/// at render time.
#[derive(Debug, Clone)]
struct Scene {
    w: usize,
    h: usize,
    layers: [Vec<f64>; 3],
}

/// Sum-of-octaves value noise, periodic horizontally when cell sizes divide `w`.
fn value_noise(w: usize, h: usize, rng: &mut ChaCha8Rng, cells: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for &cell in cells {
        let gw = w.div_ceil(cell);
        let gh = h.div_ceil(cell) + 1;
        let grid: Vec<f64> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let amp = cell as f64;
        for y in 0..h {
            let fy = y as f64 / cell as f64;
            let (y0, ty) = (fy.floor() as usize, fy.fract());
            for x in 0..w {
                let fx = x as f64 / cell as f64;
                let (x0, tx) = (fx.floor() as usize, fx.fract());
                let x1 = (x0 + 1) % gw;
                let g = |gx: usize, gy: usize| grid[gy * gw + gx];
                let top = g(x0, y0) * (1.0 - tx) + g(x1, y0) * tx;
                let bottom = g(x0, y0 + 1) * (1.0 - tx) + g(x1, y0 + 1) * tx;
                out[y * w + x] += amp * (top * (1.0 - ty) + bottom * ty);
            }
        }
    }
    out
}

fn normalize(v: &mut [f64], mean: f64, std: f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n)
        .sqrt()
        .max(1e-12);
    for x in v.iter_mut() {
        *x = mean + (*x - m) * std / s;
    }
}

const CELLS: [usize; 4] = [16, 8, 4, 2];

fn texture_scene(w: usize, h: usize, rng: &mut ChaCha8Rng, luma_std: f64) -> Scene {
    let mut y = value_noise(w, h, rng, &CELLS);
    normalize(&mut y, 128.0, luma_std);
    let mut cb = value_noise(w, h, rng, &CELLS[..2]);
    normalize(&mut cb, 128.0, luma_std * 0.35);
    let mut cr = value_noise(w, h, rng, &CELLS[..2]);
    normalize(&mut cr, 128.0, luma_std * 0.35);
    Scene {
        w,
        h,
        layers: [y, cb, cr],
    }
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

impl Scene {
    /// Renders with `sample(layer, x, y)` supplying full-resolution values.
    fn render_with(w: usize, h: usize, sample: impl Fn(usize, usize, usize) -> f64) -> Frame {
        let y = Plane::from_fn(w, h, |x, y| to_u8(sample(0, x, y)));
        let chroma = |layer: usize| {
            Plane::from_fn(w / 2, h / 2, |x, y| {
                let s: f64 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(dx, dy)| sample(layer, 2 * x + dx, 2 * y + dy))
                    .sum();
                to_u8(s / 4.0)
            })
        };
        Frame {
            y,
            cb: chroma(1),
            cr: chroma(2),
        }
    }

    #[inline]
    fn at(&self, layer: usize, x: usize, y: usize) -> f64 {
        self.layers[layer][y * self.w + x]
    }

    /// The scene shifted right by `shift` pixels with wraparound.
    fn render_shifted(&self, shift: i64) -> Frame {
        let w = self.w as i64;
        Self::render_with(self.w, self.h, |l, x, y| {
            self.at(l, (x as i64 - shift).rem_euclid(w) as usize, y)
        })
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn synth_static(spec: &SynthSpec) -> Result<RawVideo> {
    synth_translate(spec, 0)
}

/// Frame `t` is the first frame shifted right by `dx·t` pixels with wraparound.
pub fn synth_translate(spec: &SynthSpec, dx: i32) -> Result<RawVideo> {
    spec.check()?;
    let scene = texture_scene(spec.width, spec.height, &mut rng_for(spec.seed, 1), 40.0);
    let frames = (0..spec.frames)
        .map(|t| scene.render_shifted(i64::from(dx) * t as i64))
        .collect();
    RawVideo::new(spec.width, spec.height, spec.fps, frames)
}

/// Independent uniform noise in every sample of every frame.
pub fn synth_noise(spec: &SynthSpec) -> Result<RawVideo> {
    spec.check()?;
    let mut rng = rng_for(spec.seed, 2);
    let (w, h) = (spec.width, spec.height);
    let frames = (0..spec.frames)
        .map(|_| Frame {
            y: Plane::from_fn(w, h, |_, _| rng.gen()),
            cb: Plane::from_fn(w / 2, h / 2, |_, _| rng.gen()),
            cr: Plane::from_fn(w / 2, h / 2, |_, _| rng.gen()),
        })
        .collect();
    RawVideo::new(w, h, spec.fps, frames)
}

/// Static textured background with a high-contrast textured square moving
/// horizontally by `velocity` pixels per frame (wrapping), and a global
/// luma offset of `brightness`.
pub fn synth_moving_square(
    spec: &SynthSpec,
    velocity: (i32, i32),
    brightness: f64,
) -> Result<RawVideo> {
    spec.check()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = rng_for(spec.seed, 3);
    let background = texture_scene(w, h, &mut rng, 25.0);
    let side = (h / 2).max(16);
    let square = texture_scene(
        side.next_multiple_of(16),
        side.next_multiple_of(16),
        &mut rng,
        60.0,
    );
    let y0 = rng.gen_range(0..h) as i64;
    let x0 = rng.gen_range(0..w) as i64;
    let frames = (0..spec.frames)
        .map(|t| {
            let px = x0 + i64::from(velocity.0) * t as i64;
            let py = y0 + i64::from(velocity.1) * t as i64;
            Scene::render_with(w, h, |l, x, y| {
                let rx = (x as i64 - px).rem_euclid(w as i64) as usize;
                let ry = (y as i64 - py).rem_euclid(h as i64) as usize;
                let v = if rx < side && ry < side {
                    square.at(l, rx, ry)
                } else {
                    background.at(l, x, y)
                };
                if l == 0 {
                    v + brightness
                } else {
                    v
                }
            })
        })
        .collect();
    RawVideo::new(w, h, spec.fps, frames)
}

pub fn synthesize(kind: SynthKind, spec: &SynthSpec) -> Result<RawVideo> {
    match kind {
        SynthKind::Static => synth_static(spec),
        SynthKind::Translate { dx } => synth_translate(spec, dx),
        SynthKind::Noise => synth_noise(spec),
        SynthKind::TwoClassMotion { label } => {
            if label > 1 {
                return Err(Error::param(format!(
                    "two-class label {label} is not 0 or 1"
                )));
            }
            let mut rng = rng_for(spec.seed, 4);
            let speed = rng.gen_range(2..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
            synth_moving_square(spec, axis_velocity(label, speed), 0.0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledVideo {
    pub id: String,
    pub label: usize,
    pub video: RawVideo,
}

/// Velocity along the x axis for class 0 and the y axis for class 1. The
/// classes survive a horizontal flip, which only changes the sign of x.
fn axis_velocity(label: usize, speed: i32) -> (i32, i32) {
    if label == 0 {
        (speed, 0)
    } else {
        (0, speed)
    }
}

/// Balanced set of squares moving horizontally (class 0) or vertically
/// (class 1) in a random direction; brightness carries no class information.
pub fn two_class_motion_set(n: usize, spec: &SynthSpec) -> Result<Vec<LabeledVideo>> {
    (0..n)
        .map(|i| {
            let label = i % 2;
            let s = spec.with_seed(spec.seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let video = synthesize(SynthKind::TwoClassMotion { label }, &s)?;
            Ok(LabeledVideo {
                id: format!("motion-{i:04}"),
                label,
                video,
            })
        })
        .collect()
}

/// Which cue of a [`mixed_set`] video is misleading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Misleading {
    None,
    Appearance,
    Motion,
}

/// Balanced set where the class shows both as brightness (visible to the
/// frequency stream) and as motion axis (visible to the temporal
/// stream). A third of the videos have a weak, inverted brightness cue and
/// another third a weak, inverted motion cue, so the two streams err on
/// disjoint videos and with low confidence.
pub fn mixed_set(n: usize, spec: &SynthSpec) -> Result<Vec<(LabeledVideo, Misleading)>> {
    (0..n)
        .map(|i| {
            let label = i % 2;
            let sign = if label == 1 { 1.0 } else { -1.0 };
            let mode = match (i / 2) % 3 {
                0 => Misleading::None,
                1 => Misleading::Appearance,
                _ => Misleading::Motion,
            };
            let s = spec.with_seed(spec.seed.wrapping_mul(1_000_033).wrapping_add(i as u64));
            let mut rng = rng_for(s.seed, 5);
            let dir = if rng.gen_bool(0.5) { 1 } else { -1 };
            let (brightness, velocity) = match mode {
                Misleading::Appearance => (
                    -sign * rng.gen_range(4.0..8.0),
                    axis_velocity(label, 4 * dir),
                ),
                Misleading::Motion => (
                    sign * rng.gen_range(24.0..32.0),
                    axis_velocity(1 - label, dir),
                ),
                Misleading::None => (
                    sign * rng.gen_range(24.0..32.0),
                    axis_velocity(label, 4 * dir),
                ),
            };
            let video = synth_moving_square(&s, velocity, brightness)?;
            Ok((
                LabeledVideo {
                    id: format!("mixed-{i:04}"),
                    label,
                    video,
                },
                mode,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_frames_identical() {
        let v = synth_static(&SynthSpec::new(32, 32, 4, 1)).unwrap();
        assert!(v.frames.iter().all(|f| *f == v.frames[0]));
    }

    #[test]
    fn translate_wraps() {
        let v = synth_translate(&SynthSpec::new(64, 32, 5, 2), 3).unwrap();
        for t in 0..5 {
            for y in 0..32 {
                for x in 0..64 {
                    assert_eq!(
                        v.frames[t].y.at(x, y),
                        v.frames[0].y.at((x + 64 - 3 * t) % 64, y)
                    );
                }
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let s = SynthSpec::new(48, 32, 3, 9);
        for kind in [
            SynthKind::Static,
            SynthKind::Noise,
            SynthKind::Translate { dx: 2 },
            SynthKind::TwoClassMotion { label: 1 },
        ] {
            let a = synthesize(kind, &s).unwrap();
            assert_eq!(a.frames, synthesize(kind, &s).unwrap().frames);
        }
        assert_ne!(
            synth_noise(&s).unwrap().frames,
            synth_noise(&s.with_seed(10)).unwrap().frames
        );
    }

    #[test]
    fn bad_dims_rejected() {
        assert!(synth_static(&SynthSpec::new(30, 32, 2, 0)).is_err());
        assert!(synth_static(&SynthSpec::new(32, 32, 0, 0)).is_err());
    }
}
