use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::augment::{crop_jitter_with, hflip_dct, hflip_mv, mv_grid, test_expand};
use super::normalize::{normalize_mv, BandStats};
use super::sample::{uniform_sample, SampleMode, SampleSpec, StreamKind};
use crate::error::{Error, Result};
use crate::fbs::{select_bands, FbsConfig};
use crate::partial_decode::Extractor;
use crate::tensor::{CoeffTensor, Tensor3};

/// Network-ready tensors of one stream of one video.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamTensors {
    pub kind: StreamKind,
    /// Sampled frame numbers; test mode emits ten tensors per entry.
    pub frames: Vec<u32>,
    pub tensors: Vec<Tensor3<f32>>,
}

fn aug_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(1);
    r
}

/// I-frame coefficients → flip → band selection → crop → standardization.
pub fn frequency_tensors(
    ex: &Extractor<'_>,
    spec: &SampleSpec,
    fbs: FbsConfig,
    stats: Option<&BandStats>,
    seed: u64,
) -> Result<StreamTensors> {
    spec.validate()?;
    let frames = uniform_sample(
        ex.info(),
        spec.n_frames,
        StreamKind::Frequency,
        spec.mode,
        seed,
    )?;
    let mut rng = aug_rng(seed);
    let k = fbs.k().min(64);
    let mut tensors = Vec::new();
    for &f in &frames {
        let coeffs = ex
            .extract_frame(f)?
            .dct
            .ok_or_else(|| Error::param(format!("frame {f} carries no coefficients")))?
            .map(|v| v as f32);
        let mut views = match spec.mode {
            SampleMode::Train => {
                let c = if rng.gen_bool(spec.flip_prob) {
                    hflip_dct(&coeffs)
                } else {
                    coeffs
                };
                let grid = select_bands(&c, fbs).into_grid();
                vec![crop_jitter_with(
                    &grid,
                    &spec.crop_scales,
                    spec.target,
                    &mut rng,
                )?]
            }
            SampleMode::Test => {
                let grid = select_bands(&coeffs, fbs).into_grid();
                test_expand(&grid, spec.target, |g| {
                    hflip_dct(&CoeffTensor::from_grid(g.clone(), k).expect("band layout"))
                        .into_grid()
                })?
            }
        };
        if let Some(s) = stats {
            for v in &mut views {
                s.apply(v, k)?;
            }
        }
        tensors.extend(views);
    }
    Ok(StreamTensors {
        kind: StreamKind::Frequency,
        frames,
        tensors,
    })
}

/// P-frame motion fields → pixel grid → flip → crop → scaling.
pub fn temporal_tensors(
    ex: &Extractor<'_>,
    spec: &SampleSpec,
    search_range: u32,
    seed: u64,
) -> Result<StreamTensors> {
    spec.validate()?;
    let frames = uniform_sample(
        ex.info(),
        spec.n_frames,
        StreamKind::Temporal,
        spec.mode,
        seed,
    )?;
    let mut rng = aug_rng(seed);
    let mut tensors = Vec::new();
    for &f in &frames {
        let field = ex
            .extract_frame(f)?
            .mv_field
            .ok_or_else(|| Error::param(format!("frame {f} carries no motion field")))?;
        let grid = mv_grid::<f32>(&field);
        let mut views = match spec.mode {
            SampleMode::Train => {
                let g = if rng.gen_bool(spec.flip_prob) {
                    hflip_mv(&grid)
                } else {
                    grid
                };
                vec![crop_jitter_with(
                    &g,
                    &spec.crop_scales,
                    spec.target,
                    &mut rng,
                )?]
            }
            SampleMode::Test => test_expand(&grid, spec.target, hflip_mv)?,
        };
        for v in &mut views {
            normalize_mv(v, search_range);
        }
        tensors.extend(views);
    }
    Ok(StreamTensors {
        kind: StreamKind::Temporal,
        frames,
        tensors,
    })
}
