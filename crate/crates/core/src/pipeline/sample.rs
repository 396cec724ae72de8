use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::FrameKind;
use crate::error::{Error, Result};
use crate::partial_decode::StreamInfo;

/// The two network inputs: I-frame coefficients and P-frame motion vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKind {
    Frequency,
    Temporal,
}

impl StreamKind {
    pub fn code(self) -> u8 {
        match self {
            StreamKind::Frequency => 0,
            StreamKind::Temporal => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(StreamKind::Frequency),
            1 => Some(StreamKind::Temporal),
            _ => None,
        }
    }

    /// Frame type this stream consumes.
    pub fn frame_kind(self) -> FrameKind {
        match self {
            StreamKind::Frequency => FrameKind::I,
            StreamKind::Temporal => FrameKind::P,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamKind::Frequency => "frequency",
            StreamKind::Temporal => "temporal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Train,
    Test,
}

pub const FREQUENCY_SCALES: [f64; 4] = [1.0, 0.875, 0.75, 0.66];
pub const TEMPORAL_SCALES: [f64; 3] = [1.0, 0.875, 0.75];
pub const TRAIN_FRAMES: usize = 3;
pub const TEST_FRAMES: usize = 25;
/// Frequency-stream input side, in blocks.
pub const FREQUENCY_TARGET: usize = 28;
/// Temporal-stream input side, in pixels.
pub const TEMPORAL_TARGET: usize = 224;

/// How frames are drawn and augmented for one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub n_frames: usize,
    pub mode: SampleMode,
    pub crop_scales: Vec<f64>,
    /// `(h, w)` in blocks for the frequency stream, pixels for the temporal one.
    pub target: (usize, usize),
    pub flip_prob: f64,
}

impl SampleSpec {
    pub fn train(kind: StreamKind) -> Self {
        let (scales, side) = Self::defaults(kind);
        Self {
            n_frames: TRAIN_FRAMES,
            mode: SampleMode::Train,
            crop_scales: scales,
            target: (side, side),
            flip_prob: 0.5,
        }
    }

    /// 25 frames, each expanded to 5 crops and their flips.
    pub fn test(kind: StreamKind) -> Self {
        let (scales, side) = Self::defaults(kind);
        Self {
            n_frames: TEST_FRAMES,
            mode: SampleMode::Test,
            crop_scales: scales,
            target: (side, side),
            flip_prob: 0.0,
        }
    }

    pub fn with_target(mut self, h: usize, w: usize) -> Self {
        self.target = (h, w);
        self
    }

    pub fn with_frames(mut self, n: usize) -> Self {
        self.n_frames = n;
        self
    }

    fn defaults(kind: StreamKind) -> (Vec<f64>, usize) {
        match kind {
            StreamKind::Frequency => (FREQUENCY_SCALES.to_vec(), FREQUENCY_TARGET),
            StreamKind::Temporal => (TEMPORAL_SCALES.to_vec(), TEMPORAL_TARGET),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::param("frame count must be positive"));
        }
        if self.target.0 == 0 || self.target.1 == 0 {
            return Err(Error::param("target must be non-empty"));
        }
        if self.crop_scales.is_empty() || self.crop_scales.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::param(format!(
                "crop scales {:?} must lie in (0, 1]",
                self.crop_scales
            )));
        }
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return Err(Error::param(format!("flip probability {}", self.flip_prob)));
        }
        Ok(())
    }
}

/// Positions `0..eligible` of `n` samples. Test mode takes segment centres,
/// train mode a random frame per segment; fewer than `n` eligible frames
/// repeat cyclically.
pub fn sample_positions(
    eligible: usize,
    n: usize,
    mode: SampleMode,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if eligible == 0 {
        return Err(Error::EmptyStream("no eligible frames to sample".into()));
    }
    if eligible < n {
        return Ok((0..n).map(|i| i % eligible).collect());
    }
    Ok((0..n)
        .map(|i| match mode {
            SampleMode::Test => (2 * i + 1) * eligible / (2 * n),
            SampleMode::Train => {
                let lo = i * eligible / n;
                let hi = (i + 1) * eligible / n;
                rng.gen_range(lo..hi)
            }
        })
        .collect())
}

/// Frame numbers of `n` frames of the stream's kind.
pub fn uniform_sample(
    info: &StreamInfo,
    n: usize,
    kind: StreamKind,
    mode: SampleMode,
    seed: u64,
) -> Result<Vec<u32>> {
    let eligible = info.frames_of_kind(kind.frame_kind());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = sample_positions(eligible.len(), n, mode, &mut rng).map_err(|e| match e {
        Error::EmptyStream(_) => {
            Error::EmptyStream(format!("stream has no {:?}-frames", kind.frame_kind()))
        }
        e => e,
    })?;
    Ok(pos.into_iter().map(|p| eligible[p]).collect())
}
