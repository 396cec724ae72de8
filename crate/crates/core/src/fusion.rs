//! Frame-score averaging, weighted late fusion, and a small softmax
//! classifier that stands in for the per-stream networks.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor3;

/// Per-class scores of a frame or a video.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<T> {
    scores: Vec<T>,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(scores: Vec<T>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::param("score vector needs at least one class"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::param("score vector contains a non-finite value"));
        }
        Ok(Self { scores })
    }

    pub fn classes(&self) -> usize {
        self.scores.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.scores
    }

    pub fn into_vec(self) -> Vec<T> {
        self.scores
    }

    /// Index of the highest score; the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }
}

/// Arithmetic mean of frame scores.
pub fn video_score<T: Scalar>(frames: &[ScoreVector<T>]) -> Result<ScoreVector<T>> {
    let first = frames
        .first()
        .ok_or_else(|| Error::param("no frame scores to average"))?;
    let c = first.classes();
    let mut sum = vec![T::zero(); c];
    for f in frames {
        if f.classes() != c {
            return Err(Error::param(format!("{} classes after {c}", f.classes())));
        }
        for (s, &v) in sum.iter_mut().zip(&f.scores) {
            *s += v;
        }
    }
    let n = T::of(frames.len() as f64);
    ScoreVector::new(sum.into_iter().map(|s| s / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub w_freq: f64,
    pub w_temp: f64,
}

impl FusionWeights {
    pub fn new(w_freq: f64, w_temp: f64) -> Result<Self> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(w_freq) || !ok(w_temp) || w_freq + w_temp == 0.0 {
            return Err(Error::param(format!(
                "fusion weights ({w_freq}, {w_temp}) must be non-negative and not both zero"
            )));
        }
        Ok(Self { w_freq, w_temp })
    }
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self {
            w_freq: 2.0,
            w_temp: 1.0,
        }
    }
}

impl FromStr for FusionWeights {
    type Err = Error;

    /// `"2,1"` → frequency 2, temporal 1.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [f, t] = parts[..] else {
            return Err(Error::param(format!(
                "expected two comma-separated weights, got {s:?}"
            )));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::param(format!("bad weight {x:?}")))
        };
        Self::new(num(f)?, num(t)?)
    }
}

impl fmt::Display for FusionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.w_freq, self.w_temp)
    }
}

/// `(w_f·s_f + w_t·s_t) / (w_f + w_t)` on raw scores.
pub fn late_fuse<T: Scalar>(
    s_freq: &ScoreVector<T>,
    s_temp: &ScoreVector<T>,
    w: FusionWeights,
) -> Result<ScoreVector<T>> {
    if s_freq.classes() != s_temp.classes() {
        return Err(Error::param(format!(
            "{} frequency classes vs {} temporal classes",
            s_freq.classes(),
            s_temp.classes()
        )));
    }
    let (wf, wt) = (T::of(w.w_freq), T::of(w.w_temp));
    let total = wf + wt;
    ScoreVector::new(
        s_freq
            .scores
            .iter()
            .zip(&s_temp.scores)
            .map(|(&f, &t)| (wf * f + wt * t) / total)
            .collect(),
    )
}

/// Per-channel global average pooling (frequency-stream features).
pub fn pool_channel_means<T: Scalar>(t: &Tensor3<f32>) -> Vec<T> {
    let c = t.channels();
    let mut sums = vec![0.0f64; c];
    for cell in t.data().chunks_exact(c) {
        for (s, &v) in sums.iter_mut().zip(cell) {
            *s += f64::from(v);
        }
    }
    let n = (t.height() * t.width()) as f64;
    sums.into_iter().map(|s| T::of(s / n)).collect()
}

/// Per-channel mean and variance, interleaved (temporal-stream features).
pub fn pool_mean_var<T: Scalar>(t: &Tensor3<f32>) -> Vec<T> {
    let c = t.channels();
    let n = (t.height() * t.width()) as f64;
    let means: Vec<f64> = pool_channel_means::<f64>(t);
    let mut sq = vec![0.0f64; c];
    for cell in t.data().chunks_exact(c) {
        for ((s, &v), m) in sq.iter_mut().zip(cell).zip(&means) {
            let d = f64::from(v) - m;
            *s += d * d;
        }
    }
    means
        .iter()
        .zip(&sq)
        .flat_map(|(&m, &s)| [T::of(m), T::of(s / n)])
        .collect()
}

/// Plain SGD with step decay: the learning rate is divided by 10 at each
/// milestone epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    #[serde(default)]
    pub milestones: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            epochs: 100,
            batch: 16,
            milestones: vec![60, 85],
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let drops = self.milestones.iter().filter(|&&m| m <= epoch).count();
        self.lr / 10f64.powi(drops as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean mini-batch loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Linear softmax classifier: `scores = W·x + b`, `W` row-major `C × D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyClassifier<T> {
    classes: usize,
    dim: usize,
    weights: Vec<T>,
    bias: Vec<T>,
}

pub struct Gradient<T> {
    pub loss: T,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"FCVC";
pub const CHECKPOINT_VERSION: u8 = 1;

impl<T: Scalar> ToyClassifier<T> {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            classes,
            dim,
            weights: vec![T::zero(); classes * dim],
            bias: vec![T::zero(); classes],
        }
    }

    pub fn from_parts(classes: usize, dim: usize, weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if classes == 0 || weights.len() != classes * dim || bias.len() != classes {
            return Err(Error::param(format!(
                "{} weights and {} biases for {classes} classes of dimension {dim}",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            classes,
            dim,
            weights,
            bias,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    fn logits(&self, x: &[T]) -> Vec<T> {
        self.weights
            .chunks_exact(self.dim.max(1))
            .take(self.classes)
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &v)| acc + w * v))
            .collect()
    }

    pub fn predict(&self, x: &[T]) -> Result<ScoreVector<T>> {
        if x.len() != self.dim {
            return Err(Error::param(format!(
                "{} features, classifier expects {}",
                x.len(),
                self.dim
            )));
        }
        ScoreVector::new(self.logits(x))
    }

    pub fn predict_batch(&self, xs: &[Vec<T>]) -> Result<Vec<ScoreVector<T>>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Mean cross-entropy over the samples and its gradient.
    pub fn loss_and_grad(&self, xs: &[&[T]], ys: &[usize]) -> Gradient<T> {
        let mut g = Gradient {
            loss: T::zero(),
            weights: vec![T::zero(); self.weights.len()],
            bias: vec![T::zero(); self.classes],
        };
        let n = T::of(xs.len().max(1) as f64);
        for (x, &y) in xs.iter().zip(ys) {
            let z = self.logits(x);
            let m = z.iter().copied().fold(T::neg_infinity(), T::max);
            let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
            let s: T = e.iter().copied().sum();
            g.loss += (s.ln() + m - z[y]) / n;
            for c in 0..self.classes {
                let d = (e[c] / s - if c == y { T::one() } else { T::zero() }) / n;
                g.bias[c] += d;
                for (gw, &v) in g.weights[c * self.dim..(c + 1) * self.dim]
                    .iter_mut()
                    .zip(x.iter())
                {
                    *gw += d * v;
                }
            }
        }
        g
    }

    pub fn accuracy(&self, xs: &[Vec<T>], ys: &[usize]) -> Result<f64> {
        let mut hits = 0;
        for (x, &y) in xs.iter().zip(ys) {
            hits += usize::from(self.predict(x)?.argmax() == y);
        }
        Ok(hits as f64 / xs.len().max(1) as f64)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 4 * (self.weights.len() + self.bias.len()));
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(CHECKPOINT_VERSION);
        out.extend_from_slice(&(self.classes as u32).to_be_bytes());
        out.extend_from_slice(&(self.dim as u32).to_be_bytes());
        for v in self.weights.iter().chain(&self.bias) {
            out.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < 13 || &b[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Format("not a classifier checkpoint".into()));
        }
        if b[4] != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {}",
                b[4]
            )));
        }
        let c = u32::from_be_bytes(b[5..9].try_into().unwrap()) as usize;
        let d = u32::from_be_bytes(b[9..13].try_into().unwrap()) as usize;
        let body = &b[13..];
        if body.len() != 4 * (c * d + c) {
            return Err(Error::Format(format!(
                "checkpoint body has {} bytes, {c}x{d} needs {}",
                body.len(),
                4 * (c * d + c)
            )));
        }
        let vals: Vec<T> = body
            .chunks_exact(4)
            .map(|x| T::of(f64::from(f32::from_le_bytes(x.try_into().unwrap()))))
            .collect();
        let (w, bias) = vals.split_at(c * d);
        Self::from_parts(c, d, w.to_vec(), bias.to_vec())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::pipeline::export::write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Trains on standardized features and folds the standardization back into
/// the returned weights, so the classifier takes raw features.
pub fn train_toy<T: Scalar>(
    xs: &[Vec<T>],
    ys: &[usize],
    classes: usize,
    cfg: &TrainConfig,
) -> Result<(ToyClassifier<T>, TrainReport)> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::param(format!(
            "{} samples with {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let dim = xs[0].len();
    if dim == 0 || xs.iter().any(|x| x.len() != dim) {
        return Err(Error::param(
            "samples must share a positive feature dimension",
        ));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::param("features contain a non-finite value"));
    }
    if let Some(&y) = ys.iter().find(|&&y| y >= classes) {
        return Err(Error::param(format!("label {y} outside {classes} classes")));
    }
    if classes < 2 || ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::param("training needs at least two distinct classes"));
    }
    if cfg.batch == 0 || cfg.lr.is_nan() || cfg.lr < 0.0 {
        return Err(Error::param("batch must be positive and lr non-negative"));
    }

    let n = T::of(xs.len() as f64);
    let mut mean = vec![T::zero(); dim];
    for x in xs {
        for (m, &v) in mean.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut std = vec![T::zero(); dim];
    for x in xs {
        for ((s, &v), &m) in std.iter_mut().zip(x).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    for s in &mut std {
        *s = if *s > T::of(1e-24) {
            s.sqrt()
        } else {
            T::one()
        };
    }
    let zs: Vec<Vec<T>> = xs
        .iter()
        .map(|x| {
            x.iter()
                .zip(&mean)
                .zip(&std)
                .map(|((&v, &m), &s)| (v - m) / s)
                .collect()
        })
        .collect();

    let mut clf = ToyClassifier::zeros(classes, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = T::of(cfg.lr_at(epoch));
        order.shuffle(&mut rng);
        let (mut total, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch) {
            let bx: Vec<&[T]> = chunk.iter().map(|&i| zs[i].as_slice()).collect();
            let by: Vec<usize> = chunk.iter().map(|&i| ys[i]).collect();
            let g = clf.loss_and_grad(&bx, &by);
            total += g.loss.to_f64_lossy();
            batches += 1;
            for (w, d) in clf.weights.iter_mut().zip(&g.weights) {
                *w -= lr * *d;
            }
            for (b, d) in clf.bias.iter_mut().zip(&g.bias) {
                *b -= lr * *d;
            }
        }
        epoch_losses.push(total / batches as f64);
    }

    for c in 0..classes {
        let row = &mut clf.weights[c * dim..(c + 1) * dim];
        let mut shift = T::zero();
        for ((w, &m), &s) in row.iter_mut().zip(&mean).zip(&std) {
            *w /= s;
            shift += *w * m;
        }
        clf.bias[c] -= shift;
    }
    Ok((clf, TrainReport { epoch_losses }))
}
