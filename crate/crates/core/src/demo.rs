//! End-to-end toy run: encode labeled videos, partially decode them, build
//! both stream inputs, train one classifier per stream, and evaluate each
//! stream alone and fused.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::y4m::{read_y4m, write_y4m};
use crate::codec::{encode_video, EncoderConfig};
use crate::error::{Error, Result};
use crate::fbs::FbsConfig;
use crate::fusion::{
    late_fuse, pool_channel_means, pool_mean_var, train_toy, video_score, FusionWeights,
    ScoreVector, ToyClassifier, TrainConfig,
};
use crate::partial_decode::{Extractor, Want};
use crate::pipeline::{
    frequency_tensors, temporal_tensors, write_atomic, BandStats, SampleMode, SampleSpec,
    StreamKind, StreamTensors,
};
use crate::synth::LabeledVideo;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub gop_size: u8,
    pub quality: u8,
    pub search_range: u32,
    pub fbs_k: usize,
    /// Frequency-stream crop in blocks.
    pub freq_target: [usize; 2],
    /// Temporal-stream crop in pixels.
    pub temp_target: [usize; 2],
    pub train_frames: usize,
    pub test_frames: usize,
    pub freq_train: TrainConfig,
    pub temp_train: TrainConfig,
    pub weights: FusionWeights,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        let train = TrainConfig {
            lr: 0.1,
            epochs: 60,
            batch: 16,
            milestones: vec![40],
            seed: 0,
        };
        Self {
            gop_size: 12,
            quality: 4,
            search_range: 8,
            fbs_k: 32,
            freq_target: [6, 6],
            temp_target: [48, 48],
            train_frames: 3,
            test_frames: 25,
            freq_train: train.clone(),
            temp_train: train,
            weights: FusionWeights::default(),
            seed: 0,
        }
    }
}

impl DemoConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        toml::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn encoder(&self) -> EncoderConfig {
        EncoderConfig::new(self.gop_size, self.quality, self.search_range)
    }

    pub fn fbs(&self) -> Result<FbsConfig> {
        FbsConfig::new(self.fbs_k)
    }

    pub fn spec(&self, kind: StreamKind, mode: SampleMode) -> SampleSpec {
        let (base, n) = match mode {
            SampleMode::Train => (SampleSpec::train(kind), self.train_frames),
            SampleMode::Test => (SampleSpec::test(kind), self.test_frames),
        };
        let [h, w] = match kind {
            StreamKind::Frequency => self.freq_target,
            StreamKind::Temporal => self.temp_target,
        };
        base.with_target(h, w).with_frames(n)
    }
}

/// An encoded video with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStream {
    pub id: String,
    pub label: usize,
    pub bytes: Vec<u8>,
}

pub fn encode_labeled(v: &LabeledVideo, cfg: &DemoConfig) -> Result<LabeledStream> {
    Ok(LabeledStream {
        id: v.id.clone(),
        label: v.label,
        bytes: encode_video(&v.video, &cfg.encoder())?.into_bytes(),
    })
}

pub const LABELS_FILE: &str = "labels.csv";

/// Writes each video as `<id>.y4m` plus a `labels.csv` index.
pub fn write_dataset(dir: &Path, videos: &[LabeledVideo]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut index = String::from("video,label\n");
    for v in videos {
        if v.id.contains([',', '/', '\\']) {
            return Err(Error::param(format!(
                "video id {:?} is not a plain file stem",
                v.id
            )));
        }
        let mut buf = Vec::new();
        write_y4m(&v.video, &mut buf)?;
        write_atomic(&dir.join(format!("{}.y4m", v.id)), &buf)?;
        index.push_str(&format!("{},{}\n", v.id, v.label));
    }
    write_atomic(&dir.join(LABELS_FILE), index.as_bytes())
}

/// Reads a directory written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Vec<LabeledVideo>> {
    let path = dir.join(LABELS_FILE);
    let index = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut lines = index.lines();
    if lines.next() != Some("video,label") {
        return Err(Error::Config(format!(
            "{}: expected header video,label",
            path.display()
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || Error::Config(format!("{} line {}: {line:?}", path.display(), i + 2));
            let (id, label) = line.split_once(',').ok_or_else(bad)?;
            let label = label.trim().parse().map_err(|_| bad())?;
            let file = std::fs::File::open(dir.join(format!("{id}.y4m")))?;
            Ok(LabeledVideo {
                id: id.to_string(),
                label,
                video: read_y4m(std::io::BufReader::new(file))?,
            })
        })
        .collect()
}

fn video_seed(cfg: &DemoConfig, index: usize) -> u64 {
    cfg.seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
}

/// Network-ready tensors of both streams for one video.
pub fn stream_tensors(
    s: &LabeledStream,
    mode: SampleMode,
    cfg: &DemoConfig,
    stats: Option<&BandStats>,
    seed: u64,
) -> Result<(StreamTensors, StreamTensors)> {
    let ex = Extractor::new(&s.bytes)?;
    let f = frequency_tensors(
        &ex,
        &cfg.spec(StreamKind::Frequency, mode),
        cfg.fbs()?,
        stats,
        seed,
    )?;
    let t = temporal_tensors(
        &ex,
        &cfg.spec(StreamKind::Temporal, mode),
        cfg.search_range,
        seed,
    )?;
    Ok((f, t))
}

/// Pooled classifier inputs of every tensor.
pub fn pooled(t: &StreamTensors) -> Vec<Vec<f64>> {
    t.tensors
        .iter()
        .map(|x| match t.kind {
            StreamKind::Frequency => pool_channel_means(x),
            StreamKind::Temporal => pool_mean_var(x),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoModel {
    pub classes: usize,
    pub stats: BandStats,
    pub freq: ToyClassifier<f64>,
    pub temp: ToyClassifier<f64>,
}

impl DemoModel {
    pub const STATS_FILE: &'static str = "band_stats.json";
    pub const FREQ_FILE: &'static str = "frequency.fcvc";
    pub const TEMP_FILE: &'static str = "temporal.fcvc";

    /// Writes the band statistics and both checkpoints into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.stats.save(&dir.join(Self::STATS_FILE))?;
        self.freq.save(&dir.join(Self::FREQ_FILE))?;
        self.temp.save(&dir.join(Self::TEMP_FILE))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let freq = ToyClassifier::load(&dir.join(Self::FREQ_FILE))?;
        let temp = ToyClassifier::load(&dir.join(Self::TEMP_FILE))?;
        if freq.classes() != temp.classes() {
            return Err(Error::Format(format!(
                "checkpoints disagree on class count: {} vs {}",
                freq.classes(),
                temp.classes()
            )));
        }
        Ok(Self {
            classes: freq.classes(),
            stats: BandStats::load(&dir.join(Self::STATS_FILE))?,
            freq,
            temp,
        })
    }
}

fn class_count(streams: &[LabeledStream]) -> Result<usize> {
    streams
        .iter()
        .map(|s| s.label + 1)
        .max()
        .ok_or_else(|| Error::param("empty training set"))
}

/// Per-channel band statistics of every I-frame in the set.
pub fn fit_band_stats(streams: &[LabeledStream]) -> Result<BandStats> {
    let mut tensors = Vec::new();
    for s in streams {
        let ex = Extractor::new(&s.bytes)?;
        for f in ex.extract_all(Want::I_DCT) {
            tensors.extend(f?.dct);
        }
    }
    BandStats::fit(&tensors)
}

pub fn demo_train(train: &[LabeledStream], cfg: &DemoConfig) -> Result<DemoModel> {
    let classes = class_count(train)?;
    let stats = fit_band_stats(train)?;
    let (mut fx, mut fy, mut tx, mut ty) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, s) in train.iter().enumerate() {
        let (f, t) = stream_tensors(s, SampleMode::Train, cfg, Some(&stats), video_seed(cfg, i))?;
        for x in pooled(&f) {
            fx.push(x);
            fy.push(s.label);
        }
        for x in pooled(&t) {
            tx.push(x);
            ty.push(s.label);
        }
    }
    let (freq, _) = train_toy(&fx, &fy, classes, &cfg.freq_train)?;
    let (temp, _) = train_toy(&tx, &ty, classes, &cfg.temp_train)?;
    Ok(DemoModel {
        classes,
        stats,
        freq,
        temp,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub id: String,
    pub label: usize,
    pub freq_tensors: usize,
    pub temp_tensors: usize,
    pub pred_freq: usize,
    pub pred_temp: usize,
    pub pred_fused: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoMetrics {
    pub rows: Vec<EvalRow>,
    pub acc_freq: f64,
    pub acc_temp: f64,
    pub acc_fused: f64,
}

/// Video scores of both streams: frame scores averaged over every test view.
pub fn video_scores(
    s: &LabeledStream,
    model: &DemoModel,
    cfg: &DemoConfig,
    index: usize,
) -> Result<(ScoreVector<f64>, ScoreVector<f64>, usize, usize)> {
    let (f, t) = stream_tensors(
        s,
        SampleMode::Test,
        cfg,
        Some(&model.stats),
        video_seed(cfg, index),
    )?;
    let fs = model.freq.predict_batch(&pooled(&f))?;
    let ts = model.temp.predict_batch(&pooled(&t))?;
    Ok((
        video_score(&fs)?,
        video_score(&ts)?,
        f.tensors.len(),
        t.tensors.len(),
    ))
}

pub fn evaluate_row(
    s: &LabeledStream,
    model: &DemoModel,
    cfg: &DemoConfig,
    index: usize,
) -> Result<EvalRow> {
    let (vf, vt, nf, nt) = video_scores(s, model, cfg, index)?;
    Ok(EvalRow {
        id: s.id.clone(),
        label: s.label,
        freq_tensors: nf,
        temp_tensors: nt,
        pred_freq: vf.argmax(),
        pred_temp: vt.argmax(),
        pred_fused: late_fuse(&vf, &vt, cfg.weights)?.argmax(),
    })
}

pub fn summarize(rows: Vec<EvalRow>) -> DemoMetrics {
    let n = rows.len().max(1) as f64;
    let acc = |f: fn(&EvalRow) -> usize| rows.iter().filter(|r| f(r) == r.label).count() as f64 / n;
    DemoMetrics {
        acc_freq: acc(|r| r.pred_freq),
        acc_temp: acc(|r| r.pred_temp),
        acc_fused: acc(|r| r.pred_fused),
        rows,
    }
}

pub fn demo_eval(
    test: &[LabeledStream],
    model: &DemoModel,
    cfg: &DemoConfig,
) -> Result<DemoMetrics> {
    let rows = test
        .iter()
        .enumerate()
        .map(|(i, s)| evaluate_row(s, model, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(rows))
}

pub const METRICS_SCHEMA: &str = "cdvid-demo-metrics/1";

/// Summary lines followed by one row per video.
pub fn metrics_csv(m: &DemoMetrics, weights: FusionWeights) -> String {
    let mut s = format!("# schema={METRICS_SCHEMA}\n");
    s.push_str("stream,accuracy,videos\n");
    for (name, a) in [
        ("frequency", m.acc_freq),
        ("temporal", m.acc_temp),
        ("fused", m.acc_fused),
    ] {
        s.push_str(&format!("{name},{a:.6},{}\n", m.rows.len()));
    }
    s.push_str(&format!("# fusion_weights={weights}\n"));
    s.push_str("video,label,freq_tensors,temp_tensors,pred_freq,pred_temp,pred_fused\n");
    for r in &m.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.id, r.label, r.freq_tensors, r.temp_tensors, r.pred_freq, r.pred_temp, r.pred_fused
        ));
    }
    s
}
