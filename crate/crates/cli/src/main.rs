use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use cdvid::bench::{bench_stream, BenchReport, REFERENCE_RATIO};
use cdvid::codec::y4m::{read_y4m, write_y4m};
use cdvid::codec::{
    decode_video_full, encode_video, EncodedStream, EncoderConfig, FrameKind, RawVideo,
};
use cdvid::demo::{
    encode_labeled, evaluate_row, metrics_csv, read_dataset, summarize, write_dataset, DemoConfig,
    DemoModel, LabeledStream,
};
use cdvid::fbs::FbsConfig;
use cdvid::flops::{average_gflops, count_cost, ArchSpec, CostReport};
use cdvid::fusion::FusionWeights;
use cdvid::partial_decode::{parse_headers, Extractor, Want};
use cdvid::pipeline::{
    export, frequency_tensors, temporal_tensors, write_atomic, BandStats, ExportMeta, SampleSpec,
    StreamKind, TensorRecord,
};
use cdvid::report::{Plot, PlotPoint};
use cdvid::synth::{
    mixed_set, synthesize, two_class_motion_set, LabeledVideo, SynthKind, SynthSpec,
};

/// Compressed-domain video toolkit.
#[derive(Parser, Debug)]
#[command(name = "cdvid", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file or directory of the command.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic clip to y4m, or a labeled set to a directory.
    Synth(SynthArgs),
    /// Encode a y4m clip.
    Encode(EncodeArgs),
    /// Fully decode a stream back to y4m.
    Decode(InputArgs),
    /// Build network input tensors from a stream and write them as FCVT.
    Extract(ExtractArgs),
    /// Print stream layout as JSON, optionally fitting band statistics.
    Inspect(InputArgs),
    /// Time partial against full decoding.
    Bench(BenchArgs),
    /// Count operations and parameters of architectures.
    Flops(FlopsArgs),
    /// Train the toy two-stream model.
    DemoTrain(DemoArgs),
    /// Evaluate a trained toy model and write metrics.
    DemoEval(DemoEvalArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SynthChoice {
    Static,
    Translate,
    Noise,
    TwoClassMotion,
    Mixed,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "translate")]
    kind: SynthChoice,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 24)]
    frames: usize,
    /// Horizontal speed of the translate clip.
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    dx: i32,
    /// Class of a single two-class-motion clip.
    #[arg(long, default_value_t = 0)]
    label: usize,
    /// Write a labeled set of this many clips into the output directory.
    #[arg(long)]
    videos: Option<usize>,
}

#[derive(Args, Debug)]
struct CodecArgs {
    #[arg(long, default_value_t = 12)]
    gop: u8,
    #[arg(long, default_value_t = 4)]
    quality: u8,
    #[arg(long, default_value_t = 8)]
    search_range: u32,
}

impl CodecArgs {
    fn config(&self) -> EncoderConfig {
        EncoderConfig::new(self.gop, self.quality, self.search_range)
    }
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Fit band statistics over the I-frames and write them here.
    #[arg(long)]
    band_stats: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StreamChoice {
    Freq,
    Mv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeChoice {
    Train,
    Test,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    stream: StreamChoice,
    /// Bands kept per color channel.
    #[arg(long, default_value_t = 32)]
    fbs: usize,
    #[arg(long, value_enum, default_value = "test")]
    mode: ModeChoice,
    /// Crop size as HxW, in blocks for freq and pixels for mv.
    #[arg(long, value_parser = parse_size)]
    target: Option<(usize, usize)>,
    /// Sampled frames; defaults to the mode's standard count.
    #[arg(long)]
    frames: Option<usize>,
    /// Band statistics JSON used to normalize freq tensors.
    #[arg(long)]
    band_stats: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    search_range: u32,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Stream to time; a 320x240, 300-frame translate clip when omitted.
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[command(flatten)]
    codec: CodecArgs,
    /// SVG plot of decode time per frame with the reference line.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlopsArgs {
    /// Architecture files; repeat for several rows.
    #[arg(long, required = true)]
    arch: Vec<PathBuf>,
    /// Fraction of I-frames; adds the per-frame average column.
    #[arg(long)]
    mix: Option<f64>,
    /// P-frame network; `resnet18.arch` next to the first --arch by default.
    #[arg(long)]
    p_arch: Option<PathBuf>,
    /// Report 2 FLOPs per multiply-accumulate.
    #[arg(long)]
    two_per_mac: bool,
    /// Print JSON, including per-layer costs, instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labeled set written by `synth --videos`; synthesized in memory otherwise.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "two-class-motion")]
    set: SetChoice,
    #[arg(long, default_value_t = 100)]
    videos: usize,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 24)]
    frames: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SetChoice {
    TwoClassMotion,
    Mixed,
}

#[derive(Args, Debug)]
struct DemoEvalArgs {
    #[command(flatten)]
    set: DemoArgs,
    #[arg(long)]
    model: PathBuf,
    /// Fusion weights as FREQ,TEMP.
    #[arg(long)]
    weights: Option<FusionWeights>,
}

/// Exit status 1 for misuse, 2 for bad or unreadable data.
enum Failure {
    Usage(String),
    Data(cdvid::Error),
}

impl From<cdvid::Error> for Failure {
    fn from(e: cdvid::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(h)?, p(w)?))
}

fn need_out(cli: &Cli) -> std::result::Result<&Path, Failure> {
    cli.out
        .as_deref()
        .ok_or_else(|| Failure::Usage("this command needs --out".into()))
}

fn read_video(path: &Path) -> cdvid::Result<RawVideo> {
    read_y4m(BufReader::new(File::open(path)?))
}

fn write_video(path: &Path, video: &RawVideo) -> cdvid::Result<()> {
    let mut buf = Vec::new();
    write_y4m(video, &mut buf)?;
    write_atomic(path, &buf)
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("json values always serialize")
    );
}

fn synth(cli: &Cli, a: &SynthArgs) -> Outcome {
    let out = need_out(cli)?;
    let spec = SynthSpec::new(a.width, a.height, a.frames, cli.seed);
    if let Some(n) = a.videos {
        let videos: Vec<LabeledVideo> = match a.kind {
            SynthChoice::TwoClassMotion => two_class_motion_set(n, &spec)?,
            SynthChoice::Mixed => mixed_set(n, &spec)?.into_iter().map(|(v, _)| v).collect(),
            _ => {
                return Err(Failure::Usage(
                    "--videos needs --kind two-class-motion or mixed".into(),
                ))
            }
        };
        write_dataset(out, &videos)?;
        print_json(&json!({ "videos": videos.len(), "dir": out.display().to_string() }));
        return Ok(());
    }
    let kind = match a.kind {
        SynthChoice::Static => SynthKind::Static,
        SynthChoice::Translate => SynthKind::Translate { dx: a.dx },
        SynthChoice::Noise => SynthKind::Noise,
        SynthChoice::TwoClassMotion => SynthKind::TwoClassMotion { label: a.label },
        SynthChoice::Mixed => return Err(Failure::Usage("--kind mixed needs --videos".into())),
    };
    Ok(write_video(out, &synthesize(kind, &spec)?)?)
}

fn encode(cli: &Cli, a: &EncodeArgs) -> Outcome {
    let out = need_out(cli)?;
    let stream = encode_video(&read_video(&a.input)?, &a.codec.config())?;
    Ok(write_atomic(out, stream.as_bytes())?)
}

fn decode(cli: &Cli, a: &InputArgs) -> Outcome {
    let out = need_out(cli)?;
    let stream = EncodedStream::from_bytes(std::fs::read(&a.input)?);
    Ok(write_video(out, &decode_video_full(&stream)?)?)
}

fn extract(cli: &Cli, a: &ExtractArgs) -> Outcome {
    let dir = need_out(cli)?;
    let bytes = std::fs::read(&a.input)?;
    let ex = Extractor::new(&bytes)?;
    let kind = match a.stream {
        StreamChoice::Freq => StreamKind::Frequency,
        StreamChoice::Mv => StreamKind::Temporal,
    };
    let mut spec = match a.mode {
        ModeChoice::Train => SampleSpec::train(kind),
        ModeChoice::Test => SampleSpec::test(kind),
    };
    if let Some((h, w)) = a.target {
        spec = spec.with_target(h, w);
    }
    if let Some(n) = a.frames {
        spec = spec.with_frames(n);
    }
    let fbs = FbsConfig::new(a.fbs)?;
    let tensors = match kind {
        StreamKind::Frequency => {
            let stats = a.band_stats.as_deref().map(BandStats::load).transpose()?;
            frequency_tensors(&ex, &spec, fbs, stats.as_ref(), cli.seed)?
        }
        StreamKind::Temporal => temporal_tensors(&ex, &spec, a.search_range, cli.seed)?,
    };
    let video_id = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let meta = ExportMeta {
        video_id: video_id.clone(),
        frame_indices: tensors.frames.clone(),
        seed: cli.seed,
    };
    let fbs_k = if kind == StreamKind::Frequency {
        fbs.k() as u8
    } else {
        0
    };
    let record = TensorRecord::stack(kind, fbs_k, &tensors.tensors, meta)?;
    std::fs::create_dir_all(dir)?;
    let suffix = match a.stream {
        StreamChoice::Freq => "freq",
        StreamChoice::Mv => "mv",
    };
    let path = dir.join(format!("{video_id}.{suffix}.fcvt"));
    export(&record, &path)?;
    print_json(&json!({
        "file": path.display().to_string(),
        "stream": kind.name(),
        "tensors": tensors.tensors.len(),
        "dims": record.dims,
        "bytes_read": ex.bytes_read(),
        "stream_bytes": bytes.len(),
    }));
    Ok(())
}

fn inspect(a: &InputArgs) -> Outcome {
    let bytes = std::fs::read(&a.input)?;
    let info = parse_headers(&bytes)?;
    let count = |k| info.frames_of_kind(k).len();
    let mut v = json!({
        "width": info.width(),
        "height": info.height(),
        "frames": info.frames.len(),
        "i_frames": count(FrameKind::I),
        "p_frames": count(FrameKind::P),
        "stream_bytes": info.stream_len,
        "header_bytes_read": info.header_bytes_read,
    });
    if let Some(path) = &a.band_stats {
        let ex = Extractor::with_info(&bytes, info);
        let mut dct = Vec::new();
        for f in ex.extract_all(Want::I_DCT) {
            dct.extend(f?.dct);
        }
        BandStats::fit(&dct)?.save(path)?;
        v["band_stats"] = json!(path.display().to_string());
    }
    print_json(&v);
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs) -> Outcome {
    let (label, bytes) = match &a.input {
        Some(p) => (p.display().to_string(), std::fs::read(p)?),
        None => {
            let spec = SynthSpec::new(320, 240, 300, cli.seed);
            let video = synthesize(SynthKind::Translate { dx: 2 }, &spec)?;
            let bytes = encode_video(&video, &a.codec.config())?.into_bytes();
            ("translate-320x240x300".to_string(), bytes)
        }
    };
    let r = bench_stream(&label, &bytes, a.repeats)?;
    if let Some(out) = &cli.out {
        write_atomic(out, r.to_csv().as_bytes())?;
    }
    if let Some(svg) = &a.svg {
        write_atomic(svg, bench_plot(&r).to_svg().as_bytes())?;
    }
    print_json(&json!({
        "label": r.label,
        "frames": r.frames,
        "full_ms": r.full.total.as_secs_f64() * 1e3,
        "partial_ms": r.partial.total.as_secs_f64() * 1e3,
        "ratio": r.ratio(),
        "gate_pass": r.passes_gate(),
        "reference_ratio": REFERENCE_RATIO,
        "reference_met": r.meets_reference(),
    }));
    Ok(())
}

fn bench_plot(r: &BenchReport) -> Plot {
    let per_frame = |d: std::time::Duration| d.as_secs_f64() * 1e3 / r.frames.max(1) as f64;
    let full = per_frame(r.full.total);
    Plot {
        title: format!("{} decode cost", r.label),
        x_label: "ms per frame".into(),
        y_label: "fraction of full".into(),
        points: vec![
            PlotPoint {
                label: "full".into(),
                cost: full,
                accuracy: 1.0,
            },
            PlotPoint {
                label: "partial".into(),
                cost: per_frame(r.partial.total),
                accuracy: r.ratio(),
            },
        ],
        guides: vec![(
            format!("{:.0}% of full", REFERENCE_RATIO * 100.0),
            full * REFERENCE_RATIO,
        )],
    }
}

fn cost_json(r: &CostReport, scale: f64) -> serde_json::Value {
    json!({
        "name": r.name,
        "macs": r.macs,
        "gflops": r.gflops() * scale,
        "params": r.params,
        "mparams": r.mparams(),
        "layers": r.layers.iter()
            .map(|l| json!({"name": l.name, "output": l.output, "macs": l.macs, "params": l.params}))
            .collect::<Vec<_>>(),
    })
}

fn flops(cli: &Cli, a: &FlopsArgs) -> Outcome {
    let scale = if a.two_per_mac { 2.0 } else { 1.0 };
    let costs = a
        .arch
        .iter()
        .map(|p| count_cost(&ArchSpec::load(p)?))
        .collect::<cdvid::Result<Vec<_>>>()?;
    let p_cost = match (a.mix, &a.p_arch) {
        (None, None) => None,
        (None, Some(_)) => return Err(Failure::Usage("--p-arch needs --mix".into())),
        (Some(_), p) => {
            let path = p.clone().unwrap_or_else(|| {
                a.arch[0]
                    .parent()
                    .unwrap_or(Path::new("."))
                    .join("resnet18.arch")
            });
            Some(count_cost(&ArchSpec::load(&path)?)?)
        }
    };
    let averages = match (&p_cost, a.mix) {
        (Some(p), Some(mix)) => Some(
            costs
                .iter()
                .map(|c| Ok(average_gflops(c, p, mix)? * scale))
                .collect::<cdvid::Result<Vec<f64>>>()?,
        ),
        _ => None,
    };
    let text = if a.json {
        let mut v =
            json!({ "networks": costs.iter().map(|c| cost_json(c, scale)).collect::<Vec<_>>() });
        if let (Some(p), Some(avg)) = (&p_cost, &averages) {
            v["p_network"] = cost_json(p, scale);
            v["mix"] = json!(a.mix);
            v["average_gflops"] = json!(avg);
        }
        serde_json::to_string_pretty(&v).expect("json values always serialize") + "\n"
    } else {
        let unit = if a.two_per_mac {
            "GFLOPs (2/MAC)"
        } else {
            "GFLOPs"
        };
        let mut s = format!("{:<16} {:>14} {:>12}", "network", unit, "params (M)");
        if let Some(mix) = a.mix {
            s += &format!(" {:>14}", format!("avg @ {mix}"));
        }
        s.push('\n');
        for (i, c) in costs.iter().enumerate() {
            s += &format!(
                "{:<16} {:>14.3} {:>12.2}",
                c.name,
                c.gflops() * scale,
                c.mparams()
            );
            if let Some(avg) = &averages {
                s += &format!(" {:>14.3}", avg[i]);
            }
            s.push('\n');
        }
        if let Some(p) = &p_cost {
            s += &format!("P-frames: {} at {:.3}\n", p.name, p.gflops() * scale);
        }
        s
    };
    print!("{text}");
    if let Some(out) = &cli.out {
        write_atomic(out, text.as_bytes())?;
    }
    Ok(())
}

fn demo_config(cli: &Cli, a: &DemoArgs) -> cdvid::Result<DemoConfig> {
    let mut cfg = match &a.config {
        Some(p) => DemoConfig::load(p)?,
        None => DemoConfig::default(),
    };
    cfg.seed = cli.seed;
    Ok(cfg)
}

/// Training and evaluation sets drawn in memory use disjoint seeds.
fn demo_set(a: &DemoArgs, cfg: &DemoConfig, seed: u64) -> cdvid::Result<Vec<LabeledStream>> {
    let videos: Vec<LabeledVideo> = match &a.data {
        Some(dir) => read_dataset(dir)?,
        None => {
            let spec = SynthSpec::new(a.width, a.height, a.frames, seed);
            match a.set {
                SetChoice::TwoClassMotion => two_class_motion_set(a.videos, &spec)?,
                SetChoice::Mixed => mixed_set(a.videos, &spec)?
                    .into_iter()
                    .map(|(v, _)| v)
                    .collect(),
            }
        }
    };
    videos.par_iter().map(|v| encode_labeled(v, cfg)).collect()
}

fn demo_train(cli: &Cli, a: &DemoArgs) -> Outcome {
    let out = need_out(cli)?;
    let cfg = demo_config(cli, a)?;
    let train = demo_set(a, &cfg, cli.seed.wrapping_mul(2))?;
    let model = cdvid::demo::demo_train(&train, &cfg)?;
    model.save(out)?;
    print_json(&json!({
        "videos": train.len(),
        "classes": model.classes,
        "model": out.display().to_string(),
    }));
    Ok(())
}

fn demo_eval(cli: &Cli, a: &DemoEvalArgs) -> Outcome {
    let out = need_out(cli)?;
    let mut cfg = demo_config(cli, &a.set)?;
    if let Some(w) = a.weights {
        cfg.weights = w;
    }
    let model = DemoModel::load(&a.model)?;
    let test = demo_set(&a.set, &cfg, cli.seed.wrapping_mul(2).wrapping_add(1))?;
    let rows = test
        .par_iter()
        .enumerate()
        .map(|(i, s)| evaluate_row(s, &model, &cfg, i))
        .collect::<cdvid::Result<Vec<_>>>()?;
    let m = summarize(rows);
    write_atomic(out, metrics_csv(&m, cfg.weights).as_bytes())?;
    print_json(&json!({
        "videos": m.rows.len(),
        "frequency": m.acc_freq,
        "temporal": m.acc_temp,
        "fused": m.acc_fused,
        "weights": cfg.weights.to_string(),
    }));
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Command::Synth(a) => synth(cli, a),
        Command::Encode(a) => encode(cli, a),
        Command::Decode(a) => decode(cli, a),
        Command::Extract(a) => extract(cli, a),
        Command::Inspect(a) => inspect(a),
        Command::Bench(a) => bench(cli, a),
        Command::Flops(a) => flops(cli, a),
        Command::DemoTrain(a) => demo_train(cli, a),
        Command::DemoEval(a) => demo_eval(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
