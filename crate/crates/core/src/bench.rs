//! Wall-clock comparison of partial and full decoding.

use std::time::{Duration, Instant};

use crate::codec::{decode_video_timed, DecodeTiming};
use crate::error::{Error, Result};
use crate::partial_decode::{parse_headers, Extractor, Want};
use crate::probe;

/// Stretch line: partial decoding at one fifth of the full cost.
pub const REFERENCE_RATIO: f64 = 0.20;
/// Hard gate on the partial/full ratio.
pub const GATE_RATIO: f64 = 0.50;
pub const BENCH_SCHEMA: &str = "cdvid-bench/1";

/// Partial decoding has no IDCT or motion compensation phase; both fields
/// stay zero and are kept so the two reports share columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTiming {
    pub header_parse: Duration,
    pub entropy_decode: Duration,
    pub idct: Duration,
    pub motion_comp: Duration,
    pub total: Duration,
    pub bytes_read: u64,
    pub frames: usize,
}

pub fn time_partial(bytes: &[u8]) -> Result<PartialTiming> {
    let before = probe::snapshot();
    let t0 = Instant::now();
    let info = parse_headers(bytes)?;
    let header_parse = t0.elapsed();
    let ex = Extractor::with_info(bytes, info);
    let mut frames = 0;
    for f in ex.extract_all(Want::ALL) {
        std::hint::black_box(f?);
        frames += 1;
    }
    let total = t0.elapsed();
    let ops = probe::snapshot().since(before);
    if !ops.is_zero() {
        return Err(Error::Unsupported(format!(
            "partial decode did pixel work: {ops:?}"
        )));
    }
    Ok(PartialTiming {
        header_parse,
        entropy_decode: total - header_parse,
        idct: Duration::ZERO,
        motion_comp: Duration::ZERO,
        total,
        bytes_read: ex.bytes_read(),
        frames,
    })
}

fn join_ms(d: impl Iterator<Item = Duration>) -> String {
    d.map(|d| format!("{:.3}", d.as_secs_f64() * 1e3))
        .collect::<Vec<_>>()
        .join(";")
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub label: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub stream_bytes: usize,
    pub repeats: usize,
    pub full: DecodeTiming,
    pub partial: PartialTiming,
    /// `(full, partial)` totals of every repeat, in run order.
    pub samples: Vec<(Duration, Duration)>,
}

impl BenchReport {
    pub fn ratio(&self) -> f64 {
        self.partial.total.as_secs_f64() / self.full.total.as_secs_f64()
    }

    pub fn passes_gate(&self) -> bool {
        self.ratio() <= GATE_RATIO
    }

    pub fn meets_reference(&self) -> bool {
        self.ratio() <= REFERENCE_RATIO
    }

    pub fn full_fps(&self) -> f64 {
        self.frames as f64 / self.full.total.as_secs_f64()
    }

    pub fn partial_fps(&self) -> f64 {
        self.frames as f64 / self.partial.total.as_secs_f64()
    }

    pub fn csv_header() -> String {
        format!(
            "# schema={BENCH_SCHEMA}\n# machine={}\n\
             label,width,height,frames,stream_bytes,repeats,\
             full_ms,full_header_ms,full_entropy_ms,full_idct_ms,full_mc_ms,full_fps,\
             partial_ms,partial_header_ms,partial_entropy_ms,partial_idct_ms,partial_mc_ms,partial_fps,\
             partial_bytes_read,ratio,gate_ratio,gate_pass,reference_ratio,reference_met,\
             samples_full_ms,samples_partial_ms\n",
            machine_info()
        )
    }

    pub fn csv_row(&self) -> String {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        format!(
            "{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.1},{:.3},{:.3},{:.3},{:.3},{:.3},{:.1},{},{:.4},{:.2},{},{:.2},{},{},{}\n",
            self.label.replace(',', " "),
            self.width,
            self.height,
            self.frames,
            self.stream_bytes,
            self.repeats,
            ms(self.full.total),
            ms(self.full.header_parse),
            ms(self.full.entropy_decode),
            ms(self.full.idct),
            ms(self.full.motion_comp),
            self.full_fps(),
            ms(self.partial.total),
            ms(self.partial.header_parse),
            ms(self.partial.entropy_decode),
            ms(self.partial.idct),
            ms(self.partial.motion_comp),
            self.partial_fps(),
            self.partial.bytes_read,
            self.ratio(),
            GATE_RATIO,
            self.passes_gate(),
            REFERENCE_RATIO,
            self.meets_reference(),
            join_ms(self.samples.iter().map(|s| s.0)),
            join_ms(self.samples.iter().map(|s| s.1)),
        )
    }

    pub fn to_csv(&self) -> String {
        Self::csv_header() + &self.csv_row()
    }
}

/// Runs both decoders `repeats` times, alternating, and keeps the median of
/// every phase.
pub fn bench_stream(label: &str, bytes: &[u8], repeats: usize) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::param("repeats must be positive"));
    }
    let info = parse_headers(bytes)?;
    let mut full = Vec::with_capacity(repeats);
    let mut partial = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        full.push(decode_video_timed(bytes)?.1);
        partial.push(time_partial(bytes)?);
    }
    let pick = |f: fn(&DecodeTiming) -> Duration| median(full.iter().map(f).collect());
    let full_med = DecodeTiming {
        header_parse: pick(|t| t.header_parse),
        entropy_decode: pick(|t| t.entropy_decode),
        idct: pick(|t| t.idct),
        motion_comp: pick(|t| t.motion_comp),
        total: pick(|t| t.total),
    };
    let ppick = |f: fn(&PartialTiming) -> Duration| median(partial.iter().map(f).collect());
    let partial_med = PartialTiming {
        header_parse: ppick(|t| t.header_parse),
        entropy_decode: ppick(|t| t.entropy_decode),
        idct: Duration::ZERO,
        motion_comp: Duration::ZERO,
        total: ppick(|t| t.total),
        bytes_read: partial[0].bytes_read,
        frames: partial[0].frames,
    };
    let samples = full
        .iter()
        .zip(&partial)
        .map(|(f, p)| (f.total, p.total))
        .collect();
    Ok(BenchReport {
        label: label.to_string(),
        width: info.width(),
        height: info.height(),
        frames: info.frames.len(),
        stream_bytes: bytes.len(),
        repeats,
        full: full_med,
        partial: partial_med,
        samples,
    })
}

/// `os/arch/threads/cpu`, with commas stripped so it fits one CSV comment.
pub fn machine_info() -> String {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown".into());
    format!(
        "{}/{}/{}threads/{}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        threads,
        cpu.replace(',', " ")
    )
}
