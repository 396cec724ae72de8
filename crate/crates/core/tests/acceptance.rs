//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cdvid::bench::{bench_stream, GATE_RATIO, REFERENCE_RATIO};
use cdvid::bitio::{
    block_symbols, build_huffman, huffman_decode, huffman_encode, read_block, rle_decode,
    rle_encode, write_block, BitReader, HuffmanTable, Symbol, BLOCK_LEN, EOB, MAX_CODE_LEN,
};
use cdvid::codec::{
    decode_video_full, dequantize, encode_video, encode_video_traced, inverse_zigzag, max_abs_diff,
    psnr, CodedFrame, Dct8, EncoderConfig, FrameKind, QuantConfig, RawVideo,
};
use cdvid::demo::{demo_eval, demo_train, encode_labeled, DemoConfig, LabeledStream};
use cdvid::fbs::FbsConfig;
use cdvid::flops::{average_gflops, count_cost, fit_frame_mix, ArchSpec, CostReport};
use cdvid::fusion::ToyClassifier;
use cdvid::partial_decode::{extract_all, Extractor, Want};
use cdvid::pipeline::{frequency_tensors, hflip_dct, temporal_tensors, SampleSpec, StreamKind};
use cdvid::probe;
use cdvid::synth::{
    mixed_set, synth_moving_square, synth_noise, synth_static, synth_translate,
    two_class_motion_set, LabeledVideo, SynthSpec,
};
use cdvid::tensor::CoeffTensor;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> Vec<(&'static str, RawVideo)> {
    vec![
        (
            "static",
            synth_static(&SynthSpec::new(64, 48, 8, 1)).unwrap(),
        ),
        (
            "translate",
            synth_translate(&SynthSpec::new(96, 64, 13, 2), 3).unwrap(),
        ),
        ("noise", synth_noise(&SynthSpec::new(48, 32, 6, 3)).unwrap()),
        (
            "square",
            synth_moving_square(&SynthSpec::new(64, 64, 13, 4), (0, -3), 10.0).unwrap(),
        ),
    ]
}

fn entropy_coding() -> Check {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tables = 0;
    for trial in 0..TRIALS {
        let n = rng.gen_range(1..=256usize);
        let mut freqs = BTreeMap::new();
        while freqs.len() < n {
            // geometric spread of counts forces the length limit on some tables
            let f = 1u64 << rng.gen_range(0..40);
            freqs.insert(rng.gen_range(0..=255u16) as Symbol, f + rng.gen_range(0..f));
        }
        let t = build_huffman(&freqs).map_err(|e| format!("huffman trial {trial}: {e}"))?;
        prefix_free(&t).map_err(|e| format!("huffman trial {trial}: {e}"))?;
        tables += 1;
        let alphabet: Vec<Symbol> = freqs.keys().copied().collect();
        let syms: Vec<Symbol> = (0..rng.gen_range(0..300))
            .map(|_| alphabet[rng.gen_range(0..n)])
            .collect();
        let w = huffman_encode(&t, &syms).map_err(|e| e.to_string())?;
        let len = w.bit_len();
        let (bytes, _) = w.finish();
        let mut r = BitReader::with_len(&bytes, len);
        let back = huffman_decode(&t, &mut r, syms.len())
            .map_err(|e| format!("huffman trial {trial}: {e}"))?;
        ensure(back == syms && r.remaining() == 0, || {
            format!("huffman trial {trial} roundtrip")
        })?;
    }
    for trial in 0..TRIALS {
        let mut block = [0i32; BLOCK_LEN];
        let density = rng.gen_range(0.0..1.0);
        for c in block.iter_mut() {
            if rng.gen_bool(density) {
                let size = rng.gen_range(1..=15u32);
                let mag = rng.gen_range(1i32 << (size - 1)..1i32 << size);
                *c = if rng.gen_bool(0.5) { mag } else { -mag };
            }
        }
        let seq = rle_encode(&block);
        ensure(
            rle_decode(&seq).map_err(|e| e.to_string())? == block,
            || format!("rle trial {trial}"),
        )?;
        let mut freqs = BTreeMap::new();
        for s in block_symbols(&seq).chain([EOB]) {
            *freqs.entry(s).or_insert(0u64) += 1;
        }
        let t = build_huffman(&freqs).map_err(|e| e.to_string())?;
        prefix_free(&t).map_err(|e| format!("rle trial {trial}: {e}"))?;
        tables += 1;
        let mut w = cdvid::bitio::BitWriter::new();
        write_block(&mut w, &t, &seq).map_err(|e| e.to_string())?;
        let len = w.bit_len();
        let (bytes, _) = w.finish();
        let mut r = BitReader::with_len(&bytes, len);
        let back = read_block(&mut r, &t).map_err(|e| format!("rle trial {trial}: {e}"))?;
        ensure(back == block && r.remaining() == 0, || {
            format!("rle trial {trial} coded roundtrip")
        })?;
    }
    Ok(format!(
        "{TRIALS} huffman + {TRIALS} rle trials, {tables} tables prefix-free"
    ))
}

/// Every pair of codewords checked; also requires the Kraft sum to be at most 1.
fn prefix_free(t: &HuffmanTable) -> std::result::Result<(), String> {
    let codes: Vec<(u32, u8)> = t
        .code_lengths()
        .iter()
        .map(|&(s, _)| t.codeword(s).unwrap())
        .collect();
    let mut kraft = 0.0;
    for (i, &(a, la)) in codes.iter().enumerate() {
        if la == 0 || la > MAX_CODE_LEN {
            return Err(format!("code length {la}"));
        }
        kraft += 0.5f64.powi(la as i32);
        for &(b, lb) in &codes[i + 1..] {
            let l = la.min(lb);
            if a >> (la - l) == b >> (lb - l) {
                return Err(format!(
                    "{a:0la$b} and {b:0lb$b} share a prefix",
                    la = la as usize,
                    lb = lb as usize
                ));
            }
        }
    }
    ensure(kraft <= 1.0 + 1e-12, || format!("Kraft sum {kraft}"))
}

fn codec_fidelity() -> Check {
    let mut worst = 0;
    for (name, v) in fixtures() {
        for gop in [1, 6] {
            let s = encode_video(&v, &EncoderConfig::new(gop, 1, 8)).map_err(|e| e.to_string())?;
            let d = decode_video_full(&s).map_err(|e| e.to_string())?;
            let e = max_abs_diff(&v, &d);
            worst = worst.max(e);
            ensure(e <= 2, || format!("{name} gop {gop}: q=1 error {e}"))?;
        }
    }
    let (_, tr) = fixtures().swap_remove(1);
    let mut prev = f64::INFINITY;
    let mut at4 = 0.0;
    for q in 1..=12u8 {
        let d = decode_video_full(
            &encode_video(&tr, &EncoderConfig::new(12, q, 8)).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let p = psnr(&tr, &d);
        if q <= 4 {
            ensure(p >= 30.0, || format!("translate q={q}: PSNR {p:.2} dB"))?;
            at4 = p;
        }
        ensure(p <= prev + 1e-9, || {
            format!("PSNR rises from {prev:.3} to {p:.3} at q={q}")
        })?;
        prev = p;
    }
    Ok(format!(
        "max q=1 error {worst}, PSNR {at4:.2} dB at q=4, monotone over q=1..12"
    ))
}

fn golden_tensor(f: &CodedFrame) -> CoeffTensor<i32> {
    let mut t = CoeffTensor::zeros(f.mb_rows * 2, f.mb_cols * 2, 64);
    for (i, mb) in f.macroblocks.iter().enumerate() {
        let (mx, my) = (i % f.mb_cols, i / f.mb_cols);
        for b in 0..4 {
            let (gy, gx) = (2 * my + b / 2, 2 * mx + b % 2);
            t.block_mut(gy, gx, 0).copy_from_slice(&mb.blocks[b]);
            t.block_mut(gy, gx, 1).copy_from_slice(&mb.blocks[4]);
            t.block_mut(gy, gx, 2).copy_from_slice(&mb.blocks[5]);
        }
    }
    t
}

fn partial_exactness() -> Check {
    let mut frames = 0;
    for (name, v) in fixtures() {
        for cfg in [EncoderConfig::new(4, 1, 8), EncoderConfig::new(12, 4, 4)] {
            let (s, golden) = encode_video_traced(&v, &cfg).map_err(|e| e.to_string())?;
            let before = probe::snapshot();
            let feats = extract_all(s.as_bytes(), Want::ALL).map_err(|e| e.to_string())?;
            let ops = probe::snapshot().since(before);
            ensure(ops.is_zero(), || {
                format!("{name}: pixel work during extraction {ops:?}")
            })?;
            ensure(feats.len() == golden.len(), || {
                format!("{name}: frame count")
            })?;
            for (f, g) in feats.iter().zip(&golden) {
                let same = match g.kind {
                    FrameKind::I => f.dct.as_ref() == Some(&golden_tensor(g)),
                    _ => f.mv_field == g.mv_field(),
                };
                ensure(same && f.kind == g.kind, || {
                    format!("{name}: frame {} differs", g.frame_no)
                })?;
                frames += 1;
            }
        }
    }
    Ok(format!(
        "{frames} frames bit-identical, probe counters zero"
    ))
}

fn out_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn partial_speed() -> Check {
    let v = synth_translate(&SynthSpec::new(320, 240, 300, 7), 2).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(12, 4, 8)).map_err(|e| e.to_string())?;
    let r = bench_stream("translate-320x240x300-q4", s.as_bytes(), 5).map_err(|e| e.to_string())?;
    let csv = out_dir().join("bench.csv");
    std::fs::write(&csv, r.to_csv()).map_err(|e| e.to_string())?;
    let ratio = r.ratio();
    let line = format!(
        "ratio {ratio:.3} (gate {GATE_RATIO:.2}; reference {REFERENCE_RATIO:.2} {}), full {:.0} ms, partial {:.0} ms, csv {}",
        if r.meets_reference() { "met" } else { "not met" },
        r.full.total.as_secs_f64() * 1e3,
        r.partial.total.as_secs_f64() * 1e3,
        csv.display()
    );
    ensure(r.passes_gate(), || line.clone())?;
    Ok(line)
}

fn cost(name: &str) -> CostReport {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("cfg")
        .join(format!("{name}.arch"));
    count_cost(&ArchSpec::load(&p).unwrap()).unwrap()
}

// GFLOPs, M params and relative tolerance of each network.
const NETWORK_COSTS: [(&str, f64, f64, f64); 4] = [
    ("resnet50", 3.86, 25.6, 0.03),
    ("dct", 5.40, 28.4, 0.05),
    ("fbs32", 3.68, 26.2, 0.05),
    ("fbs16", 3.18, 25.6, 0.05),
];

const AVERAGE_COSTS: [f64; 3] = [2.7, 2.3, 2.1];

fn flops_networks() -> Check {
    let mut parts = Vec::new();
    for (name, g, p, tol) in NETWORK_COSTS {
        let r = cost(name);
        ensure((r.gflops() - g).abs() <= tol * g, || {
            format!("{name}: {:.3} GFLOPs vs {g}", r.gflops())
        })?;
        ensure((r.mparams() - p).abs() <= tol * p, || {
            format!("{name}: {:.2}M params vs {p}", r.mparams())
        })?;
        parts.push(format!("{name} {:.2}/{:.1}M", r.gflops(), r.mparams()));
    }
    let (d, a, b) = (cost("dct").macs, cost("fbs32").macs, cost("fbs16").macs);
    ensure(d > a && a > b, || {
        "ordering dct > fbs32 > fbs16 broken".into()
    })?;
    Ok(parts.join(", "))
}

fn flops_average() -> Check {
    let i: Vec<f64> = NETWORK_COSTS[1..].iter().map(|r| r.1).collect();
    let (mix, p) = fit_frame_mix(&i, &AVERAGE_COSTS).map_err(|e| e.to_string())?;
    ensure((mix - 0.25).abs() < 0.02, || {
        format!("fitted I-frame fraction {mix:.4}")
    })?;
    let mp = cost("resnet18");
    let mut parts = vec![format!("fit mix {mix:.3} p {p:.3}")];
    for (name, y) in ["dct", "fbs32", "fbs16"].into_iter().zip(AVERAGE_COSTS) {
        let avg = average_gflops(&cost(name), &mp, 0.25).map_err(|e| e.to_string())?;
        ensure((avg - y).abs() <= 0.1, || {
            format!("{name}: {avg:.3} vs {y}")
        })?;
        parts.push(format!("{name} {avg:.2}"));
    }
    Ok(parts.join(", "))
}

fn pipeline_counts() -> Check {
    let mut videos = 0;
    for (name, v) in fixtures() {
        let cfg = EncoderConfig::new(6, 4, 8);
        let bytes = encode_video(&v, &cfg)
            .map_err(|e| e.to_string())?
            .into_bytes();
        let ex = Extractor::new(&bytes).map_err(|e| e.to_string())?;
        let freq = SampleSpec::test(StreamKind::Frequency).with_target(4, 4);
        let f = frequency_tensors(&ex, &freq, FbsConfig::new(32).unwrap(), None, 3)
            .map_err(|e| e.to_string())?;
        let temp = SampleSpec::test(StreamKind::Temporal).with_target(24, 24);
        let t = temporal_tensors(&ex, &temp, cfg.search_range, 3).map_err(|e| e.to_string())?;
        ensure(f.tensors.len() == 250 && t.tensors.len() == 250, || {
            format!(
                "{name}: {} frequency, {} temporal",
                f.tensors.len(),
                t.tensors.len()
            )
        })?;
        videos += 1;
    }
    Ok(format!("250 + 250 tensors on each of {videos} videos"))
}

fn pixels(block: &[i32], dct: &Dct8<f64>, q: QuantConfig) -> [[i64; 8]; 8] {
    let levels: [i32; 64] = block.try_into().unwrap();
    dct.inverse(&dequantize(&inverse_zigzag(&levels), q))
        .map(|r| r.map(|v| v.round() as i64))
}

fn flip_exactness() -> Check {
    let dct = Dct8::<f64>::new();
    let q = QuantConfig::new(1).unwrap();
    let mut frames = 0;
    let mut blocks = 0;
    for seed in 0..50u64 {
        let spec = SynthSpec::new(48, 32, 1, 5000 + seed);
        for v in [
            synth_noise(&spec).unwrap(),
            synth_translate(&spec, 0).unwrap(),
        ] {
            let s = encode_video(&v, &EncoderConfig::new(1, 1, 8)).map_err(|e| e.to_string())?;
            let t = extract_all(s.as_bytes(), Want::I_DCT)
                .map_err(|e| e.to_string())?
                .remove(0)
                .dct
                .unwrap();
            let f = hflip_dct(&t);
            let w = t.w_blocks();
            for by in 0..t.h_blocks() {
                for bx in 0..w {
                    for ch in 0..3 {
                        let a = pixels(t.block(by, bx, ch), &dct, q);
                        let b = pixels(f.block(by, w - 1 - bx, ch), &dct, q);
                        let mirrored = (0..8).all(|y| (0..8).all(|x| a[y][x] == b[y][7 - x]));
                        ensure(mirrored, || {
                            format!("frame {frames} block ({by},{bx}) channel {ch}")
                        })?;
                        blocks += 1;
                    }
                }
            }
            frames += 1;
        }
    }
    Ok(format!(
        "{frames} I-frames, {blocks} blocks mirrored exactly"
    ))
}

fn encode_set(vs: &[LabeledVideo], cfg: &DemoConfig) -> Vec<LabeledStream> {
    vs.iter().map(|v| encode_labeled(v, cfg).unwrap()).collect()
}

fn toy_end_to_end() -> Check {
    let cfg = DemoConfig::default();
    let train = encode_set(
        &two_class_motion_set(100, &SynthSpec::new(64, 64, 24, 1)).unwrap(),
        &cfg,
    );
    let test = encode_set(
        &two_class_motion_set(200, &SynthSpec::new(64, 64, 24, 2)).unwrap(),
        &cfg,
    );
    let m = demo_eval(
        &test,
        &demo_train(&train, &cfg).map_err(|e| e.to_string())?,
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    ensure(m.acc_temp >= 0.9, || {
        format!("temporal accuracy {:.3} on 200 videos", m.acc_temp)
    })?;
    let mixed = |n, seed| -> Vec<LabeledVideo> {
        mixed_set(n, &SynthSpec::new(64, 64, 24, seed))
            .unwrap()
            .into_iter()
            .map(|(v, _)| v)
            .collect()
    };
    let train = encode_set(&mixed(120, 3), &cfg);
    let test = encode_set(&mixed(120, 4), &cfg);
    let x = demo_eval(
        &test,
        &demo_train(&train, &cfg).map_err(|e| e.to_string())?,
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let best = x.acc_freq.max(x.acc_temp);
    ensure(x.acc_fused >= best - 0.02, || {
        format!("fused {:.3} below best single {best:.3}", x.acc_fused)
    })?;
    let worst_rel = gradient_check()?;
    Ok(format!(
        "temporal {:.3} on 200 videos; mixed freq {:.3} temp {:.3} fused {:.3}; gradient rel err {worst_rel:.1e}",
        m.acc_temp, x.acc_freq, x.acc_temp, x.acc_fused
    ))
}

fn gradient_check() -> std::result::Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (classes, dim, n) = (3, 6, 20);
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w: Vec<f64> = (0..classes * dim)
            .map(|_| rng.gen_range(-0.5..0.5))
            .collect();
        let b: Vec<f64> = (0..classes).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let clf = ToyClassifier::from_parts(classes, dim, w, b).map_err(|e| e.to_string())?;
        let g = clf.loss_and_grad(&refs, &ys);
        let analytic: Vec<f64> = g.weights.iter().chain(&g.bias).copied().collect();
        for (i, &a) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut c = clf.clone();
                if i < classes * dim {
                    c.weights_mut()[i] += delta;
                } else {
                    c.bias_mut()[i - classes * dim] += delta;
                }
                c.loss_and_grad(&refs, &ys).loss
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let diff = (a - numeric).abs();
            let rel = diff / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            ensure(rel <= 1e-4 || diff < 1e-9, || {
                format!("parameter {i}: analytic {a} vs numeric {numeric}")
            })?;
        }
    }
    Ok(worst)
}

fn main() {
    let checks: [(&str, fn() -> Check, Duration); 9] = [
        ("entropy-coding", entropy_coding, Duration::from_secs(10)),
        ("codec-fidelity", codec_fidelity, Duration::from_secs(60)),
        (
            "partial-decode-exactness",
            partial_exactness,
            Duration::from_secs(30),
        ),
        (
            "partial-decode-speed",
            partial_speed,
            Duration::from_secs(120),
        ),
        ("flops-networks", flops_networks, Duration::from_secs(5)),
        ("flops-average", flops_average, Duration::from_secs(1)),
        ("pipeline-counts", pipeline_counts, Duration::from_secs(30)),
        ("dct-flip", flip_exactness, Duration::from_secs(60)),
        ("toy-end-to-end", toy_end_to_end, Duration::from_secs(300)),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check, limit) in checks {
        let t0 = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let dt = t0.elapsed();
        let r = r.and_then(|detail| {
            if dt <= limit {
                Ok(detail)
            } else {
                Err(format!(
                    "{detail}; took {:.1}s, limit {}s",
                    dt.as_secs_f64(),
                    limit.as_secs()
                ))
            }
        });
        match r {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2}s]", dt.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.2}s]", dt.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
