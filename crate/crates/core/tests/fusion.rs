use cdvid::fusion::{pool_channel_means, train_toy, ToyClassifier, TrainConfig};
use cdvid::pipeline::{ExportMeta, StreamKind, TensorRecord};
use cdvid::tensor::Tensor3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two Gaussian blobs whose centres sit far apart relative to their spread.
fn blobs(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let centre: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let y = i % 2;
        let s = if y == 1 { 3.0 } else { -3.0 };
        xs.push(
            centre
                .iter()
                .map(|c| s * c + 10.0 + noise.sample(&mut rng))
                .collect(),
        );
        ys.push(y);
    }
    (xs, ys)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (xs, _) = blobs(12, 5, 3);
    let ys: Vec<usize> = (0..12).map(|i| i % 3).collect();
    let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let h = 1e-6;
    for _ in 0..10 {
        let w: Vec<f64> = (0..15).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let clf = ToyClassifier::from_parts(3, 5, w, b).unwrap();
        let g = clf.loss_and_grad(&refs, &ys);
        let analytic: Vec<f64> = g.weights.iter().chain(&g.bias).copied().collect();
        for (i, &a) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut c = clf.clone();
                if i < 15 {
                    c.weights_mut()[i] += delta;
                } else {
                    c.bias_mut()[i - 15] += delta;
                }
                c.loss_and_grad(&refs, &ys).loss
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(
                rel <= 1e-4 || (a - numeric).abs() < 1e-9,
                "param {i}: {a} vs {numeric}"
            );
        }
    }
}

#[test]
fn separable_blobs_are_learned() {
    let (xs, ys) = blobs(200, 8, 5);
    let cfg = TrainConfig {
        lr: 0.05,
        epochs: 200,
        batch: 16,
        milestones: vec![150],
        seed: 1,
    };
    let (clf, _) = train_toy(&xs, &ys, 2, &cfg).unwrap();
    assert!(clf.accuracy(&xs, &ys).unwrap() >= 0.99);
}

#[test]
fn full_batch_loss_never_increases() {
    let (xs, ys) = blobs(200, 8, 5);
    let cfg = TrainConfig {
        lr: 0.5,
        epochs: 200,
        batch: 200,
        milestones: vec![100],
        seed: 1,
    };
    let (clf, report) = train_toy(&xs, &ys, 2, &cfg).unwrap();
    assert!(clf.accuracy(&xs, &ys).unwrap() >= 0.99);
    for w in report.epoch_losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let (xs, ys) = blobs(20, 3, 6);
    let cfg = TrainConfig {
        lr: 0.0,
        epochs: 5,
        ..TrainConfig::default()
    };
    let (clf, _) = train_toy(&xs, &ys, 2, &cfg).unwrap();
    assert_eq!(clf, ToyClassifier::zeros(2, 3));
}

#[test]
fn training_is_deterministic() {
    let (xs, ys) = blobs(64, 4, 7);
    let cfg = TrainConfig {
        epochs: 20,
        seed: 3,
        ..TrainConfig::default()
    };
    assert_eq!(
        train_toy(&xs, &ys, 2, &cfg).unwrap().0,
        train_toy(&xs, &ys, 2, &cfg).unwrap().0
    );
}

#[test]
fn degenerate_inputs_rejected() {
    let (xs, _) = blobs(10, 3, 8);
    assert!(train_toy(&xs, &[0; 10], 2, &TrainConfig::default()).is_err());
    let mut bad = xs.clone();
    bad[3][1] = f64::NAN;
    let ys: Vec<usize> = (0..10).map(|i| i % 2).collect();
    assert!(train_toy(&bad, &ys, 2, &TrainConfig::default()).is_err());
}

#[test]
fn batch_predict_matches_single() {
    let (xs, ys) = blobs(40, 6, 9);
    let (clf, _) = train_toy(
        &xs,
        &ys,
        2,
        &TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let batch = clf.predict_batch(&xs).unwrap();
    for (x, b) in xs.iter().zip(&batch) {
        assert_eq!(&clf.predict(x).unwrap(), b);
    }
}

#[test]
fn prediction_survives_export_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ts: Vec<Tensor3<f32>> = (0..4)
        .map(|_| Tensor3::from_fn(3, 3, 6, |_, _, _| rng.gen_range(-2.0..2.0)))
        .collect();
    let w: Vec<f32> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let clf = ToyClassifier::from_parts(2, 6, w, vec![0.1, -0.2]).unwrap();
    let rec = TensorRecord::stack(StreamKind::Frequency, 2, &ts, ExportMeta::default()).unwrap();
    let back = TensorRecord::from_bytes(&rec.to_bytes().unwrap())
        .unwrap()
        .unstack()
        .unwrap();
    for (a, b) in ts.iter().zip(&back) {
        assert_eq!(
            clf.predict(&pool_channel_means::<f32>(a)).unwrap(),
            clf.predict(&pool_channel_means::<f32>(b)).unwrap()
        );
    }
}
