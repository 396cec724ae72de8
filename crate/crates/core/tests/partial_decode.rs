use cdvid::codec::{
    encode_video, encode_video_traced, CodedFrame, EncoderConfig, FrameKind, MotionVector, RawVideo,
};
use cdvid::partial_decode::{extract_all, extract_frame, parse_headers, Extractor, Want};
use cdvid::probe;
use cdvid::synth::{synth_noise, synth_static, synth_translate, SynthSpec};
use cdvid::tensor::CoeffTensor;

/// Golden coefficient tensor assembled straight from the encoder's blocks.
fn golden_tensor(f: &CodedFrame) -> CoeffTensor<i32> {
    let mut t = CoeffTensor::zeros(f.mb_rows * 2, f.mb_cols * 2, 64);
    for (i, mb) in f.macroblocks.iter().enumerate() {
        let (mx, my) = (i % f.mb_cols, i / f.mb_cols);
        for by in 0..2 {
            for bx in 0..2 {
                let (gy, gx) = (2 * my + by, 2 * mx + bx);
                t.block_mut(gy, gx, 0)
                    .copy_from_slice(&mb.blocks[by * 2 + bx]);
                t.block_mut(gy, gx, 1).copy_from_slice(&mb.blocks[4]);
                t.block_mut(gy, gx, 2).copy_from_slice(&mb.blocks[5]);
            }
        }
    }
    t
}

fn fixtures() -> Vec<(RawVideo, EncoderConfig)> {
    vec![
        (
            synth_static(&SynthSpec::new(64, 48, 7, 1)).unwrap(),
            EncoderConfig::new(3, 4, 8),
        ),
        (
            synth_translate(&SynthSpec::new(96, 64, 9, 2), 3).unwrap(),
            EncoderConfig::new(4, 1, 8),
        ),
        (
            synth_translate(&SynthSpec::new(64, 64, 9, 3), -5).unwrap(),
            EncoderConfig::new(12, 6, 4),
        ),
        (
            synth_noise(&SynthSpec::new(48, 32, 5, 4)).unwrap(),
            EncoderConfig::new(2, 2, 8),
        ),
    ]
}

#[test]
fn extraction_matches_encoder_bit_exactly_without_pixel_work() {
    for (v, cfg) in fixtures() {
        let (s, golden) = encode_video_traced(&v, &cfg).unwrap();
        let before = probe::snapshot();
        let feats = extract_all(s.as_bytes(), Want::ALL).unwrap();
        let ops = probe::snapshot().since(before);
        assert!(ops.is_zero(), "{ops:?}");
        assert_eq!(feats.len(), golden.len());
        for (f, g) in feats.iter().zip(&golden) {
            assert_eq!(f.frame_no, g.frame_no);
            assert_eq!(f.kind, g.kind);
            match g.kind {
                FrameKind::I => {
                    assert_eq!(f.dct.as_ref().unwrap(), &golden_tensor(g));
                    assert!(f.mv_field.is_none());
                }
                _ => {
                    assert_eq!(f.mv_field, g.mv_field());
                    assert!(f.dct.is_none());
                    assert!(f.residuals.is_none());
                }
            }
        }
    }
}

#[test]
fn kept_residuals_match_encoder() {
    let (v, cfg) = fixtures().swap_remove(1);
    let (s, golden) = encode_video_traced(&v, &cfg).unwrap();
    let ex = Extractor::new(s.as_bytes()).unwrap().keep_residuals(true);
    for g in golden.iter().filter(|g| g.kind == FrameKind::P) {
        let f = ex.extract_frame(g.frame_no).unwrap();
        let r = f.residuals.unwrap();
        for (mb, blocks) in g.macroblocks.iter().zip(&r) {
            assert_eq!(&mb.blocks, blocks);
        }
    }
}

#[test]
fn frame_types_follow_gop() {
    let v = synth_static(&SynthSpec::new(32, 32, 24, 5)).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(8, 4, 4)).unwrap();
    let info = parse_headers(s.as_bytes()).unwrap();
    let kinds: Vec<FrameKind> = info.frames.iter().map(|f| f.header.kind).collect();
    let expected: Vec<FrameKind> = (0..24)
        .map(|i| {
            if i % 8 == 0 {
                FrameKind::I
            } else {
                FrameKind::P
            }
        })
        .collect();
    assert_eq!(kinds, expected);
    assert!(info.frames.windows(2).all(|w| w[0].offset < w[1].offset));
    assert_eq!(
        (
            info.width(),
            info.height(),
            info.header.fps,
            info.header.gop_size
        ),
        (32, 32, 25, 8)
    );
}

#[test]
fn header_parse_touches_under_five_percent() {
    let v = synth_translate(&SynthSpec::new(64, 48, 300, 6), 1).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(12, 4, 4)).unwrap();
    let info = parse_headers(s.as_bytes()).unwrap();
    assert_eq!(info.frames.len(), 300);
    let frac = info.header_bytes_read as f64 / s.len() as f64;
    assert!(frac < 0.05, "{frac}");
}

#[test]
fn constant_luma_gives_dc_only_y_blocks() {
    let mut v = synth_static(&SynthSpec::new(32, 32, 1, 7)).unwrap();
    for f in &mut v.frames {
        f.y.data.fill(200);
    }
    let s = encode_video(&v, &EncoderConfig::new(1, 2, 4)).unwrap();
    let t = extract_frame(s.as_bytes(), 0).unwrap().dct.unwrap();
    for by in 0..t.h_blocks() {
        for bx in 0..t.w_blocks() {
            let b = t.block(by, bx, 0);
            assert_ne!(b[0], 0);
            assert!(b[1..].iter().all(|&c| c == 0));
        }
    }
}

#[test]
fn translation_gives_uniform_negated_field() {
    let v = synth_translate(&SynthSpec::new(96, 64, 3, 8), 4).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(12, 3, 8)).unwrap();
    let f = extract_frame(s.as_bytes(), 2).unwrap();
    let field = f.mv_field.unwrap();
    for mb_y in 0..field.mb_rows {
        for mb_x in 1..field.mb_cols {
            assert_eq!(field.get(mb_x, mb_y), MotionVector::new(-4, 0));
        }
    }
    assert_eq!(f.kind, FrameKind::P);
}

#[test]
fn want_filters_and_skips_payloads() {
    let v = synth_translate(&SynthSpec::new(32, 32, 120, 9), 1).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(12, 4, 4)).unwrap();
    let i_only = extract_all(s.as_bytes(), Want::I_DCT).unwrap();
    assert_eq!(i_only.len(), 10);
    assert!(i_only.iter().all(|f| f.kind == FrameKind::I));

    let partial = Extractor::new(s.as_bytes()).unwrap();
    partial
        .extract_all(Want::I_DCT)
        .for_each(|r| drop(r.unwrap()));
    let full = Extractor::new(s.as_bytes()).unwrap();
    full.extract_all(Want::ALL).for_each(|r| drop(r.unwrap()));
    assert!(partial.bytes_read() < full.bytes_read());

    let all_i = encode_video(&v, &EncoderConfig::new(1, 4, 4)).unwrap();
    assert!(extract_all(all_i.as_bytes(), Want::P_MV)
        .unwrap()
        .is_empty());
}

#[test]
fn i_frame_has_no_motion_field() {
    let v = synth_static(&SynthSpec::new(32, 32, 2, 10)).unwrap();
    let s = encode_video(&v, &EncoderConfig::new(12, 4, 4)).unwrap();
    let f = extract_frame(s.as_bytes(), 0).unwrap();
    assert!(f.mv_field.is_none() && f.intra_mask().is_none());
    assert!(extract_frame(s.as_bytes(), 7).is_err());
}

#[test]
fn repeated_extraction_is_identical() {
    let (v, cfg) = fixtures().swap_remove(2);
    let s = encode_video(&v, &cfg).unwrap();
    assert_eq!(
        extract_all(s.as_bytes(), Want::ALL).unwrap(),
        extract_all(s.as_bytes(), Want::ALL).unwrap()
    );
}

#[test]
fn truncated_frame_is_reported() {
    let v = synth_translate(&SynthSpec::new(32, 32, 4, 11), 1).unwrap();
    let s = encode_video(&v, &EncoderConfig::default()).unwrap();
    let b = &s.as_bytes()[..s.len() - 3];
    let e = parse_headers(b).unwrap_err();
    assert_eq!(e.frame_no(), Some(3));
}
