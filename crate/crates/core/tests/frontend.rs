use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speakerid_core::frontend::{
    extract_features, frame_signal, load_wav, power_spectrum, write_wav, FeatureExtractor, FrontendConfig, SampleBuffer,
};
use speakerid_core::Error;

/// Direct O(N²) power spectrum, bins 0..=N/2.
fn dft_power(x: &[f64], n: usize) -> Vec<f64> {
    (0..n / 2 + 1)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// Straight-line feature pipeline written from the definitions: Hamming
/// window, direct DFT, triangular mel filters between mel-spaced edges, and a
/// floored natural log.
fn oracle_features(frame: &[i16], sr: f64, n_filters: usize) -> Vec<f64> {
    let n = frame.len();
    let windowed: Vec<f64> = frame
        .iter()
        .enumerate()
        .map(|(t, &s)| s as f64 * (0.54 - 0.46 * (2.0 * PI * t as f64 / (n - 1) as f64).cos()))
        .collect();
    let power = dft_power(&windowed, n);
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let top = mel(sr / 2.0);
    let edge = |k: usize| hz(top * k as f64 / (n_filters + 1) as f64);
    (0..n_filters)
        .map(|j| {
            let (l, c, r) = (edge(j), edge(j + 1), edge(j + 2));
            let e: f64 = power
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let f = i as f64 * sr / n as f64;
                    let w = if f > l && f <= c {
                        (f - l) / (c - l)
                    } else if f > c && f < r {
                        (r - f) / (r - c)
                    } else {
                        0.0
                    };
                    w * p
                })
                .sum();
            e.max(1e-10).ln()
        })
        .collect()
}

fn noise(seed: u64, len: usize, amp: i16) -> Vec<i16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-amp..=amp)).collect()
}

#[test]
fn pipeline_matches_straight_line_oracle() {
    let cfg = FrontendConfig::default();
    let samples = noise(3, 16000, 3000);
    let buf = SampleBuffer::new(samples.clone(), 16000);
    let feats = extract_features(&buf, &cfg).unwrap();
    assert_eq!(feats.len(), 97);
    assert_eq!(feats.dim(), 24);
    for k in [0usize, 1, 48, 96] {
        let frame = &samples[k * 160..k * 160 + 504];
        let want = oracle_features(frame, 16000.0, 24);
        for (got, want) in feats.frame(k).iter().zip(&want) {
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "frame {k}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn power_spectrum_matches_direct_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let x: Vec<f64> = (0..504).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = power_spectrum(&x, 504);
        let slow = dft_power(&x, 504);
        let scale = slow.iter().cloned().fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn zero_signal_hits_the_floor() {
    let buf = SampleBuffer::new(vec![0; 16000], 16000);
    let feats = extract_features(&buf, &FrontendConfig::default()).unwrap();
    assert_eq!(feats.len(), 97);
    assert!(feats.as_flat().iter().all(|&v| v == 1e-10f64.ln()));
}

#[test]
fn tone_peaks_in_the_matching_band() {
    let cfg = FrontendConfig::default();
    let ex = FeatureExtractor::new(cfg).unwrap();
    let tone: Vec<i16> = (0..4000)
        .map(|t| (8000.0 * (2.0 * PI * 1000.0 * t as f64 / 16000.0).sin()) as i16)
        .collect();
    let feats = ex.extract(&SampleBuffer::new(tone, 16000)).unwrap();
    let centers = ex.filterbank().centers_hz();
    let nearest = (0..centers.len())
        .min_by(|&a, &b| (centers[a] - 1000.0).abs().total_cmp(&(centers[b] - 1000.0).abs()))
        .unwrap();
    for f in feats.frames() {
        let best = (0..f.len()).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
        assert!(
            best.abs_diff(nearest) <= 1,
            "peak in band {best}, expected near {nearest}"
        );
    }
}

#[test]
fn wav_round_trip_preserves_features() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.wav");
    let buf = SampleBuffer::new(noise(4, 8000, 20000), 16000);
    write_wav(&path, &buf).unwrap();
    let back = load_wav(&path).unwrap();
    assert_eq!(back, buf);
    let cfg = FrontendConfig::default();
    assert_eq!(
        extract_features(&back, &cfg).unwrap(),
        extract_features(&buf, &cfg).unwrap()
    );
}

#[test]
fn rejects_short_and_mismatched_input() {
    let cfg = FrontendConfig::default();
    let short = SampleBuffer::new(vec![1; 503], 16000);
    assert!(matches!(extract_features(&short, &cfg), Err(Error::EmptyInput { .. })));
    let other_rate = SampleBuffer::new(vec![1; 8000], 8000);
    assert!(matches!(extract_features(&other_rate, &cfg), Err(Error::Config(_))));
}

proptest! {
    #[test]
    fn frame_count_formula(len in 504usize..20000, hop in 1usize..400) {
        let cfg = FrontendConfig { hop, ..Default::default() };
        let buf = SampleBuffer::new(vec![0; len], 16000);
        let frames = frame_signal(&buf, &cfg).unwrap();
        prop_assert_eq!(frames.len(), (len - 504) / hop + 1);
    }

    #[test]
    fn parseval_holds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..504).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = power_spectrum(&x, 504);
        // Interior bins appear twice in the full spectrum; DC and Nyquist once.
        let full = p[0] + p[252] + 2.0 * p[1..252].iter().sum::<f64>();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((full / 504.0 - energy).abs() <= 1e-9 * energy);
    }

    #[test]
    fn features_are_finite_and_floored(seed in any::<u64>(), amp in 0i16..32767) {
        let buf = SampleBuffer::new(noise(seed, 2000, amp), 16000);
        let feats = extract_features(&buf, &FrontendConfig::default()).unwrap();
        prop_assert!(feats.as_flat().iter().all(|v| v.is_finite() && *v >= 1e-10f64.ln()));
    }
}
