use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use eardynamic::channel::{
    similarity, to_feature, ChannelEstimator, ChannelResponse, FeatureVector,
    DEFAULT_REGULARIZATION,
};
use eardynamic::dsp::spectrum::{direct_convolve, rms};
use eardynamic::dsp::{synthesize_probe, ProbeConfig};

const BAND: (f64, f64) = (16_000.0, 23_000.0);

fn response(values: Vec<Complex64>) -> ChannelResponse {
    ChannelResponse {
        band: BAND,
        bin_hz: 7_000.0 / (values.len() - 1) as f64,
        first_bin: 192,
        values,
    }
}

fn raw_feature() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 8..64).prop_filter("needs variance", |v| {
        v.iter().any(|x| (x - v[0]).abs() > 1e-3)
    })
}

fn complex_response(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((1e-3f64..10.0, -3.2f64..3.2), n).prop_map(|v| {
        v.into_iter()
            .map(|(m, p)| Complex64::from_polar(m, p))
            .collect()
    })
}

#[test]
fn two_bin_feature_example() {
    let f = to_feature(&response(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(10.0, 0.0),
    ]))
    .unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((f.values[0] + h).abs() < 1e-12 && (f.values[1] - h).abs() < 1e-12);
}

fn dft_magnitude(h: &[f64], k: usize, n: usize) -> f64 {
    h.iter()
        .enumerate()
        .map(|(t, v)| {
            Complex64::from_polar(*v, -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64)
        })
        .sum::<Complex64>()
        .norm()
}

/// Median relative error of |H| over 100 noisy trials at 20 dB SNR.
#[test]
fn estimate_tolerates_20_db_noise() {
    let probe = synthesize_probe(ProbeConfig::default()).unwrap();
    let n = probe.period_len();
    let est = ChannelEstimator::new(&probe, DEFAULT_REGULARIZATION).unwrap();
    let periodic: Vec<f64> = (0..3).flat_map(|_| probe.samples.iter().copied()).collect();
    let mut errors = Vec::new();
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let h: Vec<f64> = (0..32)
            .map(|t| rng.random_range(-1.0..1.0) * (-(t as f64) / 8.0).exp())
            .collect();
        let clean = direct_convolve(&periodic, &h);
        let noise = Normal::new(0.0, rms(&clean[n..2 * n]) / 10.0).unwrap();
        let frame: Vec<f64> = clean[n..2 * n]
            .iter()
            .map(|v| v + noise.sample(&mut rng))
            .collect();
        let got = est.estimate(&frame).unwrap();
        let (mut err, mut norm) = (0.0, 0.0);
        for (i, g) in got.values.iter().enumerate() {
            let truth = dft_magnitude(&h, got.first_bin + i, n);
            err += (g.norm() - truth).powi(2);
            norm += truth * truth;
        }
        errors.push((err / norm).sqrt());
    }
    errors.sort_by(f64::total_cmp);
    let median = errors[errors.len() / 2];
    assert!(median <= 0.1, "median relative |H| error {median}");
}

proptest! {
    #[test]
    fn similarity_is_symmetric_and_bounded((a, b) in (8usize..64).prop_flat_map(|n| {
        let v = prop::collection::vec(-5.0f64..5.0, n);
        (v.clone(), v)
    })) {
        let (Ok(fa), Ok(fb)) = (FeatureVector::from_raw(a, BAND, 83.3), FeatureVector::from_raw(b, BAND, 83.3)) else {
            return Ok(());
        };
        let ab = similarity(&fa, &fb).unwrap();
        let ba = similarity(&fb, &fa).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab.abs() <= 1.0);
        prop_assert!((similarity(&fa, &fa).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((similarity(&fa, &fa.negated()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn features_are_normalized(raw in raw_feature()) {
        let f = FeatureVector::from_raw(raw, BAND, 83.3).unwrap();
        let mean = f.values.iter().sum::<f64>() / f.len() as f64;
        let norm = f.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(mean.abs() <= 1e-9 && (norm - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn feature_ignores_positive_scale(
        (h1, h2) in (8usize..48).prop_flat_map(|n| (complex_response(n), complex_response(n))),
        alpha in 1e-3f64..1e3,
    ) {
        let (h1, h2) = (response(h1), response(h2));
        let f = to_feature(&h1).unwrap();
        let g = to_feature(&h1.scaled(alpha)).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let other = to_feature(&h2).unwrap();
        let s1 = similarity(&g, &other).unwrap();
        let s0 = similarity(&f, &other).unwrap();
        prop_assert!((s1 - s0).abs() <= 1e-9);
    }

    #[test]
    fn estimate_is_linear_in_the_frame(
        seed in any::<u64>(),
        alpha in -10.0f64..10.0,
    ) {
        let probe = synthesize_probe(ProbeConfig::default()).unwrap();
        let est = ChannelEstimator::new(&probe, DEFAULT_REGULARIZATION).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame: Vec<f64> = (0..probe.period_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = frame.iter().map(|v| alpha * v).collect();
        let h = est.estimate(&frame).unwrap();
        let hs = est.estimate(&scaled).unwrap();
        let peak = h.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in h.values.iter().zip(&hs.values) {
            prop_assert!((a * alpha - b).norm() <= 1e-9 * peak * (1.0 + alpha.abs()));
        }
    }
}
