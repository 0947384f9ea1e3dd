use std::f64::consts::PI;

use proptest::prelude::*;

use eardynamic::dsp::spectrum::hann;
use eardynamic::dsp::wav::{from_pcm16, read_wav, to_pcm16, write_wav};
use eardynamic::dsp::{
    frame_chirp_periods, split_bands, synthesize_probe, BandSplitConfig, BandSplitter, ChannelRole,
    ProbeConfig, Recording,
};

/// |Σ x[t] e^{-2πi f t / fs}| evaluated directly at an arbitrary frequency.
fn dtft_magnitude(x: &[f64], f: f64, fs: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in x.iter().enumerate() {
        let phase = -2.0 * PI * f * t as f64 / fs;
        re += v * phase.cos();
        im += v * phase.sin();
    }
    re.hypot(im)
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

#[test]
fn probe_is_bit_identical_across_calls() {
    let cfg = ProbeConfig::default();
    let a = synthesize_probe(cfg).unwrap();
    let b = synthesize_probe(cfg).unwrap();
    assert_eq!(
        a.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(a.samples.len(), 576);
    assert_eq!(a.samples[0], 0.0);
}

#[test]
fn probe_covers_its_band() {
    let p = synthesize_probe(ProbeConfig::default()).unwrap();
    let chirp = &p.samples[..p.config.chirp_len()];
    let fs = p.config.sample_rate as f64;
    let grid: Vec<f64> = (1..14).map(|i| 16_000.0 + 500.0 * i as f64).collect();
    let mags: Vec<f64> = grid.iter().map(|&f| dtft_magnitude(chirp, f, fs)).collect();
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    for (f, m) in grid.iter().zip(&mags) {
        let dev = db(m / median);
        assert!(dev.abs() <= 6.0, "{f} Hz is {dev:.2} dB from the median");
    }
}

#[test]
fn probe_energy_stays_in_band() {
    let p = synthesize_probe(ProbeConfig::default()).unwrap();
    let chirp = &p.samples[..p.config.chirp_len()];
    let w = hann(chirp.len());
    let windowed: Vec<f64> = chirp.iter().zip(&w).map(|(a, b)| a * b).collect();
    let fs = p.config.sample_rate as f64;
    let spectrum = |lo: f64, hi: f64| -> Vec<f64> {
        let mut f = lo;
        let mut out = Vec::new();
        while f <= hi {
            out.push(dtft_magnitude(&windowed, f, fs));
            f += 50.0;
        }
        out
    };
    let peak = spectrum(16_000.0, 23_000.0).into_iter().fold(0.0, f64::max);
    let below = spectrum(0.0, 15_500.0).into_iter().fold(0.0, f64::max);
    let above = spectrum(23_500.0, 24_000.0).into_iter().fold(0.0, f64::max);
    assert!(
        db(below / peak) <= -30.0,
        "below band {:.1} dB",
        db(below / peak)
    );
    assert!(
        db(above / peak) <= -30.0,
        "above band {:.1} dB",
        db(above / peak)
    );
}

#[test]
fn all_zero_input_splits_to_zero() {
    let (hi, lo) = split_bands(
        &Recording::mixed(48_000, vec![0.0; 4096]),
        BandSplitConfig::default(),
    )
    .unwrap();
    assert!(hi.samples.iter().chain(&lo.samples).all(|v| *v == 0.0));
    assert_eq!(hi.channel_role, ChannelRole::InaudibleOnly);
    assert_eq!(lo.channel_role, ChannelRole::AudibleOnly);
}

#[test]
fn framing_examples() {
    let probe = synthesize_probe(ProbeConfig {
        guard_gap: 0.0,
        ..ProbeConfig::default()
    })
    .unwrap();
    let rec = |n| Recording::new(48_000, vec![0.1; n], ChannelRole::InaudibleOnly);
    let r = rec(4800);
    let frames = frame_chirp_periods(&r, &probe).unwrap();
    assert_eq!(
        frames.iter().map(|f| f.start).collect::<Vec<_>>(),
        (0..10).map(|i| i * 480).collect::<Vec<_>>()
    );
    let r = rec(500);
    assert_eq!(frame_chirp_periods(&r, &probe).unwrap().len(), 1);
    assert!(frame_chirp_periods(&rec(479), &probe).is_err());
}

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn band_split_is_linear(
        (x, y) in (200usize..900).prop_flat_map(|n| (signal(n..n + 1), signal(n..n + 1))),
        a in -4.0f64..4.0,
        b in -4.0f64..4.0,
    ) {
        let splitter = BandSplitter::new(BandSplitConfig::default(), 48_000).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (hm, lm) = splitter.split(&Recording::mixed(48_000, mix)).unwrap();
        let (hx, lx) = splitter.split(&Recording::mixed(48_000, x)).unwrap();
        let (hy, ly) = splitter.split(&Recording::mixed(48_000, y)).unwrap();
        let scale = 1.0 + a.abs() + b.abs();
        for i in 0..hm.samples.len() {
            prop_assert!((hm.samples[i] - (a * hx.samples[i] + b * hy.samples[i])).abs() <= 1e-9 * scale);
            prop_assert!((lm.samples[i] - (a * lx.samples[i] + b * ly.samples[i])).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn band_split_reconstructs_input(x in signal(64..2000)) {
        let (hi, lo) = split_bands(&Recording::mixed(48_000, x.clone()), BandSplitConfig::default()).unwrap();
        prop_assert_eq!(hi.samples.len(), x.len());
        for i in 0..x.len() {
            prop_assert!((hi.samples[i] + lo.samples[i] - x[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn framing_tiles_without_overlap(n in 0usize..5000) {
        let probe = synthesize_probe(ProbeConfig::default()).unwrap();
        let period = probe.period_len();
        let rec = Recording::new(48_000, vec![0.0; n], ChannelRole::InaudibleOnly);
        match frame_chirp_periods(&rec, &probe) {
            Ok(frames) => {
                prop_assert_eq!(frames.len(), n / period);
                for (i, f) in frames.iter().enumerate() {
                    prop_assert_eq!(f.start, i * period);
                    prop_assert_eq!(f.samples.len(), period);
                }
            }
            Err(_) => prop_assert!(n < period),
        }
    }

    #[test]
    fn wav_round_trip_is_pcm_quantization(x in prop::collection::vec(-1.5f64..1.5, 1..400)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav(&path, &Recording::mixed(44_100, x.clone())).unwrap();
        let back = read_wav(&path).unwrap();
        prop_assert_eq!(back.sample_rate, 44_100);
        let want: Vec<f64> = x.iter().map(|&v| from_pcm16(to_pcm16(v))).collect();
        prop_assert_eq!(back.samples, want);
    }
}
