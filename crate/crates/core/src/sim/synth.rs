use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::canal::{impulse_response, DEFAULT_TAPS};
use super::population::{mix_seed, SimSubject};
use crate::dsp::{ProbeSignal, Recording};
use crate::error::{Error, Result};
use crate::motion::{HeadPosture, ImuSample};
use crate::phoneme::{categorize_phoneme, DeformationCategory, PhonemeSegment};

/// Articulator cross-fade between consecutive script entries.
pub const TRANSITION_SECONDS: f64 = 0.020;

const VOICE_PEAK: f64 = 0.15;
const VOICE_MAX_HZ: f64 = 4_000.0;
const IMU_RATE: f64 = 100.0;
const GRAVITY: f64 = 9.81;

/// One stretch of a synthesis script. `category: None` is the rest state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEntry {
    pub category: Option<DeformationCategory>,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub n_taps: usize,
    /// When false every entry reproduces the rest geometry (replay attack).
    pub deformation: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            n_taps: DEFAULT_TAPS,
            deformation: true,
        }
    }
}

/// Canal reflection of the continuously repeating probe while the subject
/// articulates `script`, plus white noise at `snr_db` relative to the clean
/// reflection (`f64::INFINITY` for none).
pub fn synthesize_reflection(
    subject: &SimSubject,
    probe: &ProbeSignal,
    script: &[ScriptEntry],
    posture: HeadPosture,
    snr_db: f64,
    seed: u64,
) -> Result<Recording> {
    synthesize_reflection_with(
        subject,
        probe,
        script,
        posture,
        snr_db,
        seed,
        SynthOptions::default(),
    )
}

pub fn synthesize_reflection_with(
    subject: &SimSubject,
    probe: &ProbeSignal,
    script: &[ScriptEntry],
    posture: HeadPosture,
    snr_db: f64,
    seed: u64,
    opts: SynthOptions,
) -> Result<Recording> {
    if let Some(e) = script
        .iter()
        .find(|e| !(e.duration > 0.0 && e.duration.is_finite()))
    {
        return Err(Error::Model(format!(
            "script entry durations must be positive, got {}",
            e.duration
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::Config("snr_db must not be NaN".into()));
    }
    let fs = probe.config.sample_rate;
    let period = probe.period_len();
    let total: f64 = script.iter().map(|e| e.duration).sum();
    let n_periods = ((total * fs as f64) / period as f64).ceil().max(1.0) as usize;
    let len = n_periods * period;

    let states = ArticulationTimeline::new(subject, script, posture, opts.deformation);
    let mut clean = vec![0.0; len + period + opts.n_taps];
    // period -1 accounts for the probe already running before t = 0
    for p in 0..=n_periods {
        let index = p as isize - 1;
        let t_mid = (index as f64 + 0.5) * period as f64 / fs as f64;
        let areas = states.areas_at(t_mid.max(0.0));
        let h = impulse_response(&subject.canal, &areas, fs, opts.n_taps)?;
        let base = p * period;
        for (n, &x) in probe.samples.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (m, &hv) in h.iter().enumerate() {
                clean[base + n + m] += x * hv;
            }
        }
    }
    let mut samples: Vec<f64> = clean[period..period + len].to_vec();

    if snr_db.is_finite() {
        let rms = crate::dsp::spectrum::rms(&samples);
        let sigma = rms * 10f64.powf(-snr_db / 20.0);
        if sigma > 0.0 {
            let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in samples.iter_mut() {
                *s += noise.sample(&mut rng);
            }
        }
    }
    Ok(Recording::mixed(fs, samples))
}

/// Area state of the canal over time, with linear cross-fades at entry
/// boundaries.
struct ArticulationTimeline {
    starts: Vec<f64>,
    states: Vec<Vec<f64>>,
    rest: Vec<f64>,
}

impl ArticulationTimeline {
    fn new(
        subject: &SimSubject,
        script: &[ScriptEntry],
        posture: HeadPosture,
        deform: bool,
    ) -> Self {
        let rest = subject.areas(None, posture);
        let mut starts = Vec::with_capacity(script.len() + 1);
        let mut states = Vec::with_capacity(script.len() + 1);
        let mut t = 0.0;
        for e in script {
            starts.push(t);
            let cat = if deform { e.category } else { None };
            states.push(subject.areas(cat, posture));
            t += e.duration;
        }
        // everything after the script returns to rest
        starts.push(t);
        states.push(rest.clone());
        Self {
            starts,
            states,
            rest,
        }
    }

    fn areas_at(&self, t: f64) -> Vec<f64> {
        let idx = match self.starts.iter().rposition(|&s| s <= t) {
            Some(i) => i,
            None => return self.rest.clone(),
        };
        let current = &self.states[idx];
        let previous = if idx == 0 {
            &self.rest
        } else {
            &self.states[idx - 1]
        };
        let w = ((t - self.starts[idx]) / TRANSITION_SECONDS).clamp(0.0, 1.0);
        previous
            .iter()
            .zip(current)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }
}

/// A phoneme or pause within a synthesized utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceItem {
    /// Annotated label; `None` for an unannotated pause.
    pub label: Option<String>,
    pub duration: f64,
}

impl UtteranceItem {
    pub fn phoneme(label: &str, duration: f64) -> Self {
        Self {
            label: Some(label.to_string()),
            duration,
        }
    }

    pub fn pause(duration: f64) -> Self {
        Self {
            label: None,
            duration,
        }
    }
}

/// Pause, then one random phoneme from each category, separated by short
/// pauses. With `excluded_filler` a non-deforming phoneme may be inserted
/// between items.
pub fn plan_utterance(
    categories: &[DeformationCategory],
    excluded_filler: bool,
    seed: u64,
) -> Vec<UtteranceItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = vec![UtteranceItem::pause(rng.random_range(0.15..0.18))];
    for &c in categories {
        let labels = c.phonemes();
        let label = labels[rng.random_range(0..labels.len())];
        items.push(UtteranceItem::phoneme(label, rng.random_range(0.14..0.20)));
        if excluded_filler && rng.random_bool(0.3) {
            items.push(UtteranceItem::pause(0.03));
            items.push(UtteranceItem::phoneme("[p]", 0.06));
        }
        items.push(UtteranceItem::pause(0.03));
    }
    items.push(UtteranceItem::pause(0.05));
    items
}

/// Everything a capture session produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSession {
    pub recording: Recording,
    pub annotations: Vec<PhonemeSegment>,
    pub imu: Vec<ImuSample>,
    pub posture: HeadPosture,
}

/// Microphone capture (reflection + voice + noise), phoneme annotations and
/// IMU trace for one utterance.
pub fn simulate_session(
    subject: &SimSubject,
    probe: &ProbeSignal,
    utterance: &[UtteranceItem],
    posture: HeadPosture,
    snr_db: f64,
    seed: u64,
    opts: SynthOptions,
) -> Result<SimSession> {
    let script: Vec<ScriptEntry> = utterance
        .iter()
        .map(|u| ScriptEntry {
            category: u.label.as_deref().and_then(categorize_phoneme),
            duration: u.duration,
        })
        .collect();
    let mut recording =
        synthesize_reflection_with(subject, probe, &script, posture, snr_db, seed, opts)?;

    let mut annotations = Vec::new();
    let mut t = 0.0;
    for u in utterance {
        if let Some(label) = &u.label {
            annotations.push(PhonemeSegment::new(label.clone(), t, t + u.duration)?);
        }
        t += u.duration;
    }
    add_voice(
        &mut recording,
        subject.voice_f0,
        &annotations,
        mix_seed(seed ^ 0x5EED_0001),
    );
    let imu = imu_trace(posture, recording.duration(), mix_seed(seed ^ 0x5EED_0002));
    Ok(SimSession {
        recording,
        annotations,
        imu,
        posture,
    })
}

/// Harmonic voice below `VOICE_MAX_HZ` during every annotated segment.
fn add_voice(rec: &mut Recording, f0: f64, segments: &[PhonemeSegment], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = rec.sample_rate as f64;
    for seg in segments {
        let pitch = f0 * rng.random_range(0.95..1.05);
        let harmonics = (VOICE_MAX_HZ / pitch).floor() as usize;
        let weights: Vec<f64> = (1..=harmonics)
            .map(|h| rng.random_range(0.3..1.0) / h as f64)
            .collect();
        let norm: f64 = weights.iter().sum();
        let a = (seg.start * fs).round() as usize;
        let b = ((seg.end * fs).round() as usize).min(rec.samples.len());
        if b <= a + 1 {
            continue;
        }
        let n = (b - a) as f64;
        for i in a..b {
            let t = (i - a) as f64 / fs;
            let env = (PI * (i - a) as f64 / n).sin().powi(2);
            let v: f64 = weights
                .iter()
                .enumerate()
                .map(|(h, w)| w * (2.0 * PI * pitch * (h + 1) as f64 * t).sin())
                .sum();
            rec.samples[i] += VOICE_PEAK * env * v / norm;
        }
    }
}

/// Head held at `posture`: pitch postures tilt gravity by 40°, yaw postures
/// turn by 45° during the first 0.3 s of the window.
pub fn imu_trace(posture: HeadPosture, duration: f64, seed: u64) -> Vec<ImuSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accel_noise = Normal::new(0.0, 0.05).expect("valid std");
    let gyro_noise = Normal::new(0.0, 0.01).expect("valid std");
    let n = (duration * IMU_RATE).floor() as usize + 1;
    let pitch = match posture {
        HeadPosture::Up => 40f64.to_radians(),
        HeadPosture::Down => -40f64.to_radians(),
        _ => 0.0,
    };
    let turn_seconds = 0.3;
    let yaw_rate = match posture {
        HeadPosture::Left => 45f64.to_radians() / turn_seconds,
        HeadPosture::Right => -45f64.to_radians() / turn_seconds,
        _ => 0.0,
    };
    (0..n)
        .map(|i| {
            let t = i as f64 / IMU_RATE;
            let wz = if t < turn_seconds { yaw_rate } else { 0.0 };
            ImuSample {
                t,
                accel: [
                    GRAVITY * pitch.sin() + accel_noise.sample(&mut rng),
                    accel_noise.sample(&mut rng),
                    GRAVITY * pitch.cos() + accel_noise.sample(&mut rng),
                ],
                gyro: [
                    gyro_noise.sample(&mut rng),
                    gyro_noise.sample(&mut rng),
                    wz + gyro_noise.sample(&mut rng),
                ],
            }
        })
        .collect()
}
