use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the inaudible linear chirp emitted into the ear canal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub f_start: f64,
    pub f_end: f64,
    /// Seconds of active sweep.
    pub chirp_duration: f64,
    /// Seconds of silence appended after every sweep.
    pub guard_gap: f64,
    pub sample_rate: u32,
    pub amplitude: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            f_start: 16_000.0,
            f_end: 23_000.0,
            chirp_duration: 0.010,
            guard_gap: 0.002,
            sample_rate: 48_000,
            amplitude: 0.5,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        let finite = [
            self.f_start,
            self.f_end,
            self.chirp_duration,
            self.guard_gap,
            self.amplitude,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("probe parameters must be finite".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        if self.f_start <= 0.0 {
            return Err(Error::Config(format!(
                "f_start must be > 0 Hz (got {})",
                self.f_start
            )));
        }
        if self.f_end <= self.f_start {
            return Err(Error::Config(format!(
                "f_end ({}) must exceed f_start ({})",
                self.f_end, self.f_start
            )));
        }
        if self.f_end >= nyquist {
            return Err(Error::Config(format!(
                "f_end ({}) must be below sample_rate / 2 ({})",
                self.f_end, nyquist
            )));
        }
        if self.chirp_duration <= 0.0 {
            return Err(Error::Config(format!(
                "chirp_duration must be > 0 s (got {})",
                self.chirp_duration
            )));
        }
        if self.guard_gap < 0.0 {
            return Err(Error::Config(format!(
                "guard_gap must be >= 0 s (got {})",
                self.guard_gap
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::Config(format!(
                "amplitude must lie in (0, 1] (got {})",
                self.amplitude
            )));
        }
        if self.chirp_len() == 0 {
            return Err(Error::Config(
                "chirp_duration shorter than one sample".into(),
            ));
        }
        Ok(())
    }

    /// Samples in one chirp period (sweep plus guard gap).
    pub fn period_len(&self) -> usize {
        ((self.chirp_duration + self.guard_gap) * self.sample_rate as f64).round() as usize
    }

    pub fn chirp_len(&self) -> usize {
        (self.chirp_duration * self.sample_rate as f64).round() as usize
    }

    /// Frequency spacing of a one-period DFT.
    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.period_len() as f64
    }

    /// Instantaneous frequency of the sweep at time `t` seconds into a period.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f_start + (self.f_end - self.f_start) * t / self.chirp_duration
    }
}

/// One period of the probe waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSignal {
    pub config: ProbeConfig,
    pub samples: Vec<f64>,
}

impl ProbeSignal {
    pub fn period_len(&self) -> usize {
        self.samples.len()
    }

    /// The probe repeated back to back to cover at least `len` samples,
    /// truncated to exactly `len`.
    pub fn repeated(&self, len: usize) -> Vec<f64> {
        self.samples.iter().copied().cycle().take(len).collect()
    }
}

/// Linear sweep from `f_start` to `f_end` starting at zero phase, followed by
/// `guard_gap` of silence.
pub fn synthesize_probe(config: ProbeConfig) -> Result<ProbeSignal> {
    config.validate()?;
    let fs = config.sample_rate as f64;
    let period = config.period_len();
    let chirp_len = config.chirp_len().min(period);
    let sweep_rate = (config.f_end - config.f_start) / config.chirp_duration;

    let mut samples = vec![0.0; period];
    for (n, s) in samples.iter_mut().take(chirp_len).enumerate() {
        let t = n as f64 / fs;
        let phase = 2.0 * PI * (config.f_start * t + 0.5 * sweep_rate * t * t);
        *s = (config.amplitude * phase.sin()).clamp(-config.amplitude, config.amplitude);
    }
    Ok(ProbeSignal { config, samples })
}
