use std::f64::consts::PI;

use super::spectrum::fft_convolve;
use super::{ChannelRole, Recording};
use crate::error::{Error, Result};

/// Speech/probe separation filter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSplitConfig {
    pub cutoff: f64,
    /// Minimum stopband attenuation of the high-pass branch, in dB.
    pub stopband_attenuation: f64,
    pub transition_width: f64,
}

impl Default for BandSplitConfig {
    fn default() -> Self {
        Self {
            cutoff: 15_000.0,
            stopband_attenuation: 60.0,
            transition_width: 1_000.0,
        }
    }
}

impl BandSplitConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.cutoff.is_finite() && self.transition_width.is_finite()) {
            return Err(Error::Config("band split parameters must be finite".into()));
        }
        if self.transition_width <= 0.0 {
            return Err(Error::Config("transition_width must be > 0 Hz".into()));
        }
        if !(self.stopband_attenuation > 0.0) {
            return Err(Error::Config("stopband_attenuation must be > 0 dB".into()));
        }
        if self.cutoff - self.transition_width / 2.0 <= 0.0 {
            return Err(Error::Config(format!(
                "cutoff {} Hz leaves no stopband below the transition band",
                self.cutoff
            )));
        }
        if self.cutoff + self.transition_width / 2.0 >= nyquist {
            return Err(Error::Config(format!(
                "cutoff {} Hz (+ half transition) must be below sample_rate / 2 = {} Hz",
                self.cutoff, nyquist
            )));
        }
        Ok(())
    }
}

/// Linear-phase Kaiser-window high-pass FIR plus its complementary low-pass.
#[derive(Debug, Clone)]
pub struct BandSplitter {
    sample_rate: u32,
    taps: Vec<f64>,
}

impl BandSplitter {
    pub fn new(cfg: BandSplitConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let fs = sample_rate as f64;
        let atten = cfg.stopband_attenuation;
        let beta = kaiser_beta(atten);
        let delta_w = 2.0 * PI * cfg.transition_width / fs;
        let mut len = ((atten - 7.95) / (2.285 * delta_w)).ceil().max(1.0) as usize + 1;
        // type I (odd length) so the high-pass has no forced zero at Nyquist
        if len % 2 == 0 {
            len += 1;
        }
        let mid = (len - 1) / 2;
        let fc = cfg.cutoff / fs;
        let i0_beta = bessel_i0(beta);

        let taps = (0..len)
            .map(|n| {
                let m = n as f64 - mid as f64;
                let ratio = m / mid as f64;
                let w = bessel_i0(beta * (1.0 - ratio * ratio).max(0.0).sqrt()) / i0_beta;
                let lp = 2.0 * fc * sinc(2.0 * fc * m) * w;
                if n == mid {
                    1.0 - lp
                } else {
                    -lp
                }
            })
            .collect();
        Ok(Self { sample_rate, taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Group delay in samples, removed from both outputs.
    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Returns `(inaudible, audible)`, both time-aligned with the input.
    pub fn split(&self, rec: &Recording) -> Result<(Recording, Recording)> {
        if rec.channel_role != ChannelRole::Mixed {
            return Err(Error::Contract(format!(
                "band split expects a mixed recording, got {:?}",
                rec.channel_role
            )));
        }
        if rec.sample_rate != self.sample_rate {
            return Err(Error::Config(format!(
                "recording sample rate {} does not match filter design rate {}",
                rec.sample_rate, self.sample_rate
            )));
        }
        let n = rec.samples.len();
        let delay = self.delay();
        let filtered = fft_convolve(&rec.samples, &self.taps);
        let high: Vec<f64> = (0..n)
            .map(|i| filtered.get(i + delay).copied().unwrap_or(0.0))
            .collect();
        let low: Vec<f64> = rec.samples.iter().zip(&high).map(|(x, h)| x - h).collect();
        Ok((
            Recording::new(rec.sample_rate, high, ChannelRole::InaudibleOnly),
            Recording::new(rec.sample_rate, low, ChannelRole::AudibleOnly),
        ))
    }
}

pub fn split_bands(rec: &Recording, cfg: BandSplitConfig) -> Result<(Recording, Recording)> {
    BandSplitter::new(cfg, rec.sample_rate)?.split(rec)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::spectrum::rms;

    fn tone(freq: f64, fs: u32, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs as f64).sin())
            .collect()
    }

    #[test]
    fn zero_input_gives_zero_outputs() {
        let rec = Recording::mixed(48_000, vec![0.0; 1000]);
        let (hi, lo) = split_bands(&rec, BandSplitConfig::default()).unwrap();
        assert!(hi.samples.iter().all(|&v| v == 0.0));
        assert!(lo.samples.iter().all(|&v| v == 0.0));
        assert_eq!(hi.samples.len(), 1000);
        assert_eq!(hi.channel_role, ChannelRole::InaudibleOnly);
        assert_eq!(lo.channel_role, ChannelRole::AudibleOnly);
    }

    #[test]
    fn tone_attenuation_measured() {
        let fs = 48_000;
        let low = Recording::mixed(fs, tone(1_000.0, fs, fs as usize));
        let (hi, _) = split_bands(&low, BandSplitConfig::default()).unwrap();
        let atten = 20.0 * (rms(&low.samples) / rms(&hi.samples)).log10();
        assert!(atten >= 40.0, "1 kHz attenuation {atten} dB");

        let high = Recording::mixed(fs, tone(18_000.0, fs, fs as usize));
        let (hi, _) = split_bands(&high, BandSplitConfig::default()).unwrap();
        let gain = 20.0 * (rms(&hi.samples) / rms(&high.samples)).log10();
        assert!(gain.abs() <= 1.0, "18 kHz gain {gain} dB");
    }

    #[test]
    fn outputs_reconstruct_input() {
        let fs = 48_000;
        let x: Vec<f64> = tone(3_000.0, fs, 2000)
            .iter()
            .zip(tone(19_000.0, fs, 2000))
            .map(|(a, b)| a + 0.5 * b)
            .collect();
        let rec = Recording::mixed(fs, x.clone());
        let (hi, lo) = split_bands(&rec, BandSplitConfig::default()).unwrap();
        for i in 0..x.len() {
            assert!((hi.samples[i] + lo.samples[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config_and_role() {
        let rec = Recording::mixed(48_000, vec![0.0; 10]);
        let cfg = BandSplitConfig {
            cutoff: 24_000.0,
            ..Default::default()
        };
        assert!(matches!(split_bands(&rec, cfg), Err(Error::Config(_))));
        let inaudible = Recording::new(48_000, vec![0.0; 10], ChannelRole::InaudibleOnly);
        assert!(split_bands(&inaudible, BandSplitConfig::default()).is_err());
    }

    #[test]
    fn filter_is_linear_phase() {
        let s = BandSplitter::new(BandSplitConfig::default(), 48_000).unwrap();
        let t = s.taps();
        assert_eq!(t.len() % 2, 1);
        for i in 0..t.len() {
            assert!((t[i] - t[t.len() - 1 - i]).abs() < 1e-15);
        }
    }
}
