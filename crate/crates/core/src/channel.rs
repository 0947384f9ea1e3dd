//! Ear-canal channel estimation from probe reflections and the normalized
//! log-magnitude feature built on top of it.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dsp::ProbeSignal;
use crate::error::{Error, Result};

/// Default spectral-division regularizer, relative to the peak probe power.
pub const DEFAULT_REGULARIZATION: f64 = 1e-3;

/// Floor applied to `log10 |H|` before normalization.
pub const LOG_MAGNITUDE_FLOOR: f64 = -12.0;

/// Complex frequency response over the in-band DFT bins of one probe period.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResponse {
    /// `(f_low, f_high)` of the first and last bin, in Hz.
    pub band: (f64, f64),
    pub bin_hz: f64,
    /// DFT index of `values[0]`.
    pub first_bin: usize,
    pub values: Vec<Complex64>,
}

impl ChannelResponse {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| (self.first_bin + i) as f64 * self.bin_hz)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }

    /// Element-wise complex mean of responses sharing one bin layout.
    pub fn average(responses: &[ChannelResponse]) -> Result<ChannelResponse> {
        let first = responses
            .first()
            .ok_or_else(|| Error::EmptyInput("no channel responses to average".into()))?;
        let mut acc = vec![Complex64::new(0.0, 0.0); first.values.len()];
        for r in responses {
            if r.first_bin != first.first_bin || r.values.len() != first.values.len() {
                return Err(Error::Shape(
                    "averaging responses with different bins".into(),
                ));
            }
            for (a, v) in acc.iter_mut().zip(&r.values) {
                *a += v;
            }
        }
        let n = responses.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(ChannelResponse {
            values: acc,
            ..first.clone()
        })
    }
}

/// In-band log-magnitude feature: mean-zero, unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub band: (f64, f64),
    pub bin_hz: f64,
}

impl FeatureVector {
    /// Mean-removes and normalizes `raw`. Fails when `raw` has no variance.
    pub fn from_raw(raw: Vec<f64>, band: (f64, f64), bin_hz: f64) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::DegenerateFeature(format!(
                "need at least 2 bins, got {}",
                raw.len()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateFeature("non-finite feature value".into()));
        }
        let values = normalize(&raw)
            .ok_or_else(|| Error::DegenerateFeature("log-magnitude has zero variance".into()))?;
        Ok(Self {
            values,
            band,
            bin_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn compatible_with(&self, other: &FeatureVector) -> bool {
        self.values.len() == other.values.len()
            && same_hz(self.band.0, other.band.0)
            && same_hz(self.band.1, other.band.1)
            && same_hz(self.bin_hz, other.bin_hz)
    }
}

fn same_hz(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

/// Mean-removal followed by L2 normalization; `None` for zero variance.
pub(crate) fn normalize(raw: &[f64]) -> Option<Vec<f64>> {
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = raw.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if !(norm > 1e-12 * scale * (raw.len() as f64).sqrt()) {
        return None;
    }
    Some(centered.iter().map(|v| v / norm).collect())
}

/// Regularized spectral divider bound to one probe waveform.
///
/// `H(f) = R(f) P*(f) / (|P(f)|^2 + eps * max|P|^2)` on the in-band bins.
pub struct ChannelEstimator {
    fft: Arc<dyn Fft<f64>>,
    period: usize,
    first_bin: usize,
    /// `conj(P) / (|P|^2 + eps max|P|^2)` for each in-band bin.
    inverse: Vec<Complex64>,
    band: (f64, f64),
    bin_hz: f64,
}

impl std::fmt::Debug for ChannelEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChannelEstimator")
            .field("period", &self.period)
            .field("first_bin", &self.first_bin)
            .field("bins", &self.inverse.len())
            .finish()
    }
}

impl ChannelEstimator {
    pub fn new(probe: &ProbeSignal, regularization: f64) -> Result<Self> {
        if !(regularization > 0.0 && regularization.is_finite()) {
            return Err(Error::Config(format!(
                "regularization must be a positive finite value (got {regularization})"
            )));
        }
        let period = probe.period_len();
        if period == 0 {
            return Err(Error::DegenerateProbe("probe has no samples".into()));
        }
        let bin_hz = probe.config.sample_rate as f64 / period as f64;
        let first_bin = (probe.config.f_start / bin_hz - 1e-9).ceil() as usize;
        let last_bin = (probe.config.f_end / bin_hz + 1e-9).floor() as usize;
        if last_bin < first_bin || last_bin > period / 2 {
            return Err(Error::DegenerateProbe(format!(
                "band [{}, {}] Hz contains no DFT bins at {bin_hz} Hz spacing",
                probe.config.f_start, probe.config.f_end
            )));
        }

        let fft = FftPlanner::new().plan_fft_forward(period);
        let mut spec: Vec<Complex64> = probe
            .samples
            .iter()
            .map(|&s| Complex64::new(s, 0.0))
            .collect();
        fft.process(&mut spec);
        let peak = spec.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        let in_band_energy: f64 = spec[first_bin..=last_bin]
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        if !(in_band_energy > 0.0) {
            return Err(Error::DegenerateProbe(
                "probe has zero in-band energy".into(),
            ));
        }
        let floor = regularization * peak;
        let inverse = spec[first_bin..=last_bin]
            .iter()
            .map(|p| p.conj() / (p.norm_sqr() + floor))
            .collect();
        Ok(Self {
            fft,
            period,
            first_bin,
            inverse,
            band: (first_bin as f64 * bin_hz, last_bin as f64 * bin_hz),
            bin_hz,
        })
    }

    pub fn period_len(&self) -> usize {
        self.period
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    pub fn bins(&self) -> usize {
        self.inverse.len()
    }

    pub fn estimate(&self, frame: &[f64]) -> Result<ChannelResponse> {
        if frame.len() != self.period {
            return Err(Error::Shape(format!(
                "frame has {} samples, probe period is {}",
                frame.len(),
                self.period
            )));
        }
        let mut spec: Vec<Complex64> = frame.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.fft.process(&mut spec);
        let values: Vec<Complex64> = spec[self.first_bin..self.first_bin + self.inverse.len()]
            .iter()
            .zip(&self.inverse)
            .map(|(r, inv)| r * inv)
            .collect();
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Shape("frame contains non-finite samples".into()));
        }
        Ok(ChannelResponse {
            band: self.band,
            bin_hz: self.bin_hz,
            first_bin: self.first_bin,
            values,
        })
    }
}

pub fn estimate_response(
    frame: &[f64],
    probe: &ProbeSignal,
    regularization: f64,
) -> Result<ChannelResponse> {
    ChannelEstimator::new(probe, regularization)?.estimate(frame)
}

/// `max(log10 |H|, -12)` per bin, mean-removed and scaled to unit norm.
pub fn to_feature(h: &ChannelResponse) -> Result<FeatureVector> {
    if h.values
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::DegenerateFeature(
            "channel response is not finite".into(),
        ));
    }
    let raw: Vec<f64> = h
        .values
        .iter()
        .map(|v| {
            let m = v.norm();
            if m > 0.0 {
                m.log10().max(LOG_MAGNITUDE_FLOOR)
            } else {
                LOG_MAGNITUDE_FLOOR
            }
        })
        .collect();
    FeatureVector::from_raw(raw, h.band, h.bin_hz)
}

/// Pearson correlation of two compatible features, in `[-1, 1]`.
pub fn similarity(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if !a.compatible_with(b) {
        return Err(Error::Shape(format!(
            "feature layouts differ: {} bins over {:?} vs {} bins over {:?}",
            a.len(),
            a.band,
            b.len(),
            b.band
        )));
    }
    Ok(pearson(&a.values, &b.values))
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let denom = (saa * sbb).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (sab / denom).clamp(-1.0, 1.0)
}
