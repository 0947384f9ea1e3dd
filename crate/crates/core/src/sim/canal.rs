use crate::error::{Error, Result};

pub const SPEED_OF_SOUND: f64 = 343.0;
pub const SECTIONS: usize = 8;
pub const DEFAULT_TAPS: usize = 32;

/// Concatenated cylindrical-tube model of one ear canal, entrance first.
#[derive(Debug, Clone, PartialEq)]
pub struct EarCanalModel {
    /// Metres.
    pub length: f64,
    /// Cross-sectional area of each section in m², entrance to eardrum.
    pub section_areas: Vec<f64>,
    /// Pressure reflection coefficient of the eardrum termination.
    pub eardrum_reflection: f64,
    /// Amplitude factor per one-way pass through a section.
    pub wall_loss: f64,
}

impl EarCanalModel {
    pub fn section_length(&self) -> f64 {
        self.length / self.section_areas.len() as f64
    }

    /// Enclosed volume in m³.
    pub fn volume(&self) -> f64 {
        self.section_areas.iter().sum::<f64>() * self.section_length()
    }

    pub fn round_trip_delay(&self) -> f64 {
        2.0 * self.length / SPEED_OF_SOUND
    }

    /// Smallest `n_taps` accepted by [`impulse_response`] at `sample_rate`.
    pub fn min_taps(&self, sample_rate: u32) -> usize {
        2 * (self.length / SPEED_OF_SOUND * sample_rate as f64).round() as usize
    }
}

/// `r_k = (A_k - A_{k+1}) / (A_k + A_{k+1})` for each internal junction.
pub fn junction_reflections(areas: &[f64]) -> Vec<f64> {
    areas
        .windows(2)
        .map(|w| (w[0] - w[1]) / (w[0] + w[1]))
        .collect()
}

/// Kelly-Lochbaum scattering lattice sampled on its own time grid: one step
/// is the one-way travel time of a single section. A unit impulse enters
/// section 1 at step 0; element `m` of the result is the pressure leaving the
/// canal entrance at step `m`. The earbud side is matched, so outgoing waves
/// are not re-injected.
pub fn lattice_step_response(
    areas: &[f64],
    eardrum_reflection: f64,
    wall_loss: f64,
    steps: usize,
) -> Vec<f64> {
    let k = areas.len();
    let r = junction_reflections(areas);
    // fwd[i]: forward wave arriving at the right end of section i
    // bwd[i]: backward wave arriving at the left end of section i
    let mut fwd = vec![0.0; k];
    let mut bwd = vec![0.0; k];
    let mut next_fwd = vec![0.0; k];
    let mut next_bwd = vec![0.0; k];
    let mut out = vec![0.0; steps];

    for (step, slot) in out.iter_mut().enumerate() {
        *slot = bwd[0];
        next_fwd[0] = if step == 0 { wall_loss } else { 0.0 };
        for j in 0..k - 1 {
            let (a, d) = (fwd[j], bwd[j + 1]);
            next_fwd[j + 1] = wall_loss * ((1.0 + r[j]) * a - r[j] * d);
            next_bwd[j] = wall_loss * (r[j] * a + (1.0 - r[j]) * d);
        }
        next_bwd[k - 1] = wall_loss * eardrum_reflection * fwd[k - 1];
        std::mem::swap(&mut fwd, &mut next_fwd);
        std::mem::swap(&mut bwd, &mut next_bwd);
    }
    out
}

/// Reflection impulse response of `canal` with its areas replaced by
/// `deformed_areas`, at `sample_rate`, truncated to `n_taps`. Lattice
/// arrivals at fractional sample times are rounded to the nearest sample.
pub fn impulse_response(
    canal: &EarCanalModel,
    deformed_areas: &[f64],
    sample_rate: u32,
    n_taps: usize,
) -> Result<Vec<f64>> {
    if deformed_areas.is_empty() {
        return Err(Error::Model("canal needs at least one section".into()));
    }
    if let Some(a) = deformed_areas
        .iter()
        .find(|a| !(**a > 0.0 && a.is_finite()))
    {
        return Err(Error::Model(format!(
            "section area must be positive, got {a}"
        )));
    }
    if !(canal.length > 0.0 && canal.length.is_finite()) {
        return Err(Error::Model(format!(
            "canal length must be positive, got {}",
            canal.length
        )));
    }
    if !(0.0..=1.0).contains(&canal.eardrum_reflection)
        || !(canal.wall_loss > 0.0 && canal.wall_loss <= 1.0)
    {
        return Err(Error::Model(
            "eardrum_reflection must lie in [0, 1] and wall_loss in (0, 1]".into(),
        ));
    }
    if n_taps < canal.min_taps(sample_rate).max(1) {
        return Err(Error::Config(format!(
            "n_taps {n_taps} is shorter than the round trip ({} taps)",
            canal.min_taps(sample_rate)
        )));
    }

    let step_samples =
        canal.length / deformed_areas.len() as f64 / SPEED_OF_SOUND * sample_rate as f64;
    let steps = ((n_taps as f64 - 0.5) / step_samples).ceil() as usize + 1;
    let per_step = lattice_step_response(
        deformed_areas,
        canal.eardrum_reflection,
        canal.wall_loss,
        steps,
    );
    let mut taps = vec![0.0; n_taps];
    for (m, v) in per_step.into_iter().enumerate() {
        let idx = (m as f64 * step_samples).round() as usize;
        if idx < n_taps {
            taps[idx] += v;
        }
    }
    Ok(taps)
}
