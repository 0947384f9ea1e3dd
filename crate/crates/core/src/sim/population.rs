//! Seeded synthetic subject population.
//!
//! Static geometry is drawn inside the published adult ranges (canal length
//! 14.20–29.36 mm, section area 25–70 mm², volume 372–1400 mm³). Dynamic
//! deformation follows the published mix of responses to jaw motion:
//! 25 % of subjects compress (up to 10 mm³), 67 % expand (up to 25 mm³),
//! 8 % do not deform.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::canal::{EarCanalModel, SECTIONS};
use crate::motion::HeadPosture;
use crate::phoneme::DeformationCategory;

pub const MIN_LENGTH: f64 = 14.20e-3;
pub const MAX_LENGTH: f64 = 29.36e-3;
pub const MIN_AREA: f64 = 25e-6;
pub const MAX_AREA: f64 = 70e-6;
pub const MIN_VOLUME: f64 = 372e-9;
pub const MAX_VOLUME: f64 = 1400e-9;
pub const MAX_COMPRESSION: f64 = 10e-9;
pub const MAX_EXPANSION: f64 = 25e-9;
pub const MAX_DIAMETER_CHANGE: f64 = 2.5e-3;

/// Zero-mean section-wise shape amplitude of a full-scale deformation.
const SHAPE_AMPLITUDE: f64 = 0.12;
/// Weight of the subject-specific part of each category's shape.
const PERSONAL_SHAPE_WEIGHT: f64 = 0.5;
const POSTURE_OFFSET_STD: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeformationKind {
    Compress,
    Expand,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationProfile {
    pub kind: DeformationKind,
    /// Subject-specific magnitude in (0, 1].
    pub scale: f64,
    /// Fractional area change per section for each category, `C1` first.
    pub per_category: Vec<Vec<f64>>,
}

impl DeformationProfile {
    pub fn for_category(&self, c: DeformationCategory) -> &[f64] {
        &self.per_category[c.index() - 1]
    }

    /// Volume change (m³) produced by category `c` on the given canal.
    pub fn volume_change(&self, canal: &EarCanalModel, c: DeformationCategory) -> f64 {
        let seg = canal.section_length();
        canal
            .section_areas
            .iter()
            .zip(self.for_category(c))
            .map(|(a, d)| a * d * seg)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSubject {
    pub id: usize,
    pub canal: EarCanalModel,
    pub deformation: DeformationProfile,
    /// Fractional area perturbation per section, indexed like [`HeadPosture::ALL`].
    pub posture_offsets: Vec<Vec<f64>>,
    /// Fundamental frequency of the subject's synthetic voice, Hz.
    pub voice_f0: f64,
    pub rng_seed: u64,
}

impl SimSubject {
    pub fn posture_offset(&self, posture: HeadPosture) -> &[f64] {
        &self.posture_offsets[posture as usize]
    }

    /// Section areas for a given articulation and head posture.
    pub fn areas(&self, category: Option<DeformationCategory>, posture: HeadPosture) -> Vec<f64> {
        let offset = self.posture_offset(posture);
        self.canal
            .section_areas
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let d = category.map_or(0.0, |c| self.deformation.for_category(c)[k]);
                a * (1.0 + d + offset[k])
            })
            .collect()
    }
}

/// SplitMix64 finalizer, used to derive independent per-subject seeds.
pub fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn subject_seed(population_seed: u64, id: usize) -> u64 {
    mix_seed(population_seed ^ mix_seed(id as u64 + 1))
}

pub fn sample_population(n: usize, seed: u64) -> Vec<SimSubject> {
    (0..n).map(|id| sample_subject(seed, id)).collect()
}

/// Regenerates subject `id` of the population drawn with `population_seed`.
pub fn sample_subject(population_seed: u64, id: usize) -> SimSubject {
    let rng_seed = subject_seed(population_seed, id);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let canal = sample_canal(&mut rng);
    let deformation = loop {
        if let Some(d) = sample_deformation(&mut rng, &canal) {
            break d;
        }
    };
    let jitter = Normal::new(0.0, POSTURE_OFFSET_STD).expect("valid std");
    let posture_offsets = HeadPosture::ALL
        .iter()
        .map(|p| match p {
            HeadPosture::Forward => vec![0.0; SECTIONS],
            _ => (0..SECTIONS).map(|_| jitter.sample(&mut rng)).collect(),
        })
        .collect();
    let voice_f0 = rng.random_range(100.0..220.0);
    SimSubject {
        id,
        canal,
        deformation,
        posture_offsets,
        voice_f0,
        rng_seed,
    }
}

fn sample_canal(rng: &mut ChaCha8Rng) -> EarCanalModel {
    let smooth = Normal::new(0.0, 1.0).expect("valid std");
    loop {
        let length = rng.random_range(MIN_LENGTH..=MAX_LENGTH);
        let mean_area = rng.random_range(30e-6..60e-6);
        let coeffs: Vec<f64> = (1..=3)
            .map(|j| smooth.sample(rng) * 0.15 / j as f64)
            .collect();
        let areas: Vec<f64> = (0..SECTIONS)
            .map(|k| {
                let x = (k as f64 + 0.5) / SECTIONS as f64;
                let shape: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (PI * (j + 1) as f64 * x).cos())
                    .sum();
                mean_area * (1.0 + shape + 0.03 * smooth.sample(rng))
            })
            .collect();
        let canal = EarCanalModel {
            length,
            section_areas: areas,
            eardrum_reflection: rng.random_range(0.55..0.85),
            wall_loss: rng.random_range(0.97..0.995),
        };
        let areas_ok = canal
            .section_areas
            .iter()
            .all(|a| (MIN_AREA..=MAX_AREA).contains(a));
        let volume = canal.volume();
        if areas_ok && (MIN_VOLUME..=MAX_VOLUME).contains(&volume) {
            return canal;
        }
    }
}

/// Jaw opening implied by the category's articulation (slight, moderate, wide).
fn jaw_opening(c: DeformationCategory) -> f64 {
    use DeformationCategory::*;
    match c {
        TongueLowerJawWide | TongueRaisedFricativeJawWide => 1.0,
        TongueBackJawModerate => 0.7,
        TongueForwardJawSlight
        | TongueBackRaiseJawSlight
        | TongueRaisedJawSlight
        | TongueFricativeJawSlight => 0.4,
    }
}

/// Shared zero-mean direction of category `c`: DCT-II basis vector `c`.
pub fn category_pattern(c: DeformationCategory) -> Vec<f64> {
    let n = SECTIONS as f64;
    (0..SECTIONS)
        .map(|k| (PI * c.index() as f64 * (k as f64 + 0.5) / n).cos())
        .collect()
}

fn sample_deformation(rng: &mut ChaCha8Rng, canal: &EarCanalModel) -> Option<DeformationProfile> {
    let u: f64 = rng.random();
    let kind = if u < 0.25 {
        DeformationKind::Compress
    } else if u < 0.92 {
        DeformationKind::Expand
    } else {
        DeformationKind::None
    };
    let scale = rng.random_range(0.5..=1.0);
    let personal = Normal::new(0.0, 1.0).expect("valid std");
    let seg = canal.section_length();
    let area_sum: f64 = canal.section_areas.iter().sum();

    let mut per_category = Vec::with_capacity(7);
    for c in DeformationCategory::ALL {
        // draw unconditionally so the stream layout does not depend on kind
        let own: Vec<f64> = (0..SECTIONS).map(|_| personal.sample(rng)).collect();
        if kind == DeformationKind::None {
            per_category.push(vec![0.0; SECTIONS]);
            continue;
        }
        let jaw = jaw_opening(c);
        let target_volume = match kind {
            DeformationKind::Compress => -MAX_COMPRESSION * jaw * scale,
            DeformationKind::Expand => MAX_EXPANSION * jaw * scale,
            DeformationKind::None => 0.0,
        };
        let own_mean = own.iter().sum::<f64>() / SECTIONS as f64;
        let own_norm = own
            .iter()
            .map(|v| (v - own_mean).powi(2))
            .sum::<f64>()
            .sqrt();
        let pattern = category_pattern(c);
        let pattern_norm = pattern.iter().map(|v| v * v).sum::<f64>().sqrt();
        let amp = SHAPE_AMPLITUDE * scale * (0.5 + 0.5 * jaw);
        let shape: Vec<f64> = pattern
            .iter()
            .zip(&own)
            .map(|(p, o)| {
                amp * (p / pattern_norm + PERSONAL_SHAPE_WEIGHT * (o - own_mean) / own_norm)
                    * (SECTIONS as f64).sqrt()
                    / (1.0 + PERSONAL_SHAPE_WEIGHT)
            })
            .collect();
        // uniform part chosen so the enclosed volume changes by exactly target_volume
        let shape_volume: f64 = canal
            .section_areas
            .iter()
            .zip(&shape)
            .map(|(a, s)| a * s)
            .sum::<f64>()
            * seg;
        let uniform = (target_volume - shape_volume) / (area_sum * seg);
        let delta: Vec<f64> = shape.iter().map(|s| s + uniform).collect();
        per_category.push(delta);
    }
    let profile = DeformationProfile {
        kind,
        scale,
        per_category,
    };
    profile_is_valid(&profile, canal).then_some(profile)
}

fn profile_is_valid(profile: &DeformationProfile, canal: &EarCanalModel) -> bool {
    DeformationCategory::ALL.iter().all(|&c| {
        let dv = profile.volume_change(canal, c);
        let volume_ok = (-MAX_COMPRESSION - 1e-15..=MAX_EXPANSION + 1e-15).contains(&dv);
        let diameter_ok = canal
            .section_areas
            .iter()
            .zip(profile.for_category(c))
            .all(|(a, d)| {
                let after = a * (1.0 + d);
                after > 0.0 && (diameter(after) - diameter(*a)).abs() <= MAX_DIAMETER_CHANGE
            });
        volume_ok && diameter_ok
    })
}

fn diameter(area: f64) -> f64 {
    2.0 * (area / PI).sqrt()
}
