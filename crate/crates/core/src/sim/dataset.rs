use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::population::{mix_seed, SimSubject};
use super::synth::{plan_utterance, simulate_session, SimSession, SynthOptions};
use crate::dsp::ProbeSignal;
use crate::error::{Error, Result};
use crate::motion::HeadPosture;
use crate::phoneme::DeformationCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionRole {
    Enroll,
    Test,
    /// Replay of the subject's static canal with articulation removed.
    Attack,
}

impl SessionRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionRole::Enroll => "enroll",
            SessionRole::Test => "test",
            SessionRole::Attack => "attack",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSpec {
    pub role: SessionRole,
    pub index: usize,
    pub posture: HeadPosture,
    pub categories: Vec<DeformationCategory>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub subjects: usize,
    pub seed: u64,
    pub snr_db: f64,
    /// Distinct categories per test and attack session.
    pub phonemes_per_session: usize,
    /// Enrollment repeats; each pass records every posture once.
    pub enroll_passes: usize,
    pub test_sessions: usize,
    pub attack_sessions: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            subjects: 20,
            seed: 42,
            snr_db: 30.0,
            phonemes_per_session: 5,
            enroll_passes: 3,
            test_sessions: 8,
            attack_sessions: 4,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subjects < 2 {
            return Err(Error::Config(format!(
                "need at least 2 subjects so impostors exist, got {}",
                self.subjects
            )));
        }
        if !(1..=DeformationCategory::ALL.len()).contains(&self.phonemes_per_session) {
            return Err(Error::Config(format!(
                "phonemes per session must lie in 1..=7, got {}",
                self.phonemes_per_session
            )));
        }
        if self.snr_db.is_nan() {
            return Err(Error::Config("snr_db must not be NaN".into()));
        }
        if self.enroll_passes < 3 {
            return Err(Error::Config(format!(
                "enrollment needs at least 3 passes, got {}",
                self.enroll_passes
            )));
        }
        Ok(())
    }
}

/// Enrollment sessions speak every category in every posture; test and
/// attack sessions speak `phonemes_per_session` distinct categories in a
/// random posture.
pub fn plan_sessions(subject: &SimSubject, cfg: &DatasetConfig) -> Vec<SessionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(subject.rng_seed ^ 0xDA7A));
    let mut out = Vec::new();
    let mut index = 0;
    for _ in 0..cfg.enroll_passes {
        for posture in HeadPosture::ALL {
            out.push(SessionSpec {
                role: SessionRole::Enroll,
                index,
                posture,
                categories: DeformationCategory::ALL.to_vec(),
                seed: rng.random(),
            });
            index += 1;
        }
    }
    for (role, count) in [
        (SessionRole::Test, cfg.test_sessions),
        (SessionRole::Attack, cfg.attack_sessions),
    ] {
        for index in 0..count {
            let mut cats = DeformationCategory::ALL.to_vec();
            cats.shuffle(&mut rng);
            cats.truncate(cfg.phonemes_per_session);
            out.push(SessionSpec {
                role,
                index,
                posture: HeadPosture::ALL[rng.random_range(0..HeadPosture::ALL.len())],
                categories: cats,
                seed: rng.random(),
            });
        }
    }
    out
}

pub fn simulate_spec(
    subject: &SimSubject,
    probe: &ProbeSignal,
    spec: &SessionSpec,
    snr_db: f64,
) -> Result<SimSession> {
    let utterance = plan_utterance(&spec.categories, true, spec.seed);
    let opts = SynthOptions {
        deformation: spec.role != SessionRole::Attack,
        ..SynthOptions::default()
    };
    simulate_session(
        subject,
        probe,
        &utterance,
        spec.posture,
        snr_db,
        spec.seed,
        opts,
    )
}
