//! Leave-sessions-out evaluation over a population: per-user enrollment and
//! boosting on enrollment sessions, scoring on held-out test sessions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auth::{
    authenticate, default_rounds, enroll, evaluate, leave_one_out_similarities, train_stumps,
    BoostedClassifier, EvalReport, LabeledScore, TemplateKey, UserTemplate,
};
use crate::channel::FeatureVector;
use crate::dsp::Recording;
use crate::error::{Error, Result};
use crate::motion::{classify_posture, ImuSample, MotionState};
use crate::phoneme::PhonemeSegment;
use crate::pipeline::{keyed_features, Pipeline, SessionAnalysis};
use crate::sim::SessionRole;

/// Mean metrics of the published human study, printed next to simulated
/// results for context.
pub const REFERENCE_METRICS: ReferenceMetrics = ReferenceMetrics {
    accuracy: 0.9304,
    recall: 0.9738,
    precision: 0.9502,
    f1: 0.9684,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMetrics {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionEvidence {
    pub role: SessionRole,
    pub state: MotionState,
    pub analysis: SessionAnalysis,
}

impl SessionEvidence {
    pub fn extract(
        pipeline: &Pipeline,
        role: SessionRole,
        rec: &Recording,
        annotations: &[PhonemeSegment],
        imu: &[ImuSample],
    ) -> Result<Self> {
        Ok(Self {
            role,
            state: classify_posture(imu)?,
            analysis: pipeline.analyze(rec, annotations)?,
        })
    }

    /// Every phoneme and silent window, for enrollment.
    pub fn all_windows(&self) -> Result<Vec<(TemplateKey, FeatureVector)>> {
        let mut out = keyed_features(&self.analysis.phonemes, self.state)?;
        out.extend(keyed_features(&self.analysis.silent, self.state)?);
        Ok(out)
    }

    /// The first `p` phoneme windows.
    pub fn phoneme_windows(&self, p: usize) -> Result<Vec<(TemplateKey, FeatureVector)>> {
        let n = p.min(self.analysis.phonemes.len());
        keyed_features(&self.analysis.phonemes[..n], self.state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectEvidence {
    pub id: String,
    pub sessions: Vec<SessionEvidence>,
}

impl SubjectEvidence {
    fn role(&self, role: SessionRole) -> impl Iterator<Item = &SessionEvidence> {
        self.sessions.iter().filter(move |s| s.role == role)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserModel {
    pub template: UserTemplate,
    pub classifier: BoostedClassifier,
    pub skipped_keys: usize,
}

impl UserModel {
    /// Boosted score of a window set; a session with no usable window
    /// scores the most negative reachable margin.
    pub fn score(&self, windows: &[(TemplateKey, FeatureVector)]) -> Result<(f64, bool)> {
        if windows.is_empty() {
            return Ok((-self.classifier.total_alpha(), false));
        }
        match authenticate(&self.template, &self.classifier, windows) {
            Ok(d) => Ok((d.score, true)),
            Err(Error::NoEvidence(_)) => Ok((-self.classifier.total_alpha(), false)),
            Err(e) => Err(e),
        }
    }
}

/// Template from `user`'s enrollment windows, boosted against `negatives`
/// (other subjects' windows). Genuine windows are scored against the mean of
/// their key's other enrollment samples so thresholds are not tuned on
/// in-sample similarities.
pub fn train_model(
    user_id: &str,
    positives: &[(TemplateKey, FeatureVector)],
    negatives: &[(TemplateKey, FeatureVector)],
    rounds: Option<usize>,
) -> Result<UserModel> {
    let enrollment = enroll(user_id, positives)?;
    let template = enrollment.template;
    let mut samples = Vec::new();
    for ((key, _), sim) in positives.iter().zip(leave_one_out_similarities(positives)?) {
        if let (Some(similarity), true) = (sim, template.get(key).is_some()) {
            samples.push(LabeledScore {
                key: *key,
                similarity,
                genuine: true,
            });
        }
    }
    for (key, feature) in negatives {
        if let Some(similarity) = template.score(key, feature)? {
            samples.push(LabeledScore {
                key: *key,
                similarity,
                genuine: false,
            });
        }
    }
    let rounds = rounds.unwrap_or_else(|| default_rounds(&samples));
    let classifier = train_stumps(&samples, rounds)?;
    Ok(UserModel {
        template,
        classifier,
        skipped_keys: enrollment.skipped_keys,
    })
}

/// [`train_model`] for subject `user`, with every other subject's
/// enrollment sessions as impostors.
pub fn train_user(
    subjects: &[SubjectEvidence],
    user: usize,
    rounds: Option<usize>,
) -> Result<UserModel> {
    let mut positives = Vec::new();
    for s in subjects[user].role(SessionRole::Enroll) {
        positives.extend(s.all_windows()?);
    }
    let mut negatives = Vec::new();
    for (j, other) in subjects.iter().enumerate() {
        if j != user {
            for s in other.role(SessionRole::Enroll) {
                negatives.extend(s.all_windows()?);
            }
        }
    }
    train_model(&subjects[user].id, &positives, &negatives, rounds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Phoneme counts to evaluate; the last one drives the headline report.
    pub phoneme_counts: Vec<usize>,
    pub threshold: f64,
    pub rounds: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            phoneme_counts: (1..=5).collect(),
            threshold: 0.0,
            rounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub phonemes: usize,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub sessions: usize,
    /// Attack sessions accepted.
    pub far: f64,
    /// Genuine test sessions rejected.
    pub frr: f64,
    pub attack_reject_rate: f64,
    pub genuine_reject_rate: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoEvidenceCounts {
    pub genuine: usize,
    pub impostor: usize,
    pub attack: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub subjects: usize,
    pub phonemes: usize,
    #[serde(flatten)]
    pub overall: EvalReport,
    pub phoneme_sweep: Vec<SweepRow>,
    pub attack: AttackReport,
    pub no_evidence: NoEvidenceCounts,
    pub reference: ReferenceMetrics,
}

/// Scores of one user's model at one phoneme count.
#[derive(Debug, Clone, Default)]
struct UserScores {
    genuine: Vec<f64>,
    impostor: Vec<f64>,
    attack: Vec<f64>,
    missing: NoEvidenceCounts,
}

fn score_user(
    subjects: &[SubjectEvidence],
    user: usize,
    model: &UserModel,
    p: usize,
) -> Result<UserScores> {
    let mut out = UserScores::default();
    for s in subjects[user].role(SessionRole::Test) {
        let (score, ok) = model.score(&s.phoneme_windows(p)?)?;
        out.genuine.push(score);
        out.missing.genuine += usize::from(!ok);
    }
    for s in subjects[user].role(SessionRole::Attack) {
        let (score, ok) = model.score(&s.phoneme_windows(p)?)?;
        out.attack.push(score);
        out.missing.attack += usize::from(!ok);
    }
    // one held-out session from each other subject, rotating through them
    for (j, other) in subjects.iter().enumerate() {
        if j == user {
            continue;
        }
        let tests: Vec<&SessionEvidence> = other.role(SessionRole::Test).collect();
        if tests.is_empty() {
            continue;
        }
        let s = tests[(user + j) % tests.len()];
        let (score, ok) = model.score(&s.phoneme_windows(p)?)?;
        out.impostor.push(score);
        out.missing.impostor += usize::from(!ok);
    }
    Ok(out)
}

pub fn run_experiment(
    subjects: &[SubjectEvidence],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if subjects.len() < 2 {
        return Err(Error::Dataset {
            subjects: subjects.iter().map(|s| s.id.clone()).collect(),
            msg: "evaluation needs at least two subjects".into(),
        });
    }
    let Some(&headline) = cfg.phoneme_counts.last() else {
        return Err(Error::Config("phoneme sweep is empty".into()));
    };
    if cfg.phoneme_counts.contains(&0) {
        return Err(Error::Config("phoneme counts must be at least 1".into()));
    }
    let models = (0..subjects.len())
        .into_par_iter()
        .map(|u| {
            train_user(subjects, u, cfg.rounds).map_err(|e| Error::Dataset {
                subjects: vec![subjects[u].id.clone()],
                msg: format!("training failed: {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pooled = |p: usize| -> Result<UserScores> {
        let per_user = (0..subjects.len())
            .into_par_iter()
            .map(|u| score_user(subjects, u, &models[u], p))
            .collect::<Result<Vec<_>>>()?;
        let mut all = UserScores::default();
        for s in per_user {
            all.genuine.extend(s.genuine);
            all.impostor.extend(s.impostor);
            all.attack.extend(s.attack);
            all.missing.genuine += s.missing.genuine;
            all.missing.impostor += s.missing.impostor;
            all.missing.attack += s.missing.attack;
        }
        Ok(all)
    };

    let mut phoneme_sweep = Vec::with_capacity(cfg.phoneme_counts.len());
    for &p in &cfg.phoneme_counts {
        let s = pooled(p)?;
        let r = evaluate(&s.genuine, &s.impostor, cfg.threshold)?;
        phoneme_sweep.push(SweepRow {
            phonemes: p,
            accuracy: r.accuracy,
            recall: r.recall,
            precision: r.precision,
            f1: r.f1,
            auc: r.auc,
        });
    }

    let scores = pooled(headline)?;
    let overall = evaluate(&scores.genuine, &scores.impostor, cfg.threshold)?;
    let attack_accepted = scores
        .attack
        .iter()
        .filter(|&&s| s >= cfg.threshold)
        .count();
    let far = if scores.attack.is_empty() {
        0.0
    } else {
        attack_accepted as f64 / scores.attack.len() as f64
    };
    let frr = overall.frr();
    Ok(ExperimentReport {
        subjects: subjects.len(),
        phonemes: headline,
        overall,
        phoneme_sweep,
        attack: AttackReport {
            sessions: scores.attack.len(),
            far,
            frr,
            attack_reject_rate: 1.0 - far,
            genuine_reject_rate: frr,
        },
        no_evidence: scores.missing,
        reference: REFERENCE_METRICS,
    })
}
