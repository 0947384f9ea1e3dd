//! File-level operations shared by the command line and the Python bindings:
//! enroll a user from a dataset, authenticate one recording, evaluate a
//! whole dataset.

use rayon::prelude::*;

use crate::auth::{authenticate, AuthDecision};
use crate::dsp::{ProbeConfig, Recording};
use crate::error::{Error, Result};
use crate::experiment::{
    run_experiment, train_model, ExperimentConfig, ExperimentReport, SessionEvidence,
    SubjectEvidence,
};
use crate::motion::{ImuSample, MotionState};
use crate::phoneme::PhonemeSegment;
use crate::pipeline::{session_features, Pipeline, PipelineConfig};
use crate::sim::SessionRole;
use crate::store::{Dataset, TemplateFile};

/// Minimum enrollment sessions per user.
pub const MIN_ENROLL_SESSIONS: usize = 3;

pub fn dataset_pipeline(ds: &Dataset) -> Result<Pipeline> {
    Pipeline::new(PipelineConfig {
        probe: ds.manifest.probe,
        ..PipelineConfig::default()
    })
}

/// Features of every session of the selected roles, subject by subject.
pub fn extract_evidence(
    ds: &Dataset,
    pipeline: &Pipeline,
    roles: &[SessionRole],
) -> Result<Vec<SubjectEvidence>> {
    ds.subjects
        .par_iter()
        .map(|subject| {
            let sessions = subject
                .sessions
                .iter()
                .filter(|s| roles.contains(&s.role))
                .map(|s| {
                    SessionEvidence::extract(
                        pipeline,
                        s.role,
                        &s.recording()?,
                        &s.annotations,
                        &s.imu,
                    )
                    .map_err(|e| Error::Dataset {
                        subjects: vec![subject.id.clone()],
                        msg: format!("{} {}: {e}", s.role.as_str(), s.index),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SubjectEvidence {
                id: subject.id.clone(),
                sessions,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrolled {
    pub file: TemplateFile,
    pub skipped_keys: usize,
}

/// Template and classifier for `user`, with every other subject's enrollment
/// sessions as impostors.
pub fn enroll_user(ds: &Dataset, user: &str, rounds: Option<usize>) -> Result<Enrolled> {
    let Some(subject) = ds.subject(user) else {
        return Err(Error::Dataset {
            subjects: vec![user.to_string()],
            msg: "user is not in the manifest".into(),
        });
    };
    let sessions = subject
        .sessions
        .iter()
        .filter(|s| s.role == SessionRole::Enroll)
        .count();
    if sessions < MIN_ENROLL_SESSIONS {
        return Err(Error::InsufficientEnrollment(format!(
            "{user} has {sessions} enrollment sessions, need at least {MIN_ENROLL_SESSIONS}"
        )));
    }
    if ds.subjects.len() < 2 {
        return Err(Error::Dataset {
            subjects: vec![user.to_string()],
            msg: "enrollment needs other subjects as impostors".into(),
        });
    }
    let pipeline = dataset_pipeline(ds)?;
    let evidence = extract_evidence(ds, &pipeline, &[SessionRole::Enroll])?;
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for subject in &evidence {
        for s in &subject.sessions {
            let windows = s.all_windows()?;
            if subject.id == user {
                positives.extend(windows);
            } else {
                negatives.extend(windows);
            }
        }
    }
    let model = train_model(user, &positives, &negatives, rounds)?;
    Ok(Enrolled {
        file: TemplateFile {
            template: model.template,
            classifier: Some(model.classifier),
        },
        skipped_keys: model.skipped_keys,
    })
}

/// Probe timing for a recording scored against `file`: the band comes from
/// the template, the sample rate from the recording.
pub fn probe_for(
    file: &TemplateFile,
    sample_rate: u32,
    chirp_duration: Option<f64>,
    guard_gap: Option<f64>,
) -> ProbeConfig {
    let defaults = ProbeConfig::default();
    ProbeConfig {
        f_start: file.template.band.0,
        f_end: file.template.band.1,
        chirp_duration: chirp_duration.unwrap_or(defaults.chirp_duration),
        guard_gap: guard_gap.unwrap_or(defaults.guard_gap),
        sample_rate,
        ..defaults
    }
}

pub fn authenticate_recording(
    file: &TemplateFile,
    probe: ProbeConfig,
    rec: &Recording,
    annotations: &[PhonemeSegment],
    imu: &[ImuSample],
) -> Result<(MotionState, AuthDecision)> {
    let Some(classifier) = &file.classifier else {
        return Err(Error::Validation(
            "template has no trained classifier".into(),
        ));
    };
    let pipeline = Pipeline::new(PipelineConfig {
        probe,
        ..PipelineConfig::default()
    })?;
    let (state, windows) = session_features(&pipeline, rec, annotations, imu)?;
    Ok((state, authenticate(&file.template, classifier, &windows)?))
}

pub fn evaluate_dataset(ds: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if ds.subjects.len() < 2 {
        return Err(Error::Dataset {
            subjects: ds.subjects.iter().map(|s| s.id.clone()).collect(),
            msg: "evaluation needs at least two subjects".into(),
        });
    }
    let pipeline = dataset_pipeline(ds)?;
    let evidence = extract_evidence(
        ds,
        &pipeline,
        &[SessionRole::Enroll, SessionRole::Test, SessionRole::Attack],
    )?;
    run_experiment(&evidence, cfg)
}

/// ROC of the headline phoneme count as `threshold\ttar\tfar` rows.
pub fn roc_tsv(report: &ExperimentReport) -> String {
    let mut tsv = String::from("threshold\ttar\tfar\n");
    for p in &report.overall.roc {
        tsv.push_str(&format!("{}\t{}\t{}\n", p.threshold, p.tar, p.far));
    }
    tsv
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Validation(format!("report is not serializable: {e}")))?;
    json.push('\n');
    Ok(json)
}
