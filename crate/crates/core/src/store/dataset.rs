//! Simulated dataset trees: one directory per subject holding WAV recordings,
//! annotation files and IMU traces, indexed by `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::wav::{read_wav, wav_info, write_wav};
use crate::dsp::{synthesize_probe, ProbeConfig, Recording};
use crate::error::{Error, Result};
use crate::motion::{format_imu_trace, parse_imu_trace, HeadPosture, ImuSample};
use crate::phoneme::{format_annotations, parse_annotations, PhonemeSegment};
use crate::sim::{
    plan_sessions, sample_population, simulate_spec, DatasetConfig, SessionRole, SimSession,
};

pub const MANIFEST_FORMAT: &str = "EARDYN-DATASET v1";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Slack allowed between the last annotation and the end of its recording.
const DURATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub role: SessionRole,
    pub index: usize,
    /// Posture the session was recorded in.
    pub posture: HeadPosture,
    /// Paths relative to the manifest directory.
    pub recording: String,
    pub annotations: String,
    pub imu: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub id: String,
    pub seed: u64,
    pub sessions: Vec<SessionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub seed: u64,
    pub sample_rate: u32,
    /// `None` for noiseless recordings.
    pub snr_db: Option<f64>,
    pub phonemes_per_session: usize,
    pub probe: ProbeConfig,
    pub subjects: Vec<SubjectEntry>,
}

/// A session whose side files are parsed and validated; the recording is
/// read on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub role: SessionRole,
    pub index: usize,
    pub posture: HeadPosture,
    pub recording_path: PathBuf,
    pub sample_rate: u32,
    pub n_samples: usize,
    pub annotations: Vec<PhonemeSegment>,
    pub imu: Vec<ImuSample>,
}

impl LoadedSession {
    pub fn recording(&self) -> Result<Recording> {
        read_wav(&self.recording_path)
    }

    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSubject {
    pub id: String,
    pub sessions: Vec<LoadedSession>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: DatasetManifest,
    pub subjects: Vec<LoadedSubject>,
}

impl Dataset {
    pub fn subject(&self, id: &str) -> Option<&LoadedSubject> {
        self.subjects.iter().find(|s| s.id == id)
    }
}

pub fn session_stem(role: SessionRole, index: usize) -> String {
    format!("{}_{index:02}", role.as_str())
}

/// Writes one session's three files under `root/subject_id/` and returns
/// its manifest entry.
pub fn write_session(
    root: &Path,
    subject_id: &str,
    role: SessionRole,
    index: usize,
    session: &SimSession,
) -> Result<SessionEntry> {
    let dir = root.join(subject_id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stem = session_stem(role, index);
    let entry = SessionEntry {
        role,
        index,
        posture: session.posture,
        recording: format!("{subject_id}/{stem}.wav"),
        annotations: format!("{subject_id}/{stem}.phn.tsv"),
        imu: format!("{subject_id}/{stem}.imu.tsv"),
    };
    write_wav(&root.join(&entry.recording), &session.recording)?;
    write_text(
        &root.join(&entry.annotations),
        &format_annotations(&session.annotations),
    )?;
    write_text(&root.join(&entry.imu), &format_imu_trace(&session.imu))?;
    Ok(entry)
}

pub fn write_manifest(root: &Path, manifest: &DatasetManifest) -> Result<PathBuf> {
    let path = root.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Validation(format!("manifest is not serializable: {e}")))?;
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses the manifest and every annotation and IMU file, and checks each
/// WAV header against the manifest sample rate and annotation extent. All
/// offending subjects are reported together.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let text = read_text(manifest_path)?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Dataset {
        subjects: vec![],
        msg: format!("{}: invalid manifest: {e}", manifest_path.display()),
    })?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(Error::Dataset {
            subjects: vec![],
            msg: format!("unsupported manifest format {:?}", manifest.format),
        });
    }
    if manifest.subjects.is_empty() {
        return Err(Error::Dataset {
            subjects: vec![],
            msg: "manifest lists no subjects".into(),
        });
    }
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    let mut subjects = Vec::with_capacity(manifest.subjects.len());
    let mut bad_ids = Vec::new();
    let mut problems = Vec::new();
    for subject in &manifest.subjects {
        let mut sessions = Vec::with_capacity(subject.sessions.len());
        let mut failed = false;
        for entry in &subject.sessions {
            match load_session(&root, entry, manifest.sample_rate) {
                Ok(s) => sessions.push(s),
                Err(e) => {
                    failed = true;
                    problems.push(format!(
                        "{} {}: {e}",
                        subject.id,
                        session_stem(entry.role, entry.index)
                    ));
                }
            }
        }
        if failed {
            bad_ids.push(subject.id.clone());
        }
        subjects.push(LoadedSubject {
            id: subject.id.clone(),
            sessions,
        });
    }
    if !bad_ids.is_empty() {
        return Err(Error::Dataset {
            subjects: bad_ids,
            msg: problems.join("; "),
        });
    }
    Ok(Dataset {
        root,
        manifest,
        subjects,
    })
}

fn load_session(root: &Path, entry: &SessionEntry, sample_rate: u32) -> Result<LoadedSession> {
    let recording_path = root.join(&entry.recording);
    let (fs, n_samples) = wav_info(&recording_path)?;
    if fs != sample_rate {
        return Err(Error::Validation(format!(
            "recording is sampled at {fs} Hz, manifest says {sample_rate} Hz"
        )));
    }
    let annotations = parse_annotations(&read_text(&root.join(&entry.annotations))?)?;
    let imu = parse_imu_trace(&read_text(&root.join(&entry.imu))?)?;
    let duration = n_samples as f64 / fs as f64;
    if let Some(last) = annotations.last() {
        if last.end > duration + DURATION_TOLERANCE {
            return Err(Error::Validation(format!(
                "annotation ends at {:.6} s but the recording lasts {duration:.6} s",
                last.end
            )));
        }
    }
    Ok(LoadedSession {
        role: entry.role,
        index: entry.index,
        posture: entry.posture,
        recording_path,
        sample_rate: fs,
        n_samples,
        annotations,
        imu,
    })
}

/// Simulates the whole population described by `cfg` into `root` and writes
/// its manifest. Subjects are synthesized in parallel; the output does not
/// depend on scheduling.
pub fn simulate_dataset(
    cfg: &DatasetConfig,
    probe: ProbeConfig,
    root: &Path,
) -> Result<DatasetManifest> {
    use rayon::prelude::*;

    cfg.validate()?;
    let signal = synthesize_probe(probe)?;
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let subjects = sample_population(cfg.subjects, cfg.seed)
        .par_iter()
        .map(|subject| {
            let id = format!("S{:02}", subject.id);
            let sessions = plan_sessions(subject, cfg)
                .iter()
                .map(|spec| {
                    let session = simulate_spec(subject, &signal, spec, cfg.snr_db)?;
                    write_session(root, &id, spec.role, spec.index, &session)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SubjectEntry {
                id,
                seed: subject.rng_seed,
                sessions,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT.to_string(),
        seed: cfg.seed,
        sample_rate: probe.sample_rate,
        snr_db: cfg.snr_db.is_finite().then_some(cfg.snr_db),
        phonemes_per_session: cfg.phonemes_per_session,
        probe,
        subjects,
    };
    write_manifest(root, &manifest)?;
    Ok(manifest)
}
