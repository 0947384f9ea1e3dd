//! Python bindings: simulate datasets, enroll users, authenticate recordings
//! and evaluate populations from Python.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

use eardynamic::channel::{similarity as feature_similarity, FeatureVector};
use eardynamic::dsp::wav::read_wav;
use eardynamic::dsp::{synthesize_probe as probe_samples, ProbeConfig};
use eardynamic::experiment::ExperimentConfig;
use eardynamic::motion::{classify_posture as classify, parse_imu_trace, ImuSample};
use eardynamic::phoneme::{categorize_phoneme as categorize, parse_annotations};
use eardynamic::sim::DatasetConfig;
use eardynamic::store::{
    load_dataset, load_template, save_template, simulate_dataset as simulate, TemplateFile,
};
use eardynamic::workflow::{
    authenticate_recording, enroll_user, evaluate_dataset, probe_for, report_json,
};
use eardynamic::Error;

create_exception!(eardynamic, EarDynamicError, PyException);
create_exception!(eardynamic, NoEvidenceError, EarDynamicError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoEvidence(_) => NoEvidenceError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => EarDynamicError::new_err(e.to_string()),
    }
}

fn read_text(path: &PathBuf) -> PyResult<String> {
    std::fs::read_to_string(path).map_err(|e| to_py(Error::io(path, e)))
}

/// Outcome of one authentication attempt.
#[pyclass(frozen, get_all)]
struct Decision {
    accept: bool,
    score: f64,
    segments_used: usize,
    keys: Vec<String>,
    posture: String,
    moving: bool,
}

#[pymethods]
impl Decision {
    fn __repr__(&self) -> String {
        format!(
            "Decision(accept={}, score={:.6}, posture={}, segments_used={})",
            if self.accept { "True" } else { "False" },
            self.score,
            self.posture,
            self.segments_used
        )
    }
}

/// An enrolled user template with its boosted classifier.
#[pyclass]
struct Template {
    inner: TemplateFile,
}

#[pymethods]
impl Template {
    /// Trains a template for `user` from a simulated dataset manifest.
    #[staticmethod]
    #[pyo3(signature = (manifest, user, rounds=None))]
    fn enroll(
        py: Python<'_>,
        manifest: PathBuf,
        user: &str,
        rounds: Option<usize>,
    ) -> PyResult<Self> {
        let enrolled = py
            .detach(|| load_dataset(&manifest).and_then(|ds| enroll_user(&ds, user, rounds)))
            .map_err(to_py)?;
        Ok(Self {
            inner: enrolled.file,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Self::from_text(&read_text(&path)?)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_template(text).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> PyResult<String> {
        save_template(&self.inner).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        eardynamic::store::write_text(&path, &self.to_text()?).map_err(to_py)
    }

    #[getter]
    fn user_id(&self) -> &str {
        &self.inner.template.user_id
    }

    /// Template keys as `CATEGORY/POSTURE` strings.
    #[getter]
    fn keys(&self) -> Vec<String> {
        self.inner
            .template
            .entries
            .keys()
            .map(|k| k.to_string())
            .collect()
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.inner.classifier.as_ref().map_or(0, |c| c.rounds.len())
    }

    /// Scores a recording with its annotation and IMU files. Raises
    /// `NoEvidenceError` when no window can be scored.
    #[pyo3(signature = (recording, annotations, imu, chirp_duration=None, guard_gap=None))]
    fn authenticate(
        &self,
        py: Python<'_>,
        recording: PathBuf,
        annotations: PathBuf,
        imu: PathBuf,
        chirp_duration: Option<f64>,
        guard_gap: Option<f64>,
    ) -> PyResult<Decision> {
        let segments = parse_annotations(&read_text(&annotations)?).map_err(to_py)?;
        let trace = parse_imu_trace(&read_text(&imu)?).map_err(to_py)?;
        let (state, d) = py
            .detach(|| {
                let rec = read_wav(&recording)?;
                let probe = probe_for(&self.inner, rec.sample_rate, chirp_duration, guard_gap);
                authenticate_recording(&self.inner, probe, &rec, &segments, &trace)
            })
            .map_err(to_py)?;
        Ok(Decision {
            accept: d.accept,
            score: d.score,
            segments_used: d.segments_used,
            keys: d.template_keys_used.iter().map(|k| k.to_string()).collect(),
            posture: state.posture.to_string(),
            moving: state.moving,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Template(user_id={:?}, keys={}, rounds={})",
            self.inner.template.user_id,
            self.inner.template.entries.len(),
            self.rounds()
        )
    }
}

/// Writes a simulated population under `out` and returns the number of
/// sessions written.
#[pyfunction]
#[pyo3(signature = (out, subjects, seed, snr_db=30.0, phonemes_per_session=5, test_sessions=8, attack_sessions=4))]
fn simulate_dataset(
    py: Python<'_>,
    out: PathBuf,
    subjects: usize,
    seed: u64,
    snr_db: f64,
    phonemes_per_session: usize,
    test_sessions: usize,
    attack_sessions: usize,
) -> PyResult<usize> {
    let cfg = DatasetConfig {
        subjects,
        seed,
        snr_db,
        phonemes_per_session,
        test_sessions,
        attack_sessions,
        ..DatasetConfig::default()
    };
    let manifest = py
        .detach(|| {
            cfg.validate()
                .and_then(|()| simulate(&cfg, ProbeConfig::default(), &out))
        })
        .map_err(to_py)?;
    Ok(manifest.subjects.iter().map(|s| s.sessions.len()).sum())
}

/// Runs the full enrollment and test protocol over a dataset and returns the
/// report as JSON text.
#[pyfunction]
#[pyo3(signature = (manifest, phoneme_counts=None, threshold=0.0, rounds=None))]
fn evaluate(
    py: Python<'_>,
    manifest: PathBuf,
    phoneme_counts: Option<Vec<usize>>,
    threshold: f64,
    rounds: Option<usize>,
) -> PyResult<String> {
    let cfg = ExperimentConfig {
        phoneme_counts: phoneme_counts
            .unwrap_or_else(|| ExperimentConfig::default().phoneme_counts),
        threshold,
        rounds,
    };
    py.detach(|| {
        load_dataset(&manifest)
            .and_then(|ds| evaluate_dataset(&ds, &cfg))
            .and_then(|r| report_json(&r))
    })
    .map_err(to_py)
}

/// Deformation category code (`C1`..`C7`) of a phoneme label, or `None` for
/// labels that carry no deformation.
#[pyfunction]
fn categorize_phoneme(label: &str) -> Option<String> {
    categorize(label).map(|c| c.to_string())
}

/// Posture and motion flag from `(t, ax, ay, az, gx, gy, gz)` rows.
#[pyfunction]
fn classify_posture(samples: Vec<(f64, f64, f64, f64, f64, f64, f64)>) -> PyResult<(String, bool)> {
    let trace: Vec<ImuSample> = samples
        .into_iter()
        .map(|(t, ax, ay, az, gx, gy, gz)| ImuSample {
            t,
            accel: [ax, ay, az],
            gyro: [gx, gy, gz],
        })
        .collect();
    let state = classify(&trace).map_err(to_py)?;
    Ok((state.posture.to_string(), state.moving))
}

/// One period of the default probe (sweep plus guard gap).
#[pyfunction]
#[pyo3(signature = (sample_rate=48_000))]
fn synthesize_probe(sample_rate: u32) -> PyResult<Vec<f64>> {
    let cfg = ProbeConfig {
        sample_rate,
        ..ProbeConfig::default()
    };
    Ok(probe_samples(cfg).map_err(to_py)?.samples)
}

/// Pearson similarity of two log-magnitude profiles.
#[pyfunction]
fn similarity(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let band = (16_000.0, 23_000.0);
    let fa = FeatureVector::from_raw(a, band, 1.0).map_err(to_py)?;
    let fb = FeatureVector::from_raw(b, band, 1.0).map_err(to_py)?;
    feature_similarity(&fa, &fb).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "eardynamic")]
fn eardynamic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Template>()?;
    m.add_class::<Decision>()?;
    m.add_function(wrap_pyfunction!(simulate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(categorize_phoneme, m)?)?;
    m.add_function(wrap_pyfunction!(classify_posture, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_probe, m)?)?;
    m.add_function(wrap_pyfunction!(similarity, m)?)?;
    m.add("EarDynamicError", m.py().get_type::<EarDynamicError>())?;
    m.add("NoEvidenceError", m.py().get_type::<NoEvidenceError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
