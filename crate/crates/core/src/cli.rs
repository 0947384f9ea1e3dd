//! `eardynamic` command line: simulate, enroll, auth, evaluate.
//!
//! Exit codes: 0 accept/success, 1 reject, 2 usage, 3 data, 4 no evidence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dsp::wav::read_wav;
use crate::dsp::ProbeConfig;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, REFERENCE_METRICS};
use crate::motion::parse_imu_trace;
use crate::phoneme::parse_annotations;
use crate::sim::DatasetConfig;
use crate::store::{load_dataset, load_template, save_template, simulate_dataset};
use crate::workflow::{
    authenticate_recording, enroll_user, evaluate_dataset, probe_for, report_json, roc_tsv,
};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NO_EVIDENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "eardynamic",
    version,
    about = "Ear-canal dynamics authentication toolkit"
)]
pub struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a population dataset with a JSON manifest.
    Simulate(SimulateArgs),
    /// Enroll one subject and train their boosted classifier.
    Enroll(EnrollArgs),
    /// Authenticate one recording against a template.
    Auth(AuthArgs),
    /// Leave-sessions-out evaluation over a dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub subjects: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 5)]
    pub phonemes_per_session: usize,
    #[arg(long, default_value_t = 8)]
    pub test_sessions: usize,
    #[arg(long, default_value_t = 4)]
    pub attack_sessions: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Boosting rounds; defaults to four per enrolled key.
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AuthArgs {
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub recording: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub imu: PathBuf,
    /// Probe sweep length in seconds, if not the default.
    #[arg(long)]
    pub chirp_duration: Option<f64>,
    /// Probe guard gap in seconds, if not the default.
    #[arg(long)]
    pub guard_gap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Phoneme counts: `1..5`, `1..=5`, `3` or `1,3,5`.
    #[arg(long, default_value = "1..5", value_parser = parse_sweep)]
    pub phoneme_sweep: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_sweep(s: &str) -> std::result::Result<Vec<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        (num(a)?..=num(b)?).collect()
    } else {
        s.split(',')
            .map(num)
            .collect::<std::result::Result<_, _>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(format!("{s:?} must list phoneme counts of at least 1"));
    }
    Ok(values)
}

/// Parses `args` (program name first) and runs the command, writing
/// human-readable output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_ACCEPT
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    let verbose = cli.verbose > 0;
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out, err, verbose),
        Command::Enroll(a) => cmd_enroll(a, out, err, verbose),
        Command::Auth(a) => cmd_auth(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out, err, verbose),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&cli.command, &e)
        }
    }
}

fn exit_code(command: &Command, e: &Error) -> i32 {
    match e {
        Error::NoEvidence(_) => EXIT_NO_EVIDENCE,
        Error::Config(_) => EXIT_USAGE,
        Error::Io { .. } if matches!(command, Command::Simulate(_)) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn cmd_simulate(
    a: &SimulateArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
    verbose: bool,
) -> Result<i32> {
    let cfg = DatasetConfig {
        subjects: a.subjects,
        seed: a.seed,
        snr_db: a.snr_db,
        phonemes_per_session: a.phonemes_per_session,
        test_sessions: a.test_sessions,
        attack_sessions: a.attack_sessions,
        ..DatasetConfig::default()
    };
    cfg.validate()?;
    if verbose {
        let _ = writeln!(
            err,
            "simulating {} subjects into {}",
            cfg.subjects,
            a.out.display()
        );
    }
    let manifest = simulate_dataset(&cfg, ProbeConfig::default(), &a.out)?;
    let sessions: usize = manifest.subjects.iter().map(|s| s.sessions.len()).sum();
    let _ = writeln!(
        out,
        "wrote {} subjects, {sessions} sessions, manifest {}",
        manifest.subjects.len(),
        a.out.join(crate::store::MANIFEST_FILE).display()
    );
    Ok(EXIT_ACCEPT)
}

fn cmd_enroll(
    a: &EnrollArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
    verbose: bool,
) -> Result<i32> {
    let ds = load_dataset(&a.manifest)?;
    if verbose {
        let _ = writeln!(
            err,
            "extracting enrollment features for {} subjects",
            ds.subjects.len()
        );
    }
    let enrolled = enroll_user(&ds, &a.user, a.rounds)?;
    let file = &enrolled.file;
    crate::store::write_text(&a.out, &save_template(file)?)?;
    let _ = writeln!(
        out,
        "enrolled {}: {} keys ({} skipped), {} boosting rounds -> {}",
        a.user,
        file.template.entries.len(),
        enrolled.skipped_keys,
        file.classifier.as_ref().map_or(0, |c| c.rounds.len()),
        a.out.display()
    );
    Ok(EXIT_ACCEPT)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn cmd_auth(a: &AuthArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_template(&read_text(&a.template)?)?;
    let rec = read_wav(&a.recording)?;
    let annotations = parse_annotations(&read_text(&a.annotations)?)?;
    let imu = parse_imu_trace(&read_text(&a.imu)?)?;
    let probe = probe_for(&file, rec.sample_rate, a.chirp_duration, a.guard_gap);
    let (state, decision) = authenticate_recording(&file, probe, &rec, &annotations, &imu)?;
    let keys: Vec<String> = decision
        .template_keys_used
        .iter()
        .map(|k| k.to_string())
        .collect();
    let _ = writeln!(
        out,
        "{} score={:.6} posture={}{} segments={} keys={}",
        if decision.accept { "ACCEPT" } else { "REJECT" },
        decision.score,
        state.posture,
        if state.moving { " (moving)" } else { "" },
        decision.segments_used,
        keys.join(",")
    );
    Ok(if decision.accept {
        EXIT_ACCEPT
    } else {
        EXIT_REJECT
    })
}

fn cmd_evaluate(
    a: &EvaluateArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
    verbose: bool,
) -> Result<i32> {
    let ds = load_dataset(&a.manifest)?;
    if verbose {
        let _ = writeln!(
            err,
            "extracting features for {} subjects",
            ds.subjects.len()
        );
    }
    let cfg = ExperimentConfig {
        phoneme_counts: a.phoneme_sweep.clone(),
        threshold: a.threshold,
        rounds: a.rounds,
    };
    let report = evaluate_dataset(&ds, &cfg)?;
    crate::store::write_text(&a.out, &report_json(&report)?)?;
    let roc_path = a.out.with_extension("roc.tsv");
    crate::store::write_text(&roc_path, &roc_tsv(&report))?;

    let r = &report.overall;
    let _ = writeln!(
        out,
        "subjects {}  phonemes/session {}",
        report.subjects, report.phonemes
    );
    let _ = writeln!(out, "phonemes\taccuracy\trecall\tprecision\tf1\tauc");
    for row in &report.phoneme_sweep {
        let _ = writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            row.phonemes, row.accuracy, row.recall, row.precision, row.f1, row.auc
        );
    }
    let _ = writeln!(
        out,
        "simulated: accuracy {:.4} recall {:.4} precision {:.4} f1 {:.4} auc {:.4}",
        r.accuracy, r.recall, r.precision, r.f1, r.auc
    );
    let m = REFERENCE_METRICS;
    let _ = writeln!(
        out,
        "reference (human study): accuracy {:.4} recall {:.4} precision {:.4} f1 {:.4}",
        m.accuracy, m.recall, m.precision, m.f1
    );
    let _ = writeln!(
        out,
        "replay attack: FAR {:.4}  genuine FRR {:.4}  ({} attack sessions)",
        report.attack.far, report.attack.frr, report.attack.sessions
    );
    let _ = writeln!(
        out,
        "report {}  roc {}",
        a.out.display(),
        roc_path.display()
    );
    Ok(EXIT_ACCEPT)
}
