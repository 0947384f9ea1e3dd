use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;

use eardynamic::auth::{
    BoostRound, BoostedClassifier, TemplateEntry, TemplateKey, UserTemplate, WeakClassifier,
};
use eardynamic::channel::FeatureVector;
use eardynamic::dsp::ProbeConfig;
use eardynamic::motion::HeadPosture;
use eardynamic::phoneme::DeformationCategory;
use eardynamic::sim::DatasetConfig;
use eardynamic::store::{
    load_dataset, load_template, save_template, simulate_dataset, TemplateFile, MANIFEST_FILE,
};
use eardynamic::Error;

const BAND: (f64, f64) = (16_000.0, 23_000.0);

fn key(i: usize) -> TemplateKey {
    let posture = HeadPosture::ALL[i % 5];
    match i / 5 {
        0 => TemplateKey::static_key(posture),
        c => TemplateKey::phoneme(DeformationCategory::ALL[(c - 1) % 7], posture),
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn template_file() -> impl Strategy<Value = TemplateFile> {
    let width = 4usize..40;
    (
        width.prop_flat_map(|w| {
            prop::collection::btree_map(
                0usize..40,
                (
                    prop::collection::vec(-1e3f64..1e3, w),
                    1usize..50,
                    finite(),
                    finite(),
                ),
                1..8,
            )
        }),
        "[A-Za-z0-9_-]{1,12}",
        prop::option::of(prop::collection::vec(
            (0usize..40, finite(), finite(), finite()),
            0..10,
        )),
    )
        .prop_filter_map("features need variance", |(raw, user_id, rounds)| {
            let mut entries = BTreeMap::new();
            for (k, (values, n_samples, mu_w, sigma_w)) in raw {
                let mean = FeatureVector::from_raw(values, BAND, 7_000.0 / 84.0).ok()?;
                entries.insert(
                    key(k),
                    TemplateEntry {
                        mean,
                        n_samples,
                        mu_w,
                        sigma_w,
                    },
                );
            }
            let keys: Vec<TemplateKey> = entries.keys().copied().collect();
            let classifier = rounds.map(|r| BoostedClassifier {
                rounds: r
                    .into_iter()
                    .map(|(k, threshold, alpha, error)| BoostRound {
                        stump: WeakClassifier {
                            key: keys[k % keys.len()],
                            threshold,
                        },
                        alpha,
                        error,
                    })
                    .collect(),
            });
            Some(TemplateFile {
                template: UserTemplate {
                    user_id,
                    band: BAND,
                    bin_hz: 7_000.0 / 84.0,
                    entries,
                },
                classifier,
            })
        })
}

proptest! {
    #[test]
    fn template_round_trip_is_exact_and_byte_stable(file in template_file()) {
        let text = save_template(&file).unwrap();
        let back = load_template(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(save_template(&back).unwrap(), text);
    }

    #[test]
    fn seventeen_digits_round_trip_any_finite_real(v in finite()) {
        let mut file = sample();
        file.template.entries.values_mut().next().unwrap().mu_w = v;
        let back = load_template(&save_template(&file).unwrap()).unwrap();
        prop_assert_eq!(back.template.entries.values().next().unwrap().mu_w.to_bits(), v.to_bits());
    }
}

fn sample() -> TemplateFile {
    let mean = FeatureVector::from_raw(vec![1.0, 2.0, 4.0, 8.0], BAND, 83.0).unwrap();
    let mut entries = BTreeMap::new();
    entries.insert(
        key(7),
        TemplateEntry {
            mean,
            n_samples: 3,
            mu_w: 0.9,
            sigma_w: 0.05,
        },
    );
    TemplateFile {
        template: UserTemplate {
            user_id: "S01".into(),
            band: BAND,
            bin_hz: 83.0,
            entries,
        },
        classifier: None,
    }
}

#[test]
fn malformed_templates_report_their_line() {
    let text = save_template(&sample()).unwrap();
    let cases = [
        ("", 1),
        ("hello\n", 1),
        (&*text.replace("user S01", "user"), 2),
        (&*text.replace("entry C1", "entry C9"), 4),
        (&*format!("{text}boost 2\n"), 7),
        (&*format!("{text}garbage\n"), 6),
    ];
    for (bad, line) in cases {
        match load_template(bad) {
            Err(Error::Load { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
            other => panic!("{bad:?}: {other:?}"),
        }
    }
    // a stored feature must stay normalized
    let lines: Vec<&str> = text.lines().collect();
    let skewed = format!(
        "{}\n{}\n{}\n{}\n1 2 3 4\n",
        lines[0], lines[1], lines[2], lines[3]
    );
    assert!(matches!(
        load_template(&skewed),
        Err(Error::Load { line: 5, .. })
    ));
}

fn tiny_dataset(root: &Path) {
    let cfg = DatasetConfig {
        subjects: 2,
        seed: 5,
        phonemes_per_session: 2,
        test_sessions: 1,
        attack_sessions: 1,
        ..DatasetConfig::default()
    };
    simulate_dataset(&cfg, ProbeConfig::default(), root).unwrap();
}

fn failing_subjects(root: &Path) -> (Vec<String>, String) {
    match load_dataset(&root.join(MANIFEST_FILE)) {
        Err(Error::Dataset { subjects, msg }) => (subjects, msg),
        other => panic!("expected a dataset error, got {other:?}"),
    }
}

#[test]
fn simulated_dataset_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    tiny_dataset(dir.path());
    let ds = load_dataset(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(ds.subjects.len(), 2);
    assert_eq!(ds.manifest.sample_rate, 48_000);
    let s = &ds.subject("S01").unwrap().sessions;
    assert_eq!(s.len(), 3 * 5 + 1 + 1);
    for session in s {
        assert_eq!(
            session.recording().unwrap().samples.len(),
            session.n_samples
        );
        assert!(session.annotations.last().unwrap().end <= session.duration() + 1e-6);
        assert!(!session.imu.is_empty());
    }
}

#[test]
fn loader_names_every_broken_subject() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    tiny_dataset(root);
    fs::remove_file(root.join("S00/test_00.imu.tsv")).unwrap();
    let phn = root.join("S01/enroll_00.phn.tsv");
    let mut text = fs::read_to_string(&phn).unwrap();
    text.push_str("999.000000\t999.500000\t[i:]\n");
    fs::write(&phn, text).unwrap();
    let (subjects, msg) = failing_subjects(root);
    assert_eq!(subjects, ["S00", "S01"]);
    assert!(
        msg.contains("test_00") && msg.contains("recording lasts"),
        "{msg}"
    );
}

#[test]
fn loader_checks_sample_rate_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    tiny_dataset(root);
    let manifest = root.join(MANIFEST_FILE);
    let original = fs::read_to_string(&manifest).unwrap();

    fs::write(
        &manifest,
        original.replace("\"sample_rate\": 48000", "\"sample_rate\": 44100"),
    )
    .unwrap();
    let (subjects, msg) = failing_subjects(root);
    assert_eq!(subjects.len(), 2);
    assert!(msg.contains("44100"), "{msg}");

    fs::write(
        &manifest,
        original.replace("EARDYN-DATASET v1", "EARDYN-DATASET v9"),
    )
    .unwrap();
    assert!(failing_subjects(root).1.contains("format"));

    fs::write(&manifest, "{ not json").unwrap();
    assert!(failing_subjects(root).1.contains("invalid manifest"));

    assert!(matches!(
        load_dataset(&root.join("missing.json")),
        Err(Error::Io { .. })
    ));
}
