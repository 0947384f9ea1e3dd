use std::collections::BTreeMap;

use super::key::TemplateKey;
use super::template::UserTemplate;
use crate::channel::FeatureVector;
use crate::error::{Error, Result};

pub const MIN_EPSILON: f64 = 1e-6;
pub const MAX_EPSILON: f64 = 0.5 - 1e-6;
/// Lower bound on the default number of rounds.
pub const DEFAULT_MIN_ROUNDS: usize = 7;

/// Accepts a window iff its similarity to the key's template is at least
/// `threshold`; abstains on windows with another key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakClassifier {
    pub key: TemplateKey,
    pub threshold: f64,
}

impl WeakClassifier {
    /// +1 accept, -1 reject.
    pub fn vote(&self, similarity: f64) -> f64 {
        if similarity >= self.threshold {
            1.0
        } else {
            -1.0
        }
    }

    /// 0 when `key` is not this stump's key.
    pub fn predict(&self, key: &TemplateKey, similarity: f64) -> f64 {
        if *key == self.key {
            self.vote(similarity)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostRound {
    pub stump: WeakClassifier,
    pub alpha: f64,
    /// Clamped weighted error.
    pub error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoostedClassifier {
    pub rounds: Vec<BoostRound>,
}

impl BoostedClassifier {
    /// `Σ α_t h_t` for a single window.
    pub fn margin(&self, key: &TemplateKey, similarity: f64) -> f64 {
        self.rounds
            .iter()
            .map(|r| r.alpha * r.stump.predict(key, similarity))
            .sum()
    }

    pub fn total_alpha(&self) -> f64 {
        self.rounds.iter().map(|r| r.alpha).sum()
    }

    /// Half the total weight; the decision on `Σ α_t (h_t + 1) / 2` against
    /// this offset equals the sign of the ±1 margin.
    pub fn decision_offset(&self) -> f64 {
        0.5 * self.total_alpha()
    }

    /// `Π_t 2 sqrt(ε_t (1 - ε_t))`, an upper bound on the training error.
    pub fn error_bound(&self) -> f64 {
        self.rounds
            .iter()
            .map(|r| 2.0 * (r.error * (1.0 - r.error)).sqrt())
            .product()
    }

    pub fn has_key(&self, key: &TemplateKey) -> bool {
        self.rounds.iter().any(|r| r.stump.key == *key)
    }
}

/// One training window: its key, its similarity to the template, and whether
/// it belongs to the enrolled user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledScore {
    pub key: TemplateKey,
    pub similarity: f64,
    pub genuine: bool,
}

impl LabeledScore {
    fn y(&self) -> f64 {
        if self.genuine {
            1.0
        } else {
            -1.0
        }
    }
}

/// `max(7, 4 × distinct keys)` so keys that are not perfectly separable still
/// get picked after the separable ones have been down-weighted.
pub fn default_rounds(samples: &[LabeledScore]) -> usize {
    let mut keys: Vec<TemplateKey> = samples.iter().map(|s| s.key).collect();
    keys.sort();
    keys.dedup();
    DEFAULT_MIN_ROUNDS.max(4 * keys.len())
}

/// Starting weights: every key gets the same total, split evenly over its
/// samples. Uniform when all keys have the same number of samples.
pub fn initial_weights(samples: &[LabeledScore]) -> Vec<f64> {
    let mut per_key: BTreeMap<TemplateKey, usize> = BTreeMap::new();
    for s in samples {
        *per_key.entry(s.key).or_default() += 1;
    }
    let keys = per_key.len() as f64;
    samples
        .iter()
        .map(|s| 1.0 / (keys * per_key[&s.key] as f64))
        .collect()
}

fn misclassified(classifier: &BoostedClassifier, s: &LabeledScore) -> bool {
    (classifier.margin(&s.key, s.similarity) >= 0.0) != s.genuine
}

/// Fraction of samples whose margin sign (accept iff margin ≥ 0) disagrees
/// with the label.
pub fn training_error(classifier: &BoostedClassifier, samples: &[LabeledScore]) -> f64 {
    let wrong = samples
        .iter()
        .filter(|s| misclassified(classifier, s))
        .count();
    wrong as f64 / samples.len() as f64
}

/// Training error under [`initial_weights`]; this is the quantity bounded by
/// [`BoostedClassifier::error_bound`].
pub fn weighted_training_error(classifier: &BoostedClassifier, samples: &[LabeledScore]) -> f64 {
    samples
        .iter()
        .zip(initial_weights(samples))
        .filter(|(s, _)| misclassified(classifier, s))
        .map(|(_, w)| w)
        .sum()
}

/// Discrete adaptive boosting over abstaining stumps.
///
/// A stump's weighted error is `W_wrong + W_abstain / 2`, starting from
/// [`initial_weights`] so that every key gets picked. Rounds stop early
/// once the raw error reaches `MIN_EPSILON` or no stump beats chance.
pub fn train_stumps(samples: &[LabeledScore], rounds: usize) -> Result<BoostedClassifier> {
    let positives = samples.iter().filter(|s| s.genuine).count();
    if positives == 0 || positives == samples.len() {
        return Err(Error::Training(
            "boosting needs at least one genuine and one impostor sample".into(),
        ));
    }
    if let Some(s) = samples.iter().find(|s| !s.similarity.is_finite()) {
        return Err(Error::Training(format!(
            "non-finite similarity for key {}",
            s.key
        )));
    }
    let mut by_key: BTreeMap<TemplateKey, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        by_key.entry(s.key).or_default().push(i);
    }
    let candidates: Vec<(TemplateKey, Vec<f64>, &Vec<usize>)> = by_key
        .iter()
        .map(|(k, idx)| {
            (
                *k,
                candidate_thresholds(idx.iter().map(|&i| samples[i].similarity)),
                idx,
            )
        })
        .collect();

    let mut w = initial_weights(samples);
    let mut out = BoostedClassifier::default();
    for round in 0..rounds {
        let mut best: Option<(WeakClassifier, f64)> = None;
        for (key, thresholds, idx) in &candidates {
            let key_weight: f64 = idx.iter().map(|&i| w[i]).sum();
            let abstain = (1.0 - key_weight).max(0.0);
            for &threshold in thresholds {
                let stump = WeakClassifier {
                    key: *key,
                    threshold,
                };
                let wrong: f64 = idx
                    .iter()
                    .filter(|&&i| stump.vote(samples[i].similarity) != samples[i].y())
                    .map(|&i| w[i])
                    .sum();
                let err = wrong + 0.5 * abstain;
                if best.is_none_or(|(_, b)| err < b - 1e-12) {
                    best = Some((stump, err));
                }
            }
        }
        let Some((stump, raw)) = best else {
            return Err(Error::Training(
                "no key has two distinct similarities".into(),
            ));
        };
        if raw >= 0.5 {
            if round == 0 {
                return Err(Error::Training("no stump does better than chance".into()));
            }
            break;
        }
        let error = raw.clamp(MIN_EPSILON, MAX_EPSILON);
        let alpha = 0.5 * ((1.0 - error) / error).ln();
        out.rounds.push(BoostRound {
            stump,
            alpha,
            error,
        });
        for (wi, s) in w.iter_mut().zip(samples) {
            *wi *= (-alpha * s.y() * stump.predict(&s.key, s.similarity)).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);
        if raw <= MIN_EPSILON {
            break;
        }
    }
    Ok(out)
}

/// Midpoints between consecutive distinct values, ascending.
pub fn candidate_thresholds(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Scores every labelled window against `template` and trains a per-user
/// classifier. `rounds: None` uses [`default_rounds`].
pub fn train_boosted(
    template: &UserTemplate,
    positives: &[(TemplateKey, FeatureVector)],
    negatives: &[(TemplateKey, FeatureVector)],
    rounds: Option<usize>,
) -> Result<BoostedClassifier> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Training(
            "boosting needs at least one genuine and one impostor sample".into(),
        ));
    }
    let label = |genuine| {
        move |(key, f): &(TemplateKey, FeatureVector)| -> Result<LabeledScore> {
            let similarity = template
                .score(key, f)?
                .ok_or_else(|| Error::Contract(format!("key {key} is not enrolled")))?;
            Ok(LabeledScore {
                key: *key,
                similarity,
                genuine,
            })
        }
    };
    let samples = positives
        .iter()
        .map(label(true))
        .chain(negatives.iter().map(label(false)))
        .collect::<Result<Vec<_>>>()?;
    train_stumps(&samples, rounds.unwrap_or_else(|| default_rounds(&samples)))
}
