use std::collections::BTreeMap;

use super::key::TemplateKey;
use crate::channel::{similarity, FeatureVector};
use crate::error::{Error, Result};

pub const MIN_ENROLL_SAMPLES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateEntry {
    /// Unit-norm, mean-zero average of the enrolled features.
    pub mean: FeatureVector,
    pub n_samples: usize,
    /// Mean similarity of the enrolled samples to `mean`.
    pub mu_w: f64,
    /// Population standard deviation of those similarities.
    pub sigma_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserTemplate {
    pub user_id: String,
    pub band: (f64, f64),
    pub bin_hz: f64,
    pub entries: BTreeMap<TemplateKey, TemplateEntry>,
}

impl UserTemplate {
    pub fn get(&self, key: &TemplateKey) -> Option<&TemplateEntry> {
        self.entries.get(key)
    }

    pub fn bins(&self) -> usize {
        self.entries.values().next().map_or(0, |e| e.mean.len())
    }

    /// Similarity of `feature` to the enrolled mean for `key`, if enrolled.
    pub fn score(&self, key: &TemplateKey, feature: &FeatureVector) -> Result<Option<f64>> {
        self.entries
            .get(key)
            .map(|e| similarity(&e.mean, feature))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrollment {
    pub template: UserTemplate,
    /// Keys left out for having fewer than [`MIN_ENROLL_SAMPLES`] samples or a
    /// degenerate mean.
    pub skipped_keys: usize,
}

pub fn enroll(user_id: &str, samples: &[(TemplateKey, FeatureVector)]) -> Result<Enrollment> {
    let Some((_, first)) = samples.first() else {
        return Err(Error::InsufficientEnrollment(
            "no enrollment samples".into(),
        ));
    };
    if let Some((k, f)) = samples.iter().find(|(_, f)| !f.compatible_with(first)) {
        return Err(Error::Shape(format!(
            "enrollment feature for {k} has {} bins over {:?}, expected {} over {:?}",
            f.len(),
            f.band,
            first.len(),
            first.band
        )));
    }

    let mut grouped: BTreeMap<TemplateKey, Vec<&FeatureVector>> = BTreeMap::new();
    for (k, f) in samples {
        grouped.entry(*k).or_default().push(f);
    }
    let mut entries = BTreeMap::new();
    let mut skipped_keys = 0;
    for (key, feats) in grouped {
        if feats.len() < MIN_ENROLL_SAMPLES {
            skipped_keys += 1;
            continue;
        }
        let n = feats.len() as f64;
        let mut sum = vec![0.0; first.len()];
        for f in &feats {
            for (s, v) in sum.iter_mut().zip(&f.values) {
                *s += v / n;
            }
        }
        let Ok(mean) = FeatureVector::from_raw(sum, first.band, first.bin_hz) else {
            skipped_keys += 1;
            continue;
        };
        let sims = feats
            .iter()
            .map(|f| similarity(&mean, f))
            .collect::<Result<Vec<f64>>>()?;
        let mu_w = sims.iter().sum::<f64>() / n;
        let sigma_w = (sims.iter().map(|s| (s - mu_w).powi(2)).sum::<f64>() / n).sqrt();
        entries.insert(
            key,
            TemplateEntry {
                mean,
                n_samples: feats.len(),
                mu_w,
                sigma_w,
            },
        );
    }
    if entries.is_empty() {
        return Err(Error::InsufficientEnrollment(format!(
            "no key has at least {MIN_ENROLL_SAMPLES} usable samples"
        )));
    }
    Ok(Enrollment {
        template: UserTemplate {
            user_id: user_id.to_string(),
            band: first.band,
            bin_hz: first.bin_hz,
            entries,
        },
        skipped_keys,
    })
}

/// Similarity of each sample to the renormalized mean of the other samples
/// sharing its key; `None` when the key has fewer than two other samples or
/// their mean is degenerate.
pub fn leave_one_out_similarities(
    samples: &[(TemplateKey, FeatureVector)],
) -> Result<Vec<Option<f64>>> {
    let mut sums: BTreeMap<TemplateKey, (Vec<f64>, usize)> = BTreeMap::new();
    for (k, f) in samples {
        let (sum, n) = sums.entry(*k).or_insert_with(|| (vec![0.0; f.len()], 0));
        if sum.len() != f.len() {
            return Err(Error::Shape(format!(
                "feature length mismatch under key {k}"
            )));
        }
        sum.iter_mut().zip(&f.values).for_each(|(s, v)| *s += v);
        *n += 1;
    }
    samples
        .iter()
        .map(|(k, f)| {
            let (sum, n) = &sums[k];
            if *n < MIN_ENROLL_SAMPLES {
                return Ok(None);
            }
            let rest: Vec<f64> = sum.iter().zip(&f.values).map(|(s, v)| s - v).collect();
            match FeatureVector::from_raw(rest, f.band, f.bin_hz) {
                Ok(mean) => similarity(&mean, f).map(Some),
                Err(_) => Ok(None),
            }
        })
        .collect()
}
