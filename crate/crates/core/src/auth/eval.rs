use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized as `[threshold, tar, far]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct RocPoint {
    pub threshold: f64,
    pub tar: f64,
    pub far: f64,
}

impl From<[f64; 3]> for RocPoint {
    fn from([threshold, tar, far]: [f64; 3]) -> Self {
        Self {
            threshold,
            tar,
            far,
        }
    }
}

impl From<RocPoint> for [f64; 3] {
    fn from(p: RocPoint) -> Self {
        [p.threshold, p.tar, p.far]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub true_accept: usize,
    pub false_reject: usize,
    pub true_reject: usize,
    pub false_accept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub auc: f64,
    /// Ascending threshold; starts at (1, 1) and ends at (0, 0).
    pub roc: Vec<RocPoint>,
    pub counts: Counts,
}

impl EvalReport {
    pub fn far(&self) -> f64 {
        let c = self.counts;
        ratio(c.false_accept, c.false_accept + c.true_reject)
    }

    pub fn frr(&self) -> f64 {
        let c = self.counts;
        ratio(c.false_reject, c.false_reject + c.true_accept)
    }

    /// Highest TAR among ROC points with FAR ≤ `max_far`.
    pub fn tar_at_far(&self, max_far: f64) -> f64 {
        self.roc
            .iter()
            .filter(|p| p.far <= max_far)
            .map(|p| p.tar)
            .fold(0.0, f64::max)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Genuine scores are the positive class; a score is accepted iff it is at
/// least the threshold.
pub fn evaluate(genuine: &[f64], impostor: &[f64], threshold: f64) -> Result<EvalReport> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::Contract(
            "evaluation needs at least one genuine and one impostor score".into(),
        ));
    }
    if genuine.iter().chain(impostor).any(|s| s.is_nan()) {
        return Err(Error::Contract("scores must not be NaN".into()));
    }
    let accepted = |scores: &[f64], t: f64| scores.iter().filter(|&&s| s >= t).count();
    let ta = accepted(genuine, threshold);
    let fa = accepted(impostor, threshold);
    let counts = Counts {
        true_accept: ta,
        false_reject: genuine.len() - ta,
        true_reject: impostor.len() - fa,
        false_accept: fa,
    };
    let recall = ratio(ta, genuine.len());
    let precision = ratio(ta, ta + fa);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let accuracy = ratio(
        counts.true_accept + counts.true_reject,
        genuine.len() + impostor.len(),
    );

    let mut thresholds: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let beyond = thresholds[thresholds.len() - 1] + 1.0;
    thresholds.push(if beyond.is_finite() {
        beyond
    } else {
        f64::INFINITY
    });

    let counts_at: Vec<(u64, u64)> = thresholds
        .iter()
        .map(|&t| (accepted(genuine, t) as u64, accepted(impostor, t) as u64))
        .collect();
    let roc = thresholds
        .iter()
        .zip(&counts_at)
        .map(|(&t, &(g, i))| RocPoint {
            threshold: t,
            tar: g as f64 / genuine.len() as f64,
            far: i as f64 / impostor.len() as f64,
        })
        .collect();
    // trapezoid area in integer units, so tied score lists give exactly 1/2
    let twice_area: u128 = counts_at
        .windows(2)
        .map(|p| (p[0].1 - p[1].1) as u128 * (p[0].0 + p[1].0) as u128)
        .sum();
    let auc = twice_area as f64 / (2 * genuine.len() as u128 * impostor.len() as u128) as f64;

    Ok(EvalReport {
        threshold,
        accuracy,
        recall,
        precision,
        f1,
        auc,
        roc,
        counts,
    })
}
