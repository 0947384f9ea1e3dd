use super::boost::BoostedClassifier;
use super::key::TemplateKey;
use super::template::UserTemplate;
use crate::channel::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AuthDecision {
    pub accept: bool,
    /// `Σ_t α_t h̄_t`, where `h̄_t` averages round `t`'s votes over the session
    /// windows that share its key.
    pub score: f64,
    /// Windows matched by at least one round.
    pub segments_used: usize,
    pub template_keys_used: Vec<TemplateKey>,
}

pub fn authenticate(
    template: &UserTemplate,
    classifier: &BoostedClassifier,
    session: &[(TemplateKey, FeatureVector)],
) -> Result<AuthDecision> {
    if session.is_empty() {
        return Err(Error::Contract("session has no feature windows".into()));
    }
    let mut similarities = Vec::with_capacity(session.len());
    for (key, feature) in session {
        let sim = if classifier.has_key(key) {
            template.score(key, feature)?
        } else {
            None
        };
        similarities.push(sim);
    }

    let mut score = 0.0;
    let mut matched = vec![false; session.len()];
    for round in &classifier.rounds {
        let votes: Vec<f64> = session
            .iter()
            .zip(&similarities)
            .enumerate()
            .filter_map(|(i, ((key, _), sim))| {
                let sim = (*key == round.stump.key).then_some(*sim).flatten()?;
                matched[i] = true;
                Some(round.stump.vote(sim))
            })
            .collect();
        if !votes.is_empty() {
            score += round.alpha * votes.iter().sum::<f64>() / votes.len() as f64;
        }
    }
    let segments_used = matched.iter().filter(|m| **m).count();
    if segments_used == 0 {
        return Err(Error::NoEvidence(
            "no session window matches a trained template key".into(),
        ));
    }
    let mut template_keys_used: Vec<TemplateKey> = session
        .iter()
        .zip(&matched)
        .filter(|(_, m)| **m)
        .map(|((k, _), _)| *k)
        .collect();
    template_keys_used.sort();
    template_keys_used.dedup();
    Ok(AuthDecision {
        accept: score >= 0.0,
        score,
        segments_used,
        template_keys_used,
    })
}
