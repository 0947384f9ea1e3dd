//! Enrollment, boosted per-key classification and evaluation metrics.

mod boost;
mod decision;
mod eval;
mod key;
mod template;

pub use boost::{
    candidate_thresholds, default_rounds, initial_weights, train_boosted, train_stumps,
    training_error, weighted_training_error, BoostRound, BoostedClassifier, LabeledScore,
    WeakClassifier, DEFAULT_MIN_ROUNDS, MAX_EPSILON, MIN_EPSILON,
};
pub use decision::{authenticate, AuthDecision};
pub use eval::{evaluate, Counts, EvalReport, RocPoint};
pub use key::{select_template_key, KeyCategory, TemplateKey};
pub use template::{
    enroll, leave_one_out_similarities, Enrollment, TemplateEntry, UserTemplate, MIN_ENROLL_SAMPLES,
};
