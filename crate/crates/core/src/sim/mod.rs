//! Synthetic ear-canal population and reflection synthesis.

mod canal;
mod dataset;
mod population;
mod synth;

pub use canal::{
    impulse_response, junction_reflections, lattice_step_response, EarCanalModel, DEFAULT_TAPS,
    SECTIONS, SPEED_OF_SOUND,
};
pub use dataset::{plan_sessions, simulate_spec, DatasetConfig, SessionRole, SessionSpec};
pub use population::{
    category_pattern, mix_seed, sample_population, sample_subject, subject_seed, DeformationKind,
    DeformationProfile, SimSubject, MAX_AREA, MAX_COMPRESSION, MAX_DIAMETER_CHANGE, MAX_EXPANSION,
    MAX_LENGTH, MAX_VOLUME, MIN_AREA, MIN_LENGTH, MIN_VOLUME,
};
pub use synth::{
    imu_trace, plan_utterance, simulate_session, synthesize_reflection, synthesize_reflection_with,
    ScriptEntry, SimSession, SynthOptions, UtteranceItem, TRANSITION_SECONDS,
};
