pub mod auth;
pub mod channel;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod motion;
pub mod phoneme;
pub mod pipeline;
pub mod sim;
pub mod store;
pub mod workflow;

pub use error::{Error, Result};
