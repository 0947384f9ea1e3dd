//! Waveform primitives shared by the rest of the pipeline: the inaudible
//! chirp probe, the speech/probe band split, chirp-period framing and WAV
//! ingestion.

mod filter;
mod frame;
mod probe;
pub mod spectrum;
pub mod wav;

pub use filter::{split_bands, BandSplitConfig, BandSplitter};
pub use frame::{frame_chirp_periods, Frame};
pub use probe::{synthesize_probe, ProbeConfig, ProbeSignal};

/// Which part of the captured spectrum a recording carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelRole {
    /// Raw microphone capture: probe reflection plus audible speech.
    Mixed,
    InaudibleOnly,
    AudibleOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
    pub channel_role: ChannelRole,
}

impl Recording {
    pub fn new(sample_rate: u32, samples: Vec<f64>, channel_role: ChannelRole) -> Self {
        Self {
            sample_rate,
            samples,
            channel_role,
        }
    }

    pub fn mixed(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self::new(sample_rate, samples, ChannelRole::Mixed)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        spectrum::rms(&self.samples)
    }
}
