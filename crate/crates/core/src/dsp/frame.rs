use super::{ChannelRole, ProbeSignal, Recording};
use crate::error::{Error, Result};

/// One chirp period of the inaudible stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<'a> {
    pub start: usize,
    pub samples: &'a [f64],
}

/// Slice an inaudible stream into consecutive, non-overlapping probe-period
/// frames. A trailing partial period is dropped.
pub fn frame_chirp_periods<'a>(rec: &'a Recording, probe: &ProbeSignal) -> Result<Vec<Frame<'a>>> {
    if rec.channel_role != ChannelRole::InaudibleOnly {
        return Err(Error::Contract(format!(
            "framing expects the inaudible branch, got {:?}",
            rec.channel_role
        )));
    }
    if rec.sample_rate != probe.config.sample_rate {
        return Err(Error::Config(format!(
            "recording sample rate {} does not match probe sample rate {}",
            rec.sample_rate, probe.config.sample_rate
        )));
    }
    let period = probe.period_len();
    if period == 0 || rec.samples.len() < period {
        return Err(Error::EmptyInput(format!(
            "recording has {} samples, shorter than one {}-sample probe period",
            rec.samples.len(),
            period
        )));
    }
    Ok(rec
        .samples
        .chunks_exact(period)
        .enumerate()
        .map(|(i, samples)| Frame {
            start: i * period,
            samples,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{synthesize_probe, ProbeConfig};

    fn probe480() -> ProbeSignal {
        synthesize_probe(ProbeConfig {
            guard_gap: 0.0,
            ..ProbeConfig::default()
        })
        .unwrap()
    }

    fn inaudible(n: usize) -> Recording {
        Recording::new(48_000, vec![0.0; n], ChannelRole::InaudibleOnly)
    }

    #[test]
    fn ten_full_frames() {
        let rec = inaudible(4800);
        let frames = frame_chirp_periods(&rec, &probe480()).unwrap();
        assert_eq!(frames.len(), 10);
        let starts: Vec<usize> = frames.iter().map(|f| f.start).collect();
        assert_eq!(starts, (0..10).map(|i| i * 480).collect::<Vec<_>>());
        assert!(frames.iter().all(|f| f.samples.len() == 480));
    }

    #[test]
    fn too_short_is_empty_input() {
        let rec = inaudible(479);
        assert!(matches!(
            frame_chirp_periods(&rec, &probe480()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn trailing_partial_dropped() {
        let rec = inaudible(500);
        let frames = frame_chirp_periods(&rec, &probe480()).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].start, 0);
    }
}
