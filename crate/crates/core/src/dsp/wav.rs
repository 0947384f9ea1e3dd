//! 16-bit mono PCM WAV ingestion and output.
//!
//! Samples map to `[-1, 1)` by division by 32768; writes multiply by 32768
//! and saturate to the `i16` range.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{ChannelRole, Recording};
use crate::error::{Error, Result};

const SCALE: f64 = 32768.0;

pub fn to_pcm16(x: f64) -> i16 {
    (x * SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn from_pcm16(v: i16) -> f64 {
    v as f64 / SCALE
}

/// Reads a mono 16-bit WAV as a mixed recording.
pub fn read_wav(path: &Path) -> Result<Recording> {
    let wav_err = |msg: String| Error::Wav {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => wav_err(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != SampleFormat::Int {
        return Err(wav_err(format!(
            "expected mono 16-bit PCM, found {} channel(s), {} bits, {:?}",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(from_pcm16))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| wav_err(e.to_string()))?;
    Ok(Recording::new(
        spec.sample_rate,
        samples,
        ChannelRole::Mixed,
    ))
}

/// Sample rate and length of a WAV file, without reading its samples.
pub fn wav_info(path: &Path) -> Result<(u32, usize)> {
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav {
            path: path.to_path_buf(),
            msg: other.to_string(),
        },
    })?;
    Ok((reader.spec().sample_rate, reader.duration() as usize))
}

pub fn write_wav(path: &Path, rec: &Recording) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: rec.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wav_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav {
            path: path.to_path_buf(),
            msg: other.to_string(),
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &rec.samples {
        writer.write_sample(to_pcm16(s)).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)
}
