//! Head posture from six-axis inertial traces.
//!
//! Device axes: `z` points up when the head is level, `x` points forward.
//! Pitch is the elevation of `x` read from the averaged gravity vector
//! (positive = looking up). Yaw is the integral of the `z` gyro over the
//! window, starting from zero (positive = turned left).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const POSTURE_THRESHOLD_DEG: f64 = 30.0;
pub const MOVING_GYRO_RMS: f64 = 0.3;
pub const MIN_TRACE_SAMPLES: usize = 10;
pub const MIN_TRACE_SECONDS: f64 = 0.2;
const MIN_GRAVITY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// m/s², device axes.
    pub accel: [f64; 3],
    /// rad/s, device axes.
    pub gyro: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HeadPosture {
    Forward,
    Left,
    Right,
    Up,
    Down,
}

impl HeadPosture {
    pub const ALL: [HeadPosture; 5] = [
        HeadPosture::Forward,
        HeadPosture::Left,
        HeadPosture::Right,
        HeadPosture::Up,
        HeadPosture::Down,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeadPosture::Forward => "FORWARD",
            HeadPosture::Left => "LEFT",
            HeadPosture::Right => "RIGHT",
            HeadPosture::Up => "UP",
            HeadPosture::Down => "DOWN",
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            HeadPosture::Left => HeadPosture::Right,
            HeadPosture::Right => HeadPosture::Left,
            other => other,
        }
    }
}

impl fmt::Display for HeadPosture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeadPosture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HeadPosture::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown head posture {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotionState {
    pub posture: HeadPosture,
    pub moving: bool,
}

/// Orientation estimates behind a [`MotionState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationEstimate {
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    pub gyro_rms: f64,
}

pub fn estimate_orientation(trace: &[ImuSample]) -> Result<OrientationEstimate> {
    if trace.len() < MIN_TRACE_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "IMU trace has {} samples, need at least {MIN_TRACE_SAMPLES}",
            trace.len()
        )));
    }
    for (i, s) in trace.iter().enumerate() {
        let finite = s.t.is_finite()
            && s.accel.iter().all(|v| v.is_finite())
            && s.gyro.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidTrace(format!("sample {i} is not finite")));
        }
        if i > 0 && s.t < trace[i - 1].t {
            return Err(Error::InvalidTrace(format!("sample {i} goes back in time")));
        }
    }
    let span = trace[trace.len() - 1].t - trace[0].t;
    if span < MIN_TRACE_SECONDS {
        return Err(Error::InsufficientData(format!(
            "IMU trace spans {span:.3} s, need at least {MIN_TRACE_SECONDS} s"
        )));
    }

    let n = trace.len() as f64;
    let mut g = [0.0; 3];
    for s in trace {
        for (acc, v) in g.iter_mut().zip(s.accel) {
            *acc += v / n;
        }
    }
    let g_norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    if g_norm < MIN_GRAVITY {
        return Err(Error::InvalidTrace(format!(
            "mean acceleration magnitude {g_norm:.3} m/s² is too small to read gravity"
        )));
    }
    let pitch = g[0].atan2(g[1].hypot(g[2]));

    let yaw: f64 = trace
        .windows(2)
        .map(|w| 0.5 * (w[0].gyro[2] + w[1].gyro[2]) * (w[1].t - w[0].t))
        .sum();

    let gyro_rms = (trace
        .iter()
        .map(|s| s.gyro.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(OrientationEstimate {
        pitch_deg: pitch.to_degrees(),
        yaw_deg: yaw.to_degrees(),
        gyro_rms,
    })
}

pub fn classify_posture(trace: &[ImuSample]) -> Result<MotionState> {
    let est = estimate_orientation(trace)?;
    let t = POSTURE_THRESHOLD_DEG;
    let posture = if est.pitch_deg > t {
        HeadPosture::Up
    } else if est.pitch_deg < -t {
        HeadPosture::Down
    } else if est.yaw_deg > t {
        HeadPosture::Left
    } else if est.yaw_deg < -t {
        HeadPosture::Right
    } else {
        HeadPosture::Forward
    };
    Ok(MotionState {
        posture,
        moving: est.gyro_rms > MOVING_GYRO_RMS,
    })
}

/// Parses `t ax ay az gx gy gz` lines (tab separated; `#` comments skipped).
pub fn parse_imu_trace(text: &str) -> Result<Vec<ImuSample>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split('\t')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("invalid number: {e}"),
            })?;
        if vals.len() != 7 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 7 tab-separated fields, found {}", vals.len()),
            });
        }
        out.push(ImuSample {
            t: vals[0],
            accel: [vals[1], vals[2], vals[3]],
            gyro: [vals[4], vals[5], vals[6]],
        });
    }
    Ok(out)
}

pub fn format_imu_trace(trace: &[ImuSample]) -> String {
    let mut out = String::from("# t\tax\tay\taz\tgx\tgy\tgz\n");
    for s in trace {
        out.push_str(&format!(
            "{:.4}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
            s.t, s.accel[0], s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2]
        ));
    }
    out
}
