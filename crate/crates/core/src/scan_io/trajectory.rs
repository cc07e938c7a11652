//! TUM-format trajectories: `t tx ty tz qx qy qz qw` per line.

use std::fmt::Write as _;

use nalgebra::{Quaternion, UnitQuaternion};
use thiserror::Error;

use crate::geometry::{Pose, Vec3};

/// Quaternions within this distance of unit norm are renormalized on load.
pub const QUATERNION_LOAD_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trajectory line {line}: timestamp {timestamp} is not after the previous one")]
    Ordering { line: usize, timestamp: f64 },
    #[error("trajectory line {line}: quaternion norm {norm} is not unit")]
    Quaternion { line: usize, norm: f64 },
}

pub fn parse_trajectory(bytes: &[u8]) -> Result<Vec<Pose>, TrajectoryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TrajectoryError::Parse {
        line: 1,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let mut poses: Vec<Pose> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let vals = raw
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| TrajectoryError::Parse {
                line,
                message: e.to_string(),
            })?;
        if vals.len() != 8 {
            return Err(TrajectoryError::Parse {
                line,
                message: format!("expected 8 values, found {}", vals.len()),
            });
        }
        if vals.iter().any(|v| !v.is_finite()) || vals[0] < 0.0 {
            return Err(TrajectoryError::Parse {
                line,
                message: "non-finite value or negative timestamp".into(),
            });
        }
        let t = vals[0];
        if let Some(prev) = poses.last() {
            if t <= prev.timestamp {
                return Err(TrajectoryError::Ordering { line, timestamp: t });
            }
        }
        let q = Quaternion::new(vals[7], vals[4], vals[5], vals[6]);
        let norm = q.norm();
        if (norm - 1.0).abs() > QUATERNION_LOAD_TOLERANCE {
            return Err(TrajectoryError::Quaternion { line, norm });
        }
        poses.push(Pose::new(
            t,
            Vec3::new(vals[1], vals[2], vals[3]),
            UnitQuaternion::from_quaternion(q),
        ));
    }
    Ok(poses)
}

/// Writes poses in TUM format. Values use the shortest exact decimal form.
pub fn write_trajectory(poses: &[Pose]) -> String {
    let mut out = String::new();
    for p in poses {
        let q = p.quaternion_xyzw();
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            p.timestamp, p.translation.x, p.translation.y, p.translation.z, q[0], q[1], q[2], q[3]
        );
    }
    out
}
