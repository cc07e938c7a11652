use thiserror::Error;

use crate::geometry::{slerp, Pose};

/// Scans further than this outside the trajectory's time span are rejected.
pub const MAX_EXTRAPOLATION_S: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("scan time {time} s is more than {MAX_EXTRAPOLATION_S} s outside trajectory span [{start}, {end}]")]
    OutOfRange { time: f64, start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedPose {
    pub pose: Pose,
    /// The scan time fell outside the trajectory and the end pose was used.
    pub extrapolated: bool,
}

/// Interpolates the sensor pose at `scan_time`: linear in translation,
/// slerp in rotation. Trajectory must be sorted by timestamp.
pub fn align_scan_pose(scan_time: f64, trajectory: &[Pose]) -> Result<AlignedPose, AlignError> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(AlignError::EmptyTrajectory),
    };
    if scan_time < first.timestamp - MAX_EXTRAPOLATION_S || scan_time > last.timestamp + MAX_EXTRAPOLATION_S {
        return Err(AlignError::OutOfRange {
            time: scan_time,
            start: first.timestamp,
            end: last.timestamp,
        });
    }
    let clamp = |p: &Pose| AlignedPose {
        pose: Pose { timestamp: scan_time, ..*p },
        extrapolated: true,
    };
    if scan_time < first.timestamp {
        return Ok(clamp(first));
    }
    if scan_time > last.timestamp {
        return Ok(clamp(last));
    }
    // First index with timestamp > scan_time.
    let hi = trajectory.partition_point(|p| p.timestamp <= scan_time);
    let before = &trajectory[hi - 1];
    if before.timestamp == scan_time || hi == trajectory.len() {
        return Ok(AlignedPose {
            pose: *before,
            extrapolated: false,
        });
    }
    let after = &trajectory[hi];
    let s = (scan_time - before.timestamp) / (after.timestamp - before.timestamp);
    Ok(AlignedPose {
        pose: Pose::new(
            scan_time,
            before.translation + (after.translation - before.translation) * s,
            slerp(&before.rotation, &after.rotation, s),
        ),
        extrapolated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use std::f64::consts::FRAC_PI_2;

    fn traj() -> Vec<Pose> {
        vec![
            Pose::identity(0.0),
            Pose::from_xyz_rpy(1.0, [2.0, 0.0, 0.0], 0.0, 0.0, FRAC_PI_2),
        ]
    }

    #[test]
    fn exact_hit_returns_pose_verbatim() {
        let t = traj();
        let a = align_scan_pose(1.0, &t).unwrap();
        assert_eq!(a.pose, t[1]);
        assert!(!a.extrapolated);
    }

    #[test]
    fn midpoint_translation_and_rotation() {
        let a = align_scan_pose(0.5, &traj()).unwrap().pose;
        assert!((a.translation - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        let (_, _, yaw) = a.rotation.euler_angles();
        assert!((yaw - FRAC_PI_2 / 2.0).abs() < 1e-6);
    }

    #[test]
    fn clamps_with_flag_within_half_second() {
        let a = align_scan_pose(1.3, &traj()).unwrap();
        assert!(a.extrapolated);
        assert_eq!(a.pose.translation, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(a.pose.timestamp, 1.3);
    }

    #[test]
    fn far_outside_is_error() {
        assert!(matches!(
            align_scan_pose(1.6, &traj()),
            Err(AlignError::OutOfRange { .. })
        ));
        assert_eq!(align_scan_pose(0.0, &[]), Err(AlignError::EmptyTrajectory));
    }

    #[test]
    fn continuity_on_smooth_trajectory() {
        // Smooth trajectory with speed <= 1 m/s and yaw rate <= 0.5 rad/s.
        let poses: Vec<Pose> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.1;
                Pose::from_xyz_rpy(t, [t.sin(), 0.5 * t, 0.1 * t.cos()], 0.0, 0.0, 0.5 * (0.3 * t).sin())
            })
            .collect();
        let eps = 1e-4;
        let mut t = 0.05;
        while t < 19.8 {
            let a = align_scan_pose(t, &poses).unwrap().pose;
            let b = align_scan_pose(t + eps, &poses).unwrap().pose;
            let (dt, dr) = b.motion_from(&a);
            assert!(dt <= 2.0 * eps, "translation jump {dt} at {t}");
            assert!(dr <= 1.0 * eps, "rotation jump {dr} at {t}");
            t += 0.0137;
        }
    }
}
