//! Points, poses and the rigid-body helpers shared by every stage.

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;

/// Largest accepted deviation of a pose quaternion from unit norm.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

/// A single LiDAR return in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    /// Return strength, `0..=255`.
    pub intensity: f32,
}

impl Point {
    pub fn new(x: f32, y: f32, z: f32, intensity: f32) -> Self {
        Self { x, y, z, intensity }
    }

    pub fn from_position(p: &Vec3, intensity: f32) -> Self {
        Self::new(p.x as f32, p.y as f32, p.z as f32, intensity)
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x as f64, self.y as f64, self.z as f64)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.intensity.is_finite()
    }
}

/// Sensor pose in the world frame (world ← sensor) at a timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: UnitQuaternion<f64>,
    /// Seconds.
    pub timestamp: f64,
}

impl Pose {
    pub fn new(timestamp: f64, translation: Vec3, rotation: UnitQuaternion<f64>) -> Self {
        Self {
            translation,
            rotation,
            timestamp,
        }
    }

    pub fn identity(timestamp: f64) -> Self {
        Self::new(timestamp, Vec3::zeros(), UnitQuaternion::identity())
    }

    /// Pose from translation and yaw/pitch/roll angles in radians.
    pub fn from_xyz_rpy(timestamp: f64, xyz: [f64; 3], roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::new(
            timestamp,
            Vec3::new(xyz[0], xyz[1], xyz[2]),
            UnitQuaternion::from_euler_angles(roll, pitch, yaw),
        )
    }

    /// Builds a pose from a raw `(qx, qy, qz, qw)` quaternion that must
    /// already be unit norm within [`QUATERNION_NORM_TOLERANCE`].
    pub fn from_raw(timestamp: f64, xyz: [f64; 3], qxyzw: [f64; 4]) -> Option<Self> {
        let q = Quaternion::new(qxyzw[3], qxyzw[0], qxyzw[1], qxyzw[2]);
        if !timestamp.is_finite()
            || timestamp < 0.0
            || xyz.iter().any(|v| !v.is_finite())
            || (q.norm() - 1.0).abs() > QUATERNION_NORM_TOLERANCE
        {
            return None;
        }
        Some(Self::new(
            timestamp,
            Vec3::new(xyz[0], xyz[1], xyz[2]),
            UnitQuaternion::new_unchecked(q),
        ))
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }

    /// Maps a sensor-frame point into the world frame.
    pub fn to_world(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Maps a world-frame point into this sensor frame.
    pub fn to_sensor(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse() * (p - self.translation)
    }

    /// Rigid transform taking points expressed in `self` into `target`'s frame.
    pub fn transform_into(&self, target: &Pose) -> Isometry3<f64> {
        target.isometry().inverse() * self.isometry()
    }

    /// Translation norm and geodesic rotation angle (radians) between two poses.
    pub fn motion_from(&self, other: &Pose) -> (f64, f64) {
        let rel = other.isometry().inverse() * self.isometry();
        (rel.translation.vector.norm(), rel.rotation.angle())
    }

    /// `[qx, qy, qz, qw]`.
    pub fn quaternion_xyzw(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.i, q.j, q.k, q.w]
    }
}

/// Shortest-path spherical interpolation. `try_slerp` only fails for
/// antipodal 4-vectors, which the shorter-arc flip rules out.
pub fn slerp(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, s: f64) -> UnitQuaternion<f64> {
    a.try_slerp(b, s, 1e-12).unwrap_or(*a)
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.extend(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn extend(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn extents(&self) -> Vec3 {
        if self.is_empty() {
            Vec3::zeros()
        } else {
            self.max - self.min
        }
    }

    pub fn volume(&self) -> f64 {
        let e = self.extents();
        e.x * e.y * e.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Box enclosing this one after a rigid transform.
    pub fn transformed(&self, pose: &Pose) -> Aabb {
        Aabb::from_points(self.corners().iter().map(|c| pose.to_world(c)).collect::<Vec<_>>().iter())
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let d = (self.min - p).sup(&(p - self.max)).sup(&Vec3::zeros());
        d.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn slerp_midpoint_of_quarter_turn_is_eighth_turn() {
        let a = UnitQuaternion::identity();
        let b = UnitQuaternion::from_euler_angles(0.0, 0.0, FRAC_PI_2);
        let m = slerp(&a, &b, 0.5);
        let (_, _, yaw) = m.euler_angles();
        assert!((yaw - FRAC_PI_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn slerp_takes_shortest_path_for_negated_quaternion() {
        let a = UnitQuaternion::from_euler_angles(0.0, 0.0, 0.2);
        let b = UnitQuaternion::new_unchecked(-*UnitQuaternion::from_euler_angles(0.0, 0.0, 0.4).quaternion());
        let m = slerp(&a, &b, 0.5);
        assert!((m.angle() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn wrap_degrees_range() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(190.0), -170.0);
        assert_eq!(wrap_degrees(-540.0), 180.0);
    }

    #[test]
    fn aabb_distance() {
        let b = Aabb::from_points([Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)].iter());
        assert_eq!(b.distance_to(&Vec3::new(0.5, 0.5, 0.5)), 0.0);
        assert!((b.distance_to(&Vec3::new(3.0, 0.5, 0.5)) - 2.0).abs() < 1e-12);
        assert!((b.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn motion_between_poses() {
        let a = Pose::identity(0.0);
        let b = Pose::from_xyz_rpy(1.0, [0.1, 0.0, 0.0], 0.0, 0.0, 35f64.to_radians());
        let (t, r) = b.motion_from(&a);
        assert!((t - 0.1).abs() < 1e-12);
        assert!((r.to_degrees() - 35.0).abs() < 1e-9);
    }
}
