//! Synthetic scene description: a tunnel with a floor, placed objects,
//! wall protrusions, a sensor trajectory and a beam model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Pose, Vec3};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read scene: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scene: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scene: {0}")]
    Invalid(String),
}

/// How a surface's intensity is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensityProfile {
    /// Fixed value per surface, per-return noise `std`.
    Homogeneous { mean: f64, std: f64 },
    /// Square patches of side `patch_m`, each taking one of `levels`
    /// (chosen by a hash of the patch cell), with per-return noise `std`.
    Mixture { levels: Vec<f64>, patch_m: f64, std: f64 },
}

impl IntensityProfile {
    pub fn constant(value: f64) -> Self {
        IntensityProfile::Homogeneous { mean: value, std: 0.0 }
    }

    /// Noise-free intensity at a world point.
    pub fn base(&self, p: &Vec3) -> f64 {
        match self {
            IntensityProfile::Homogeneous { mean, .. } => *mean,
            IntensityProfile::Mixture { levels, patch_m, .. } => {
                if levels.is_empty() {
                    return 0.0;
                }
                let cell = [
                    (p.x / patch_m).floor() as i64,
                    (p.y / patch_m).floor() as i64,
                    (p.z / patch_m).floor() as i64,
                ];
                levels[(hash3(cell) % levels.len() as u64) as usize]
            }
        }
    }

    pub fn std(&self) -> f64 {
        match self {
            IntensityProfile::Homogeneous { std, .. } | IntensityProfile::Mixture { std, .. } => *std,
        }
    }

    fn validate(&self, what: &str) -> Result<(), String> {
        let in_range = |v: f64| (0.0..=255.0).contains(&v);
        match self {
            IntensityProfile::Homogeneous { mean, std } => {
                if !in_range(*mean) || !(*std >= 0.0) {
                    return Err(format!("{what}: intensity mean must be in [0,255] and std >= 0"));
                }
            }
            IntensityProfile::Mixture { levels, patch_m, std } => {
                if levels.is_empty() || !levels.iter().all(|v| in_range(*v)) {
                    return Err(format!("{what}: mixture levels must be non-empty and in [0,255]"));
                }
                if !(*patch_m > 0.0) || !(*std >= 0.0) {
                    return Err(format!("{what}: patch_m must be > 0 and std >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer over a lattice cell.
pub(crate) fn hash3(c: [i64; 3]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for v in c {
        h ^= v as u64;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// Tunnel along world +x over `[0, length_m]`: a horizontal cylinder around
/// the line `y = 0, z = axis_z_m`, cut by the floor plane `z = floor_z_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tunnel {
    pub radius_m: f64,
    pub length_m: f64,
    #[serde(default)]
    pub axis_z_m: f64,
    pub floor_z_m: f64,
    /// Amplitude of the radial wall relief.
    #[serde(default)]
    pub wall_roughness_m: f64,
    pub wall_intensity: IntensityProfile,
    pub floor_intensity: IntensityProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Box { size_m: [f64; 3] },
    Cylinder { radius_m: f64, height_m: f64 },
    /// Standing figure: a body cylinder topped by a cubic head.
    Mannequin { height_m: f64, radius_m: f64 },
}

/// One solid piece of an object, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Yawed box: center, half extents, yaw (rad).
    Box { center: Vec3, half: Vec3, yaw: f64 },
    /// Vertical cylinder standing on `base`.
    Cylinder { base: Vec3, radius: f64, height: f64 },
}

impl Primitive {
    pub fn aabb(&self) -> Aabb {
        match *self {
            Primitive::Box { center, half, yaw } => {
                let (s, c) = yaw.sin_cos();
                let hx = (c * half.x).abs() + (s * half.y).abs();
                let hy = (s * half.x).abs() + (c * half.y).abs();
                let h = Vec3::new(hx, hy, half.z);
                Aabb {
                    min: center - h,
                    max: center + h,
                }
            }
            Primitive::Cylinder { base, radius, height } => Aabb {
                min: base - Vec3::new(radius, radius, 0.0),
                max: base + Vec3::new(radius, radius, height),
            },
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Primitive::Box { half, .. } => 8.0 * half.x * half.y * half.z,
            Primitive::Cylinder { radius, height, .. } => std::f64::consts::PI * radius * radius * height,
        }
    }
}

/// A placed object. `position_m` is the center of its footprint on the
/// ground (the bottom face), `yaw_deg` rotates it about world z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    #[serde(default)]
    pub name: String,
    pub shape: Shape,
    pub position_m: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    pub intensity: IntensityProfile,
    #[serde(default)]
    pub is_artifact: bool,
}

impl SceneObject {
    pub fn primitives(&self) -> Vec<Primitive> {
        let base = Vec3::from(self.position_m);
        let yaw = self.yaw_deg.to_radians();
        match self.shape {
            Shape::Box { size_m } => vec![Primitive::Box {
                center: base + Vec3::new(0.0, 0.0, size_m[2] / 2.0),
                half: Vec3::from(size_m) / 2.0,
                yaw,
            }],
            Shape::Cylinder { radius_m, height_m } => vec![Primitive::Cylinder {
                base,
                radius: radius_m,
                height: height_m,
            }],
            Shape::Mannequin { height_m, radius_m } => {
                let head = (height_m * 0.15).min(2.0 * radius_m);
                let body = height_m - head;
                vec![
                    Primitive::Cylinder {
                        base,
                        radius: radius_m,
                        height: body,
                    },
                    Primitive::Box {
                        center: base + Vec3::new(0.0, 0.0, body + head / 2.0),
                        half: Vec3::repeat(head / 2.0),
                        yaw,
                    },
                ]
            }
        }
    }

    pub fn aabb(&self) -> Aabb {
        self.primitives()
            .iter()
            .fold(Aabb::empty(), |acc, p| acc.union(&p.aabb()))
    }

    pub fn volume(&self) -> f64 {
        self.primitives().iter().map(Primitive::volume).sum()
    }
}

/// Spinning multi-beam LiDAR: `beams` channels evenly spread over
/// `±vertical_half_fov_deg`, one return per `azimuth_step_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamModel {
    pub beams: usize,
    pub vertical_half_fov_deg: f64,
    pub azimuth_step_deg: f64,
    pub range_noise_m: f64,
    pub intensity_noise: f64,
    pub min_range_m: f64,
    pub max_range_m: f64,
}

impl Default for BeamModel {
    fn default() -> Self {
        Self {
            beams: 16,
            vertical_half_fov_deg: 15.0,
            azimuth_step_deg: 0.2,
            range_noise_m: 0.01,
            intensity_noise: 1.0,
            min_range_m: 0.3,
            max_range_m: 100.0,
        }
    }
}

impl BeamModel {
    pub fn elevations_deg(&self) -> Vec<f64> {
        if self.beams == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.vertical_half_fov_deg / (self.beams - 1) as f64;
        (0..self.beams)
            .map(|k| -self.vertical_half_fov_deg + k as f64 * step)
            .collect()
    }

    pub fn azimuth_count(&self) -> usize {
        (360.0 / self.azimuth_step_deg).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub t: f64,
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy_deg: [f64; 3],
}

/// Straight-line traverse at constant speed with a sinusoidal body sway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearTraverse {
    pub start_m: [f64; 3],
    pub end_m: [f64; 3],
    pub scans: usize,
    pub scan_rate_hz: f64,
    #[serde(default)]
    pub start_time_s: f64,
    #[serde(default)]
    pub pitch_amplitude_deg: f64,
    #[serde(default)]
    pub roll_amplitude_deg: f64,
    #[serde(default = "default_sway_period")]
    pub sway_period_s: f64,
}

fn default_sway_period() -> f64 {
    1.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrajectorySpec {
    Poses(Vec<PoseSpec>),
    Linear(LinearTraverse),
}

impl TrajectorySpec {
    pub fn poses(&self) -> Vec<Pose> {
        match self {
            TrajectorySpec::Poses(list) => list
                .iter()
                .map(|p| {
                    let [r, pi, y] = p.rpy_deg;
                    Pose::from_xyz_rpy(p.t, p.xyz, r.to_radians(), pi.to_radians(), y.to_radians())
                })
                .collect(),
            TrajectorySpec::Linear(l) => {
                let a = Vec3::from(l.start_m);
                let b = Vec3::from(l.end_m);
                let d = b - a;
                let yaw = d.y.atan2(d.x);
                let n = l.scans;
                (0..n)
                    .map(|k| {
                        let s = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
                        let t = l.start_time_s + k as f64 / l.scan_rate_hz;
                        let phase = std::f64::consts::TAU * (t - l.start_time_s) / l.sway_period_s;
                        let pitch = l.pitch_amplitude_deg.to_radians() * phase.sin();
                        let roll = l.roll_amplitude_deg.to_radians() * (0.5 * phase).cos();
                        let p = a + d * s;
                        Pose::from_xyz_rpy(t, p.into(), roll, pitch, yaw)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticScene {
    #[serde(default)]
    pub name: String,
    pub tunnel: Tunnel,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    /// Rocks and other wall relief: part of the environment, so proposals
    /// on them are false positives.
    #[serde(default)]
    pub protrusions: Vec<SceneObject>,
    #[serde(default)]
    pub beam: BeamModel,
    pub trajectory: TrajectorySpec,
}

impl SyntheticScene {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: SyntheticScene = serde_json::from_str(text)?;
        scene.validate(crate::segmenter::SegmenterConfig::default().volume_bounds())?;
        Ok(scene)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SceneError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.trajectory.poses()
    }

    /// Checks geometric sanity, object overlap, and that artifacts fall
    /// within the artifact volume bounds `(min, max)`.
    pub fn validate(&self, volume_bounds: (f64, f64)) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        let t = &self.tunnel;
        if !(t.radius_m > 0.0 && t.length_m > 0.0) {
            return bad("tunnel radius and length must be positive".into());
        }
        if !(t.floor_z_m > t.axis_z_m - t.radius_m && t.floor_z_m < t.axis_z_m + t.radius_m) {
            return bad("floor must cut the tunnel cylinder".into());
        }
        if !(t.wall_roughness_m >= 0.0 && t.wall_roughness_m < 0.25 * t.radius_m) {
            return bad("wall roughness must be in [0, radius/4)".into());
        }
        t.wall_intensity.validate("wall").map_err(SceneError::Invalid)?;
        t.floor_intensity.validate("floor").map_err(SceneError::Invalid)?;
        let b = &self.beam;
        if b.beams == 0 || !(b.azimuth_step_deg > 0.0) || !(b.min_range_m < b.max_range_m) {
            return bad("beam model needs beams > 0, azimuth step > 0, min range < max range".into());
        }
        if !(b.range_noise_m >= 0.0 && b.intensity_noise >= 0.0) {
            return bad("noise levels must be non-negative".into());
        }
        for (i, o) in self.objects.iter().chain(&self.protrusions).enumerate() {
            o.intensity.validate(&format!("object {i}")).map_err(SceneError::Invalid)?;
            let dims_ok = match o.shape {
                Shape::Box { size_m } => size_m.iter().all(|s| *s > 0.0),
                Shape::Cylinder { radius_m, height_m } | Shape::Mannequin { height_m, radius_m } => {
                    radius_m > 0.0 && height_m > 0.0
                }
            };
            if !dims_ok {
                return bad(format!("object {i} has non-positive dimensions"));
            }
        }
        let (vmin, vmax) = volume_bounds;
        for o in self.objects.iter().filter(|o| o.is_artifact) {
            let v = o.volume();
            if v < vmin || v > vmax {
                return bad(format!("artifact '{}' volume {v:.3} m3 outside [{vmin}, {vmax}]", o.name));
            }
        }
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if overlaps(&a.aabb(), &b.aabb()) {
                    return bad(format!("objects '{}' and '{}' overlap", a.name, b.name));
                }
            }
        }
        let poses = self.poses();
        if poses.is_empty() {
            return bad("trajectory is empty".into());
        }
        if poses.windows(2).any(|w| w[1].timestamp <= w[0].timestamp) {
            return bad("trajectory timestamps must increase".into());
        }
        Ok(())
    }
}

fn overlaps(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|k| a.min[k] < b.max[k] && b.min[k] < a.max[k])
}
