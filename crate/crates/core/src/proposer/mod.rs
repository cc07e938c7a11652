//! Pan/tilt/zoom waypoints for surviving clusters, deduplicated against a
//! voxel map of what the camera has already observed.

mod voxel;
mod zoom;

pub use voxel::{VoxelKey, VoxelObservationMap, VoxelState};
pub use zoom::{ZoomLevel, ZoomSchedule};

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_degrees, Aabb, Pose, Vec3};
use crate::segmenter::ObjectCluster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposerConfig {
    pub voxel_size_m: f64,
    /// Minimum fraction of unobserved voxels for a cluster to be proposed.
    pub novelty_threshold: f64,
    /// Extra depth marked observed behind a proposed cluster, meters.
    pub depth_margin_m: f64,
    /// Camera origin in the LiDAR frame, meters.
    pub camera_translation_m: [f64; 3],
    /// Camera orientation in the LiDAR frame as roll, pitch, yaw, degrees.
    pub camera_rpy_deg: [f64; 3],
    pub zoom_schedule: ZoomSchedule,
}

impl Default for ProposerConfig {
    fn default() -> Self {
        Self {
            voxel_size_m: 0.2,
            novelty_threshold: 0.2,
            depth_margin_m: 0.5,
            camera_translation_m: [0.0; 3],
            camera_rpy_deg: [0.0; 3],
            zoom_schedule: ZoomSchedule::default(),
        }
    }
}

impl ProposerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.voxel_size_m > 0.0) {
            return Err("proposer.voxel_size_m must be > 0".into());
        }
        if !(self.novelty_threshold > 0.0 && self.novelty_threshold <= 1.0) {
            return Err("proposer.novelty_threshold must be in (0, 1]".into());
        }
        if !(self.depth_margin_m >= 0.0) {
            return Err("proposer.depth_margin_m must be >= 0".into());
        }
        Ok(())
    }

    /// LiDAR ← camera transform.
    pub fn camera_extrinsic(&self) -> Isometry3<f64> {
        let [tx, ty, tz] = self.camera_translation_m;
        let [r, p, y] = self.camera_rpy_deg.map(f64::to_radians);
        Isometry3::from_parts(
            Translation3::new(tx, ty, tz),
            UnitQuaternion::from_euler_angles(r, p, y),
        )
    }
}

/// A camera waypoint aimed at one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub id: u64,
    pub query_index: u64,
    /// Data time of the query that produced it, seconds.
    pub timestamp: f64,
    pub centroid_sensor: Vec3,
    pub centroid_world: Vec3,
    /// Degrees in (-180, 180].
    pub pan_deg: f64,
    /// Degrees in [-90, 90].
    pub tilt_deg: f64,
    pub zoom: u32,
    pub fov_deg: f64,
    /// Camera-to-centroid distance, meters.
    pub range_m: f64,
    pub point_count: usize,
    pub volume_m3: f64,
    pub mean_intensity: f64,
    /// World-frame box around the cluster.
    pub aabb_world: Aabb,
    /// Range exceeded the zoom schedule; the last zoom level was used.
    pub beyond_zoom_range: bool,
}

impl Proposal {
    /// Unit pointing direction in the camera frame.
    pub fn direction(&self) -> Vec3 {
        direction_from_pan_tilt(self.pan_deg, self.tilt_deg)
    }
}

pub fn direction_from_pan_tilt(pan_deg: f64, tilt_deg: f64) -> Vec3 {
    let (p, t) = (pan_deg.to_radians(), tilt_deg.to_radians());
    Vec3::new(t.cos() * p.cos(), t.cos() * p.sin(), t.sin())
}

/// Pan/tilt toward the cluster centroid in the camera frame, zoom from its
/// range. The returned proposal has `id` and `query_index` zeroed.
pub fn make_waypoint(
    cluster: &ObjectCluster,
    pose: &Pose,
    schedule: &ZoomSchedule,
    camera: &Isometry3<f64>,
) -> Proposal {
    let c = camera.inverse_transform_point(&Point3::from(cluster.centroid)).coords;
    let pan_deg = wrap_degrees(c.y.atan2(c.x).to_degrees());
    let tilt_deg = c.z.atan2(c.x.hypot(c.y)).to_degrees();
    let range_m = c.norm();
    let (zoom, level, beyond) = schedule.select(range_m);
    Proposal {
        id: 0,
        query_index: 0,
        timestamp: pose.timestamp,
        centroid_sensor: cluster.centroid,
        centroid_world: pose.to_world(&cluster.centroid),
        pan_deg,
        tilt_deg,
        zoom,
        fov_deg: level.fov_deg,
        range_m,
        point_count: cluster.point_count,
        volume_m3: cluster.volume,
        mean_intensity: cluster.mean_intensity,
        aabb_world: cluster.aabb.transformed(pose),
        beyond_zoom_range: beyond,
    }
}

/// Fraction of voxels overlapping `aabb_world` that are not yet observed.
pub fn unobserved_fraction(aabb_world: &Aabb, map: &VoxelObservationMap) -> f64 {
    let (mut total, mut fresh) = (0usize, 0usize);
    for k in map.keys_in(aabb_world) {
        total += 1;
        if !map.is_observed(k) {
            fresh += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        fresh as f64 / total as f64
    }
}

/// Whether enough of the cluster's world-frame box is unobserved.
pub fn check_novelty(cluster: &ObjectCluster, pose: &Pose, map: &VoxelObservationMap, threshold: f64) -> bool {
    unobserved_fraction(&cluster.aabb.transformed(pose), map) >= threshold
}

/// Marks every voxel whose center lies inside the viewing cone of
/// `proposal` (apex at the camera, half-angle `fov_deg / 2`, out to
/// `max_range`). Returns the number of voxels marked.
///
/// `camera_world` is the world ← camera transform at proposal time.
pub fn mark_observed(
    proposal: &Proposal,
    map: &mut VoxelObservationMap,
    camera_world: &Isometry3<f64>,
    fov_deg: f64,
    max_range: f64,
    time: f64,
) -> usize {
    let apex = camera_world.translation.vector;
    let axis = camera_world.rotation * proposal.direction();
    let half = (fov_deg / 2.0).to_radians().min(std::f64::consts::FRAC_PI_2);
    let cos_half = half.cos();

    // Bound the cone sector by the apex plus two disks of its radius at the
    // near and far ends of the spherical cap.
    let radius = max_range * half.sin();
    let mut bound = Aabb::empty();
    bound.extend(&apex);
    for dist in [max_range * cos_half, max_range] {
        let c = apex + axis * dist;
        let spread = Vec3::new(
            radius * (1.0 - axis.x * axis.x).max(0.0).sqrt(),
            radius * (1.0 - axis.y * axis.y).max(0.0).sqrt(),
            radius * (1.0 - axis.z * axis.z).max(0.0).sqrt(),
        );
        bound.extend(&(c - spread));
        bound.extend(&(c + spread));
    }

    let keys: Vec<VoxelKey> = map
        .keys_in(&bound)
        .filter(|&k| {
            let v = map.center_of(k) - apex;
            let d = v.norm();
            d <= max_range && (d == 0.0 || v.dot(&axis) >= d * cos_half)
        })
        .collect();
    for &k in &keys {
        map.mark(k, time);
    }
    keys.len()
}

/// Stateful proposal generator owning the observation map and id counter.
#[derive(Debug, Clone)]
pub struct Proposer {
    config: ProposerConfig,
    camera: Isometry3<f64>,
    map: VoxelObservationMap,
    next_id: u64,
}

impl Proposer {
    pub fn new(config: ProposerConfig) -> Self {
        Self {
            camera: config.camera_extrinsic(),
            map: VoxelObservationMap::new(config.voxel_size_m),
            config,
            next_id: 0,
        }
    }

    pub fn config(&self) -> &ProposerConfig {
        &self.config
    }

    pub fn map(&self) -> &VoxelObservationMap {
        &self.map
    }

    pub fn reset_map(&mut self) {
        self.map.clear();
    }

    /// Clusters that pass the novelty check against the current map.
    pub fn novel_clusters(&self, clusters: &[ObjectCluster], pose: &Pose) -> Vec<ObjectCluster> {
        clusters
            .iter()
            .filter(|c| check_novelty(c, pose, &self.map, self.config.novelty_threshold))
            .cloned()
            .collect()
    }

    /// Proposes each novel cluster, nearest first, marking its view as
    /// observed before considering the next one.
    pub fn propose(&mut self, clusters: &[ObjectCluster], pose: &Pose, query_index: u64) -> Vec<Proposal> {
        let mut order: Vec<&ObjectCluster> = clusters.iter().collect();
        order.sort_by(|a, b| a.range.total_cmp(&b.range).then(a.label.cmp(&b.label)));
        let camera_world = pose.isometry() * self.camera;
        let mut out = Vec::new();
        for cluster in order {
            if !check_novelty(cluster, pose, &self.map, self.config.novelty_threshold) {
                continue;
            }
            let mut p = make_waypoint(cluster, pose, &self.config.zoom_schedule, &self.camera);
            p.id = self.next_id;
            p.query_index = query_index;
            self.next_id += 1;
            let half_diag = cluster.aabb.extents().norm() / 2.0;
            let max_range = p.range_m + half_diag + self.config.depth_margin_m;
            mark_observed(&p, &mut self.map, &camera_world, p.fov_deg, max_range, pose.timestamp);
            out.push(p);
        }
        out
    }
}
