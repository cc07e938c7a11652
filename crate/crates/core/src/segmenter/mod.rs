//! Ground removal, depth-angle/intensity labeling, and cluster
//! summarization, filtering and merging.

mod cluster;
mod ground;
mod label;

pub use cluster::{extract_clusters, filter_clusters, merge_clusters, ObjectCluster, CORE_MARGIN};
pub use ground::{remove_ground, GroundRemoval, GROUND_HEIGHT_BAND_M};
pub use label::{depth_angle, label_image, ClusterPredicate, LabelImage, BACKGROUND, UNLABELED};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterConfig {
    /// Depth-angle threshold, degrees.
    pub beta_min_deg: f64,
    /// Pixels at or below this intensity never join clusters.
    pub intensity_min: f64,
    /// Neighbors must differ in intensity by less than this.
    pub intensity_band: f64,
    pub volume_min_m3: f64,
    pub volume_max_m3: f64,
    pub points_min: usize,
    pub points_max: usize,
    /// Clusters with flatter normal fields than this are rejected.
    pub normal_stddev_min: f64,
    /// Maximum floor inclination, degrees.
    pub ground_angle_deg: f64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            beta_min_deg: 14.0,
            intensity_min: 25.0,
            intensity_band: 60.0,
            volume_min_m3: 0.01,
            volume_max_m3: 0.8,
            points_min: 50,
            points_max: 5000,
            normal_stddev_min: 0.01,
            ground_angle_deg: 10.0,
        }
    }
}

impl SegmenterConfig {
    /// `(volume_min_m3, volume_max_m3)`.
    pub fn volume_bounds(&self) -> (f64, f64) {
        (self.volume_min_m3, self.volume_max_m3)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.beta_min_deg > 0.0 && self.beta_min_deg < 90.0) {
            return Err("segmenter.beta_min_deg must be in (0, 90)".into());
        }
        if !(0.0..=255.0).contains(&self.intensity_min) {
            return Err("segmenter.intensity_min must be in [0, 255]".into());
        }
        if !(self.intensity_band > 0.0) {
            return Err("segmenter.intensity_band must be > 0".into());
        }
        if !(self.volume_min_m3 < self.volume_max_m3) {
            return Err("segmenter.volume_min_m3 must be < segmenter.volume_max_m3".into());
        }
        if self.points_min >= self.points_max {
            return Err("segmenter.points_min must be < segmenter.points_max".into());
        }
        if !(self.normal_stddev_min > 0.0) {
            return Err("segmenter.normal_stddev_min must be > 0".into());
        }
        if !(self.ground_angle_deg > 0.0 && self.ground_angle_deg < 90.0) {
            return Err("segmenter.ground_angle_deg must be in (0, 90)".into());
        }
        Ok(())
    }
}
