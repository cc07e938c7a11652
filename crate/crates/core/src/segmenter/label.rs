//! Breadth-first labeling of the range image.
//!
//! Two 4-neighbors `p`, `q` are connected when the depth angle between their
//! returns exceeds `beta_min` and, with the intensity check enabled, both
//! intensities exceed `I_min` and differ by less than `I_n`. Valid pixels
//! at or below `I_min` never join a cluster: they take the background label
//! when some valid neighbor passes the depth-angle test with them, and
//! otherwise form a singleton cluster of their own.

use std::collections::VecDeque;

use crate::projector::{ImageGeometry, ImageSet};

use super::SegmenterConfig;

pub const UNLABELED: u32 = 0;
pub const BACKGROUND: u32 = 1;
/// First cluster id.
pub const FIRST_CLUSTER: u32 = 2;

/// Angle between the returns at ranges `a` and `b` seen `alpha` radians apart,
/// measured at the farther return. Large values mean a continuous surface.
pub fn depth_angle(a: f64, b: f64, alpha: f64) -> f64 {
    let (d1, d2) = if a >= b { (a, b) } else { (b, a) };
    (d2 * alpha.sin()).atan2(d1 - d2 * alpha.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterPredicate {
    pub beta_min_rad: f64,
    pub intensity_min: f64,
    pub intensity_band: f64,
    pub intensity_check: bool,
    /// Angular step between horizontal neighbors, radians.
    pub alpha_horizontal: f64,
    /// Angular step between vertical neighbors, radians.
    pub alpha_vertical: f64,
}

impl ClusterPredicate {
    pub fn new(cfg: &SegmenterConfig, geometry: &ImageGeometry, intensity_check: bool) -> Self {
        Self {
            beta_min_rad: cfg.beta_min_deg.to_radians(),
            intensity_min: cfg.intensity_min,
            intensity_band: cfg.intensity_band,
            intensity_check,
            alpha_horizontal: geometry.horizontal_resolution_deg().to_radians(),
            alpha_vertical: geometry.vertical_resolution_deg().to_radians(),
        }
    }

    #[inline]
    pub fn same_surface(&self, range_a: f64, range_b: f64, vertical: bool) -> bool {
        let alpha = if vertical {
            self.alpha_vertical
        } else {
            self.alpha_horizontal
        };
        depth_angle(range_a, range_b, alpha) > self.beta_min_rad
    }

    /// Intensity floor; always true with the intensity check off.
    #[inline]
    pub fn bright(&self, intensity: f64) -> bool {
        !self.intensity_check || intensity > self.intensity_min
    }

    #[inline]
    pub fn consistent(&self, a: f64, b: f64) -> bool {
        !self.intensity_check || (a - b).abs() < self.intensity_band
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    pub geometry: ImageGeometry,
    /// 0 = invalid, 1 = background, >= 2 = cluster id.
    pub labels: Vec<u32>,
    /// Number of cluster ids issued; ids are `2..2 + cluster_count`.
    pub cluster_count: u32,
}

impl LabelImage {
    pub fn empty(geometry: ImageGeometry) -> Self {
        Self {
            geometry,
            labels: vec![UNLABELED; geometry.len()],
            cluster_count: 0,
        }
    }
}

/// 4-neighbors with horizontal wraparound: `(index, is_vertical)`.
#[inline]
pub(crate) fn neighbors(g: &ImageGeometry, i: usize) -> impl Iterator<Item = (usize, bool)> {
    let (row, col) = (i / g.cols, i % g.cols);
    let cols = g.cols;
    let right = row * cols + (col + 1) % cols;
    let left = row * cols + (col + cols - 1) % cols;
    let up = (row > 0).then(|| i - cols);
    let down = (row + 1 < g.rows).then(|| i + cols);
    [Some((right, false)), Some((left, false)), up.map(|u| (u, true)), down.map(|d| (d, true))]
        .into_iter()
        .flatten()
}

pub fn label_image(img: &ImageSet, pred: &ClusterPredicate) -> LabelImage {
    let g = img.geometry;
    let mut out = LabelImage::empty(g);
    let labels = &mut out.labels;
    let mut next = FIRST_CLUSTER;
    let mut queue = VecDeque::new();

    for seed in 0..g.len() {
        if labels[seed] != UNLABELED || !img.is_valid(seed) {
            continue;
        }
        if !pred.bright(img.intensity[seed]) {
            let touches = neighbors(&g, seed)
                .any(|(n, v)| img.is_valid(n) && pred.same_surface(img.range[seed], img.range[n], v));
            if touches {
                labels[seed] = BACKGROUND;
            } else {
                labels[seed] = next;
                next += 1;
            }
            continue;
        }

        labels[seed] = next;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for (v, vertical) in neighbors(&g, u) {
                if !img.is_valid(v) || !pred.same_surface(img.range[u], img.range[v], vertical) {
                    continue;
                }
                if !pred.bright(img.intensity[v]) {
                    if labels[v] == UNLABELED {
                        labels[v] = BACKGROUND;
                    }
                } else if labels[v] == UNLABELED && pred.consistent(img.intensity[u], img.intensity[v]) {
                    labels[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    out.cluster_count = next - FIRST_CLUSTER;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::PixelState;

    const ALPHA: f64 = 0.3 * std::f64::consts::PI / 180.0;

    #[test]
    fn equal_depth_gives_right_angle_minus_half_alpha() {
        for d in [0.5, 5.0, 40.0] {
            let beta = depth_angle(d, d, ALPHA);
            assert!((beta - (std::f64::consts::FRAC_PI_2 - ALPHA / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn large_depth_jump_is_below_threshold() {
        let beta = depth_angle(10.0, 5.0, ALPHA);
        let direct = (5.0 * ALPHA.sin() / (10.0 - 5.0 * ALPHA.cos())).atan();
        assert!((beta - direct).abs() < 1e-12);
        assert!(beta.to_degrees() < 14.0);
        assert!((beta.to_degrees() - 0.3).abs() < 0.01);
        assert_eq!(depth_angle(5.0, 10.0, ALPHA), beta);
    }

    fn strip(ranges: &[f64], intensities: &[f64]) -> ImageSet {
        let g = ImageGeometry::new(1, ranges.len() + 2, 60.0);
        let mut img = ImageSet::empty(g);
        for (k, (&r, &it)) in ranges.iter().zip(intensities).enumerate() {
            img.range[k] = r;
            img.intensity[k] = it;
            img.state[k] = PixelState::Measured;
        }
        img
    }

    fn pred(img: &ImageSet) -> ClusterPredicate {
        let mut p = ClusterPredicate::new(&SegmenterConfig::default(), &img.geometry, true);
        p.alpha_horizontal = ALPHA;
        p
    }

    #[test]
    fn equal_depth_bright_neighbors_share_a_cluster() {
        let img = strip(&[5.0, 5.0], &[100.0, 110.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[2, 2]);
        assert_eq!(l.cluster_count, 1);
    }

    #[test]
    fn depth_jump_splits_clusters() {
        let img = strip(&[10.0, 5.0], &[100.0, 100.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[2, 3]);
    }

    #[test]
    fn dim_neighbor_becomes_background() {
        let img = strip(&[5.0, 5.0], &[100.0, 20.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[2, BACKGROUND]);
        // Same result regardless of which side is scanned first.
        let img = strip(&[5.0, 5.0], &[20.0, 100.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[BACKGROUND, 2]);
    }

    #[test]
    fn intensity_band_splits_clusters() {
        let img = strip(&[5.0, 5.0], &[40.0, 120.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[2, 3]);
        let mut p = pred(&img);
        p.intensity_check = false;
        let l = label_image(&img, &p);
        assert_eq!(&l.labels[..2], &[2, 2]);
    }

    #[test]
    fn isolated_dim_pixel_seeds_singleton() {
        let img = strip(&[5.0, 9.0], &[10.0, 10.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(&l.labels[..2], &[2, 3]);
    }

    #[test]
    fn invalid_pixels_stay_unlabeled() {
        let img = strip(&[5.0], &[100.0]);
        let l = label_image(&img, &pred(&img));
        assert_eq!(l.labels, vec![2, 0, 0]);
    }

    #[test]
    fn horizontal_wraparound_connects_edges() {
        let g = ImageGeometry::new(1, 4, 60.0);
        let mut img = ImageSet::empty(g);
        for k in [0, 3] {
            img.range[k] = 5.0;
            img.intensity[k] = 100.0;
            img.state[k] = PixelState::Measured;
        }
        let l = label_image(&img, &pred(&img));
        assert_eq!(l.labels, vec![2, 0, 0, 2]);
    }
}
