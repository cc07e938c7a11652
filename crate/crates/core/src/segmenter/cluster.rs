use std::collections::BTreeMap;

use crate::geometry::{Aabb, Vec3};
use crate::projector::{ImageSet, PixelState, KERNEL_RADIUS};

use super::label::{LabelImage, FIRST_CLUSTER};
use super::SegmenterConfig;

/// Summary of one labeled cluster in the sensor frame.
///
/// Statistics come from measured pixels only; interpolated pixels count
/// towards `pixel_count` but carry no source point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectCluster {
    pub label: u32,
    pub pixel_count: usize,
    pub point_count: usize,
    pub centroid: Vec3,
    pub aabb: Aabb,
    pub volume: f64,
    pub mean_intensity: f64,
    /// Root-mean-square deviation of the unit normals from their mean.
    pub normal_stddev: f64,
    /// Distance of the centroid from the sensor.
    pub range: f64,
    sums: Sums,
}

/// Additive sufficient statistics, so merged clusters can be summarized
/// exactly without keeping their points.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sums {
    position: Vec3,
    intensity: f64,
    normal: Vec3,
    normal_count: usize,
}

impl ObjectCluster {
    fn from_parts(label: u32, pixel_count: usize, point_count: usize, aabb: Aabb, sums: Sums) -> Self {
        let n = point_count as f64;
        let centroid = sums.position / n;
        let normal_stddev = if sums.normal_count == 0 {
            0.0
        } else {
            let mean = sums.normal / sums.normal_count as f64;
            (1.0 - mean.norm_squared()).max(0.0).sqrt()
        };
        Self {
            label,
            pixel_count,
            point_count,
            centroid,
            volume: aabb.volume(),
            aabb,
            mean_intensity: sums.intensity / n,
            normal_stddev,
            range: centroid.norm(),
            sums,
        }
    }

    /// Summarizes explicit points. `normals` may be shorter than `points`.
    pub fn from_points(label: u32, points: &[Vec3], intensities: &[f64], normals: &[Vec3]) -> Option<Self> {
        if points.is_empty() || intensities.len() != points.len() {
            return None;
        }
        Some(Self::from_parts(
            label,
            points.len(),
            points.len(),
            Aabb::from_points(points.iter()),
            Sums {
                position: points.iter().sum(),
                intensity: intensities.iter().sum(),
                normal: normals.iter().sum(),
                normal_count: normals.len(),
            },
        ))
    }

    /// Cluster summarizing the union of `self` and `other`.
    pub fn merged(&self, other: &ObjectCluster) -> ObjectCluster {
        let sums = Sums {
            position: self.sums.position + other.sums.position,
            intensity: self.sums.intensity + other.sums.intensity,
            normal: self.sums.normal + other.sums.normal,
            normal_count: self.sums.normal_count + other.sums.normal_count,
        };
        ObjectCluster::from_parts(
            self.label.min(other.label),
            self.pixel_count + other.pixel_count,
            self.point_count + other.point_count,
            self.aabb.union(&other.aabb),
            sums,
        )
    }

    /// Angle between the two centroids as seen from the sensor, radians.
    pub fn angular_separation(&self, other: &ObjectCluster) -> f64 {
        let c = self.centroid.normalize().dot(&other.centroid.normalize());
        c.clamp(-1.0, 1.0).acos()
    }
}

#[derive(Default)]
struct Acc {
    pixels: usize,
    points: usize,
    aabb: Option<Aabb>,
    position: Vec3,
    intensity: f64,
    normal: Vec3,
    normal_count: usize,
    core_normal: Vec3,
    core_count: usize,
}

/// Erosion depth of the cluster core: smoothing blurs a surface into its
/// background by `KERNEL_RADIUS` pixels on each side of the silhouette.
pub const CORE_MARGIN: usize = 2 * KERNEL_RADIUS;

/// Whether every pixel within `CORE_MARGIN` of pixel `i` carries label `l`.
fn in_core(labels: &LabelImage, i: usize, l: u32) -> bool {
    let g = labels.geometry;
    let r = CORE_MARGIN as isize;
    let (row, col) = ((i / g.cols) as isize, (i % g.cols) as isize);
    (-r..=r).all(|dr| {
        let rr = row + dr;
        (0..g.rows as isize).contains(&rr)
            && (-r..=r).all(|dc| {
                let cc = (col + dc).rem_euclid(g.cols as isize) as usize;
                labels.labels[g.index(rr as usize, cc)] == l
            })
    })
}

/// One cluster per label with at least one measured pixel, in label order.
///
/// The normal spread is taken over the cluster's core, the pixels at least
/// [`CORE_MARGIN`] from its boundary, so surfaces blurred into their
/// background at the silhouette do not count. Clusters without a core use
/// all their normals.
pub fn extract_clusters(labels: &LabelImage, img: &ImageSet) -> Vec<ObjectCluster> {
    let mut accs: BTreeMap<u32, Acc> = BTreeMap::new();
    for (i, &l) in labels.labels.iter().enumerate() {
        if l < FIRST_CLUSTER {
            continue;
        }
        let a = accs.entry(l).or_default();
        a.pixels += 1;
        if img.state[i] != PixelState::Measured {
            continue;
        }
        let p = img.points[i];
        a.points += 1;
        a.aabb.get_or_insert_with(Aabb::empty).extend(&p);
        a.position += p;
        a.intensity += img.intensity[i];
        if let Some(n) = img.normal[i] {
            a.normal += n;
            a.normal_count += 1;
            if in_core(labels, i, l) {
                a.core_normal += n;
                a.core_count += 1;
            }
        }
    }
    accs.into_iter()
        .filter(|(_, a)| a.points > 0)
        .map(|(label, a)| {
            ObjectCluster::from_parts(
                label,
                a.pixels,
                a.points,
                a.aabb.unwrap_or_else(Aabb::empty),
                Sums {
                    position: a.position,
                    intensity: a.intensity,
                    normal: if a.core_count > 0 { a.core_normal } else { a.normal },
                    normal_count: if a.core_count > 0 { a.core_count } else { a.normal_count },
                },
            )
        })
        .collect()
}

/// Keeps clusters whose volume, point count and normal spread all fall in
/// the configured bounds.
pub fn filter_clusters(clusters: &[ObjectCluster], cfg: &SegmenterConfig) -> Vec<ObjectCluster> {
    clusters
        .iter()
        .filter(|c| {
            (cfg.volume_min_m3..=cfg.volume_max_m3).contains(&c.volume)
                && (cfg.points_min..=cfg.points_max).contains(&c.point_count)
                && c.normal_stddev >= cfg.normal_stddev_min
        })
        .cloned()
        .collect()
}

/// Greedily merges clusters whose centroids fit in one camera view.
///
/// `fov_deg_at_range` gives the camera field of view used for a cluster at
/// a given range; a pair is judged at the farther member's range. Clusters
/// are visited nearest first and passes repeat until nothing merges, so the
/// output is a fixpoint. Output is sorted by ascending range.
pub fn merge_clusters(clusters: &[ObjectCluster], fov_deg_at_range: impl Fn(f64) -> f64) -> Vec<ObjectCluster> {
    let by_range = |v: &mut Vec<ObjectCluster>| {
        v.sort_by(|a, b| a.range.total_cmp(&b.range).then(a.label.cmp(&b.label)));
    };
    let mut current = clusters.to_vec();
    by_range(&mut current);
    loop {
        let mut groups: Vec<ObjectCluster> = Vec::with_capacity(current.len());
        let mut merged_any = false;
        for c in current {
            let target = groups.iter().position(|g| {
                let fov = fov_deg_at_range(g.range.max(c.range)).to_radians();
                g.angular_separation(&c) < fov
            });
            match target {
                Some(k) => {
                    groups[k] = groups[k].merged(&c);
                    merged_any = true;
                }
                None => groups.push(c),
            }
        }
        by_range(&mut groups);
        current = groups;
        if !merged_any {
            return current;
        }
    }
}
