//! One query of the full chain (accumulate → project → segment → propose)
//! and the data-time cadence that drives it.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::accumulator::{AccumulatedCloud, Accumulator, AccumulatorError};
use crate::config::{PipelineConfig, StageFlags};
use crate::geometry::Point;
use crate::projector::{compute_normals, fill_gaps, project, smooth, ImageSet, ProjectorConfig};
use crate::proposer::{Proposal, Proposer};
use crate::scan_io::LidarScan;
use crate::segmenter::{
    extract_clusters, filter_clusters, label_image, merge_clusters, remove_ground, ClusterPredicate, LabelImage,
    ObjectCluster,
};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Accumulator(#[from] AccumulatorError),
}

/// Wall-clock seconds spent in each stage of one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub accumulate: f64,
    pub project: f64,
    pub fill: f64,
    pub smooth: f64,
    pub normals: f64,
    pub ground: f64,
    pub label: f64,
    pub clusters: f64,
    pub propose: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.accumulate
            + self.project
            + self.fill
            + self.smooth
            + self.normals
            + self.ground
            + self.label
            + self.clusters
            + self.propose
    }

    pub fn add(&mut self, o: &StageTimings) {
        self.accumulate += o.accumulate;
        self.project += o.project;
        self.fill += o.fill;
        self.smooth += o.smooth;
        self.normals += o.normals;
        self.ground += o.ground;
        self.label += o.label;
        self.clusters += o.clusters;
        self.propose += o.propose;
    }
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot += t.elapsed().as_secs_f64();
    out
}

/// Projected, filled, smoothed image with normals.
pub fn build_images(points: &[Point], cfg: &ProjectorConfig, timings: &mut StageTimings) -> ImageSet {
    let raw = timed(&mut timings.project, || project(points, cfg.geometry()));
    let filled = timed(&mut timings.fill, || fill_gaps(&raw, cfg.gap_rows));
    let smoothed = timed(&mut timings.smooth, || smooth(&filled));
    timed(&mut timings.normals, || compute_normals(&smoothed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Image after ground removal; the input to labeling.
    pub image: ImageSet,
    pub ground: Vec<bool>,
    pub ground_removed: usize,
    pub labels: LabelImage,
    /// Clusters before filtering.
    pub raw_cluster_count: usize,
    /// Clusters after filtering.
    pub clusters: Vec<ObjectCluster>,
}

pub fn segment(images: &ImageSet, cfg: &PipelineConfig, flags: StageFlags, timings: &mut StageTimings) -> Segmentation {
    let (image, ground, ground_removed) = if flags.ground_removal {
        let g = timed(&mut timings.ground, || remove_ground(images, cfg.segmenter.ground_angle_deg));
        (g.image, g.ground, g.removed)
    } else {
        (images.clone(), vec![false; images.geometry.len()], 0)
    };
    segment_without_ground(image, ground, ground_removed, cfg, flags, timings)
}

/// Labeling onward, for callers that share a ground-removed image.
pub fn segment_without_ground(
    image: ImageSet,
    ground: Vec<bool>,
    ground_removed: usize,
    cfg: &PipelineConfig,
    flags: StageFlags,
    timings: &mut StageTimings,
) -> Segmentation {
    let pred = ClusterPredicate::new(&cfg.segmenter, &image.geometry, flags.intensity_check);
    let labels = timed(&mut timings.label, || label_image(&image, &pred));
    let (raw_cluster_count, clusters) = timed(&mut timings.clusters, || {
        let raw = extract_clusters(&labels, &image);
        let n = raw.len();
        let kept = if flags.cluster_filters {
            filter_clusters(&raw, &cfg.segmenter)
        } else {
            raw
        };
        (n, kept)
    });
    Segmentation {
        image,
        ground,
        ground_removed,
        labels,
        raw_cluster_count,
        clusters,
    }
}

/// Proposal step: clusters whose space the camera has already observed are
/// dropped, the rest merged by camera field of view, then proposed.
pub fn propose_clusters(
    proposer: &mut Proposer,
    clusters: &[ObjectCluster],
    pose: &crate::geometry::Pose,
    query_index: u64,
    merging: bool,
) -> Vec<Proposal> {
    let novel = proposer.novel_clusters(clusters, pose);
    let candidates = if merging {
        let schedule = &proposer.config().zoom_schedule;
        merge_clusters(&novel, |r| schedule.fov_for_range(r))
    } else {
        novel
    };
    proposer.propose(&candidates, pose, query_index)
}

#[derive(Debug, Clone)]
pub struct QueryOutput {
    pub query_index: u64,
    pub timestamp: f64,
    pub cloud: AccumulatedCloud,
    pub segmentation: Segmentation,
    pub proposals: Vec<Proposal>,
    pub timings: StageTimings,
}

/// Outcome of offering one scan to the pipeline.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub admitted: bool,
    pub query: Option<QueryOutput>,
}

/// Data-time query cadence: the first query is due one period after the
/// first timestamp seen, later ones every period, skipping missed slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryClock {
    period: f64,
    next: Option<f64>,
}

impl QueryClock {
    pub fn new(rate_hz: f64) -> Self {
        Self {
            period: 1.0 / rate_hz,
            next: None,
        }
    }

    /// Whether a query is due at `t`; advances the schedule if so.
    pub fn due(&mut self, t: f64) -> bool {
        let next = *self.next.get_or_insert(t + self.period);
        if t + 1e-9 < next {
            return false;
        }
        let mut n = next;
        while n <= t + 1e-9 {
            n += self.period;
        }
        self.next = Some(n);
        true
    }
}

/// Stateful driver: owns the accumulation window and the proposer, and
/// queries at the configured rate in data time.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    accumulator: Accumulator,
    proposer: Proposer,
    clock: QueryClock,
    query_index: u64,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Self {
            accumulator: Accumulator::new(config.accumulator),
            proposer: Proposer::new(config.proposer.clone()),
            clock: QueryClock::new(config.accumulator.query_rate_hz),
            config,
            query_index: 0,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn proposer(&self) -> &Proposer {
        &self.proposer
    }

    pub fn queries_run(&self) -> u64 {
        self.query_index
    }

    /// Offers a scan, then queries if a query is due at its timestamp.
    pub fn offer_scan(&mut self, scan: LidarScan) -> Result<ScanOutcome, PipelineError> {
        let t = scan.timestamp;
        let mut accumulate = 0.0;
        let admitted = timed(&mut accumulate, || self.accumulator.offer_scan(scan))?;
        if !self.clock.due(t) {
            return Ok(ScanOutcome { admitted, query: None });
        }
        let mut q = self.query()?;
        q.timings.accumulate += accumulate;
        Ok(ScanOutcome {
            admitted,
            query: Some(q),
        })
    }

    /// Runs one query on the current window regardless of cadence.
    pub fn query(&mut self) -> Result<QueryOutput, PipelineError> {
        let mut timings = StageTimings::default();
        let cloud = timed(&mut timings.accumulate, || self.accumulator.query_accumulated())?;
        let images = build_images(&cloud.points, &self.config.projector, &mut timings);
        let segmentation = segment(&images, &self.config, self.config.stages, &mut timings);
        let query_index = self.query_index;
        self.query_index += 1;
        let merging = self.config.stages.cluster_merging;
        let proposals = timed(&mut timings.propose, || {
            propose_clusters(
                &mut self.proposer,
                &segmentation.clusters,
                &cloud.reference_pose,
                query_index,
                merging,
            )
        });
        Ok(QueryOutput {
            query_index,
            timestamp: cloud.reference_pose.timestamp,
            cloud,
            segmentation,
            proposals,
            timings,
        })
    }
}
