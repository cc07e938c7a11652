//! Object proposals for a pan-tilt-zoom camera from sparse LiDAR.
//!
//! The pipeline accumulates a motion-gated window of scans, projects the
//! accumulated cloud to range/intensity/normal images, segments candidate
//! objects with an intensity-aware depth-angle flood fill, and turns the
//! surviving clusters into deduplicated camera waypoints.
//!
//! ```text
//! scan_io ─▶ accumulator ─▶ projector ─▶ segmenter ─▶ proposer
//!                                                      │
//!                    evaluator (synthetic scenes) ◀────┘
//! ```

pub mod accumulator;
pub mod cli;
pub mod config;
pub mod evaluator;
pub mod geometry;
pub mod pipeline;
pub mod projector;
pub mod proposer;
pub mod scan_io;
pub mod segmenter;

pub use accumulator::{AccumulatedCloud, Accumulator, AccumulatorConfig};
pub use config::PipelineConfig;
pub use geometry::{Point, Pose, Vec3};
pub use config::StageFlags;
pub use pipeline::{Pipeline, QueryOutput};
pub use projector::{ImageGeometry, ImageSet};
pub use proposer::{Proposal, Proposer, VoxelObservationMap, ZoomSchedule};
pub use scan_io::LidarScan;
pub use segmenter::{LabelImage, ObjectCluster, SegmenterConfig};
