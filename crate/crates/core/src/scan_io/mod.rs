//! Dataset codecs: PCD point clouds, TUM trajectories, scan/pose alignment,
//! and the `proposals.jsonl` output log.

mod align;
mod pcd;
mod proposals;
mod trajectory;

use std::path::{Path, PathBuf};

pub use align::{align_scan_pose, AlignError, AlignedPose, MAX_EXTRAPOLATION_S};
pub use pcd::{parse_pcd, write_pcd, PcdCloud, PcdEncoding, PcdError};
pub use proposals::{read_proposals_jsonl, write_proposals_jsonl, ProposalRecord};
pub use trajectory::{parse_trajectory, write_trajectory, TrajectoryError};

use crate::geometry::{Point, Pose};

/// One timestamped LiDAR sweep with its resolved sensor pose.
///
/// All points share the scan timestamp; no per-point de-skewing is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub points: Vec<Point>,
    /// Seconds.
    pub timestamp: f64,
    pub pose: Pose,
}

impl LidarScan {
    pub fn new(points: Vec<Point>, timestamp: f64, mut pose: Pose) -> Self {
        pose.timestamp = timestamp;
        Self {
            points,
            timestamp,
            pose,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A `<timestamp_ns>.pcd` file found in a dataset directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanFile {
    pub path: PathBuf,
    pub timestamp_ns: u64,
}

impl ScanFile {
    pub fn timestamp(&self) -> f64 {
        self.timestamp_ns as f64 * 1e-9
    }
}

/// Lists `<timestamp_ns>.pcd` files in `dir`, sorted by timestamp. Files whose
/// stem is not an integer are ignored.
pub fn list_scan_files(dir: &Path) -> std::io::Result<Vec<ScanFile>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pcd") {
            continue;
        }
        let Some(ts) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok())
        else {
            continue;
        };
        files.push(ScanFile {
            path,
            timestamp_ns: ts,
        });
    }
    files.sort_by_key(|f| f.timestamp_ns);
    Ok(files)
}
