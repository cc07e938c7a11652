//! Motion-gated sliding window of scans, re-expressed in the newest sensor
//! frame on query.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Pose};
use crate::scan_io::LidarScan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccumulatorConfig {
    /// Maximum number of scans kept in the window.
    pub window_size: usize,
    /// Meters.
    pub min_translation_m: f64,
    /// Degrees.
    pub min_rotation_deg: f64,
    /// Query cadence in data-time hertz; enforced by the caller.
    pub query_rate_hz: f64,
}

impl Default for AccumulatorConfig {
    fn default() -> Self {
        Self {
            window_size: 10,
            min_translation_m: 0.15,
            min_rotation_deg: 30.0,
            query_rate_hz: 2.0,
        }
    }
}

impl AccumulatorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.window_size < 1 {
            return Err("accumulator.window_size must be >= 1".into());
        }
        if !(self.min_translation_m >= 0.0) {
            return Err("accumulator.min_translation_m must be >= 0".into());
        }
        if !(0.0..=180.0).contains(&self.min_rotation_deg) {
            return Err("accumulator.min_rotation_deg must be in [0, 180]".into());
        }
        if !(self.query_rate_hz > 0.0) {
            return Err("accumulator.query_rate_hz must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AccumulatorError {
    #[error("scan at {offered} s is older than the newest admitted scan at {newest} s")]
    OutOfOrder { offered: f64, newest: f64 },
    #[error("accumulation window is empty")]
    EmptyWindow,
}

/// Dense cloud expressed in the newest admitted scan's sensor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedCloud {
    pub points: Vec<Point>,
    pub reference_pose: Pose,
    pub source_count: usize,
}

#[derive(Debug, Clone)]
pub struct Accumulator {
    config: AccumulatorConfig,
    window: VecDeque<LidarScan>,
}

impl Accumulator {
    pub fn new(config: AccumulatorConfig) -> Self {
        Self {
            window: VecDeque::with_capacity(config.window_size),
            config,
        }
    }

    pub fn config(&self) -> &AccumulatorConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn newest(&self) -> Option<&LidarScan> {
        self.window.back()
    }

    /// Whether a pose delta passes the motion gate.
    pub fn passes_motion_gate(&self, translation_m: f64, rotation_rad: f64) -> bool {
        translation_m >= self.config.min_translation_m
            || rotation_rad.to_degrees() >= self.config.min_rotation_deg
    }

    /// Admits `scan` if the window is empty or it moved far enough from the
    /// last admitted scan. Evicts the oldest scan when full.
    pub fn offer_scan(&mut self, scan: LidarScan) -> Result<bool, AccumulatorError> {
        if let Some(newest) = self.window.back() {
            if scan.timestamp < newest.timestamp {
                return Err(AccumulatorError::OutOfOrder {
                    offered: scan.timestamp,
                    newest: newest.timestamp,
                });
            }
            let (dt, dr) = scan.pose.motion_from(&newest.pose);
            if !self.passes_motion_gate(dt, dr) {
                return Ok(false);
            }
        }
        if self.window.len() == self.config.window_size {
            self.window.pop_front();
        }
        self.window.push_back(scan);
        Ok(true)
    }

    pub fn query_accumulated(&self) -> Result<AccumulatedCloud, AccumulatorError> {
        let latest = self.window.back().ok_or(AccumulatorError::EmptyWindow)?;
        let total = self.window.iter().map(|s| s.points.len()).sum();
        let mut points = Vec::with_capacity(total);
        for scan in &self.window {
            let iso = scan.pose.transform_into(&latest.pose);
            points.extend(scan.points.iter().map(|p| {
                let q = iso * nalgebra::Point3::from(p.position());
                Point::from_position(&q.coords, p.intensity)
            }));
        }
        Ok(AccumulatedCloud {
            points,
            reference_pose: latest.pose,
            source_count: self.window.len(),
        })
    }

    pub fn clear(&mut self) {
        self.window.clear();
    }
}
