//! Pipeline configuration.
//!
//! The file format is flat dotted keys, one per line:
//!
//! ```text
//! accumulator.window_size = 10
//! segmenter.beta_min_deg = 14
//! proposer.zoom_schedule = [[4, 60], [8, 30], [15, 15], [30, 8]]
//! ```
//!
//! This is a subset of TOML, so it is parsed with the `toml` crate. Unknown
//! keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accumulator::AccumulatorConfig;
use crate::projector::ProjectorConfig;
use crate::proposer::ProposerConfig;
use crate::segmenter::SegmenterConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

/// Stage switches used by the ablation arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageFlags {
    pub intensity_check: bool,
    pub cluster_filters: bool,
    pub ground_removal: bool,
    pub cluster_merging: bool,
}

impl Default for StageFlags {
    fn default() -> Self {
        Self {
            intensity_check: true,
            cluster_filters: true,
            ground_removal: true,
            cluster_merging: true,
        }
    }
}

impl StageFlags {
    /// Flags for a named ablation arm.
    pub fn for_arm(name: &str) -> Option<Self> {
        let full = Self::default();
        Some(match name {
            "full" => full,
            "no-intensity-check" => Self {
                intensity_check: false,
                ..full
            },
            "no-cluster-filters" => Self {
                cluster_filters: false,
                ..full
            },
            "no-ground-removal" => Self {
                ground_removal: false,
                ..full
            },
            "depth-only" => Self {
                intensity_check: false,
                cluster_filters: false,
                ..full
            },
            _ => return None,
        })
    }

    pub const ARMS: [&'static str; 5] = [
        "full",
        "no-intensity-check",
        "no-cluster-filters",
        "no-ground-removal",
        "depth-only",
    ];
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub debug_images: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub accumulator: AccumulatorConfig,
    pub projector: ProjectorConfig,
    pub segmenter: SegmenterConfig,
    pub proposer: ProposerConfig,
    pub stages: StageFlags,
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.accumulator
            .validate()
            .and_then(|_| self.projector.validate())
            .and_then(|_| self.segmenter.validate())
            .and_then(|_| self.proposer.validate())
            .map_err(ConfigError::Invalid)
    }

    /// Serializes as flat dotted keys in the same format [`Self::from_str`] reads.
    pub fn to_dotted(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = String::new();
        flatten("", &value, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut String) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => {
            out.push_str(&format!("{prefix} = {other}\n"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_parameters() {
        let c = PipelineConfig::default();
        assert_eq!(c.accumulator.window_size, 10);
        assert_eq!(c.accumulator.min_translation_m, 0.15);
        assert_eq!(c.accumulator.min_rotation_deg, 30.0);
        assert_eq!(c.accumulator.query_rate_hz, 2.0);
        assert_eq!((c.projector.rows, c.projector.cols), (180, 1200));
        assert_eq!(c.projector.vertical_fov_deg, 60.0);
        assert_eq!(c.segmenter.beta_min_deg, 14.0);
        assert_eq!(c.segmenter.intensity_min, 25.0);
        assert_eq!(c.segmenter.intensity_band, 60.0);
        assert_eq!((c.segmenter.volume_min_m3, c.segmenter.volume_max_m3), (0.01, 0.8));
        assert_eq!((c.segmenter.points_min, c.segmenter.points_max), (50, 5000));
        assert_eq!(c.segmenter.normal_stddev_min, 0.01);
    }

    #[test]
    fn dotted_keys_parse() {
        let c = PipelineConfig::from_str(
            "# comment\nsegmenter.beta_min_deg = 12\naccumulator.window_size = 4\nproposer.zoom_schedule = [[5, 50], [10, 20]]\n",
        )
        .unwrap();
        assert_eq!(c.segmenter.beta_min_deg, 12.0);
        assert_eq!(c.accumulator.window_size, 4);
        assert_eq!(c.proposer.zoom_schedule.levels().len(), 2);
        assert_eq!(c.segmenter.intensity_min, 25.0);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            PipelineConfig::from_str("segmenter.beta_max_deg = 12\n"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn invalid_value_rejected() {
        assert!(matches!(
            PipelineConfig::from_str("segmenter.volume_min_m3 = 2.0\n"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(PipelineConfig::from_str("proposer.zoom_schedule = [[5, 10], [10, 20]]\n").is_err());
    }

    #[test]
    fn dotted_round_trip() {
        let mut c = PipelineConfig::default();
        c.segmenter.points_min = 30;
        c.stages = StageFlags::for_arm("depth-only").unwrap();
        let text = c.to_dotted();
        assert!(text.contains("segmenter.points_min = 30"));
        assert_eq!(PipelineConfig::from_str(&text).unwrap(), c);
    }
}
