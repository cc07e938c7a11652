use serde::{Deserialize, Serialize};

/// One zoom band: clusters up to `max_range_m` use this level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoomLevel {
    pub max_range_m: f64,
    /// Horizontal field of view at this level, degrees.
    pub fov_deg: f64,
}

/// Range-banded zoom levels, numbered from 1 in order.
///
/// Serialized as a list of `[max_range_m, fov_deg]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ZoomSchedule {
    levels: Vec<ZoomLevel>,
}

impl Default for ZoomSchedule {
    fn default() -> Self {
        Self::new(vec![
            ZoomLevel { max_range_m: 4.0, fov_deg: 60.0 },
            ZoomLevel { max_range_m: 8.0, fov_deg: 30.0 },
            ZoomLevel { max_range_m: 15.0, fov_deg: 15.0 },
            ZoomLevel { max_range_m: 30.0, fov_deg: 8.0 },
        ])
        .expect("default zoom schedule is valid")
    }
}

impl ZoomSchedule {
    pub fn new(levels: Vec<ZoomLevel>) -> Result<Self, String> {
        if levels.is_empty() {
            return Err("zoom schedule is empty".into());
        }
        for w in levels.windows(2) {
            if !(w[1].max_range_m > w[0].max_range_m) {
                return Err("zoom schedule ranges must be strictly increasing".into());
            }
            if !(w[1].fov_deg < w[0].fov_deg) {
                return Err("zoom schedule fields of view must be strictly decreasing".into());
            }
        }
        if levels.iter().any(|l| !(l.max_range_m > 0.0) || !(l.fov_deg > 0.0 && l.fov_deg < 180.0)) {
            return Err("zoom schedule entries must have positive range and FoV in (0, 180)".into());
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[ZoomLevel] {
        &self.levels
    }

    pub fn max_range(&self) -> f64 {
        self.levels.last().unwrap().max_range_m
    }

    /// `(zoom level starting at 1, level, beyond_last_band)`. Ranges past the
    /// last band use the last level.
    pub fn select(&self, range: f64) -> (u32, ZoomLevel, bool) {
        match self.levels.iter().position(|l| l.max_range_m >= range) {
            Some(k) => (k as u32 + 1, self.levels[k], false),
            None => (self.levels.len() as u32, *self.levels.last().unwrap(), true),
        }
    }

    pub fn fov_for_range(&self, range: f64) -> f64 {
        self.select(range).1.fov_deg
    }
}

impl TryFrom<Vec<[f64; 2]>> for ZoomSchedule {
    type Error = String;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        Self::new(
            v.into_iter()
                .map(|[max_range_m, fov_deg]| ZoomLevel { max_range_m, fov_deg })
                .collect(),
        )
    }
}

impl From<ZoomSchedule> for Vec<[f64; 2]> {
    fn from(s: ZoomSchedule) -> Self {
        s.levels.iter().map(|l| [l.max_range_m, l.fov_deg]).collect()
    }
}
