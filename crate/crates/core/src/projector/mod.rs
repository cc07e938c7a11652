//! Spherical projection of an accumulated cloud into co-registered range,
//! intensity, point, normal and validity images, plus gap filling and
//! masked Gaussian smoothing.

mod debug;
mod fill;
mod normals;
mod project;
mod smooth;

pub use debug::{
    read_image_dump, tone_map_range, write_image_dump, write_png_gray, write_png_labels, DumpError,
    LABEL_PALETTE,
};
pub use fill::fill_gaps;
pub use normals::compute_normals;
pub use project::project;
pub use smooth::{gaussian_kernel_1d, smooth, KERNEL_RADIUS, KERNEL_SIGMA};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Largest row distance between two valid pixels that column interpolation
/// will bridge.
pub const DEFAULT_GAP_ROWS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectorConfig {
    pub rows: usize,
    pub cols: usize,
    /// Symmetric about the horizon.
    pub vertical_fov_deg: f64,
    pub gap_rows: usize,
}

impl Default for ProjectorConfig {
    fn default() -> Self {
        Self {
            rows: 180,
            cols: 1200,
            vertical_fov_deg: 60.0,
            gap_rows: DEFAULT_GAP_ROWS,
        }
    }
}

impl ProjectorConfig {
    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry::new(self.rows, self.cols, self.vertical_fov_deg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.rows == 0 || self.cols == 0 {
            return Err("projector.rows and projector.cols must be > 0".into());
        }
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err("projector.vertical_fov_deg must be in (0, 180)".into());
        }
        if self.gap_rows < 1 {
            return Err("projector.gap_rows must be >= 1".into());
        }
        Ok(())
    }
}

/// Rows span elevation top-down, columns span azimuth counter-clockwise from
/// the sensor +x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Top edge of row 0, degrees.
    pub elevation_max_deg: f64,
    pub vertical_fov_deg: f64,
}

impl Default for ImageGeometry {
    fn default() -> Self {
        ProjectorConfig::default().geometry()
    }
}

impl ImageGeometry {
    pub fn new(rows: usize, cols: usize, vertical_fov_deg: f64) -> Self {
        Self {
            rows,
            cols,
            elevation_max_deg: vertical_fov_deg / 2.0,
            vertical_fov_deg,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Degrees per row.
    pub fn vertical_resolution_deg(&self) -> f64 {
        self.vertical_fov_deg / self.rows as f64
    }

    /// Degrees per column.
    pub fn horizontal_resolution_deg(&self) -> f64 {
        360.0 / self.cols as f64
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Pixel containing the direction of `p`, or `None` outside the vertical
    /// field of view or at the origin.
    pub fn pixel_of(&self, p: &Vec3) -> Option<(usize, usize)> {
        let horiz = p.x.hypot(p.y);
        if horiz == 0.0 && p.z == 0.0 {
            return None;
        }
        let elevation = p.z.atan2(horiz).to_degrees();
        let row_f = (self.elevation_max_deg - elevation) * self.rows as f64 / self.vertical_fov_deg;
        if !(row_f >= 0.0) || row_f >= self.rows as f64 {
            return None;
        }
        let mut azimuth = p.y.atan2(p.x).to_degrees();
        if azimuth < 0.0 {
            azimuth += 360.0;
        }
        let col = ((azimuth * self.cols as f64 / 360.0).floor() as usize).min(self.cols - 1);
        Some((row_f.floor() as usize, col))
    }

    /// Unit ray through the pixel center.
    pub fn ray(&self, row: usize, col: usize) -> Vec3 {
        let el = (self.elevation_max_deg - (row as f64 + 0.5) * self.vertical_resolution_deg()).to_radians();
        let az = ((col as f64 + 0.5) * self.horizontal_resolution_deg()).to_radians();
        Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }

    /// 3D point at `range` along the pixel-center ray.
    pub fn back_project(&self, row: usize, col: usize, range: f64) -> Vec3 {
        self.ray(row, col) * range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PixelState {
    Empty = 0,
    Measured = 1,
    Interpolated = 2,
}

impl PixelState {
    #[inline]
    pub fn is_valid(self) -> bool {
        self != PixelState::Empty
    }
}

/// Co-registered per-pixel channels, row-major.
///
/// `points` holds the 3D location represented by each valid pixel in the
/// sensor frame; it is filled and smoothed alongside `range` so planar
/// surfaces stay planar through both operations.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    pub geometry: ImageGeometry,
    /// Meters; 0 where invalid.
    pub range: Vec<f64>,
    pub intensity: Vec<f64>,
    pub state: Vec<PixelState>,
    pub points: Vec<Vec3>,
    /// Unit normals facing the sensor; `None` where undefined.
    pub normal: Vec<Option<Vec3>>,
    /// Index of the source point in the projected cloud.
    pub index: Vec<Option<u32>>,
    /// Points dropped for falling outside the vertical field of view.
    pub discarded: usize,
}

impl ImageSet {
    pub fn empty(geometry: ImageGeometry) -> Self {
        let n = geometry.len();
        Self {
            geometry,
            range: vec![0.0; n],
            intensity: vec![0.0; n],
            state: vec![PixelState::Empty; n],
            points: vec![Vec3::zeros(); n],
            normal: vec![None; n],
            index: vec![None; n],
            discarded: 0,
        }
    }

    #[inline]
    pub fn is_valid(&self, i: usize) -> bool {
        self.state[i].is_valid()
    }

    pub fn valid_count(&self) -> usize {
        self.state.iter().filter(|s| s.is_valid()).count()
    }

    /// Clears pixel `i` back to the invalid sentinel.
    pub fn invalidate(&mut self, i: usize) {
        self.range[i] = 0.0;
        self.intensity[i] = 0.0;
        self.state[i] = PixelState::Empty;
        self.points[i] = Vec3::zeros();
        self.normal[i] = None;
        self.index[i] = None;
    }
}
