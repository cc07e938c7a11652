//! Column-sweep ground removal on the projected image.
//!
//! Each column is walked from the bottom row upward starting at the lowest
//! valid pixel below the sensor. A pixel is ground when the segment from the
//! previous ground pixel rises no steeper than `ground_angle`, its height
//! stays within [`GROUND_HEIGHT_BAND_M`] of the running ground height, and
//! the segment to the next valid pixel above is not steeper either (so the
//! foot of a vertical surface stays attached to that surface).

use crate::geometry::Vec3;
use crate::projector::{ImageSet, DEFAULT_GAP_ROWS};

/// Allowed deviation from the running ground height, meters.
pub const GROUND_HEIGHT_BAND_M: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundRemoval {
    pub image: ImageSet,
    /// Row-major flags for the pixels that were classified as ground.
    pub ground: Vec<bool>,
    pub removed: usize,
}

fn inclination(a: &Vec3, b: &Vec3) -> f64 {
    let dz = (b.z - a.z).abs();
    let dxy = (b.x - a.x).hypot(b.y - a.y);
    dz.atan2(dxy)
}

pub fn remove_ground(img: &ImageSet, ground_angle_deg: f64) -> GroundRemoval {
    let g = img.geometry;
    let max_angle = ground_angle_deg.to_radians();
    let mut ground = vec![false; g.len()];

    // Next valid row above `row` in `col`, within the interpolation gap cap.
    let next_above = |row: usize, col: usize| -> Option<usize> {
        (row.saturating_sub(DEFAULT_GAP_ROWS)..row)
            .rev()
            .map(|r| g.index(r, col))
            .find(|&j| img.is_valid(j))
    };
    let flat_ahead = |i: usize, row: usize, col: usize| match next_above(row, col) {
        Some(j) => inclination(&img.points[i], &img.points[j]) <= max_angle,
        None => true,
    };

    for col in 0..g.cols {
        let seed = (0..g.rows)
            .rev()
            .map(|r| (r, g.index(r, col)))
            .find(|&(_, i)| img.is_valid(i))
            .filter(|&(_, i)| img.points[i].z < 0.0);
        let Some((seed_row, seed_idx)) = seed else {
            continue;
        };
        let mut last = img.points[seed_idx];
        if flat_ahead(seed_idx, seed_row, col) {
            ground[seed_idx] = true;
        }
        for row in (0..seed_row).rev() {
            let i = g.index(row, col);
            if !img.is_valid(i) {
                continue;
            }
            let p = img.points[i];
            if p.z >= 0.0 {
                break;
            }
            if inclination(&last, &p) <= max_angle
                && (p.z - last.z).abs() <= GROUND_HEIGHT_BAND_M
                && flat_ahead(i, row, col)
            {
                ground[i] = true;
                last = p;
            }
        }
    }

    let mut image = img.clone();
    let mut removed = 0;
    for (i, &is_ground) in ground.iter().enumerate() {
        if is_ground {
            image.invalidate(i);
            removed += 1;
        }
    }
    GroundRemoval {
        image,
        ground,
        removed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::projector::{project, ImageGeometry};

    #[test]
    fn nothing_below_sensor_removes_nothing() {
        let pts: Vec<Point> = (0..200)
            .map(|k| {
                let a = k as f32 * 0.03;
                Point::new(5.0 * a.cos(), 5.0 * a.sin(), 0.5 + 0.01 * k as f32, 50.0)
            })
            .collect();
        let img = project(&pts, ImageGeometry::default());
        let r = remove_ground(&img, 10.0);
        assert_eq!(r.removed, 0);
        assert_eq!(r.image, img);
    }

    #[test]
    fn flat_floor_column_is_removed() {
        // One column of floor returns at z = -0.5 from 2 m to 20 m.
        let g = ImageGeometry::default();
        let mut pts = Vec::new();
        let mut x = 1.0f32;
        while x < 20.0 {
            pts.push(Point::new(x, 0.0, -0.5, 10.0));
            x *= 1.01;
        }
        let img = project(&pts, g);
        let r = remove_ground(&img, 10.0);
        assert_eq!(r.removed, img.valid_count());
    }
}
