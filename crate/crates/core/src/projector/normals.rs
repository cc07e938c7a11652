use crate::geometry::Vec3;

use super::ImageSet;

/// Minimum number of usable neighbor quadrants for a defined normal.
const MIN_QUADRANTS: usize = 2;

/// Per-pixel normals from cross products of neighbor offsets.
///
/// Each of the four quadrants (right, down), (down, left), (left, up),
/// (up, right) with both neighbors valid contributes its normalized cross
/// product; the normal is the normalized mean, flipped to face the sensor.
pub fn compute_normals(img: &ImageSet) -> ImageSet {
    let g = img.geometry;
    let (rows, cols) = (g.rows, g.cols);
    let mut out = img.clone();
    for row in 0..rows {
        for col in 0..cols {
            let i = g.index(row, col);
            out.normal[i] = None;
            if !img.is_valid(i) {
                continue;
            }
            let center = img.points[i];
            let at = |r: usize, c: usize| {
                let j = g.index(r, c);
                img.is_valid(j).then(|| img.points[j] - center)
            };
            let right = at(row, (col + 1) % cols);
            let left = at(row, (col + cols - 1) % cols);
            let up = if row > 0 { at(row - 1, col) } else { None };
            let down = if row + 1 < rows { at(row + 1, col) } else { None };

            let mut sum = Vec3::zeros();
            let mut used = 0;
            for (a, b) in [(right, down), (down, left), (left, up), (up, right)] {
                if let (Some(a), Some(b)) = (a, b) {
                    let n = a.cross(&b);
                    let len = n.norm();
                    if len > 1e-12 {
                        sum += n / len;
                        used += 1;
                    }
                }
            }
            if used < MIN_QUADRANTS {
                continue;
            }
            let len = sum.norm();
            if len < 1e-12 {
                continue;
            }
            let mut n = sum / len;
            if n.dot(&center) > 0.0 {
                n = -n;
            }
            out.normal[i] = Some(n);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::{project, ImageGeometry};
    use crate::geometry::Point;

    #[test]
    fn isolated_pixel_has_no_normal() {
        let g = ImageGeometry::default();
        let img = compute_normals(&project(&[Point::new(5.0, 0.0, 0.0, 1.0)], g));
        assert!(img.normal.iter().all(|n| n.is_none()));
    }
}
