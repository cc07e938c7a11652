use crate::geometry::Point;

use super::{ImageGeometry, ImageSet, PixelState};

/// Projects points into a fresh image. Collisions keep the nearest point.
pub fn project(points: &[Point], geometry: ImageGeometry) -> ImageSet {
    let mut img = ImageSet::empty(geometry);
    for (k, p) in points.iter().enumerate() {
        let pos = p.position();
        let Some((row, col)) = geometry.pixel_of(&pos) else {
            img.discarded += 1;
            continue;
        };
        let range = pos.norm();
        let i = geometry.index(row, col);
        if img.state[i] == PixelState::Empty || range < img.range[i] {
            img.range[i] = range;
            img.intensity[i] = p.intensity as f64;
            img.state[i] = PixelState::Measured;
            img.points[i] = pos;
            img.index[i] = Some(k as u32);
        }
    }
    img
}
