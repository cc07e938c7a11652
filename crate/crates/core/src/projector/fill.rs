use super::{ImageSet, PixelState};

/// Fills invalid runs in each column whose bracketing valid pixels are at
/// most `max_gap` rows apart, interpolating range, intensity and position
/// linearly in the row index.
pub fn fill_gaps(img: &ImageSet, max_gap: usize) -> ImageSet {
    let mut out = img.clone();
    let g = img.geometry;
    for col in 0..g.cols {
        let mut prev: Option<usize> = None;
        for row in 0..g.rows {
            let i = g.index(row, col);
            if !img.is_valid(i) {
                continue;
            }
            if let Some(top) = prev {
                let span = row - top;
                if span >= 2 && span <= max_gap {
                    let a = g.index(top, col);
                    for r in top + 1..row {
                        let s = (r - top) as f64 / span as f64;
                        let k = g.index(r, col);
                        out.range[k] = img.range[a] + s * (img.range[i] - img.range[a]);
                        out.intensity[k] = img.intensity[a] + s * (img.intensity[i] - img.intensity[a]);
                        out.points[k] = img.points[a] + (img.points[i] - img.points[a]) * s;
                        out.state[k] = PixelState::Interpolated;
                    }
                }
            }
            prev = Some(row);
        }
    }
    out
}
