use crate::geometry::Vec3;

use super::ImageSet;

pub const KERNEL_RADIUS: usize = 2;
pub const KERNEL_SIGMA: f64 = 1.0;

/// Unnormalized 1D Gaussian taps for offsets `-KERNEL_RADIUS..=KERNEL_RADIUS`.
pub fn gaussian_kernel_1d() -> [f64; 2 * KERNEL_RADIUS + 1] {
    let mut k = [0.0; 2 * KERNEL_RADIUS + 1];
    for (i, w) in k.iter_mut().enumerate() {
        let d = i as f64 - KERNEL_RADIUS as f64;
        *w = (-d * d / (2.0 * KERNEL_SIGMA * KERNEL_SIGMA)).exp();
    }
    k
}

/// Gaussian smoothing of range, intensity and position, normalized over
/// valid pixels only. Columns wrap around; rows are clipped. The validity
/// mask is unchanged.
pub fn smooth(img: &ImageSet) -> ImageSet {
    let g = img.geometry;
    let (rows, cols) = (g.rows, g.cols);
    let n = g.len();
    let k = gaussian_kernel_1d();
    let r = KERNEL_RADIUS as isize;

    // Channels: mask, range, intensity, x, y, z.
    const CH: usize = 6;
    let mut src = vec![[0.0f64; CH]; n];
    for i in 0..n {
        if img.is_valid(i) {
            let p = img.points[i];
            src[i] = [1.0, img.range[i], img.intensity[i], p.x, p.y, p.z];
        }
    }

    let mut horiz = vec![[0.0f64; CH]; n];
    for row in 0..rows {
        let base = row * cols;
        for col in 0..cols {
            let mut acc = [0.0f64; CH];
            for (t, w) in k.iter().enumerate() {
                let c = (col as isize + t as isize - r).rem_euclid(cols as isize) as usize;
                let s = &src[base + c];
                for ch in 0..CH {
                    acc[ch] += w * s[ch];
                }
            }
            horiz[base + col] = acc;
        }
    }

    let mut out = img.clone();
    for row in 0..rows {
        for col in 0..cols {
            let i = row * cols + col;
            if !img.is_valid(i) {
                continue;
            }
            let mut acc = [0.0f64; CH];
            for (t, w) in k.iter().enumerate() {
                let rr = row as isize + t as isize - r;
                if rr < 0 || rr >= rows as isize {
                    continue;
                }
                let s = &horiz[rr as usize * cols + col];
                for ch in 0..CH {
                    acc[ch] += w * s[ch];
                }
            }
            let norm = acc[0];
            out.range[i] = acc[1] / norm;
            out.intensity[i] = acc[2] / norm;
            out.points[i] = Vec3::new(acc[3] / norm, acc[4] / norm, acc[5] / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::{ImageGeometry, PixelState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct 2D masked convolution, no separability.
    fn naive(img: &ImageSet, values: &[f64]) -> Vec<f64> {
        let g = img.geometry;
        let k = gaussian_kernel_1d();
        let mut out = values.to_vec();
        for row in 0..g.rows {
            for col in 0..g.cols {
                let i = g.index(row, col);
                if !img.is_valid(i) {
                    continue;
                }
                let (mut num, mut den) = (0.0, 0.0);
                for dr in -2isize..=2 {
                    for dc in -2isize..=2 {
                        let rr = row as isize + dr;
                        if rr < 0 || rr >= g.rows as isize {
                            continue;
                        }
                        let cc = (col as isize + dc).rem_euclid(g.cols as isize) as usize;
                        let j = g.index(rr as usize, cc);
                        if img.is_valid(j) {
                            let w = k[(dr + 2) as usize] * k[(dc + 2) as usize];
                            num += w * values[j];
                            den += w;
                        }
                    }
                }
                out[i] = num / den;
            }
        }
        out
    }

    fn random_image(seed: u64, density: f64) -> ImageSet {
        let g = ImageGeometry::new(24, 50, 60.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = ImageSet::empty(g);
        for i in 0..g.len() {
            if rng.random_bool(density) {
                img.state[i] = PixelState::Measured;
                img.range[i] = rng.random_range(0.5..40.0);
                img.intensity[i] = rng.random_range(0.0..255.0);
            }
        }
        img
    }

    #[test]
    fn constant_image_is_invariant() {
        let mut img = random_image(1, 0.6);
        for i in 0..img.range.len() {
            if img.is_valid(i) {
                img.range[i] = 7.0;
            }
        }
        let s = smooth(&img);
        for i in 0..img.range.len() {
            if img.is_valid(i) {
                assert!((s.range[i] - 7.0).abs() < 1e-6);
            } else {
                assert_eq!(s.range[i], 0.0);
            }
        }
    }

    #[test]
    fn isolated_pixel_unchanged() {
        let g = ImageGeometry::new(10, 10, 60.0);
        let mut img = ImageSet::empty(g);
        let i = g.index(4, 4);
        img.state[i] = PixelState::Measured;
        img.range[i] = 3.25;
        img.intensity[i] = 77.0;
        let s = smooth(&img);
        assert_eq!(s.range[i], 3.25);
        assert_eq!(s.intensity[i], 77.0);
    }

    #[test]
    fn matches_naive_convolution() {
        for seed in 0..5 {
            let img = random_image(seed, 0.7);
            let s = smooth(&img);
            let r = naive(&img, &img.range);
            let it = naive(&img, &img.intensity);
            for i in 0..img.range.len() {
                assert!((s.range[i] - r[i]).abs() < 1e-5);
                assert!((s.intensity[i] - it[i]).abs() < 1e-5);
                assert_eq!(s.state[i], img.state[i]);
            }
        }
    }
}
