//! Debug PNG emission and a compact binary dump of an image set.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::Vec3;

use super::{ImageGeometry, ImageSet, PixelState};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("png encoding error: {0}")]
    Png(#[from] png::EncodingError),
    #[error("not an image dump: {0}")]
    Format(String),
}

const DUMP_MAGIC: &[u8; 8] = b"OPIMGDMP";
const DUMP_VERSION: u32 = 1;

/// 64 label colors: hues stepped by a coprime stride so neighbours differ.
pub const LABEL_PALETTE: [[u8; 3]; 64] = build_palette();

const fn hsv(h6: u32, v: u32) -> [u8; 3] {
    // h6 in [0, 6*256), full saturation.
    let sector = h6 / 256;
    let f = h6 % 256;
    let q = v * (255 - f) / 255;
    let t = v * f / 255;
    let (r, g, b) = match sector {
        0 => (v, t, 0),
        1 => (q, v, 0),
        2 => (0, v, t),
        3 => (0, q, v),
        4 => (t, 0, v),
        _ => (v, 0, q),
    };
    [r as u8, g as u8, b as u8]
}

const fn build_palette() -> [[u8; 3]; 64] {
    let mut p = [[0u8; 3]; 64];
    let mut i = 0;
    while i < 64 {
        let h = ((i * 23) % 64) as u32 * (6 * 256) / 64;
        let v = if i % 2 == 0 { 255 } else { 180 };
        p[i] = hsv(h, v);
        i += 1;
    }
    p
}

pub fn tone_map_range(range: f64) -> u8 {
    if range <= 0.0 {
        0
    } else {
        (255.0 / (1.0 + range)).round().clamp(0.0, 255.0) as u8
    }
}

fn write_png(path: &Path, width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Result<(), DumpError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut enc = png::Encoder::new(file, width as u32, height as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header()?;
    writer.write_image_data(data)?;
    writer.finish()?;
    Ok(())
}

/// Writes a grayscale PNG from per-pixel values.
pub fn write_png_gray(path: &Path, geometry: ImageGeometry, values: impl Iterator<Item = u8>) -> Result<(), DumpError> {
    let data: Vec<u8> = values.collect();
    write_png(path, geometry.cols, geometry.rows, png::ColorType::Grayscale, &data)
}

/// Label image as RGB: 0 black, 1 gray, clusters from [`LABEL_PALETTE`].
pub fn write_png_labels(path: &Path, geometry: ImageGeometry, labels: &[u32]) -> Result<(), DumpError> {
    let mut data = Vec::with_capacity(labels.len() * 3);
    for &l in labels {
        let c = match l {
            0 => [0, 0, 0],
            1 => [64, 64, 64],
            l => LABEL_PALETTE[(l as usize - 2) % 64],
        };
        data.extend_from_slice(&c);
    }
    write_png(path, geometry.cols, geometry.rows, png::ColorType::Rgb, &data)
}

/// Serializes range, intensity, pixel state and optional labels.
pub fn write_image_dump(w: &mut impl Write, img: &ImageSet, labels: Option<&[u32]>) -> Result<(), DumpError> {
    let g = img.geometry;
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(g.rows as u32).to_le_bytes())?;
    w.write_all(&(g.cols as u32).to_le_bytes())?;
    w.write_all(&g.vertical_fov_deg.to_le_bytes())?;
    w.write_all(&[labels.is_some() as u8])?;
    let mut buf = Vec::with_capacity(g.len() * 17);
    for i in 0..g.len() {
        buf.extend_from_slice(&img.range[i].to_le_bytes());
        buf.extend_from_slice(&img.intensity[i].to_le_bytes());
        buf.push(img.state[i] as u8);
    }
    if let Some(labels) = labels {
        for l in labels {
            buf.extend_from_slice(&l.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a dump written by [`write_image_dump`]. Positions are rebuilt from
/// pixel-center rays; normals are not stored.
pub fn read_image_dump(r: &mut impl Read) -> Result<(ImageSet, Option<Vec<u32>>), DumpError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let err = |m: &str| DumpError::Format(m.to_string());
    if bytes.len() < 29 || &bytes[..8] != DUMP_MAGIC {
        return Err(err("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    if u32_at(8) != DUMP_VERSION {
        return Err(err("unsupported version"));
    }
    let rows = u32_at(12) as usize;
    let cols = u32_at(16) as usize;
    let vfov = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let has_labels = bytes[28] != 0;
    let n = rows * cols;
    let need = 29 + n * 17 + if has_labels { n * 4 } else { 0 };
    if bytes.len() != need {
        return Err(err(&format!("expected {need} bytes, found {}", bytes.len())));
    }
    let g = ImageGeometry::new(rows, cols, vfov);
    let mut img = ImageSet::empty(g);
    let mut o = 29;
    for i in 0..n {
        img.range[i] = f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        img.intensity[i] = f64::from_le_bytes(bytes[o + 8..o + 16].try_into().unwrap());
        img.state[i] = match bytes[o + 16] {
            0 => PixelState::Empty,
            1 => PixelState::Measured,
            2 => PixelState::Interpolated,
            _ => return Err(err("bad pixel state")),
        };
        img.points[i] = if img.state[i].is_valid() {
            g.back_project(i / cols, i % cols, img.range[i])
        } else {
            Vec3::zeros()
        };
        o += 17;
    }
    let labels = has_labels.then(|| (0..n).map(|i| u32_at(o + 4 * i)).collect());
    Ok((img, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::projector::project;

    #[test]
    fn dump_round_trip() {
        let g = ImageGeometry::new(12, 30, 60.0);
        let img = project(&[Point::new(4.0, 1.0, 0.2, 99.0), Point::new(-3.0, 0.5, -0.4, 12.0)], g);
        let labels: Vec<u32> = (0..g.len() as u32).collect();
        let mut buf = Vec::new();
        write_image_dump(&mut buf, &img, Some(&labels)).unwrap();
        let (back, l) = read_image_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(back.range, img.range);
        assert_eq!(back.intensity, img.intensity);
        assert_eq!(back.state, img.state);
        assert_eq!(l.unwrap(), labels);
    }

    #[test]
    fn palette_has_distinct_neighbours() {
        for i in 0..63 {
            assert_ne!(LABEL_PALETTE[i], LABEL_PALETTE[i + 1]);
        }
        assert_eq!(tone_map_range(0.0), 0);
        assert_eq!(tone_map_range(1.0), 128);
    }
}
