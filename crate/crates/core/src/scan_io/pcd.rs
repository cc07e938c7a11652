//! PCD v0.7 reader/writer restricted to clouds carrying `x y z intensity`
//! as FLOAT32. Extra fields are tolerated and skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error, PartialEq)]
pub enum PcdError {
    #[error("malformed PCD header at line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("unsupported PCD schema: {0}")]
    UnsupportedSchema(String),
    #[error("truncated PCD body: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("truncated PCD body: expected {expected} rows, found {actual}")]
    TruncatedRows { expected: usize, actual: usize },
    #[error("malformed PCD data at line {line}: {message}")]
    Body { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcdEncoding {
    Ascii,
    Binary,
}

/// Parsed cloud plus the bookkeeping needed to reconcile against the header.
#[derive(Debug, Clone, PartialEq)]
pub struct PcdCloud {
    pub points: Vec<Point>,
    /// `POINTS` from the header.
    pub declared: usize,
    /// Points dropped because a coordinate or intensity was NaN/inf.
    pub nan_dropped: usize,
    /// Intensities outside `0..=255` that were clamped.
    pub intensity_clamped: usize,
    pub encoding: PcdEncoding,
}

#[derive(Debug, Clone)]
struct Field {
    name: String,
    size: usize,
    kind: char,
    count: usize,
}

#[derive(Debug)]
struct Header {
    fields: Vec<Field>,
    points: usize,
    encoding: PcdEncoding,
    /// Byte offset of the first body byte.
    body_offset: usize,
    /// 1-based line number of the first body line.
    body_line: usize,
}

fn header_err(line: usize, message: impl Into<String>) -> PcdError {
    PcdError::Header {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, key: &str) -> Result<usize, PcdError> {
    tok.parse::<usize>()
        .map_err(|_| header_err(line, format!("{key}: expected unsigned integer, got {tok:?}")))
}

fn parse_header(bytes: &[u8]) -> Result<Header, PcdError> {
    let mut names: Option<Vec<String>> = None;
    let mut sizes: Option<Vec<usize>> = None;
    let mut types: Option<Vec<char>> = None;
    let mut counts: Option<Vec<usize>> = None;
    let mut width: Option<usize> = None;
    let mut height: Option<usize> = None;
    let mut points: Option<usize> = None;

    let mut offset = 0;
    let mut line_no = 0;
    while offset < bytes.len() {
        line_no += 1;
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p + 1)
            .unwrap_or(bytes.len());
        let raw = std::str::from_utf8(&bytes[offset..end])
            .map_err(|_| header_err(line_no, "header is not valid UTF-8"))?;
        offset = end;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default().to_ascii_uppercase();
        let rest: Vec<&str> = toks.collect();
        match key.as_str() {
            "VERSION" => {
                let v = rest.first().copied().unwrap_or("");
                if v != "0.7" && v != ".7" {
                    return Err(PcdError::UnsupportedSchema(format!("PCD version {v:?}")));
                }
            }
            "FIELDS" | "COLUMNS" => names = Some(rest.iter().map(|s| s.to_string()).collect()),
            "SIZE" => {
                sizes = Some(
                    rest.iter()
                        .map(|t| parse_usize(t, line_no, "SIZE"))
                        .collect::<Result<_, _>>()?,
                )
            }
            "TYPE" => {
                let mut v = Vec::with_capacity(rest.len());
                for t in &rest {
                    match *t {
                        "F" | "I" | "U" => v.push(t.chars().next().unwrap()),
                        _ => return Err(header_err(line_no, format!("TYPE: unknown type {t:?}"))),
                    }
                }
                types = Some(v);
            }
            "COUNT" => {
                counts = Some(
                    rest.iter()
                        .map(|t| parse_usize(t, line_no, "COUNT"))
                        .collect::<Result<_, _>>()?,
                )
            }
            "WIDTH" => width = Some(parse_usize(rest.first().unwrap_or(&""), line_no, "WIDTH")?),
            "HEIGHT" => height = Some(parse_usize(rest.first().unwrap_or(&""), line_no, "HEIGHT")?),
            "POINTS" => points = Some(parse_usize(rest.first().unwrap_or(&""), line_no, "POINTS")?),
            "VIEWPOINT" => {
                if rest.len() != 7 || rest.iter().any(|t| t.parse::<f64>().is_err()) {
                    return Err(header_err(line_no, "VIEWPOINT: expected 7 numbers"));
                }
            }
            "DATA" => {
                let encoding = match rest.first().copied() {
                    Some("ascii") => PcdEncoding::Ascii,
                    Some("binary") => PcdEncoding::Binary,
                    Some(other) => {
                        return Err(PcdError::UnsupportedSchema(format!("DATA {other}")));
                    }
                    None => return Err(header_err(line_no, "DATA: missing encoding")),
                };
                let names = names.ok_or_else(|| header_err(line_no, "DATA before FIELDS"))?;
                let sizes = sizes.ok_or_else(|| header_err(line_no, "DATA before SIZE"))?;
                let types = types.ok_or_else(|| header_err(line_no, "DATA before TYPE"))?;
                let counts = counts.unwrap_or_else(|| vec![1; names.len()]);
                if sizes.len() != names.len() || types.len() != names.len() || counts.len() != names.len() {
                    return Err(header_err(
                        line_no,
                        "FIELDS, SIZE, TYPE and COUNT have different lengths",
                    ));
                }
                let wh = match (width, height) {
                    (Some(w), Some(h)) => w * h,
                    _ => return Err(header_err(line_no, "missing WIDTH or HEIGHT")),
                };
                let points = points.unwrap_or(wh);
                if points != wh {
                    return Err(header_err(
                        line_no,
                        format!("POINTS {points} does not match WIDTH*HEIGHT {wh}"),
                    ));
                }
                let fields = names
                    .into_iter()
                    .zip(sizes)
                    .zip(types)
                    .zip(counts)
                    .map(|(((name, size), kind), count)| Field {
                        name,
                        size,
                        kind,
                        count,
                    })
                    .collect();
                return Ok(Header {
                    fields,
                    points,
                    encoding,
                    body_offset: offset,
                    body_line: line_no + 1,
                });
            }
            other => return Err(header_err(line_no, format!("unknown header key {other:?}"))),
        }
    }
    Err(header_err(line_no + 1, "missing DATA line"))
}

/// Locates x, y, z, intensity. Returns `(byte offset, value index)` pairs for
/// binary and ASCII layouts respectively.
fn locate_fields(fields: &[Field]) -> Result<[(usize, usize); 4], PcdError> {
    let mut out = [(0usize, 0usize); 4];
    for (slot, want) in ["x", "y", "z", "intensity"].iter().enumerate() {
        let mut byte_off = 0;
        let mut value_idx = 0;
        let mut found = false;
        for f in fields {
            if f.name == *want {
                if f.kind != 'F' || f.size != 4 || f.count != 1 {
                    return Err(PcdError::UnsupportedSchema(format!(
                        "field {want} must be FLOAT32 with COUNT 1"
                    )));
                }
                out[slot] = (byte_off, value_idx);
                found = true;
                break;
            }
            byte_off += f.size * f.count;
            value_idx += f.count;
        }
        if !found {
            return Err(PcdError::UnsupportedSchema(format!("missing field {want}")));
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Collector {
    points: Vec<Point>,
    nan_dropped: usize,
    intensity_clamped: usize,
}

impl Collector {
    fn push(&mut self, v: [f32; 4]) {
        let p = Point::new(v[0], v[1], v[2], v[3]);
        if !p.is_finite() {
            self.nan_dropped += 1;
            return;
        }
        let clamped = p.intensity.clamp(0.0, 255.0);
        if clamped != p.intensity {
            self.intensity_clamped += 1;
        }
        self.points.push(Point { intensity: clamped, ..p });
    }
}

/// Parses a PCD v0.7 file (ASCII or little-endian binary).
pub fn parse_pcd(bytes: &[u8]) -> Result<PcdCloud, PcdError> {
    let header = parse_header(bytes)?;
    let layout = locate_fields(&header.fields)?;
    let body = &bytes[header.body_offset..];
    let mut out = Collector::default();
    out.points.reserve(header.points);

    match header.encoding {
        PcdEncoding::Binary => {
            let stride: usize = header.fields.iter().map(|f| f.size * f.count).sum();
            let expected = stride * header.points;
            if body.len() < expected {
                return Err(PcdError::Truncated {
                    expected,
                    actual: body.len(),
                });
            }
            for rec in body[..expected].chunks_exact(stride.max(1)) {
                let read = |off: usize| f32::from_le_bytes(rec[off..off + 4].try_into().unwrap());
                out.push([
                    read(layout[0].0),
                    read(layout[1].0),
                    read(layout[2].0),
                    read(layout[3].0),
                ]);
            }
        }
        PcdEncoding::Ascii => {
            let text = std::str::from_utf8(body).map_err(|e| PcdError::Body {
                line: header.body_line,
                message: format!("invalid UTF-8: {e}"),
            })?;
            let width: usize = header.fields.iter().map(|f| f.count).sum();
            let mut rows = 0;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                if rows == header.points {
                    break;
                }
                let line_no = header.body_line + i;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != width {
                    return Err(PcdError::Body {
                        line: line_no,
                        message: format!("expected {width} values, found {}", toks.len()),
                    });
                }
                let mut v = [0f32; 4];
                for (slot, (_, idx)) in layout.iter().enumerate() {
                    v[slot] = toks[*idx].parse::<f32>().map_err(|_| PcdError::Body {
                        line: line_no,
                        message: format!("cannot parse {:?} as float", toks[*idx]),
                    })?;
                }
                out.push(v);
                rows += 1;
            }
            if rows < header.points {
                return Err(PcdError::TruncatedRows {
                    expected: header.points,
                    actual: rows,
                });
            }
        }
    }

    Ok(PcdCloud {
        points: out.points,
        declared: header.points,
        nan_dropped: out.nan_dropped,
        intensity_clamped: out.intensity_clamped,
        encoding: header.encoding,
    })
}

/// Serializes points as an unorganized PCD v0.7 cloud.
pub fn write_pcd(points: &[Point], encoding: PcdEncoding) -> Vec<u8> {
    let n = points.len();
    let mut header = String::new();
    header.push_str("# .PCD v0.7 - Point Cloud Data file format\n");
    header.push_str("VERSION 0.7\nFIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\n");
    let _ = write!(header, "WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\n");
    match encoding {
        PcdEncoding::Ascii => {
            header.push_str("DATA ascii\n");
            for p in points {
                // `{}` on f32 prints the shortest string that parses back exactly.
                let _ = writeln!(header, "{} {} {} {}", p.x, p.y, p.z, p.intensity);
            }
            header.into_bytes()
        }
        PcdEncoding::Binary => {
            header.push_str("DATA binary\n");
            let mut out = header.into_bytes();
            out.reserve(n * 16);
            for p in points {
                for v in [p.x, p.y, p.z, p.intensity] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ascii(body: &str, n: usize) -> String {
        format!(
            "VERSION 0.7\nFIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\nWIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii\n{body}"
        )
    }

    #[test]
    fn single_ascii_point() {
        let cloud = parse_pcd(ascii("1.0 2.0 3.0 100\n", 1).as_bytes()).unwrap();
        assert_eq!(cloud.points, vec![Point::new(1.0, 2.0, 3.0, 100.0)]);
        assert_eq!(cloud.nan_dropped, 0);
    }

    #[test]
    fn missing_rows_is_truncation() {
        let body = "0 0 0 1\n1 1 1 1\n2 2 2 2\n3 3 3 3\n";
        let err = parse_pcd(ascii(body, 5).as_bytes()).unwrap_err();
        assert_eq!(err, PcdError::TruncatedRows { expected: 5, actual: 4 });
    }

    #[test]
    fn truncated_binary_reports_byte_counts() {
        let pts = vec![Point::new(1.0, 2.0, 3.0, 4.0); 3];
        let mut bytes = write_pcd(&pts, PcdEncoding::Binary);
        bytes.truncate(bytes.len() - 5);
        assert_eq!(
            parse_pcd(&bytes).unwrap_err(),
            PcdError::Truncated { expected: 48, actual: 43 }
        );
    }

    #[test]
    fn missing_intensity_is_unsupported() {
        let text = "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\nWIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA ascii\n1 2 3\n";
        assert!(matches!(parse_pcd(text.as_bytes()), Err(PcdError::UnsupportedSchema(_))));
    }

    #[test]
    fn malformed_header_names_line() {
        let text = "VERSION 0.7\nFIELDS x y z intensity\nSIZE 4 4 four 4\n";
        match parse_pcd(text.as_bytes()) {
            Err(PcdError::Header { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nan_points_dropped_and_counted() {
        let body = "1 2 3 4\nnan 0 0 1\n5 6 7 8\n";
        let cloud = parse_pcd(ascii(body, 3).as_bytes()).unwrap();
        assert_eq!(cloud.points.len(), 2);
        assert_eq!(cloud.nan_dropped, 1);
        assert_eq!(cloud.points.len(), cloud.declared - cloud.nan_dropped);
    }

    #[test]
    fn extra_fields_are_skipped() {
        let text = "VERSION 0.7\nFIELDS ring x y z intensity t\nSIZE 2 4 4 4 4 8\nTYPE U F F F F F\nCOUNT 1 1 1 1 1 1\nWIDTH 1\nHEIGHT 1\nPOINTS 1\nDATA binary\n";
        let mut bytes = text.as_bytes().to_vec();
        bytes.extend_from_slice(&7u16.to_le_bytes());
        for v in [1.5f32, -2.0, 0.25, 42.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&0f64.to_le_bytes());
        let cloud = parse_pcd(&bytes).unwrap();
        assert_eq!(cloud.points, vec![Point::new(1.5, -2.0, 0.25, 42.0)]);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..16_384)
            .map(|_| {
                Point::new(
                    rng.random_range(-100.0..100.0),
                    rng.random_range(-100.0..100.0),
                    rng.random_range(-100.0..100.0),
                    rng.random_range(0.0..255.0),
                )
            })
            .collect();
        for enc in [PcdEncoding::Binary, PcdEncoding::Ascii] {
            let back = parse_pcd(&write_pcd(&pts, enc)).unwrap();
            assert_eq!(back.points.len(), pts.len());
            for (a, b) in pts.iter().zip(&back.points) {
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
                assert_eq!(a.z.to_bits(), b.z.to_bits());
                assert_eq!(a.intensity.to_bits(), b.intensity.to_bits());
            }
        }
    }
}
