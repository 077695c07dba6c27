//! Point cloud files: PLY (ASCII or binary little-endian) and plain
//! three-column text.
//!
//! Only the `vertex` element is read; extra vertex properties are skipped.
//! Non-finite points are dropped and counted rather than rejected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// A cloud plus what was discarded while reading it.
#[derive(Debug, Clone)]
pub struct LoadedCloud {
    pub cloud: PointCloud,
    /// Points dropped for NaN or infinite coordinates.
    pub dropped_non_finite: usize,
}

/// Reads a PLY file (detected by its `ply` magic line) or a text file with
/// one `x y z` triple per line. `#` starts a comment in text files.
pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<LoadedCloud> {
    let path = path.as_ref();
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => return Err(e.into()),
    };
    let raw = if bytes.starts_with(b"ply\n") || bytes.starts_with(b"ply\r\n") {
        parse_ply(path, &bytes)?
    } else {
        parse_text(path, &bytes)?
    };
    let total = raw.len();
    let points: Vec<Vec3> = raw.into_iter().filter(|p| p.iter().all(|c| c.is_finite())).collect();
    let dropped = total - points.len();
    if points.is_empty() {
        return Err(Error::EmptyAfterFiltering {
            path: path.to_path_buf(),
            dropped,
        });
    }
    Ok(LoadedCloud {
        cloud: PointCloud::new(points)?,
        dropped_non_finite: dropped,
    })
}

fn malformed(path: &Path, location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::MalformedFile {
        path: path.to_path_buf(),
        location: location.into(),
        message: message.into(),
    }
}

fn parse_text(path: &Path, bytes: &[u8]) -> Result<Vec<Vec3>> {
    let text = std::str::from_utf8(bytes).map_err(|e| malformed(path, format!("byte {}", e.valid_up_to()), "not UTF-8 text"))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if fields.len() != 3 {
            return Err(malformed(path, format!("line {}", n + 1), format!("expected 3 columns, found {}", fields.len())));
        }
        let mut p = [0.0; 3];
        for (slot, f) in p.iter_mut().zip(&fields) {
            *slot = f.parse::<f64>().ok().ok_or_else(|| malformed(path, format!("line {}", n + 1), format!("invalid number {f:?}")))?;
        }
        points.push(Vec3::from(p));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

struct Header {
    format: PlyFormat,
    vertex_count: usize,
    properties: Vec<(String, Scalar)>,
    /// Byte offset of the first body byte.
    body_start: usize,
    /// Line number of the first body line (ASCII only).
    body_line: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut format = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    let mut in_vertex = false;
    let mut offset = 0;
    let mut line_no = 0;
    loop {
        let rest = &bytes[offset..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return Err(malformed(path, format!("line {}", line_no + 1), "header is not terminated by end_header"));
        };
        line_no += 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| malformed(path, format!("line {line_no}"), "header is not ASCII"))?
            .trim();
        offset += end + 1;
        let loc = format!("line {line_no}");
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["ply"] if line_no == 1 => {}
            ["format", "ascii", _] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", _] => format = Some(PlyFormat::BinaryLittleEndian),
            ["format", other, ..] => return Err(malformed(path, loc, format!("unsupported format {other}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                if vertex_count.is_some() {
                    // Elements after the vertices are never read.
                    in_vertex = false;
                    continue;
                }
                if *name != "vertex" {
                    return Err(malformed(path, loc, format!("element {name} precedes vertex")));
                }
                vertex_count = Some(count.parse().map_err(|_| malformed(path, loc.clone(), "invalid vertex count"))?);
                in_vertex = true;
            }
            ["property", "list", ..] if in_vertex => {
                return Err(malformed(path, loc, "list properties on vertices are not supported"));
            }
            ["property", ty, name] if in_vertex => {
                let scalar = Scalar::parse(ty).ok_or_else(|| malformed(path, loc.clone(), format!("unknown property type {ty}")))?;
                properties.push((name.to_string(), scalar));
            }
            ["property", ..] => {}
            ["end_header"] => break,
            _ => return Err(malformed(path, loc, format!("unexpected header line {line:?}"))),
        }
    }
    let format = format.ok_or_else(|| malformed(path, "header", "missing format line"))?;
    let vertex_count = vertex_count.ok_or_else(|| malformed(path, "header", "missing vertex element"))?;
    Ok(Header {
        format,
        vertex_count,
        properties,
        body_start: offset,
        body_line: line_no + 1,
    })
}

fn parse_ply(path: &Path, bytes: &[u8]) -> Result<Vec<Vec3>> {
    let header = parse_header(path, bytes)?;
    let position = |axis: &str| {
        header
            .properties
            .iter()
            .position(|(n, _)| n == axis)
            .ok_or_else(|| malformed(path, "header", format!("vertex has no {axis} property")))
    };
    let xyz = [position("x")?, position("y")?, position("z")?];
    let body = &bytes[header.body_start..];
    let mut points = Vec::with_capacity(header.vertex_count);
    match header.format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(body).map_err(|e| malformed(path, format!("byte {}", header.body_start + e.valid_up_to()), "body is not ASCII"))?;
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            for _ in 0..header.vertex_count {
                let Some((n, line)) = lines.next() else {
                    return Err(malformed(path, "end of file", format!("expected {} vertices, found {}", header.vertex_count, points.len())));
                };
                let loc = format!("line {}", header.body_line + n);
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() < header.properties.len() {
                    return Err(malformed(path, loc, format!("expected {} values, found {}", header.properties.len(), fields.len())));
                }
                let mut p = [0.0; 3];
                for (slot, &col) in p.iter_mut().zip(&xyz) {
                    *slot = fields[col].parse::<f64>().ok().ok_or_else(|| malformed(path, loc.clone(), format!("invalid number {:?}", fields[col])))?;
                }
                points.push(Vec3::from(p));
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let mut offsets = Vec::with_capacity(header.properties.len());
            let mut stride = 0;
            for (_, s) in &header.properties {
                offsets.push(stride);
                stride += s.size();
            }
            let needed = stride * header.vertex_count;
            if body.len() < needed {
                return Err(malformed(
                    path,
                    format!("byte {}", header.body_start + body.len()),
                    format!("truncated vertex data: need {needed} bytes, found {}", body.len()),
                ));
            }
            for record in body[..needed].chunks_exact(stride) {
                let mut p = [0.0; 3];
                for (slot, &col) in p.iter_mut().zip(&xyz) {
                    *slot = header.properties[col].1.read_le(&record[offsets[col]..]);
                }
                points.push(Vec3::from(p));
            }
        }
    }
    Ok(points)
}

/// Writes `x y z` as 32-bit floats.
pub fn write_ply(path: impl AsRef<Path>, cloud: &PointCloud, format: PlyFormat) -> Result<()> {
    let mut out = header_bytes(cloud.len(), format, false);
    for p in cloud.points() {
        push_vertex(&mut out, p, None, format);
    }
    write_file(path.as_ref(), &out)
}

/// Writes `x y z red green blue`, one color per point.
pub fn write_colored_ply(path: impl AsRef<Path>, points: &[(Vec3, [u8; 3])], format: PlyFormat) -> Result<()> {
    let mut out = header_bytes(points.len(), format, true);
    for (p, rgb) in points {
        push_vertex(&mut out, p, Some(*rgb), format);
    }
    write_file(path.as_ref(), &out)
}

fn header_bytes(count: usize, format: PlyFormat, colored: bool) -> Vec<u8> {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    let mut h = format!("ply\nformat {fmt} 1.0\nelement vertex {count}\nproperty float x\nproperty float y\nproperty float z\n");
    if colored {
        h.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    h.push_str("end_header\n");
    h.into_bytes()
}

fn push_vertex(out: &mut Vec<u8>, p: &Vec3, rgb: Option<[u8; 3]>, format: PlyFormat) {
    let xyz = [p.x as f32, p.y as f32, p.z as f32];
    match format {
        PlyFormat::Ascii => {
            let mut line = format!("{} {} {}", xyz[0], xyz[1], xyz[2]);
            if let Some([r, g, b]) = rgb {
                line.push_str(&format!(" {r} {g} {b}"));
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        }
        PlyFormat::BinaryLittleEndian => {
            for c in xyz {
                out.extend_from_slice(&c.to_le_bytes());
            }
            if let Some(rgb) = rgb {
                out.extend_from_slice(&rgb);
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Loads `<label>.ply` files from a directory into a model library keyed by label.
pub fn load_model_library(dir: impl AsRef<Path>) -> Result<crate::registration::ModelLibrary> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::FileNotFound(dir.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")))
        .collect();
    paths.sort();
    let mut library = crate::registration::ModelLibrary::new();
    for p in paths {
        let label = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        library.insert(label, load_point_cloud(&p)?.cloud);
    }
    Ok(library)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_extra_properties() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ply");
        fs::write(
            &path,
            "ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\nproperty float nx\nproperty float x\nproperty float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n9 1 2 3\n9 4 5 6\n",
        )
        .unwrap();
        let loaded = load_point_cloud(&path).unwrap();
        assert_eq!(loaded.cloud.points()[1], Vec3::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn text_format_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.xyz");
        fs::write(&path, "# header\n1 2 3\n\n4,5,6\nnan 0 0\n").unwrap();
        let loaded = load_point_cloud(&path).unwrap();
        assert_eq!(loaded.cloud.len(), 2);
        assert_eq!(loaded.dropped_non_finite, 1);

        fs::write(&path, "1 2 3\n1 2\n").unwrap();
        match load_point_cloud(&path) {
            Err(Error::MalformedFile { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("{other:?}"),
        }
        fs::write(&path, "nan nan nan\n").unwrap();
        assert!(matches!(load_point_cloud(&path), Err(Error::EmptyAfterFiltering { dropped: 1, .. })));
        assert!(matches!(load_point_cloud(dir.path().join("missing.ply")), Err(Error::FileNotFound(_))));
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.ply");
        let cloud = PointCloud::new(vec![Vec3::new(1.0, 2.0, 3.0); 4]).unwrap();
        write_ply(&path, &cloud, PlyFormat::BinaryLittleEndian).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 5);
        fs::write(&path, &bytes).unwrap();
        match load_point_cloud(&path) {
            Err(Error::MalformedFile { location, .. }) => assert!(location.starts_with("byte")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn big_endian_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        fs::write(&path, "ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n").unwrap();
        assert!(matches!(load_point_cloud(&path), Err(Error::MalformedFile { .. })));
    }

    #[test]
    fn colored_ascii_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ply");
        write_colored_ply(&path, &[(Vec3::new(0.5, 0.25, 1.0), [255, 0, 0])], PlyFormat::Ascii).unwrap();
        let loaded = load_point_cloud(&path).unwrap();
        assert_eq!(loaded.cloud.points()[0], Vec3::new(0.5, 0.25, 1.0));
    }
}
