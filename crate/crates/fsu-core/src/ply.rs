//! PLY point cloud reader and writer.
//!
//! Reads ASCII and binary little-endian PLY files that declare an
//! `element vertex` with at least `x`, `y`, `z` properties. When `red`,
//! `green`, and `blue` are all present as `uchar`, they are parsed into
//! colors; any other vertex property is skipped. Written files use the fixed
//! layout `x, y, z` (float32, or float64 on request) followed by
//! `red, green, blue` (uchar) when the cloud is colored.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{FsuError, Result};

/// Body encoding of a PLY file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Position precision used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyPrecision {
    Float32,
    Float64,
}

/// Options for [`write_ply`].
#[derive(Debug, Clone, Copy)]
pub struct PlyWriteOptions {
    pub format: PlyFormat,
    pub precision: PlyPrecision,
}

impl Default for PlyWriteOptions {
    fn default() -> Self {
        Self {
            format: PlyFormat::BinaryLittleEndian,
            precision: PlyPrecision::Float32,
        }
    }
}

/// Summary of the vertex element of a parsed header.
#[derive(Debug, Clone)]
pub struct PlyHeaderInfo {
    pub format: PlyFormat,
    pub vertex_count: usize,
    pub has_color: bool,
    /// Vertex property names in declaration order.
    pub property_order: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_f64(self, bytes: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => bytes[0] as i8 as f64,
            ScalarType::U8 => bytes[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::I32 => {
                i32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::U32 => {
                u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::F32 => {
                f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as f64
            }
            ScalarType::F64 => f64::from_le_bytes([
                bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6], bytes[7],
            ]),
        }
    }
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    ty: ScalarType,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
    /// Set when the element declares a `property list`; such elements cannot
    /// be skipped in binary bodies.
    has_list: bool,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    lines: usize,
    byte_len: u64,
}

fn header_err(line: usize, message: impl Into<String>) -> FsuError {
    FsuError::PlyParse {
        line,
        message: message.into(),
    }
}

fn body_err(offset: u64, message: impl Into<String>) -> FsuError {
    FsuError::PlyBody {
        offset,
        message: message.into(),
    }
}

struct HeaderLines<'a, R> {
    reader: &'a mut R,
    line_no: usize,
    byte_len: u64,
}

impl<R: BufRead> HeaderLines<'_, R> {
    fn next(&mut self, line: &mut String) -> Result<usize> {
        line.clear();
        let n = self.reader.read_line(line)?;
        self.byte_len += n as u64;
        self.line_no += 1;
        Ok(n)
    }
}

fn parse_header<R: BufRead>(reader: &mut R) -> Result<Header> {
    let mut line = String::new();
    let mut lines = HeaderLines {
        reader,
        line_no: 0,
        byte_len: 0,
    };

    if lines.next(&mut line)? == 0 || line.trim_end() != "ply" {
        return Err(header_err(1, "expected magic line 'ply'"));
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();

    loop {
        if lines.next(&mut line)? == 0 {
            return Err(header_err(lines.line_no, "unexpected end of header"));
        }
        let line_no = lines.line_no;
        let trimmed = line.trim_end();
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => continue,
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                let version = tokens.next().unwrap_or("");
                if version != "1.0" {
                    return Err(header_err(
                        line_no,
                        format!("unsupported PLY version '{version}'"),
                    ));
                }
                format = Some(match kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(header_err(
                            line_no,
                            format!("unsupported format '{other}'"),
                        ))
                    }
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| header_err(line_no, "element without a name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| header_err(line_no, "element without a valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                let ty_token = tokens
                    .next()
                    .ok_or_else(|| header_err(line_no, "property without a type"))?;
                if ty_token == "list" {
                    element.has_list = true;
                    continue;
                }
                let ty = ScalarType::parse(ty_token).ok_or_else(|| {
                    header_err(line_no, format!("unknown property type '{ty_token}'"))
                })?;
                let name = tokens
                    .next()
                    .ok_or_else(|| header_err(line_no, "property without a name"))?;
                element.properties.push(Property {
                    name: name.to_string(),
                    ty,
                });
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(header_err(
                    line_no,
                    format!("unknown header keyword '{other}'"),
                ))
            }
        }
    }

    let format = format.ok_or_else(|| header_err(lines.line_no, "missing 'format' line"))?;
    Ok(Header {
        format,
        elements,
        lines: lines.line_no,
        byte_len: lines.byte_len,
    })
}

struct VertexLayout {
    /// Property indices of x, y, z.
    position: [usize; 3],
    /// Property indices of red, green, blue when all three are `uchar`.
    color: Option<[usize; 3]>,
}

fn vertex_layout(element: &Element, header_lines: usize) -> Result<VertexLayout> {
    let find = |name: &str| element.properties.iter().position(|p| p.name == name);
    let position = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => [x, y, z],
        _ => {
            return Err(header_err(
                header_lines,
                "vertex element must declare x, y and z properties",
            ))
        }
    };
    let color = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            let all_u8 = [r, g, b]
                .iter()
                .all(|&i| element.properties[i].ty == ScalarType::U8);
            // Non-8-bit color properties are treated like any other unknown
            // property and skipped.
            all_u8.then_some([r, g, b])
        }
        _ => None,
    };
    Ok(VertexLayout { position, color })
}

/// Reads a point cloud from a PLY file.
pub fn read_ply(path: &Path) -> Result<PointCloud> {
    read_ply_with_header(path).map(|(cloud, _)| cloud)
}

/// Reads a point cloud and the parsed header summary.
pub fn read_ply_with_header(path: &Path) -> Result<(PointCloud, PlyHeaderInfo)> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let header = parse_header(&mut reader)?;

    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| header_err(header.lines, "file declares no vertex element"))?;
    let vertex = &header.elements[vertex_pos];
    if vertex.has_list {
        return Err(header_err(
            header.lines,
            "list properties on the vertex element are not supported",
        ));
    }
    let layout = vertex_layout(vertex, header.lines)?;

    let mut positions = Vec::with_capacity(vertex.count);
    let mut colors = layout.color.map(|_| Vec::with_capacity(vertex.count));

    match header.format {
        PlyFormat::Ascii => {
            let mut line_no = header.lines;
            let mut line = String::new();
            // Elements appear in declaration order; records of elements other
            // than vertex are skipped line by line.
            for (ei, element) in header.elements.iter().enumerate() {
                for record in 0..element.count {
                    line.clear();
                    line_no += 1;
                    if reader.read_line(&mut line)? == 0 {
                        return Err(header_err(
                            line_no,
                            format!(
                                "truncated body: expected {} more '{}' records",
                                element.count - record,
                                element.name
                            ),
                        ));
                    }
                    if ei != vertex_pos {
                        continue;
                    }
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.len() < element.properties.len() {
                        return Err(header_err(
                            line_no,
                            format!(
                                "vertex record has {} fields, expected {}",
                                tokens.len(),
                                element.properties.len()
                            ),
                        ));
                    }
                    // Parse at the declared precision so float32 columns
                    // round-trip exactly through ASCII.
                    let get = |i: usize| -> Result<f64> {
                        let token = tokens[i];
                        let parsed = match element.properties[i].ty {
                            ScalarType::F32 => token.parse::<f32>().map(|v| v as f64).ok(),
                            _ => token.parse::<f64>().ok(),
                        };
                        parsed.ok_or_else(|| {
                            header_err(line_no, format!("invalid number '{token}'"))
                        })
                    };
                    positions.push([
                        get(layout.position[0])?,
                        get(layout.position[1])?,
                        get(layout.position[2])?,
                    ]);
                    if let (Some([r, g, b]), Some(out)) = (layout.color, colors.as_mut()) {
                        let channel = |i: usize| -> Result<u8> {
                            tokens[i].parse::<u8>().map_err(|_| {
                                header_err(
                                    line_no,
                                    format!("invalid color value '{}'", tokens[i]),
                                )
                            })
                        };
                        out.push([channel(r)?, channel(g)?, channel(b)?]);
                    }
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let mut offset = header.byte_len;
            for (ei, element) in header.elements.iter().enumerate() {
                let record_size: usize = element.properties.iter().map(|p| p.ty.size()).sum();
                if ei != vertex_pos {
                    if ei > vertex_pos {
                        // Everything needed has been read.
                        break;
                    }
                    if element.has_list {
                        return Err(body_err(
                            offset,
                            format!(
                                "cannot skip element '{}' with list properties before vertex data",
                                element.name
                            ),
                        ));
                    }
                    let skip = (record_size * element.count) as u64;
                    std::io::copy(&mut (&mut reader).take(skip), &mut std::io::sink())?;
                    offset += skip;
                    continue;
                }
                let mut record = vec![0u8; record_size];
                let prop_offsets: Vec<usize> = element
                    .properties
                    .iter()
                    .scan(0usize, |acc, p| {
                        let at = *acc;
                        *acc += p.ty.size();
                        Some(at)
                    })
                    .collect();
                for i in 0..element.count {
                    reader.read_exact(&mut record).map_err(|_| {
                        body_err(
                            offset,
                            format!("truncated body: vertex {i} of {}", element.count),
                        )
                    })?;
                    offset += record_size as u64;
                    let scalar = |pi: usize| {
                        element.properties[pi]
                            .ty
                            .read_f64(&record[prop_offsets[pi]..])
                    };
                    positions.push([
                        scalar(layout.position[0]),
                        scalar(layout.position[1]),
                        scalar(layout.position[2]),
                    ]);
                    if let (Some([r, g, b]), Some(out)) = (layout.color, colors.as_mut()) {
                        out.push([
                            record[prop_offsets[r]],
                            record[prop_offsets[g]],
                            record[prop_offsets[b]],
                        ]);
                    }
                }
            }
        }
    }

    let info = PlyHeaderInfo {
        format: header.format,
        vertex_count: vertex.count,
        has_color: layout.color.is_some(),
        property_order: vertex.properties.iter().map(|p| p.name.clone()).collect(),
    };
    let cloud = PointCloud::new(positions, colors)?;
    Ok((cloud, info))
}

/// Writes a point cloud to a PLY file with the fixed property layout.
pub fn write_ply(cloud: &PointCloud, path: &Path, options: PlyWriteOptions) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);

    let position_type = match options.precision {
        PlyPrecision::Float32 => "float",
        PlyPrecision::Float64 => "double",
    };
    let format_line = match options.format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };

    let mut header = String::new();
    let _ = writeln!(header, "ply");
    let _ = writeln!(header, "format {format_line} 1.0");
    let _ = writeln!(header, "comment generated by fsu");
    let _ = writeln!(header, "element vertex {}", cloud.len());
    for axis in ["x", "y", "z"] {
        let _ = writeln!(header, "property {position_type} {axis}");
    }
    if cloud.has_colors() {
        for channel in ["red", "green", "blue"] {
            let _ = writeln!(header, "property uchar {channel}");
        }
    }
    let _ = writeln!(header, "end_header");
    writer.write_all(header.as_bytes())?;

    let colors = cloud.colors();
    match options.format {
        PlyFormat::Ascii => {
            let mut line = String::new();
            for (i, p) in cloud.positions().iter().enumerate() {
                line.clear();
                match options.precision {
                    PlyPrecision::Float32 => {
                        let _ = write!(line, "{} {} {}", p[0] as f32, p[1] as f32, p[2] as f32);
                    }
                    PlyPrecision::Float64 => {
                        let _ = write!(line, "{} {} {}", p[0], p[1], p[2]);
                    }
                }
                if let Some(c) = colors {
                    let _ = write!(line, " {} {} {}", c[i][0], c[i][1], c[i][2]);
                }
                line.push('\n');
                writer.write_all(line.as_bytes())?;
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (i, p) in cloud.positions().iter().enumerate() {
                match options.precision {
                    PlyPrecision::Float32 => {
                        for &c in p {
                            writer.write_all(&(c as f32).to_le_bytes())?;
                        }
                    }
                    PlyPrecision::Float64 => {
                        for &c in p {
                            writer.write_all(&c.to_le_bytes())?;
                        }
                    }
                }
                if let Some(c) = colors {
                    writer.write_all(&c[i])?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn temp_path(dir: &tempfile::TempDir, name: &str) -> std::path::PathBuf {
        dir.path().join(name)
    }

    #[test]
    fn reads_ascii_xyz_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "a.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0.5 0\n0 1 2\n",
        )
        .unwrap();
        let (cloud, info) = read_ply_with_header(&path).unwrap();
        assert_eq!(cloud.len(), 3);
        assert!(!cloud.has_colors());
        assert!(!info.has_color);
        assert_eq!(info.vertex_count, 3);
        assert_eq!(cloud.positions()[1], [1.0, 0.5, 0.0]);
    }

    #[test]
    fn reads_binary_with_colors() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "b.ply");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(
            b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        );
        for (p, c) in [([0.5f32, 0.25, 0.75], [10u8, 20, 30]), ([1.0, 2.0, 3.0], [255, 0, 128])] {
            for v in p {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            bytes.extend_from_slice(&c);
        }
        std::fs::write(&path, bytes).unwrap();
        let (cloud, info) = read_ply_with_header(&path).unwrap();
        assert_eq!(cloud.len(), 2);
        assert!(info.has_color);
        assert_eq!(cloud.colors().unwrap()[1], [255, 0, 128]);
        assert_eq!(cloud.positions()[0], [0.5, 0.25, 0.75]);
    }

    #[test]
    fn skips_unknown_vertex_properties() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "extra.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nproperty uchar alpha\nend_header\n1 2 3 0.5 9\n",
        )
        .unwrap();
        let (cloud, info) = read_ply_with_header(&path).unwrap();
        assert_eq!(cloud.positions()[0], [1.0, 2.0, 3.0]);
        assert!(!info.has_color);
        assert_eq!(info.property_order.len(), 5);
    }

    #[test]
    fn binary_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path1 = temp_path(&dir, "r1.ply");
        let path2 = temp_path(&dir, "r2.ply");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let positions: Vec<[f64; 3]> = (0..10_000)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let colors: Vec<[u8; 3]> = (0..10_000).map(|_| rng.gen()).collect();
        let cloud = PointCloud::new(positions, Some(colors)).unwrap();

        write_ply(&cloud, &path1, PlyWriteOptions::default()).unwrap();
        let reread = read_ply(&path1).unwrap();
        write_ply(&reread, &path2, PlyWriteOptions::default()).unwrap();
        let a = std::fs::read(&path1).unwrap();
        let b = std::fs::read(&path2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn f64_round_trip_preserves_positions_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "f64.ply");
        let cloud = PointCloud::from_positions(vec![[0.1, 0.2, 0.3], [1.0 / 3.0, 2.0 / 7.0, 0.9]])
            .unwrap();
        let options = PlyWriteOptions {
            format: PlyFormat::BinaryLittleEndian,
            precision: PlyPrecision::Float64,
        };
        write_ply(&cloud, &path, options).unwrap();
        let reread = read_ply(&path).unwrap();
        assert_eq!(reread.positions(), cloud.positions());
    }

    #[test]
    fn ascii_round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "ascii.ply");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let positions: Vec<[f64; 3]> = (0..100)
            .map(|_| {
                [
                    rng.gen::<f32>() as f64,
                    rng.gen::<f32>() as f64,
                    rng.gen::<f32>() as f64,
                ]
            })
            .collect();
        let cloud = PointCloud::from_positions(positions).unwrap();
        let options = PlyWriteOptions {
            format: PlyFormat::Ascii,
            precision: PlyPrecision::Float32,
        };
        write_ply(&cloud, &path, options).unwrap();
        let reread = read_ply(&path).unwrap();
        assert_eq!(reread.positions(), cloud.positions());
    }

    #[test]
    fn empty_cloud_writes_valid_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "empty.ply");
        let cloud = PointCloud::from_positions(vec![]).unwrap();
        write_ply(&cloud, &path, PlyWriteOptions::default()).unwrap();
        let (reread, info) = read_ply_with_header(&path).unwrap();
        assert_eq!(info.vertex_count, 0);
        assert!(reread.is_empty());
    }

    #[test]
    fn single_colored_point_record_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "one.ply");
        let cloud =
            PointCloud::new(vec![[1.0, 2.0, 3.0]], Some(vec![[7, 8, 9]])).unwrap();
        write_ply(&cloud, &path, PlyWriteOptions::default()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let body_start = bytes
            .windows(11)
            .position(|w| w == b"end_header\n")
            .unwrap()
            + 11;
        // 3 float32 + 3 uchar.
        assert_eq!(bytes.len() - body_start, 15);
        assert_eq!(&bytes[body_start + 12..], &[7, 8, 9]);
    }

    #[test]
    fn ascii_skips_other_elements_around_vertex() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "multi.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\n\
             element material 2\nproperty float shininess\n\
             element vertex 2\nproperty float x\nproperty float y\nproperty float z\n\
             element face 1\nproperty list uchar int vertex_indices\n\
             end_header\n\
             0.5\n0.9\n\
             1 2 3\n4 5 6\n\
             3 0 1 1\n",
        )
        .unwrap();
        let cloud = read_ply(&path).unwrap();
        assert_eq!(cloud.positions(), &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
    }

    #[test]
    fn binary_skips_fixed_size_element_before_vertex() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "pre.ply");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(
            b"ply\nformat binary_little_endian 1.0\n\
              element material 2\nproperty float shininess\nproperty uchar mode\n\
              element vertex 1\nproperty float x\nproperty float y\nproperty float z\n\
              end_header\n",
        );
        for _ in 0..2 {
            bytes.extend_from_slice(&1.5f32.to_le_bytes());
            bytes.push(7);
        }
        for v in [9.0f32, 8.0, 7.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(&path, bytes).unwrap();
        let cloud = read_ply(&path).unwrap();
        assert_eq!(cloud.positions(), &[[9.0, 8.0, 7.0]]);
    }

    #[test]
    fn binary_list_element_before_vertex_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "listpre.ply");
        std::fs::write(
            &path,
            b"ply\nformat binary_little_endian 1.0\n\
              element face 1\nproperty list uchar int vertex_indices\n\
              element vertex 1\nproperty float x\nproperty float y\nproperty float z\n\
              end_header\n\x00".as_slice(),
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(FsuError::PlyBody { .. })));
    }

    #[test]
    fn malformed_header_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "bad.ply");
        std::fs::write(&path, "ply\nformat big_endian 1.0\nend_header\n").unwrap();
        match read_ply(&path) {
            Err(FsuError::PlyParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_binary_body_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "trunc.ply");
        use std::io::Write as _;
        let mut f = File::create(&path).unwrap();
        f.write_all(
            b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        )
        .unwrap();
        f.write_all(&1.0f32.to_le_bytes()).unwrap();
        drop(f);
        match read_ply(&path) {
            Err(FsuError::PlyBody { offset, .. }) => assert!(offset > 0),
            other => panic!("expected body error, got {other:?}"),
        }
    }

    #[test]
    fn missing_position_property_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "nopos.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n",
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(FsuError::PlyParse { .. })));
    }
}
