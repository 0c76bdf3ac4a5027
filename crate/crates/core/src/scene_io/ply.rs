//! Binary little-endian PLY in the layout written by the reference Gaussian
//! splatting trainer.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use super::{Gaussian3D, SH_REST_LEN};
use crate::{Error, Result};

/// Vertex properties written by [`write_ply`], in file order. Normals are
/// written as zeros for compatibility with common viewers and ignored on load.
pub static PLY_PROPERTIES: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut names: Vec<String> = ["x", "y", "z", "nx", "ny", "nz"].map(String::from).to_vec();
    names.extend((0..3).map(|i| format!("f_dc_{i}")));
    names.extend((0..SH_REST_LEN).map(|i| format!("f_rest_{i}")));
    names.push("opacity".into());
    names.extend((0..3).map(|i| format!("scale_{i}")));
    names.extend((0..4).map(|i| format!("rot_{i}")));
    names
});

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
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

    fn read(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    elements: Vec<Element>,
    /// Byte length of the header including the `end_header` line.
    len: usize,
}

fn parse_header(data: &[u8]) -> Result<Header> {
    const END: &[u8] = b"end_header";
    let end = data
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::Format("missing end_header".into()))?;
    let mut len = end + END.len();
    match data.get(len) {
        Some(b'\n') => len += 1,
        Some(b'\r') if data.get(len + 1) == Some(&b'\n') => len += 2,
        _ => return Err(Error::Format("end_header must be followed by a newline".into())),
    }
    let text = std::str::from_utf8(&data[..end])
        .map_err(|_| Error::Format("header is not valid ASCII".into()))?;

    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("ply") {
        return Err(Error::Format("file does not start with `ply`".into()));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    for line in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", fmt, _version] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::Format(format!(
                        "unsupported PLY format `{fmt}`, expected binary_little_endian"
                    )));
                }
                format_seen = true;
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::Format(format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, _name] => {
                let count = ScalarType::parse(count_ty)
                    .ok_or_else(|| Error::Format(format!("unknown type `{count_ty}`")))?;
                let item = ScalarType::parse(item_ty)
                    .ok_or_else(|| Error::Format(format!("unknown type `{item_ty}`")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| Error::Format("property before any element".into()))?
                    .properties
                    .push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let ty = ScalarType::parse(ty)
                    .ok_or_else(|| Error::Format(format!("unknown type `{ty}`")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| Error::Format("property before any element".into()))?
                    .properties
                    .push(Property::Scalar {
                        name: name.to_string(),
                        ty,
                    });
            }
            _ => return Err(Error::Format(format!("unrecognized header line `{line}`"))),
        }
    }
    if !format_seen {
        return Err(Error::Format("missing format line".into()));
    }
    Ok(Header { elements, len })
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let remaining = self.data.len() - self.pos;
        if remaining < n {
            return Err(Error::Truncated {
                offset: self.data.len() as u64,
                needed: n - remaining,
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

fn skip_element(cur: &mut Cursor<'_>, el: &Element) -> Result<()> {
    for _ in 0..el.count {
        for p in &el.properties {
            match p {
                Property::Scalar { ty, .. } => {
                    cur.take(ty.size())?;
                }
                Property::List { count, item } => {
                    let n = count.read(cur.take(count.size())?);
                    if !(n >= 0.0) {
                        return Err(Error::Format("negative list length".into()));
                    }
                    cur.take(n as usize * item.size())?;
                }
            }
        }
    }
    Ok(())
}

/// Parses a PLY image already in memory.
pub fn read_ply(data: &[u8]) -> Result<Vec<Gaussian3D>> {
    let header = parse_header(data)?;
    let vertex_idx = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::Format("no `vertex` element".into()))?;
    let vertex = &header.elements[vertex_idx];

    // (byte offset within the record, type) per property name.
    let mut layout = std::collections::HashMap::new();
    let mut stride = 0;
    for p in &vertex.properties {
        match p {
            Property::Scalar { name, ty } => {
                layout.insert(name.as_str(), (stride, *ty));
                stride += ty.size();
            }
            Property::List { .. } => {
                return Err(Error::Format("list properties on `vertex` are not supported".into()))
            }
        }
    }
    let field = |name: &str| -> Result<(usize, ScalarType)> {
        layout
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingField(name.to_string()))
    };
    let mean = [field("x")?, field("y")?, field("z")?];
    let dc = [field("f_dc_0")?, field("f_dc_1")?, field("f_dc_2")?];
    let rest: Vec<_> = (0..SH_REST_LEN)
        .map(|i| field(&format!("f_rest_{i}")))
        .collect::<Result<_>>()?;
    let opacity = field("opacity")?;
    let scale = [field("scale_0")?, field("scale_1")?, field("scale_2")?];
    let rot = [field("rot_0")?, field("rot_1")?, field("rot_2")?, field("rot_3")?];

    let mut cur = Cursor {
        data,
        pos: header.len,
    };
    for el in &header.elements[..vertex_idx] {
        skip_element(&mut cur, el)?;
    }

    let mut out = Vec::with_capacity(vertex.count.min(data.len() / stride.max(1) + 1));
    for _ in 0..vertex.count {
        let rec = cur.take(stride)?;
        let get = |(off, ty): (usize, ScalarType)| ty.read(&rec[off..]) as f32;
        let mut sh_rest = [0.0f32; SH_REST_LEN];
        for (dst, f) in sh_rest.iter_mut().zip(&rest) {
            *dst = get(*f);
        }
        out.push(Gaussian3D {
            mean: mean.map(get),
            log_scale: scale.map(get),
            rotation: rot.map(get),
            opacity_logit: get(opacity),
            sh_dc: dc.map(get),
            sh_rest,
        });
    }
    Ok(out)
}

/// Loads a binary little-endian 3DGS checkpoint. Element order is preserved
/// and stored values are not activated.
pub fn load_ply(path: impl AsRef<Path>) -> Result<Vec<Gaussian3D>> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io_at(path, e))?;
    read_ply(&data)
}

pub fn write_ply_to<W: Write>(mut w: W, gaussians: &[Gaussian3D]) -> Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "element vertex {}", gaussians.len())?;
    for name in PLY_PROPERTIES.iter() {
        writeln!(w, "property float {name}")?;
    }
    writeln!(w, "end_header")?;

    let mut rec = Vec::with_capacity(PLY_PROPERTIES.len() * 4);
    for g in gaussians {
        rec.clear();
        let mut put = |v: f32| rec.extend_from_slice(&v.to_le_bytes());
        g.mean.iter().for_each(|&v| put(v));
        (0..3).for_each(|_| put(0.0));
        g.sh_dc.iter().for_each(|&v| put(v));
        g.sh_rest.iter().for_each(|&v| put(v));
        put(g.opacity_logit);
        g.log_scale.iter().for_each(|&v| put(v));
        g.rotation.iter().for_each(|&v| put(v));
        w.write_all(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ply(path: impl AsRef<Path>, gaussians: &[Gaussian3D]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
    write_ply_to(BufWriter::new(file), gaussians)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(opacity_logit: f32) -> Gaussian3D {
        let mut sh_rest = [0.0; SH_REST_LEN];
        for (i, v) in sh_rest.iter_mut().enumerate() {
            *v = i as f32 * 0.01;
        }
        Gaussian3D {
            mean: [1.0, -2.0, 3.5],
            log_scale: [-1.0, -2.0, -3.0],
            rotation: [1.0, 0.0, 0.0, 0.0],
            opacity_logit,
            sh_dc: [0.1, 0.2, 0.3],
            sh_rest,
        }
    }

    fn bytes(gs: &[Gaussian3D]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_ply_to(&mut buf, gs).unwrap();
        buf
    }

    #[test]
    fn single_vertex_zero_logit_has_half_opacity() {
        let gs = read_ply(&bytes(&[sample(0.0)])).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].opacity(), 0.5);
        assert_eq!(gs[0], sample(0.0));
    }

    #[test]
    fn zero_vertices() {
        assert!(read_ply(&bytes(&[])).unwrap().is_empty());
    }

    #[test]
    fn missing_field_is_named() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nproperty float x\nproperty float y\nend_header\n";
        match read_ply(text.as_bytes()) {
            Err(Error::MissingField(name)) => assert_eq!(name, "z"),
            other => panic!("expected missing field, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let full = bytes(&[sample(0.0), sample(1.0)]);
        let cut = &full[..full.len() - 10];
        match read_ply(cut) {
            Err(Error::Truncated { offset, needed }) => {
                assert_eq!(offset, cut.len() as u64);
                assert_eq!(needed, 10);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn ascii_format_rejected() {
        let text = "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(read_ply(text.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn property_order_and_extra_elements_are_tolerated() {
        // Double-typed, shuffled properties, preceded by an element with a list.
        let mut names: Vec<String> = PLY_PROPERTIES.iter().filter(|n| !n.starts_with('n')).cloned().collect();
        names.reverse();
        let mut text = String::from("ply\nformat binary_little_endian 1.0\ncomment test\n");
        text.push_str("element face 1\nproperty list uchar int vertex_indices\n");
        text.push_str("element vertex 1\n");
        for n in &names {
            text.push_str(&format!("property double {n}\n"));
        }
        text.push_str("end_header\n");
        let mut data = text.into_bytes();
        data.push(2);
        data.extend_from_slice(&7i32.to_le_bytes());
        data.extend_from_slice(&9i32.to_le_bytes());
        let g = sample(0.25);
        for n in &names {
            let v: f32 = match n.as_str() {
                "x" => g.mean[0],
                "y" => g.mean[1],
                "z" => g.mean[2],
                "opacity" => g.opacity_logit,
                s if s.starts_with("f_dc_") => g.sh_dc[s[5..].parse::<usize>().unwrap()],
                s if s.starts_with("f_rest_") => g.sh_rest[s[7..].parse::<usize>().unwrap()],
                s if s.starts_with("scale_") => g.log_scale[s[6..].parse::<usize>().unwrap()],
                s if s.starts_with("rot_") => g.rotation[s[4..].parse::<usize>().unwrap()],
                _ => unreachable!(),
            };
            data.extend_from_slice(&(v as f64).to_le_bytes());
        }
        assert_eq!(read_ply(&data).unwrap(), vec![g]);
    }
}
