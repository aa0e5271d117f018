//! OFF and OBJ mesh files.
//!
//! Polygonal faces are kept as polygons (fan-split for rendering), so a quad
//! counts as one polygon for the measures. OBJ support reads `v` and `f`
//! records only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use viewq_core::{Mesh, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            other => Err(format!("unknown mesh format `{other}` (expected off or obj)")),
        }
    }
}

/// Vertices and polygon loops as read from a file, before validation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolygonSoup {
    pub vertices: Vec<Vec3>,
    pub polygons: Vec<Vec<u32>>,
}

impl PolygonSoup {
    pub fn into_mesh(self) -> viewq_core::Result<Mesh> {
        Mesh::from_polygons(self.vertices, &self.polygons)
    }
}

/// A parse error before the path is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn number<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("cannot parse {what} from `{tok}`")))
}

fn finite_vertex(x: f64, y: f64, z: f64, line: usize) -> Result<Vec3, ParseError> {
    let v = Vec3::new(x, y, z);
    if !v.is_finite() {
        return Err(perr(line, "non-finite vertex coordinate"));
    }
    Ok(v)
}

pub fn parse_off(text: &str) -> Result<PolygonSoup, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| perr(hline, "expected `OFF` header"))?;
    // some OFF writers glue the counts onto the header line ("OFF8 6 0")
    let (cline, counts) = if rest.trim().is_empty() {
        lines.next().ok_or_else(|| perr(hline + 1, "missing counts line"))?
    } else {
        (hline, rest)
    };
    let mut tok = counts.split_whitespace();
    let nv: usize = number(tok.next(), cline, "vertex count")?;
    let nf: usize = number(tok.next(), cline, "face count")?;

    let mut soup = PolygonSoup {
        vertices: Vec::with_capacity(nv),
        polygons: Vec::with_capacity(nf),
    };
    let mut last = cline;
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| perr(last + 1, format!("expected {nv} vertices, found {}", soup.vertices.len())))?;
        let mut t = l.split_whitespace();
        let x = number(t.next(), line, "x")?;
        let y = number(t.next(), line, "y")?;
        let z = number(t.next(), line, "z")?;
        soup.vertices.push(finite_vertex(x, y, z, line)?);
        last = line;
    }
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or_else(|| perr(last + 1, format!("expected {nf} faces, found {}", soup.polygons.len())))?;
        let mut t = l.split_whitespace();
        let n: usize = number(t.next(), line, "face vertex count")?;
        if n < 3 {
            return Err(perr(line, format!("face with {n} vertices")));
        }
        let mut poly = Vec::with_capacity(n);
        for _ in 0..n {
            let i: u32 = number(t.next(), line, "vertex index")?;
            if i as usize >= nv {
                return Err(perr(line, format!("vertex index {i} out of range (vertex count {nv})")));
            }
            poly.push(i);
        }
        // anything left on the line is a per-face color, ignored
        soup.polygons.push(poly);
        last = line;
    }
    Ok(soup)
}

pub fn parse_obj(text: &str) -> Result<PolygonSoup, ParseError> {
    let mut soup = PolygonSoup::default();
    for (line, l) in content_lines(text) {
        let mut t = l.split_whitespace();
        match t.next() {
            Some("v") => {
                let x = number(t.next(), line, "x")?;
                let y = number(t.next(), line, "y")?;
                let z = number(t.next(), line, "z")?;
                soup.vertices.push(finite_vertex(x, y, z, line)?);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for item in t {
                    // v, v/vt, v//vn or v/vt/vn; only the position index counts
                    let first = item.split('/').next().unwrap_or("");
                    let i: i64 = number(Some(first), line, "vertex index")?;
                    let n = soup.vertices.len() as i64;
                    let resolved = match i {
                        i if i > 0 => i - 1,
                        i if i < 0 => n + i,
                        _ => return Err(perr(line, "vertex index 0 is invalid in OBJ")),
                    };
                    if resolved < 0 || resolved >= n {
                        return Err(perr(line, format!("vertex index {i} out of range (vertex count {n})")));
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(perr(line, format!("face with {} vertices", poly.len())));
                }
                soup.polygons.push(poly);
            }
            _ => {}
        }
    }
    Ok(soup)
}

/// Reads and validates a mesh. Zero-area triangles are kept; see
/// [`Mesh::degenerate_faces`].
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let soup = match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
    .map_err(|e| Error::Format {
        path: path.to_path_buf(),
        line: e.line,
        message: e.message,
    })?;
    soup.into_mesh().map_err(|source| Error::Mesh {
        path: path.to_path_buf(),
        source,
    })
}

/// OFF text with one face per source polygon. Floats use the shortest
/// representation that parses back to the same value.
pub fn off_string(mesh: &Mesh) -> String {
    let loops = mesh.polygon_loops();
    let mut out = String::new();
    out.push_str("OFF\n");
    writeln!(out, "{} {} 0", mesh.vertices().len(), loops.len()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    for l in &loops {
        write!(out, "{}", l.len()).unwrap();
        for i in l {
            write!(out, " {i}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_off(mesh: &Mesh, path: &Path) -> Result<()> {
    fs::write(path, off_string(mesh)).map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "OFF
# unit cube
8 6 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 2 3 7 6
4 1 2 6 5
4 0 4 7 3
";

    #[test]
    fn cube_off() {
        let mesh = parse_off(CUBE).unwrap().into_mesh().unwrap();
        assert_eq!(mesh.faces().len(), 12);
        assert_eq!(mesh.polygon_count(), 6);
        assert_eq!(mesh.total_area(), 6.0);
    }

    #[test]
    fn glued_header() {
        let soup = parse_off("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(soup.polygons, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn off_errors_carry_line_numbers() {
        assert_eq!(parse_off("PLY\n").unwrap_err().line, 1);
        let e = parse_off("OFF\n3 1 0\n0 0 0\n1 zero 0\n0 1 0\n3 0 1 2\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n").unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("out of range"));
        let e = parse_off("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap_err();
        assert_eq!(e.line, 7);
    }

    #[test]
    fn obj_records() {
        let text = "# quad\nmtllib x.mtl\nv 0 0 0\nv 2 0 0\nv 2 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 -1//1\n";
        let soup = parse_obj(text).unwrap();
        assert_eq!(soup.polygons, vec![vec![0, 1, 2, 3]]);
        let e = parse_obj("v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_obj("v 0 0 0\nf 0 1 1\n").is_err());
    }

    #[test]
    fn format_from_path() {
        assert_eq!(MeshFormat::from_path(Path::new("a/b.OFF")), Some(MeshFormat::Off));
        assert_eq!(MeshFormat::from_path(Path::new("b.obj")), Some(MeshFormat::Obj));
        assert_eq!(MeshFormat::from_path(Path::new("b.ply")), None);
    }
}
