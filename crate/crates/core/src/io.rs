//! Plain-text mesh and map files.
//!
//! Mesh format:
//!
//! ```text
//! # comment lines and blank lines are ignored
//! <V> <T>
//! <x> <y> <boundary flag 0|1>      (V lines)
//! <i> <j> <k>                      (T lines, zero-based, counterclockwise)
//! ```
//!
//! Map format:
//!
//! ```text
//! <V> <k>                          (k = 3, the ambient dimension)
//! <y1> <y2> <y3>                   (V lines)
//! ```
//!
//! Reals are written with 17 significant digits, so files round-trip
//! bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::energy::ManifoldMap;
use crate::geometry::AmbientVector;
use crate::mesh::{DomainMesh, MeshError};

/// `x` with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    fn err(&self, message: impl Into<String>) -> MeshError {
        MeshError::Parse { line: self.last, message: message.into() }
    }

    /// Next non-blank, non-comment line split into fields.
    fn next_fields(&mut self) -> Option<Vec<&'a str>> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                return Some(body.split_whitespace().collect());
            }
        }
        None
    }

    fn expect_fields(&mut self, what: &str) -> Result<Vec<&'a str>, MeshError> {
        self.next_fields().ok_or_else(|| {
            self.last += 1;
            self.err(format!("unexpected end of file, expected {what}"))
        })
    }

    fn header(&mut self, expected: &str) -> Result<(usize, usize), MeshError> {
        let f = self.expect_fields(expected)?;
        match f.as_slice() {
            [a, b] => Ok((self.parse(a)?, self.parse(b)?)),
            _ => Err(self.err(format!("expected header `{expected}`"))),
        }
    }

    fn parse<T: FromStr>(&self, s: &str) -> Result<T, MeshError> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn row<T: FromStr, const N: usize>(&mut self, what: &str) -> Result<[T; N], MeshError> {
        let f = self.expect_fields(what)?;
        if f.len() != N {
            return Err(self.err(format!("expected {N} fields for {what}, found {}", f.len())));
        }
        let parsed: Vec<T> = f.iter().map(|s| self.parse(s)).collect::<Result<_, _>>()?;
        Ok(parsed.try_into().unwrap_or_else(|_| unreachable!()))
    }

    fn finish(&mut self) -> Result<(), MeshError> {
        match self.next_fields() {
            Some(_) => Err(self.err("trailing content")),
            None => Ok(()),
        }
    }
}

pub fn write_mesh_string(mesh: &DomainMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", mesh.num_vertices(), mesh.num_triangles());
    for (i, &[x, y]) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", fmt_real(x), fmt_real(y), u8::from(mesh.is_boundary(i)));
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(out, "{a} {b} {c}");
    }
    out
}

pub fn parse_mesh(text: &str) -> Result<DomainMesh, MeshError> {
    let mut lines = Lines::new(text);
    let (n, m) = lines.header("<vertices> <triangles>")?;
    let mut vertices = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let [x, y, flag]: [String; 3] = lines.row("a vertex")?;
        vertices.push([lines.parse(&x)?, lines.parse(&y)?]);
        flags.push(match flag.as_str() {
            "0" => false,
            "1" => true,
            other => return Err(lines.err(format!("boundary flag must be 0 or 1, found `{other}`"))),
        });
    }
    let mut triangles = Vec::with_capacity(m);
    for _ in 0..m {
        triangles.push(lines.row::<usize, 3>("a triangle")?);
    }
    lines.finish()?;
    DomainMesh::new(vertices, triangles, flags)
}

pub fn write_map_string(map: &ManifoldMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} 3", map.len());
    for y in &map.values {
        let _ = writeln!(out, "{} {} {}", fmt_real(y.x), fmt_real(y.y), fmt_real(y.z));
    }
    out
}

pub fn parse_map(text: &str) -> Result<ManifoldMap, MeshError> {
    let mut lines = Lines::new(text);
    let (n, k) = lines.header("<vertices> 3")?;
    if k != 3 {
        return Err(lines.err(format!("ambient dimension must be 3, found {k}")));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let [a, b, c] = lines.row::<f64, 3>("a map value")?;
        values.push(AmbientVector::new(a, b, c));
    }
    lines.finish()?;
    Ok(ManifoldMap::new(values))
}

pub fn read_mesh(path: &Path) -> Result<DomainMesh, MeshError> {
    parse_mesh(&fs::read_to_string(path)?)
}

pub fn write_mesh(path: &Path, mesh: &DomainMesh) -> std::io::Result<()> {
    fs::write(path, write_mesh_string(mesh))
}

pub fn read_map(path: &Path) -> Result<ManifoldMap, MeshError> {
    parse_map(&fs::read_to_string(path)?)
}

pub fn write_map(path: &Path, map: &ManifoldMap) -> std::io::Result<()> {
    fs::write(path, write_map_string(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_disk_mesh;

    #[test]
    fn mesh_round_trips_exactly() {
        let mesh = build_unit_disk_mesh(3).unwrap();
        let text = write_mesh_string(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(write_mesh_string(&back), text);
    }

    #[test]
    fn map_round_trips_exactly() {
        let values = (0..20)
            .map(|i| {
                let t = 0.37 * i as f64;
                AmbientVector::new(t.sin() / 3.0, t.cos() * 1e-9, -1.0 / (1.0 + t))
            })
            .collect();
        let map = ManifoldMap::new(values);
        assert_eq!(parse_map(&write_map_string(&map)).unwrap(), map);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text =
            "# unit triangle pair\n\n4 2\n0 0 1\n1 0 1 # corner\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n";
        let mesh = parse_mesh(text).unwrap();
        assert_eq!(mesh.num_triangles(), 2);
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_mesh("2 0\n0 0 1\n0 x 1\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 3, .. }), "{err}");
        let err = parse_mesh("1 0\n0 0 2\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 2, .. }), "{err}");
        let err = parse_map("2 3\n0 0 1\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 3, .. }), "{err}");
        let err = parse_map("1 3\n0 0 1\nextra\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 3, .. }), "{err}");
        let err = parse_map("1 2\n0 0\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 1, .. }), "{err}");
        // Degenerate geometry is reported by the mesh constructor.
        let err = parse_mesh("3 1\n0 0 1\n1 0 1\n2 0 1\n0 1 2\n").unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangle { .. }), "{err}");
    }
}
