//! Plain-text mesh format.
//!
//! ```text
//! dim nv nc
//! x y [z]          (nv vertex lines)
//! KIND v0 v1 ...   (nc cell lines, zero-based vertex ids)
//! tag v0 v1 ...    (optional boundary-tag lines, one tagged face each)
//! ```
//!
//! Comments start with `#` and run to the end of the line; blank lines are
//! skipped. Floats are written in shortest round-trip form, so
//! write → read reproduces coordinates bitwise.

use super::{build_mesh, CellKind, Mesh, MeshError, MeshInput};
use crate::geom::Vec3;
use std::path::Path;

/// Serializes the mesh in the plain-text format.
pub fn write_mesh_string(mesh: &Mesh) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    writeln!(s, "{} {} {}", mesh.dim(), mesh.n_vertices(), mesh.n_cells()).unwrap();
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        if mesh.dim() == 2 {
            writeln!(s, "{} {}", p.x, p.y).unwrap();
        } else {
            writeln!(s, "{} {} {}", p.x, p.y, p.z).unwrap();
        }
    }
    for c in 0..mesh.n_cells() {
        write!(s, "{}", mesh.cell_kind(c).keyword()).unwrap();
        for &v in mesh.cell_vertices(c) {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    for f in mesh.boundary_faces() {
        if let Some(tag) = mesh.face_tag(f) {
            write!(s, "{tag}").unwrap();
            for &v in mesh.face_vertices(f) {
                write!(s, " {v}").unwrap();
            }
            s.push('\n');
        }
    }
    s
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

/// Parses a mesh from the plain-text format; errors carry 1-based line
/// numbers.
pub fn read_mesh_str(text: &str) -> Result<Mesh, MeshError> {
    let fmt = |line: usize, msg: String| MeshError::Format { line, msg };
    // (1-based line number, significant content).
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| fmt(1, "empty mesh file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(fmt(hline, format!("expected header 'dim nv nc', got '{header}'")));
    }
    let parse_usize = |line: usize, tok: &str, what: &str| {
        tok.parse::<usize>()
            .map_err(|_| fmt(line, format!("bad {what} '{tok}'")))
    };
    let dim = parse_usize(hline, head[0], "dimension")?;
    if dim != 2 && dim != 3 {
        return Err(fmt(hline, format!("dimension must be 2 or 3, got {dim}")));
    }
    let nv = parse_usize(hline, head[1], "vertex count")?;
    let nc = parse_usize(hline, head[2], "cell count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| fmt(usize::MAX, format!("file ends before {nv} vertices are read")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != dim {
            return Err(fmt(ln, format!("expected {dim} coordinates, got {}", toks.len())));
        }
        let mut p = [0.0f64; 3];
        for (d, t) in toks.iter().enumerate() {
            p[d] = t
                .parse::<f64>()
                .map_err(|_| fmt(ln, format!("bad coordinate '{t}'")))?;
        }
        vertices.push(Vec3::new(p[0], p[1], p[2]));
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| fmt(usize::MAX, format!("file ends before {nc} cells are read")))?;
        let mut toks = l.split_whitespace();
        let kw = toks.next().unwrap();
        let kind = CellKind::from_keyword(kw)
            .ok_or_else(|| fmt(ln, format!("unknown cell kind '{kw}'")))?;
        let vs: Vec<u32> = toks
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| fmt(ln, format!("bad vertex id '{t}'")))
            })
            .collect::<Result<_, _>>()?;
        if vs.len() != kind.vertex_count() {
            return Err(fmt(
                ln,
                format!("{kw} expects {} vertices, got {}", kind.vertex_count(), vs.len()),
            ));
        }
        cells.push((kind, vs));
    }

    // Remaining lines are boundary tags: `name v0 v1 ...`.
    let mut boundary_tags: Vec<(String, Vec<Vec<u32>>)> = Vec::new();
    for (ln, l) in lines {
        let mut toks = l.split_whitespace();
        let name = toks.next().unwrap().to_string();
        let vs: Vec<u32> = toks
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| fmt(ln, format!("bad vertex id '{t}' in tag '{name}'")))
            })
            .collect::<Result<_, _>>()?;
        if vs.len() < dim {
            return Err(fmt(ln, format!("tag '{name}' lists too few vertices for a face")));
        }
        match boundary_tags.iter_mut().find(|(n, _)| *n == name) {
            Some((_, faces)) => faces.push(vs),
            None => boundary_tags.push((name, vec![vs])),
        }
    }

    build_mesh(MeshInput { vertices, cells, boundary_tags })
}
