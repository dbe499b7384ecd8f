//! Legacy ASCII unstructured-grid snapshots.
//!
//! Each snapshot carries the full mesh plus the cell-centred fields
//! (`density`, `pressure`, `internal_energy`) and the cell-mean face
//! velocity as a vector field, so a run directory is self-contained and
//! loads directly in ParaView or VisIt.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use stagfv::mesh::{CellKind, Mesh};
use stagfv::operators::State;

/// Cell-type id used by the legacy unstructured-grid format.
pub fn vtk_cell_type(kind: CellKind) -> u8 {
    match kind {
        CellKind::Triangle => 5,
        CellKind::Quadrangle => 9,
        CellKind::Tetrahedron => 10,
        CellKind::Hexahedron => 12,
        CellKind::Prism => 13,
        CellKind::Pyramid => 14,
    }
}

/// Renders one snapshot; all floats use 17 significant digits so files are
/// reproducible bit for bit.
pub fn snapshot_string(mesh: &Mesh, state: &State) -> String {
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0").unwrap();
    writeln!(s, "stagfv step {} t {:.16e}", state.step, state.t).unwrap();
    writeln!(s, "ASCII").unwrap();
    writeln!(s, "DATASET UNSTRUCTURED_GRID").unwrap();

    writeln!(s, "POINTS {} double", mesh.n_vertices()).unwrap();
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
    }

    let n_c = mesh.n_cells();
    let list_len: usize = (0..n_c).map(|c| 1 + mesh.cell_vertices(c).len()).sum();
    writeln!(s, "CELLS {} {}", n_c, list_len).unwrap();
    for c in 0..n_c {
        let verts = mesh.cell_vertices(c);
        write!(s, "{}", verts.len()).unwrap();
        for &v in verts {
            write!(s, " {}", v).unwrap();
        }
        writeln!(s).unwrap();
    }
    writeln!(s, "CELL_TYPES {}", n_c).unwrap();
    for c in 0..n_c {
        writeln!(s, "{}", vtk_cell_type(mesh.cell_kind(c))).unwrap();
    }

    writeln!(s, "CELL_DATA {}", n_c).unwrap();
    for (name, values) in [
        ("density", &state.rho),
        ("pressure", &state.p),
        ("internal_energy", &state.e),
    ] {
        writeln!(s, "SCALARS {} double 1", name).unwrap();
        writeln!(s, "LOOKUP_TABLE default").unwrap();
        for &v in values.iter() {
            writeln!(s, "{:.16e}", v).unwrap();
        }
    }
    writeln!(s, "VECTORS velocity double").unwrap();
    for c in 0..n_c {
        let u = mesh.cell_face_mean(c, &state.u);
        writeln!(s, "{:.16e} {:.16e} {:.16e}", u.x, u.y, u.z).unwrap();
    }
    s
}

/// Writes one snapshot file.
pub fn write_snapshot(path: &Path, mesh: &Mesh, state: &State) -> io::Result<()> {
    std::fs::write(path, snapshot_string(mesh, state))
}
