//! Primal mesh representation for the six supported cell kinds, with
//! canonical face-role labeling, dual-cell volume bookkeeping, regularity
//! metrics, generators and ASCII I/O.
//!
//! The mesh is staggered-scheme oriented: scalars live on cells, velocities
//! on faces. Dual (diamond) cells are *virtual* — only their volumes
//! `|D_σ| = |D_{K,σ}| + |D_{L,σ}|` with `|D_{K,σ}| = |K|/face_count` and the
//! in-cell dual-edge adjacency are stored; no dual geometry is ever built.
//!
//! A `Mesh` is immutable after construction and safe to share across
//! threads.

mod ascii;
mod build;
mod gen;
mod kind;

pub use ascii::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use build::{build_mesh, MeshInput};
pub use gen::{
    gen_column_mesh, gen_hybrid_shock_tube_mesh, gen_shock_tube_mesh, unit_grid_2d, unit_grid_3d,
    ShockTubeKind,
};
pub use kind::{CellKind, ALL_KINDS};

use crate::geom::{for_each_fan_triangle, triangle_flux_below_x, segment_flux_below_x, Vec3};
use thiserror::Error;

/// Structural and geometric mesh errors.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cell {cell} ({kind}) expects {expected} vertices, got {got}")]
    BadVertexCount { cell: usize, kind: CellKind, expected: usize, got: usize },
    #[error("cell {cell} references vertex {vertex} out of range (nv = {nv})")]
    VertexOutOfRange { cell: usize, vertex: u32, nv: usize },
    #[error("mesh mixes 2D and 3D cell kinds (cell {cell} is {kind})")]
    MixedDimension { cell: usize, kind: CellKind },
    #[error("non-conforming mesh: face {verts:?} is shared by more than two cells ({c0}, {c1} and {c2})")]
    NonConforming { verts: Vec<u32>, c0: usize, c1: usize, c2: usize },
    #[error("non-conforming mesh: cells {c0} and {c1} traverse shared face {verts:?} with the same orientation")]
    InconsistentOrientation { verts: Vec<u32>, c0: usize, c1: usize },
    #[error("cell {cell} has non-positive volume {volume:.6e} (orientation error)")]
    NegativeVolume { cell: usize, volume: f64 },
    #[error("face {verts:?} of cell {cell} has zero area")]
    ZeroAreaFace { cell: usize, verts: Vec<u32> },
    #[error("boundary tag '{tag}' references vertices {verts:?} which form no boundary face")]
    UnknownTagFace { tag: String, verts: Vec<u32> },
    #[error("boundary tag '{tag}' applied to internal face {verts:?}")]
    TagOnInternalFace { tag: String, verts: Vec<u32> },
    #[error("mesh would exceed the memory budget: {cells} cells requested, {max} allowed")]
    CapacityExceeded { cells: usize, max: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("mesh I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// One entry of the per-face dual-edge incidence list: dual edge `edge` of
/// cell `cell` touches this face's diamond with orientation `sign`
/// (+1 leaving, −1 entering).
#[derive(Clone, Copy, Debug)]
pub struct DualIncidence {
    pub cell: u32,
    pub edge: u16,
    pub sign: i8,
}

/// Mesh regularity metrics: `theta1 = max_K diam(K)^d / |K|`,
/// `theta2 = max over adjacent cells of |K|/|L|`, and the maximum face count.
#[derive(Clone, Copy, Debug)]
pub struct MeshQuality {
    pub theta1: f64,
    pub theta2: f64,
    pub max_face_count: usize,
}

/// An immutable hybrid unstructured mesh.
pub struct Mesh {
    dim: usize,
    vertices: Vec<Vec3>,
    // Cells (SoA, faces flattened in template slot order).
    kind: Vec<CellKind>,
    cell_vert_off: Vec<u32>,
    cell_verts: Vec<u32>,
    cell_face_off: Vec<u32>,
    cell_faces: Vec<u32>,
    cell_face_sign: Vec<i8>,
    volume: Vec<f64>,
    centroid: Vec<Vec3>,
    // Faces (deduplicated; geometry from the owner-side orientation).
    face_vert_off: Vec<u32>,
    face_verts: Vec<u32>,
    area: Vec<f64>,
    normal: Vec<Vec3>,
    face_centroid: Vec<Vec3>,
    owner: Vec<u32>,
    neighbor: Vec<i32>, // -1 on boundary faces
    dual_vol: Vec<f64>,
    half_dual: Vec<[f64; 2]>,
    tag: Vec<u32>, // 0 = untagged
    tag_names: Vec<String>,
    // Per-face incidence of in-cell dual edges.
    incidence_off: Vec<u32>,
    incidence: Vec<DualIncidence>,
}

impl std::fmt::Debug for Mesh {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mesh")
            .field("dim", &self.dim)
            .field("vertices", &self.vertices.len())
            .field("cells", &self.kind.len())
            .field("faces", &self.area.len())
            .finish()
    }
}

impl Mesh {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.kind.len()
    }

    #[inline]
    pub fn n_faces(&self) -> usize {
        self.area.len()
    }

    #[inline]
    pub fn vertex(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }

    #[inline]
    pub fn cell_kind(&self, c: usize) -> CellKind {
        self.kind[c]
    }

    #[inline]
    pub fn cell_volume(&self, c: usize) -> f64 {
        self.volume[c]
    }

    #[inline]
    pub fn cell_centroid(&self, c: usize) -> Vec3 {
        self.centroid[c]
    }

    #[inline]
    pub fn cell_vertices(&self, c: usize) -> &[u32] {
        &self.cell_verts[self.cell_vert_off[c] as usize..self.cell_vert_off[c + 1] as usize]
    }

    /// Global face ids of cell `c`, in template slot order.
    #[inline]
    pub fn cell_faces(&self, c: usize) -> &[u32] {
        &self.cell_faces[self.cell_face_off[c] as usize..self.cell_face_off[c + 1] as usize]
    }

    /// +1 where the stored face normal points out of cell `c` (owner side),
    /// −1 otherwise; aligned with `cell_faces`.
    #[inline]
    pub fn cell_face_signs(&self, c: usize) -> &[i8] {
        &self.cell_face_sign[self.cell_face_off[c] as usize..self.cell_face_off[c + 1] as usize]
    }

    /// Maximum vertex-to-vertex distance within the cell.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let vs = self.cell_vertices(c);
        let mut d2: f64 = 0.0;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d2 = d2.max((self.vertices[vs[i] as usize] - self.vertices[vs[j] as usize]).norm_sq());
            }
        }
        d2.sqrt()
    }

    #[inline]
    pub fn face_area(&self, f: usize) -> f64 {
        self.area[f]
    }

    /// Unit normal, oriented out of the owner cell.
    #[inline]
    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.normal[f]
    }

    #[inline]
    pub fn face_centroid(&self, f: usize) -> Vec3 {
        self.face_centroid[f]
    }

    #[inline]
    pub fn face_owner(&self, f: usize) -> usize {
        self.owner[f] as usize
    }

    #[inline]
    pub fn face_neighbor(&self, f: usize) -> Option<usize> {
        let n = self.neighbor[f];
        (n >= 0).then_some(n as usize)
    }

    #[inline]
    pub fn is_boundary(&self, f: usize) -> bool {
        self.neighbor[f] < 0
    }

    /// Vertex loop of the face in the owner-side (outward) orientation.
    #[inline]
    pub fn face_vertices(&self, f: usize) -> &[u32] {
        &self.face_verts[self.face_vert_off[f] as usize..self.face_vert_off[f + 1] as usize]
    }

    /// Diamond-cell volume `|D_σ|`.
    #[inline]
    pub fn dual_volume(&self, f: usize) -> f64 {
        self.dual_vol[f]
    }

    /// Half-diamond volumes `(|D_{K,σ}|, |D_{L,σ}|)`; the neighbor side is
    /// 0 on boundary faces.
    #[inline]
    pub fn half_dual_volumes(&self, f: usize) -> [f64; 2] {
        self.half_dual[f]
    }

    /// In-cell dual edges incident to this face's diamond, over both
    /// adjacent cells.
    #[inline]
    pub fn dual_incidence(&self, f: usize) -> &[DualIncidence] {
        &self.incidence[self.incidence_off[f] as usize..self.incidence_off[f + 1] as usize]
    }

    /// Boundary tag name of face `f`, if any.
    pub fn face_tag(&self, f: usize) -> Option<&str> {
        let t = self.tag[f];
        (t > 0).then(|| self.tag_names[t as usize - 1].as_str())
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tag_names
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_faces()).filter(|&f| self.is_boundary(f))
    }

    pub fn total_volume(&self) -> f64 {
        self.volume.iter().sum()
    }

    /// Largest cell diameter, the mesh-size parameter `h`.
    pub fn h_max(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Worst-cell discrete Gauss defect `‖Σ_σ |σ| n_{K,σ}‖ / Σ_σ |σ|`.
    pub fn max_gauss_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..self.n_cells() {
            let mut sum = Vec3::ZERO;
            let mut total = 0.0;
            for (&f, &s) in self.cell_faces(c).iter().zip(self.cell_face_signs(c)) {
                let f = f as usize;
                sum += self.normal[f] * (self.area[f] * s as f64);
                total += self.area[f];
            }
            worst = worst.max(sum.norm() / total);
        }
        worst
    }

    /// Regularity metrics (θ1, θ2, max face count).
    pub fn quality(&self) -> MeshQuality {
        let d = self.dim as i32;
        let mut theta1: f64 = 0.0;
        for c in 0..self.n_cells() {
            theta1 = theta1.max(self.cell_diameter(c).powi(d) / self.volume[c]);
        }
        let mut theta2: f64 = 1.0;
        for f in 0..self.n_faces() {
            if let Some(l) = self.face_neighbor(f) {
                let k = self.face_owner(f);
                let r = self.volume[k] / self.volume[l];
                theta2 = theta2.max(r.max(1.0 / r));
            }
        }
        let max_face_count =
            self.kind.iter().map(|k| k.face_count()).max().unwrap_or(0);
        MeshQuality { theta1, theta2, max_face_count }
    }

    /// Volume of the part of cell `c` lying in the half-space `x < x0`,
    /// computed exactly on the cell's triangulated boundary. Used for exact
    /// initialization of piecewise-constant-in-x data.
    pub fn cell_volume_below_x(&self, c: usize, x0: f64) -> f64 {
        let mut acc = 0.0;
        let mut pts: Vec<Vec3> = Vec::with_capacity(4);
        for (&f, &s) in self.cell_faces(c).iter().zip(self.cell_face_signs(c)) {
            let f = f as usize;
            pts.clear();
            let loop_verts = self.face_vertices(f);
            if s > 0 {
                pts.extend(loop_verts.iter().map(|&v| self.vertices[v as usize]));
            } else {
                pts.extend(loop_verts.iter().rev().map(|&v| self.vertices[v as usize]));
            }
            if self.dim == 2 {
                acc += segment_flux_below_x(pts[0], pts[1], x0);
            } else {
                for_each_fan_triangle(&pts, |a, b, c| {
                    acc += triangle_flux_below_x(a, b, c, x0);
                });
            }
        }
        acc.clamp(0.0, self.volume[c])
    }

    /// Assigns a tag to every boundary face from its centroid and outward
    /// normal. Used by the generators, whose boundary planes are known in
    /// closed form.
    pub(crate) fn tag_all_boundary_faces(
        &mut self,
        f: impl Fn(Vec3, Vec3) -> &'static str,
    ) {
        for face in 0..self.n_faces() {
            if self.neighbor[face] >= 0 {
                continue;
            }
            let name = f(self.face_centroid[face], self.normal[face]);
            let id = match self.tag_names.iter().position(|t| t == name) {
                Some(i) => i + 1,
                None => {
                    self.tag_names.push(name.to_string());
                    self.tag_names.len()
                }
            };
            self.tag[face] = id as u32;
        }
    }

    /// Arithmetic mean of the face values of cell `c` — the per-cell
    /// velocity reconstruction used for output and error norms.
    pub fn cell_face_mean(&self, c: usize, values: &[Vec3]) -> Vec3 {
        let faces = self.cell_faces(c);
        let mut s = Vec3::ZERO;
        for &f in faces {
            s += values[f as usize];
        }
        s / faces.len() as f64
    }
}
