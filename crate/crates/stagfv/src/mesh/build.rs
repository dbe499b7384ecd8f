//! Mesh assembly: face deduplication, owner/neighbor resolution, geometry,
//! dual-volume bookkeeping and the per-face dual-edge incidence lists.

use std::collections::HashMap;

use super::{CellKind, DualIncidence, Mesh, MeshError};
use crate::geom::{polygon_area_centroid, polygon_area_centroid_2d, for_each_fan_triangle, Vec3, VolumeAccumulator};

/// Raw mesh description accepted by [`build_mesh`].
#[derive(Clone, Debug, Default)]
pub struct MeshInput {
    pub vertices: Vec<Vec3>,
    /// Cells as (kind, vertex ids in the kind's canonical template order).
    pub cells: Vec<(CellKind, Vec<u32>)>,
    /// Boundary tags: tag name → list of face vertex lists (any order/start).
    pub boundary_tags: Vec<(String, Vec<Vec<u32>>)>,
}

/// Sorted-vertex-set key for face deduplication (faces have ≤ 4 vertices).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct FaceKey([u32; 4]);

impl FaceKey {
    fn new(verts: &[u32]) -> Self {
        let mut k = [u32::MAX; 4];
        k[..verts.len()].copy_from_slice(verts);
        k[..verts.len()].sort_unstable();
        FaceKey(k)
    }
}

/// Checks that `t` traverses the same face as `s` in the opposite
/// orientation: exact reversal for segments, a rotation of the reversal for
/// polygons.
fn is_reversed(s: &[u32], t: &[u32]) -> bool {
    let m = s.len();
    if t.len() != m {
        return false;
    }
    if m == 2 {
        return t[0] == s[1] && t[1] == s[0];
    }
    let Some(p) = s.iter().position(|&v| v == t[0]) else {
        return false;
    };
    (0..m).all(|i| t[i] == s[(p + m - i) % m])
}

/// Builds a [`Mesh`] from vertices, cell records and boundary tags.
///
/// Faces are deduplicated by vertex set; the first incident cell becomes the
/// owner and fixes the stored orientation (outward from the owner). Geometry
/// of non-planar faces uses the signed fan-triangulation area vector, so the
/// discrete Gauss identity holds exactly per cell.
pub fn build_mesh(input: MeshInput) -> Result<Mesh, MeshError> {
    let MeshInput { vertices, cells, boundary_tags } = input;
    let nv = vertices.len();
    let nc = cells.len();

    let dim = cells.first().map(|(k, _)| k.dim()).unwrap_or(3);

    // --- validate cell records ---------------------------------------------
    for (c, (kind, vs)) in cells.iter().enumerate() {
        if kind.dim() != dim {
            return Err(MeshError::MixedDimension { cell: c, kind: *kind });
        }
        if vs.len() != kind.vertex_count() {
            return Err(MeshError::BadVertexCount {
                cell: c,
                kind: *kind,
                expected: kind.vertex_count(),
                got: vs.len(),
            });
        }
        if let Some(&v) = vs.iter().find(|&&v| v as usize >= nv) {
            return Err(MeshError::VertexOutOfRange { cell: c, vertex: v, nv });
        }
    }

    // --- face deduplication -------------------------------------------------
    let mut face_map: HashMap<FaceKey, u32> = HashMap::with_capacity(4 * nc);
    let mut face_vert_off: Vec<u32> = vec![0];
    let mut face_verts: Vec<u32> = Vec::new();
    let mut owner: Vec<u32> = Vec::new();
    let mut neighbor: Vec<i32> = Vec::new();

    let mut cell_face_off: Vec<u32> = Vec::with_capacity(nc + 1);
    cell_face_off.push(0);
    let mut cell_faces: Vec<u32> = Vec::new();
    let mut cell_face_sign: Vec<i8> = Vec::new();

    let mut loop_buf: Vec<u32> = Vec::with_capacity(4);
    for (c, (kind, vs)) in cells.iter().enumerate() {
        for tpl in kind.face_template() {
            loop_buf.clear();
            loop_buf.extend(tpl.iter().map(|&i| vs[i]));
            let key = FaceKey::new(&loop_buf);
            match face_map.get(&key) {
                None => {
                    let id = owner.len() as u32;
                    face_map.insert(key, id);
                    face_verts.extend_from_slice(&loop_buf);
                    face_vert_off.push(face_verts.len() as u32);
                    owner.push(c as u32);
                    neighbor.push(-1);
                    cell_faces.push(id);
                    cell_face_sign.push(1);
                }
                Some(&id) => {
                    let f = id as usize;
                    if neighbor[f] >= 0 {
                        return Err(MeshError::NonConforming {
                            verts: loop_buf.clone(),
                            c0: owner[f] as usize,
                            c1: neighbor[f] as usize,
                            c2: c,
                        });
                    }
                    let stored = &face_verts
                        [face_vert_off[f] as usize..face_vert_off[f + 1] as usize];
                    if !is_reversed(stored, &loop_buf) {
                        return Err(MeshError::InconsistentOrientation {
                            verts: loop_buf.clone(),
                            c0: owner[f] as usize,
                            c1: c,
                        });
                    }
                    neighbor[f] = c as i32;
                    cell_faces.push(id);
                    cell_face_sign.push(-1);
                }
            }
        }
        cell_face_off.push(cell_faces.len() as u32);
    }
    let nf = owner.len();

    // --- face geometry (owner-side orientation) -----------------------------
    let mut area = vec![0.0; nf];
    let mut normal = vec![Vec3::ZERO; nf];
    let mut face_centroid = vec![Vec3::ZERO; nf];
    let mut pts: Vec<Vec3> = Vec::with_capacity(4);
    for f in 0..nf {
        pts.clear();
        pts.extend(
            face_verts[face_vert_off[f] as usize..face_vert_off[f + 1] as usize]
                .iter()
                .map(|&v| vertices[v as usize]),
        );
        if dim == 2 {
            let d = pts[1] - pts[0];
            let len = d.norm();
            area[f] = len;
            normal[f] = Vec3::new(d.y, -d.x, 0.0).normalized();
            face_centroid[f] = (pts[0] + pts[1]) * 0.5;
        } else {
            let (av, c) = polygon_area_centroid(&pts);
            area[f] = av.norm();
            normal[f] = av.normalized();
            face_centroid[f] = c;
        }
        if !(area[f] > 0.0) {
            let verts = face_verts
                [face_vert_off[f] as usize..face_vert_off[f + 1] as usize]
                .to_vec();
            return Err(MeshError::ZeroAreaFace { cell: owner[f] as usize, verts });
        }
    }

    // --- cell geometry -------------------------------------------------------
    let mut volume = vec![0.0; nc];
    let mut centroid = vec![Vec3::ZERO; nc];
    let mut poly: Vec<Vec3> = Vec::with_capacity(8);
    for (c, (kind, vs)) in cells.iter().enumerate() {
        if dim == 2 {
            poly.clear();
            poly.extend(vs.iter().map(|&v| vertices[v as usize]));
            let (a, cc) = polygon_area_centroid_2d(&poly);
            volume[c] = a;
            centroid[c] = cc;
        } else {
            let mut mean = Vec3::ZERO;
            for &v in vs.iter() {
                mean += vertices[v as usize];
            }
            let mut acc = VolumeAccumulator::new(mean / vs.len() as f64);
            for tpl in kind.face_template() {
                poly.clear();
                poly.extend(tpl.iter().map(|&i| vertices[vs[i] as usize]));
                for_each_fan_triangle(&poly, |a, b, cc| acc.add_triangle(a, b, cc));
            }
            let (v, cc) = acc.finish();
            volume[c] = v;
            centroid[c] = cc;
        }
        if !(volume[c] > 0.0) {
            return Err(MeshError::NegativeVolume { cell: c, volume: volume[c] });
        }
    }

    // --- dual volumes (equal split per face: |D_{K,σ}| = ξ_K |K|) ------------
    let mut half_dual = vec![[0.0; 2]; nf];
    let mut dual_vol = vec![0.0; nf];
    for c in 0..nc {
        let xi_vol = cells[c].0.xi() * volume[c];
        let off = cell_face_off[c] as usize..cell_face_off[c + 1] as usize;
        for (f, s) in cell_faces[off.clone()].iter().zip(&cell_face_sign[off]) {
            let side = if *s > 0 { 0 } else { 1 };
            half_dual[*f as usize][side] = xi_vol;
            dual_vol[*f as usize] += xi_vol;
        }
    }

    // --- dual-edge incidence lists -------------------------------------------
    let mut counts = vec![0u32; nf];
    for c in 0..nc {
        let faces = &cell_faces[cell_face_off[c] as usize..cell_face_off[c + 1] as usize];
        for &(a, b) in cells[c].0.dual_edge_template() {
            counts[faces[a] as usize] += 1;
            counts[faces[b] as usize] += 1;
        }
    }
    let mut incidence_off = vec![0u32; nf + 1];
    for f in 0..nf {
        incidence_off[f + 1] = incidence_off[f] + counts[f];
    }
    let mut incidence =
        vec![DualIncidence { cell: 0, edge: 0, sign: 0 }; incidence_off[nf] as usize];
    let mut cursor: Vec<u32> = incidence_off[..nf].to_vec();
    for c in 0..nc {
        let faces = &cell_faces[cell_face_off[c] as usize..cell_face_off[c + 1] as usize];
        for (e, &(a, b)) in cells[c].0.dual_edge_template().iter().enumerate() {
            for (slot, sign) in [(a, 1i8), (b, -1i8)] {
                let f = faces[slot] as usize;
                incidence[cursor[f] as usize] =
                    DualIncidence { cell: c as u32, edge: e as u16, sign };
                cursor[f] += 1;
            }
        }
    }

    // --- boundary tags --------------------------------------------------------
    let mut tag = vec![0u32; nf];
    let mut tag_names: Vec<String> = Vec::new();
    for (name, face_lists) in &boundary_tags {
        let tag_id = match tag_names.iter().position(|t| t == name) {
            Some(i) => i as u32 + 1,
            None => {
                tag_names.push(name.clone());
                tag_names.len() as u32
            }
        };
        for vlist in face_lists {
            let key = FaceKey::new(vlist);
            let Some(&f) = face_map.get(&key) else {
                return Err(MeshError::UnknownTagFace { tag: name.clone(), verts: vlist.clone() });
            };
            if neighbor[f as usize] >= 0 {
                return Err(MeshError::TagOnInternalFace {
                    tag: name.clone(),
                    verts: vlist.clone(),
                });
            }
            tag[f as usize] = tag_id;
        }
    }

    // --- flatten cell records --------------------------------------------------
    let mut cell_vert_off: Vec<u32> = Vec::with_capacity(nc + 1);
    cell_vert_off.push(0);
    let mut cell_verts: Vec<u32> = Vec::new();
    let mut kind_vec: Vec<CellKind> = Vec::with_capacity(nc);
    for (k, vs) in cells {
        kind_vec.push(k);
        cell_verts.extend_from_slice(&vs);
        cell_vert_off.push(cell_verts.len() as u32);
    }

    Ok(Mesh {
        dim,
        vertices,
        kind: kind_vec,
        cell_vert_off,
        cell_verts,
        cell_face_off,
        cell_faces,
        cell_face_sign,
        volume,
        centroid,
        face_vert_off,
        face_verts,
        area,
        normal,
        face_centroid,
        owner,
        neighbor,
        dual_vol,
        half_dual,
        tag,
        tag_names,
        incidence_off,
        incidence,
    })
}
