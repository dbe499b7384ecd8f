//! Mesh generators: uniform unit grids for all six kinds, the distorted
//! shock-tube meshes (pure prism, pure pyramid, hybrid slabs) and the coarse
//! column mesh (flow around a cylinder).

use super::{build_mesh, CellKind, Mesh, MeshError, MeshInput};
use crate::geom::Vec3;

/// Hard memory-budget cap for generated meshes.
const MAX_CELLS: usize = 20_000_000;

/// Mesh family of the shock-tube experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShockTubeKind {
    Prism,
    Pyramid,
    Hybrid,
}

impl ShockTubeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "prism" => Some(ShockTubeKind::Prism),
            "pyramid" => Some(ShockTubeKind::Pyramid),
            "hybrid" => Some(ShockTubeKind::Hybrid),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShockTubeKind::Prism => "prism",
            ShockTubeKind::Pyramid => "pyramid",
            ShockTubeKind::Hybrid => "hybrid",
        }
    }
}

fn check_capacity(cells: usize) -> Result<(), MeshError> {
    if cells > MAX_CELLS {
        return Err(MeshError::CapacityExceeded { cells, max: MAX_CELLS });
    }
    Ok(())
}

/// Uniform 2D grid of `nx × ny` squares on `[0,lx]×[0,ly]`, as quadrangles
/// or as two triangles per square. All boundary faces are tagged
/// `"boundary"`.
pub fn unit_grid_2d(
    kind: CellKind,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
) -> Result<Mesh, MeshError> {
    if !matches!(kind, CellKind::Triangle | CellKind::Quadrangle) {
        return Err(MeshError::InvalidParameter(format!("unit_grid_2d: 2D kind required, got {kind}")));
    }
    check_capacity(nx * ny * 2)?;
    let vid = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(lx * i as f64 / nx as f64, ly * j as f64 / ny as f64, 0.0));
        }
    }
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            match kind {
                CellKind::Quadrangle => cells.push((kind, vec![a, b, c, d])),
                _ => {
                    cells.push((CellKind::Triangle, vec![a, b, c]));
                    cells.push((CellKind::Triangle, vec![a, c, d]));
                }
            }
        }
    }
    let mut mesh = build_mesh(MeshInput { vertices, cells, boundary_tags: vec![] })?;
    mesh.tag_all_boundary_faces(|_, _| "boundary");
    Ok(mesh)
}

/// The six Kuhn tetrahedra of a hexahedron (canonical corner numbering),
/// all positively oriented and conforming across a structured grid.
const KUHN_TETS: [[usize; 4]; 6] = [
    [0, 1, 2, 6],
    [0, 1, 6, 5],
    [0, 3, 6, 2],
    [0, 3, 7, 6],
    [0, 4, 5, 6],
    [0, 4, 6, 7],
];

/// Uniform 3D grid of `nx × ny × nz` boxes on `[0,lx]×[0,ly]×[0,lz]`, split
/// per `kind`: hexahedra as-is, 2 prisms, 6 pyramids (centroid apex) or
/// 6 Kuhn tetrahedra per box. All boundary faces are tagged `"boundary"`.
pub fn unit_grid_3d(
    kind: CellKind,
    nx: usize,
    ny: usize,
    nz: usize,
    lx: f64,
    ly: f64,
    lz: f64,
) -> Result<Mesh, MeshError> {
    let split = match kind {
        CellKind::Hexahedron => 1,
        CellKind::Prism => 2,
        CellKind::Pyramid | CellKind::Tetrahedron => 6,
        _ => {
            return Err(MeshError::InvalidParameter(format!(
                "unit_grid_3d: 3D kind required, got {kind}"
            )))
        }
    };
    check_capacity(nx * ny * nz * split)?;
    let vid = |i: usize, j: usize, k: usize| ((k * (ny + 1) + j) * (nx + 1) + i) as u32;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Vec3::new(
                    lx * i as f64 / nx as f64,
                    ly * j as f64 / ny as f64,
                    lz * k as f64 / nz as f64,
                ));
            }
        }
    }
    let mut cells = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                // Canonical hex corners: bottom 0-3 counterclockwise seen
                // from above, then the matching top corners.
                let h = [
                    vid(i, j, k),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i, j + 1, k),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k + 1),
                    vid(i + 1, j + 1, k + 1),
                    vid(i, j + 1, k + 1),
                ];
                match kind {
                    CellKind::Hexahedron => cells.push((kind, h.to_vec())),
                    CellKind::Prism => {
                        cells.push((kind, vec![h[0], h[1], h[2], h[4], h[5], h[6]]));
                        cells.push((kind, vec![h[0], h[2], h[3], h[4], h[6], h[7]]));
                    }
                    CellKind::Tetrahedron => {
                        for t in &KUHN_TETS {
                            cells.push((kind, t.iter().map(|&c| h[c]).collect()));
                        }
                    }
                    _ => {
                        let apex = vertices.len() as u32;
                        let mut c = Vec3::ZERO;
                        for &v in &h {
                            c += vertices[v as usize];
                        }
                        vertices.push(c / 8.0);
                        push_hex_pyramids(&mut cells, &h, apex);
                    }
                }
            }
        }
    }
    let mut mesh = build_mesh(MeshInput { vertices, cells, boundary_tags: vec![] })?;
    mesh.tag_all_boundary_faces(|_, _| "boundary");
    Ok(mesh)
}

/// Splits a canonical hexahedron into six pyramids sharing the apex: one per
/// hex face, base traversed in reverse so it is counterclockwise seen from
/// the apex.
fn push_hex_pyramids(cells: &mut Vec<(CellKind, Vec<u32>)>, h: &[u32; 8], apex: u32) {
    for tpl in CellKind::Hexahedron.face_template() {
        let base: Vec<u32> = tpl.iter().rev().map(|&i| h[i]).collect();
        let mut vs = base;
        vs.push(apex);
        cells.push((CellKind::Pyramid, vs));
    }
}

/// The shock-tube distortion: vertices are sheared along the tube axis by
/// `x ↦ x + 0.2 h sin(πx/5) sin(2πz/lz)`, which fixes the inlet and outlet
/// planes (`x = 0`, `x = 5`) and the `z = 0`, `z = lz` walls pointwise and
/// maps every other boundary plane onto itself. The displacement amplitude
/// scales with the layer thickness `h`, so every interior face is tilted
/// off the axis and prism side walls become nonplanar, while the family
/// stays regular (bounded θ1, θ2) under refinement — a fixed amplitude
/// would freeze the cell diameters and make refinement meaningless.
fn distort_tube(vertices: &mut [Vec3], h: f64, lz: f64) {
    for v in vertices {
        v.x += 0.2 * h * (std::f64::consts::PI * v.x / 5.0).sin()
            * (2.0 * std::f64::consts::PI * v.z / lz).sin();
    }
}

fn tag_tube(mesh: &mut Mesh) {
    mesh.tag_all_boundary_faces(|c, _| {
        if c.x.abs() < 1e-9 {
            "left"
        } else if (c.x - 5.0).abs() < 1e-9 {
            "right"
        } else {
            "lateral"
        }
    });
}

/// Shock-tube mesh on `[0,5]×[0,10h]×[0,10h]`, `h = 5/2^n`: a `10×10` base
/// grid in the (y,z) cross-section extruded into `2^n` layers along x, each
/// box split into 2 prisms or 6 pyramids. With `distort`, applies the
/// boundary-preserving shear map (period `10h` in z for these pure-kind
/// meshes). Boundary tags: `left` (x=0), `right` (x=5), `lateral`.
pub fn gen_shock_tube_mesh(n: u32, kind: CellKind, distort: bool) -> Result<Mesh, MeshError> {
    if n < 1 || n > 24 {
        return Err(MeshError::InvalidParameter(format!("shock-tube refinement n = {n} out of range")));
    }
    let split = match kind {
        CellKind::Prism => 2,
        CellKind::Pyramid => 6,
        _ => {
            return Err(MeshError::InvalidParameter(format!(
                "shock-tube mesh kind must be Prism or Pyramid, got {kind}"
            )))
        }
    };
    let layers = 1usize << n;
    check_capacity(layers * 100 * split)?;
    let h = 5.0 / layers as f64;
    let (ny, nz) = (10usize, 10usize);

    let vid = |i: usize, j: usize, k: usize| ((i * (ny + 1) + j) * (nz + 1) + k) as u32;
    let mut vertices = Vec::with_capacity((layers + 1) * (ny + 1) * (nz + 1));
    for i in 0..=layers {
        for j in 0..=ny {
            for k in 0..=nz {
                vertices.push(Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    let mut cells = Vec::new();
    for i in 0..layers {
        for j in 0..ny {
            for k in 0..nz {
                // Hex with extrusion axis x: "bottom" quad at x_i traversed
                // counterclockwise in the (y,z) plane seen from +x.
                let h8 = [
                    vid(i, j, k),
                    vid(i, j + 1, k),
                    vid(i, j + 1, k + 1),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i + 1, j + 1, k + 1),
                    vid(i + 1, j, k + 1),
                ];
                match kind {
                    CellKind::Prism => {
                        cells.push((kind, vec![h8[0], h8[1], h8[2], h8[4], h8[5], h8[6]]));
                        cells.push((kind, vec![h8[0], h8[2], h8[3], h8[4], h8[6], h8[7]]));
                    }
                    _ => {
                        let apex = vertices.len() as u32;
                        let mut c = Vec3::ZERO;
                        for &v in &h8 {
                            c += vertices[v as usize];
                        }
                        vertices.push(c / 8.0);
                        push_hex_pyramids(&mut cells, &h8, apex);
                    }
                }
            }
        }
    }
    if distort {
        distort_tube(&mut vertices, h, 10.0 * h);
    }
    let mut mesh = build_mesh(MeshInput { vertices, cells, boundary_tags: vec![] })?;
    tag_tube(&mut mesh);
    Ok(mesh)
}

/// Hybrid shock-tube mesh on `[0,5]×[0,9h]×[0,9h]`: three 3h-thick slabs
/// stacked along y — hexahedra, pyramids, prisms — glued conformingly and
/// always distorted (z-period `9h`). Boundary tags as in
/// [`gen_shock_tube_mesh`].
pub fn gen_hybrid_shock_tube_mesh(n: u32) -> Result<Mesh, MeshError> {
    if n < 1 || n > 24 {
        return Err(MeshError::InvalidParameter(format!("shock-tube refinement n = {n} out of range")));
    }
    let layers = 1usize << n;
    check_capacity(layers * 27 * 9)?;
    let h = 5.0 / layers as f64;
    let (ny, nz) = (9usize, 9usize);

    let vid = |i: usize, j: usize, k: usize| ((i * (ny + 1) + j) * (nz + 1) + k) as u32;
    let mut vertices = Vec::with_capacity((layers + 1) * (ny + 1) * (nz + 1));
    for i in 0..=layers {
        for j in 0..=ny {
            for k in 0..=nz {
                vertices.push(Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    let mut cells = Vec::new();
    for i in 0..layers {
        for j in 0..ny {
            for k in 0..nz {
                let h8 = [
                    vid(i, j, k),
                    vid(i, j + 1, k),
                    vid(i, j + 1, k + 1),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i + 1, j + 1, k + 1),
                    vid(i + 1, j, k + 1),
                ];
                if j < 3 {
                    cells.push((CellKind::Hexahedron, h8.to_vec()));
                } else if j < 6 {
                    let apex = vertices.len() as u32;
                    let mut c = Vec3::ZERO;
                    for &v in &h8 {
                        c += vertices[v as usize];
                    }
                    vertices.push(c / 8.0);
                    push_hex_pyramids(&mut cells, &h8, apex);
                } else {
                    cells.push((CellKind::Prism, vec![h8[0], h8[1], h8[2], h8[4], h8[5], h8[6]]));
                    cells.push((CellKind::Prism, vec![h8[0], h8[2], h8[3], h8[4], h8[6], h8[7]]));
                }
            }
        }
    }
    distort_tube(&mut vertices, h, 9.0 * h);
    let mut mesh = build_mesh(MeshInput { vertices, cells, boundary_tags: vec![] })?;
    tag_tube(&mut mesh);
    Ok(mesh)
}

/// Column-in-a-box mesh: the box `[0,0.4]×[0,0.41]×[0,0.4]` minus a solid
/// cylinder of radius 0.1 and height 0.3 with base center (0.2, 0.2, 0).
///
/// A quadrangle base mesh (butterfly cap over the cylinder footprint plus a
/// radial ring out to the rectangle boundary) is extruded along z into
/// hexahedral boxes, each split into 2 prisms or 6 pyramids, so the cell
/// count is exactly base-quads × layers × split factor. `m` is the number of
/// angular intervals per rectangle side (4m rays), `nr` the radial ring
/// subdivisions, `nz` the z layers (a multiple of 4 so the cylinder top is a
/// mesh plane). Boundary tags: `inflow` (x = 0), `outflow` (x = 0.4),
/// `wall` (everything else including the cylinder).
pub fn gen_column_mesh(kind: CellKind, m: usize, nr: usize, nz: usize) -> Result<Mesh, MeshError> {
    let split = match kind {
        CellKind::Prism => 2,
        CellKind::Pyramid => 6,
        _ => {
            return Err(MeshError::InvalidParameter(format!(
                "column mesh kind must be Prism or Pyramid, got {kind}"
            )))
        }
    };
    if m < 2 || nr < 2 || nz < 4 || nz % 4 != 0 {
        return Err(MeshError::InvalidParameter(
            "column mesh requires m ≥ 2, nr ≥ 2 and nz a positive multiple of 4".into(),
        ));
    }
    let (cx, cy) = (0.2f64, 0.2f64);
    let (lx, ly, lz) = (0.4f64, 0.41f64, 0.4f64);
    let (r_cyl, h_cyl) = (0.1, 0.3);
    let nth = 4 * m; // rays
    let nt = 5; // butterfly transition layers
    let nz_cyl = nz * 3 / 4; // layer index of the cylinder top

    // --- 2D base -------------------------------------------------------------
    // Corner directions split the circle into four spans, one per rectangle
    // side, each subdivided into m uniform angular intervals.
    let mut corner_angles = [
        (-cy as f64).atan2(lx - cx),
        (ly - cy).atan2(lx - cx),
        (ly - cy).atan2(-cx),
        (-cy as f64).atan2(-cx),
    ];
    corner_angles.sort_by(f64::total_cmp);
    let mut theta = Vec::with_capacity(nth);
    for s in 0..4 {
        let a0 = corner_angles[s];
        let a1 = if s == 3 {
            corner_angles[0] + std::f64::consts::TAU
        } else {
            corner_angles[s + 1]
        };
        for i in 0..m {
            theta.push(a0 + (a1 - a0) * i as f64 / m as f64);
        }
    }
    // Ray directions and their hit distance on the rectangle boundary.
    let mut dir = Vec::with_capacity(nth);
    let mut t_hit = Vec::with_capacity(nth);
    for &th in &theta {
        let d = Vec3::new(th.cos(), th.sin(), 0.0);
        let mut t = f64::INFINITY;
        if d.x > 1e-14 {
            t = t.min((lx - cx) / d.x);
        }
        if d.x < -1e-14 {
            t = t.min(-cx / d.x);
        }
        if d.y > 1e-14 {
            t = t.min((ly - cy) / d.y);
        }
        if d.y < -1e-14 {
            t = t.min(-cy / d.y);
        }
        dir.push(d);
        t_hit.push(t);
    }

    // 2D nodes: ring (rays × radial levels), butterfly core grid, transition.
    let mut base_pts: Vec<Vec3> = Vec::new();
    let ring_node = |i: usize, q: usize| (i % nth) * (nr + 1) + q;
    for i in 0..nth {
        for q in 0..=nr {
            // Mild inward grading keeps near-cylinder cells close to the arc
            // spacing.
            let t = (q as f64 / nr as f64).powf(1.2);
            let r = r_cyl + (t_hit[i] - r_cyl) * t;
            base_pts.push(Vec3::new(cx + r * dir[i].x, cy + r * dir[i].y, 0.0));
        }
    }
    // Butterfly core: bilinear grid on the square spanned by the four
    // corner-direction points at radius rc.
    let rc = 0.5 * r_cyl;
    let core0 = base_pts.len();
    let p: Vec<Vec3> = (0..4)
        .map(|s| Vec3::new(cx + rc * corner_angles[s].cos(), cy + rc * corner_angles[s].sin(), 0.0))
        .collect();
    let core_node = |i: usize, j: usize| core0 + j * (m + 1) + i;
    for j in 0..=m {
        for i in 0..=m {
            let (u, v) = (i as f64 / m as f64, j as f64 / m as f64);
            base_pts.push(
                p[0] * ((1.0 - u) * (1.0 - v))
                    + p[1] * (u * (1.0 - v))
                    + p[2] * (u * v)
                    + p[3] * ((1.0 - u) * v),
            );
        }
    }
    // Core perimeter in ray order (counterclockwise from corner 0).
    let perim: Vec<usize> = (0..nth)
        .map(|i| {
            let (s, r) = (i / m, i % m);
            match s {
                0 => core_node(r, 0),
                1 => core_node(m, r),
                2 => core_node(m - r, m),
                _ => core_node(0, m - r),
            }
        })
        .collect();
    // Transition nodes between core perimeter (q=0) and circle (q=nt).
    let trans0 = base_pts.len();
    let trans_interior = |i: usize, q: usize| trans0 + (i % nth) * (nt - 1) + (q - 1);
    for i in 0..nth {
        let a = base_pts[perim[i]];
        let b = base_pts[ring_node(i, 0)];
        for q in 1..nt {
            let t = q as f64 / nt as f64;
            base_pts.push(a + (b - a) * t);
        }
    }
    let trans_node = |i: usize, q: usize| -> usize {
        if q == 0 {
            perim[i % nth]
        } else if q == nt {
            ring_node(i, 0)
        } else {
            trans_interior(i, q)
        }
    };

    // 2D quads (counterclockwise), partitioned into ring and cap.
    // Note (θ, r) is left-handed in the plane, so the counterclockwise quad
    // runs radially outward first.
    let mut ring_quads: Vec<[usize; 4]> = Vec::with_capacity(nth * nr);
    for i in 0..nth {
        for q in 0..nr {
            ring_quads.push([
                ring_node(i, q),
                ring_node(i, q + 1),
                ring_node(i + 1, q + 1),
                ring_node(i + 1, q),
            ]);
        }
    }
    let mut cap_quads: Vec<[usize; 4]> = Vec::with_capacity(m * m + nth * nt);
    for j in 0..m {
        for i in 0..m {
            cap_quads.push([core_node(i, j), core_node(i + 1, j), core_node(i + 1, j + 1), core_node(i, j + 1)]);
        }
    }
    for i in 0..nth {
        for q in 0..nt {
            cap_quads.push([
                trans_node(i, q),
                trans_node(i, q + 1),
                trans_node(i + 1, q + 1),
                trans_node(i + 1, q),
            ]);
        }
    }
    let n_cells = (ring_quads.len() * nz + cap_quads.len() * (nz - nz_cyl)) * split;
    check_capacity(n_cells)?;

    // --- extrusion -------------------------------------------------------------
    // Ring nodes exist on all z levels; cap nodes only at and above the
    // cylinder top.
    let n2 = base_pts.len();
    let n_ring2 = nth * (nr + 1);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut level_of: Vec<Vec<u32>> = Vec::with_capacity(nz + 1);
    for l in 0..=nz {
        let z = lz * l as f64 / nz as f64;
        let mut ids = vec![u32::MAX; n2];
        for (npt, id) in ids.iter_mut().enumerate().take(n2) {
            if npt < n_ring2 || l >= nz_cyl {
                *id = vertices.len() as u32;
                vertices.push(Vec3::new(base_pts[npt].x, base_pts[npt].y, z));
            }
        }
        level_of.push(ids);
    }

    let mut cells: Vec<(CellKind, Vec<u32>)> = Vec::with_capacity(n_cells);
    let emit_box = |quad: &[usize; 4], l: usize, vertices: &mut Vec<Vec3>, cells: &mut Vec<(CellKind, Vec<u32>)>| {
        let b: Vec<u32> = quad.iter().map(|&q| level_of[l][q]).collect();
        let t: Vec<u32> = quad.iter().map(|&q| level_of[l + 1][q]).collect();
        let h8 = [b[0], b[1], b[2], b[3], t[0], t[1], t[2], t[3]];
        match kind {
            CellKind::Prism => {
                cells.push((kind, vec![h8[0], h8[1], h8[2], h8[4], h8[5], h8[6]]));
                cells.push((kind, vec![h8[0], h8[2], h8[3], h8[4], h8[6], h8[7]]));
            }
            _ => {
                let apex = vertices.len() as u32;
                let mut c = Vec3::ZERO;
                for &v in &h8 {
                    c += vertices[v as usize];
                }
                vertices.push(c / 8.0);
                push_hex_pyramids(cells, &h8, apex);
            }
        }
    };
    for l in 0..nz {
        for quad in &ring_quads {
            emit_box(quad, l, &mut vertices, &mut cells);
        }
        if l >= nz_cyl {
            for quad in &cap_quads {
                emit_box(quad, l, &mut vertices, &mut cells);
            }
        }
    }

    let mut mesh = build_mesh(MeshInput { vertices, cells, boundary_tags: vec![] })?;
    mesh.tag_all_boundary_faces(|c, _| {
        if c.x.abs() < 1e-9 {
            "inflow"
        } else if (c.x - lx).abs() < 1e-9 {
            "outflow"
        } else {
            "wall"
        }
    });
    let _ = h_cyl; // geometry is fixed by nz_cyl = 3/4 · nz and lz = 0.4
    Ok(mesh)
}
