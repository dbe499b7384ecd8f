//! Cell kinds, canonical vertex/face templates, face-role labels and the
//! per-kind dual-edge graph.
//!
//! Every cell stores its faces in the fixed *template slot order* of its
//! kind. Slot `i` carries the role label `ROLE_NAMES[kind][i]`
//! (W/E/S/N/A/B), which is how the dual-flux coefficient tables — written in
//! role labels — attach to an arbitrary cell: the attachment is purely
//! combinatorial, no geometric orientation is involved, and any consistent
//! per-cell assignment yields the same reconstruction because the tables are
//! equivariant under the kind's template symmetries.
//!
//! Canonical vertex ordering follows the common unstructured-grid
//! convention: nodes of the base polygon counterclockwise (viewed from the
//! opposite side, i.e. from the apex for pyramids and from the top face for
//! hexahedra), then the extruded/apex nodes.

use num_rational::Rational64;

/// The six supported cell kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    Triangle,
    Quadrangle,
    Tetrahedron,
    Hexahedron,
    Prism,
    Pyramid,
}

pub const ALL_KINDS: [CellKind; 6] = [
    CellKind::Triangle,
    CellKind::Quadrangle,
    CellKind::Tetrahedron,
    CellKind::Hexahedron,
    CellKind::Prism,
    CellKind::Pyramid,
];

impl CellKind {
    /// Spatial dimension of the cell (2 or 3).
    #[inline]
    pub fn dim(self) -> usize {
        match self {
            CellKind::Triangle | CellKind::Quadrangle => 2,
            _ => 3,
        }
    }

    /// Number of vertices of the canonical template.
    #[inline]
    pub fn vertex_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quadrangle => 4,
            CellKind::Tetrahedron => 4,
            CellKind::Hexahedron => 8,
            CellKind::Prism => 6,
            CellKind::Pyramid => 5,
        }
    }

    /// Number of faces (edges in 2D).
    #[inline]
    pub fn face_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quadrangle | CellKind::Tetrahedron => 4,
            CellKind::Hexahedron => 6,
            CellKind::Prism | CellKind::Pyramid => 5,
        }
    }

    /// Number of dual edges (interfaces between half-diamond cells) inside
    /// one cell of this kind.
    #[inline]
    pub fn dual_edge_count(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Quadrangle => 4,
            CellKind::Tetrahedron => 6,
            CellKind::Hexahedron => 12,
            CellKind::Prism => 9,
            CellKind::Pyramid => 8,
        }
    }

    /// The equal-volume fraction ξ = |D_{K,σ}| / |K| = 1 / face_count.
    #[inline]
    pub fn xi(self) -> f64 {
        1.0 / self.face_count() as f64
    }

    /// ξ as an exact rational.
    pub fn xi_rational(self) -> Rational64 {
        Rational64::new(1, self.face_count() as i64)
    }

    /// Face templates: local vertex indices of each face, listed in template
    /// slot order, oriented so the implied normal points outward.
    pub fn face_template(self) -> &'static [&'static [usize]] {
        match self {
            // Roles: S, E, W
            CellKind::Triangle => &[&[0, 1], &[1, 2], &[2, 0]],
            // Roles: S, E, N, W
            CellKind::Quadrangle => &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            // Roles: B, S, E, W
            CellKind::Tetrahedron => &[&[0, 2, 1], &[0, 1, 3], &[1, 2, 3], &[2, 0, 3]],
            // Roles: B, A, S, E, N, W (A = above/top, B = bottom)
            CellKind::Hexahedron => &[
                &[0, 3, 2, 1],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
            // Roles: W, E, B, S, N (W/E are the two triangles)
            CellKind::Prism => &[
                &[0, 2, 1],
                &[3, 4, 5],
                &[0, 1, 4, 3],
                &[1, 2, 5, 4],
                &[2, 0, 3, 5],
            ],
            // Roles: B, S, E, N, W (B is the quadrangle base)
            CellKind::Pyramid => &[
                &[0, 3, 2, 1],
                &[0, 1, 4],
                &[1, 2, 4],
                &[2, 3, 4],
                &[3, 0, 4],
            ],
        }
    }

    /// Role labels of the template slots, aligned with `face_template`.
    pub fn role_names(self) -> &'static [&'static str] {
        match self {
            CellKind::Triangle => &["S", "E", "W"],
            CellKind::Quadrangle => &["S", "E", "N", "W"],
            CellKind::Tetrahedron => &["B", "S", "E", "W"],
            CellKind::Hexahedron => &["B", "A", "S", "E", "N", "W"],
            CellKind::Prism => &["W", "E", "B", "S", "N"],
            CellKind::Pyramid => &["B", "S", "E", "N", "W"],
        }
    }

    /// Dual edges as ordered pairs of template slots `(from, to)` for the
    /// edge labeled `from|to`; the stored flux is positive when leaving the
    /// diamond of `from`. Order matches the kind's coefficient table rows.
    ///
    /// Opposite faces are never connected: W|E, S|N and A|B are absent where
    /// the kind has such pairs (hexahedron all three; prism W|E; pyramid S|N
    /// and E|W).
    pub fn dual_edge_template(self) -> &'static [(usize, usize)] {
        match self {
            // W|S, S|E, E|W
            CellKind::Triangle => &[(2, 0), (0, 1), (1, 2)],
            // W|S, S|E, E|N, N|W
            CellKind::Quadrangle => &[(3, 0), (0, 1), (1, 2), (2, 3)],
            // B|S, B|W, B|E, S|W, W|E, E|S
            CellKind::Tetrahedron => &[(0, 1), (0, 3), (0, 2), (1, 3), (3, 2), (2, 1)],
            // B|S, S|A, A|N, N|B, W|S, S|E, E|N, N|W, B|E, E|A, A|W, W|B
            CellKind::Hexahedron => &[
                (0, 2),
                (2, 1),
                (1, 4),
                (4, 0),
                (5, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (0, 3),
                (3, 1),
                (1, 5),
                (5, 0),
            ],
            // S|N, N|B, B|S, E|B, E|S, E|N, W|B, W|S, W|N
            CellKind::Prism => &[
                (3, 4),
                (4, 2),
                (2, 3),
                (1, 2),
                (1, 3),
                (1, 4),
                (0, 2),
                (0, 3),
                (0, 4),
            ],
            // B|S, B|E, B|N, B|W, S|E, E|N, N|W, W|S
            CellKind::Pyramid => &[
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 1),
            ],
        }
    }

    /// Human-readable label `from|to` of dual edge `e`.
    pub fn dual_edge_label(self, e: usize) -> String {
        let (a, b) = self.dual_edge_template()[e];
        let names = self.role_names();
        format!("{}|{}", names[a], names[b])
    }

    /// Keyword used by the ASCII mesh format.
    pub fn keyword(self) -> &'static str {
        match self {
            CellKind::Triangle => "TRI",
            CellKind::Quadrangle => "QUAD",
            CellKind::Tetrahedron => "TET",
            CellKind::Hexahedron => "HEX",
            CellKind::Prism => "PRISM",
            CellKind::Pyramid => "PYR",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<CellKind> {
        match kw {
            "TRI" => Some(CellKind::Triangle),
            "QUAD" => Some(CellKind::Quadrangle),
            "TET" => Some(CellKind::Tetrahedron),
            "HEX" => Some(CellKind::Hexahedron),
            "PRISM" => Some(CellKind::Prism),
            "PYR" => Some(CellKind::Pyramid),
            _ => None,
        }
    }
}

impl std::fmt::Display for CellKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CellKind::Triangle => "Triangle",
            CellKind::Quadrangle => "Quadrangle",
            CellKind::Tetrahedron => "Tetrahedron",
            CellKind::Hexahedron => "Hexahedron",
            CellKind::Prism => "Prism",
            CellKind::Pyramid => "Pyramid",
        };
        f.write_str(s)
    }
}
