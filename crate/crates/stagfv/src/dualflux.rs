//! Dual-flux coefficient tables.
//!
//! The staggered scheme needs a mass flux through every dual edge (the
//! interface between the diamond cells of two faces of the same primal
//! cell). Inside each cell kind these dual fluxes are fixed *algebraically*
//! as a linear combination of the cell's primal face fluxes,
//! `F_{σ,ε} = Σ_{σ'} α^ε_{σ'} F_{K,σ'}`, with exact rational coefficients
//! chosen so that
//!
//! - **H1** — mass balance on every half-diamond: the dual fluxes leaving
//!   `D_{K,σ}` equal `ξ_K Σ_{σ'} F_{K,σ'} − F_{K,σ}`;
//! - **H2** — conservativity: one flux per dual edge serves both diamonds
//!   with opposite signs (structural here: a single stored value);
//! - **H3** — boundedness: every coefficient satisfies `|α| ≤ 1`.
//!
//! The tables below are the unique minimum-Frobenius-norm solution of the
//! underdetermined constraint system `A X = B`;
//! [`derive_table_least_squares`] re-derives them numerically through a
//! pseudoinverse and [`check_table_is_min_norm`] proves the min-norm
//! property in exact rational arithmetic (a solution is minimum-norm iff
//! its columns lie in the row space of `A`).

use crate::mesh::{CellKind, ALL_KINDS};
use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use std::sync::OnceLock;
use thiserror::Error;

/// Exact coefficient arithmetic.
pub type Rational = Ratio<i64>;

/// Wider rationals for exact elimination (intermediate growth).
type Rat = Ratio<i128>;

#[derive(Debug, Error)]
pub enum DualFluxError {
    #[error("pseudoinverse failed for {kind}: {msg}")]
    Pseudoinverse { kind: CellKind, msg: &'static str },
    #[error("least-squares table for {kind} deviates from the reference by {max_dev:.3e} (edge {edge}, role {role})")]
    DerivationMismatch { kind: CellKind, max_dev: f64, edge: String, role: String },
    #[error("table for {kind} violates {property}")]
    PropertyViolation { kind: CellKind, property: String },
    #[error("no small rational within 1e-9 of {value}")]
    RationalReconstruction { value: f64 },
}

/// The dual-flux coefficients of one cell kind: one row per dual edge (in
/// template order), one column per face role (in template slot order).
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    kind: CellKind,
    rows: Vec<Vec<Rational>>,
    flat: Vec<f64>, // row-major mirror for the hot path
}

impl CoefficientTable {
    fn new(kind: CellKind, rows: Vec<Vec<Rational>>) -> Self {
        let nf = kind.face_count();
        debug_assert_eq!(rows.len(), kind.dual_edge_count());
        debug_assert!(rows.iter().all(|r| r.len() == nf));
        let flat = rows
            .iter()
            .flat_map(|r| r.iter().map(|q| *q.numer() as f64 / *q.denom() as f64))
            .collect();
        CoefficientTable { kind, rows, flat }
    }

    #[inline]
    pub fn kind(&self) -> CellKind {
        self.kind
    }

    /// Coefficient of primal flux slot `s` in dual edge `e`.
    #[inline]
    pub fn coefficient(&self, e: usize, s: usize) -> Rational {
        self.rows[e][s]
    }

    pub fn row(&self, e: usize) -> &[Rational] {
        &self.rows[e]
    }

    /// Row-major f64 coefficients, stride = face count.
    #[inline]
    pub fn as_f64(&self) -> &[f64] {
        &self.flat
    }

    /// Largest `|α|` over all entries (the H3 constant).
    pub fn max_abs(&self) -> Rational {
        self.rows
            .iter()
            .flatten()
            .map(|q| q.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Largest `Σ_σ' |α|` over dual edges — bounds `max|F_d| / max|F_p|`.
    pub fn max_row_l1(&self) -> Rational {
        self.rows
            .iter()
            .map(|r| r.iter().map(|q| q.abs()).sum())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Signed row for the dual edge from face slot `from` to `to`, negating
    /// the stored row when the edge is stored in the opposite orientation.
    pub fn row_for(&self, from: usize, to: usize) -> Option<(usize, i8)> {
        self.kind
            .dual_edge_template()
            .iter()
            .position(|&(a, b)| (a, b) == (from, to) || (a, b) == (to, from))
            .map(|e| {
                let (a, _) = self.kind.dual_edge_template()[e];
                (e, if a == from { 1 } else { -1 })
            })
    }
}

const fn r(n: i64, d: i64) -> (i64, i64) {
    (n, d)
}

/// Quadrangle coefficients, columns (W, E, S, N), rows (W|S, S|E, E|N, N|W).
const QUAD_TABLE: [[(i64, i64); 4]; 4] = [
    [r(-3, 8), r(1, 8), r(3, 8), r(-1, 8)],
    [r(-1, 8), r(3, 8), r(-3, 8), r(1, 8)],
    [r(1, 8), r(-3, 8), r(-1, 8), r(3, 8)],
    [r(3, 8), r(-1, 8), r(1, 8), r(-3, 8)],
];
/// Printed column order (W, E, S, N) → template slots (S, E, N, W).
const QUAD_PERM: [usize; 4] = [2, 1, 3, 0];

/// Hexahedron coefficients, columns (W, E, S, N, A, B), rows
/// (B|S, S|A, A|N, N|B, W|S, S|E, E|N, N|W, B|E, E|A, A|W, W|B).
const HEX_TABLE: [[(i64, i64); 6]; 12] = [
    [r(0, 1), r(0, 1), r(5, 24), r(-1, 24), r(1, 24), r(-5, 24)],
    [r(0, 1), r(0, 1), r(-5, 24), r(1, 24), r(5, 24), r(-1, 24)],
    [r(0, 1), r(0, 1), r(-1, 24), r(5, 24), r(-5, 24), r(1, 24)],
    [r(0, 1), r(0, 1), r(1, 24), r(-5, 24), r(-1, 24), r(5, 24)],
    [r(-5, 24), r(1, 24), r(5, 24), r(-1, 24), r(0, 1), r(0, 1)],
    [r(-1, 24), r(5, 24), r(-5, 24), r(1, 24), r(0, 1), r(0, 1)],
    [r(1, 24), r(-5, 24), r(-1, 24), r(5, 24), r(0, 1), r(0, 1)],
    [r(5, 24), r(-1, 24), r(1, 24), r(-5, 24), r(0, 1), r(0, 1)],
    [r(-1, 24), r(5, 24), r(0, 1), r(0, 1), r(1, 24), r(-5, 24)],
    [r(1, 24), r(-5, 24), r(0, 1), r(0, 1), r(5, 24), r(-1, 24)],
    [r(5, 24), r(-1, 24), r(0, 1), r(0, 1), r(-5, 24), r(1, 24)],
    [r(-5, 24), r(1, 24), r(0, 1), r(0, 1), r(-1, 24), r(5, 24)],
];
const HEX_PERM: [usize; 6] = [5, 4, 2, 1, 3, 0];

/// Prism coefficients, columns (B, S, N, E, W), rows
/// (S|N, N|B, B|S, E|B, E|S, E|N, W|B, W|S, W|N).
const PRISM_TABLE: [[(i64, i64); 5]; 9] = [
    [r(0, 1), r(-1, 5), r(1, 5), r(0, 1), r(0, 1)],
    [r(1, 5), r(0, 1), r(-1, 5), r(0, 1), r(0, 1)],
    [r(-1, 5), r(1, 5), r(0, 1), r(0, 1), r(0, 1)],
    [r(1, 5), r(0, 1), r(0, 1), r(-4, 15), r(1, 15)],
    [r(0, 1), r(1, 5), r(0, 1), r(-4, 15), r(1, 15)],
    [r(0, 1), r(0, 1), r(1, 5), r(-4, 15), r(1, 15)],
    [r(1, 5), r(0, 1), r(0, 1), r(1, 15), r(-4, 15)],
    [r(0, 1), r(1, 5), r(0, 1), r(1, 15), r(-4, 15)],
    [r(0, 1), r(0, 1), r(1, 5), r(1, 15), r(-4, 15)],
];
const PRISM_PERM: [usize; 5] = [4, 3, 0, 1, 2];

/// Pyramid coefficients, columns (B, S, E, N, W), rows
/// (B|S, B|E, B|N, B|W, S|E, E|N, N|W, W|S).
const PYRAMID_TABLE: [[(i64, i64); 5]; 8] = [
    [r(-1, 5), r(4, 15), r(0, 1), r(-1, 15), r(0, 1)],
    [r(-1, 5), r(0, 1), r(4, 15), r(0, 1), r(-1, 15)],
    [r(-1, 5), r(-1, 15), r(0, 1), r(4, 15), r(0, 1)],
    [r(-1, 5), r(0, 1), r(-1, 15), r(0, 1), r(4, 15)],
    [r(0, 1), r(-4, 15), r(4, 15), r(1, 15), r(-1, 15)],
    [r(0, 1), r(-1, 15), r(-4, 15), r(4, 15), r(1, 15)],
    [r(0, 1), r(1, 15), r(-1, 15), r(-4, 15), r(4, 15)],
    [r(0, 1), r(4, 15), r(1, 15), r(-1, 15), r(-4, 15)],
];
const PYRAMID_PERM: [usize; 5] = [0, 1, 2, 3, 4];

fn build_table(kind: CellKind) -> CoefficientTable {
    let nf = kind.face_count();
    let rows: Vec<Vec<Rational>> = match kind {
        // Simplices: every pair of faces shares a dual edge and the flux is
        // simply (F_{σ'} − F_σ) / face_count.
        CellKind::Triangle | CellKind::Tetrahedron => kind
            .dual_edge_template()
            .iter()
            .map(|&(a, b)| {
                (0..nf)
                    .map(|s| {
                        let mut q = Rational::zero();
                        if s == b {
                            q += Rational::new(1, nf as i64);
                        }
                        if s == a {
                            q -= Rational::new(1, nf as i64);
                        }
                        q
                    })
                    .collect()
            })
            .collect(),
        CellKind::Quadrangle => permute(&QUAD_TABLE, &QUAD_PERM),
        CellKind::Hexahedron => permute(&HEX_TABLE, &HEX_PERM),
        CellKind::Prism => permute(&PRISM_TABLE, &PRISM_PERM),
        CellKind::Pyramid => permute(&PYRAMID_TABLE, &PYRAMID_PERM),
    };
    CoefficientTable::new(kind, rows)
}

/// Reorders a table given in publication column order into template slot
/// order: slot `s` reads publication column `perm[s]`.
fn permute<const NF: usize>(table: &[[(i64, i64); NF]], perm: &[usize; NF]) -> Vec<Vec<Rational>> {
    table
        .iter()
        .map(|row| perm.iter().map(|&p| Rational::new(row[p].0, row[p].1)).collect())
        .collect()
}

/// The reference coefficient table of a cell kind (exact rationals; these
/// are the scheme's ground truth).
pub fn table_of_kind(kind: CellKind) -> &'static CoefficientTable {
    static TABLES: OnceLock<Vec<CoefficientTable>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| ALL_KINDS.iter().map(|&k| build_table(k)).collect());
    &tables[ALL_KINDS.iter().position(|&k| k == kind).unwrap()]
}

/// The constraint system `A X = B` of a kind, as dense matrices.
///
/// `A` (faces × dual edges) is the incidence matrix: +1 if the edge leaves
/// that face's diamond, −1 if it enters. `B = ξ J − I` (faces × faces), so
/// row σ of `B F_p` is `ξ_K Σ_{σ'} F_{K,σ'} − F_{K,σ}`.
pub fn constraint_system(kind: CellKind) -> (DMatrix<f64>, DMatrix<f64>) {
    let (nf, ne) = (kind.face_count(), kind.dual_edge_count());
    let mut a = DMatrix::zeros(nf, ne);
    for (e, &(from, to)) in kind.dual_edge_template().iter().enumerate() {
        a[(from, e)] = 1.0;
        a[(to, e)] = -1.0;
    }
    let xi = kind.xi();
    let b = DMatrix::from_fn(nf, nf, |i, j| xi - if i == j { 1.0 } else { 0.0 });
    (a, b)
}

fn constraint_system_rational(kind: CellKind) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    let (nf, ne) = (kind.face_count(), kind.dual_edge_count());
    let mut a = vec![vec![Rat::zero(); ne]; nf];
    for (e, &(from, to)) in kind.dual_edge_template().iter().enumerate() {
        a[from][e] = Rat::new(1, 1);
        a[to][e] = Rat::new(-1, 1);
    }
    let xi_q = kind.xi_rational();
    let xi = Rat::new(*xi_q.numer() as i128, *xi_q.denom() as i128);
    let b = (0..nf)
        .map(|i| (0..nf).map(|j| xi - if i == j { Rat::new(1, 1) } else { Rat::zero() }).collect())
        .collect();
    (a, b)
}

/// Nearest rational with a small denominator (continued fractions), within
/// 1e-9 of `x`.
fn rationalize(x: f64) -> Result<Rational, DualFluxError> {
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.round() as i64, 1i64);
    let mut frac = x - x.round();
    for _ in 0..24 {
        if (p1 as f64 / q1 as f64 - x).abs() < 1e-9 {
            return Ok(Rational::new(p1, q1));
        }
        if frac.abs() < 1e-12 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.round();
        frac = inv - a;
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if q1 > 1_000_000 {
            break;
        }
    }
    Err(DualFluxError::RationalReconstruction { value: x })
}

/// Re-derives the coefficient table of `kind` as the minimum-Frobenius-norm
/// least-squares solution of `A X = B` (Moore–Penrose pseudoinverse), checks
/// it against the reference table, and returns the rationalized table
/// together with the maximum deviation from the reference.
pub fn derive_table_least_squares(
    kind: CellKind,
) -> Result<(CoefficientTable, f64), DualFluxError> {
    let (a, b) = constraint_system(kind);
    let pinv = a
        .pseudo_inverse(1e-10)
        .map_err(|msg| DualFluxError::Pseudoinverse { kind, msg })?;
    let x = pinv * b; // dual edges × face roles
    let reference = table_of_kind(kind);
    let mut max_dev = 0.0f64;
    let mut worst = (0usize, 0usize);
    for e in 0..kind.dual_edge_count() {
        for s in 0..kind.face_count() {
            let q = reference.coefficient(e, s);
            let dev = (x[(e, s)] - *q.numer() as f64 / *q.denom() as f64).abs();
            if dev > max_dev {
                (max_dev, worst) = (dev, (e, s));
            }
        }
    }
    if max_dev > 1e-12 {
        return Err(DualFluxError::DerivationMismatch {
            kind,
            max_dev,
            edge: kind.dual_edge_label(worst.0),
            role: kind.role_names()[worst.1].to_string(),
        });
    }
    let rows = (0..kind.dual_edge_count())
        .map(|e| (0..kind.face_count()).map(|s| rationalize(x[(e, s)])).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    Ok((CoefficientTable::new(kind, rows), max_dev))
}

/// Exact rational Gaussian elimination; `Some` iff `M x = v` is consistent.
fn rational_system_consistent(mut m: Vec<Vec<Rat>>, mut v: Vec<Rat>) -> bool {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let Some(p) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        v.swap(pivot_row, p);
        for r in pivot_row + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col] / m[pivot_row][col];
            for c in col..cols {
                let sub = f * m[pivot_row][c];
                m[r][c] -= sub;
            }
            let sub = f * v[pivot_row];
            v[r] -= sub;
        }
        pivot_row += 1;
    }
    // Consistent iff no zero row has a nonzero right-hand side.
    (pivot_row..rows).all(|r| v[r].is_zero())
}

/// Proves, in exact rational arithmetic, that the reference table of `kind`
/// is *the* minimum-Frobenius-norm solution of `A X = B`:
/// it solves the system exactly, and each of its columns lies in the row
/// space of `A` (equivalently `col = Aᵀ w` is consistent), which
/// characterizes the minimum-norm solution of a consistent system.
pub fn check_table_is_min_norm(kind: CellKind) -> Result<(), DualFluxError> {
    let (a, b) = constraint_system_rational(kind);
    let table = table_of_kind(kind);
    let (nf, ne) = (kind.face_count(), kind.dual_edge_count());
    let to_wide = |q: Rational| Rat::new(*q.numer() as i128, *q.denom() as i128);
    // A · X = B exactly.
    for i in 0..nf {
        for j in 0..nf {
            let mut s = Rat::zero();
            for e in 0..ne {
                s += a[i][e] * to_wide(table.coefficient(e, j));
            }
            if s != b[i][j] {
                return Err(DualFluxError::PropertyViolation {
                    kind,
                    property: format!("H1 identity at face {}, column {}", i, j),
                });
            }
        }
    }
    // Each column of X lies in rowspace(A): Aᵀ w = x_j solvable.
    let at: Vec<Vec<Rat>> = (0..ne).map(|e| (0..nf).map(|f| a[f][e]).collect()).collect();
    for j in 0..nf {
        let col: Vec<Rat> = (0..ne).map(|e| to_wide(table.coefficient(e, j))).collect();
        if !rational_system_consistent(at.clone(), col) {
            return Err(DualFluxError::PropertyViolation {
                kind,
                property: format!(
                    "minimum-norm: column {} lies outside the row space of A",
                    kind.role_names()[j]
                ),
            });
        }
    }
    Ok(())
}

/// Primal and dual mass fluxes of one cell, both in template order.
#[derive(Clone, Debug)]
pub struct CellFluxes {
    pub cell: usize,
    pub kind: CellKind,
    /// Outgoing primal flux per face slot, `F_{K,σ} = |σ| ρ_σ u_σ·n_{K,σ}`.
    pub primal: Vec<f64>,
    /// Dual flux per template dual edge, positive from `D_σ` to `D_σ'`.
    pub dual: Vec<f64>,
}

/// Applies the kind's table: `dual[e] = Σ_s α[e][s] · primal[s]`.
#[inline]
pub fn reconstruct_into(kind: CellKind, primal: &[f64], dual: &mut [f64]) {
    let nf = kind.face_count();
    let flat = table_of_kind(kind).as_f64();
    for (e, d) in dual.iter_mut().enumerate() {
        let row = &flat[e * nf..(e + 1) * nf];
        *d = row.iter().zip(primal).map(|(a, f)| a * f).sum();
    }
}

/// Reconstructs all dual fluxes of one cell from its primal face fluxes.
pub fn reconstruct_dual_fluxes(cell: usize, kind: CellKind, primal: &[f64]) -> CellFluxes {
    assert_eq!(primal.len(), kind.face_count(), "one primal flux per face required");
    let mut dual = vec![0.0; kind.dual_edge_count()];
    reconstruct_into(kind, primal, &mut dual);
    CellFluxes { cell, kind, primal: primal.to_vec(), dual }
}

/// Result of checking one cell's fluxes against H1 and H3.
#[derive(Clone, Debug)]
pub struct ConstraintReport {
    /// Per-face H1 residual
    /// `F_{K,σ} + Σ_{ε∈E(D_σ)} ±F_{σ,ε} − ξ_K Σ_{σ'} F_{K,σ'}`.
    pub h1: Vec<f64>,
    pub max_h1: f64,
    /// `max |F_{σ,ε}| / max |F_{K,σ}|` (0 when all primal fluxes vanish).
    pub flux_ratio: f64,
    /// The table's `max_row_l1` bound the ratio must respect.
    pub bound: f64,
}

/// Evaluates the H1 residuals and the H3 boundedness ratio of one cell.
pub fn verify_constraints(fluxes: &CellFluxes) -> ConstraintReport {
    let kind = fluxes.kind;
    let xi = kind.xi();
    let total: f64 = fluxes.primal.iter().sum();
    let mut h1 = vec![0.0; kind.face_count()];
    for (s, r) in h1.iter_mut().enumerate() {
        *r = fluxes.primal[s] - xi * total;
    }
    for (e, &(from, to)) in kind.dual_edge_template().iter().enumerate() {
        h1[from] += fluxes.dual[e];
        h1[to] -= fluxes.dual[e];
    }
    let max_h1 = h1.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let max_p = fluxes.primal.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let max_d = fluxes.dual.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let flux_ratio = if max_p > 0.0 { max_d / max_p } else { 0.0 };
    let table = table_of_kind(kind);
    let bound = {
        let q = table.max_row_l1();
        *q.numer() as f64 / *q.denom() as f64
    };
    ConstraintReport { h1, max_h1, flux_ratio, bound }
}

/// Machine-readable export of all six tables:
/// `kind,edge,role,numerator,denominator` (template edge and slot order).
pub fn table_csv() -> String {
    let mut s = String::from("kind,edge,role,numerator,denominator\n");
    for &kind in &ALL_KINDS {
        let table = table_of_kind(kind);
        for e in 0..kind.dual_edge_count() {
            for (sl, role) in kind.role_names().iter().enumerate() {
                let q = table.coefficient(e, sl);
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    kind.keyword(),
                    kind.dual_edge_label(e),
                    role,
                    q.numer(),
                    q.denom()
                ));
            }
        }
    }
    s
}
