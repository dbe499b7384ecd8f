//! Discrete error norms against an analytic reference and observed
//! convergence orders between refinement levels.

use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::operators::State;
use crate::solver::UniformState;

/// A relative L1 error; when the reference norm vanishes the relative
/// error is undefined, so the absolute norm is reported instead and
/// flagged.
#[derive(Clone, Copy, Debug)]
pub struct ErrorNorm {
    pub value: f64,
    /// True when `value` is the absolute (unnormalized) norm.
    pub absolute: bool,
}

impl ErrorNorm {
    fn from_sums(num: f64, den: f64) -> ErrorNorm {
        if den > 0.0 {
            ErrorNorm { value: num / den, absolute: false }
        } else {
            ErrorNorm { value: num, absolute: true }
        }
    }
}

/// Errors of one discrete state: pressure and density per cell, velocity
/// as the mean of the cell's face values, all volume-weighted.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    /// Largest cell diameter of the mesh.
    pub h: f64,
    pub p: ErrorNorm,
    pub rho: ErrorNorm,
    pub u: ErrorNorm,
}

/// Volume-weighted relative L1 errors of `state` against the pointwise
/// reference `exact`, evaluated at cell centroids. Cell velocities are
/// the arithmetic means of the surrounding face velocities.
pub fn error_norms(
    mesh: &Mesh,
    state: &State,
    exact: impl Fn(Vec3) -> UniformState,
) -> ErrorReport {
    let mut num = [0.0f64; 3];
    let mut den = [0.0f64; 3];
    for c in 0..mesh.n_cells() {
        let vol = mesh.cell_volume(c);
        let x = mesh.cell_centroid(c);
        let want = exact(x);
        let u_mean = mesh.cell_face_mean(c, &state.u);
        for (i, (have, target)) in [
            (state.p[c], want.p),
            (state.rho[c], want.rho),
        ]
        .into_iter()
        .enumerate()
        {
            num[i] += vol * (have - target).abs();
            den[i] += vol * target.abs();
        }
        num[2] += vol * (u_mean - want.u).norm();
        den[2] += vol * want.u.norm();
    }
    ErrorReport {
        h: mesh.h_max(),
        p: ErrorNorm::from_sums(num[0], den[0]),
        rho: ErrorNorm::from_sums(num[1], den[1]),
        u: ErrorNorm::from_sums(num[2], den[2]),
    }
}

/// Observed orders between two consecutive refinement levels; `None` when
/// either error is zero or negative (the ratio carries no information).
#[derive(Clone, Copy, Debug)]
pub struct Orders {
    pub p: Option<f64>,
    pub rho: Option<f64>,
    pub u: Option<f64>,
}

/// Observed convergence orders `log2(e_coarse/e_fine)` between consecutive
/// entries of `reports` (assumed ordered coarse to fine with `h` halving).
pub fn convergence_rates(reports: &[ErrorReport]) -> Vec<Orders> {
    let rate = |coarse: ErrorNorm, fine: ErrorNorm| {
        (coarse.value > 0.0 && fine.value > 0.0).then(|| (coarse.value / fine.value).log2())
    };
    reports
        .windows(2)
        .map(|w| Orders {
            p: rate(w[0].p, w[1].p),
            rho: rate(w[0].rho, w[1].rho),
            u: rate(w[0].u, w[1].u),
        })
        .collect()
}
