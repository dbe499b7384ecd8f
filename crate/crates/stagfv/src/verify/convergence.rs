//! Refinement studies of the shock-reflection tube: the mesh family, the
//! fixed-step study driver, error tables and observed orders.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::mesh::{gen_hybrid_shock_tube_mesh, gen_shock_tube_mesh, CellKind, Mesh, ShockTubeKind};
use crate::operators::FaceScheme;
use crate::solver::{cfl_dt, initialize, Config, Solver, TimeStep};

use super::norms::{convergence_rates, error_norms, ErrorReport, Orders};
use super::shock::ShockSetup;
use super::VerifyError;

/// The tube mesh of refinement level `n` (`h = 5/2^n` along the axis):
/// distorted pure-prism or pure-pyramid extrusions, or the always-distorted
/// hex/pyramid/prism hybrid.
pub fn tube_mesh(kind: ShockTubeKind, n: u32) -> Result<Mesh, VerifyError> {
    Ok(match kind {
        ShockTubeKind::Prism => gen_shock_tube_mesh(n, CellKind::Prism, true)?,
        ShockTubeKind::Pyramid => gen_shock_tube_mesh(n, CellKind::Pyramid, true)?,
        ShockTubeKind::Hybrid => gen_hybrid_shock_tube_mesh(n)?,
    })
}

/// Parameters of a refinement study on the shock-reflection tube.
#[derive(Clone, Debug)]
pub struct StudyParams {
    pub kind: ShockTubeKind,
    /// Refinement exponents, coarse to fine; level `n` has `2^n` layers.
    pub levels: RangeInclusive<u32>,
    /// Face scheme applied to mass, energy and momentum alike.
    pub scheme: FaceScheme,
    /// Stabilization viscosity ν.
    pub nu: f64,
    /// Whether the corrective internal-energy source is active.
    pub s_term: bool,
    /// Evaluation times, strictly increasing.
    pub times: Vec<f64>,
    /// CFL number fixing the step size from the initial state.
    pub cfl: f64,
}

impl StudyParams {
    /// Study defaults: MUSCL faces, the preset stabilization
    /// `ν = |u_{R1} ρ_{R1}|/50`, corrective source on, errors at
    /// `t = 0.003` (incident phase) and `t = 0.015` (reflected phase).
    pub fn new(kind: ShockTubeKind, levels: RangeInclusive<u32>) -> StudyParams {
        StudyParams {
            kind,
            levels,
            scheme: FaceScheme::MusclMinmod,
            nu: ShockSetup::preset().nu(),
            s_term: true,
            times: vec![0.003, 0.015],
            cfl: 0.45,
        }
    }
}

/// Study outcome of one refinement level.
#[derive(Clone, Debug)]
pub struct StudyLevel {
    pub n: u32,
    /// Largest cell diameter.
    pub h: f64,
    /// Fixed step size used (an exact divisor of the final time).
    pub dt: f64,
    pub n_cells: usize,
    /// Total steps taken across all evaluation times.
    pub steps: usize,
    /// Largest relative dual mass-balance residual seen in any step.
    pub max_dual_residual: f64,
    /// One error report per evaluation time, in `times` order.
    pub reports: Vec<ErrorReport>,
}

/// A completed refinement study.
#[derive(Clone, Debug)]
pub struct StudyResult {
    pub times: Vec<f64>,
    pub levels: Vec<StudyLevel>,
}

impl StudyResult {
    /// Observed orders between consecutive levels at `times[time_index]`.
    pub fn orders_at(&self, time_index: usize) -> Vec<Orders> {
        let reports: Vec<ErrorReport> =
            self.levels.iter().map(|l| l.reports[time_index]).collect();
        convergence_rates(&reports)
    }

    /// The study as a CSV table, one row per (time, level), with observed
    /// orders left blank on the coarsest level and where undefined.
    pub fn csv(&self) -> String {
        let mut out =
            String::from("time,n,h,dt,e_p,e_rho,e_u,order_p,order_rho,order_u\n");
        for (ti, &time) in self.times.iter().enumerate() {
            let orders = self.orders_at(ti);
            for (li, level) in self.levels.iter().enumerate() {
                let r = &level.reports[ti];
                let ord = |pick: fn(&Orders) -> Option<f64>| match li {
                    0 => String::new(),
                    _ => pick(&orders[li - 1]).map_or(String::new(), |o| format!("{o:.16e}")),
                };
                writeln!(
                    out,
                    "{time:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                    level.n,
                    r.h,
                    level.dt,
                    r.p.value,
                    r.rho.value,
                    r.u.value,
                    ord(|o| o.p),
                    ord(|o| o.rho),
                    ord(|o| o.u),
                )
                .expect("writing to a String cannot fail");
            }
        }
        out
    }
}

/// Runs the tube on each refinement level and measures errors against the
/// exact reflection solution at every requested time.
///
/// The step size is fixed per level: `δt = t_last/⌈t_last/δt_CFL⌉` with
/// `δt_CFL` evaluated on the initial state, so the finest structures of
/// the run (the twice-shocked state) stay well inside the stability
/// bound. Steps are truncated to land exactly on each evaluation time.
pub fn shock_tube_study(params: &StudyParams) -> Result<StudyResult, VerifyError> {
    let setup = ShockSetup::preset();
    let times = params.times.clone();
    if times.is_empty() {
        return Err(VerifyError::InvalidState { field: "times", value: 0.0 });
    }
    for &t in &times {
        if !(t > 0.0) || t > setup.t_max {
            return Err(VerifyError::TimeOutOfRange { t, t_max: setup.t_max });
        }
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(VerifyError::InvalidState { field: "times", value: w[1] });
        }
    }
    let t_last = *times.last().expect("times is nonempty");

    let bcs = setup.boundary_conditions();
    let init = setup.initial_data();
    let mut levels = Vec::new();
    for n in params.levels.clone() {
        let mesh = tube_mesh(params.kind, n)?;
        let state0 = initialize(&mesh, setup.gamma, &init)?;
        let nsteps = (t_last / cfl_dt(&mesh, &state0, setup.gamma, params.cfl)).ceil();
        let dt = t_last / nsteps;

        let mut config =
            Config::new(setup.gamma, t_last, TimeStep::Fixed(dt)).with_schemes(params.scheme);
        config.nu = params.nu;
        config.s_term = params.s_term;
        let mut solver = Solver::new(&mesh, config, &bcs, &init)?;

        let mut reports = Vec::with_capacity(times.len());
        let mut max_dual_residual = 0.0f64;
        let mut steps = 0usize;
        for &t_i in &times {
            loop {
                let remaining = t_i - solver.state().t;
                if remaining <= 1e-9 * dt {
                    break;
                }
                let diag = solver.step(dt.min(remaining))?;
                max_dual_residual = max_dual_residual.max(diag.max_dual_residual);
                steps += 1;
            }
            reports.push(error_norms(&mesh, solver.state(), |x| {
                setup.exact_solution(x.x, t_i).expect("times validated against t_max")
            }));
        }
        levels.push(StudyLevel {
            n,
            h: mesh.h_max(),
            dt,
            n_cells: mesh.n_cells(),
            steps,
            max_dual_residual,
            reports,
        });
    }
    Ok(StudyResult { times, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_prism_study_produces_finite_errors_and_a_table() {
        let mut params = StudyParams::new(ShockTubeKind::Prism, 1..=2);
        params.times = vec![0.003];
        let result = shock_tube_study(&params).unwrap();
        assert_eq!(result.levels.len(), 2);
        assert_eq!(result.levels[0].n_cells, 400);
        assert_eq!(result.levels[1].n_cells, 800);
        for level in &result.levels {
            assert!(level.steps > 0);
            assert!(level.max_dual_residual <= 1e-10, "{}", level.max_dual_residual);
            let r = &level.reports[0];
            for e in [r.p.value, r.rho.value, r.u.value] {
                assert!(e.is_finite() && e > 0.0 && e < 1.0, "{e}");
            }
        }
        // Halving h halves the layer width, so the reports see it.
        assert!(result.levels[1].h < result.levels[0].h);
        let csv = result.csv();
        assert!(csv.starts_with("time,n,h,dt,e_p,e_rho,e_u,order_p,order_rho,order_u\n"));
        assert_eq!(csv.lines().count(), 3);
        // The fine row carries order entries (possibly signed), the coarse
        // row leaves them blank.
        let coarse = csv.lines().nth(1).unwrap();
        assert!(coarse.ends_with(",,,"));
    }

    #[test]
    fn bad_evaluation_times_are_rejected() {
        let mut params = StudyParams::new(ShockTubeKind::Prism, 1..=1);
        params.times = vec![1.0];
        assert!(matches!(
            shock_tube_study(&params),
            Err(VerifyError::TimeOutOfRange { .. })
        ));
        params.times = vec![0.01, 0.003];
        assert!(matches!(
            shock_tube_study(&params),
            Err(VerifyError::InvalidState { .. })
        ));
        params.times = vec![];
        assert!(shock_tube_study(&params).is_err());
    }
}
