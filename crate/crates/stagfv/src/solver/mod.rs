//! Explicit segregated time integrator for the compressible Euler
//! equations on a staggered mesh.
//!
//! One step advances, in order: (1) the primal mass balances, (2) the
//! internal-energy balances with the `p div u` work term and the corrective
//! source — the kinetic energy the previous step's momentum update
//! dissipated through upwinding and through the forward-Euler time
//! discretization, repaid one step lagged because both need the updated
//! velocity — (3) the equation of state, and (4) the face-normal momentum
//! balances on the virtual dual mesh, using the dual convection fluxes
//! reconstructed from the primal mass fluxes and the end-of-step pressure
//! gradient. The scheme is fully explicit; stability is a CFL constraint
//! and its violation is detected through loss of positivity and reported
//! as an error with a suggested smaller step.

mod config;

pub use config::{
    parse_config, parse_config_str, BoundaryCondition, BoundarySet, Config, ConfigError,
    TimeStep,
};

use std::sync::Arc;

use thiserror::Error;

use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::operators::{
    dual_density, dual_mass_residual, energy_divergence, ls_gradients, mass_divergence,
    momentum_convection, pressure_gradient, primal_mass_flux_values, upwind_dissipation,
    velocity_divergence, velocity_jump_sum, FaceScheme, FluxField, GhostValues,
    GradientWeights, State,
};

/// Errors raised while setting up or advancing a run.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid initial data: {field} = {value} in {place} {index}")]
    InvalidInitialData { field: &'static str, value: f64, place: &'static str, index: usize },
    #[error(
        "boundary face {face} at ({x}, {y}, {z}) carries no tag; every boundary face needs a \
         boundary condition"
    )]
    UntaggedBoundaryFace { face: usize, x: f64, y: f64, z: f64 },
    #[error("boundary tag `{0}` has no boundary condition")]
    MissingBoundaryCondition(String),
    #[error("boundary condition refers to tag `{0}`, which is not present in the mesh")]
    UnknownBoundaryTag(String),
    #[error(
        "time step {dt:.6e} violates the CFL stability bound: {field} became nonpositive in \
         cell {cell} at step {step}; retry with dt <= {suggested_dt:.6e}"
    )]
    CflViolation { step: usize, cell: usize, field: &'static str, dt: f64, suggested_dt: f64 },
}

/// A constant `(ρ, u, p)` state, used for uniform and piecewise-constant
/// initial data and for analytic reference states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformState {
    pub rho: f64,
    pub u: Vec3,
    pub p: f64,
}

impl UniformState {
    pub fn new(rho: f64, u: Vec3, p: f64) -> UniformState {
        UniformState { rho, u, p }
    }

    /// Specific internal energy from the EOS, `e = p/((γ−1)ρ)`.
    pub fn internal_energy(&self, gamma: f64) -> f64 {
        self.p / ((gamma - 1.0) * self.rho)
    }

    /// Speed of sound `c = sqrt(γp/ρ)`.
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

/// Pointwise scalar field used for smooth initial data.
pub type FieldFn = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;
/// Pointwise vector field used for smooth initial velocity.
pub type VectorFieldFn = Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>;

/// Initial data for [`initialize`]. Smooth fields are averaged by midpoint
/// (centroid) quadrature; two-state data split by a plane `x = x0` is
/// averaged exactly via polyhedral clipping, so cells cut by the interface
/// receive the exact volume-weighted means.
#[derive(Clone)]
pub enum InitialData {
    /// Pointwise fields; the thermodynamic variable may be given as
    /// pressure or as specific internal energy.
    Fields { rho: FieldFn, u: VectorFieldFn, thermo: ThermoField },
    /// `left` where `x < x0`, `right` where `x > x0`, exact averages in
    /// cut cells.
    PiecewiseX { x0: f64, left: UniformState, right: UniformState },
}

/// The thermodynamic component of smooth initial data.
#[derive(Clone)]
pub enum ThermoField {
    Pressure(FieldFn),
    InternalEnergy(FieldFn),
}

impl InitialData {
    /// The same constant state everywhere.
    pub fn uniform(s: UniformState) -> InitialData {
        InitialData::PiecewiseX { x0: f64::NEG_INFINITY, left: s, right: s }
    }

    /// Smooth `(ρ, u, p)` fields evaluated pointwise.
    pub fn fields(
        rho: impl Fn(Vec3) -> f64 + Send + Sync + 'static,
        u: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static,
        p: impl Fn(Vec3) -> f64 + Send + Sync + 'static,
    ) -> InitialData {
        InitialData::Fields {
            rho: Arc::new(rho),
            u: Arc::new(u),
            thermo: ThermoField::Pressure(Arc::new(p)),
        }
    }

    /// Two constant states split by the plane `x = x0`.
    pub fn piecewise_x(x0: f64, left: UniformState, right: UniformState) -> InitialData {
        InitialData::PiecewiseX { x0, left, right }
    }
}

/// Builds the discrete initial state: cell averages for ρ and e (pressure
/// synchronized through the EOS) and face values for u.
///
/// Nonpositive density or internal energy anywhere is an input error.
pub fn initialize(mesh: &Mesh, gamma: f64, data: &InitialData) -> Result<State, SolverError> {
    let n_c = mesh.n_cells();
    let n_f = mesh.n_faces();
    let mut state = State {
        t: 0.0,
        step: 0,
        rho: vec![0.0; n_c],
        e: vec![0.0; n_c],
        p: vec![0.0; n_c],
        u: vec![Vec3::ZERO; n_f],
    };
    match data {
        InitialData::Fields { rho, u, thermo } => {
            for c in 0..n_c {
                let x = mesh.cell_centroid(c);
                state.rho[c] = rho(x);
                state.e[c] = match thermo {
                    ThermoField::Pressure(p) => p(x) / ((gamma - 1.0) * state.rho[c]),
                    ThermoField::InternalEnergy(e) => e(x),
                };
            }
            for f in 0..n_f {
                state.u[f] = u(mesh.face_centroid(f));
            }
        }
        InitialData::PiecewiseX { x0, left, right } => {
            let (el, er) = (left.internal_energy(gamma), right.internal_energy(gamma));
            for c in 0..n_c {
                let vol = mesh.cell_volume(c);
                let vl = if x0.is_finite() { mesh.cell_volume_below_x(c, *x0) } else { 0.0 };
                let vr = (vol - vl).max(0.0);
                state.rho[c] = (vl * left.rho + vr * right.rho) / vol;
                // Conservative energy average: mean of ρe, then e = ρe/ρ.
                state.e[c] = (vl * left.rho * el + vr * right.rho * er) / (vol * state.rho[c]);
            }
            for f in 0..n_f {
                state.u[f] = if mesh.face_centroid(f).x < *x0 { left.u } else { right.u };
            }
        }
    }
    for c in 0..n_c {
        for (field, v) in [("rho", state.rho[c]), ("e", state.e[c])] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidInitialData {
                    field,
                    value: v,
                    place: "cell",
                    index: c,
                });
            }
        }
        state.p[c] = (gamma - 1.0) * state.rho[c] * state.e[c];
    }
    for f in 0..n_f {
        if !state.u[f].is_finite() {
            return Err(SolverError::InvalidInitialData {
                field: "u",
                value: f64::NAN,
                place: "face",
                index: f,
            });
        }
    }
    Ok(state)
}

/// CFL-bounded time step,
/// `δt = CFL · min_K (|K|/Σ_σ|σ|) / (max_{σ∈E(K)} |u_σ| + c_K)` with the
/// cell sound speed `c_K = sqrt(γ p_K / ρ_K)`.
pub fn cfl_dt(mesh: &Mesh, state: &State, gamma: f64, cfl: f64) -> f64 {
    let mut dt = f64::INFINITY;
    for c in 0..mesh.n_cells() {
        let mut area = 0.0;
        let mut umax: f64 = 0.0;
        for &f in mesh.cell_faces(c) {
            area += mesh.face_area(f as usize);
            umax = umax.max(state.u[f as usize].norm());
        }
        let c_k = (gamma * state.p[c] / state.rho[c]).sqrt();
        dt = dt.min(mesh.cell_volume(c) / area / (umax + c_k));
    }
    cfl * dt
}

/// Time part of the corrective source of the internal-energy balance,
/// `S_K = (1/(2 δt |K|)) Σ_{σ∈E(K)} |D_{K,σ}| ρ_{D_σ}^{old} |u_σ^{new} −
/// u_σ^{old}|²` — the kinetic energy the forward-Euler momentum update
/// dissipates, evaluated on the two most recent velocity levels (the space
/// counterpart is [`upwind_dissipation`]).
pub fn corrective_term(
    mesh: &Mesh,
    dt: f64,
    rho_d_old: &[f64],
    u_old: &[Vec3],
    u_new: &[Vec3],
) -> Vec<f64> {
    (0..mesh.n_cells())
        .map(|c| {
            let mut s = 0.0;
            for &f in mesh.cell_faces(c) {
                let f = f as usize;
                let hd = mesh.half_dual_volumes(f)[if mesh.face_owner(f) == c { 0 } else { 1 }];
                s += hd * rho_d_old[f] * (u_new[f] - u_old[f]).norm_sq();
            }
            s / (2.0 * dt * mesh.cell_volume(c))
        })
        .collect()
}

/// Per-step diagnostics recorded by [`Solver::step`]; sums use compensated
/// (Kahan) serial accumulation so they are deterministic.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    /// Step index after the update (the first step reports 1).
    pub step: usize,
    /// Time after the update.
    pub t: f64,
    /// Step size used.
    pub dt: f64,
    /// `Σ_K |K| ρ_K` after the update.
    pub total_mass: f64,
    /// `Σ_K |K| ρ_K e_K` after the update.
    pub internal_energy: f64,
    /// `½ Σ_σ |D_σ| ρ_{D_σ} |u_σ|²` after the update (diagnostic only; the
    /// scheme does not evolve total energy).
    pub kinetic_energy: f64,
    /// `internal_energy + kinetic_energy`.
    pub total_energy: f64,
    /// Smallest cell density after the update.
    pub min_rho: f64,
    /// Smallest cell internal energy after the update.
    pub min_e: f64,
    /// Largest dual mass-balance residual of the step, relative to
    /// `(|D_σ|/δt) max_K ρ_K`.
    pub max_dual_residual: f64,
    /// Net outgoing boundary mass flux `Σ_{σ⊂∂Ω} F_σ` at the old level, so
    /// mass obeys `Δ(total_mass) = −δt · boundary_mass_flux`.
    pub boundary_mass_flux: f64,
}

/// Outcome of [`Solver::run`]: one diagnostics record per completed step
/// plus the final state.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// `Σ|K|ρ` of the initial state.
    pub initial_mass: f64,
    pub steps: Vec<StepDiagnostics>,
    pub final_state: State,
}

impl RunReport {
    /// Mass-conservation audit over the whole run: the relative drift of
    /// the total mass after adding back the time-integrated boundary flux.
    /// Zero to round-off for any run, including ones with open boundaries.
    pub fn flux_adjusted_mass_drift(&self) -> f64 {
        let mut influx = Kahan::default();
        for s in &self.steps {
            influx.add(s.dt * s.boundary_mass_flux);
        }
        let final_mass = self.steps.last().map_or(self.initial_mass, |s| s.total_mass);
        ((final_mass - self.initial_mass + influx.sum()) / self.initial_mass).abs()
    }
}

/// Boundary condition resolved onto one face.
#[derive(Clone, Copy, PartialEq)]
enum FaceBc {
    Interior,
    /// Index into the Dirichlet value table.
    Dirichlet(u32),
    Outlet,
    Slip,
    Reflexive,
}

#[derive(Clone, Copy)]
struct DirichletValues {
    rho: f64,
    u: Vec3,
    p: f64,
    e: f64,
}

/// The time integrator: owns the evolving state, the resolved boundary
/// conditions and the lagged velocity level of the corrective term.
pub struct Solver<'m> {
    mesh: &'m Mesh,
    config: Config,
    face_bc: Vec<FaceBc>,
    dirichlet: Vec<DirichletValues>,
    weights: GradientWeights,
    state: State,
    /// `u^{n−1}` and `ρ_D^{n−1}` for the lagged corrective term (absent
    /// before the first step, making `S⁰ = 0`).
    prev_u: Option<Vec<Vec3>>,
    prev_rho_d: Option<Vec<f64>>,
    /// Space part of the corrective source, lagged: the per-cell kinetic
    /// energy rate the previous momentum update's donor-cell convection
    /// destroyed, with the step size it acted over (see
    /// [`upwind_dissipation`]). It needs `u^n`, so it can only be evaluated
    /// once that update is complete; it is repaid during the next step.
    prev_space: Option<(f64, Vec<f64>)>,
}

impl<'m> Solver<'m> {
    /// Resolves the boundary conditions onto faces, builds the initial
    /// state and makes the face velocities consistent with the conditions
    /// (imposed values on Dirichlet faces, normal component removed on
    /// walls).
    pub fn new(
        mesh: &'m Mesh,
        config: Config,
        bcs: &BoundarySet,
        init: &InitialData,
    ) -> Result<Solver<'m>, SolverError> {
        validate_config(&config)?;
        let (face_bc, dirichlet) = resolve_bcs(mesh, config.gamma, bcs)?;
        let mut state = initialize(mesh, config.gamma, init)?;
        enforce_face_velocity_bcs(mesh, &face_bc, &dirichlet, &mut state.u);
        Ok(Solver {
            mesh,
            config,
            face_bc,
            dirichlet,
            weights: GradientWeights::new(mesh),
            state,
            prev_u: None,
            prev_rho_d: None,
            prev_space: None,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// The current (last committed) state; valid even after a failed step.
    pub fn state(&self) -> &State {
        &self.state
    }

    /// CFL-bounded step for the current state (see [`cfl_dt`]).
    pub fn stable_dt(&self, cfl: f64) -> f64 {
        cfl_dt(self.mesh, &self.state, self.config.gamma, cfl)
    }

    /// Advances one step of size `dt`. On a CFL violation the state is left
    /// at the last valid level and an error describing the offending cell
    /// and a suggested smaller step is returned.
    pub fn step(&mut self, dt: f64) -> Result<StepDiagnostics, SolverError> {
        let mesh = self.mesh;
        let cfg = &self.config;
        let gamma = cfg.gamma;
        let n_c = mesh.n_cells();
        let n_f = mesh.n_faces();
        let state = &self.state;

        // Ghost scalars: zero-gradient everywhere except Dirichlet faces.
        let mut ghost = GhostValues::zero_gradient(mesh, &state.rho, &state.e);
        for f in 0..n_f {
            if let FaceBc::Dirichlet(i) = self.face_bc[f] {
                let d = &self.dirichlet[i as usize];
                ghost.rho[f] = d.rho;
                ghost.e[f] = d.e;
            }
        }

        // Primal mass fluxes, with wall faces pinned to exactly zero so
        // closed boxes conserve mass bitwise.
        let grad_rho = (cfg.scheme_mass == FaceScheme::MusclMinmod)
            .then(|| ls_gradients(mesh, &self.weights, &state.rho));
        let mut primal =
            primal_mass_flux_values(mesh, cfg.scheme_mass, &state.rho, &state.u, &ghost, grad_rho.as_deref());
        for f in 0..n_f {
            if matches!(self.face_bc[f], FaceBc::Slip | FaceBc::Reflexive) {
                primal[f] = 0.0;
            }
        }
        let flux = FluxField::from_primal(mesh, primal);

        // (1) Mass balances.
        let div_mass = mass_divergence(mesh, &flux);
        let mut rho_new = vec![0.0; n_c];
        for c in 0..n_c {
            rho_new[c] = state.rho[c] - dt * div_mass[c];
            if !(rho_new[c] > 0.0) {
                return Err(self.cfl_violation(c, "density", dt));
            }
        }

        // (2) Internal-energy balances with the work and corrective terms.
        let grad_e = (cfg.scheme_energy == FaceScheme::MusclMinmod)
            .then(|| ls_gradients(mesh, &self.weights, &state.e));
        let div_e =
            energy_divergence(mesh, &flux, cfg.scheme_energy, &state.e, &ghost, grad_e.as_deref());
        let div_u = velocity_divergence(mesh, &state.u);
        let source = cfg.s_term.then(|| {
            // Space part: the kinetic energy the previous step's donor-cell
            // momentum convection destroyed, rescaled from that step's size
            // so the repaid energy matches exactly.
            let mut s = vec![0.0; n_c];
            if let Some((dt_old, sp)) = &self.prev_space {
                let scale = dt_old / dt;
                for (sc, &v) in s.iter_mut().zip(sp) {
                    *sc = v * scale;
                }
            }
            // Time part: the kinetic energy the previous step's forward-Euler
            // update dissipated, likewise repaid one step lagged.
            if let (Some(rho_d), Some(u_prev)) = (&self.prev_rho_d, &self.prev_u) {
                for (sc, t) in s.iter_mut().zip(corrective_term(mesh, dt, rho_d, u_prev, &state.u))
                {
                    *sc += t;
                }
            }
            s
        });
        let mut e_new = vec![0.0; n_c];
        for c in 0..n_c {
            let s = source.as_ref().map_or(0.0, |s| s[c]);
            let rho_e = state.rho[c] * state.e[c]
                - dt * (div_e[c] + state.p[c] * div_u[c] - s);
            e_new[c] = rho_e / rho_new[c];
            if !(e_new[c] > 0.0) {
                return Err(self.cfl_violation(c, "internal energy", dt));
            }
        }

        // (3) Equation of state.
        let p_new: Vec<f64> = (0..n_c).map(|c| (gamma - 1.0) * rho_new[c] * e_new[c]).collect();

        // (4) Momentum balances on the dual mesh.
        let rho_d_old = dual_density(mesh, &state.rho);
        let rho_d_new = dual_density(mesh, &rho_new);
        let conv = momentum_convection(mesh, &flux, cfg.scheme_momentum, &state.u);
        let grad_p = pressure_gradient(mesh, &p_new);
        let jumps = (cfg.nu > 0.0).then(|| velocity_jump_sum(mesh, &state.u));
        let mut u_new = vec![Vec3::ZERO; n_f];
        for f in 0..n_f {
            u_new[f] = match self.face_bc[f] {
                FaceBc::Dirichlet(i) => self.dirichlet[i as usize].u,
                bc => {
                    let mut rhs = state.u[f] * rho_d_old[f] - (conv[f] + grad_p[f]) * dt;
                    if let Some(jumps) = &jumps {
                        rhs -= jumps[f] * (cfg.nu * dt);
                    }
                    if mesh.is_boundary(f) {
                        // The boundary face itself closes the diamond
                        // boundary; its convection carries the face value.
                        rhs -= state.u[f] * (flux.primal[f] / mesh.dual_volume(f) * dt);
                    }
                    let mut u = rhs / rho_d_new[f];
                    if matches!(bc, FaceBc::Slip | FaceBc::Reflexive) {
                        let n = mesh.face_normal(f);
                        u -= n * u.dot(n);
                    }
                    u
                }
            };
        }

        // With the update complete, the kinetic energy its upwinding
        // destroyed is known; keep it for the next step's source. The
        // centered interpolation is spatially conservative and gets none.
        self.prev_space = (cfg.s_term && cfg.scheme_momentum != FaceScheme::Centered)
            .then(|| (dt, upwind_dissipation(mesh, &flux, &state.u, &u_new)));

        // Step diagnostics (all serially compensated).
        let residuals = dual_mass_residual(mesh, &rho_d_old, &rho_d_new, dt, &flux);
        let rho_max =
            rho_new.iter().chain(&state.rho).fold(0.0f64, |a, &r| a.max(r));
        let mut max_res = 0.0f64;
        for f in 0..n_f {
            max_res = max_res.max(residuals[f].abs() * dt / (mesh.dual_volume(f) * rho_max));
        }
        let mut bflux = Kahan::default();
        for f in mesh.boundary_faces() {
            bflux.add(flux.primal[f]);
        }
        let (mut mass, mut internal, mut kinetic) = (Kahan::default(), Kahan::default(), Kahan::default());
        let (mut min_rho, mut min_e) = (f64::INFINITY, f64::INFINITY);
        for c in 0..n_c {
            let vol = mesh.cell_volume(c);
            mass.add(vol * rho_new[c]);
            internal.add(vol * rho_new[c] * e_new[c]);
            min_rho = min_rho.min(rho_new[c]);
            min_e = min_e.min(e_new[c]);
        }
        for f in 0..n_f {
            kinetic.add(0.5 * mesh.dual_volume(f) * rho_d_new[f] * u_new[f].norm_sq());
        }

        // Commit the new level and shift the lagged quantities.
        self.prev_u = Some(std::mem::replace(&mut self.state.u, u_new));
        self.prev_rho_d = Some(rho_d_old);
        self.state.rho = rho_new;
        self.state.e = e_new;
        self.state.p = p_new;
        self.state.t += dt;
        self.state.step += 1;

        let internal = internal.sum();
        let kinetic = kinetic.sum();
        Ok(StepDiagnostics {
            step: self.state.step,
            t: self.state.t,
            dt,
            total_mass: mass.sum(),
            internal_energy: internal,
            kinetic_energy: kinetic,
            total_energy: internal + kinetic,
            min_rho,
            min_e,
            max_dual_residual: max_res,
            boundary_mass_flux: bflux.sum(),
        })
    }

    /// Runs from the current time to `t_end` under the configured step
    /// policy, calling `on_snapshot` at the configured cadence (initial
    /// state and every `output.every`-th step) and always on the final
    /// state. Deterministic for fixed inputs.
    pub fn run(&mut self, mut on_snapshot: impl FnMut(&State)) -> Result<RunReport, SolverError> {
        let t_end = self.config.t_end;
        let eps = 1e-12 * t_end.abs().max(1.0);
        let mut initial_mass = Kahan::default();
        for c in 0..self.mesh.n_cells() {
            initial_mass.add(self.mesh.cell_volume(c) * self.state.rho[c]);
        }
        let mut steps = Vec::new();
        let mut last_emitted = None;
        if self.config.output_every > 0 {
            on_snapshot(&self.state);
            last_emitted = Some(self.state.step);
        }
        while self.state.t < t_end - eps {
            let dt = match self.config.time_step {
                TimeStep::Fixed(dt) => dt,
                TimeStep::Cfl(c) => self.stable_dt(c),
            };
            let dt = dt.min(t_end - self.state.t);
            steps.push(self.step(dt)?);
            if self.config.output_every > 0 && self.state.step % self.config.output_every == 0 {
                on_snapshot(&self.state);
                last_emitted = Some(self.state.step);
            }
        }
        if last_emitted != Some(self.state.step) {
            on_snapshot(&self.state);
        }
        Ok(RunReport {
            initial_mass: initial_mass.sum(),
            steps,
            final_state: self.state.clone(),
        })
    }

    fn cfl_violation(&self, cell: usize, field: &'static str, dt: f64) -> SolverError {
        let suggested =
            cfl_dt(self.mesh, &self.state, self.config.gamma, 0.45).min(0.5 * dt);
        SolverError::CflViolation {
            step: self.state.step,
            cell,
            field,
            dt,
            suggested_dt: suggested,
        }
    }
}

fn validate_config(cfg: &Config) -> Result<(), SolverError> {
    let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
    if !(cfg.gamma > 1.0) {
        return bad(format!("gamma must exceed 1, got {}", cfg.gamma));
    }
    if !(cfg.t_end >= 0.0) {
        return bad(format!("t_end must be nonnegative, got {}", cfg.t_end));
    }
    match cfg.time_step {
        TimeStep::Fixed(dt) if !(dt > 0.0) => {
            return bad(format!("dt must be positive, got {dt}"))
        }
        TimeStep::Cfl(c) if !(c > 0.0) => {
            return bad(format!("cfl must be positive, got {c}"))
        }
        _ => {}
    }
    if !(cfg.nu >= 0.0) {
        return bad(format!("nu must be nonnegative, got {}", cfg.nu));
    }
    Ok(())
}

fn resolve_bcs(
    mesh: &Mesh,
    gamma: f64,
    bcs: &BoundarySet,
) -> Result<(Vec<FaceBc>, Vec<DirichletValues>), SolverError> {
    for (tag, _) in bcs.iter() {
        if !mesh.tag_names().iter().any(|t| t == tag) {
            return Err(SolverError::UnknownBoundaryTag(tag.to_string()));
        }
    }
    let mut dirichlet: Vec<DirichletValues> = Vec::new();
    let mut face_bc = vec![FaceBc::Interior; mesh.n_faces()];
    for f in mesh.boundary_faces() {
        let tag = mesh.face_tag(f).ok_or_else(|| {
            let x = mesh.face_centroid(f);
            SolverError::UntaggedBoundaryFace { face: f, x: x.x, y: x.y, z: x.z }
        })?;
        let bc = bcs
            .get(tag)
            .ok_or_else(|| SolverError::MissingBoundaryCondition(tag.to_string()))?;
        face_bc[f] = match bc {
            BoundaryCondition::Outlet => FaceBc::Outlet,
            BoundaryCondition::SlipWall => FaceBc::Slip,
            BoundaryCondition::ReflexiveWall => FaceBc::Reflexive,
            BoundaryCondition::Dirichlet { rho, u, p } => {
                let state = UniformState::new(*rho, *u, *p);
                let vals = DirichletValues {
                    rho: *rho,
                    u: *u,
                    p: *p,
                    e: state.internal_energy(gamma),
                };
                let i = match dirichlet
                    .iter()
                    .position(|d| d.rho == vals.rho && d.u == vals.u && d.p == vals.p)
                {
                    Some(i) => i,
                    None => {
                        dirichlet.push(vals);
                        dirichlet.len() - 1
                    }
                };
                FaceBc::Dirichlet(i as u32)
            }
        };
    }
    Ok((face_bc, dirichlet))
}

fn enforce_face_velocity_bcs(
    mesh: &Mesh,
    face_bc: &[FaceBc],
    dirichlet: &[DirichletValues],
    u: &mut [Vec3],
) {
    for f in mesh.boundary_faces() {
        match face_bc[f] {
            FaceBc::Dirichlet(i) => u[f] = dirichlet[i as usize].u,
            FaceBc::Slip | FaceBc::Reflexive => {
                let n = mesh.face_normal(f);
                u[f] -= n * u[f].dot(n);
            }
            _ => {}
        }
    }
}

/// Compensated (Kahan) accumulator for deterministic serial sums.
#[derive(Clone, Copy, Default)]
struct Kahan {
    s: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    fn sum(self) -> f64 {
        self.s
    }
}
