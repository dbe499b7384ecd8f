//! Numerical weak-consistency harness for the momentum convection
//! operator: the discrete weak form, assembled from sampled smooth fields,
//! is compared against the continuous weak form of `∂_t(ρu) + div(ρu⊗u)`
//! computed by high-order quadrature. The difference shrinks at first
//! order when mesh and time step are refined together.

use std::sync::Arc;

use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::operators::{
    dual_density, momentum_convection, primal_mass_fluxes, FaceScheme, GhostValues,
};

use super::VerifyError;

/// Compactly supported space-time test function `φ(x,t) = ψ(x)θ(t)` with
/// the radial bump `ψ = (1−s²)⁴`, `s = |x−center|/radius` (zero outside
/// the support ball) and the time window `θ = (1−(t/t1)²)⁴` for `t < t1`,
/// zero afterwards. Both factors are C³ across the support boundary, so
/// moderate-order quadrature integrates them accurately.
#[derive(Clone, Copy, Debug)]
pub struct TestFunction {
    pub center: Vec3,
    pub radius: f64,
    /// End of the time window; `θ(t) = 0` for `t ≥ t1`.
    pub t1: f64,
}

impl TestFunction {
    pub fn new(center: Vec3, radius: f64, t1: f64) -> TestFunction {
        TestFunction { center, radius, t1 }
    }

    /// The spatial bump `ψ(x)`.
    pub fn space(&self, x: Vec3) -> f64 {
        let s2 = (x - self.center).norm_sq() / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            (1.0 - s2).powi(4)
        }
    }

    /// Gradient `∇ψ(x) = −8(1−s²)³ (x−center)/radius²`.
    pub fn grad_space(&self, x: Vec3) -> Vec3 {
        let r2 = self.radius * self.radius;
        let d = x - self.center;
        let s2 = d.norm_sq() / r2;
        if s2 >= 1.0 {
            Vec3::ZERO
        } else {
            d * (-8.0 * (1.0 - s2).powi(3) / r2)
        }
    }

    /// The time window `θ(t)`.
    pub fn time(&self, t: f64) -> f64 {
        let tau = t / self.t1;
        if tau >= 1.0 {
            0.0
        } else {
            (1.0 - tau * tau).powi(4)
        }
    }

    /// Derivative `θ'(t) = −8τ(1−τ²)³/t1`, `τ = t/t1`.
    pub fn dtime(&self, t: f64) -> f64 {
        let tau = t / self.t1;
        if tau >= 1.0 {
            0.0
        } else {
            -8.0 * tau * (1.0 - tau * tau).powi(3) / self.t1
        }
    }

    /// `φ(x,t) = ψ(x)θ(t)`.
    pub fn eval(&self, x: Vec3, t: f64) -> f64 {
        self.space(x) * self.time(t)
    }
}

/// Smooth prescribed space-time fields `(ρ, u)` sampled onto the mesh.
#[derive(Clone)]
pub struct FlowFields {
    pub rho: Arc<dyn Fn(Vec3, f64) -> f64 + Send + Sync>,
    pub u: Arc<dyn Fn(Vec3, f64) -> Vec3 + Send + Sync>,
}

impl FlowFields {
    pub fn new(
        rho: impl Fn(Vec3, f64) -> f64 + Send + Sync + 'static,
        u: impl Fn(Vec3, f64) -> Vec3 + Send + Sync + 'static,
    ) -> FlowFields {
        FlowFields { rho: Arc::new(rho), u: Arc::new(u) }
    }

    /// Constant fields; the discrete and continuous weak forms then agree
    /// to round-off.
    pub fn constant(rho: f64, u: Vec3) -> FlowFields {
        FlowFields::new(move |_, _| rho, move |_, _| u)
    }
}

/// One weak-residual evaluation.
#[derive(Clone, Copy, Debug)]
pub struct LwReport {
    /// Largest cell diameter.
    pub h: f64,
    pub dt: f64,
    /// Time levels with an active test window.
    pub steps: usize,
    /// Discrete weak form, one entry per velocity component.
    pub discrete: Vec3,
    /// Continuous weak form by quadrature.
    pub continuous: Vec3,
    /// `discrete − continuous`.
    pub residual: Vec3,
    /// Largest residual component in magnitude.
    pub max_residual: f64,
    /// Heuristic smoothness monitor: test-function-weighted density jumps
    /// across interior primal faces, summed over the active window.
    pub primal_jumps: f64,
    /// Heuristic smoothness monitor: test-function-weighted velocity jumps
    /// across dual edges, summed over the active window.
    pub dual_jumps: f64,
}

/// 5-point Gauss–Legendre rule on [−1, 1] as (node, weight) pairs.
fn gauss5() -> [(f64, f64); 5] {
    let s70 = 70.0f64.sqrt();
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * s70) / 900.0;
    let wb = (322.0 - 13.0 * s70) / 900.0;
    [(0.0, 128.0 / 225.0), (-a, wa), (a, wa), (-b, wb), (b, wb)]
}

/// Composite 5-point Gauss nodes over `[a, b]` with `panels` equal panels.
fn axis_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let rule = gauss5();
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, w) in rule {
            out.push((mid + 0.5 * width * xi, 0.5 * width * w));
        }
    }
    out
}

/// Panels per axis of the continuous-side quadrature. The integrands are
/// C³ with an 8th-degree polynomial core, so this keeps the quadrature
/// error orders of magnitude below any discretization residual of
/// interest, while symmetric node placement around the bump center makes
/// all constant-field integrals cancel to round-off.
const PANELS: usize = 12;

/// Assembles the discrete weak form of the momentum convection operator
/// `C_σ^n = (ρ_{D_σ}^{n+1} u_σ^{n+1} − ρ_{D_σ}^n u_σ^n)/δt +
/// div_σ(ρ^n u_i^n u^n)` over sampled fields,
///
/// `A_i = Σ_n δt Σ_σ |D_σ| C_{i,σ}^n φ_σ^n`,
///
/// with ρ sampled at cell centroids, u at face centroids, upwind primal
/// mass fluxes with zero-gradient ghosts, and `φ_σ^n = ψ(x_σ)θ(t_n)`. It
/// is compared against the continuous weak form
///
/// `B_i = −∫ ρ₀u_{0,i}ψ θ(0) − ∬ (ρu_i ψθ' + ρu_i (u·∇ψ)θ)`,
///
/// computed by composite Gauss quadrature over the support of φ.
///
/// The support ball must stay clear of the domain boundary (so no face
/// with `φ ≠ 0` has a truncated dual stencil) and the time window must
/// close before `t_end`.
pub fn lw_weak_residual(
    mesh: &Mesh,
    fields: &FlowFields,
    phi: &TestFunction,
    t_end: f64,
    dt: f64,
) -> Result<LwReport, VerifyError> {
    for (field, v) in [("dt", dt), ("radius", phi.radius), ("t1", phi.t1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(VerifyError::InvalidState { field, value: v });
        }
    }
    if phi.t1 >= t_end {
        return Err(VerifyError::TestWindowTooLong { t1: phi.t1, t_end });
    }
    let mut clearance = f64::INFINITY;
    for f in mesh.boundary_faces() {
        clearance = clearance
            .min((mesh.face_centroid(f) - phi.center).norm())
            .min((mesh.cell_centroid(mesh.face_owner(f)) - phi.center).norm());
    }
    if clearance < phi.radius {
        return Err(VerifyError::SupportTouchesBoundary {
            distance: clearance,
            radius: phi.radius,
            spacing: mesh.h_max(),
        });
    }

    let n_c = mesh.n_cells();
    let n_f = mesh.n_faces();
    let psi: Vec<f64> = (0..n_f).map(|f| phi.space(mesh.face_centroid(f))).collect();
    let active: Vec<usize> = (0..n_f).filter(|&f| psi[f] != 0.0).collect();
    let sample_rho =
        |t: f64| -> Vec<f64> { (0..n_c).map(|c| (fields.rho)(mesh.cell_centroid(c), t)).collect() };
    let sample_u =
        |t: f64| -> Vec<Vec3> { (0..n_f).map(|f| (fields.u)(mesh.face_centroid(f), t)).collect() };

    let mut rho_n = sample_rho(0.0);
    let mut u_n = sample_u(0.0);
    let mut rho_d_n = dual_density(mesh, &rho_n);
    let mut discrete = Vec3::ZERO;
    let mut primal_jumps = 0.0;
    let mut dual_jumps = 0.0;
    let mut steps = 0usize;
    loop {
        let t_n = steps as f64 * dt;
        let theta = phi.time(t_n);
        if theta == 0.0 {
            break;
        }
        let rho_next = sample_rho((steps + 1) as f64 * dt);
        let u_next = sample_u((steps + 1) as f64 * dt);
        let rho_d_next = dual_density(mesh, &rho_next);

        let ghost = GhostValues::zero_gradient(mesh, &rho_n, &rho_n);
        let flux = primal_mass_fluxes(mesh, FaceScheme::Upwind, &rho_n, &u_n, &ghost, None);
        let conv = momentum_convection(mesh, &flux, FaceScheme::Upwind, &u_n);
        for &f in &active {
            let weight = psi[f] * theta * mesh.dual_volume(f);
            let d_time = u_next[f] * rho_d_next[f] - u_n[f] * rho_d_n[f];
            discrete += (d_time + conv[f] * dt) * weight;
        }

        for f in 0..n_f {
            if let Some(l) = mesh.face_neighbor(f) {
                let jump = (rho_n[mesh.face_owner(f)] - rho_n[l]).abs();
                primal_jumps += dt * theta * psi[f] * mesh.face_area(f) * jump;
            }
        }
        for c in 0..n_c {
            // Cross-section area scale stands in for the (virtual) dual
            // face areas, which the scheme never constructs.
            let scale = mesh.cell_volume(c) / mesh.cell_diameter(c);
            let faces = mesh.cell_faces(c);
            for &(a, b) in mesh.cell_kind(c).dual_edge_template() {
                let (fa, fb) = (faces[a] as usize, faces[b] as usize);
                let w = 0.5 * (psi[fa] + psi[fb]) * theta;
                dual_jumps += dt * w * scale * (u_n[fa] - u_n[fb]).norm();
            }
        }

        rho_n = rho_next;
        u_n = u_next;
        rho_d_n = rho_d_next;
        steps += 1;
    }

    // Continuous side over the support box × the time window; ψ and ∇ψ
    // are fixed per spatial node across the whole time axis.
    let (c, r) = (phi.center, phi.radius);
    let xs = axis_nodes(c.x - r, c.x + r, PANELS);
    let ys = axis_nodes(c.y - r, c.y + r, PANELS);
    let zs = if mesh.dim() == 3 { axis_nodes(c.z - r, c.z + r, PANELS) } else { vec![(c.z, 1.0)] };
    let ts = axis_nodes(0.0, phi.t1, PANELS);
    let theta0 = phi.time(0.0);
    let mut continuous = Vec3::ZERO;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            for &(z, wz) in &zs {
                let pos = Vec3::new(x, y, z);
                let psi_x = phi.space(pos);
                if psi_x == 0.0 {
                    continue;
                }
                let grad = phi.grad_space(pos);
                let wxyz = wx * wy * wz;
                continuous -=
                    (fields.u)(pos, 0.0) * ((fields.rho)(pos, 0.0) * psi_x * theta0 * wxyz);
                for &(t, wt) in &ts {
                    let u = (fields.u)(pos, t);
                    let factor = psi_x * phi.dtime(t) + u.dot(grad) * phi.time(t);
                    continuous -= u * ((fields.rho)(pos, t) * factor * wxyz * wt);
                }
            }
        }
    }

    let residual = discrete - continuous;
    Ok(LwReport {
        h: mesh.h_max(),
        dt,
        steps,
        discrete,
        continuous,
        residual,
        max_residual: residual.x.abs().max(residual.y.abs()).max(residual.z.abs()),
        primal_jumps,
        dual_jumps,
    })
}
