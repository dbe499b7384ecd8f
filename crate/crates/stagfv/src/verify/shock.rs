//! Analytic normal-shock references: post-shock states from the jump
//! conditions, shock reflection off a wall, and the piecewise-constant
//! space-time solution of the shock-reflection tube.

use crate::geom::Vec3;
use crate::solver::{BoundaryCondition, BoundarySet, InitialData, UniformState};

use super::VerifyError;

fn check_state(s: &UniformState) -> Result<(), VerifyError> {
    for (field, v) in [("rho", s.rho), ("p", s.p)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(VerifyError::InvalidState { field, value: v });
        }
    }
    Ok(())
}

/// State behind a normal shock of Mach number `M > 1` running along `−x`
/// into the fluid `left`:
///
/// `u_R = u_L + 2c(1−M²)/(M(1+γ))`,
/// `ρ_R = ρ_L · M²(1+γ)/(M²(γ−1)+2)`,
/// `p_R = p_L · (2γM²+1−γ)/(1+γ)`,
///
/// with `c = sqrt(γ p_L/ρ_L)` the upstream sound speed. Tangential
/// velocity components carry through unchanged.
pub fn post_shock_state(
    gamma: f64,
    mach: f64,
    left: UniformState,
) -> Result<UniformState, VerifyError> {
    if !(mach > 1.0) {
        return Err(VerifyError::SubsonicMach(mach));
    }
    check_state(&left)?;
    let c = left.sound_speed(gamma);
    let m2 = mach * mach;
    let u_r = left.u.x + 2.0 * c * (1.0 - m2) / (mach * (1.0 + gamma));
    let rho_r = left.rho * m2 * (1.0 + gamma) / (m2 * (gamma - 1.0) + 2.0);
    let p_r = left.p * (2.0 * gamma * m2 + 1.0 - gamma) / (1.0 + gamma);
    Ok(UniformState::new(rho_r, Vec3::new(u_r, left.u.y, left.u.z), p_r))
}

/// Signed x-velocity of the shock of [`post_shock_state`]: `u_L − M·c`,
/// i.e. toward `−x` when the upstream fluid is at rest.
pub fn incident_shock_velocity(gamma: f64, mach: f64, left: &UniformState) -> f64 {
    left.u.x - mach * left.sound_speed(gamma)
}

/// Shock reflection off a wall at rest: given the incoming stream `R1`
/// (with `u_{R1} ≤ 0` toward the wall), returns the reflected-shock speed
///
/// `ω₂ = u_{R1}(3−γ)/4 + ½ sqrt((u_{R1}(γ+1))²/4 + 4γ p_{R1}/ρ_{R1})`
///
/// and the post-reflection state `L2`:
/// `ρ_{L2} = ρ_{R1}(ω₂ − u_{R1})/ω₂`, `p_{L2} = ρ_{R1} u_{R1}(u_{R1} − ω₂)
/// + p_{R1}`, `u_{L2} = 0`. With `u_{R1} = 0` this degenerates to
/// `ω₂ = c` and `L2 = R1`.
pub fn reflected_shock(
    gamma: f64,
    r1: &UniformState,
) -> Result<(f64, UniformState), VerifyError> {
    check_state(r1)?;
    let u1 = r1.u.x;
    let omega2 = u1 * (3.0 - gamma) / 4.0
        + 0.5 * ((u1 * (gamma + 1.0)).powi(2) / 4.0 + 4.0 * gamma * r1.p / r1.rho).sqrt();
    if !(omega2 > 0.0) {
        return Err(VerifyError::NonpositiveReflectedSpeed(omega2));
    }
    let rho_l2 = r1.rho * (omega2 - u1) / omega2;
    let p_l2 = r1.rho * u1 * (u1 - omega2) + r1.p;
    Ok((omega2, UniformState::new(rho_l2, Vec3::ZERO, p_l2)))
}

/// Largest relative Rankine–Hugoniot residual (mass, momentum, energy)
/// across a discontinuity between `left` and `right` moving with signed
/// x-velocity `s`. Zero (to round-off) exactly when the pair is a valid
/// shock or contact of the ideal-gas Euler system.
pub fn rh_residual(gamma: f64, left: &UniformState, right: &UniformState, s: f64) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let (vl, vr) = (left.u.x - s, right.u.x - s);
    let mass = rel(left.rho * vl, right.rho * vr);
    let momentum = rel(left.rho * vl * vl + left.p, right.rho * vr * vr + right.p);
    // Total specific enthalpy in the shock frame, h + v²/2 with
    // h = γ/(γ−1) · p/ρ; continuous when the mass flux is nonzero.
    let enthalpy = |st: &UniformState, v: f64| {
        gamma / (gamma - 1.0) * st.p / st.rho + 0.5 * v * v
    };
    let energy = rel(enthalpy(left, vl), enthalpy(right, vr));
    mass.max(momentum).max(energy)
}

/// The shock-reflection tube reference: a shock of Mach number `M` runs
/// from `x = 2` toward the wall at `x = 0`, reflects at `t_sym = 2/ω`, and
/// the reflected shock travels back through the incoming stream, reaching
/// `x = 5` at `t_max`.
#[derive(Clone, Debug)]
pub struct ShockSetup {
    pub gamma: f64,
    pub mach: f64,
    /// Undisturbed state `L1` ahead of the incident shock (at rest).
    pub left: UniformState,
    /// Post-shock stream `R1` moving toward the wall.
    pub right: UniformState,
    /// Twice-shocked state `L2` behind the reflected shock (at rest).
    pub reflected: UniformState,
    /// Incident shock speed `ω = M·c_{L1}` (moving toward `−x`).
    pub omega: f64,
    /// Reflected shock speed `ω₂` (moving toward `+x`).
    pub omega2: f64,
    /// Wall-impact time `2/ω`.
    pub t_sym: f64,
    /// Time when the reflected shock exits at `x = 5`: `5/ω₂ + t_sym`.
    pub t_max: f64,
}

impl ShockSetup {
    /// Builds the full reference from the undisturbed state; both shocks
    /// are validated against the jump conditions to `1e-10`.
    pub fn new(gamma: f64, mach: f64, left: UniformState) -> Result<ShockSetup, VerifyError> {
        if left.u != Vec3::ZERO {
            return Err(VerifyError::InvalidState { field: "|u|", value: left.u.norm() });
        }
        let right = post_shock_state(gamma, mach, left)?;
        let omega = mach * left.sound_speed(gamma);
        let (omega2, reflected) = reflected_shock(gamma, &right)?;
        let r1 = rh_residual(gamma, &left, &right, -omega);
        let r2 = rh_residual(gamma, &reflected, &right, omega2);
        assert!(
            r1 <= 1e-10 && r2 <= 1e-10,
            "jump-condition residuals too large: incident {r1:.3e}, reflected {r2:.3e}"
        );
        Ok(ShockSetup {
            gamma,
            mach,
            left,
            right,
            reflected,
            omega,
            omega2,
            t_sym: 2.0 / omega,
            t_max: 5.0 / omega2 + 2.0 / omega,
        })
    }

    /// The tube test preset: `γ = 1.4`, `M = 2`, air-like undisturbed state
    /// `(ρ, u, p) = (1.292, 0, 10⁵)`.
    pub fn preset() -> ShockSetup {
        ShockSetup::new(1.4, 2.0, UniformState::new(1.292, Vec3::ZERO, 1e5))
            .expect("the preset reference is well-posed")
    }

    /// Stabilization viscosity used by the tube runs, `ν = |u_{R1} ρ_{R1}|/50`.
    pub fn nu(&self) -> f64 {
        (self.right.u.x * self.right.rho).abs() / 50.0
    }

    /// The exact piecewise-constant solution at position `x`, time `t`:
    /// a single jump at `x = 2 − ωt` before the wall impact and at
    /// `x = ω₂(t − t_sym)` after it.
    pub fn exact_solution(&self, x: f64, t: f64) -> Result<UniformState, VerifyError> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(VerifyError::TimeOutOfRange { t, t_max: self.t_max });
        }
        Ok(if t < self.t_sym {
            if x < 2.0 - self.omega * t {
                self.left
            } else {
                self.right
            }
        } else if x < self.omega2 * (t - self.t_sym) {
            self.reflected
        } else {
            self.right
        })
    }

    /// Boundary conditions of the tube run: reflexive wall on `left`,
    /// the incoming stream imposed on `right`, slip on `lateral`.
    pub fn boundary_conditions(&self) -> BoundarySet {
        let mut bcs = BoundarySet::new();
        bcs.set("left", BoundaryCondition::ReflexiveWall);
        bcs.set(
            "right",
            BoundaryCondition::Dirichlet {
                rho: self.right.rho,
                u: self.right.u,
                p: self.right.p,
            },
        );
        bcs.set("lateral", BoundaryCondition::SlipWall);
        bcs
    }

    /// Initial data of the tube run: `L1` below `x = 2`, `R1` above.
    pub fn initial_data(&self) -> InitialData {
        InitialData::piecewise_x(2.0, self.left, self.right)
    }
}

/// The Mach-10 column reference: a planar Mach-10 shock enters the box
/// `[0,0.4]×[0,0.41]×[0,0.4]` from the left and hits a circular column of
/// radius 0.1 standing at (0.2, 0.2).
#[derive(Clone, Debug)]
pub struct ColumnSetup {
    pub gamma: f64,
    pub mach: f64,
    /// Planar shock speed (toward `+x`).
    pub shock_speed: f64,
    /// Post-shock stream imposed at the inflow: `(8, (8.25,0,0), 116.5)`.
    pub inflow: UniformState,
    /// Undisturbed fluid filling the box at `t = 0`: `(1.4, 0, 1)`.
    pub rest: UniformState,
}

/// Builds the Mach-10 column reference (`γ = 1.4`; the rest-state sound
/// speed is exactly 1, so the shock speed 10 gives Mach 10).
pub fn mach10_column_setup() -> ColumnSetup {
    let gamma = 1.4;
    let rest = UniformState::new(1.4, Vec3::ZERO, 1.0);
    let mach = 10.0;
    let post = post_shock_state(gamma, mach, rest).expect("M = 10 is supersonic");
    // Mirror the stream: here the shock runs toward +x.
    let inflow = UniformState::new(post.rho, Vec3::new(-post.u.x, 0.0, 0.0), post.p);
    ColumnSetup {
        gamma,
        mach,
        shock_speed: mach * rest.sound_speed(gamma),
        inflow,
        rest,
    }
}

impl ColumnSetup {
    /// Boundary conditions keyed to the column-mesh tags: supersonic
    /// Dirichlet inflow, outlet on the right, slip everywhere else
    /// (including the column itself).
    pub fn boundary_conditions(&self) -> BoundarySet {
        let mut bcs = BoundarySet::new();
        bcs.set(
            "inflow",
            BoundaryCondition::Dirichlet {
                rho: self.inflow.rho,
                u: self.inflow.u,
                p: self.inflow.p,
            },
        );
        bcs.set("outflow", BoundaryCondition::Outlet);
        bcs.set("wall", BoundaryCondition::SlipWall);
        bcs
    }

    /// Initial data: the whole box at rest; the shock enters through the
    /// inflow plane at `t = 0`.
    pub fn initial_data(&self) -> InitialData {
        InitialData::uniform(self.rest)
    }

    /// The unperturbed planar-shock profile: post-shock stream behind
    /// `x = ω t`, undisturbed fluid ahead.
    pub fn planar_profile(&self, x: f64, t: f64) -> UniformState {
        if x < self.shock_speed * t {
            self.inflow
        } else {
            self.rest
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn post_shock_examples() {
        let gamma = 1.4;
        // Mach 10 into (ρ, p) = (1.4, 1): the classic strong-shock state.
        let rest = UniformState::new(1.4, Vec3::ZERO, 1.0);
        let r = post_shock_state(gamma, 10.0, rest).unwrap();
        assert_relative_eq!(r.rho / rest.rho, 40.0 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(r.p, 116.5, max_relative = 1e-14);
        assert_relative_eq!(r.u.x.abs(), 8.25, max_relative = 1e-14);
        let s = incident_shock_velocity(gamma, 10.0, &rest);
        assert_relative_eq!(s, -10.0, max_relative = 1e-14);
        assert!(rh_residual(gamma, &rest, &r, s) <= 1e-13);

        // Mach 10 into atmospheric-like air.
        let air = UniformState::new(1.292, Vec3::ZERO, 1e5);
        let r = post_shock_state(gamma, 10.0, air).unwrap();
        assert_relative_eq!(r.rho, 7.383, max_relative = 1e-3);
        assert_relative_eq!(r.p, 1.165e7, max_relative = 1e-3);
        assert!(rh_residual(gamma, &air, &r, incident_shock_velocity(gamma, 10.0, &air)) <= 1e-13);

        // M → 1⁺ degenerates to the upstream state.
        let r = post_shock_state(gamma, 1.0 + 1e-9, air).unwrap();
        assert_relative_eq!(r.rho, air.rho, max_relative = 1e-8);
        assert_relative_eq!(r.p, air.p, max_relative = 1e-8);
        assert!(r.u.norm() <= 1e-3);

        // Subsonic Mach numbers are rejected.
        assert!(matches!(
            post_shock_state(gamma, 1.0, air),
            Err(VerifyError::SubsonicMach(_))
        ));
        assert!(matches!(
            post_shock_state(gamma, 0.5, air),
            Err(VerifyError::SubsonicMach(_))
        ));
    }

    #[test]
    fn reflected_shock_examples() {
        let gamma = 1.4;
        // No incoming stream: nothing reflects.
        let calm = UniformState::new(2.0, Vec3::ZERO, 5.0);
        let (omega2, l2) = reflected_shock(gamma, &calm).unwrap();
        assert_relative_eq!(omega2, calm.sound_speed(gamma), max_relative = 1e-14);
        assert_eq!(l2, calm);

        // An incoming stream reflects into a stronger, slower shock.
        let setup = ShockSetup::preset();
        assert!(setup.reflected.p > setup.right.p);
        assert_eq!(setup.reflected.u, Vec3::ZERO);
        assert!(
            rh_residual(gamma, &setup.reflected, &setup.right, setup.omega2) <= 1e-12
        );
    }

    #[test]
    fn preset_reference_values() {
        let s = ShockSetup::preset();
        assert_relative_eq!(s.right.rho, 3.445333, max_relative = 1e-6);
        assert_relative_eq!(s.right.u.x, -411.4744, max_relative = 1e-6);
        assert_relative_eq!(s.right.p, 4.5e5, max_relative = 1e-12);
        assert_relative_eq!(s.omega2, 329.1795, max_relative = 1e-6);
        assert_relative_eq!(s.reflected.rho, 7.752, max_relative = 1e-3);
        assert_relative_eq!(s.reflected.p, 1.5e6, max_relative = 1e-3);
        assert_relative_eq!(s.t_sym, 3.038e-3, max_relative = 1e-3);
        assert_relative_eq!(s.t_max, 0.0182, max_relative = 1e-2);
        assert_relative_eq!(s.nu(), 28.352, max_relative = 1e-3);
        // The tube runs stop before the reflected shock leaves the domain.
        assert!(0.015 < s.t_max);
    }

    #[test]
    fn exact_solution_is_a_single_moving_jump() {
        let s = ShockSetup::preset();
        // t = 0: undisturbed below x = 2, the stream above.
        assert_eq!(s.exact_solution(1.9, 0.0).unwrap(), s.left);
        assert_eq!(s.exact_solution(2.0, 0.0).unwrap(), s.right);
        // Wall impact: the jump sits at x = 0.
        assert_eq!(s.exact_solution(1e-9, s.t_sym).unwrap(), s.right);
        // Afterwards the reflected shock walks right at ω₂.
        let t = 0.015;
        let xs = s.omega2 * (t - s.t_sym);
        assert!(xs > 3.9 && xs < 3.95, "{xs}");
        assert_eq!(s.exact_solution(xs - 0.01, t).unwrap(), s.reflected);
        assert_eq!(s.exact_solution(xs + 0.01, t).unwrap(), s.right);
        // It exits at x = 5 exactly at t_max.
        assert_eq!(s.exact_solution(4.999, s.t_max).unwrap(), s.reflected);
        assert!(matches!(
            s.exact_solution(1.0, s.t_max + 1e-6),
            Err(VerifyError::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            s.exact_solution(1.0, -1e-9),
            Err(VerifyError::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn random_states_satisfy_the_jump_conditions() {
        let gamma = 1.4;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let left = UniformState::new(
                rng.gen_range(0.1..10.0),
                Vec3::ZERO,
                rng.gen_range(0.1..1e6),
            );
            let mach = rng.gen_range(1.5..20.0);
            let right = post_shock_state(gamma, mach, left).unwrap();
            let s = incident_shock_velocity(gamma, mach, &left);
            assert!(rh_residual(gamma, &left, &right, s) <= 1e-10);
            let (omega2, l2) = reflected_shock(gamma, &right).unwrap();
            assert!(rh_residual(gamma, &l2, &right, omega2) <= 1e-10);
        }
    }

    #[test]
    fn column_setup_matches_the_planar_reference() {
        let c = mach10_column_setup();
        // Rest-state sound speed is exactly 1, hence Mach = ω/c = 10.
        assert_eq!(c.rest.sound_speed(c.gamma), 1.0);
        assert_eq!(c.shock_speed, 10.0);
        assert_relative_eq!(c.inflow.rho, 8.0, max_relative = 1e-14);
        assert_relative_eq!(c.inflow.u.x, 8.25, max_relative = 1e-14);
        assert_relative_eq!(c.inflow.p, 116.5, max_relative = 1e-14);
        assert!(rh_residual(c.gamma, &c.inflow, &c.rest, c.shock_speed) <= 1e-10);
        // The planar profile puts the shock at x = ωt.
        let t = 0.026;
        assert_eq!(c.planar_profile(0.259, t), c.inflow);
        assert_eq!(c.planar_profile(0.261, t), c.rest);
    }
}
