//! Verification instruments: analytic shock references, error norms,
//! convergence-rate bookkeeping, the shock-tube study driver and the
//! weak-consistency (Lax–Wendroff) residual harness.

mod convergence;
mod lw;
mod norms;
mod shock;

pub use convergence::{shock_tube_study, tube_mesh, StudyLevel, StudyParams, StudyResult};
pub use lw::{lw_weak_residual, FlowFields, LwReport, TestFunction};
pub use norms::{convergence_rates, error_norms, ErrorNorm, ErrorReport, Orders};
pub use shock::{
    incident_shock_velocity, mach10_column_setup, post_shock_state, reflected_shock,
    rh_residual, ColumnSetup, ShockSetup,
};

use thiserror::Error;

/// Errors of the verification layer.
#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("post-shock state requires a supersonic Mach number, got M = {0}")]
    SubsonicMach(f64),
    #[error("invalid reference state: {field} = {value}")]
    InvalidState { field: &'static str, value: f64 },
    #[error("reflected-shock speed must be positive, got {0}")]
    NonpositiveReflectedSpeed(f64),
    #[error("time {t} is outside the solved range [0, {t_max}]")]
    TimeOutOfRange { t: f64, t_max: f64 },
    #[error(
        "test-function support (center distance {distance} < radius {radius} + spacing \
         {spacing}) touches the domain boundary"
    )]
    SupportTouchesBoundary { distance: f64, radius: f64, spacing: f64 },
    #[error("test function must vanish before the final time: t1 = {t1} >= t_end = {t_end}")]
    TestWindowTooLong { t1: f64, t_end: f64 },
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
}
