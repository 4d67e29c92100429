//! Numerical laboratory for fractional reaction-diffusion dynamics.
//!
//! The crate simulates `du/dt + (-Laplacian)^s u = f(t, u)` on cell-centered
//! lattices (unit ball with zero complement data, or a truncated whole
//! space), and provides the diagnostics built on top of it: discrete
//! comparison-principle checks, omega-limit extraction, moving-plane symmetry
//! detection, and barrier/subsolution verifications.

pub mod barriers;
pub mod error;
pub mod evolve;
pub mod field;
pub mod fraclap;
pub mod grid;
pub mod movplane;
pub mod omega;
mod quad;

pub use barriers::{
    boundary_sub_check, global_lower_bound_check, manufactured_barrier_lab,
    manufactured_strongmax_inputs, psi_sub_build, residual_L_lambda, step_field,
    strongmax_sub_build, zeta_build, BarrierLab, BarrierSpec, BoundReport, BoundaryReport,
    CutoffPair, PsiReport, RegionSpec, ResidualReport, StrongmaxReport,
};
pub use error::{DiagnosticError, EvolveError, GridError, KernelError};
pub use evolve::{evolve, ode_xi, stable_dt, step_explicit, Nonlinearity, OdeXiReport, Trajectory};
pub use field::{ExteriorSpec, Field};
pub use fraclap::{
    antisymmetric_bump_eval, antisymmetrize_about_origin, build_kernel, modification_sign_check,
    step_constant, step_oracle, FracOrder, KernelMatrix, SignCheckReport,
};
pub use grid::{radial_profile, Grid, PlaneReflection, RadialBin};
pub use movplane::{
    find_lambda0, hopf_derivative, peak_node, principle_check, psi_min_profile, randomized_setup,
    reflection_deviation, symmetry_report, violated_setup, w_lambda, AntisymField, HopfReport,
    Lambda0Result,
    PrincipleId, PrincipleReport, PrincipleSetup, Side, SymmetryReport, SymmetryTols, Verdict,
};
pub use omega::{liminf_check, omega_limit, LiminfReport, OmegaEstimate, OmegaStatus};

/// Outcome of a single verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check's hypothesis does not hold, so the conclusion is not
    /// claimed either way.
    NotApplicable,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "PASS"),
            CheckStatus::Fail => write!(f, "FAIL"),
            CheckStatus::NotApplicable => write!(f, "NOT-APPLICABLE"),
        }
    }
}
