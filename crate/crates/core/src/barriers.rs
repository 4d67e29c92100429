//! Explicit sub/supersolution constructions and numerical verification of
//! their defining inequalities.
//!
//! The central object is the decaying barrier
//! `zeta(x,t) = e^{-theta (t - t_n)} (w_tilde(x) - tau h(x))` built from an
//! antisymmetrized profile and the two-level step `h`. Around it sit the
//! normalized subsolution `Psi = q zeta / gamma_n`, a global exponential
//! lower-bound check, and two cutoff-based subsolutions (an interior one and
//! a boundary one) whose differential inequalities are verified pointwise on
//! lattice data.
//!
//! Every named constant (tau, q, gamma_n, c0, a0, eps_n, m, rho1) is measured
//! from the configuration at hand by [`manufactured_barrier_lab`]; nothing is
//! assumed.

use std::sync::Arc;

use crate::error::DiagnosticError;
use crate::field::{ExteriorSpec, Field};
use crate::fraclap::{
    antisymmetric_bump_eval, antisymmetrize_about_origin, build_kernel, FracOrder, KernelMatrix,
};
use crate::grid::{Grid, PlaneReflection};
use crate::CheckStatus;

/// Nodes with `x1 > min_x1` and `|x| < max_radius`.
#[derive(Debug, Clone, Copy)]
pub struct RegionSpec {
    pub min_x1: f64,
    pub max_radius: f64,
}

impl RegionSpec {
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.num_nodes())
            .map(|i| grid.node(i)[0] > self.min_x1 && grid.node_norm(i) < self.max_radius)
            .collect()
    }
}

/// Parameters of the barrier construction, all in the coordinates where the
/// critical plane sits at the origin.
#[derive(Debug, Clone)]
pub struct BarrierSpec {
    /// Offset of the auxiliary plane the profile was antisymmetrized from.
    pub mu: f64,
    /// Step amplitude subtracted inside the barrier.
    pub tau: f64,
    /// Barrier decay rate; must satisfy `0 < theta < sigma`.
    pub theta: f64,
    /// Coefficient decay hypothesis: `c < -sigma` outside `B_rho1`.
    pub sigma: f64,
    /// Anchor time of the verification window.
    pub t_n: f64,
    /// Offset of the working region's inner boundary past `mu`.
    pub delta0: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Lower bound of the trajectory on the working region at `t_n`.
    pub q: f64,
    /// Exponential tilt making the shifted coefficient negative.
    pub m: f64,
    /// Amplitude of the admissible negative dip of the trajectory.
    pub eps_n: f64,
    /// Lower bound for `w_tilde - tau` on the compact core.
    pub a0: f64,
    /// Measured minimum of the profile on the compact core.
    pub c0: f64,
    /// Normalizer `sup_D |zeta(., t_n)|`.
    pub gamma_n: f64,
    /// Working region `D`.
    pub d: RegionSpec,
    /// Compact core `D0` strictly inside `D`.
    pub d0: RegionSpec,
}

impl BarrierSpec {
    pub fn validate(&self) -> Result<(), DiagnosticError> {
        let bad = |msg: &str| Err(DiagnosticError::BadBarrierSpec(msg.to_string()));
        if !(self.theta > 0.0 && self.theta < self.sigma) {
            return bad("decay rate must satisfy 0 < theta < sigma");
        }
        if self.rho2 <= self.rho1 || self.rho1 <= 0.0 {
            return bad("radii must satisfy 0 < rho1 < rho2");
        }
        if self.tau <= 0.0 {
            return bad("step amplitude tau must be positive");
        }
        if self.q <= 0.0 {
            return bad("lower bound q must be positive");
        }
        if self.c0 - self.tau < self.a0 {
            return bad("core bound violated: c0 - tau < a0");
        }
        Ok(())
    }
}

/// Smooth space/time cutoffs with exact plateau and support, built from the
/// classical exponential partition ramp.
#[derive(Debug, Clone, Copy)]
pub struct CutoffPair {
    pub center: [f64; 2],
    /// Spatial support radius; plateau radius is `delta / 2`.
    pub delta: f64,
    /// Temporal half-support around `t = 1`; half-plateau is `eps_o / 2`.
    pub eps_o: f64,
}

fn smooth_ramp(u: f64) -> f64 {
    // 0 at u <= 0, 1 at u >= 1, C-infinity in between
    let f = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let a = f(u);
    let b = f(1.0 - u);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

impl CutoffPair {
    /// Spatial cutoff: 1 on the closed ball of radius `delta/2`, 0 outside
    /// radius `delta`.
    pub fn zeta_x(&self, x: [f64; 2]) -> f64 {
        let r = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)).sqrt();
        if r <= self.delta / 2.0 {
            1.0
        } else if r >= self.delta {
            0.0
        } else {
            smooth_ramp((self.delta - r) / (self.delta / 2.0))
        }
    }

    /// Temporal cutoff: 1 on `[1 - eps_o/2, 1 + eps_o/2]`, 0 outside
    /// `[1 - eps_o, 1 + eps_o]`.
    pub fn eta_t(&self, t: f64) -> f64 {
        let d = (t - 1.0).abs();
        if d <= self.eps_o / 2.0 {
            1.0
        } else if d >= self.eps_o {
            0.0
        } else {
            smooth_ramp((self.eps_o - d) / (self.eps_o / 2.0))
        }
    }
}

/// The two-level step about the origin plane: `+1` for `x1 >= 0`, `-1` below.
pub fn step_field(grid: &Arc<Grid>) -> Field {
    Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
        if p[0] >= 0.0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Builds the decaying barrier from snapshots of a profile antisymmetric
/// about the offset plane: each snapshot is antisymmetrized about the origin,
/// shifted by the step, and scaled by the exponential factor.
pub fn zeta_build(
    w_mu_snaps: &[(f64, Field)],
    spec: &BarrierSpec,
) -> Result<Vec<(f64, Field)>, DiagnosticError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(w_mu_snaps.len());
    for (t, w) in w_mu_snaps {
        let wt = antisymmetrize_about_origin(w, spec.mu)?;
        let h = step_field(&wt.grid);
        let e = (-spec.theta * (t - spec.t_n)).exp();
        let values = wt
            .values
            .iter()
            .zip(&h.values)
            .map(|(a, s)| e * (a - spec.tau * s))
            .collect();
        out.push((
            *t,
            Field {
                grid: wt.grid.clone(),
                values,
                ext: wt.ext,
            },
        ));
    }
    Ok(out)
}

fn centered_dt(snaps: &[(f64, Field)], k: usize, idx: usize) -> f64 {
    let n = snaps.len();
    let (lo, hi) = if k == 0 {
        (0, 1)
    } else if k == n - 1 {
        (n - 2, n - 1)
    } else {
        (k - 1, k + 1)
    };
    (snaps[hi].1.values[idx] - snaps[lo].1.values[idx]) / (snaps[hi].0 - snaps[lo].0)
}

/// Result of [`residual_L_lambda`].
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub status: CheckStatus,
    pub max_residual: f64,
    /// Largest residual restricted to `D` outside `B_rho1` — where a wrong
    /// decay rate (`theta > sigma`) first shows up.
    pub max_outside_rho1: f64,
    pub scale: f64,
    pub tol: f64,
}

/// Evaluates `dzeta/dt + Op zeta - c zeta` over the working region and the
/// whole snapshot window; time derivative by centered differences.
#[allow(non_snake_case)]
pub fn residual_L_lambda(
    zeta: &[(f64, Field)],
    c_lambda: &Field,
    kernel: &KernelMatrix,
    spec: &BarrierSpec,
) -> Result<ResidualReport, DiagnosticError> {
    spec.validate()?;
    if zeta.len() < 2 {
        return Err(DiagnosticError::Evolve(
            crate::error::EvolveError::TooFewSnapshots {
                need: 2,
                got: zeta.len(),
            },
        ));
    }
    let grid = kernel.grid();
    let mask = spec.d.mask(grid);
    if !mask.iter().any(|&b| b) {
        return Err(DiagnosticError::EmptyRegion);
    }
    let mut scale = 0.0f64;
    let mut max_residual = f64::NEG_INFINITY;
    let mut max_outside = f64::NEG_INFINITY;
    for (k, (_, z)) in zeta.iter().enumerate() {
        let op = kernel.apply(z)?;
        for idx in 0..grid.num_nodes() {
            if !mask[idx] {
                continue;
            }
            scale = scale.max(z.values[idx].abs());
            let r = centered_dt(zeta, k, idx) + op.values[idx]
                - c_lambda.values[idx] * z.values[idx];
            max_residual = max_residual.max(r);
            if grid.node_norm(idx) > spec.rho1 {
                max_outside = max_outside.max(r);
            }
        }
    }
    let tol = 1e-3 * scale;
    Ok(ResidualReport {
        status: if max_residual <= tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        max_residual,
        max_outside_rho1: max_outside,
        scale,
        tol,
    })
}

/// Result of [`psi_sub_build`].
#[derive(Debug, Clone)]
pub struct PsiReport {
    pub status: CheckStatus,
    pub psi: Vec<(f64, Field)>,
    pub gamma_n: f64,
    /// `min over D of (w - Psi)` at the anchor time.
    pub initial_margin: f64,
    /// `min over (right side minus D) x window of (w - Psi)`.
    pub exterior_margin: f64,
    /// Exterior certificate: `max Psi + e^{-theta dt} (q/gamma)(tau/2)` over
    /// the exterior region; nonpositive when the two-part bound holds.
    pub certificate_excess: f64,
}

/// Normalized subsolution `Psi = q zeta / gamma_n` with the initial
/// comparison on `D` and the exterior comparison on the rest of the right
/// half, gated on `w > q` on `D` at `t_n` and on
/// `eps_n < (q / gamma_n)(tau / 2)`.
pub fn psi_sub_build(
    zeta: &[(f64, Field)],
    w_traj: &[(f64, Field)],
    spec: &BarrierSpec,
) -> Result<PsiReport, DiagnosticError> {
    spec.validate()?;
    let grid = &zeta[0].1.grid;
    let mask = spec.d.mask(grid);
    if !mask.iter().any(|&b| b) {
        return Err(DiagnosticError::EmptyRegion);
    }
    let gamma_n = (0..grid.num_nodes())
        .filter(|&i| mask[i])
        .map(|i| zeta[0].1.values[i].abs())
        .fold(0.0f64, f64::max);
    if gamma_n == 0.0 {
        return Err(DiagnosticError::ZeroNormalizer);
    }
    let psi: Vec<(f64, Field)> = zeta
        .iter()
        .map(|(t, z)| {
            let values = z.values.iter().map(|v| spec.q * v / gamma_n).collect();
            (
                *t,
                Field {
                    grid: z.grid.clone(),
                    values,
                    ext: z.ext,
                },
            )
        })
        .collect();

    let na = |psi: Vec<(f64, Field)>, gamma_n: f64| PsiReport {
        status: CheckStatus::NotApplicable,
        psi,
        gamma_n,
        initial_margin: f64::NAN,
        exterior_margin: f64::NAN,
        certificate_excess: f64::NAN,
    };
    // hypothesis gates
    let min_d_w0 = (0..grid.num_nodes())
        .filter(|&i| mask[i])
        .map(|i| w_traj[0].1.values[i])
        .fold(f64::INFINITY, f64::min);
    if min_d_w0 <= spec.q {
        return Ok(na(psi, gamma_n));
    }
    if spec.eps_n >= (spec.q / gamma_n) * (spec.tau / 2.0) {
        return Ok(na(psi, gamma_n));
    }

    let tol_mp = 1e-10 * w_traj[0].1.sup_norm().max(1.0);
    let mut initial_margin = f64::INFINITY;
    for idx in 0..grid.num_nodes() {
        if mask[idx] {
            initial_margin = initial_margin.min(w_traj[0].1.values[idx] - psi[0].1.values[idx]);
        }
    }
    let mut exterior_margin = f64::INFINITY;
    let mut certificate_excess = f64::NEG_INFINITY;
    for (k, (t, w)) in w_traj.iter().enumerate() {
        let e = (-spec.theta * (t - spec.t_n)).exp();
        let floor = -e * (spec.q / gamma_n) * (spec.tau / 2.0);
        for idx in 0..grid.num_nodes() {
            if grid.node(idx)[0] > 0.0 && !mask[idx] {
                exterior_margin = exterior_margin.min(w.values[idx] - psi[k].1.values[idx]);
                certificate_excess = certificate_excess.max(psi[k].1.values[idx] - floor);
            }
        }
    }
    let status = if initial_margin >= -tol_mp && exterior_margin >= -tol_mp {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(PsiReport {
        status,
        psi,
        gamma_n,
        initial_margin,
        exterior_margin,
        certificate_excess,
    })
}

/// Result of [`global_lower_bound_check`].
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub status: CheckStatus,
    /// `min(0, inf over the right side of w(., t_n))`.
    pub base: f64,
    /// Worst margin of `w - base * e^{-theta (t - t_n)}` over the window.
    pub min_margin: f64,
}

/// Verifies `w >= e^{-theta (t - t_n)} min(0, inf w(., t_n))` nodewise on the
/// right half over the whole window.
pub fn global_lower_bound_check(w_traj: &[(f64, Field)], spec: &BarrierSpec) -> BoundReport {
    let grid = &w_traj[0].1.grid;
    let right: Vec<usize> = (0..grid.num_nodes())
        .filter(|&i| grid.node(i)[0] > 0.0)
        .collect();
    let inf0 = right
        .iter()
        .map(|&i| w_traj[0].1.values[i])
        .fold(f64::INFINITY, f64::min);
    let base = inf0.min(0.0);
    let tol_mp = 1e-10 * w_traj[0].1.sup_norm().max(1.0);
    let mut min_margin = f64::INFINITY;
    for (t, w) in w_traj {
        let bound = base * (-spec.theta * (t - spec.t_n)).exp();
        for &i in &right {
            min_margin = min_margin.min(w.values[i] - bound);
        }
    }
    BoundReport {
        status: if min_margin >= -tol_mp {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        base,
        min_margin,
    }
}

/// Result of [`strongmax_sub_build`].
#[derive(Debug, Clone)]
pub struct StrongmaxReport {
    pub status: CheckStatus,
    /// Largest amplitude for which the differential inequality holds,
    /// found by bisection from 1.
    pub eps_star: f64,
    /// Measured floor of the trajectory on the coupling region.
    pub c0: f64,
    /// Lower bound concluded at the cutoff center at `t = 1`.
    pub concluded_bound: f64,
    /// Worst comparison margin `min (ubar - underline)` over the window.
    pub comparison_margin: f64,
}

fn window_indices(snaps: &[(f64, Field)], eps_o: f64) -> Vec<usize> {
    snaps
        .iter()
        .enumerate()
        .filter(|(_, (t, _))| (t - 1.0).abs() <= eps_o + 1e-12)
        .map(|(k, _)| k)
        .collect()
}

/// Interior cutoff subsolution `chi_D ubar + eps zeta_x(x) eta(t)`: verifies
/// the differential inequality on the cutoff ball by bisection over the
/// amplitude, the comparison with the trajectory, and the concluded positive
/// lower bound at the cutoff center.
pub fn strongmax_sub_build(
    ubar: &[(f64, Field)],
    d_mask: &[bool],
    xbar: [f64; 2],
    delta: f64,
    m: f64,
    cut: &CutoffPair,
    kernel: &KernelMatrix,
) -> Result<StrongmaxReport, DiagnosticError> {
    let grid = kernel.grid();
    if !d_mask.iter().any(|&b| b) {
        return Err(DiagnosticError::EmptyRegion);
    }
    let in_ball = |i: usize| {
        let p = grid.node(i);
        ((p[0] - xbar[0]).powi(2) + (p[1] - xbar[1]).powi(2)).sqrt() < delta
    };
    for i in 0..grid.num_nodes() {
        if d_mask[i] && in_ball(i) {
            return Err(DiagnosticError::BadBarrierSpec(
                "cutoff ball intersects the coupling region".into(),
            ));
        }
    }
    let window = window_indices(ubar, cut.eps_o);
    if window.len() < 3 {
        return Err(DiagnosticError::Evolve(
            crate::error::EvolveError::TooFewSnapshots {
                need: 3,
                got: window.len(),
            },
        ));
    }
    // trajectory floor on the coupling region over the window
    let mut c0 = f64::INFINITY;
    for &k in &window {
        for i in 0..grid.num_nodes() {
            if d_mask[i] {
                c0 = c0.min(ubar[k].1.values[i]);
            }
        }
    }
    if c0 <= 0.0 {
        return Ok(StrongmaxReport {
            status: CheckStatus::NotApplicable,
            eps_star: 0.0,
            c0,
            concluded_bound: 0.0,
            comparison_margin: f64::NAN,
        });
    }

    let build = |eps: f64| -> Vec<(f64, Field)> {
        window
            .iter()
            .map(|&k| {
                let (t, u) = &ubar[k];
                let values = (0..grid.num_nodes())
                    .map(|i| {
                        let base = if d_mask[i] { u.values[i] } else { 0.0 };
                        base + eps * cut.zeta_x(grid.node(i)) * cut.eta_t(*t)
                    })
                    .collect();
                (
                    *t,
                    Field {
                        grid: grid.clone(),
                        values,
                        ext: u.ext,
                    },
                )
            })
            .collect()
    };
    let passes = |eps: f64| -> Result<bool, DiagnosticError> {
        let under = build(eps);
        let scale = under
            .iter()
            .map(|(_, f)| f.sup_norm())
            .fold(0.0f64, f64::max);
        let tol = 1e-3 * scale.max(1e-300);
        for k in 0..under.len() {
            let op = kernel.apply(&under[k].1)?;
            for i in 0..grid.num_nodes() {
                if in_ball(i) {
                    let r = centered_dt(&under, k, i) + op.values[i];
                    if r > tol {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    };
    let eps_star = if passes(1.0)? {
        1.0
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            if passes(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    // comparison underline <= ubar over the whole lattice and window
    let under = build(eps_star);
    let mut comparison_margin = f64::INFINITY;
    for (j, &k) in window.iter().enumerate() {
        for i in 0..grid.num_nodes() {
            comparison_margin =
                comparison_margin.min(ubar[k].1.values[i] - under[j].1.values[i]);
        }
    }
    let concluded_bound = (-m).exp() * eps_star * cut.zeta_x(xbar);
    // trajectory value at the node nearest the cutoff center, at t nearest 1
    let center_idx = (0..grid.num_nodes())
        .min_by(|&a, &b| {
            let da = (grid.node(a)[0] - xbar[0]).abs() + (grid.node(a)[1] - xbar[1]).abs();
            let db = (grid.node(b)[0] - xbar[0]).abs() + (grid.node(b)[1] - xbar[1]).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let k1 = *window
        .iter()
        .min_by(|&&a, &&b| {
            (ubar[a].0 - 1.0)
                .abs()
                .partial_cmp(&(ubar[b].0 - 1.0).abs())
                .unwrap()
        })
        .unwrap();
    let tol_mp = 1e-10 * ubar[k1].1.sup_norm().max(1.0);
    let value_at_center = ubar[k1].1.values[center_idx];
    let status = if eps_star > 0.0
        && concluded_bound > 0.0
        && comparison_margin >= -tol_mp
        && value_at_center >= concluded_bound - tol_mp
    {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(StrongmaxReport {
        status,
        eps_star,
        c0,
        concluded_bound,
        comparison_margin,
    })
}

/// Result of [`boundary_sub_check`].
#[derive(Debug, Clone)]
pub struct BoundaryReport {
    pub status: CheckStatus,
    /// Measured floor constant of Estimate (ii): `min w e^{theta dt}` on the
    /// compact core.
    pub c_0: f64,
    /// Measured coupling constant: worst `-Op(chi_D0 w_tilde)` on the cutoff
    /// ball, rescaled by `e^{(m+theta) dt}`.
    pub c_2: f64,
    pub initial_margin: f64,
    pub exterior_margin: f64,
    pub max_residual: f64,
    /// Concluded lower bound `eps_n e^{-theta (T_n - t_n)}` for the
    /// trajectory at the cutoff center at the final time.
    pub concluded_bound: f64,
}

/// Boundary subsolution
/// `chi_D0 w_tilde + (2 phi_delta - 1) eps_n e^{-(m+theta)(t - t_n)}`, with
/// `w_tilde = e^{-m (t - t_n)} w` and `phi_delta` the compact power bump.
/// Verifies the initial, exterior, and differential conditions on the cutoff
/// cylinder and the concluded positive bound at the final time.
pub fn boundary_sub_check(
    w_traj: &[(f64, Field)],
    c_lambda: &Field,
    xbar: [f64; 2],
    delta: f64,
    spec: &BarrierSpec,
    kernel: &KernelMatrix,
) -> Result<BoundaryReport, DiagnosticError> {
    spec.validate()?;
    let grid = kernel.grid();
    let d0_mask = spec.d0.mask(grid);
    let na = || BoundaryReport {
        status: CheckStatus::NotApplicable,
        c_0: f64::NAN,
        c_2: f64::NAN,
        initial_margin: f64::NAN,
        exterior_margin: f64::NAN,
        max_residual: f64::NAN,
        concluded_bound: f64::NAN,
    };
    if !d0_mask.iter().any(|&b| b) {
        return Ok(na());
    }
    if spec.eps_n >= spec.q / 2.0 {
        return Ok(na());
    }
    let in_ball = |i: usize| {
        let p = grid.node(i);
        ((p[0] - xbar[0]).powi(2) + (p[1] - xbar[1]).powi(2)).sqrt() < delta
    };
    for i in 0..grid.num_nodes() {
        if d0_mask[i] && in_ball(i) {
            return Err(DiagnosticError::BadBarrierSpec(
                "cutoff ball intersects the compact core".into(),
            ));
        }
    }
    // hypothesis: trajectory exceeds q/2 on the cutoff ball at the anchor
    let min_ball_w0 = (0..grid.num_nodes())
        .filter(|&i| in_ball(i))
        .map(|i| w_traj[0].1.values[i])
        .fold(f64::INFINITY, f64::min);
    if min_ball_w0 <= spec.q / 2.0 {
        return Ok(na());
    }

    // bump sharing the compact-power code path; plane placed so the mirror
    // image lies entirely off-lattice
    let order = kernel.order();
    let far_plane = PlaneReflection {
        axis: 0,
        lambda: grid.radius() + 2.0 * delta + xbar[0].abs(),
    };
    let phi_delta: Vec<f64> = (0..grid.num_nodes())
        .map(|i| {
            antisymmetric_bump_eval(delta, xbar, far_plane, order, grid.node(i))
                .map(|v| v / delta.powf(2.0 * order.s()))
        })
        .collect::<Result<_, _>>()?;

    let tilde: Vec<(f64, Field)> = w_traj
        .iter()
        .map(|(t, w)| {
            let e = (-spec.m * (t - spec.t_n)).exp();
            let values = w.values.iter().map(|v| e * v).collect();
            (
                *t,
                Field {
                    grid: w.grid.clone(),
                    values,
                    ext: w.ext,
                },
            )
        })
        .collect();
    let under: Vec<(f64, Field)> = tilde
        .iter()
        .map(|(t, wt)| {
            let e = (-(spec.m + spec.theta) * (t - spec.t_n)).exp();
            let values = (0..grid.num_nodes())
                .map(|i| {
                    let base = if d0_mask[i] { wt.values[i] } else { 0.0 };
                    base + (2.0 * phi_delta[i] - 1.0) * spec.eps_n * e
                })
                .collect();
            (
                *t,
                Field {
                    grid: wt.grid.clone(),
                    values,
                    ext: wt.ext,
                },
            )
        })
        .collect();

    let tol_mp = 1e-10 * w_traj[0].1.sup_norm().max(1.0);
    // initial condition on the cutoff ball
    let mut initial_margin = f64::INFINITY;
    for i in 0..grid.num_nodes() {
        if in_ball(i) {
            initial_margin = initial_margin.min(tilde[0].1.values[i] - under[0].1.values[i]);
        }
    }
    // exterior condition on the right half outside the ball
    let mut exterior_margin = f64::INFINITY;
    for k in 0..tilde.len() {
        for i in 0..grid.num_nodes() {
            if grid.node(i)[0] > 0.0 && !in_ball(i) {
                exterior_margin =
                    exterior_margin.min(tilde[k].1.values[i] - under[k].1.values[i]);
            }
        }
    }
    // differential inequality on the cutoff cylinder, with measured constants
    let mut max_residual = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    let mut c_0 = f64::INFINITY;
    let mut c_2 = f64::INFINITY;
    for k in 0..under.len() {
        let dt_k = under[k].0 - spec.t_n;
        let op = kernel.apply(&under[k].1)?;
        // coupling part alone, for the measured constant
        let coupling = Field {
            grid: grid.clone(),
            values: (0..grid.num_nodes())
                .map(|i| if d0_mask[i] { tilde[k].1.values[i] } else { 0.0 })
                .collect(),
            ext: tilde[k].1.ext,
        };
        let op_coupling = kernel.apply(&coupling)?;
        for i in 0..grid.num_nodes() {
            if d0_mask[i] {
                c_0 = c_0.min(w_traj[k].1.values[i] * (spec.theta * dt_k).exp());
            }
            if in_ball(i) {
                scale = scale.max(under[k].1.values[i].abs());
                let c_tilde = c_lambda.values[i] - spec.m;
                let r = centered_dt(&under, k, i) + op.values[i]
                    - c_tilde * under[k].1.values[i];
                max_residual = max_residual.max(r);
                c_2 = c_2.min(-op_coupling.values[i] * ((spec.m + spec.theta) * dt_k).exp());
            }
        }
    }
    let tol_res = 1e-3 * scale.max(tol_mp);
    // conclusion at the cutoff center at the final time
    let center_idx = (0..grid.num_nodes())
        .min_by(|&a, &b| {
            let da = (grid.node(a)[0] - xbar[0]).abs() + (grid.node(a)[1] - xbar[1]).abs();
            let db = (grid.node(b)[0] - xbar[0]).abs() + (grid.node(b)[1] - xbar[1]).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let (t_end, w_end) = w_traj.last().unwrap();
    let concluded_bound = spec.eps_n * (-spec.theta * (t_end - spec.t_n)).exp();
    let conclusion_ok = w_end.values[center_idx] >= concluded_bound - tol_mp;
    let status = if initial_margin >= -tol_mp
        && exterior_margin >= -tol_mp
        && max_residual <= tol_res
        && conclusion_ok
        && concluded_bound > 0.0
    {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(BoundaryReport {
        status,
        c_0,
        c_2,
        initial_margin,
        exterior_margin,
        max_residual,
        concluded_bound,
    })
}

// ---------------------------------------------------------------------------
// Manufactured configuration
// ---------------------------------------------------------------------------

/// A complete, internally consistent barrier configuration with all constants
/// measured from the data: a steady antisymmetric double bump, the
/// coefficient field that makes it an exact steady state (clamped to honor
/// the decay hypothesis), and a trajectory with a controlled negative dip.
#[derive(Debug, Clone)]
pub struct BarrierLab {
    pub grid: Arc<Grid>,
    pub order: FracOrder,
    pub kernel: KernelMatrix,
    pub spec: BarrierSpec,
    pub w_mu: Vec<(f64, Field)>,
    pub w_traj: Vec<(f64, Field)>,
    pub c_lambda: Field,
}

/// Builds the manufactured configuration. `theta` is the barrier decay rate
/// (pass a value above sigma for the hypothesis-violation study);
/// `tau_scale`/`eps_scale` rescale the measured amplitudes for the
/// monotonicity property.
pub fn manufactured_barrier_lab(
    theta: f64,
    tau_scale: f64,
    eps_scale: f64,
) -> Result<BarrierLab, DiagnosticError> {
    let grid = Arc::new(Grid::build(1, 4.0, 1.0 / 32.0)?);
    let order = FracOrder::new(0.5)?;
    let kernel = build_kernel(grid.clone(), order, ExteriorSpec::ZeroOutsideLattice)?;
    let mu = 0.25;
    let sigma = 0.5;
    let (delta0, rho1, rho2) = (0.25, 1.4, 2.0);
    let t_n = 0.0;
    let times: Vec<f64> = (0..=20).map(|k| t_n + 0.1 * k as f64).collect();

    // steady antisymmetric double bump about the offset plane
    let g = |x: f64| (-32.0 * (x - 1.0) * (x - 1.0)).exp();
    let w_mu_field = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
        g(p[0]) - g(2.0 * mu - p[0])
    });
    let w_tilde = antisymmetrize_about_origin(&w_mu_field, mu)?;
    let op_wt = kernel.apply(&w_tilde)?;

    // coefficient: exact steady ratio, capped from below, forced under -sigma
    // outside rho1 (capping down only strengthens the verified inequality)
    let c_lambda = Field {
        grid: grid.clone(),
        values: (0..grid.num_nodes())
            .map(|i| {
                let w = w_tilde.values[i];
                let mut c = if w.abs() > 1e-250 {
                    (op_wt.values[i] / w).max(-5.0)
                } else {
                    -1.0
                };
                if grid.node_norm(i) > rho1 {
                    c = c.min(-0.6);
                }
                c
            })
            .collect(),
        ext: w_tilde.ext,
    };

    // measured amplitude bound: largest tau keeping the residual nonpositive
    let d = RegionSpec {
        min_x1: mu + delta0,
        max_radius: rho2,
    };
    let d0 = RegionSpec {
        min_x1: 0.75,
        max_radius: 1.25,
    };
    let d_mask = d.mask(&grid);
    let h = step_field(&grid);
    let op_h = kernel.apply(&h)?;
    let mut tau_cap = f64::INFINITY;
    for i in 0..grid.num_nodes() {
        if !d_mask[i] {
            continue;
        }
        let a = op_wt.values[i]
            - c_lambda.values[i] * w_tilde.values[i]
            - theta * w_tilde.values[i];
        let b = theta + c_lambda.values[i] - op_h.values[i];
        if b > 0.0 {
            tau_cap = tau_cap.min(-a / b);
        }
    }
    let d0_mask = d0.mask(&grid);
    let c0 = (0..grid.num_nodes())
        .filter(|&i| d0_mask[i])
        .map(|i| w_tilde.values[i])
        .fold(f64::INFINITY, f64::min);
    let tau = tau_scale * (0.5 * tau_cap).min(c0 / 4.0);
    let a0 = c0 - 2.0 * tau;
    let m = c_lambda
        .values
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
        .max(0.5)
        + 0.5;

    // trajectory: steady profile plus a broad positive floor, with one node
    // dipping exactly to the admissible exponential envelope
    let base = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
        let x = p[0];
        let broad = 0.2 * x * (-x * x / 4.0).exp();
        broad
    });
    let carrier: Vec<f64> = (0..grid.num_nodes())
        .map(|i| w_tilde.values[i] + base.values[i])
        .collect();
    let q = 0.5
        * (0..grid.num_nodes())
            .filter(|&i| d_mask[i])
            .map(|i| carrier[i])
            .fold(f64::INFINITY, f64::min);
    // normalizer of the barrier at the anchor, for sizing the dip
    let gamma_n = (0..grid.num_nodes())
        .filter(|&i| d_mask[i])
        .map(|i| (w_tilde.values[i] - tau * h.values[i]).abs())
        .fold(0.0f64, f64::max);
    let eps_n = eps_scale * 0.25 * (q / gamma_n) * (tau / 2.0);
    // dip node: first node right of the origin
    let dip_idx = (0..grid.num_nodes())
        .filter(|&i| grid.node(i)[0] > 0.0)
        .min_by(|&a, &b| grid.node(a)[0].partial_cmp(&grid.node(b)[0]).unwrap())
        .unwrap();

    let spec = BarrierSpec {
        mu,
        tau,
        theta,
        sigma,
        t_n,
        delta0,
        rho1,
        rho2,
        q,
        m,
        eps_n,
        a0,
        c0,
        gamma_n,
        d,
        d0,
    };

    let w_mu: Vec<(f64, Field)> = times.iter().map(|&t| (t, w_mu_field.clone())).collect();
    let w_traj: Vec<(f64, Field)> = times
        .iter()
        .map(|&t| {
            let e = (-theta * (t - t_n)).exp();
            let values = (0..grid.num_nodes())
                .map(|i| {
                    let mut v = carrier[i];
                    if i == dip_idx {
                        v = w_tilde.values[i] - eps_n * e + base.values[i] * (1.0 - e);
                    }
                    v
                })
                .collect();
            (
                t,
                Field {
                    grid: grid.clone(),
                    values,
                    ext: ExteriorSpec::ZeroOutsideLattice,
                },
            )
        })
        .collect();

    Ok(BarrierLab {
        grid,
        order,
        kernel,
        spec,
        w_mu,
        w_traj,
        c_lambda,
    })
}

/// Inputs for the interior cutoff subsolution check: a unit plateau on a
/// centered ball, sampled on a fine time grid around `t = 1`.
pub fn manufactured_strongmax_inputs(
    xbar: f64,
) -> Result<(Vec<(f64, Field)>, Vec<bool>, CutoffPair, KernelMatrix), DiagnosticError> {
    let grid = Arc::new(Grid::build(1, 2.0, 1.0 / 32.0)?);
    let order = FracOrder::new(0.5)?;
    let kernel = build_kernel(grid.clone(), order, ExteriorSpec::ZeroOutsideLattice)?;
    let d_mask: Vec<bool> = (0..grid.num_nodes())
        .map(|i| grid.node_norm(i) < 0.5)
        .collect();
    let ones = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |_| 1.0);
    let ubar: Vec<(f64, Field)> = (0..=50)
        .map(|k| (0.5 + 0.02 * k as f64, ones.clone()))
        .collect();
    let cut = CutoffPair {
        center: [xbar, 0.0],
        delta: 0.25,
        eps_o: 0.4,
    };
    Ok((ubar, d_mask, cut, kernel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use approx::assert_relative_eq;

    #[test]
    fn spec_validation() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        assert!(lab.spec.validate().is_ok());
        let mut bad = lab.spec.clone();
        bad.theta = 0.9; // above sigma
        assert!(matches!(
            bad.validate(),
            Err(DiagnosticError::BadBarrierSpec(_))
        ));
        let mut bad = lab.spec.clone();
        bad.tau = -1.0;
        assert!(bad.validate().is_err());
        let mut bad = lab.spec.clone();
        bad.a0 = bad.c0; // c0 - tau < a0
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cutoffs_have_exact_plateau_and_support() {
        let cut = CutoffPair {
            center: [0.3, 0.0],
            delta: 0.4,
            eps_o: 0.2,
        };
        assert_eq!(cut.zeta_x([0.3, 0.0]), 1.0);
        assert_eq!(cut.zeta_x([0.3 + 0.2, 0.0]), 1.0);
        assert_eq!(cut.zeta_x([0.3 + 0.4, 0.0]), 0.0);
        assert_eq!(cut.zeta_x([0.3 + 0.41, 0.0]), 0.0);
        let mid = cut.zeta_x([0.3 + 0.3, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(cut.eta_t(1.0), 1.0);
        assert_eq!(cut.eta_t(1.1), 1.0);
        assert_eq!(cut.eta_t(1.21), 0.0);
        let mid = cut.eta_t(1.15);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn zeta_is_exactly_antisymmetric_and_bounded_below_on_core() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let zeta = zeta_build(&lab.w_mu, &lab.spec).unwrap();
        let grid = &lab.grid;
        let plane = PlaneReflection { axis: 0, lambda: 0.0 };
        for (_, z) in &zeta {
            for idx in 0..grid.num_nodes() {
                if let Some(j) = grid.reflect_index(plane, idx).unwrap() {
                    assert_eq!(z.values[idx].to_bits(), (-z.values[j]).to_bits());
                }
            }
        }
        // at the anchor: zeta = w_tilde - tau h exactly
        let wt = antisymmetrize_about_origin(&lab.w_mu[0].1, lab.spec.mu).unwrap();
        let h = step_field(grid);
        for idx in 0..grid.num_nodes() {
            assert_abs_diff_eq!(
                zeta[0].1.values[idx],
                wt.values[idx] - lab.spec.tau * h.values[idx],
                epsilon = 1e-15
            );
        }
        // on the compact core: e^{theta dt} zeta >= c0 - tau >= a0
        let d0_mask = lab.spec.d0.mask(grid);
        for (t, z) in &zeta {
            let e = (lab.spec.theta * (t - lab.spec.t_n)).exp();
            for idx in 0..grid.num_nodes() {
                if d0_mask[idx] {
                    let v = e * z.values[idx];
                    assert!(v >= lab.spec.c0 - lab.spec.tau - 1e-12);
                    assert!(lab.spec.c0 - lab.spec.tau >= lab.spec.a0);
                }
            }
        }
    }

    #[test]
    fn zeta_commutes_with_time_translation() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let zeta = zeta_build(&lab.w_mu, &lab.spec).unwrap();
        let mut spec2 = lab.spec.clone();
        spec2.t_n = 5.0;
        let shifted: Vec<(f64, Field)> =
            lab.w_mu.iter().map(|(t, f)| (t + 5.0, f.clone())).collect();
        let zeta2 = zeta_build(&shifted, &spec2).unwrap();
        for (a, b) in zeta.iter().zip(&zeta2) {
            for (x, y) in a.1.values.iter().zip(&b.1.values) {
                assert_relative_eq!(x, y, max_relative = 1e-12, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn barrier_residual_nonpositive_on_region() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let zeta = zeta_build(&lab.w_mu, &lab.spec).unwrap();
        let rep = residual_L_lambda(&zeta, &lab.c_lambda, &lab.kernel, &lab.spec).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass, "max={}", rep.max_residual);
    }

    #[test]
    fn zero_profile_gives_zero_residual() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let mut spec = lab.spec.clone();
        // tau must stay positive for a valid spec; shrink it to round-off so
        // the barrier is the bare step, then verify the residual on the zero
        // trajectory variant directly
        spec.tau = f64::MIN_POSITIVE;
        spec.a0 = -1.0;
        let zero_snaps: Vec<(f64, Field)> = lab
            .w_mu
            .iter()
            .map(|(t, f)| (*t, Field::zeros(f.grid.clone(), f.ext)))
            .collect();
        let zeta = zeta_build(&zero_snaps, &spec).unwrap();
        let rep = residual_L_lambda(&zeta, &lab.c_lambda, &lab.kernel, &spec).unwrap();
        // zeta is the tiny step only; residual scales with tau -> vanishes
        assert!(rep.max_residual.abs() < 1e-290);
    }

    #[test]
    fn wrong_decay_rate_shows_up_outside_inner_ball() {
        // a decay rate above sigma fails validation outright
        let bad = manufactured_barrier_lab(1.0, 1.0, 1.0).unwrap();
        assert!(bad.spec.validate().is_err());

        // sharp study on the step-only barrier (zero profile): the residual
        // on D reduces to tau e (theta + c - Op h), whose sign far out is
        // exactly that of theta + c. With c = -0.6 the honest rate stays
        // nonpositive everywhere, while theta = 1 turns positive precisely
        // outside the inner ball where Op h has decayed.
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let grid = &lab.grid;
        let c_const = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |_| -0.6);
        let zero_snaps: Vec<(f64, Field)> = lab
            .w_mu
            .iter()
            .map(|(t, f)| (*t, Field::zeros(f.grid.clone(), f.ext)))
            .collect();
        let mut spec = lab.spec.clone();
        spec.tau = 0.1;
        spec.c0 = 1.0;
        spec.a0 = 0.0;

        spec.theta = 0.25;
        let zeta = zeta_build(&zero_snaps, &spec).unwrap();
        let rep = residual_L_lambda(&zeta, &c_const, &lab.kernel, &spec).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.max_outside_rho1 <= rep.tol);

        spec.theta = 1.0;
        spec.sigma = 1.5; // bypass the validation gate to run the study
        let zeta = zeta_build(&zero_snaps, &spec).unwrap();
        let rep = residual_L_lambda(&zeta, &c_const, &lab.kernel, &spec).unwrap();
        assert!(
            rep.max_outside_rho1 > 0.0,
            "expected positivity outside rho1, got {}",
            rep.max_outside_rho1
        );
    }

    #[test]
    fn psi_initial_and_exterior_conditions() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let zeta = zeta_build(&lab.w_mu, &lab.spec).unwrap();
        let rep = psi_sub_build(&zeta, &lab.w_traj, &lab.spec).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.initial_margin >= 0.0);
        assert!(rep.exterior_margin >= 0.0);
        assert!(rep.certificate_excess <= 1e-12);
        // dip too large for the certificate: gate reports NOT-APPLICABLE
        let mut big = lab.spec.clone();
        big.eps_n = (big.q / rep.gamma_n) * (big.tau / 2.0) * 2.0;
        let rep2 = psi_sub_build(&zeta, &lab.w_traj, &big).unwrap();
        assert_eq!(rep2.status, CheckStatus::NotApplicable);
    }

    #[test]
    fn global_lower_bound_holds() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let rep = global_lower_bound_check(&lab.w_traj, &lab.spec);
        assert_eq!(rep.status, CheckStatus::Pass);
        // the manufactured dip makes the bound genuinely negative
        assert!(rep.base < 0.0);
        // nonnegative data: the bound degenerates to plain nonnegativity
        let pos: Vec<(f64, Field)> = lab
            .w_traj
            .iter()
            .map(|(t, f)| {
                let values = f.values.iter().map(|v| v.abs()).collect();
                (
                    *t,
                    Field {
                        grid: f.grid.clone(),
                        values,
                        ext: f.ext,
                    },
                )
            })
            .collect();
        let rep = global_lower_bound_check(&pos, &lab.spec);
        assert_eq!(rep.status, CheckStatus::Pass);
        assert_eq!(rep.base, 0.0);
    }

    #[test]
    fn interior_cutoff_subsolution() {
        let (ubar, d_mask, cut, kernel) = manufactured_strongmax_inputs(1.0).unwrap();
        let rep =
            strongmax_sub_build(&ubar, &d_mask, [1.0, 0.0], 0.25, 1.0, &cut, &kernel).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.eps_star > 0.0);
        assert!(rep.concluded_bound > 0.0);
        // weaker coupling further out: admissible amplitude shrinks but
        // stays positive
        let (ubar2, d_mask2, cut2, kernel2) = manufactured_strongmax_inputs(1.5).unwrap();
        let rep2 =
            strongmax_sub_build(&ubar2, &d_mask2, [1.5, 0.0], 0.25, 1.0, &cut2, &kernel2)
                .unwrap();
        assert_eq!(rep2.status, CheckStatus::Pass);
        assert!(rep2.eps_star > 0.0);
        assert!(rep2.eps_star < rep.eps_star);
        // overlapping ball is a geometry error
        assert!(strongmax_sub_build(&ubar, &d_mask, [0.5, 0.0], 0.25, 1.0, &cut, &kernel)
            .is_err());
    }

    #[test]
    fn boundary_cutoff_subsolution() {
        let lab = manufactured_barrier_lab(0.25, 1.0, 1.0).unwrap();
        let rep = boundary_sub_check(
            &lab.w_traj,
            &lab.c_lambda,
            [0.5, 0.0],
            0.1,
            &lab.spec,
            &lab.kernel,
        )
        .unwrap();
        assert_eq!(rep.status, CheckStatus::Pass, "residual={}", rep.max_residual);
        assert!(rep.c_0 > 0.0);
        assert!(rep.c_2 > 0.0);
        assert!(rep.concluded_bound > 0.0);
        // oversized dip: initial gate fails, NOT-APPLICABLE
        let mut big = lab.spec.clone();
        big.eps_n = big.q;
        let rep2 = boundary_sub_check(
            &lab.w_traj,
            &lab.c_lambda,
            [0.5, 0.0],
            0.1,
            &big,
            &lab.kernel,
        )
        .unwrap();
        assert_eq!(rep2.status, CheckStatus::NotApplicable);
        // degenerate core: NOT-APPLICABLE
        let mut empty = lab.spec.clone();
        empty.d0 = RegionSpec {
            min_x1: 10.0,
            max_radius: 11.0,
        };
        let rep3 = boundary_sub_check(
            &lab.w_traj,
            &lab.c_lambda,
            [0.5, 0.0],
            0.1,
            &empty,
            &lab.kernel,
        )
        .unwrap();
        assert_eq!(rep3.status, CheckStatus::NotApplicable);
    }

    #[test]
    fn halved_amplitudes_preserve_pass() {
        let lab = manufactured_barrier_lab(0.25, 0.5, 0.5).unwrap();
        let zeta = zeta_build(&lab.w_mu, &lab.spec).unwrap();
        let res = residual_L_lambda(&zeta, &lab.c_lambda, &lab.kernel, &lab.spec).unwrap();
        assert_eq!(res.status, CheckStatus::Pass);
        let psi = psi_sub_build(&zeta, &lab.w_traj, &lab.spec).unwrap();
        assert_eq!(psi.status, CheckStatus::Pass);
        let glb = global_lower_bound_check(&lab.w_traj, &lab.spec);
        assert_eq!(glb.status, CheckStatus::Pass);
        let bnd = boundary_sub_check(
            &lab.w_traj,
            &lab.c_lambda,
            [0.5, 0.0],
            0.1,
            &lab.spec,
            &lab.kernel,
        )
        .unwrap();
        assert_eq!(bnd.status, CheckStatus::Pass);
    }
}
