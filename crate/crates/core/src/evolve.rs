//! Explicit time integration of `du/dt + (-Laplacian)^s u = f(t, u)` and the
//! scalar comparison ODE used as its decay oracle.
//!
//! The stepper is forward Euler under the monotonicity bound
//! `dt <= 0.9 / (max row sum + L)`. Under that bound the update map has
//! nonnegative coefficients, so discrete comparison principles carry over
//! from the kernel to the dynamics.

use std::sync::Arc;

use crate::error::EvolveError;
use crate::field::{ExteriorSpec, Field};
use crate::fraclap::{FracOrder, KernelMatrix};
use crate::grid::Grid;
use crate::CheckStatus;

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Reaction term `f(t, u)` together with the analytic data the diagnostics
/// need: its `u`-derivative, a Lipschitz bound, the decay margin `sigma`, and
/// the amplitude band on which `f_u(t, eta) < -sigma` is guaranteed.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: ScalarFn,
    f_u: ScalarFn,
    lipschitz: f64,
    sigma: f64,
    /// Hölder-in-time exponent; metadata only.
    alpha: f64,
    /// `f_u(t, eta) < -sigma` holds for `|eta| < eps_threshold` (0 when no
    /// such band exists, e.g. growth-type presets).
    eps_threshold: f64,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("sigma", &self.sigma)
            .field("alpha", &self.alpha)
            .field("eps_threshold", &self.eps_threshold)
            .finish()
    }
}

impl Nonlinearity {
    pub fn new(
        name: impl Into<String>,
        f: ScalarFn,
        f_u: ScalarFn,
        lipschitz: f64,
        sigma: f64,
        alpha: f64,
        eps_threshold: f64,
    ) -> Nonlinearity {
        Nonlinearity {
            name: name.into(),
            f,
            f_u,
            lipschitz,
            sigma,
            alpha,
            eps_threshold,
        }
    }

    /// `f = 0`.
    pub fn zero() -> Nonlinearity {
        Nonlinearity::new("zero", Arc::new(|_, _| 0.0), Arc::new(|_, _| 0.0), 0.0, 0.5, 1.0, f64::INFINITY)
    }

    /// `f(u) = -u`: pure linear decay, `f_u = -1 < -1/2`.
    pub fn linear_decay() -> Nonlinearity {
        Nonlinearity::new(
            "linear-decay",
            Arc::new(|_, u: f64| -u),
            Arc::new(|_, _| -1.0),
            1.0,
            0.5,
            1.0,
            f64::INFINITY,
        )
    }

    /// `f(u) = u^3 - u`: the whole-space preset. `f_u(eta) = 3 eta^2 - 1 <
    /// -1/2` for `|eta| < 1/sqrt(6)`. Lipschitz bound taken on `|u| <= 2`.
    pub fn bistable_cubic() -> Nonlinearity {
        Nonlinearity::new(
            "bistable-cubic",
            Arc::new(|_, u: f64| u * u * u - u),
            Arc::new(|_, u: f64| 3.0 * u * u - 1.0),
            11.0,
            0.5,
            1.0,
            (1.0f64 / 6.0).sqrt(),
        )
    }

    /// `f(u) = a (u - u^3)`: the ball preset with tunable amplitude; `f(0) =
    /// 0 >= 0` and positive growth at small `u`. No decay band at zero.
    pub fn logistic_cubic(a: f64) -> Nonlinearity {
        Nonlinearity::new(
            format!("logistic-cubic(a={a})"),
            Arc::new(move |_, u: f64| a * (u - u * u * u)),
            Arc::new(move |_, u: f64| a * (1.0 - 3.0 * u * u)),
            11.0 * a.abs(),
            0.5,
            1.0,
            0.0,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self, t: f64, u: f64) -> f64 {
        (self.f)(t, u)
    }

    pub fn f_u(&self, t: f64, u: f64) -> f64 {
        (self.f_u)(t, u)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps_threshold(&self) -> f64 {
        self.eps_threshold
    }

    /// Divided-difference coefficient `(f(t,a) - f(t,b)) / (a - b)`, with the
    /// removable singularity filled by `f_u`.
    pub fn divided_coefficient(&self, t: f64, a: f64, b: f64) -> f64 {
        if (a - b).abs() < 1e-12 {
            self.f_u(t, 0.5 * (a + b))
        } else {
            (self.f(t, a) - self.f(t, b)) / (a - b)
        }
    }

    /// Spot-checks `|f(t,u) - f(t,v)| <= L |u - v|` on a deterministic sample
    /// of times and values in `[-range, range]`.
    pub fn spot_check_lipschitz(&self, range: f64) -> bool {
        let pts = 17;
        for ti in 0..5 {
            let t = ti as f64 * 0.7;
            for i in 0..pts {
                let u = range * (2.0 * i as f64 / (pts - 1) as f64 - 1.0);
                for j in 0..pts {
                    let v = range * (2.0 * j as f64 / (pts - 1) as f64 - 1.0);
                    if (self.f(t, u) - self.f(t, v)).abs() > self.lipschitz * (u - v).abs() + 1e-12
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whole-space hypothesis: `f(t,0) = 0` and `f_u(t,0) < -sigma` on
    /// sampled times.
    pub fn check_decay_at_zero(&self) -> bool {
        (0..10).all(|i| {
            let t = i as f64 * 0.9;
            self.f(t, 0.0) == 0.0 && self.f_u(t, 0.0) < -self.sigma
        })
    }

    /// Ball hypothesis: `f(t,0) >= 0` on sampled times.
    pub fn check_source_sign(&self) -> bool {
        (0..10).all(|i| self.f(i as f64 * 0.9, 0.0) >= 0.0)
    }
}

/// Time-ordered record of an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<Grid>,
    pub order: FracOrder,
    pub ext: ExteriorSpec,
    pub nl_name: String,
    /// Strictly increasing times with their fields.
    pub snapshots: Vec<(f64, Field)>,
    /// Step size used (the last step into each snapshot may be shorter).
    pub dt: f64,
    /// Max |u| over the outermost lattice ring per snapshot (truncation
    /// diagnostic for whole-space runs).
    pub boundary_ring: Vec<f64>,
    /// Total Euler steps taken (deterministic work counter).
    pub steps: u64,
}

impl Trajectory {
    pub fn sup_norms(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|(t, f)| (*t, f.sup_norm())).collect()
    }

    pub fn last(&self) -> &(f64, Field) {
        self.snapshots.last().expect("trajectory has snapshots")
    }
}

/// Largest explicit-Euler step with a monotone update map:
/// `0.9 / (max row sum + L)`.
pub fn stable_dt(kernel: &KernelMatrix, nl: &Nonlinearity) -> f64 {
    0.9 / (kernel.max_row_sum() + nl.lipschitz())
}

/// One forward-Euler step `u + dt (f(t,u) - Op u)`, with the exterior
/// condition re-imposed afterwards.
pub fn step_explicit(
    field: &Field,
    t: f64,
    dt: f64,
    kernel: &KernelMatrix,
    nl: &Nonlinearity,
) -> Result<Field, EvolveError> {
    let max = stable_dt(kernel, nl);
    if dt > max * (1.0 + 1e-12) {
        return Err(EvolveError::UnstableStep { dt, max });
    }
    let op = kernel.apply(field)?;
    let mut out = field.clone();
    for i in 0..out.values.len() {
        out.values[i] += dt * (nl.f(t, field.values[i]) - op.values[i]);
    }
    out.impose_exterior();
    for (i, v) in out.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(EvolveError::Diverged { node: i, t: t + dt });
        }
    }
    Ok(out)
}

/// Integrates to horizon `T`, recording snapshots at multiples of
/// `snap_every` (plus `t = 0` and `T`).
pub fn evolve(
    field0: &Field,
    nl: &Nonlinearity,
    kernel: &KernelMatrix,
    t_end: f64,
    snap_every: f64,
) -> Result<Trajectory, EvolveError> {
    if snap_every <= 0.0 {
        return Err(EvolveError::BadSnapInterval(snap_every));
    }
    if t_end <= 0.0 {
        return Err(EvolveError::BadHorizon(t_end));
    }
    let dt = stable_dt(kernel, nl);
    let mut targets: Vec<f64> = Vec::new();
    let mut k = 1usize;
    loop {
        let t = k as f64 * snap_every;
        if t >= t_end - 1e-12 {
            break;
        }
        targets.push(t);
        k += 1;
    }
    targets.push(t_end);

    let mut u = field0.clone();
    u.impose_exterior();
    let mut t = 0.0;
    let mut steps = 0u64;
    let mut snapshots = vec![(0.0, u.clone())];
    let mut boundary_ring = vec![u.boundary_ring_max()];
    for &target in &targets {
        while t < target - 1e-12 {
            let step = dt.min(target - t);
            u = step_explicit(&u, t, step, kernel, nl)?;
            t += step;
            steps += 1;
        }
        t = target;
        snapshots.push((t, u.clone()));
        boundary_ring.push(u.boundary_ring_max());
    }
    Ok(Trajectory {
        grid: field0.grid.clone(),
        order: kernel.order(),
        ext: field0.ext,
        nl_name: nl.name().to_string(),
        snapshots,
        dt,
        boundary_ring,
        steps,
    })
}

/// Result of [`ode_xi`].
#[derive(Debug, Clone)]
pub struct OdeXiReport {
    pub status: CheckStatus,
    /// Sampled `(t, xi(t))`.
    pub samples: Vec<(f64, f64)>,
    /// Max over samples of `xi(t) / (eps0 e^{-sigma t})`; 0 when not
    /// applicable.
    pub max_ratio: f64,
}

/// Integrates the scalar comparison ODE `dxi/dt = f(t + t_k, xi)`,
/// `xi(0) = eps0`, by adaptive classical 4th-order Runge-Kutta with local
/// tolerance 1e-10, and checks the decay bound
/// `0 < xi(t) <= eps0 e^{-sigma t} (1 + 1e-6)`.
///
/// `eps0` must lie strictly inside the band where `f_u < -sigma`; otherwise
/// the bound is not claimed and the report is NOT-APPLICABLE.
pub fn ode_xi(nl: &Nonlinearity, t_k: f64, eps0: f64, t_end: f64) -> OdeXiReport {
    if !(eps0 > 0.0) || eps0 >= nl.eps_threshold() {
        return OdeXiReport {
            status: CheckStatus::NotApplicable,
            samples: Vec::new(),
            max_ratio: 0.0,
        };
    }
    let f = |t: f64, y: f64| nl.f(t + t_k, y);
    let rk4 = |t: f64, y: f64, dt: f64| -> f64 {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
        let k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
        let k4 = f(t + dt, y + dt * k3);
        y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };

    let tol = 1e-10;
    let mut t = 0.0;
    let mut y = eps0;
    let mut dt = (t_end / 1000.0).min(1e-2);
    let dt_max = t_end / 200.0;
    let mut samples = vec![(0.0, y)];
    while t < t_end - 1e-14 {
        dt = dt.min(t_end - t).min(dt_max);
        // step doubling: one full step vs two half steps
        let y_full = rk4(t, y, dt);
        let y_half = rk4(t + 0.5 * dt, rk4(t, y, 0.5 * dt), 0.5 * dt);
        let err = (y_full - y_half).abs() / 15.0;
        let scale = tol * (1.0 + y.abs());
        if err <= scale || dt <= 1e-12 {
            t += dt;
            y = y_half + (y_half - y_full) / 15.0;
            samples.push((t, y));
        }
        let shrink = if err > 0.0 {
            0.9 * (scale / err).powf(0.2)
        } else {
            2.0
        };
        dt *= shrink.clamp(0.2, 2.0);
    }

    let sigma = nl.sigma();
    let mut ok = true;
    let mut max_ratio = 0.0f64;
    for &(t, xi) in &samples {
        let bound = eps0 * (-sigma * t).exp();
        max_ratio = max_ratio.max(xi / bound);
        if !(xi > 0.0 && xi <= bound * (1.0 + 1e-6)) {
            ok = false;
        }
    }
    OdeXiReport {
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        samples,
        max_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraclap::build_kernel;
    use approx::assert_abs_diff_eq;

    fn setup_1d(radius: f64, h: f64, s: f64, ext: ExteriorSpec) -> (Arc<Grid>, KernelMatrix) {
        let grid = Arc::new(Grid::build(1, radius, h).unwrap());
        let k = build_kernel(grid.clone(), FracOrder::new(s).unwrap(), ext).unwrap();
        (grid, k)
    }

    #[test]
    fn stable_dt_formula_and_scaling() {
        let (_, k) = setup_1d(2.0, 1.0 / 64.0, 0.5, ExteriorSpec::ZeroOutsideLattice);
        let nl0 = Nonlinearity::zero();
        assert_abs_diff_eq!(stable_dt(&k, &nl0), 0.9 / k.max_row_sum(), epsilon = 1e-15);
        let nl = Nonlinearity::linear_decay();
        assert_abs_diff_eq!(
            stable_dt(&k, &nl),
            0.9 / (k.max_row_sum() + 1.0),
            epsilon = 1e-15
        );
        // halving h grows the diagonal like h^{-2s}, shrinking dt by ~2^{2s}
        let (_, k2) = setup_1d(2.0, 1.0 / 128.0, 0.5, ExteriorSpec::ZeroOutsideLattice);
        let ratio = stable_dt(&k, &nl0) / stable_dt(&k2, &nl0);
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn step_identity_and_stability_guard() {
        let (grid, k) = setup_1d(1.0, 0.125, 0.5, ExteriorSpec::ZeroOutsideLattice);
        let nl = Nonlinearity::linear_decay();
        let u = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
            (-4.0 * p[0] * p[0]).exp()
        });
        let same = step_explicit(&u, 0.0, 0.0, &k, &nl).unwrap();
        assert_eq!(same.values, u.values);
        let too_big = 2.0 * stable_dt(&k, &nl);
        assert!(matches!(
            step_explicit(&u, 0.0, too_big, &k, &nl),
            Err(EvolveError::UnstableStep { .. })
        ));
    }

    #[test]
    fn zero_data_stays_zero() {
        let (grid, k) = setup_1d(1.0, 0.125, 0.4, ExteriorSpec::ZeroOutsideBall);
        let nl = Nonlinearity::bistable_cubic();
        let zero = Field::zeros(grid.clone(), ExteriorSpec::ZeroOutsideBall);
        let traj = evolve(&zero, &nl, &k, 1.0, 0.25).unwrap();
        for (_, f) in &traj.snapshots {
            assert_eq!(f.sup_norm(), 0.0);
        }
        assert!(traj.steps > 0);
        for w in traj.snapshots.windows(2) {
            assert!(w[1].0 > w[0].0);
        }
    }

    #[test]
    fn reaction_term_acts_as_exponential_factor() {
        // with f = -u the exact flow is e^{-t} times the f = 0 flow; the
        // discrete splitting error is O(dt), well inside 5% here
        let (grid, k) = setup_1d(4.0, 1.0 / 32.0, 0.5, ExteriorSpec::ZeroOutsideLattice);
        let u0 = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
            1.0 / (1.0 + p[0] * p[0])
        });
        let t_end = 1.0;
        let with_f = evolve(&u0, &Nonlinearity::linear_decay(), &k, t_end, t_end).unwrap();
        let free = evolve(&u0, &Nonlinearity::zero(), &k, t_end, t_end).unwrap();
        let a = with_f.last().1.sup_norm();
        let b = free.last().1.sup_norm() * (-t_end as f64).exp();
        assert!((a - b).abs() <= 0.05 * b, "{a} vs {b}");
    }

    #[test]
    fn poisson_kernel_half_order_flow() {
        // (-Lap)^{1/2} flow of P_t(x) = t / (pi (t^2 + x^2)) is P_{t+T};
        // coarse smoke version of the high-resolution acceptance check
        let (grid, k) = setup_1d(8.0, 1.0 / 32.0, 0.5, ExteriorSpec::ZeroOutsideLattice);
        let p = |t: f64, x: f64| t / (std::f64::consts::PI * (t * t + x * x));
        let u0 = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |q| p(1.0, q[0]));
        let traj = evolve(&u0, &Nonlinearity::zero(), &k, 0.5, 0.5).unwrap();
        let got = &traj.last().1;
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..grid.num_nodes() {
            let want = p(1.5, grid.node(i)[0]);
            err = err.max((got.values[i] - want).abs());
            scale = scale.max(want);
        }
        assert!(err <= 0.10 * scale, "rel err {}", err / scale);
    }

    #[test]
    fn ball_run_respects_invariant_region_and_positivity() {
        let (grid, k) = setup_1d(1.0, 1.0 / 32.0, 0.5, ExteriorSpec::ZeroOutsideBall);
        let nl = Nonlinearity::logistic_cubic(1.0);
        assert!(nl.check_source_sign());
        let u0 = Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideBall, |p| {
            1.5 * (1.0 - p[0] * p[0]).max(0.0)
        });
        let traj = evolve(&u0, &nl, &k, 2.0, 0.25).unwrap();
        let cap = u0.sup_norm().max(1.0);
        for (_, f) in &traj.snapshots {
            assert!(f.sup_norm() <= cap + 1e-12);
            assert!(f.min() >= -1e-10, "positivity violated: {}", f.min());
            // Dirichlet nodes outside the ball stay exactly zero
            for i in 0..grid.num_nodes() {
                if grid.node_norm(i) >= 1.0 {
                    assert_eq!(f.values[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn nonlinearity_presets_satisfy_their_hypotheses() {
        let ws = Nonlinearity::bistable_cubic();
        assert!(ws.spot_check_lipschitz(1.5));
        assert!(ws.check_decay_at_zero());
        assert!((ws.f_u(0.0, ws.eps_threshold()) - (-ws.sigma())).abs() < 1e-12);
        let ball = Nonlinearity::logistic_cubic(4.0);
        assert!(ball.spot_check_lipschitz(1.5));
        assert!(ball.check_source_sign());
        // divided coefficient: removable singularity handled
        let c = ws.divided_coefficient(0.0, 0.3, 0.3 + 1e-14);
        assert_abs_diff_eq!(c, ws.f_u(0.0, 0.3), epsilon = 1e-6);
        let c = ws.divided_coefficient(0.0, 0.5, 0.1);
        assert_abs_diff_eq!(c, (ws.f(0.0, 0.5) - ws.f(0.0, 0.1)) / 0.4, epsilon = 1e-12);
    }

    #[test]
    fn ode_xi_linear_closed_form() {
        let nl = Nonlinearity::new(
            "double-decay",
            Arc::new(|_, u: f64| -2.0 * u),
            Arc::new(|_, _| -2.0),
            2.0,
            1.0,
            1.0,
            f64::INFINITY,
        );
        let rep = ode_xi(&nl, 0.0, 0.1, 5.0);
        assert_eq!(rep.status, CheckStatus::Pass);
        for &(t, xi) in &rep.samples {
            assert_abs_diff_eq!(xi, 0.1 * (-2.0 * t).exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn ode_xi_bistable_band_and_gates() {
        let nl = Nonlinearity::bistable_cubic();
        let rep = ode_xi(&nl, 0.0, 0.1, 20.0);
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.max_ratio <= 1.0 + 1e-6);
        // eps0 = 0 and eps0 outside the band are not claims
        assert_eq!(ode_xi(&nl, 0.0, 0.0, 5.0).status, CheckStatus::NotApplicable);
        assert_eq!(ode_xi(&nl, 0.0, 0.9, 5.0).status, CheckStatus::NotApplicable);
    }
}
