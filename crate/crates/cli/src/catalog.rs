//! Stable catalogs of nonlinearity and initial-data presets.

use std::sync::Arc;

use movplane_core::{ExteriorSpec, Field, Grid, Nonlinearity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ParamSpec;

/// Nonlinearity catalog entries: `(id, signature, notes)`.
pub fn nonlinearity_catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("zero", "f = 0", "pure nonlocal diffusion"),
        (
            "linear-decay",
            "f(u) = -u",
            "decay margin sigma = 1 (exact exponential bound)",
        ),
        (
            "schrodinger-p3",
            "f(u) = u^3 - u",
            "cubic focusing reaction; f(0) = 0, f'(0) = -1 < -1/2; \
             decay band |u| < 1/sqrt(6)",
        ),
        (
            "ball-logistic",
            "f(u) = a (u - u^3)",
            "source-positive reaction for the unit-ball runs (f(0) = 0 >= 0); \
             amplitude a (param 0, default 6) is chosen above the principal \
             nonlocal eigenvalue so a nontrivial positive limit exists at \
             desk scale",
        ),
    ]
}

/// Initial-data catalog entries: `(id, params, notes)`.
pub fn initial_catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        (
            "seeded-bumps",
            "[]",
            "sum of three seeded positive off-center bumps, zeroed outside \
             the unit ball; asymmetric with probability 1",
        ),
        (
            "offset-gaussian",
            "[amp, center]",
            "positive gaussian at the given center with a seeded asymmetric \
             modulation; default amp 0.4 keeps |u| < 1, inside the basin of \
             the zero state for f(u) = u^3 - u, so the whole-space run \
             demonstrates the zero branch of the symmetry dichotomy",
        ),
        (
            "poisson-kernel",
            "[t0]",
            "P_t0(x) = t0 / (pi (t0^2 + x^2)); exact flow of the order-1/2 \
             operator is P_{t0 + t} (1D)",
        ),
        (
            "bump-power",
            "[s]",
            "(1 - |x|^2)_+^s, the profile with constant operator value inside \
             the unit ball",
        ),
    ]
}

pub fn nonlinearity(spec: &ParamSpec) -> Option<Nonlinearity> {
    let p = |i: usize, default: f64| spec.params.get(i).copied().unwrap_or(default);
    match spec.id.as_str() {
        "zero" => Some(Nonlinearity::zero()),
        "linear-decay" => Some(Nonlinearity::new(
            "linear-decay",
            Arc::new(|_, u: f64| -u),
            Arc::new(|_, _| -1.0),
            1.0,
            1.0,
            1.0,
            f64::INFINITY,
        )),
        "schrodinger-p3" => Some(Nonlinearity::bistable_cubic()),
        "ball-logistic" => Some(Nonlinearity::logistic_cubic(p(0, 6.0))),
        _ => None,
    }
}

pub fn initial_data_exists(id: &str) -> bool {
    initial_catalog().iter().any(|(name, _, _)| *name == id)
}

pub fn initial_data(
    spec: &ParamSpec,
    grid: &Arc<Grid>,
    ext: ExteriorSpec,
    seed: u64,
) -> Option<Field> {
    let p = |i: usize, default: f64| spec.params.get(i).copied().unwrap_or(default);
    let dim = grid.dim();
    let field = match spec.id.as_str() {
        "seeded-bumps" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bumps = Vec::new();
            for _ in 0..3 {
                let a = rng.gen_range(0.3..0.9);
                let cx = rng.gen_range(-0.5..0.5);
                let cy = if dim == 2 { rng.gen_range(-0.5..0.5) } else { 0.0 };
                let w = rng.gen_range(0.03..0.15);
                bumps.push((a, cx, cy, w));
            }
            let mut f = Field::from_fn(grid.clone(), ext, move |x| {
                bumps
                    .iter()
                    .map(|&(a, cx, cy, w)| {
                        let d2 = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
                        a * (-d2 / w).exp()
                    })
                    .sum()
            });
            f.impose_exterior();
            f
        }
        "offset-gaussian" => {
            let amp = p(0, 0.4);
            let c = p(1, 0.5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a1: f64 = rng.gen_range(0.1..0.3);
            let a2: f64 = rng.gen_range(0.05..0.2);
            Field::from_fn(grid.clone(), ext, move |x| {
                let d = x[0] - c;
                let base = (-2.0 * d * d).exp();
                // modulation bounded by 0.5, keeping the data positive
                amp * base * (1.0 + a1 * d.tanh() + a2 * (3.0 * d).sin() * (-d * d).exp())
            })
        }
        "poisson-kernel" => {
            let t0 = p(0, 1.0);
            Field::from_fn(grid.clone(), ext, move |x| {
                t0 / (std::f64::consts::PI * (t0 * t0 + x[0] * x[0]))
            })
        }
        "bump-power" => {
            let s = p(0, 0.5);
            Field::from_fn(grid.clone(), ext, move |x| {
                let d2 = 1.0 - x[0] * x[0] - x[1] * x[1];
                if d2 > 0.0 {
                    d2.powf(s)
                } else {
                    0.0
                }
            })
        }
        _ => return None,
    };
    Some(field)
}
