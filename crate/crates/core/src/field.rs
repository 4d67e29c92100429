//! Scalar fields on a lattice plus the exterior condition attached to them.

use std::sync::Arc;

use crate::error::GridError;
use crate::grid::Grid;

/// What the field is declared to be outside the region it is defined on.
/// Both variants treat everything beyond the lattice box as zero; the ball
/// variant additionally pins every lattice node outside the unit ball to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorSpec {
    /// Homogeneous Dirichlet complement condition on the unit ball: the field
    /// vanishes identically outside `B_1(0)`.
    ZeroOutsideBall,
    /// Truncated whole-space regime: the field is treated as zero beyond the
    /// lattice box, with the truncation residual reported as a diagnostic.
    ZeroOutsideLattice,
}

/// Scalar values on the nodes of a [`Grid`] at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub ext: ExteriorSpec,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, ext: ExteriorSpec) -> Result<Field, GridError> {
        if values.len() != grid.num_nodes() {
            return Err(GridError::SizeMismatch {
                expected: grid.num_nodes(),
                got: values.len(),
            });
        }
        Ok(Field { grid, values, ext })
    }

    pub fn zeros(grid: Arc<Grid>, ext: ExteriorSpec) -> Field {
        let n = grid.num_nodes();
        Field {
            grid,
            values: vec![0.0; n],
            ext,
        }
    }

    /// Samples a function of position onto the lattice.
    pub fn from_fn(grid: Arc<Grid>, ext: ExteriorSpec, f: impl Fn([f64; 2]) -> f64) -> Field {
        let values = (0..grid.num_nodes()).map(|i| f(grid.node(i))).collect();
        Field { grid, values, ext }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Zeroes every node required to vanish by the exterior condition
    /// (nodes outside the unit ball for the Dirichlet-ball regime).
    pub fn impose_exterior(&mut self) {
        if self.ext == ExteriorSpec::ZeroOutsideBall {
            for idx in 0..self.values.len() {
                if self.grid.node_norm(idx) >= 1.0 {
                    self.values[idx] = 0.0;
                }
            }
        }
    }

    /// Max |value| over the outermost ring of lattice nodes (truncation
    /// diagnostic for whole-space runs).
    pub fn boundary_ring_max(&self) -> f64 {
        let n = self.grid.n_per_axis();
        let mut m = 0.0f64;
        for idx in 0..self.values.len() {
            let mi = self.grid.multi_index(idx);
            let on_ring = (0..self.grid.dim()).any(|a| mi[a] == 0 || mi[a] == n - 1);
            if on_ring {
                m = m.max(self.values[idx].abs());
            }
        }
        m
    }
}
