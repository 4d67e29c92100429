//! Uniform cell-centered lattices with exact, index-level reflection symmetry.
//!
//! Nodes sit at coordinates `(k + 1/2) * h` per axis, so the lattice is
//! symmetric under `x -> -x` and no node ever lies on a reflection plane
//! `x_axis = lambda` when `lambda` is a multiple of `h`. Reflections across
//! such planes map nodes to nodes exactly, which keeps every antisymmetric
//! difference computed downstream exact at the data level.

use crate::error::GridError;

/// Tolerance for "is this length an exact multiple of h" checks.
const SNAP_TOL: f64 = 1e-9;

/// Uniform node lattice on the symmetric box `[-radius, radius]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    h: f64,
    radius: f64,
    /// Nodes per axis (even).
    n: usize,
}

/// Axis-aligned reflection plane `x_axis = lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneReflection {
    pub axis: usize,
    pub lambda: f64,
}

impl Grid {
    /// Builds a cell-centered lattice. `radius / h` must be an integer so the
    /// node layout is symmetric about the origin.
    pub fn build(dim: usize, radius: f64, h: f64) -> Result<Grid, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::BadDim(dim));
        }
        if h <= 0.0 {
            return Err(GridError::NonPositiveSpacing(h));
        }
        let cells = radius / h;
        if (cells - cells.round()).abs() > SNAP_TOL || cells.round() < 1.0 {
            return Err(GridError::NonIntegerNodeCount { radius, h });
        }
        let n = 2 * cells.round() as usize;
        Ok(Grid { dim, h, radius, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Nodes per axis.
    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    /// Total node count `n^dim`.
    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Coordinate of the `i`-th node along one axis: `(i - n/2 + 1/2) * h`.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64 / 2.0 + 0.5) * self.h
    }

    /// Multi-index of a flat node index (row-major, axis 0 slowest).
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    /// Flat index from a multi-index.
    #[inline]
    pub fn flat_index(&self, mi: [usize; 2]) -> usize {
        match self.dim {
            1 => mi[0],
            _ => mi[0] * self.n + mi[1],
        }
    }

    /// Coordinates of a node. The second component is 0 in 1D.
    #[inline]
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let mi = self.multi_index(idx);
        match self.dim {
            1 => [self.axis_coord(mi[0]), 0.0],
            _ => [self.axis_coord(mi[0]), self.axis_coord(mi[1])],
        }
    }

    /// Euclidean norm of a node's position.
    #[inline]
    pub fn node_norm(&self, idx: usize) -> f64 {
        let p = self.node(idx);
        (p[0] * p[0] + p[1] * p[1]).sqrt()
    }

    /// True when `lambda` is a multiple of `h` (so reflections across the
    /// plane map nodes to nodes exactly).
    pub fn plane_on_grid(&self, lambda: f64) -> bool {
        let k = lambda / self.h;
        (k - k.round()).abs() <= SNAP_TOL
    }

    /// Admissible plane offsets along an axis: every multiple of `h` strictly
    /// inside the lattice, `-radius < lambda < radius`.
    pub fn admissible_lambdas(&self) -> Vec<f64> {
        let half = self.n as i64 / 2;
        (-(half - 1)..half)
            .map(|k| k as f64 * self.h)
            .collect()
    }

    /// Reflects a node across an on-grid plane. Returns `None` when the image
    /// falls outside the lattice (the caller resolves it via the exterior
    /// condition).
    pub fn reflect_index(
        &self,
        plane: PlaneReflection,
        idx: usize,
    ) -> Result<Option<usize>, GridError> {
        if plane.axis >= self.dim {
            return Err(GridError::BadAxis {
                axis: plane.axis,
                dim: self.dim,
            });
        }
        if !self.plane_on_grid(plane.lambda) {
            return Err(GridError::PlaneOffGrid(plane.lambda));
        }
        let k = (plane.lambda / self.h).round() as i64;
        let mut mi = self.multi_index(idx);
        // x = (i - n/2 + 1/2) h, image 2*lambda - x => i' = 2k + n - 1 - i.
        let i = mi[plane.axis] as i64;
        let i_ref = 2 * k + self.n as i64 - 1 - i;
        if i_ref < 0 || i_ref >= self.n as i64 {
            return Ok(None);
        }
        mi[plane.axis] = i_ref as usize;
        Ok(Some(self.flat_index(mi)))
    }
}

/// One bin of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBin {
    /// Bin midpoint radius.
    pub r: f64,
    pub mean: f64,
    /// `max |value - mean|` over nodes in the bin.
    pub max_dev: f64,
    pub count: usize,
}

/// Bins node values by distance from `center` with bin width `h`.
pub fn radial_profile(
    grid: &Grid,
    values: &[f64],
    center: [f64; 2],
) -> Result<Vec<RadialBin>, GridError> {
    if values.len() != grid.num_nodes() {
        return Err(GridError::SizeMismatch {
            expected: grid.num_nodes(),
            got: values.len(),
        });
    }
    if values.is_empty() {
        return Err(GridError::EmptyField);
    }
    if center[0].abs() > grid.radius() || center[1].abs() > grid.radius() {
        return Err(GridError::CenterOutsideLattice);
    }
    let h = grid.h();
    let max_r = 2.0 * grid.radius() * (grid.dim() as f64).sqrt();
    let nbins = (max_r / h).ceil() as usize + 1;
    let mut sum = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    let mut bin_of = vec![0usize; values.len()];
    for idx in 0..values.len() {
        let p = grid.node(idx);
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        let r = (dx * dx + dy * dy).sqrt();
        let b = (r / h).floor() as usize;
        bin_of[idx] = b;
        sum[b] += values[idx];
        count[b] += 1;
    }
    let mean: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let mut max_dev = vec![0.0f64; nbins];
    for idx in 0..values.len() {
        let b = bin_of[idx];
        let d = (values[idx] - mean[b]).abs();
        if d > max_dev[b] {
            max_dev[b] = d;
        }
    }
    Ok((0..nbins)
        .filter(|&b| count[b] > 0)
        .map(|b| RadialBin {
            r: (b as f64 + 0.5) * h,
            mean: mean[b],
            max_dev: max_dev[b],
            count: count[b],
        })
        .collect())
}
