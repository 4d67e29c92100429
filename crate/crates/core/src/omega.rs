//! Long-time limit detection over trajectories.
//!
//! A trajectory "has converged" when the sup-norm gaps between its last few
//! snapshots are all below tolerance; the final snapshot then stands in for
//! the limit profile. Multi-element limit sets are out of scope: anything
//! non-Cauchy is reported as NonConverged rather than guessed at.

use crate::error::EvolveError;
use crate::evolve::Trajectory;
use crate::field::Field;
use crate::CheckStatus;

/// Number of trailing snapshot gaps that must sit below tolerance; more than
/// one guards against slow transients masquerading as convergence.
const TRAILING_GAPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaStatus {
    Converged,
    NonConverged,
}

/// Candidate limit profile extracted from a trajectory tail.
#[derive(Debug, Clone)]
pub struct OmegaEstimate {
    pub phi: Field,
    /// Time of the snapshot adopted as the limit.
    pub t_converged: f64,
    /// Largest of the trailing sup-norm gaps.
    pub cauchy_gap: f64,
    pub status: OmegaStatus,
    /// The trailing gaps themselves, oldest first.
    pub gaps: Vec<f64>,
}

fn sup_gap(a: &Field, b: &Field) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Declares convergence when the last (up to 3) consecutive snapshot gaps are
/// all at most `tol_omega`; the limit candidate is the final snapshot.
pub fn omega_limit(traj: &Trajectory, tol_omega: f64) -> Result<OmegaEstimate, EvolveError> {
    let n = traj.snapshots.len();
    if n < 3 {
        return Err(EvolveError::TooFewSnapshots { need: 3, got: n });
    }
    let k = TRAILING_GAPS.min(n - 1);
    let gaps: Vec<f64> = (n - k..n)
        .map(|i| sup_gap(&traj.snapshots[i - 1].1, &traj.snapshots[i].1))
        .collect();
    let cauchy_gap = gaps.iter().fold(0.0f64, |m, &g| m.max(g));
    let (t_converged, phi) = traj.snapshots[n - 1].clone();
    Ok(OmegaEstimate {
        phi,
        t_converged,
        cauchy_gap,
        status: if cauchy_gap <= tol_omega {
            OmegaStatus::Converged
        } else {
            OmegaStatus::NonConverged
        },
        gaps,
    })
}

/// Result of [`liminf_check`].
#[derive(Debug, Clone)]
pub struct LiminfReport {
    pub status: CheckStatus,
    /// Max sup-norm over the late window (last half of snapshots).
    pub late_max: f64,
    /// Min sup-norm over the late window.
    pub late_min: f64,
    /// True when the check passed vacuously (the norm never exceeded the
    /// threshold late).
    pub vacuous: bool,
}

/// Checks the no-oscillation dichotomy on the late window: if the sup-norm
/// still exceeds `thresh` somewhere in the last half of snapshots, it must
/// stay bounded away from zero there (by `thresh / 10`). A trajectory that
/// alternates between order-one and near-zero norms fails.
pub fn liminf_check(traj: &Trajectory, thresh: f64) -> LiminfReport {
    let n = traj.snapshots.len();
    let norms: Vec<f64> = traj.snapshots[n / 2..]
        .iter()
        .map(|(_, f)| f.sup_norm())
        .collect();
    let late_max = norms.iter().fold(0.0f64, |m, &v| m.max(v));
    let late_min = norms.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if late_max <= thresh {
        return LiminfReport {
            status: CheckStatus::Pass,
            late_max,
            late_min,
            vacuous: true,
        };
    }
    LiminfReport {
        status: if late_min > thresh / 10.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        late_max,
        late_min,
        vacuous: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve, Nonlinearity};
    use crate::field::ExteriorSpec;
    use crate::fraclap::{build_kernel, FracOrder};
    use crate::grid::Grid;
    use std::sync::Arc;

    fn synthetic_traj(fields: Vec<Field>) -> Trajectory {
        let grid = fields[0].grid.clone();
        let boundary_ring = fields.iter().map(|f| f.boundary_ring_max()).collect();
        Trajectory {
            grid: grid.clone(),
            order: FracOrder::new(0.5).unwrap(),
            ext: ExteriorSpec::ZeroOutsideLattice,
            nl_name: "synthetic".into(),
            snapshots: fields
                .into_iter()
                .enumerate()
                .map(|(i, f)| (i as f64, f))
                .collect(),
            dt: 1.0,
            boundary_ring,
            steps: 0,
        }
    }

    fn bump_field(grid: &Arc<Grid>, amp: f64) -> Field {
        Field::from_fn(grid.clone(), ExteriorSpec::ZeroOutsideLattice, |p| {
            amp * (-p[0] * p[0]).exp()
        })
    }

    #[test]
    fn stationary_trajectory_converges_with_zero_gap() {
        let grid = Arc::new(Grid::build(1, 1.0, 0.25).unwrap());
        let traj = synthetic_traj(vec![bump_field(&grid, 1.0); 5]);
        let est = omega_limit(&traj, 1e-6).unwrap();
        assert_eq!(est.status, OmegaStatus::Converged);
        assert_eq!(est.cauchy_gap, 0.0);
        assert_eq!(est.phi.values, bump_field(&grid, 1.0).values);
    }

    #[test]
    fn decaying_run_converges_to_zero() {
        let grid = Arc::new(Grid::build(1, 1.0, 1.0 / 16.0).unwrap());
        let k = build_kernel(
            grid.clone(),
            FracOrder::new(0.5).unwrap(),
            ExteriorSpec::ZeroOutsideLattice,
        )
        .unwrap();
        let u0 = bump_field(&grid, 1.0);
        let traj = evolve(&u0, &Nonlinearity::linear_decay(), &k, 20.0, 1.0).unwrap();
        let est = omega_limit(&traj, 1e-6).unwrap();
        assert_eq!(est.status, OmegaStatus::Converged);
        assert!(est.phi.sup_norm() <= 1e-6);
        // gaps decay monotonically on the tail
        assert!(est.gaps.windows(2).all(|w| w[1] <= w[0]));
        // idempotence: the converged tail reports the same limit
        let tail = synthetic_traj(
            traj.snapshots[traj.snapshots.len() - 4..]
                .iter()
                .map(|(_, f)| f.clone())
                .collect(),
        );
        let est2 = omega_limit(&tail, 1e-6).unwrap();
        assert_eq!(est2.status, OmegaStatus::Converged);
        assert_eq!(est2.phi.values, est.phi.values);
        // limit sup-norm within tolerance of the final snapshot's
        assert!((est.phi.sup_norm() - traj.last().1.sup_norm()).abs() <= 1e-6);
    }

    #[test]
    fn oscillation_is_not_convergence() {
        let grid = Arc::new(Grid::build(1, 1.0, 0.25).unwrap());
        let fields: Vec<Field> = (0..8)
            .map(|i| bump_field(&grid, (i as f64).sin()))
            .collect();
        let traj = synthetic_traj(fields);
        let est = omega_limit(&traj, 1e-6).unwrap();
        assert_eq!(est.status, OmegaStatus::NonConverged);
        assert!(est.cauchy_gap > 1e-6);
    }

    #[test]
    fn too_few_snapshots_rejected() {
        let grid = Arc::new(Grid::build(1, 1.0, 0.25).unwrap());
        let traj = synthetic_traj(vec![bump_field(&grid, 1.0); 2]);
        assert!(matches!(
            omega_limit(&traj, 1e-6),
            Err(EvolveError::TooFewSnapshots { need: 3, got: 2 })
        ));
    }

    #[test]
    fn liminf_dichotomy() {
        let grid = Arc::new(Grid::build(1, 1.0, 0.25).unwrap());
        // converging to a positive profile: pass, not vacuous
        let pos = synthetic_traj(vec![bump_field(&grid, 1.0); 6]);
        let rep = liminf_check(&pos, 0.1);
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(!rep.vacuous);
        // converging to zero: vacuous pass
        let zero = synthetic_traj(vec![bump_field(&grid, 0.0); 6]);
        let rep = liminf_check(&zero, 0.1);
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.vacuous);
        // alternating norm 1 / 1e-9: the forbidden configuration
        let alt = synthetic_traj(
            (0..8)
                .map(|i| bump_field(&grid, if i % 2 == 0 { 1.0 } else { 1e-9 }))
                .collect(),
        );
        let rep = liminf_check(&alt, 0.1);
        assert_eq!(rep.status, CheckStatus::Fail);
    }
}
