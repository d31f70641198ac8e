//! Linear Gaussian state-space models:
//! `z_t = d + T z_{t-1} + H ε_t`, `ε_t ~ N(0, Q)`, `x_t = Z z_t + μ`.

mod entropy;
mod forecast;
mod kalman;
mod moments;
mod panel;
mod simulate;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lre_solver::EuFlag;

pub use entropy::{entropy_rate, riccati_innovation_cov};
pub use forecast::{forecast, forecast_mean, Forecast};
pub use kalman::{kalman_filter, kalman_filter_with, kalman_nll, FilterOptions, FilterOutput};
pub use moments::{lyapunov, stationary_moments};
pub use panel::{Quarter, TimeSeriesPanel, SERIES};
pub use simulate::{simulate, simulate_states, SIM_START};

/// Spectral radius below which a transition counts as stationary.
pub const STATIONARY_RADIUS: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub d: DVector<f64>,
    pub t: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// Diagonal of the shock covariance `Q`.
    pub q: DVector<f64>,
    pub z: DMatrix<f64>,
    pub mu: DVector<f64>,
    pub existence: EuFlag,
    pub uniqueness: EuFlag,
}

impl StateSpace {
    pub fn new(
        d: DVector<f64>,
        t: DMatrix<f64>,
        h: DMatrix<f64>,
        q: DVector<f64>,
        z: DMatrix<f64>,
        mu: DVector<f64>,
    ) -> Result<Self> {
        let ss = Self {
            d,
            t,
            h,
            q,
            z,
            mu,
            existence: EuFlag::Yes,
            uniqueness: EuFlag::Yes,
        };
        ss.validate()?;
        Ok(ss)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.nrows();
        let k = self.q.len();
        let p = self.z.nrows();
        let ok = self.t.ncols() == n
            && self.d.len() == n
            && self.h.shape() == (n, k)
            && self.z.ncols() == n
            && self.mu.len() == p;
        if !ok {
            return Err(Error::Dimension(format!(
                "d {}, T {:?}, H {:?}, Q {}, Z {:?}, mu {}",
                self.d.len(),
                self.t.shape(),
                self.h.shape(),
                k,
                self.z.shape(),
                self.mu.len()
            )));
        }
        if self.q.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Invalid("shock variances must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.t.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.z.nrows()
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.q)
    }

    /// `H Q Hᵀ`.
    pub fn state_noise(&self) -> DMatrix<f64> {
        let hs = DMatrix::from_fn(self.h.nrows(), self.h.ncols(), |i, j| {
            self.h[(i, j)] * self.q[j].sqrt()
        });
        &hs * hs.transpose()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.t)
    }

    pub fn require_stationary(&self) -> Result<()> {
        let radius = self.spectral_radius();
        if !(radius < STATIONARY_RADIUS) {
            return Err(Error::NonStationary { radius });
        }
        Ok(())
    }
}

pub fn spectral_radius(t: &DMatrix<f64>) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    let Some(schur) = t.clone().try_schur(f64::EPSILON, eig_iter_cap(t.nrows())) else {
        return f64::NAN;
    };
    schur
        .complex_eigenvalues()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Iteration cap for the iterative eigen and singular value routines. nalgebra
/// loops forever by default when they fail to converge (e.g. on NaN input).
pub(crate) fn eig_iter_cap(n: usize) -> usize {
    100 * n.max(1)
}

/// The model restricted to the subspace spanned by its stationary covariance.
///
/// With `z_t = m + U a_t`, the reduced system is `a_t = Uᵀ T U a_{t-1} + Uᵀ H ε_t`
/// and `x_t = Z U a_t + (Z m + μ)`. The range of the covariance is invariant
/// under `T` and contains `H`, so the reduction is exact.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub basis: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub t: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub intercept: DVector<f64>,
    /// Stationary covariance of `a`.
    pub cov0: DMatrix<f64>,
}

/// Relative eigenvalue cutoff for the reachable subspace.
const REDUCE_TOL: f64 = 1e-13;

pub(crate) fn reduce(ss: &StateSpace) -> Result<Reduced> {
    ss.validate()?;
    ss.require_stationary()?;
    let (mean, cov) = moments::moments_unchecked(ss)?;
    let eig = cov
        .clone()
        .try_symmetric_eigen(f64::EPSILON, eig_iter_cap(cov.nrows()))
        .ok_or_else(|| Error::DecompFail("stationary covariance eigendecomposition did not converge".into()))?;
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > REDUCE_TOL * lmax)
        .collect();
    keep.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let basis = eig.eigenvectors.select_columns(&keep);
    let bt = basis.transpose();
    let t = &bt * &ss.t * &basis;
    let noise = &bt * ss.state_noise() * &basis;
    let z = &ss.z * &basis;
    let intercept = &ss.z * &mean + &ss.mu;
    let cov0 = symmetrize(&(&bt * &cov * &basis));
    Ok(Reduced {
        basis,
        mean,
        t,
        noise: symmetrize(&noise),
        z,
        intercept,
        cov0,
    })
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_transition_is_rejected_not_looped() {
        let mut t = DMatrix::from_fn(6, 6, |i, j| 0.1 * (i as f64 - j as f64));
        t[(2, 3)] = f64::NAN;
        assert!(spectral_radius(&t).is_nan());
        t[(2, 3)] = f64::INFINITY;
        assert!(spectral_radius(&t).is_nan());
    }

    #[test]
    fn reduction_drops_unreachable_states() {
        // Second state is deterministic and decays to zero: not reachable.
        let ss = StateSpace::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.3]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DVector::from_element(1, 1.0),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::zeros(1),
        )
        .unwrap();
        let r = reduce(&ss).unwrap();
        assert_eq!(r.basis.ncols(), 1);
        assert!((r.t[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((r.cov0[(0, 0)] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn nonstationary_is_rejected() {
        let ss = StateSpace::new(
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
        )
        .unwrap();
        assert!(matches!(reduce(&ss), Err(Error::NonStationary { .. })));
    }
}
