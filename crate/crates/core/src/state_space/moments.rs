use nalgebra::{DMatrix, DVector};

use super::{symmetrize, StateSpace};
use crate::error::{Error, Result};

/// Solve `X = A X Aᵀ + W` by doubling. `A` must be stable.
pub fn lyapunov(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut x = symmetrize(w);
    let mut ak = a.clone();
    for _ in 0..100 {
        let step = &ak * &x * ak.transpose();
        x += &step;
        ak = &ak * &ak;
        let scale = x.amax().max(f64::MIN_POSITIVE);
        if step.amax() <= 1e-16 * scale && ak.amax() < 1e-8 {
            return Ok(symmetrize(&x));
        }
        if !ak.amax().is_finite() {
            break;
        }
    }
    Err(Error::NonStationary {
        radius: super::spectral_radius(a),
    })
}

pub(crate) fn moments_unchecked(ss: &StateSpace) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = ss.n_states();
    let mean = if ss.d.iter().all(|v| *v == 0.0) {
        DVector::zeros(n)
    } else {
        (DMatrix::identity(n, n) - &ss.t)
            .lu()
            .solve(&ss.d)
            .ok_or(Error::NonStationary { radius: 1.0 })?
    };
    let cov = lyapunov(&ss.t, &ss.state_noise())?;
    Ok((mean, cov))
}

/// Unconditional mean `(I − T)⁻¹ d` and covariance solving `P = T P Tᵀ + H Q Hᵀ`.
pub fn stationary_moments(ss: &StateSpace) -> Result<(DVector<f64>, DMatrix<f64>)> {
    ss.validate()?;
    ss.require_stationary()?;
    moments_unchecked(ss)
}
