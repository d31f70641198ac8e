use std::f64::consts::{E, PI};

use nalgebra::DMatrix;

use super::{reduce, symmetrize, Reduced, StateSpace};
use crate::error::{Error, Result};

const RICCATI_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 200;
const MAX_ITER: usize = 1_000_000;

/// Steady-state innovation covariance `F = Z P Zᵀ` of the Kalman filter,
/// with `P` the fixed point of the prediction Riccati recursion.
///
/// Observations are exact, so the recursion is rewritten on the filtered
/// covariance `Σ` with the next observation as the measurement:
/// `x_{t+1} = Z T a_t + Z w_{t+1}`, whose noise `Z W Zᵀ` is nonsingular when
/// the shocks span the observables. That form is solved by structured
/// doubling, which stays fast when the observables are over-differenced and
/// the plain recursion only converges like `1/k`.
pub fn riccati_innovation_cov(ss: &StateSpace) -> Result<DMatrix<f64>> {
    let r = reduce(ss)?;
    match doubling(&r)? {
        Some(f) => Ok(f),
        None => iterate(&r),
    }
}

fn converged(f: &DMatrix<f64>, prev: &DMatrix<f64>) -> bool {
    (f - prev).amax() <= 1e-2 * RICCATI_TOL * f.amax()
}

fn doubling(r: &Reduced) -> Result<Option<DMatrix<f64>>> {
    let m = r.t.nrows();
    let w = &r.noise;
    let rn = symmetrize(&(&r.z * w * r.z.transpose()));
    let Some(rchol) = rn.clone().cholesky() else {
        return Ok(None);
    };
    let c = &r.z * &r.t;
    let s = w * r.z.transpose();
    // Decorrelate measurement and state noise.
    let a_tilde = &r.t - &s * rchol.solve(&c);
    let w_tilde = symmetrize(&(w - &s * rchol.solve(&s.transpose())));

    let ident = DMatrix::<f64>::identity(m, m);
    let mut a = a_tilde.transpose();
    let mut g = symmetrize(&(c.transpose() * rchol.solve(&c)));
    let mut h = w_tilde;
    let innovation = |sigma: &DMatrix<f64>| symmetrize(&(&c * sigma * c.transpose() + &rn));
    let mut f_prev = innovation(&h);
    for _ in 0..MAX_DOUBLINGS {
        let lu = (&ident + &g * &h).lu();
        let (Some(ma), Some(mg)) = (lu.solve(&a), lu.solve(&g)) else {
            return Err(Error::RiccatiDiverged { iterations: 0 });
        };
        let a_next = &a * &ma;
        let g_next = symmetrize(&(&g + &a * mg * a.transpose()));
        let h_next = symmetrize(&(&h + a.transpose() * &h * &ma));
        a = a_next;
        g = g_next;
        h = h_next;
        if !h.amax().is_finite() {
            return Err(Error::RiccatiDiverged { iterations: 0 });
        }
        let f = innovation(&h);
        if converged(&f, &f_prev) {
            return Ok(Some(f));
        }
        f_prev = f;
    }
    Err(Error::RiccatiDiverged {
        iterations: MAX_DOUBLINGS,
    })
}

fn iterate(r: &Reduced) -> Result<DMatrix<f64>> {
    let mut p = r.cov0.clone();
    let mut f_prev: Option<DMatrix<f64>> = None;
    for i in 0..MAX_ITER {
        let pzt = &p * r.z.transpose();
        let f = symmetrize(&(&r.z * &pzt));
        if f_prev.as_ref().is_some_and(|prev| converged(&f, prev)) {
            return Ok(f);
        }
        let chol = f
            .clone()
            .cholesky()
            .ok_or(Error::RiccatiDiverged { iterations: i })?;
        let p_filt = &p - &pzt * chol.solve(&pzt.transpose());
        p = symmetrize(&(&r.t * p_filt * r.t.transpose() + &r.noise));
        if !p.amax().is_finite() {
            return Err(Error::RiccatiDiverged { iterations: i });
        }
        f_prev = Some(f);
    }
    Err(Error::RiccatiDiverged {
        iterations: MAX_ITER,
    })
}

/// Entropy rate per time step, `½ log det(2πe F)`.
pub fn entropy_rate(ss: &StateSpace) -> Result<f64> {
    let f = riccati_innovation_cov(ss)?;
    let p = f.nrows() as f64;
    let chol = f.cholesky().ok_or(Error::RiccatiDiverged { iterations: 0 })?;
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(0.5 * (p * (2.0 * PI * E).ln() + logdet))
}
