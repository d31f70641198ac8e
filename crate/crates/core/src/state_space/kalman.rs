use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{eig_iter_cap, reduce, symmetrize, Reduced, StateSpace, TimeSeriesPanel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FilterOptions {
    /// Freeze the gain once the predicted covariance moves less than this
    /// (relative, max-norm) between steps. Zero disables the shortcut.
    pub steady_state_tol: f64,
    /// Track the smallest eigenvalue of every covariance update.
    pub check_psd: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            steady_state_tol: 1e-14,
            check_psd: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub total_nll: f64,
    pub per_step: Vec<f64>,
    /// One-step-ahead predictions of the observables, `T_obs × p`.
    pub predictions: DMatrix<f64>,
    /// Filtered state mean and covariance after the last observation.
    pub filtered_mean: DVector<f64>,
    pub filtered_cov: DMatrix<f64>,
    /// Smallest covariance eigenvalue seen, when requested.
    pub min_eigenvalue: Option<f64>,
}

/// Exact Gaussian negative log-likelihood, initialized at the stationary distribution.
pub fn kalman_nll(ss: &StateSpace, panel: &TimeSeriesPanel) -> Result<(f64, Vec<f64>)> {
    let out = kalman_filter(ss, panel)?;
    Ok((out.total_nll, out.per_step))
}

pub fn kalman_filter(ss: &StateSpace, panel: &TimeSeriesPanel) -> Result<FilterOutput> {
    kalman_filter_with(ss, panel, &FilterOptions::default())
}

pub fn kalman_filter_with(
    ss: &StateSpace,
    panel: &TimeSeriesPanel,
    opts: &FilterOptions,
) -> Result<FilterOutput> {
    if panel.n_series() != ss.n_obs() {
        return Err(Error::Dimension(format!(
            "panel has {} series, model observes {}",
            panel.n_series(),
            ss.n_obs()
        )));
    }
    let r = reduce(ss)?;
    let out = filter_reduced(&r, &panel.values, opts)?;
    let mean = &r.mean + &r.basis * &out.a;
    let cov = symmetrize(&(&r.basis * &out.p * r.basis.transpose()));
    Ok(FilterOutput {
        total_nll: out.per_step.iter().sum(),
        per_step: out.per_step,
        predictions: out.predictions,
        filtered_mean: mean,
        filtered_cov: cov,
        min_eigenvalue: out.min_eig,
    })
}

struct RunOutput {
    per_step: Vec<f64>,
    predictions: DMatrix<f64>,
    a: DVector<f64>,
    p: DMatrix<f64>,
    min_eig: Option<f64>,
}

fn min_eig(m: &DMatrix<f64>, step: usize) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, eig_iter_cap(m.nrows()))
        .ok_or_else(|| Error::FilterDiverged {
            step,
            reason: "covariance eigendecomposition did not converge".into(),
        })?;
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

fn filter_reduced(r: &Reduced, data: &DMatrix<f64>, opts: &FilterOptions) -> Result<RunOutput> {
    let n_obs = data.nrows();
    let p = r.z.nrows();
    let m = r.t.nrows();
    let log2pi = (2.0 * PI).ln();
    let ident = DMatrix::<f64>::identity(m, m);

    let mut a = DVector::zeros(m);
    let mut pp = r.cov0.clone();
    let mut per_step = Vec::with_capacity(n_obs);
    let mut predictions = DMatrix::zeros(n_obs, p);
    let mut lowest = if opts.check_psd { Some(min_eig(&pp, 0)?) } else { None };
    let mut a_filt = a.clone();
    let mut p_filt = pp.clone();

    // Frozen quantities once the covariance has converged.
    let mut steady: Option<(DMatrix<f64>, f64, DMatrix<f64>)> = None;

    for t in 0..n_obs {
        let y = data.row(t).transpose();
        let pred = &r.z * &a + &r.intercept;
        predictions.row_mut(t).copy_from(&pred.transpose());
        let v = y - pred;

        if let Some((finv, logdet, gain)) = &steady {
            let quad = v.dot(&(finv * &v));
            per_step.push(0.5 * (p as f64 * log2pi + logdet + quad));
            a_filt = &a + gain * &v;
            a = &r.t * &a_filt;
            continue;
        }

        let pzt = &pp * r.z.transpose();
        let f = symmetrize(&(&r.z * &pzt));
        let chol = f.clone().cholesky().ok_or_else(|| Error::FilterDiverged {
            step: t,
            reason: "innovation covariance is not positive definite".into(),
        })?;
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let finv_v = chol.solve(&v);
        let quad = v.dot(&finv_v);
        let nll = 0.5 * (p as f64 * log2pi + logdet + quad);
        if !nll.is_finite() {
            return Err(Error::FilterDiverged {
                step: t,
                reason: format!("non-finite likelihood contribution {nll}"),
            });
        }
        per_step.push(nll);

        // K = P Zᵀ F⁻¹, Joseph form without measurement error.
        let gain = chol.solve(&pzt.transpose()).transpose();
        a_filt = &a + &gain * &v;
        let imkz = &ident - &gain * &r.z;
        p_filt = symmetrize(&(&imkz * &pp * imkz.transpose()));
        let next = symmetrize(&(&r.t * &p_filt * r.t.transpose() + &r.noise));
        if let Some(low) = lowest.as_mut() {
            *low = low.min(min_eig(&p_filt, t)?).min(min_eig(&next, t)?);
        }

        a = &r.t * &a_filt;
        let moved = (&next - &pp).amax();
        pp = next;
        if opts.steady_state_tol > 0.0 && moved <= opts.steady_state_tol * pp.amax() {
            let finv = chol.inverse();
            steady = Some((finv, logdet, gain));
        }
    }

    if let Some(low) = lowest {
        if low < -1e-10 * pp.amax().max(1.0) {
            return Err(Error::FilterDiverged {
                step: n_obs,
                reason: format!("covariance lost positive semidefiniteness ({low:e})"),
            });
        }
    }

    Ok(RunOutput {
        per_step,
        predictions,
        a: a_filt,
        p: p_filt,
        min_eig: lowest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_space::Quarter;

    #[test]
    fn standard_normal_single_observation() {
        let ss = StateSpace::new(
            DVector::zeros(1),
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
        )
        .unwrap();
        let panel = TimeSeriesPanel::new(
            vec!["x".into()],
            vec![Quarter::new(2000, 1).unwrap()],
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let (nll, steps) = kalman_nll(&ss, &panel).unwrap();
        assert!((nll - 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        assert_eq!(steps.len(), 1);
    }
}
