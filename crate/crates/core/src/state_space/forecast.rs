use nalgebra::{DMatrix, DVector};

use super::{symmetrize, StateSpace};
use crate::error::{Error, Result};

/// Multi-step predictions of the observables.
#[derive(Debug, Clone)]
pub struct Forecast {
    /// `horizon × p` mean path.
    pub mean: DMatrix<f64>,
    /// Predictive covariance of the observables at each horizon; empty when
    /// only the mean path was requested.
    pub cov: Vec<DMatrix<f64>>,
}

/// Iterate the state mean (and covariance) forward from a filtered state,
/// without conditioning on anything after it.
pub fn forecast(
    ss: &StateSpace,
    state: (&DVector<f64>, &DMatrix<f64>),
    horizon: usize,
) -> Result<Forecast> {
    forecast_impl(ss, state.0, Some(state.1), horizon)
}

/// Mean path only.
pub fn forecast_mean(ss: &StateSpace, mean: &DVector<f64>, horizon: usize) -> Result<Forecast> {
    forecast_impl(ss, mean, None, horizon)
}

fn forecast_impl(
    ss: &StateSpace,
    mean: &DVector<f64>,
    cov: Option<&DMatrix<f64>>,
    horizon: usize,
) -> Result<Forecast> {
    ss.validate()?;
    if horizon == 0 {
        return Err(Error::Invalid("forecast horizon must be at least 1".into()));
    }
    if mean.len() != ss.n_states() || cov.is_some_and(|c| c.shape() != (mean.len(), mean.len())) {
        return Err(Error::Dimension("filtered state does not match the model".into()));
    }
    let mut m = mean.clone();
    let mut p = cov.cloned();
    let noise = p.as_ref().map(|_| ss.state_noise());
    let mut out = DMatrix::zeros(horizon, ss.n_obs());
    let mut covs = Vec::new();
    for h in 0..horizon {
        m = &ss.d + &ss.t * &m;
        let y = &ss.z * &m + &ss.mu;
        out.row_mut(h).copy_from(&y.transpose());
        if let (Some(pm), Some(w)) = (p.as_mut(), noise.as_ref()) {
            *pm = symmetrize(&(&ss.t * &*pm * ss.t.transpose() + w));
            covs.push(symmetrize(&(&ss.z * &*pm * ss.z.transpose())));
        }
    }
    Ok(Forecast {
        mean: out,
        cov: covs,
    })
}
