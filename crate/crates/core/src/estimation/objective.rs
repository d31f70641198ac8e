//! The prior-penalized negative log-likelihood of the model.

use crate::lre_solver::SolverConfig;
use crate::state_space::{kalman_nll, TimeSeriesPanel};
use crate::sw_model::{self, prior_log_density, EstimatedVector};

use super::SENTINEL;

/// Weight of the squared bound-width distance added to the sentinel.
const BOUND_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Penalized NLL, or a sentinel of at least `SENTINEL`.
    pub penalized: f64,
    pub unpenalized: Option<f64>,
    pub log_prior: Option<f64>,
    pub failure: Option<String>,
}

impl Evaluation {
    pub fn is_failure(&self) -> bool {
        self.failure.is_some()
    }
}

pub fn sentinel(theta: &EstimatedVector) -> f64 {
    SENTINEL + BOUND_PENALTY * theta.bound_violation()
}

fn failed(theta: &EstimatedVector, why: String) -> Evaluation {
    Evaluation {
        penalized: sentinel(theta),
        unpenalized: None,
        log_prior: None,
        failure: Some(why),
    }
}

pub fn evaluate(theta: &EstimatedVector, panel: &TimeSeriesPanel, solver: &SolverConfig) -> Evaluation {
    if !theta.in_support() {
        return failed(theta, "outside the parameter bounds".into());
    }
    let log_prior = prior_log_density(theta);
    if !log_prior.is_finite() {
        return failed(theta, "prior density is zero".into());
    }
    let nll = sw_model::state_space(theta, solver).and_then(|ss| kalman_nll(&ss, panel));
    match nll {
        Ok((nll, _)) if nll.is_finite() => Evaluation {
            penalized: nll - log_prior,
            unpenalized: Some(nll),
            log_prior: Some(log_prior),
            failure: None,
        },
        Ok((nll, _)) => failed(theta, format!("non-finite likelihood {nll}")),
        Err(e) => failed(theta, e.to_string()),
    }
}

/// `kalman_nll − prior_log_density`, or the sentinel when the model does
/// not solve uniquely or the filter fails.
pub fn penalized_nll(theta: &EstimatedVector, panel: &TimeSeriesPanel) -> f64 {
    evaluate(theta, panel, &SolverConfig::default()).penalized
}
