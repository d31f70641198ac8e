//! Smets-Wouters (2007) parameters, priors and linear system.

pub mod params;
pub mod prior;
pub mod system;

pub use params::{
    estimated_specs, expand_params, expand_with_fixed, param_table, Coefficients, EstimatedVector, FixedParams, FullParams,
    Param, ParamSpec, Role, SteadyState,
};
pub use prior::{prior_log_density, sample_prior, Prior, PriorFamily};
pub use system::{build_system, ObservationMap, State, N_EXPECTATIONS, N_OBS, N_SHOCKS, N_STATES};
pub use crate::lre_solver::LinearREModel;

use nalgebra::DVector;

use crate::error::Result;
use crate::lre_solver::{gensys_with, SolvedTransition, SolverConfig};
use crate::state_space::StateSpace;

/// Solve the model at `full` and return the solved transition with the observation map.
pub fn solve_full(full: &FullParams, cfg: &SolverConfig) -> Result<(SolvedTransition, ObservationMap)> {
    let (model, obs) = build_system(full);
    Ok((gensys_with(&model, cfg)?, obs))
}

/// State-space form at `theta`. Fails unless the solution exists and is unique.
///
/// The solved impact matrix carries the shock standard deviations; they are
/// moved into `Q = diag(σ²)` so that `H` has unit-shock columns.
pub fn state_space(theta: &EstimatedVector, cfg: &SolverConfig) -> Result<StateSpace> {
    let full = expand_params(theta);
    let (sol, obs) = solve_full(&full, cfg)?;
    if let Some(e) = sol.eu_error() {
        return Err(e);
    }
    let sds = full.shock_sds();
    let mut h = sol.h;
    for (j, s) in sds.iter().enumerate() {
        let mut col = h.column_mut(j);
        if *s == 0.0 {
            col.fill(0.0);
        } else {
            col /= *s;
        }
    }
    Ok(StateSpace {
        d: sol.d,
        t: sol.t,
        h,
        q: DVector::from_iterator(sds.len(), sds.iter().map(|s| s * s)),
        z: obs.z,
        mu: obs.mu,
        existence: sol.existence,
        uniqueness: sol.uniqueness,
    })
}
