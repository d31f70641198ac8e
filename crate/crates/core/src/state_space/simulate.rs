use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{moments, Quarter, StateSpace, TimeSeriesPanel};
use crate::error::Result;
use crate::seed;

/// First date of simulated panels.
pub const SIM_START: Quarter = Quarter { year: 1900, q: 1 };

/// Simulated states `n × n_states`, starting from the stationary mean and
/// dropping the first `burn_in` draws.
pub fn simulate_states(ss: &StateSpace, n: usize, burn_in: usize, seed: u64) -> Result<DMatrix<f64>> {
    ss.validate()?;
    ss.require_stationary()?;
    let (mean, _) = moments::moments_unchecked(ss)?;
    let mut rng = seed::rng(seed);
    let sd: Vec<f64> = ss.q.iter().map(|v| v.sqrt()).collect();
    let k = sd.len();
    let mut z = mean;
    let mut eps = DVector::zeros(k);
    let mut out = DMatrix::zeros(n, ss.n_states());
    for step in 0..burn_in + n {
        for (e, s) in eps.iter_mut().zip(&sd) {
            let draw: f64 = StandardNormal.sample(&mut rng);
            *e = draw * s;
        }
        z = &ss.d + &ss.t * &z + &ss.h * &eps;
        if step >= burn_in {
            out.row_mut(step - burn_in).copy_from(&z.transpose());
        }
    }
    Ok(out)
}

/// Simulated observables with canonical series names, dated from 1900Q1.
pub fn simulate(ss: &StateSpace, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeriesPanel> {
    let states = simulate_states(ss, n, burn_in, seed)?;
    let mut obs = &states * ss.z.transpose();
    for mut row in obs.row_iter_mut() {
        row += ss.mu.transpose();
    }
    if obs.ncols() == super::SERIES.len() {
        TimeSeriesPanel::canonical(SIM_START, obs)
    } else {
        let names = (0..obs.ncols()).map(|i| format!("x{i}")).collect();
        let dates = (0..n as i64).map(|k| SIM_START.offset(k)).collect();
        TimeSeriesPanel::new(names, dates, obs)
    }
}
