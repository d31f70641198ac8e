//! Simulate from known parameters, re-estimate on growing training windows
//! and score forecasts on the following observations.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mse_avg, mse_per_series};
use super::one_step;
use crate::error::Result;
use crate::estimation::{estimate, EstimateConfig};
use crate::seed;
use crate::state_space::{simulate, TimeSeriesPanel};
use crate::sw_model::{self, EstimatedVector, Param};

const DATA_STREAM: u64 = 1;
const ESTIMATE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimEstimateConfig {
    pub n_reps: usize,
    pub train_sizes: Vec<usize>,
    pub test_len: usize,
    pub burn_in: usize,
    /// Optimizer settings for every cell; the training length is set per cell.
    pub estimate: EstimateConfig,
    /// Add the true parameters as an optimizer start.
    pub start_at_truth: bool,
    pub seed: u64,
}

impl Default for SimEstimateConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl SimEstimateConfig {
    /// 100 replications, training sizes 100, 120, ..., 1100, 1000 test points,
    /// 30000 evaluations from the true parameters.
    pub fn paper() -> Self {
        let mut estimate = EstimateConfig::paper();
        estimate.optimizer.n_starts = 0;
        estimate.optimizer.budget = 30_000;
        Self {
            n_reps: 100,
            train_sizes: (100..=1100).step_by(20).collect(),
            test_len: 1000,
            burn_in: 1000,
            estimate,
            start_at_truth: true,
            seed: 0,
        }
    }

    pub fn desk() -> Self {
        let mut estimate = EstimateConfig::desk();
        estimate.optimizer.n_starts = 0;
        Self {
            n_reps: 10,
            train_sizes: vec![100, 150, 200, 300],
            test_len: 2000,
            estimate,
            ..Self::paper()
        }
    }

    /// Points simulated after burn-in per replication.
    pub fn sample_len(&self) -> usize {
        self.train_sizes.iter().copied().max().unwrap_or(0) + self.test_len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimateRecord {
    pub replication: usize,
    pub train_size: usize,
    /// Empty on success, otherwise the failure message; metrics are NaN then.
    pub error: String,
    pub theta_hat: Vec<f64>,
    pub penalized_nll: f64,
    pub n_evals: usize,
    pub train_mse_avg: f64,
    pub test_mse_avg: f64,
    pub test_mse_per_series: Vec<f64>,
    /// Mean squared error over parameters in bound-normalized coordinates.
    pub param_sq_err: f64,
    pub param_sq_err_raw: f64,
    pub nll_per_obs_train: f64,
    pub penalized_nll_per_obs_train: f64,
    pub nll_per_obs_test: f64,
    pub truth_test_mse_avg: f64,
    pub truth_test_mse_per_series: Vec<f64>,
    pub truth_nll_per_obs_test: f64,
}

/// Mean squared parameter error in normalized and raw coordinates.
pub fn param_sq_err(theta: &EstimatedVector, truth: &EstimatedVector) -> (f64, f64) {
    let n = Param::ALL.len() as f64;
    let norm = theta
        .normalized()
        .iter()
        .zip(truth.normalized())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n;
    let raw = theta
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n;
    (norm, raw)
}

struct Scores {
    train_mse: f64,
    test_mse: f64,
    test_per_series: Vec<f64>,
    test_nll: f64,
}

fn score(theta: &EstimatedVector, data: &TimeSeriesPanel, train: usize, test: usize, cfg: &EstimateConfig) -> Result<Scores> {
    let window = data.slice(0, train + test)?;
    let out = one_step(theta, &window, &cfg.solver)?;
    let actual = &window.values;
    let rows = |m: &DMatrix<f64>, a: usize, n: usize| m.rows(a, n).into_owned();
    Ok(Scores {
        train_mse: mse_avg(&rows(&out.predictions, 0, train), &rows(actual, 0, train))?,
        test_mse: mse_avg(&rows(&out.predictions, train, test), &rows(actual, train, test))?,
        test_per_series: mse_per_series(&rows(&out.predictions, train, test), &rows(actual, train, test))?,
        test_nll: out.per_step[train..].iter().sum::<f64>() / test as f64,
    })
}

fn cell(
    truth: &EstimatedVector,
    data: &TimeSeriesPanel,
    rep: usize,
    train: usize,
    cfg: &SimEstimateConfig,
) -> Result<SimEstimateRecord> {
    let mut est = cfg.estimate.clone();
    est.train_len = Some(train);
    est.optimizer.seed = seed::derive(cfg.seed, &[ESTIMATE_STREAM, rep as u64, train as u64]);
    let fit = estimate(data, &est, cfg.start_at_truth.then_some(truth))?;
    let s = score(&fit.theta_hat, data, train, cfg.test_len, &est)?;
    let t = score(truth, data, train, cfg.test_len, &est)?;
    let (norm, raw) = param_sq_err(&fit.theta_hat, truth);
    Ok(SimEstimateRecord {
        replication: rep,
        train_size: train,
        error: String::new(),
        theta_hat: fit.theta_hat.values().to_vec(),
        penalized_nll: fit.penalized_nll,
        n_evals: fit.n_evals,
        train_mse_avg: s.train_mse,
        test_mse_avg: s.test_mse,
        test_mse_per_series: s.test_per_series,
        param_sq_err: norm,
        param_sq_err_raw: raw,
        nll_per_obs_train: fit.unpenalized_nll / train as f64,
        penalized_nll_per_obs_train: fit.penalized_nll / train as f64,
        nll_per_obs_test: s.test_nll,
        truth_test_mse_avg: t.test_mse,
        truth_test_mse_per_series: t.test_per_series,
        truth_nll_per_obs_test: t.test_nll,
    })
}

fn failed_record(rep: usize, train: usize, why: String) -> SimEstimateRecord {
    SimEstimateRecord {
        replication: rep,
        train_size: train,
        error: why,
        theta_hat: vec![f64::NAN; Param::ALL.len()],
        penalized_nll: f64::NAN,
        n_evals: 0,
        train_mse_avg: f64::NAN,
        test_mse_avg: f64::NAN,
        test_mse_per_series: vec![f64::NAN; 7],
        param_sq_err: f64::NAN,
        param_sq_err_raw: f64::NAN,
        nll_per_obs_train: f64::NAN,
        penalized_nll_per_obs_train: f64::NAN,
        nll_per_obs_test: f64::NAN,
        truth_test_mse_avg: f64::NAN,
        truth_test_mse_per_series: vec![f64::NAN; 7],
        truth_nll_per_obs_test: f64::NAN,
    }
}

/// The simulated sample of replication `rep`, shared by all its training sizes.
pub fn replication_data(truth: &EstimatedVector, rep: usize, cfg: &SimEstimateConfig) -> Result<TimeSeriesPanel> {
    let ss = sw_model::state_space(truth, &cfg.estimate.solver)?;
    simulate(&ss, cfg.sample_len(), cfg.burn_in, seed::derive(cfg.seed, &[DATA_STREAM, rep as u64]))
}

/// One record per (replication, training size), ordered by replication then
/// size. Cell failures are recorded, not returned.
pub fn run_sim_estimate(truth: &EstimatedVector, cfg: &SimEstimateConfig) -> Result<Vec<SimEstimateRecord>> {
    sw_model::state_space(truth, &cfg.estimate.solver)?.require_stationary()?;
    let data: Vec<TimeSeriesPanel> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| replication_data(truth, rep, cfg))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.n_reps)
        .flat_map(|r| cfg.train_sizes.iter().map(move |&n| (r, n)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(rep, n)| cell(truth, &data[rep], rep, n, cfg).unwrap_or_else(|e| failed_record(rep, n, e.to_string())))
        .collect())
}
