//! Re-estimation on panels whose series have been relabeled.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{log_sse_ratios, mse_per_series, scaled_mse_per_series};
use super::one_step;
use super::permutation::Permutation;
use crate::error::{Error, Result};
use crate::estimation::{estimate, EstimateConfig, FitResult};
use crate::state_space::TimeSeriesPanel;
use crate::sw_model::Param;

/// Rows a permutation study needs.
pub const MIN_ROWS: usize = 251;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationRecord {
    pub rank: usize,
    pub mapping: String,
    pub error: String,
    pub theta_hat: Vec<f64>,
    pub penalized_nll_train: f64,
    pub unpenalized_nll_train: f64,
    pub n_evals: usize,
    pub avg_pct_improvement: f64,
    pub avg_scaled_mse: f64,
    /// Out-of-sample negative log predictive likelihood over the test rows.
    pub predictive_nll: f64,
    /// Per canonical series (not per slot).
    pub per_series_mse: Vec<f64>,
    pub per_series_pct_improvement: Vec<f64>,
    pub per_series_scaled_mse: Vec<f64>,
}

/// Test-window one-step predictions in canonical series order.
struct Forecast {
    pred: DMatrix<f64>,
    predictive_nll: f64,
}

fn forecast(fit: &FitResult, perm: &Permutation, panel: &TimeSeriesPanel, train: usize, cfg: &EstimateConfig) -> Result<Forecast> {
    let seen = perm.apply(panel)?;
    let out = one_step(&fit.theta_hat, &seen, &cfg.solver)?;
    let test = panel.len() - train;
    Ok(Forecast {
        pred: perm.unapply_matrix(&out.predictions.rows(train, test).into_owned()),
        predictive_nll: out.per_step[train..].iter().sum(),
    })
}

fn record(
    perm: &Permutation,
    fit: &FitResult,
    fc: &Forecast,
    base: &Forecast,
    actual: &DMatrix<f64>,
) -> Result<PermutationRecord> {
    let ratios = log_sse_ratios(&fc.pred, &base.pred, actual)?;
    let scaled = scaled_mse_per_series(&fc.pred, actual)?;
    Ok(PermutationRecord {
        rank: perm.rank,
        mapping: perm.label(),
        error: String::new(),
        theta_hat: fit.theta_hat.values().to_vec(),
        penalized_nll_train: fit.penalized_nll,
        unpenalized_nll_train: fit.unpenalized_nll,
        n_evals: fit.n_evals,
        avg_pct_improvement: ratios.iter().sum::<f64>() / 7.0,
        avg_scaled_mse: scaled.iter().sum::<f64>() / 7.0,
        predictive_nll: fc.predictive_nll,
        per_series_mse: mse_per_series(&fc.pred, actual)?,
        per_series_pct_improvement: ratios,
        per_series_scaled_mse: scaled,
    })
}

fn failed_record(perm: &Permutation, why: String) -> PermutationRecord {
    PermutationRecord {
        rank: perm.rank,
        mapping: perm.label(),
        error: why,
        theta_hat: vec![f64::NAN; Param::ALL.len()],
        penalized_nll_train: f64::NAN,
        unpenalized_nll_train: f64::NAN,
        n_evals: 0,
        avg_pct_improvement: f64::NAN,
        avg_scaled_mse: f64::NAN,
        predictive_nll: f64::NAN,
        per_series_mse: vec![f64::NAN; 7],
        per_series_pct_improvement: vec![f64::NAN; 7],
        per_series_scaled_mse: vec![f64::NAN; 7],
    }
}

/// Estimate every requested rank on the training rows and score its
/// forecasts of the remaining rows against the identity ordering. Every
/// rank uses the optimizer seed in `cfg`, so rank 0 reproduces a plain
/// `estimate` call. A previously computed identity fit can be supplied.
pub fn run_permutation(
    panel: &TimeSeriesPanel,
    ranks: &[usize],
    cfg: &EstimateConfig,
    baseline: Option<&FitResult>,
) -> Result<Vec<PermutationRecord>> {
    if panel.len() < MIN_ROWS {
        return Err(Error::WindowShort(format!(
            "permutation study needs {MIN_ROWS} rows, panel has {}",
            panel.len()
        )));
    }
    let train = cfg.train_len.unwrap_or(200);
    if train >= panel.len() {
        return Err(Error::WindowShort("no rows left for testing".into()));
    }
    let perms: Vec<Permutation> = ranks.iter().map(|&r| Permutation::from_rank(r)).collect::<Result<_>>()?;
    let identity = Permutation::identity();
    let base_fit = match baseline {
        Some(f) => f.clone(),
        None => estimate(panel, cfg, None)?,
    };
    let base = forecast(&base_fit, &identity, panel, train, cfg)?;
    let actual = panel.values.rows(train, panel.len() - train).into_owned();
    Ok(perms
        .par_iter()
        .map(|perm| {
            let run = || -> Result<PermutationRecord> {
                if perm.is_identity() {
                    return record(perm, &base_fit, &base, &base, &actual);
                }
                let fit = estimate(&perm.apply(panel)?, cfg, None)?;
                let fc = forecast(&fit, perm, panel, train, cfg)?;
                record(perm, &fit, &fc, &base, &actual)
            };
            run().unwrap_or_else(|e| failed_record(perm, e.to_string()))
        })
        .collect())
}
