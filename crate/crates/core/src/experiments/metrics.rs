//! Forecast comparison metrics over an evaluation window.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn check(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<()> {
    if pred.shape() != actual.shape() || pred.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "predictions {:?} and actuals {:?} must be aligned and non-empty",
            pred.shape(),
            actual.shape()
        )));
    }
    Ok(())
}

/// Sum of squared errors per series (column).
pub fn sse_per_series(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<Vec<f64>> {
    check(pred, actual)?;
    Ok((pred - actual).column_iter().map(|c| c.norm_squared()).collect())
}

pub fn mse_per_series(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = pred.nrows() as f64;
    Ok(sse_per_series(pred, actual)?.into_iter().map(|s| s / n).collect())
}

/// Mean over series of the per-series MSE.
pub fn mse_avg(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<f64> {
    let m = mse_per_series(pred, actual)?;
    Ok(m.iter().sum::<f64>() / m.len() as f64)
}

/// `log(SSE_i(p) / SSE_i(base))` per series.
pub fn log_sse_ratios(pred_p: &DMatrix<f64>, pred_base: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = sse_per_series(pred_p, actual)?;
    let b = sse_per_series(pred_base, actual)?;
    p.iter()
        .zip(&b)
        .enumerate()
        .map(|(i, (p, b))| {
            if *b == 0.0 {
                Err(Error::ZeroSse { series: i })
            } else {
                Ok((p / b).ln())
            }
        })
        .collect()
}

/// Average over series of the log SSE ratio; negative favours `pred_p`.
pub fn pct_improvement(pred_p: &DMatrix<f64>, pred_base: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<f64> {
    let r = log_sse_ratios(pred_p, pred_base, actual)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

/// Per-series MSE divided by the population variance of the actuals over
/// the same window.
pub fn scaled_mse_per_series(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mse = mse_per_series(pred, actual)?;
    let n = actual.nrows() as f64;
    actual
        .column_iter()
        .zip(mse)
        .enumerate()
        .map(|(i, (col, m))| {
            let mean = col.sum() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            if var == 0.0 {
                Err(Error::ZeroVariance { series: i })
            } else {
                Ok(m / var)
            }
        })
        .collect()
}

pub fn scaled_mse(pred: &DMatrix<f64>, actual: &DMatrix<f64>) -> Result<f64> {
    let s = scaled_mse_per_series(pred, actual)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Pearson correlation. `None` if either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
