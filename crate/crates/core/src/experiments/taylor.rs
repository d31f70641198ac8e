use nalgebra::DMatrix;

use super::metrics::pearson;
use super::sim_estimate::SimEstimateRecord;
use crate::error::{Error, Result};
use crate::sw_model::Param;

/// Rows of the correlation table.
pub const DEEP_PARAMS: [Param; 20] = [
    Param::Phi,
    Param::SigmaC,
    Param::Habit,
    Param::XiW,
    Param::SigmaL,
    Param::XiP,
    Param::IotaW,
    Param::IotaP,
    Param::Psi,
    Param::PhiP,
    Param::RPi,
    Param::Rho,
    Param::RY,
    Param::RDy,
    Param::PiBar,
    Param::BetaConst,
    Param::LBar,
    Param::GammaBar,
    Param::RhoGa,
    Param::Alpha,
];

/// Columns of the correlation table.
pub const TAYLOR_PARAMS: [Param; 4] = [Param::RPi, Param::Rho, Param::RY, Param::RDy];

/// Pearson correlations across the given records' estimates. Failed
/// records are skipped.
pub fn taylor_correlations(records: &[SimEstimateRecord]) -> Result<DMatrix<f64>> {
    let ok: Vec<&SimEstimateRecord> = records.iter().filter(|r| r.error.is_empty()).collect();
    if ok.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 estimates, have {}", ok.len())));
    }
    let column = |p: Param| ok.iter().map(|r| r.theta_hat[p.index()]).collect::<Vec<f64>>();
    let mut out = DMatrix::zeros(DEEP_PARAMS.len(), TAYLOR_PARAMS.len());
    for (i, &d) in DEEP_PARAMS.iter().enumerate() {
        for (j, &t) in TAYLOR_PARAMS.iter().enumerate() {
            out[(i, j)] = pearson(&column(d), &column(t))
                .ok_or_else(|| Error::Degenerate(format!("{} or {} is constant across estimates", d.name(), t.name())))?;
        }
    }
    Ok(out)
}
