//! The simulate-and-estimate and series-permutation studies, their metrics
//! and output files.

mod metrics;
mod output;
mod permutation;
mod permute;
mod sim_estimate;
mod taylor;

pub use metrics::{
    log_sse_ratios, mse_avg, mse_per_series, pct_improvement, pearson, scaled_mse, scaled_mse_per_series,
    sse_per_series,
};
pub use output::{
    read_permutation_csv, read_sim_estimate_csv, report_permutation, report_sim_estimate, write_permutation_csv,
    write_sim_estimate_csv, write_taylor_csv, Manifest, MANIFEST_JSON, PERMUTATION_CSV, SIM_ESTIMATE_CSV,
    TAYLOR_CSV,
};
pub use permutation::{sample_ranks, Permutation, N_PERMUTATIONS, N_SLOTS};
pub use permute::{run_permutation, PermutationRecord, MIN_ROWS};
pub use sim_estimate::{param_sq_err, replication_data, run_sim_estimate, SimEstimateConfig, SimEstimateRecord};
pub use taylor::{taylor_correlations, DEEP_PARAMS, TAYLOR_PARAMS};

use crate::error::Result;
use crate::lre_solver::SolverConfig;
use crate::state_space::{kalman_filter, FilterOutput, TimeSeriesPanel};
use crate::sw_model::{self, EstimatedVector};

/// Filter `panel` at `theta`: one-step predictions and per-step NLL.
pub fn one_step(theta: &EstimatedVector, panel: &TimeSeriesPanel, solver: &SolverConfig) -> Result<FilterOutput> {
    kalman_filter(&sw_model::state_space(theta, solver)?, panel)
}
