//! Posterior-mode estimation: annealing, conjugate-gradient refinement and
//! multistart orchestration.

mod anneal;
mod bounds;
mod multistart;
mod objective;
mod refine;
mod tracker;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use anneal::{anneal, Schedule};
pub use bounds::Bounds;
pub use multistart::{minimize, Minimum, OptimizerConfig, Outcome, Problem, StartSummary};
pub use objective::{evaluate, penalized_nll, sentinel, Evaluation};
pub use refine::{local_refine, FD_STEP};
pub use tracker::is_sentinel;

use crate::error::{Error, Result};
use crate::lre_solver::SolverConfig;
use crate::state_space::TimeSeriesPanel;
use crate::sw_model::{sample_prior, EstimatedVector, Param};

/// Objective value returned where the model cannot be evaluated.
pub const SENTINEL: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateConfig {
    pub optimizer: OptimizerConfig,
    /// Estimate on the first `train_len` rows; `None` uses the whole panel.
    pub train_len: Option<usize>,
    pub solver: SolverConfig,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::paper(),
            train_len: Some(200),
            solver: SolverConfig::default(),
        }
    }
}

impl EstimateConfig {
    pub fn paper() -> Self {
        Self::default()
    }

    pub fn desk() -> Self {
        Self {
            optimizer: OptimizerConfig::desk(),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = seed;
        self
    }

    /// The training rows of `panel`.
    pub fn training_panel(&self, panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
        match self.train_len {
            None => Ok(panel.clone()),
            Some(n) if n <= panel.len() && n > 0 => panel.slice(0, n),
            Some(n) => Err(Error::WindowShort(format!(
                "training needs {n} rows, panel has {}",
                panel.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub index: usize,
    pub seed: u64,
    pub supplied: bool,
    #[serde(with = "theta_by_name")]
    pub initial: EstimatedVector,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub n_evals: usize,
    pub solver_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(with = "theta_by_name")]
    pub theta_hat: EstimatedVector,
    pub penalized_nll: f64,
    pub unpenalized_nll: f64,
    pub log_prior: f64,
    pub n_evals: usize,
    pub solver_failures: usize,
    pub t0: f64,
    pub train_rows: usize,
    pub starts: Vec<StartRecord>,
    pub config: EstimateConfig,
}

impl FitResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }
}

/// Serialize an `EstimatedVector` as an object keyed by parameter name.
pub mod theta_by_name {
    use std::collections::BTreeMap;

    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::sw_model::EstimatedVector;

    pub fn serialize<S: Serializer>(theta: &EstimatedVector, s: S) -> Result<S::Ok, S::Error> {
        theta.named().into_iter().collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<EstimatedVector, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        EstimatedVector::from_named(map.iter().map(|(k, v)| (k.as_str(), *v))).map_err(D::Error::custom)
    }
}

fn model_bounds() -> Bounds {
    Bounds::new(
        Param::ALL.iter().map(|p| p.spec().lower).collect(),
        Param::ALL.iter().map(|p| p.spec().upper).collect(),
    )
}

fn to_theta(x: &[f64]) -> EstimatedVector {
    EstimatedVector::new(x.to_vec()).expect("optimizer keeps the dimension")
}

/// Posterior-mode estimate on the training rows of `panel`. `extra_start`
/// adds a caller-supplied start after the prior-drawn ones.
pub fn estimate(
    panel: &TimeSeriesPanel,
    config: &EstimateConfig,
    extra_start: Option<&EstimatedVector>,
) -> Result<FitResult> {
    let train = config.training_panel(panel)?;
    let solver = config.solver;
    let objective = |x: &[f64]| evaluate(&to_theta(x), &train, &solver).penalized;
    let sampler = |rng: &mut rand_chacha::ChaCha20Rng| sample_prior(rng, 1000).into_values();
    let problem = Problem {
        objective: &objective,
        bounds: model_bounds(),
        sampler: &sampler,
    };
    let min = minimize(&problem, &config.optimizer, extra_start.map(|t| t.values()))?;
    let theta_hat = to_theta(&min.x);
    let eval = evaluate(&theta_hat, &train, &solver);
    debug_assert_eq!(eval.penalized, min.f);
    Ok(FitResult {
        penalized_nll: eval.penalized,
        unpenalized_nll: eval.unpenalized.ok_or(Error::AllStartsFailed)?,
        log_prior: eval.log_prior.ok_or(Error::AllStartsFailed)?,
        theta_hat,
        n_evals: min.n_evals,
        solver_failures: min.n_failures,
        t0: min.t0,
        train_rows: train.len(),
        starts: min
            .starts
            .into_iter()
            .map(|s| StartRecord {
                index: s.index,
                seed: s.seed,
                supplied: s.supplied,
                initial: to_theta(&s.initial),
                initial_objective: s.initial_objective,
                final_objective: s.final_objective,
                n_evals: s.n_evals,
                solver_failures: s.n_failures,
            })
            .collect(),
        config: config.clone(),
    })
}
