//! Multistart orchestration shared by the model estimator and toy problems.

use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use super::anneal::{self, Chain, Schedule};
use super::bounds::Bounds;
use super::refine;
use super::tracker::{is_sentinel, Tracker};
use crate::error::{Error, Result};
use crate::seed;

/// Optimizer settings. Budgets count objective evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    /// Evaluations per start, shared by every phase of that start.
    pub budget: usize,
    pub seed: u64,
    pub anneal: bool,
    pub refine: bool,
    /// Share of each start's budget given to the first annealing phase.
    pub anneal_fraction: f64,
    pub schedule: Schedule,
    /// Fixed initial temperature; otherwise the interquartile range of
    /// `t0_samples` objective values at prior draws.
    pub t0: Option<f64>,
    pub t0_samples: usize,
    /// Prior draws tried per start before accepting a sentinel start.
    pub max_start_draws: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl OptimizerConfig {
    pub fn paper() -> Self {
        Self {
            n_starts: 5,
            budget: 50_000,
            seed: 0,
            anneal: true,
            refine: true,
            anneal_fraction: 0.7,
            schedule: Schedule::default(),
            t0: None,
            t0_samples: 50,
            max_start_draws: 100,
        }
    }

    /// A tenth of the paper-profile budget with the same total cooling.
    pub fn desk() -> Self {
        let paper = Self::paper();
        Self {
            n_starts: 2,
            budget: 5_000,
            schedule: Schedule {
                decay: paper.schedule.decay.powi(10),
                ..paper.schedule
            },
            ..paper
        }
    }
}

/// Best point of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evals: usize,
    pub n_failures: usize,
}

impl Outcome {
    pub(crate) fn from_tracker(tr: &Tracker) -> Self {
        Self {
            x: tr.best_x.clone(),
            f: tr.best_f,
            n_evals: tr.used(),
            n_failures: tr.failures(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub index: usize,
    pub seed: u64,
    pub supplied: bool,
    pub initial: Vec<f64>,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub n_evals: usize,
    pub n_failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evals: usize,
    pub n_failures: usize,
    pub t0: f64,
    pub starts: Vec<StartSummary>,
}

/// A box-constrained minimization problem with a start distribution.
pub struct Problem<'a> {
    pub objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub bounds: Bounds,
    pub sampler: &'a (dyn Fn(&mut ChaCha20Rng) -> Vec<f64> + Sync),
}

const T0_STREAM: u64 = u64::MAX;

/// Interquartile range of objective values at sampled points, skipping
/// sentinels. Returns the temperature and the evaluations spent.
fn calibrate_t0(problem: &Problem, cfg: &OptimizerConfig) -> (f64, usize, usize) {
    if let Some(t0) = cfg.t0 {
        return (t0, 0, 0);
    }
    let mut rng = seed::rng(seed::derive(cfg.seed, &[T0_STREAM]));
    let values: Vec<f64> = (0..cfg.t0_samples)
        .map(|_| (problem.objective)(&(problem.sampler)(&mut rng)))
        .collect();
    let good: Vec<f64> = values.iter().copied().filter(|v| !is_sentinel(*v)).collect();
    let failures = values.len() - good.len();
    let t0 = if good.len() >= 4 {
        Data::new(good).interquartile_range()
    } else {
        cfg.schedule.t0
    };
    let t0 = if t0.is_finite() && t0 > 0.0 { t0 } else { cfg.schedule.t0 };
    (t0, values.len(), failures)
}

fn run_start(
    problem: &Problem,
    cfg: &OptimizerConfig,
    t0: f64,
    index: usize,
    supplied: Option<&[f64]>,
) -> (Outcome, StartSummary) {
    let start_seed = seed::derive(cfg.seed, &[index as u64]);
    let mut rng = seed::rng(start_seed);
    let mut tr = Tracker::new(problem.objective, cfg.budget.max(1));
    let (x0, f0) = match supplied {
        Some(x) => {
            let mut x = x.to_vec();
            problem.bounds.project(&mut x);
            let f = tr.eval(&x).expect("budget >= 1");
            (x, f)
        }
        None => {
            let mut first = None;
            for _ in 0..cfg.max_start_draws.max(1) {
                let mut x = (problem.sampler)(&mut rng);
                problem.bounds.project(&mut x);
                let Some(f) = tr.eval(&x) else { break };
                if first.is_none() || !is_sentinel(f) {
                    first = Some((x, f));
                }
                if !is_sentinel(f) {
                    break;
                }
            }
            first.expect("budget >= 1")
        }
    };
    let n = problem.bounds.dim();
    let mut chain = Chain {
        x: x0.clone(),
        fx: f0,
        temperature: t0,
        scale: 1.0,
    };
    if cfg.anneal {
        let steps = if cfg.refine {
            ((cfg.anneal_fraction * cfg.budget as f64) as usize).saturating_sub(tr.used())
        } else {
            usize::MAX
        };
        anneal::run(&mut tr, &problem.bounds, &mut chain, &mut rng, &cfg.schedule, steps);
    }
    // Refine; when refinement stalls with budget left, re-anneal from the
    // best point at the current temperature and refine again.
    while cfg.refine && !is_sentinel(tr.best_f) {
        let before = tr.best_f;
        let bx = tr.best_x.clone();
        refine::run(&mut tr, &problem.bounds, &bx, before);
        if !cfg.anneal || tr.remaining() <= 2 * n + 1 {
            break;
        }
        chain.x = tr.best_x.clone();
        chain.fx = tr.best_f;
        let steps = tr.remaining() / 2;
        anneal::run(&mut tr, &problem.bounds, &mut chain, &mut rng, &cfg.schedule, steps);
        if before - tr.best_f <= 1e-10 * before.abs().max(1.0) {
            break;
        }
    }
    let out = Outcome::from_tracker(&tr);
    let summary = StartSummary {
        index,
        seed: start_seed,
        supplied: supplied.is_some(),
        initial: x0,
        initial_objective: f0,
        final_objective: out.f,
        n_evals: out.n_evals,
        n_failures: out.n_failures,
    };
    (out, summary)
}

/// Run `cfg.n_starts` prior-drawn starts (plus `extra_start` if given) in
/// parallel and return the best. Ties go to the lower start index.
pub fn minimize(problem: &Problem, cfg: &OptimizerConfig, extra_start: Option<&[f64]>) -> Result<Minimum> {
    if cfg.budget == 0 {
        return Err(Error::Invalid("optimizer budget must be at least 1".into()));
    }
    let (t0, t0_evals, t0_failures) = calibrate_t0(problem, cfg);
    let total = cfg.n_starts + usize::from(extra_start.is_some());
    if total == 0 {
        return Err(Error::Invalid("no optimizer starts requested".into()));
    }
    let runs: Vec<(Outcome, StartSummary)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let supplied = if i == cfg.n_starts { extra_start } else { None };
            run_start(problem, cfg, t0, i, supplied)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.0.f.total_cmp(&b.0.f).then(i.cmp(j)))
        .map(|(i, _)| i)
        .unwrap();
    if is_sentinel(runs[best].0.f) {
        return Err(Error::AllStartsFailed);
    }
    Ok(Minimum {
        x: runs[best].0.x.clone(),
        f: runs[best].0.f,
        n_evals: t0_evals + runs.iter().map(|r| r.0.n_evals).sum::<usize>(),
        n_failures: t0_failures + runs.iter().map(|r| r.0.n_failures).sum::<usize>(),
        t0,
        starts: runs.into_iter().map(|r| r.1).collect(),
    })
}
