//! Simulated annealing with reflected Gaussian proposals.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bounds::Bounds;
use super::tracker::Tracker;
use super::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    /// Initial temperature, in objective units.
    pub t0: f64,
    /// Geometric factor applied to the temperature after every evaluation.
    pub decay: f64,
    /// Initial proposal standard deviation as a fraction of each bound width.
    pub step_frac: f64,
    pub target_accept: f64,
    /// Proposals between step-size adaptations.
    pub adapt_window: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t0: 1.0,
            decay: 0.999,
            step_frac: 0.01,
            target_accept: 0.23,
            adapt_window: 50,
        }
    }
}

/// Chain state carried between annealing phases of one start.
pub(crate) struct Chain {
    pub x: Vec<f64>,
    pub fx: f64,
    pub temperature: f64,
    pub scale: f64,
}

/// Run the chain for at most `steps` proposals.
pub(crate) fn run(
    tr: &mut Tracker,
    bounds: &Bounds,
    chain: &mut Chain,
    rng: &mut ChaCha20Rng,
    schedule: &Schedule,
    steps: usize,
) {
    let n = bounds.dim();
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut y = vec![0.0; n];
    for _ in 0..steps {
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            y[i] = chain.x[i] + chain.scale * schedule.step_frac * bounds.width(i) * z;
        }
        bounds.reflect(&mut y);
        let u: f64 = rng.random();
        let Some(fy) = tr.eval(&y) else { break };
        let delta = fy - chain.fx;
        if delta <= 0.0 || (chain.temperature > 0.0 && u < (-delta / chain.temperature).exp()) {
            chain.x.copy_from_slice(&y);
            chain.fx = fy;
            accepted += 1;
        }
        proposed += 1;
        chain.temperature *= schedule.decay;
        if proposed == schedule.adapt_window {
            let rate = accepted as f64 / proposed as f64;
            chain.scale *= if rate > schedule.target_accept { 1.1 } else { 1.0 / 1.1 };
            chain.scale = chain.scale.clamp(1e-4, 10.0);
            accepted = 0;
            proposed = 0;
        }
    }
}

/// Anneal from `x0` for `budget` objective evaluations (including the one
/// at `x0`) and return the best point seen.
pub fn anneal(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &Bounds,
    x0: &[f64],
    budget: usize,
    seed: u64,
    schedule: &Schedule,
) -> Outcome {
    assert!(budget >= 1, "budget must be at least one evaluation");
    let mut tr = Tracker::new(f, budget);
    let mut x = x0.to_vec();
    bounds.reflect(&mut x);
    let fx = tr.eval(&x).expect("budget >= 1");
    let mut chain = Chain {
        x,
        fx,
        temperature: schedule.t0,
        scale: 1.0,
    };
    let mut rng = crate::seed::rng(seed);
    run(&mut tr, bounds, &mut chain, &mut rng, schedule, usize::MAX);
    Outcome::from_tracker(&tr)
}
