//! Projected Polak-Ribiere conjugate gradient on finite-difference gradients.

use super::bounds::Bounds;
use super::tracker::{is_sentinel, Tracker};
use super::Outcome;

/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-5;

fn step(x: f64) -> f64 {
    FD_STEP * x.abs().max(1.0)
}

/// Central differences, one-sided next to a bound or a sentinel probe,
/// zero when both neighbours fail. `None` if the budget runs out.
pub(crate) fn gradient(tr: &mut Tracker, bounds: &Bounds, x: &[f64], fx: f64) -> Option<Vec<f64>> {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        let h = step(x[i]);
        let up = x[i] + h <= bounds.upper[i];
        let down = x[i] - h >= bounds.lower[i];
        let mut eval_at = |tr: &mut Tracker, v: f64| {
            probe[i] = v;
            let r = tr.eval(&probe);
            probe[i] = x[i];
            r.map(|f| if is_sentinel(f) { f64::INFINITY } else { f })
        };
        let fp = if up { eval_at(tr, x[i] + h)? } else { f64::INFINITY };
        let fm = if down { eval_at(tr, x[i] - h)? } else { f64::INFINITY };
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => 0.0,
        };
    }
    Some(g)
}

/// Zero the components that would push an active bound further out.
fn project_direction(bounds: &Bounds, x: &[f64], d: &mut [f64]) {
    for i in 0..x.len() {
        if (x[i] <= bounds.lower[i] && d[i] < 0.0) || (x[i] >= bounds.upper[i] && d[i] > 0.0) {
            d[i] = 0.0;
        }
    }
}

struct LineSearch<'b> {
    bounds: &'b Bounds,
    x: &'b [f64],
    d: &'b [f64],
}

impl LineSearch<'_> {
    fn point(&self, a: f64) -> Vec<f64> {
        let mut y: Vec<f64> = self.x.iter().zip(self.d).map(|(x, d)| x + a * d).collect();
        self.bounds.project(&mut y);
        y
    }

    fn phi(&self, tr: &mut Tracker, a: f64) -> Option<f64> {
        tr.eval(&self.point(a))
            .map(|f| if is_sentinel(f) { f64::INFINITY } else { f })
    }

    /// Bracket a decrease, then take one parabolic step. Returns the best
    /// step length with its value when it improves on `fx`.
    fn run(&self, tr: &mut Tracker, fx: f64, a0: f64) -> Option<(f64, f64)> {
        let mut pts = vec![(0.0, fx)];
        let mut a = a0;
        let mut fa = self.phi(tr, a)?;
        pts.push((a, fa));
        if fa < fx {
            for _ in 0..40 {
                let b = 2.0 * a;
                let fb = self.phi(tr, b)?;
                pts.push((b, fb));
                if fb >= fa {
                    break;
                }
                a = b;
                fa = fb;
            }
        } else {
            for _ in 0..40 {
                a *= 0.25;
                fa = self.phi(tr, a)?;
                pts.push((a, fa));
                if fa < fx {
                    break;
                }
            }
            if fa >= fx {
                return None;
            }
        }
        // Parabola through the best point and its two neighbours in step length.
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let k = (0..pts.len()).min_by(|&i, &j| pts[i].1.total_cmp(&pts[j].1)).unwrap();
        if k > 0 && k + 1 < pts.len() {
            let (p, q, r) = (pts[k - 1], pts[k], pts[k + 1]);
            let num = (q.0 - p.0).powi(2) * (q.1 - r.1) - (q.0 - r.0).powi(2) * (q.1 - p.1);
            let den = (q.0 - p.0) * (q.1 - r.1) - (q.0 - r.0) * (q.1 - p.1);
            if den.abs() > 0.0 && r.1.is_finite() && p.1.is_finite() {
                let v = q.0 - 0.5 * num / den;
                if v > p.0 && v < r.0 && v != q.0 {
                    if let Some(fv) = self.phi(tr, v) {
                        pts.push((v, fv));
                    }
                }
            }
        }
        let best = pts
            .iter()
            .copied()
            .min_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)))
            .unwrap();
        (best.1 < fx).then_some(best)
    }
}

/// Refine from the current point until the budget runs out or no descent
/// direction improves the objective.
pub(crate) fn run(tr: &mut Tracker, bounds: &Bounds, x0: &[f64], f0: f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    let Some(mut g) = gradient(tr, bounds, &x, fx) else { return };
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut since_restart = 0;
    let mut alpha = f64::NAN;
    loop {
        project_direction(bounds, &x, &mut d);
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 || since_restart >= n {
            d = g.iter().map(|v| -v).collect();
            project_direction(bounds, &x, &mut d);
            since_restart = 0;
        }
        let dmax = (0..n).map(|i| d[i].abs() / bounds.width(i)).fold(0.0, f64::max);
        if dmax == 0.0 {
            return;
        }
        let a0 = if alpha.is_finite() { alpha } else { 0.01 / dmax };
        let ls = LineSearch { bounds, x: &x, d: &d };
        let Some((a, fa)) = ls.run(tr, fx, a0) else {
            if since_restart == 0 {
                return;
            }
            // Retry along steepest descent before giving up.
            since_restart = n;
            continue;
        };
        let x_new = ls.point(a);
        let small = fx - fa <= 1e-15 * fx.abs().max(1.0);
        x = x_new;
        fx = fa;
        alpha = a;
        if small && since_restart == 0 {
            return;
        }
        let Some(g_new) = gradient(tr, bounds, &x, fx) else { return };
        let gg: f64 = g.iter().map(|v| v * v).sum();
        let beta = if gg > 0.0 {
            let num: f64 = g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum();
            (num / gg).max(0.0)
        } else {
            0.0
        };
        for i in 0..n {
            d[i] = -g_new[i] + beta * d[i];
        }
        g = g_new;
        since_restart += 1;
    }
}

/// Conjugate-gradient refinement from `x0` within `budget` evaluations.
pub fn local_refine(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    bounds: &Bounds,
    x0: &[f64],
    budget: usize,
) -> Outcome {
    assert!(budget >= 1, "budget must be at least one evaluation");
    let mut tr = Tracker::new(f, budget);
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let fx = tr.eval(&x).expect("budget >= 1");
    run(&mut tr, bounds, &x, fx);
    Outcome::from_tracker(&tr)
}
