use super::SENTINEL;

/// Budgeted, counting view of an objective that remembers the best point.
pub(crate) struct Tracker<'a> {
    f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    budget: usize,
    used: usize,
    failures: usize,
    pub best_x: Vec<f64>,
    pub best_f: f64,
}

pub fn is_sentinel(v: f64) -> bool {
    v.is_nan() || v >= SENTINEL
}

impl<'a> Tracker<'a> {
    pub fn new(f: &'a (dyn Fn(&[f64]) -> f64 + Sync), budget: usize) -> Self {
        Self {
            f,
            budget,
            used: 0,
            failures: 0,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
        }
    }

    /// `None` once the budget is spent. NaN is mapped to `+inf`.
    pub fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if is_sentinel(v) {
            self.failures += 1;
        }
        if v < self.best_f || self.best_x.is_empty() {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        Some(v)
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn failures(&self) -> usize {
        self.failures
    }
}
