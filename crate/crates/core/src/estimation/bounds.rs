/// A box `[lower, upper]` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l < u), "empty box");
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    /// Fold each coordinate back into the box by mirroring at the faces.
    pub fn reflect(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            let (l, w) = (self.lower[i], self.width(i));
            let mut r = (*v - l).rem_euclid(2.0 * w);
            if r > w {
                r = 2.0 * w - r;
            }
            *v = (l + r).clamp(l, self.upper[i]);
        }
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_mirrors_at_faces() {
        let b = Bounds::new(vec![0.0], vec![1.0]);
        for (x, want) in [(1.2, 0.8), (-0.3, 0.3), (2.25, 0.25), (0.5, 0.5), (-1.5, 0.5)] {
            let mut v = [x];
            b.reflect(&mut v);
            assert!((v[0] - want).abs() < 1e-12, "{x} -> {}", v[0]);
        }
    }
}
