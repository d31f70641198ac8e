//! Relabelings of the seven observable slots, addressed by lexicographic rank.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state_space::TimeSeriesPanel;

pub const N_SLOTS: usize = 7;
/// 7!
pub const N_PERMUTATIONS: usize = 5040;

/// `mapping[slot]` is the canonical series placed in `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Permutation {
    pub mapping: [usize; N_SLOTS],
    pub rank: usize,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl Permutation {
    pub fn identity() -> Self {
        Self::from_rank(0).expect("rank 0 exists")
    }

    /// Decode `rank` in the factorial number system.
    pub fn from_rank(rank: usize) -> Result<Self> {
        if rank >= N_PERMUTATIONS {
            return Err(Error::Invalid(format!("permutation rank {rank} is not in 0..{N_PERMUTATIONS}")));
        }
        let mut pool: Vec<usize> = (0..N_SLOTS).collect();
        let mut mapping = [0; N_SLOTS];
        let mut r = rank;
        for (slot, m) in mapping.iter_mut().enumerate() {
            let f = factorial(N_SLOTS - 1 - slot);
            *m = pool.remove(r / f);
            r %= f;
        }
        Ok(Self { mapping, rank })
    }

    pub fn from_mapping(mapping: [usize; N_SLOTS]) -> Result<Self> {
        let mut seen = [false; N_SLOTS];
        for &m in &mapping {
            if m >= N_SLOTS || std::mem::replace(&mut seen[m], true) {
                return Err(Error::Invalid(format!("{mapping:?} is not a permutation")));
            }
        }
        let rank = (0..N_SLOTS)
            .map(|slot| {
                let smaller = mapping[slot + 1..].iter().filter(|&&m| m < mapping[slot]).count();
                smaller * factorial(N_SLOTS - 1 - slot)
            })
            .sum();
        Ok(Self { mapping, rank })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [0; N_SLOTS];
        for (slot, &m) in self.mapping.iter().enumerate() {
            inv[m] = slot;
        }
        Self::from_mapping(inv).expect("inverse of a permutation")
    }

    pub fn is_identity(&self) -> bool {
        self.rank == 0
    }

    /// Columns rearranged so that column `slot` holds column `mapping[slot]`.
    pub fn apply_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), N_SLOTS, |i, slot| m[(i, self.mapping[slot])])
    }

    /// Undo `apply_matrix`.
    pub fn unapply_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.inverse().apply_matrix(m)
    }

    /// The panel the model sees: slot labels stay, data move.
    pub fn apply(&self, panel: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
        if panel.n_series() != N_SLOTS {
            return Err(Error::Dimension(format!("panel has {} series, expected 7", panel.n_series())));
        }
        TimeSeriesPanel::new(panel.names.clone(), panel.dates.clone(), self.apply_matrix(&panel.values))
    }

    /// Slot contents as canonical names, e.g. `l|r|pi|dy|dc|di|dw`.
    pub fn label(&self) -> String {
        let names = crate::state_space::SERIES;
        self.mapping.iter().map(|&m| names[m]).collect::<Vec<_>>().join("|")
    }
}

/// Rank 0 plus `n` distinct non-identity ranks drawn with `seed`, sorted.
pub fn sample_ranks(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = crate::seed::rng(seed);
    let n = n.min(N_PERMUTATIONS - 1);
    let mut picked = rand::seq::index::sample(&mut rng, N_PERMUTATIONS - 1, n).into_vec();
    for r in &mut picked {
        *r += 1;
    }
    picked.sort_unstable();
    std::iter::once(0).chain(picked).collect()
}
