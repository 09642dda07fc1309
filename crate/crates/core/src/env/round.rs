use crate::error::{Error, Result};
use crate::linalg::SparseVec;

/// One round: `K` unit-norm items and their hidden rewards in `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    items: Vec<SparseVec>,
    rewards: Vec<f64>,
}

/// Norm tolerance for item features.
pub(crate) const UNIT_TOL: f64 = 1e-9;

impl Round {
    pub fn new(items: Vec<SparseVec>, rewards: Vec<f64>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::TooFewItems {
                needed: 2,
                got: items.len(),
            });
        }
        if items.len() != rewards.len() {
            return Err(Error::InvalidArgument(format!(
                "{} items but {} rewards",
                items.len(),
                rewards.len()
            )));
        }
        let dim = items[0].dim();
        for item in &items {
            crate::error::check_dim(dim, item.dim())?;
            if (item.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!("item norm {} is not 1", item.norm())));
            }
        }
        if let Some(r) = rewards.iter().find(|r| !(r.abs() <= 1.0)) {
            return Err(Error::OutOfRange(format!("reward {r} outside [-1, 1]")));
        }
        Ok(Round { items, rewards })
    }

    pub fn items(&self) -> &[SparseVec] {
        &self.items
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }

    pub fn dim(&self) -> usize {
        self.items[0].dim()
    }

    pub fn best_reward(&self) -> f64 {
        self.rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether item `m` attains the maximal reward (ties count).
    pub fn is_best(&self, m: usize) -> bool {
        self.rewards[m] >= self.best_reward()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_inputs() {
        let e = |i| SparseVec::unit(3, i).unwrap();
        assert!(Round::new(vec![e(0)], vec![0.0]).is_err());
        assert!(Round::new(vec![e(0), e(1)], vec![0.0]).is_err());
        assert!(Round::new(vec![e(0), e(1)], vec![0.0, 1.5]).is_err());
        let half = SparseVec::new(3, vec![(0, 0.5)]).unwrap();
        assert!(Round::new(vec![e(0), half], vec![0.0, 0.0]).is_err());
        let r = Round::new(vec![e(0), e(1), e(2)], vec![0.5, 1.0, 1.0]).unwrap();
        assert!(r.is_best(1) && r.is_best(2) && !r.is_best(0));
    }
}
