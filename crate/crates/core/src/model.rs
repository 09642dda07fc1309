//! The CONQUER learner state: weights, confidence matrix and `η`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{MatrixKind, SecondOrderMatrix, SparseVec};

/// Linear reward model with second-order confidence information.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    matrix: SecondOrderMatrix,
    eta: f64,
    rounds: u64,
}

/// What an update absorbed.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateInfo {
    /// The update vector `z = ½ y (Φ_m − Φ_n)`.
    pub z: SparseVec,
    /// `zᵀ A⁻¹ z` under the matrix before the update.
    pub z_inv_quad: f64,
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("eta must be positive and finite, got {eta}")))
    }
}

pub(crate) fn check_feedback(y: i8) -> Result<()> {
    if y == 1 || y == -1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("feedback must be +1 or -1, got {y}")))
    }
}

impl LinearModel {
    /// Fresh model: `w = 0`, `A = I`.
    pub fn new(kind: MatrixKind, dim: usize, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(LinearModel {
            weights: vec![0.0; dim],
            matrix: SecondOrderMatrix::identity(kind, dim)?,
            eta,
            rounds: 0,
        })
    }

    pub fn from_parts(weights: Vec<f64>, matrix: SecondOrderMatrix, eta: f64, rounds: u64) -> Result<Self> {
        check_eta(eta)?;
        check_dim(matrix.dim(), weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::OutOfRange("non-finite weight".into()));
        }
        Ok(LinearModel {
            weights,
            matrix,
            eta,
            rounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn matrix(&self) -> &SecondOrderMatrix {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut SecondOrderMatrix {
        &mut self.matrix
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn set_eta(&mut self, eta: f64) -> Result<()> {
        check_eta(eta)?;
        self.eta = eta;
        Ok(())
    }

    /// Number of updates applied (skipped rounds do not count).
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Replaces the weights, e.g. with a projected vector.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        check_dim(self.dim(), weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::OutOfRange("non-finite weight".into()));
        }
        self.weights = weights;
        Ok(())
    }

    pub fn score(&self, item: &SparseVec) -> Result<f64> {
        item.dot_dense(&self.weights)
    }

    /// `Δ̂(m) = w·Φ(x, m)` for every item.
    pub fn score_items(&self, items: &[SparseVec]) -> Result<Vec<f64>> {
        items.iter().map(|item| self.score(item)).collect()
    }

    /// `ε(m) = √(η · Φᵀ A⁻¹ Φ)`.
    pub fn confidence_eps(&self, item: &SparseVec) -> Result<f64> {
        Ok((self.eta * self.matrix.inv_quad_form(item)?).sqrt())
    }

    /// `ε(m, n) = √(η · (Φ_m − Φ_n)ᵀ A⁻¹ (Φ_m − Φ_n))`.
    pub fn confusion_eps(&self, item_m: &SparseVec, item_n: &SparseVec) -> Result<f64> {
        let diff = item_m.sub(item_n)?;
        Ok((self.eta * self.matrix.inv_quad_form(&diff)?).sqrt())
    }

    /// Second-order update with `z = ½ y (Φ_m − Φ_n)`:
    /// `A ← A + zzᵀ` (or its diagonal) and `w ← A_new⁻¹ (A_old w + z)`.
    pub fn update(&mut self, item_m: &SparseVec, item_n: &SparseVec, y: i8) -> Result<UpdateInfo> {
        check_feedback(y)?;
        check_dim(self.dim(), item_m.dim())?;
        let z = item_m.sub(item_n)?.scale(0.5 * y as f64);
        let z_inv_quad = self.absorb(&z, 1.0)?;
        self.rounds += 1;
        Ok(UpdateInfo { z, z_inv_quad })
    }

    /// Regression step toward `target` along `z`: `A ← A + zzᵀ` and
    /// `w ← A_new⁻¹ (A_old w + target·z)`. Returns `zᵀ A_old⁻¹ z`.
    pub(crate) fn absorb(&mut self, z: &SparseVec, target: f64) -> Result<f64> {
        check_dim(self.dim(), z.dim())?;
        if z.is_zero() {
            return Ok(0.0);
        }
        match self.matrix.kind() {
            MatrixKind::Full => {
                // A_old w + t z = A_new w + z (t − zᵀw)
                let residual = target - z.dot_dense_unchecked(&self.weights);
                let h = self.matrix.rank_one_update(z)?;
                self.matrix.add_inv_times(residual, z, &mut self.weights)?;
                Ok(h)
            }
            MatrixKind::Diagonal => {
                let old: Vec<f64> = {
                    let diag = self.matrix.diagonal().expect("diagonal kind");
                    z.iter().map(|(i, _)| diag[i]).collect()
                };
                let h = self.matrix.rank_one_update(z)?;
                let diag = self.matrix.diagonal().expect("diagonal kind");
                for ((i, zi), a_old) in z.iter().zip(old) {
                    self.weights[i] = (a_old * self.weights[i] + target * zi) / diag[i];
                }
                Ok(h)
            }
        }
    }
}
