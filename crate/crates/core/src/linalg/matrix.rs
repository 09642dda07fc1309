//! Positive-definite confidence matrices with a maintained inverse.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sparse::SparseVec;
use crate::error::{check_dim, Error, Result};

/// Storage layout of a [`SecondOrderMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// Dense `D×D` matrix plus its explicit inverse.
    Full,
    /// Only the diagonal is kept; updates add squared components.
    #[serde(alias = "diag")]
    Diagonal,
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(MatrixKind::Full),
            "diag" | "diagonal" => Ok(MatrixKind::Diagonal),
            other => Err(Error::InvalidArgument(format!("unknown matrix kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatrixKind::Full => "full",
            MatrixKind::Diagonal => "diagonal",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Full { a: DMatrix<f64>, inv: DMatrix<f64> },
    Diagonal(Vec<f64>),
}

/// The matrix `A_t`, starting at the identity and growing by outer
/// products of update vectors.
///
/// The full kind keeps `A` and `A⁻¹` side by side. The inverse is updated
/// with the rank-one inverse identity in `O(D²)` and recomputed from `A`
/// every `refresh_interval` updates to bound drift.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderMatrix {
    dim: usize,
    repr: Repr,
    updates: u64,
    since_refresh: u64,
    refresh_interval: u64,
}

impl SecondOrderMatrix {
    /// Largest dimension accepted for the full kind (a dense `D×D` pair).
    pub const FULL_DIM_LIMIT: usize = 8192;
    pub const DEFAULT_REFRESH_INTERVAL: u64 = 10_000;

    pub fn identity(kind: MatrixKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        let repr = match kind {
            MatrixKind::Full => {
                if dim > Self::FULL_DIM_LIMIT {
                    return Err(Error::MatrixTooLarge {
                        dim,
                        limit: Self::FULL_DIM_LIMIT,
                    });
                }
                Repr::Full {
                    a: DMatrix::identity(dim, dim),
                    inv: DMatrix::identity(dim, dim),
                }
            }
            MatrixKind::Diagonal => Repr::Diagonal(vec![1.0; dim]),
        };
        Ok(SecondOrderMatrix {
            dim,
            repr,
            updates: 0,
            since_refresh: 0,
            refresh_interval: Self::DEFAULT_REFRESH_INTERVAL,
        })
    }

    /// Rebuilds a diagonal matrix from stored entries (all must be ≥ 1).
    pub fn from_diagonal(diag: Vec<f64>, updates: u64) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if let Some(bad) = diag.iter().find(|d| !d.is_finite() || **d < 1.0) {
            return Err(Error::OutOfRange(format!("diagonal entry {bad} is below 1")));
        }
        Ok(SecondOrderMatrix {
            dim: diag.len(),
            repr: Repr::Diagonal(diag),
            updates,
            since_refresh: 0,
            refresh_interval: Self::DEFAULT_REFRESH_INTERVAL,
        })
    }

    /// Rebuilds a full matrix from row-major `A` and `A⁻¹`.
    pub fn from_full(dim: usize, a: Vec<f64>, inv: Vec<f64>, updates: u64, since_refresh: u64) -> Result<Self> {
        if dim == 0 || dim > Self::FULL_DIM_LIMIT {
            return Err(Error::MatrixTooLarge {
                dim,
                limit: Self::FULL_DIM_LIMIT,
            });
        }
        check_dim(dim * dim, a.len())?;
        check_dim(dim * dim, inv.len())?;
        if a.iter().chain(&inv).any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("non-finite matrix entry".into()));
        }
        Ok(SecondOrderMatrix {
            dim,
            repr: Repr::Full {
                a: DMatrix::from_row_slice(dim, dim, &a),
                inv: DMatrix::from_row_slice(dim, dim, &inv),
            },
            updates,
            since_refresh,
            refresh_interval: Self::DEFAULT_REFRESH_INTERVAL,
        })
    }

    pub fn kind(&self) -> MatrixKind {
        match self.repr {
            Repr::Full { .. } => MatrixKind::Full,
            Repr::Diagonal(_) => MatrixKind::Diagonal,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rank-one updates absorbed so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub(crate) fn since_refresh(&self) -> u64 {
        self.since_refresh
    }

    pub fn refresh_interval(&self) -> u64 {
        self.refresh_interval
    }

    /// Sets how many updates may pass between full re-inversions. Zero
    /// disables refreshing.
    pub fn set_refresh_interval(&mut self, interval: u64) {
        self.refresh_interval = interval;
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Full { .. } => None,
        }
    }

    /// `vᵀ A⁻¹ v`.
    pub fn inv_quad_form(&self, v: &SparseVec) -> Result<f64> {
        check_dim(self.dim, v.dim())?;
        let value = match &self.repr {
            Repr::Diagonal(d) => v.iter().map(|(i, x)| x * x / d[i]).sum(),
            Repr::Full { inv, .. } => {
                let mut acc = 0.0;
                for (r, xr) in v.iter() {
                    let mut row = 0.0;
                    for (c, xc) in v.iter() {
                        row += inv[(r, c)] * xc;
                    }
                    acc += xr * row;
                }
                acc
            }
        };
        Ok(value.max(0.0))
    }

    /// `target += alpha · A⁻¹ v`.
    pub fn add_inv_times(&self, alpha: f64, v: &SparseVec, target: &mut [f64]) -> Result<()> {
        check_dim(self.dim, v.dim())?;
        check_dim(self.dim, target.len())?;
        match &self.repr {
            Repr::Diagonal(d) => {
                for (i, x) in v.iter() {
                    target[i] += alpha * x / d[i];
                }
            }
            Repr::Full { inv, .. } => {
                for (c, x) in v.iter() {
                    let scale = alpha * x;
                    // A⁻¹ is symmetric, so column c is row c.
                    for (t, m) in target.iter_mut().zip(inv.column(c).iter()) {
                        *t += scale * m;
                    }
                }
            }
        }
        Ok(())
    }

    /// `A⁻¹ v` as a dense vector.
    pub fn inv_times(&self, v: &SparseVec) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.add_inv_times(1.0, v, &mut out)?;
        Ok(out)
    }

    /// Absorbs `z zᵀ` (full kind) or `diag(z∘z)` (diagonal kind).
    ///
    /// Returns `zᵀ A⁻¹ z` evaluated before the update.
    pub fn rank_one_update(&mut self, z: &SparseVec) -> Result<f64> {
        check_dim(self.dim, z.dim())?;
        let before = self.inv_quad_form(z)?;
        if z.is_zero() {
            return Ok(0.0);
        }
        match &mut self.repr {
            Repr::Diagonal(d) => {
                for (i, x) in z.iter() {
                    d[i] += x * x;
                }
            }
            Repr::Full { a, inv } => {
                let mut u = DVector::<f64>::zeros(self.dim);
                for (c, x) in z.iter() {
                    u.axpy(x, &inv.column(c), 1.0);
                }
                let denom = 1.0 + before;
                // Symmetric by construction: u[r]*u[c] == u[c]*u[r].
                inv.ger(-1.0 / denom, &u, &u, 1.0);
                for (r, xr) in z.iter() {
                    for (c, xc) in z.iter() {
                        a[(r, c)] += xr * xc;
                    }
                }
            }
        }
        self.updates += 1;
        if self.kind() == MatrixKind::Full {
            self.since_refresh += 1;
            if self.refresh_interval > 0 && self.since_refresh >= self.refresh_interval {
                self.refresh_inverse()?;
            }
        }
        Ok(before)
    }

    /// Recomputes `A⁻¹` from `A` by Cholesky factorization.
    pub fn refresh_inverse(&mut self) -> Result<()> {
        if let Repr::Full { a, inv } = &mut self.repr {
            let chol = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
            *inv = chol.inverse();
        }
        self.since_refresh = 0;
        Ok(())
    }

    /// `A⁻¹ b` using the maintained inverse.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        Ok(match &self.repr {
            Repr::Diagonal(d) => b.iter().zip(d).map(|(x, di)| x / di).collect(),
            Repr::Full { inv, .. } => {
                let x = inv * DVector::from_column_slice(b);
                x.iter().copied().collect()
            }
        })
    }

    /// `A x`.
    pub fn mul_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.repr {
            Repr::Diagonal(d) => x.iter().zip(d).map(|(x, di)| x * di).collect(),
            Repr::Full { a, .. } => {
                let y = a * DVector::from_column_slice(x);
                y.iter().copied().collect()
            }
        })
    }

    /// `A` as row-major dense rows.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        match &self.repr {
            Repr::Diagonal(d) => (0..self.dim)
                .map(|r| {
                    let mut row = vec![0.0; self.dim];
                    row[r] = d[r];
                    row
                })
                .collect(),
            Repr::Full { a, .. } => a.row_iter().map(|row| row.iter().copied().collect()).collect(),
        }
    }

    /// The maintained `A⁻¹` as row-major dense rows.
    pub fn inverse_to_dense(&self) -> Vec<Vec<f64>> {
        match &self.repr {
            Repr::Diagonal(d) => (0..self.dim)
                .map(|r| {
                    let mut row = vec![0.0; self.dim];
                    row[r] = 1.0 / d[r];
                    row
                })
                .collect(),
            Repr::Full { inv, .. } => inv.row_iter().map(|row| row.iter().copied().collect()).collect(),
        }
    }

    /// Largest entry of `|A·A⁻¹ − I|`.
    pub fn inverse_residual(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(_) => 0.0,
            Repr::Full { a, inv } => {
                let prod = a * inv;
                let mut worst: f64 = 0.0;
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        let target = if r == c { 1.0 } else { 0.0 };
                        worst = worst.max((prod[(r, c)] - target).abs());
                    }
                }
                worst
            }
        }
    }
}
