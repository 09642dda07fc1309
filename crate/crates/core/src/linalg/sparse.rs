//! Sparse feature vectors.

use std::fmt;

use crate::error::{check_dim, Error, Result};

/// A sparse real vector of fixed dimension.
///
/// Indices are strictly increasing and every stored value is finite.
/// Explicit zeros are allowed but never produced by the arithmetic here.
#[derive(Clone, PartialEq)]
pub struct SparseVec {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    /// Largest supported dimension.
    pub const MAX_DIM: usize = 1 << 31;

    /// Builds a vector from `(index, value)` pairs that are already sorted
    /// by strictly increasing index.
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self> {
        check_dimension(dim)?;
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut prev: Option<u32> = None;
        for (i, v) in entries {
            if i as usize >= dim {
                return Err(Error::InvalidSparse(format!(
                    "index {i} out of range for dimension {dim}"
                )));
            }
            if let Some(p) = prev {
                if i <= p {
                    return Err(Error::InvalidSparse(format!(
                        "indices must be strictly increasing ({p} then {i})"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(Error::InvalidSparse(format!("non-finite value at index {i}")));
            }
            prev = Some(i);
            indices.push(i);
            values.push(v);
        }
        Ok(SparseVec { dim, indices, values })
    }

    /// Builds a vector from unordered pairs, summing duplicates and
    /// dropping entries that end up exactly zero.
    pub fn from_pairs(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        SparseVec::new(dim, merged)
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        SparseVec::new(values.len(), entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        SparseVec::new(dim, Vec::new())
    }

    /// The standard basis vector `e_index`.
    pub fn unit(dim: usize, index: usize) -> Result<Self> {
        SparseVec::new(dim, vec![(index as u32, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Exact sparse inner product by merging the two index lists.
    pub fn dot(&self, other: &SparseVec) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        Ok(acc)
    }

    /// Inner product with a dense vector of the same dimension.
    pub fn dot_dense(&self, dense: &[f64]) -> Result<f64> {
        check_dim(self.dim, dense.len())?;
        Ok(self.dot_dense_unchecked(dense))
    }

    #[inline]
    pub(crate) fn dot_dense_unchecked(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    /// Returns `self / ‖self‖`.
    pub fn normalize_unit(&self) -> Result<SparseVec> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(1.0 / norm))
    }

    pub fn scale(&self, factor: f64) -> SparseVec {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        if factor == 0.0 {
            out.indices.clear();
            out.values.clear();
        }
        out
    }

    /// `self + factor * other`, with exact cancellations removed.
    pub fn add_scaled(&self, factor: f64, other: &SparseVec) -> Result<SparseVec> {
        check_dim(self.dim, other.dim)?;
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        let (mut a, mut b) = (0, 0);
        let mut push = |i: u32, v: f64| {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        };
        while a < self.indices.len() || b < other.indices.len() {
            let ia = self.indices.get(a).copied().unwrap_or(u32::MAX);
            let ib = other.indices.get(b).copied().unwrap_or(u32::MAX);
            if a < self.indices.len() && (b >= other.indices.len() || ia < ib) {
                push(ia, self.values[a]);
                a += 1;
            } else if b < other.indices.len() && (a >= self.indices.len() || ib < ia) {
                push(ib, factor * other.values[b]);
                b += 1;
            } else {
                push(ia, self.values[a] + factor * other.values[b]);
                a += 1;
                b += 1;
            }
        }
        Ok(SparseVec {
            dim: self.dim,
            indices,
            values,
        })
    }

    /// `self - other`.
    pub fn sub(&self, other: &SparseVec) -> Result<SparseVec> {
        self.add_scaled(-1.0, other)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseVec(dim={}, [", self.dim)?;
        for (k, (i, v)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        write!(f, "])")
    }
}

fn check_dimension(dim: usize) -> Result<()> {
    if dim == 0 || dim > SparseVec::MAX_DIM {
        return Err(Error::InvalidSparse(format!("dimension {dim} outside 1..=2^31")));
    }
    Ok(())
}

/// Dense inner product.
pub fn dense_dot(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_dot(a: &SparseVec, b: &SparseVec) -> f64 {
        a.to_dense().iter().zip(b.to_dense()).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn dot_of_basis_vectors() {
        let e1 = SparseVec::unit(4, 0).unwrap();
        let e2 = SparseVec::unit(4, 1).unwrap();
        assert_eq!(e1.dot(&e1).unwrap(), 1.0);
        assert_eq!(e1.dot(&e2).unwrap(), 0.0);
    }

    #[test]
    fn dot_matches_dense() {
        let a = SparseVec::new(4, vec![(0, 0.6), (3, 0.8)]).unwrap();
        let b = SparseVec::new(4, vec![(3, 0.5)]).unwrap();
        let expected = brute_dot(&a, &b);
        assert!((expected - 0.4).abs() < 1e-15);
        assert!((a.dot(&b).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn dot_rejects_dimension_mismatch() {
        let a = SparseVec::unit(3, 0).unwrap();
        let b = SparseVec::unit(4, 0).unwrap();
        assert!(matches!(a.dot(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_unsorted_and_out_of_range() {
        assert!(SparseVec::new(4, vec![(2, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVec::new(4, vec![(1, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVec::new(4, vec![(4, 1.0)]).is_err());
        assert!(SparseVec::new(4, vec![(0, f64::NAN)]).is_err());
        assert!(SparseVec::new(0, vec![]).is_err());
    }

    #[test]
    fn from_pairs_merges_duplicates() {
        let v = SparseVec::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, 0.5), (2, 1.0), (2, -1.0)]).unwrap();
        assert_eq!(v.indices(), &[1, 3]);
        assert_eq!(v.values(), &[2.0, 1.5]);
    }

    #[test]
    fn normalize_three_four_five() {
        let v = SparseVec::new(2, vec![(0, 3.0), (1, 4.0)]).unwrap();
        let u = v.normalize_unit().unwrap();
        assert!((u.values()[0] - 0.6).abs() < 1e-15);
        assert!((u.values()[1] - 0.8).abs() < 1e-15);
        let e5 = SparseVec::unit(8, 5).unwrap();
        assert_eq!(e5.normalize_unit().unwrap(), e5);
    }

    #[test]
    fn normalize_zero_fails() {
        let z = SparseVec::zeros(3).unwrap();
        assert!(matches!(z.normalize_unit(), Err(Error::ZeroVector)));
    }

    #[test]
    fn sub_cancels_exactly() {
        let a = SparseVec::new(4, vec![(0, 1.0), (2, 0.5)]).unwrap();
        let d = a.sub(&a).unwrap();
        assert_eq!(d.nnz(), 0);
        let b = SparseVec::new(4, vec![(1, 1.0), (2, 0.25)]).unwrap();
        assert_eq!(a.sub(&b).unwrap().to_dense(), vec![1.0, -1.0, 0.25, 0.0]);
    }

    fn arb_sparse(dim: usize) -> impl Strategy<Value = SparseVec> {
        proptest::collection::btree_map(0..dim as u32, -10.0f64..10.0, 1..10)
            .prop_map(move |m| SparseVec::from_pairs(dim, m.into_iter().collect()).unwrap())
    }

    proptest! {
        #[test]
        fn normalized_has_unit_norm(v in arb_sparse(64)) {
            prop_assume!(v.norm() > 1e-6);
            let u = v.normalize_unit().unwrap();
            prop_assert!((u.norm() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn sparse_dot_agrees_with_dense(a in arb_sparse(32), b in arb_sparse(32)) {
            prop_assert!((a.dot(&b).unwrap() - brute_dot(&a, &b)).abs() < 1e-9);
            prop_assert!((a.dot_dense(&b.to_dense()).unwrap() - brute_dot(&a, &b)).abs() < 1e-9);
        }

        #[test]
        fn add_scaled_agrees_with_dense(a in arb_sparse(16), b in arb_sparse(16), f in -3.0f64..3.0) {
            let got = a.add_scaled(f, &b).unwrap().to_dense();
            let (da, db) = (a.to_dense(), b.to_dense());
            for i in 0..16 {
                prop_assert!((got[i] - (da[i] + f * db[i])).abs() < 1e-12);
            }
        }
    }
}
