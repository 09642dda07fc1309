//! Mahalanobis projection of the weights onto `{w : |w·Φ_m| ≤ 1 ∀m}`.
//!
//! The feasible set is an intersection of slabs. Each step projects onto a
//! single slab under `d(a, b) = ½ (a−b)ᵀ A (a−b)`, which has the closed
//! form `v ← v − A⁻¹Φ · sign(v·Φ) · max(|v·Φ| − 1, 0) / (Φᵀ A⁻¹ Φ)`.
//! A signed dual variable per slab is carried between sweeps and undone
//! before each re-projection (Hildreth's correction). Without it the
//! iteration only reaches *a* feasible point, not the nearest one. From
//! zero duals the first sweep is exactly the plain cyclic projection.
//!
//! Nearly parallel slabs make the sweeps converge slowly, so every
//! [`POLISH_EVERY`] sweeps the slabs with nonzero duals are taken as the
//! active set and the equality-constrained problem is solved directly.
//! The result is kept only if it satisfies the optimality conditions.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{SecondOrderMatrix, SparseVec};
use crate::rng;

/// Order in which single-slab projections are applied within a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintOrder {
    #[default]
    Cyclic,
    /// A fresh permutation per sweep, drawn from the given seed.
    Random(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub max_sweeps: usize,
    pub tol: f64,
    pub order: ConstraintOrder,
    /// Try the exact active-set finish every [`POLISH_EVERY`] sweeps.
    pub polish: bool,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            max_sweeps: 100,
            tol: 1e-6,
            order: ConstraintOrder::Cyclic,
            polish: true,
        }
    }
}

/// Result of a projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub weights: Vec<f64>,
    /// False when `max_sweeps` ran out first; `weights` is then the last iterate.
    pub converged: bool,
    pub sweeps: usize,
    /// Largest remaining `|w·Φ| − 1` (≤ 0 when feasible).
    pub max_violation: f64,
}

/// Projects `weights` onto the slabs defined by `items` in the metric of `matrix`.
pub fn project_weights(
    weights: &[f64],
    matrix: &SecondOrderMatrix,
    items: &[SparseVec],
    config: &ProjectionConfig,
) -> Result<Projection> {
    if items.is_empty() {
        return Err(Error::TooFewItems { needed: 1, got: 0 });
    }
    if !(config.tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "projection tolerance must be non-negative".into(),
        ));
    }
    check_dim(matrix.dim(), weights.len())?;
    for item in items {
        check_dim(matrix.dim(), item.dim())?;
    }

    let curvature: Vec<f64> = items
        .iter()
        .map(|item| matrix.inv_quad_form(item))
        .collect::<Result<_>>()?;
    let mut duals = vec![0.0; items.len()];
    let mut v = weights.to_vec();
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut order_rng = match config.order {
        ConstraintOrder::Random(seed) => Some(rng::stream(seed, &[rng::label("projection")])),
        ConstraintOrder::Cyclic => None,
    };

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        if let Some(r) = order_rng.as_mut() {
            order.shuffle(r);
        }
        let mut movement: f64 = 0.0;
        for &m in &order {
            let q = curvature[m];
            if q <= 0.0 {
                continue;
            }
            let item = &items[m];
            // Undo this slab's previous correction, then project afresh.
            let relaxed = item.dot_dense_unchecked(&v) + duals[m] * q;
            let fresh = relaxed.signum() * (relaxed.abs() - 1.0).max(0.0) / q;
            let step = fresh - duals[m];
            if step != 0.0 {
                matrix.add_inv_times(-step, item, &mut v)?;
                duals[m] = fresh;
                movement = movement.max(step.abs() * q.sqrt());
            }
        }
        if movement <= config.tol && max_violation(&v, items) <= config.tol {
            converged = true;
            break;
        }
        if config.polish && (sweeps % POLISH_EVERY == 0 || sweeps == config.max_sweeps) {
            if let Some(w) = polish(weights, matrix, items, &duals, config.tol)? {
                v = w;
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("projection did not converge within {} sweeps", config.max_sweeps);
    }
    Ok(Projection {
        max_violation: max_violation(&v, items),
        weights: v,
        converged,
        sweeps,
    })
}

/// Sweeps between attempts to finish by solving on the active set.
pub const POLISH_EVERY: usize = 10;

/// Small primal active-set solve seeded with the slabs whose dual is
/// nonzero, each tight on the side given by the dual's sign. A wrongly
/// signed multiplier drops its slab; the most violated slab is added.
/// Returns a point only when it is feasible within `tol` with correctly
/// signed multipliers, which certifies optimality.
fn polish(
    start: &[f64],
    matrix: &SecondOrderMatrix,
    items: &[SparseVec],
    duals: &[f64],
    tol: f64,
) -> Result<Option<Vec<f64>>> {
    let mut active: Vec<(usize, f64)> = (0..items.len())
        .filter(|&m| duals[m] != 0.0)
        .map(|m| (m, duals[m].signum()))
        .collect();
    let mut dirs: Vec<Option<Vec<f64>>> = vec![None; items.len()];
    for _ in 0..2 * items.len() + 2 {
        for &(m, _) in &active {
            if dirs[m].is_none() {
                dirs[m] = Some(matrix.inv_times(&items[m])?);
            }
        }
        let s = active.len();
        let dir = |i: usize| dirs[active[i].0].as_deref().expect("computed above");
        let gram = DMatrix::from_fn(s, s, |i, j| items[active[i].0].dot_dense_unchecked(dir(j)));
        let rhs = DVector::from_fn(s, |i, _| items[active[i].0].dot_dense_unchecked(start) - active[i].1);
        let Some(lambda) = gram.lu().solve(&rhs) else {
            return Ok(None);
        };
        let wrong = (0..s)
            .map(|i| (i, lambda[i] * active[i].1))
            .filter(|&(_, l)| !(l >= 0.0))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = wrong {
            active.remove(i);
            continue;
        }
        let mut w = start.to_vec();
        for i in 0..s {
            for (wi, di) in w.iter_mut().zip(dir(i)) {
                *wi -= lambda[i] * di;
            }
        }
        let worst = (0..items.len())
            .filter(|m| !active.iter().any(|a| a.0 == *m))
            .map(|m| (m, items[m].dot_dense_unchecked(&w)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
        match worst {
            Some((m, x)) if x.abs() - 1.0 > tol => active.push((m, x.signum())),
            _ => return Ok((max_violation(&w, items) <= tol).then_some(w)),
        }
    }
    Ok(None)
}

fn max_violation(v: &[f64], items: &[SparseVec]) -> f64 {
    items
        .iter()
        .map(|item| item.dot_dense_unchecked(v).abs() - 1.0)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MatrixKind;

    #[test]
    fn feasible_input_is_untouched() {
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 3).unwrap();
        let items = vec![SparseVec::unit(3, 0).unwrap(), SparseVec::unit(3, 2).unwrap()];
        let w = vec![0.5, 7.0, -0.9];
        let p = project_weights(&w, &a, &items, &ProjectionConfig::default()).unwrap();
        assert_eq!(p.weights, w);
        assert!(p.converged);
        assert_eq!(p.sweeps, 1);
    }

    #[test]
    fn clamps_scalar_to_boundary() {
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 1).unwrap();
        let items = vec![SparseVec::unit(1, 0).unwrap()];
        let p = project_weights(&[2.0], &a, &items, &ProjectionConfig::default()).unwrap();
        assert_eq!(p.weights, vec![1.0]);
        let p = project_weights(&[-3.0], &a, &items, &ProjectionConfig::default()).unwrap();
        assert_eq!(p.weights, vec![-1.0]);
    }

    #[test]
    fn respects_metric() {
        // A = diag(4, 1), constraint (1,1)/√2: the step is along A⁻¹Φ ∝ (1, 4).
        let a = SecondOrderMatrix::from_diagonal(vec![4.0, 1.0], 0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let items = vec![SparseVec::new(2, vec![(0, s), (1, s)]).unwrap()];
        let p = project_weights(&[3.0, 3.0], &a, &items, &ProjectionConfig::default()).unwrap();
        let moved = [3.0 - p.weights[0], 3.0 - p.weights[1]];
        assert!((moved[1] / moved[0] - 4.0).abs() < 1e-12);
        assert!((items[0].dot_dense(&p.weights).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let items = vec![
            SparseVec::unit(2, 0).unwrap(),
            SparseVec::new(2, vec![(0, s), (1, s)]).unwrap(),
        ];
        let cfg = ProjectionConfig {
            max_sweeps: 1,
            tol: 0.0,
            polish: false,
            ..Default::default()
        };
        let p = project_weights(&[5.0, 5.0], &a, &items, &cfg).unwrap();
        assert!(!p.converged);
        assert_eq!(p.sweeps, 1);
    }

    #[test]
    fn polishing_finishes_nearly_parallel_slabs() {
        // e₁ and a slab tilted by 0.01 rad. Only the tilted one binds at the
        // optimum (the e₁ multiplier would be negative), so the answer is
        // the single-slab projection v − (φ·v − 1)φ.
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 2).unwrap();
        let t = 0.01f64;
        let phi = [t.cos(), t.sin()];
        let items = vec![SparseVec::unit(2, 0).unwrap(), SparseVec::from_dense(&phi).unwrap()];
        let v = [3.0, 0.2];
        let excess = phi[0] * v[0] + phi[1] * v[1] - 1.0;
        let expected = [v[0] - excess * phi[0], v[1] - excess * phi[1]];

        let p = project_weights(&v, &a, &items, &ProjectionConfig::default()).unwrap();
        assert!(p.converged);
        assert!(p.sweeps <= POLISH_EVERY);
        for (x, y) in p.weights.iter().zip(expected) {
            assert!((x - y).abs() < 1e-9, "{:?} vs {expected:?}", p.weights);
        }
        let plain = ProjectionConfig {
            polish: false,
            ..Default::default()
        };
        let slow = project_weights(&v, &a, &items, &plain).unwrap();
        assert!(slow.sweeps > POLISH_EVERY);
    }

    #[test]
    fn random_order_reaches_the_same_point() {
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 3).unwrap();
        let items: Vec<SparseVec> = [[1.0, 0.2, 0.0], [0.3, 1.0, 0.1], [0.5, 0.5, 0.5]]
            .iter()
            .map(|d| SparseVec::from_dense(d).unwrap().normalize_unit().unwrap())
            .collect();
        let w = [4.0, -3.0, 2.0];
        let cyclic = project_weights(&w, &a, &items, &ProjectionConfig::default()).unwrap();
        let random = project_weights(
            &w,
            &a,
            &items,
            &ProjectionConfig {
                order: ConstraintOrder::Random(9),
                ..Default::default()
            },
        )
        .unwrap();
        for (x, y) in cyclic.weights.iter().zip(&random.weights) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn empty_item_list_is_an_error() {
        let a = SecondOrderMatrix::identity(MatrixKind::Full, 2).unwrap();
        assert!(project_weights(&[0.0, 0.0], &a, &[], &ProjectionConfig::default()).is_err());
    }
}
