//! Without projection, `A_t w_t = A_{t−1} w_{t−1} + z_t` telescopes to
//! `w_T = (I + Σ z zᵀ)⁻¹ Σ z`, a ridge-regression closed form. The online
//! model must agree with that batch solve for any feedback sequence.

use conquer::{LinearModel, MatrixKind, SparseVec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn unit(v: Vec<f64>) -> SparseVec {
    SparseVec::from_dense(&v).unwrap().normalize_unit().unwrap()
}

fn arb_rounds(dim: usize) -> impl Strategy<Value = Vec<(Vec<f64>, Vec<f64>, bool)>> {
    let item = prop::collection::vec(-1.0f64..1.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3));
    prop::collection::vec((item.clone(), item, any::<bool>()), 1..60)
}

proptest! {
    #[test]
    fn full_model_matches_batch_ridge(rounds in arb_rounds(6)) {
        let dim = 6;
        let mut model = LinearModel::new(MatrixKind::Full, dim, 1.0).unwrap();
        let mut a = DMatrix::<f64>::identity(dim, dim);
        let mut b = DVector::<f64>::zeros(dim);
        for (m, n, up) in rounds {
            let (m, n) = (unit(m), unit(n));
            let y = if up { 1 } else { -1 };
            model.update(&m, &n, y).unwrap();
            let z = (DVector::from_vec(m.to_dense()) - DVector::from_vec(n.to_dense())) * (0.5 * y as f64);
            a += &z * z.transpose();
            b += z;
        }
        let w = a.lu().solve(&b).unwrap();
        for (x, y) in model.weights().iter().zip(w.iter()) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn diagonal_model_matches_coordinatewise_ridge(rounds in arb_rounds(5)) {
        let dim = 5;
        let mut model = LinearModel::new(MatrixKind::Diagonal, dim, 1.0).unwrap();
        let mut a = vec![1.0; dim];
        let mut b = vec![0.0; dim];
        for (m, n, up) in rounds {
            let (m, n) = (unit(m), unit(n));
            let y = if up { 1 } else { -1 };
            model.update(&m, &n, y).unwrap();
            let (dm, dn) = (m.to_dense(), n.to_dense());
            for i in 0..dim {
                let z = 0.5 * y as f64 * (dm[i] - dn[i]);
                a[i] += z * z;
                b[i] += z;
            }
        }
        for i in 0..dim {
            prop_assert!((model.weights()[i] - b[i] / a[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn confidence_shrinks_along_updated_directions(rounds in arb_rounds(4), probe in prop::collection::vec(-1.0f64..1.0, 4)) {
        prop_assume!(probe.iter().any(|x| x.abs() > 1e-3));
        let probe = unit(probe);
        let mut model = LinearModel::new(MatrixKind::Full, 4, 2.0).unwrap();
        let mut last = model.confidence_eps(&probe).unwrap();
        prop_assert!((last - 2f64.sqrt()).abs() < 1e-12);
        for (m, n, up) in rounds {
            model.update(&unit(m), &unit(n), if up { 1 } else { -1 }).unwrap();
            let now = model.confidence_eps(&probe).unwrap();
            prop_assert!(now <= last + 1e-12);
            last = now;
        }
    }
}
