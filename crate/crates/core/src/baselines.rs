//! Single-pick contextual bandit baselines adapted to item sets.
//!
//! Both score every item with one shared weight vector and are told only
//! whether their single pick had the maximal reward of the round.

use rand::Rng;

use crate::env::{instantaneous_regret, pick_error, Round, TraceRecord};
use crate::error::{Error, Result};
use crate::learner::{greedy_pick, Learner};
use crate::linalg::{MatrixKind, SparseVec};
use crate::model::LinearModel;
use crate::policy::argmax_by;
use crate::rng::SimRng;

/// Confidit: UCB pick, regression toward a randomized ±1 target.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfiditModel {
    model: LinearModel,
    alpha: f64,
}

impl ConfiditModel {
    pub fn new(kind: MatrixKind, dim: usize, eta: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ConfiditModel {
            model: LinearModel::new(kind, dim, eta)?,
            alpha,
        })
    }

    pub fn from_parts(model: LinearModel, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ConfiditModel { model, alpha })
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        self.model.weights()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("alpha must lie in (-1, 1], got {alpha}")))
    }
}

/// Picks `argmax Δ̂(m) + ε(m)`, asks whether it was best, and updates with
/// `z = Φ_m`, `A ← A + zzᵀ`, `w ← w + (s − Δ̂(m)) A⁻¹ z`.
///
/// `s = +1` after a correct pick; after an incorrect one `s = +1` with
/// probability `(1 − α)/2` and `−1` otherwise.
pub fn confidit_step<F, R>(model: &mut ConfiditModel, items: &[SparseVec], is_best: F, rng: &mut R) -> Result<usize>
where
    F: FnOnce(usize) -> bool,
    R: Rng + ?Sized,
{
    if items.is_empty() {
        return Err(Error::TooFewItems { needed: 1, got: 0 });
    }
    let lm = &model.model;
    let scores = lm.score_items(items)?;
    let eps: Vec<f64> = items.iter().map(|it| lm.confidence_eps(it)).collect::<Result<_>>()?;
    let (m, _) = argmax_by(items.len(), None, |i| scores[i] + eps[i]).expect("non-empty");

    let s = if is_best(m) || rng.random::<f64>() < (1.0 - model.alpha) / 2.0 {
        1.0
    } else {
        -1.0
    };
    let residual = s - scores[m];
    let z = &items[m];
    let lm = &mut model.model;
    lm.matrix_mut().rank_one_update(z)?;
    let mut w = lm.weights().to_vec();
    lm.matrix().add_inv_times(residual, z, &mut w)?;
    lm.set_weights(w)?;
    Ok(m)
}

/// Banditron: ε-greedy exploration with an importance-weighted perceptron
/// update on shared item features.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditronModel {
    weights: Vec<f64>,
    gamma: f64,
}

impl BanditronModel {
    pub fn new(dim: usize, gamma: f64) -> Result<Self> {
        BanditronModel::from_parts(vec![0.0; dim], gamma)
    }

    pub fn from_parts(weights: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(Error::OutOfRange(format!("gamma must lie in (0, 0.5], got {gamma}")));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::OutOfRange("non-finite weight".into()));
        }
        Ok(BanditronModel { weights, gamma })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `P(k) = (1 − γ)·1[k = greedy] + γ/K`.
pub fn banditron_distribution(greedy: usize, k: usize, gamma: f64) -> Vec<f64> {
    let share = gamma / k as f64;
    let mut p = vec![share; k];
    p[greedy] = 1.0 - share * (k - 1) as f64;
    p
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples an item from [`banditron_distribution`] around the greedy pick,
/// asks whether it was best, then applies
/// `w ← w + (1[correct]/P(k)) Φ_k − Φ_greedy`.
pub fn banditron_step<F, R>(model: &mut BanditronModel, items: &[SparseVec], is_best: F, rng: &mut R) -> Result<usize>
where
    F: FnOnce(usize) -> bool,
    R: Rng + ?Sized,
{
    if items.is_empty() {
        return Err(Error::TooFewItems { needed: 1, got: 0 });
    }
    let greedy = greedy_pick(&model.weights, items)?;
    let probs = banditron_distribution(greedy, items.len(), model.gamma);
    let picked = sample_index(&probs, rng);
    let reward = if is_best(picked) { 1.0 / probs[picked] } else { 0.0 };
    for (i, v) in items[picked].iter() {
        model.weights[i] += reward * v;
    }
    for (i, v) in items[greedy].iter() {
        model.weights[i] -= v;
    }
    Ok(picked)
}

fn baseline_record(t: u64, round: &Round, m: usize, correct: bool, q_t: Option<f64>) -> Result<TraceRecord> {
    Ok(TraceRecord {
        t,
        m,
        n: None,
        y: Some(if correct { 1 } else { -1 }),
        instantaneous_regret: instantaneous_regret(round, m, None)?,
        error: pick_error(round, m)?,
        queried: true,
        eps_t: 0.0,
        q_t,
    })
}

/// [`ConfiditModel`] as a [`Learner`].
#[derive(Clone, Debug)]
pub struct Confidit {
    model: ConfiditModel,
    played: u64,
}

impl Confidit {
    pub fn new(model: ConfiditModel) -> Self {
        Confidit { model, played: 0 }
    }

    pub fn model(&self) -> &ConfiditModel {
        &self.model
    }
}

impl Learner for Confidit {
    fn name(&self) -> String {
        "Confidit".into()
    }

    fn train_round(&mut self, round: &Round, q_t: Option<f64>, rng: &mut SimRng) -> Result<TraceRecord> {
        self.played += 1;
        let mut correct = false;
        let m = confidit_step(
            &mut self.model,
            round.items(),
            |m| {
                correct = round.is_best(m);
                correct
            },
            rng,
        )?;
        baseline_record(self.played, round, m, correct, q_t)
    }

    fn predict(&self, items: &[SparseVec]) -> Result<usize> {
        greedy_pick(self.model.weights(), items)
    }
}

/// [`BanditronModel`] as a [`Learner`].
#[derive(Clone, Debug)]
pub struct Banditron {
    model: BanditronModel,
    played: u64,
}

impl Banditron {
    pub fn new(model: BanditronModel) -> Self {
        Banditron { model, played: 0 }
    }

    pub fn model(&self) -> &BanditronModel {
        &self.model
    }
}

impl Learner for Banditron {
    fn name(&self) -> String {
        "Banditron".into()
    }

    fn train_round(&mut self, round: &Round, q_t: Option<f64>, rng: &mut SimRng) -> Result<TraceRecord> {
        self.played += 1;
        let mut correct = false;
        let m = banditron_step(
            &mut self.model,
            round.items(),
            |m| {
                correct = round.is_best(m);
                correct
            },
            rng,
        )?;
        baseline_record(self.played, round, m, correct, q_t)
    }

    fn predict(&self, items: &[SparseVec]) -> Result<usize> {
        greedy_pick(self.model.weights(), items)
    }
}
