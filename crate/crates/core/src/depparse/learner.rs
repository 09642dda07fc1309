//! CNQR-DP: parse with the current model, ask about the single most
//! confusing edge, update on the answer.

use std::io::Write;

use rand::Rng;

use super::sentence::{aggregate_features, Sentence};
use super::tree::{cle_max_arborescence, ParseTree};
use crate::env::{lemma1_eps, preference_probability, TheoreticalEta};
use crate::error::{Error, Result};
use crate::linalg::MatrixKind;
use crate::model::LinearModel;
use crate::projection::{project_weights, ProjectionConfig};

/// "Is `current` or `alternative` the better head for `dependent`?"
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeQuery {
    pub dependent: usize,
    pub current: usize,
    pub alternative: usize,
    /// `ε(current, dependent, alternative)`.
    pub beta: f64,
}

/// `ε(i, j, k)² = η (φ(i,j) − φ(k,j))ᵀ A⁻¹ (φ(i,j) − φ(k,j))`.
pub fn edge_confusion_eps(model: &LinearModel, sentence: &Sentence, i: usize, j: usize, k: usize) -> Result<f64> {
    if j == 0 || i == j || k == j || i == k {
        return Err(Error::InvalidArgument(format!(
            "edge confusion needs distinct heads {i}, {k} for dependent {j} ≠ 0"
        )));
    }
    model.confusion_eps(sentence.edge(i, j)?, sentence.edge(k, j)?)
}

/// Every `(dependent, alternative)` pair for `tree` ranked by `β`
/// (descending), ties by dependent then alternative; returns the first
/// whose swap still yields a tree.
pub fn select_edge_query(
    model: &LinearModel,
    sentence: &Sentence,
    tree: &ParseTree,
) -> Result<Option<(EdgeQuery, ParseTree)>> {
    let n = sentence.nodes();
    let mut candidates = Vec::with_capacity(n * n);
    for j in 1..n {
        let k = tree.head(j);
        for i in 0..n {
            if i == j || i == k {
                continue;
            }
            candidates.push(EdgeQuery {
                dependent: j,
                current: k,
                alternative: i,
                beta: edge_confusion_eps(model, sentence, k, j, i)?,
            });
        }
    }
    // Stable sort keeps the (j, i) order among equal β.
    candidates.sort_by(|a, b| b.beta.total_cmp(&a.beta));
    for q in candidates {
        if !tree.is_ancestor(q.dependent, q.alternative) {
            let alt = tree.with_head(q.dependent, q.alternative)?;
            return Ok(Some((q, alt)));
        }
    }
    Ok(None)
}

/// Result of one CNQR-DP round.
#[derive(Clone, Debug, PartialEq)]
pub struct DpOutcome {
    pub m_tree: ParseTree,
    /// Absent only for single-word sentences, which admit no alternative.
    pub n_tree: Option<ParseTree>,
    pub query: Option<EdgeQuery>,
    pub y: Option<i8>,
    /// `zᵀ A_{t−1}⁻¹ z` of the update, 0 without one.
    pub h: f64,
}

/// Decodes `m` by Chu–Liu–Edmonds, swaps the most confusing edge to get
/// `n`, asks `feedback` and applies the second-order update with
/// `z = ½ y (Φ(m) − Φ(n))`.
pub fn dp_step<F, R>(model: &mut LinearModel, sentence: &Sentence, feedback: F, rng: &mut R) -> Result<DpOutcome>
where
    F: FnOnce(&EdgeQuery, &mut R) -> Result<i8>,
    R: Rng + ?Sized,
{
    crate::error::check_dim(model.dim(), sentence.dim())?;
    let m_tree = cle_max_arborescence(&sentence.edge_scores(model.weights())?)?;
    let Some((query, n_tree)) = select_edge_query(model, sentence, &m_tree)? else {
        return Ok(DpOutcome {
            m_tree,
            n_tree: None,
            query: None,
            y: None,
            h: 0.0,
        });
    };
    let y = feedback(&query, rng)?;
    let phi_m = aggregate_features(sentence, &m_tree)?;
    let phi_n = aggregate_features(sentence, &n_tree)?;
    let info = model.update(&phi_m, &phi_n, y)?;
    Ok(DpOutcome {
        m_tree,
        n_tree: Some(n_tree),
        query: Some(query),
        y: Some(y),
        h: info.z_inv_quad,
    })
}

/// Simulated annotator: `+1` if only the current edge is gold, `−1` if
/// only the alternative is, a fair coin otherwise.
pub fn gold_annotator<R: Rng + ?Sized>(gold: &ParseTree, query: &EdgeQuery, rng: &mut R) -> i8 {
    let current = gold.head(query.dependent) == query.current;
    let alternative = gold.head(query.dependent) == query.alternative;
    match (current, alternative) {
        (true, false) => 1,
        (false, true) => -1,
        _ => {
            if rng.random_bool(0.5) {
                1
            } else {
                -1
            }
        }
    }
}

/// Linear-reward annotator: `+1` with probability `(1 + ½(u·Φ(m) − u·Φ(n)))/2`.
pub fn linear_annotator<R: Rng + ?Sized>(sentence: &Sentence, u: &[f64], query: &EdgeQuery, rng: &mut R) -> Result<i8> {
    let scale = 1.0 / (sentence.nodes() - 1) as f64;
    let r_m = sentence.edge(query.current, query.dependent)?.dot_dense(u)?;
    let r_n = sentence.edge(query.alternative, query.dependent)?.dot_dense(u)?;
    // The trees share every other edge, so only this edge's share differs;
    // a common offset cancels in the preference probability.
    let p = preference_probability(scale * r_m, scale * r_n)?;
    Ok(if rng.random_bool(p) { 1 } else { -1 })
}

/// One logged CNQR-DP round.
#[derive(Clone, Debug, PartialEq)]
pub struct DpRecord {
    pub t: u64,
    pub query: Option<EdgeQuery>,
    pub y: Option<i8>,
    /// Edge accuracy of `m` against the gold tree, when known.
    pub accuracy: Option<f64>,
    /// `√(2 h η)`.
    pub eps_t: f64,
}

pub const DP_TRACE_HEADER: &str = "t,dependent,current,alternative,beta,y,accuracy,eps_t";

pub fn write_dp_trace<W: Write>(out: &mut W, records: &[DpRecord]) -> std::io::Result<()> {
    writeln!(out, "{DP_TRACE_HEADER}")?;
    for r in records {
        match &r.query {
            Some(q) => write!(
                out,
                "{},{},{},{},{:.9},",
                r.t, q.dependent, q.current, q.alternative, q.beta
            )?,
            None => write!(out, "{},,,,,", r.t)?,
        }
        let y = r.y.map(|y| y.to_string()).unwrap_or_default();
        let acc = r.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
        writeln!(out, "{y},{acc},{:.9}", r.eps_t)?;
    }
    Ok(())
}

/// CNQR-DP learner state.
#[derive(Clone, Debug)]
pub struct CnqrDp {
    model: LinearModel,
    projection: Option<ProjectionConfig>,
    schedule: Option<TheoreticalEta>,
    played: u64,
}

impl CnqrDp {
    pub fn new(kind: MatrixKind, dim: usize, eta: f64) -> Result<Self> {
        Ok(CnqrDp {
            model: LinearModel::new(kind, dim, eta)?,
            projection: None,
            schedule: None,
            played: 0,
        })
    }

    /// Projects onto `|w·φ(i, j)| ≤ 1` for every candidate edge before
    /// decoding.
    pub fn with_projection(mut self, config: Option<ProjectionConfig>) -> Self {
        self.projection = config;
        self
    }

    pub fn with_theoretical_eta(mut self, schedule: TheoreticalEta) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    /// Greedy parse with the current weights.
    pub fn parse(&self, sentence: &Sentence) -> Result<ParseTree> {
        cle_max_arborescence(&sentence.edge_scores(self.model.weights())?)
    }

    pub fn play<F, R>(&mut self, sentence: &Sentence, feedback: F, rng: &mut R) -> Result<(DpOutcome, DpRecord)>
    where
        F: FnOnce(&EdgeQuery, &mut R) -> Result<i8>,
        R: Rng + ?Sized,
    {
        self.played += 1;
        if let Some(s) = self.schedule.as_mut() {
            let eta = s.begin_round(0.0);
            self.model.set_eta(eta)?;
        }
        if let Some(config) = &self.projection {
            let items: Vec<_> = sentence.edge_features().cloned().collect();
            let p = project_weights(self.model.weights(), self.model.matrix(), &items, config)?;
            self.model.set_weights(p.weights)?;
        }
        let eta = self.model.eta();
        let outcome = dp_step(&mut self.model, sentence, feedback, rng)?;
        if let (Some(s), Some(_)) = (self.schedule.as_mut(), outcome.y) {
            s.record_update(outcome.h);
        }
        let accuracy = sentence.gold().map(|g| outcome.m_tree.accuracy(g)).transpose()?;
        let record = DpRecord {
            t: self.played,
            query: outcome.query,
            y: outcome.y,
            accuracy,
            eps_t: lemma1_eps(outcome.h, eta),
        };
        Ok((outcome, record))
    }
}
