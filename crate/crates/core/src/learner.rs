//! Online learners driven round by round against an environment.

use crate::env::{instantaneous_regret, lemma1_eps, pick_error, FeedbackMechanism, Round, TheoreticalEta, TraceRecord};
use crate::error::Result;
use crate::linalg::{MatrixKind, SparseVec};
use crate::model::LinearModel;
use crate::policy::{argmax_by, select_pair, PairDecision, PolicyKind};
use crate::projection::{project_weights, ProjectionConfig};
use crate::rng::SimRng;

/// Anything that can be trained online on rounds and then frozen for
/// greedy prediction.
pub trait Learner: Send {
    fn name(&self) -> String;

    /// Plays one training round; `q_t` is the approximation error when the
    /// environment knows it.
    fn train_round(&mut self, round: &Round, q_t: Option<f64>, rng: &mut SimRng) -> Result<TraceRecord>;

    /// Greedy first pick with frozen weights.
    fn predict(&self, items: &[SparseVec]) -> Result<usize>;

    /// Rounds in which no feedback was requested.
    fn skipped_rounds(&self) -> u64 {
        0
    }
}

/// Greedy pick over `w·Φ`, ties to the lowest index.
pub(crate) fn greedy_pick(weights: &[f64], items: &[SparseVec]) -> Result<usize> {
    let scores: Vec<f64> = items.iter().map(|it| it.dot_dense(weights)).collect::<Result<_>>()?;
    argmax_by(scores.len(), None, |i| scores[i])
        .map(|(i, _)| i)
        .ok_or(crate::Error::TooFewItems { needed: 1, got: 0 })
}

/// A CONQUER learner: model, pair policy, optional projection, and either
/// a fixed `η` or the theoretical schedule.
#[derive(Clone, Debug)]
pub struct Conquer {
    model: LinearModel,
    policy: PolicyKind,
    projection: Option<ProjectionConfig>,
    schedule: Option<TheoreticalEta>,
    feedback: FeedbackMechanism,
    played: u64,
    skipped: u64,
    projection_failures: u64,
    last_decision: Option<PairDecision>,
}

impl Conquer {
    pub fn new(policy: PolicyKind, kind: MatrixKind, dim: usize, eta: f64) -> Result<Self> {
        Ok(Conquer {
            model: LinearModel::new(kind, dim, eta)?,
            policy,
            projection: None,
            schedule: None,
            feedback: FeedbackMechanism::Bernoulli,
            played: 0,
            skipped: 0,
            projection_failures: 0,
            last_decision: None,
        })
    }

    pub fn from_model(policy: PolicyKind, model: LinearModel) -> Self {
        Conquer {
            model,
            policy,
            projection: None,
            schedule: None,
            feedback: FeedbackMechanism::Bernoulli,
            played: 0,
            skipped: 0,
            projection_failures: 0,
            last_decision: None,
        }
    }

    pub fn with_projection(mut self, config: Option<ProjectionConfig>) -> Self {
        self.projection = config;
        self
    }

    /// Replaces the fixed `η` with the theoretical schedule.
    pub fn with_theoretical_eta(mut self, schedule: TheoreticalEta) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn with_feedback(mut self, feedback: FeedbackMechanism) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn into_model(self) -> LinearModel {
        self.model
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn rounds_played(&self) -> u64 {
        self.played
    }

    pub fn projection_failures(&self) -> u64 {
        self.projection_failures
    }

    /// Decision of the most recent round.
    pub fn last_decision(&self) -> Option<&PairDecision> {
        self.last_decision.as_ref()
    }

    /// Project, choose a pair, ask for feedback, update.
    pub fn play_round(&mut self, round: &Round, q_t: Option<f64>, rng: &mut SimRng) -> Result<TraceRecord> {
        self.played += 1;
        if let Some(schedule) = self.schedule.as_mut() {
            let eta = schedule.begin_round(q_t.unwrap_or(0.0));
            self.model.set_eta(eta)?;
        }
        if let Some(config) = &self.projection {
            let p = project_weights(self.model.weights(), self.model.matrix(), round.items(), config)?;
            if !p.converged {
                self.projection_failures += 1;
            }
            self.model.set_weights(p.weights)?;
        }

        let decision = select_pair(&self.model, round.items(), self.policy, rng)?;
        let (y, eps_t) = match decision.n {
            Some(n) => {
                let m = decision.m;
                let y = self.feedback.draw(round.rewards()[m], round.rewards()[n], rng)?;
                let info = self.model.update(&round.items()[m], &round.items()[n], y)?;
                let eps = lemma1_eps(info.z_inv_quad, self.model.eta());
                if let Some(schedule) = self.schedule.as_mut() {
                    schedule.record_update(info.z_inv_quad);
                }
                (Some(y), eps)
            }
            None => {
                self.skipped += 1;
                (None, 0.0)
            }
        };
        let record = TraceRecord {
            t: self.played,
            m: decision.m,
            n: decision.n,
            y,
            instantaneous_regret: instantaneous_regret(round, decision.m, decision.n)?,
            error: pick_error(round, decision.m)?,
            queried: decision.queried,
            eps_t,
            q_t,
        };
        self.last_decision = Some(decision);
        Ok(record)
    }
}

impl Learner for Conquer {
    fn name(&self) -> String {
        self.policy.name().to_string()
    }

    fn train_round(&mut self, round: &Round, q_t: Option<f64>, rng: &mut SimRng) -> Result<TraceRecord> {
        self.play_round(round, q_t, rng)
    }

    fn predict(&self, items: &[SparseVec]) -> Result<usize> {
        greedy_pick(self.model.weights(), items)
    }

    fn skipped_rounds(&self) -> u64 {
        self.skipped
    }
}
