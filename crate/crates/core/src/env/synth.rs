//! Synthetic linear environments with optional bounded misspecification.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::diagnostics::approx_error_q;
use super::round::Round;
use crate::error::{Error, Result};
use crate::linalg::SparseVec;
use crate::rng::{self, SimRng};

/// Parameters of a synthetic environment.
///
/// Items are drawn uniformly from the unit sphere (or from the sphere of a
/// random `sparsity`-dimensional coordinate subspace). Rewards are
/// `u·Φ + noise·U(−1, 1)` clipped to `[−1, 1]`, so `q_t ≤ noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dim: usize,
    pub k: usize,
    pub rounds: usize,
    pub u: Vec<f64>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub sparsity: Option<usize>,
    pub seed: u64,
}

impl SynthSpec {
    /// A spec whose `u` is a uniformly random direction scaled to `u_norm`.
    pub fn with_random_u(dim: usize, k: usize, rounds: usize, u_norm: f64, noise: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u_norm) {
            return Err(Error::OutOfRange(format!("‖u‖ must lie in [0, 1], got {u_norm}")));
        }
        let mut r = rng::stream(seed, &[rng::label("synth-u")]);
        let u = if dim == 0 || u_norm == 0.0 {
            vec![0.0; dim]
        } else {
            scale_to(gaussian(&mut r, dim), u_norm)
        };
        let spec = SynthSpec {
            dim,
            k,
            rounds,
            u,
            noise,
            sparsity: None,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if self.k < 2 {
            return Err(Error::TooFewItems { needed: 2, got: self.k });
        }
        if self.u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.u.len(),
            });
        }
        let norm = self.u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm <= 1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("‖u‖ = {norm} exceeds 1")));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::OutOfRange(format!(
                "noise amplitude {} outside [0, 1]",
                self.noise
            )));
        }
        if let Some(s) = self.sparsity {
            if s == 0 || s > self.dim {
                return Err(Error::OutOfRange(format!("sparsity {s} outside 1..={}", self.dim)));
            }
        }
        Ok(())
    }

    pub fn u_norm(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn gaussian(r: &mut SimRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
}

fn scale_to(mut v: Vec<f64>, norm: f64) -> Vec<f64> {
    let cur = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if cur > 0.0 {
        v.iter_mut().for_each(|x| *x *= norm / cur);
    }
    v
}

/// Deterministic stream of rounds for a [`SynthSpec`].
#[derive(Clone, Debug)]
pub struct SynthEnv {
    spec: SynthSpec,
    rng: SimRng,
    emitted: usize,
}

impl SynthEnv {
    pub fn new(spec: SynthSpec) -> Result<Self> {
        spec.validate()?;
        let rng = rng::stream(spec.seed, &[rng::label("synth-rounds")]);
        Ok(SynthEnv { spec, rng, emitted: 0 })
    }

    pub fn spec(&self) -> &SynthSpec {
        &self.spec
    }

    fn draw_item(&mut self) -> SparseVec {
        let dim = self.spec.dim;
        loop {
            let v = match self.spec.sparsity {
                Some(s) if s < dim => {
                    let mut support: Vec<usize> = index::sample(&mut self.rng, dim, s).into_vec();
                    support.sort_unstable();
                    let values = gaussian(&mut self.rng, s);
                    SparseVec::new(dim, support.into_iter().map(|i| i as u32).zip(values).collect())
                }
                _ => SparseVec::from_dense(&gaussian(&mut self.rng, dim)),
            }
            .expect("indices in range");
            if let Ok(unit) = v.normalize_unit() {
                return unit;
            }
        }
    }

    /// The next round and its approximation error `q_t` against `u`.
    pub fn next_round(&mut self) -> Option<(Round, f64)> {
        if self.emitted >= self.spec.rounds {
            return None;
        }
        self.emitted += 1;
        let items: Vec<SparseVec> = (0..self.spec.k).map(|_| self.draw_item()).collect();
        let noise = self.spec.noise;
        let rewards: Vec<f64> = items
            .iter()
            .map(|item| {
                let clean = item.dot_dense_unchecked(&self.spec.u);
                let jitter = if noise > 0.0 {
                    noise * self.rng.random_range(-1.0..=1.0)
                } else {
                    0.0
                };
                (clean + jitter).clamp(-1.0, 1.0)
            })
            .collect();
        let round = Round::new(items, rewards).expect("generated round is valid");
        let q = approx_error_q(&round, &self.spec.u).expect("dimensions agree");
        Some((round, q))
    }
}

impl Iterator for SynthEnv {
    type Item = (Round, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_round()
    }
}
