//! Experiment configuration.
//!
//! A TOML file with the keys below; every key is optional.
//!
//! ```toml
//! algorithms = ["ttg", "gnr", "gnu", "gnc", "confidit", "banditron"]
//! k = 5
//! matrix = "diagonal"          # or "full"
//! eta_grid = [0.01, 0.1, 1.0, 10.0]
//! gamma_grid = [0.05, 0.1, 0.2, 0.3]
//! alpha_grid = [0.0, 0.5, 1.0]
//! repetitions = 10
//! seed = 0
//! project = false
//! feedback = "bernoulli"       # or "noisy-reward"
//! write_traces = true
//!
//! [data]                        # one of the sources below
//! source = "synthetic-corpus"
//! reviews = 2000
//! domains = 4
//! hash_dim = 65536
//!
//! # source = "reviews", path = "reviews.tsv", hash_dim = 1048576
//! # source = "features", path = "features.txt"
//! # source = "linear", dim = 20, u_norm = 1.0, noise = 0.0,
//! #   train_rounds = 2000, dev_rounds = 400, test_rounds = 400
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::FeedbackMechanism;
use crate::error::{Error, Result};
use crate::linalg::MatrixKind;
use crate::policy::PolicyKind;
use crate::text::DEFAULT_HASH_DIM;

/// A learner evaluated by the runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Conquer(PolicyKind),
    Confidit,
    Banditron,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Conquer(PolicyKind::Ttg),
        Algorithm::Conquer(PolicyKind::Gnr),
        Algorithm::Conquer(PolicyKind::Gnu),
        Algorithm::Conquer(PolicyKind::Gnc),
        Algorithm::Confidit,
        Algorithm::Banditron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Conquer(p) => p.name(),
            Algorithm::Confidit => "Confidit",
            Algorithm::Banditron => "Banditron",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "confidit" => Ok(Algorithm::Confidit),
            "banditron" => Ok(Algorithm::Banditron),
            _ => s.parse().map(Algorithm::Conquer),
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where rounds come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Generated review corpus with rating-correlated vocabulary.
    SyntheticCorpus {
        #[serde(default = "default_reviews")]
        reviews: usize,
        #[serde(default = "default_domains")]
        domains: usize,
        #[serde(default = "default_corpus_dim")]
        hash_dim: usize,
    },
    /// Raw reviews in TSV form.
    Reviews {
        path: PathBuf,
        #[serde(default = "default_hash_dim")]
        hash_dim: usize,
    },
    /// Pre-featurized reviews.
    Features { path: PathBuf },
    /// Synthetic linear environment.
    Linear {
        dim: usize,
        #[serde(default = "one")]
        u_norm: f64,
        #[serde(default)]
        noise: f64,
        train_rounds: usize,
        dev_rounds: usize,
        test_rounds: usize,
    },
}

fn default_reviews() -> usize {
    2000
}
fn default_domains() -> usize {
    4
}
fn default_corpus_dim() -> usize {
    1 << 16
}
fn default_hash_dim() -> usize {
    DEFAULT_HASH_DIM
}
fn one() -> f64 {
    1.0
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::SyntheticCorpus {
            reviews: default_reviews(),
            domains: default_domains(),
            hash_dim: default_corpus_dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    pub matrix: MatrixKind,
    pub eta_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub project: bool,
    pub feedback: FeedbackMechanism,
    pub write_traces: bool,
    pub data: DataSource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: Algorithm::ALL.to_vec(),
            k: 5,
            matrix: MatrixKind::Diagonal,
            eta_grid: vec![0.01, 0.1, 1.0, 10.0],
            gamma_grid: vec![0.05, 0.1, 0.2, 0.3],
            alpha_grid: vec![0.0, 0.5, 1.0],
            repetitions: 10,
            seed: 0,
            project: false,
            feedback: FeedbackMechanism::Bernoulli,
            write_traces: true,
            data: DataSource::default(),
        }
    }
}

/// One point of a hyperparameter grid; unused fields are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Hyper {
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(e) = self.eta {
            parts.push(format!("eta={e}"));
        }
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(g) = self.gamma {
            parts.push(format!("gamma={g}"));
        }
        f.write_str(&parts.join(";"))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        for a in &self.algorithms {
            if self.grid(*a).is_empty() {
                return bad(format!("empty hyperparameter grid for {a}"));
            }
        }
        if let Some(e) = self.eta_grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("eta must be positive, got {e}"));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(**g > 0.0 && **g <= 0.5)) {
            return bad(format!("gamma must lie in (0, 0.5], got {g}"));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > -1.0 && **a <= 1.0)) {
            return bad(format!("alpha must lie in (-1, 1], got {a}"));
        }
        Ok(())
    }

    /// Grid points for `algorithm`, in a fixed order.
    pub fn grid(&self, algorithm: Algorithm) -> Vec<Hyper> {
        match algorithm {
            Algorithm::Conquer(_) => self
                .eta_grid
                .iter()
                .map(|&e| Hyper {
                    eta: Some(e),
                    ..Hyper::default()
                })
                .collect(),
            Algorithm::Confidit => self
                .eta_grid
                .iter()
                .flat_map(|&e| {
                    self.alpha_grid.iter().map(move |&a| Hyper {
                        eta: Some(e),
                        alpha: Some(a),
                        gamma: None,
                    })
                })
                .collect(),
            Algorithm::Banditron => self
                .gamma_grid
                .iter()
                .map(|&g| Hyper {
                    gamma: Some(g),
                    ..Hyper::default()
                })
                .collect(),
        }
    }
}
