//! Round sets per repetition.

use crate::env::{Round, SynthEnv, SynthSpec};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::rng::{self, SimRng};
use crate::text::{self, Document, SyntheticCorpus};

use super::config::{DataSource, ExperimentConfig};

/// Rounds of one repetition.
#[derive(Clone, Debug)]
pub struct RepRounds {
    pub train: Vec<Round>,
    pub dev: Vec<Round>,
    pub test: Vec<Round>,
}

/// Loaded data, ready to produce rounds for any repetition.
#[derive(Clone, Debug)]
pub enum Dataset {
    Corpus { dim: usize, docs: Vec<Document> },
    Linear { spec: SynthSpec, dev: usize, test: usize },
}

impl Dataset {
    pub fn load(config: &ExperimentConfig, exec: Execution) -> Result<Self> {
        match &config.data {
            DataSource::SyntheticCorpus {
                reviews,
                domains,
                hash_dim,
            } => {
                let reviews = SyntheticCorpus {
                    reviews: *reviews,
                    domains: *domains,
                    seed: config.seed,
                    ..Default::default()
                }
                .generate()?;
                Ok(Dataset::Corpus {
                    dim: *hash_dim,
                    docs: text::featurize(&reviews, *hash_dim, exec)?,
                })
            }
            DataSource::Reviews { path, hash_dim } => {
                let reviews = text::load_reviews(path)?;
                Ok(Dataset::Corpus {
                    dim: *hash_dim,
                    docs: text::featurize(&reviews, *hash_dim, exec)?,
                })
            }
            DataSource::Features { path } => {
                let (dim, docs) = text::load_documents(path)?;
                for d in &docs {
                    if (d.features.norm() - 1.0).abs() > crate::env::UNIT_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "{}: feature vectors must be unit norm",
                            path.display()
                        )));
                    }
                }
                Ok(Dataset::Corpus { dim, docs })
            }
            DataSource::Linear {
                dim,
                u_norm,
                noise,
                train_rounds,
                dev_rounds,
                test_rounds,
            } => Ok(Dataset::Linear {
                spec: SynthSpec::with_random_u(*dim, config.k, *train_rounds, *u_norm, *noise, config.seed)?,
                dev: *dev_rounds,
                test: *test_rounds,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Dataset::Corpus { dim, .. } => *dim,
            Dataset::Linear { spec, .. } => spec.dim,
        }
    }

    /// Train, dev and test rounds of repetition `rep` with `k` items each.
    ///
    /// Corpus: a fresh 75/15/10 split; one pass over train; one sampled
    /// round per dev/test review. Linear: independent item streams.
    pub fn rounds(&self, k: usize, seed: u64, rep: usize) -> Result<RepRounds> {
        let stream = |name: &str| -> SimRng { rng::stream(seed, &[rng::label(name), rep as u64]) };
        match self {
            Dataset::Corpus { docs, .. } => {
                let split = text::split_dataset(docs.len(), &mut stream("split"))?;
                Ok(RepRounds {
                    train: text::single_pass_rounds(docs, &split.train, k, &mut stream("train"))?,
                    dev: text::make_rounds(docs, &split.dev, k, split.dev.len(), &mut stream("dev"))?,
                    test: text::make_rounds(docs, &split.test, k, split.test.len(), &mut stream("test"))?,
                })
            }
            Dataset::Linear { spec, dev, test } => {
                let part = |name: &str, rounds: usize| -> Result<Vec<Round>> {
                    let s = SynthSpec {
                        k,
                        rounds,
                        seed: rng::derive_seed(seed, &[rng::label(name), rep as u64]),
                        ..spec.clone()
                    };
                    Ok(SynthEnv::new(s)?.map(|(r, _)| r).collect())
                };
                Ok(RepRounds {
                    train: part("train", spec.rounds)?,
                    dev: part("dev", *dev)?,
                    test: part("test", *test)?,
                })
            }
        }
    }
}
