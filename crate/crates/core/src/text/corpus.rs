//! Reviews, rewards, splits and round construction.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::hashing::bigram_hash_features;
use super::preprocess::preprocess_text;
use crate::env::Round;
use crate::error::{Error, Result};
use crate::linalg::SparseVec;
use crate::parallel::Execution;

pub const DEFAULT_DOMAIN: &str = "default";

/// A raw review: star rating, text and domain tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Review {
    pub stars: u8,
    pub text: String,
    pub domain: String,
}

impl Review {
    pub fn new(stars: u8, text: impl Into<String>, domain: impl Into<String>) -> Result<Self> {
        check_stars(stars)?;
        Ok(Review {
            stars,
            text: text.into(),
            domain: domain.into(),
        })
    }
}

/// A featurized review.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub stars: u8,
    pub domain: String,
    pub features: SparseVec,
}

fn check_stars(stars: u8) -> Result<()> {
    if (1..=5).contains(&stars) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("stars must be in 1..=5, got {stars}")))
    }
}

/// `(stars − 3) / 2`, so that half a reward difference is a quarter per star.
pub fn star_reward(stars: u8) -> Result<f64> {
    check_stars(stars)?;
    Ok((stars as f64 - 3.0) / 2.0)
}

/// `(max rating − rating of the pick) / 4`.
pub fn test_error(ratings: &[u8], picked: usize) -> Result<f64> {
    for &s in ratings {
        check_stars(s)?;
    }
    let max = *ratings.iter().max().ok_or(Error::TooFewItems { needed: 1, got: 0 })?;
    let r = *ratings
        .get(picked)
        .ok_or_else(|| Error::InvalidArgument(format!("pick {picked} out of {} items", ratings.len())))?;
    Ok((max - r) as f64 / 4.0)
}

/// Preprocesses and hashes every review; reviews with no tokens left are
/// dropped.
pub fn featurize(reviews: &[Review], dim: usize, exec: Execution) -> Result<Vec<Document>> {
    let docs = exec.map(reviews, |r| -> Result<Option<Document>> {
        check_stars(r.stars)?;
        match bigram_hash_features(&preprocess_text(&r.text), dim) {
            Ok(features) => Ok(Some(Document {
                stars: r.stars,
                domain: r.domain.clone(),
                features,
            })),
            Err(Error::ZeroVector) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut out = Vec::with_capacity(docs.len());
    for d in docs {
        if let Some(d) = d? {
            out.push(d);
        }
    }
    Ok(out)
}

/// Train / dev / test index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffled 75/15/10 partition of `0..n`.
///
/// Train gets `⌊0.75 n⌋`, dev `⌊0.15 n⌋`, and test the remainder.
pub fn split_dataset<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DatasetSplit> {
    if n < 10 {
        return Err(Error::TooFewItems { needed: 10, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let n_train = n * 3 / 4;
    let n_dev = n * 15 / 100;
    let test = order.split_off(n_train + n_dev);
    let dev = order.split_off(n_train);
    Ok(DatasetSplit {
        train: order,
        dev,
        test,
    })
}

fn by_domain<'a>(docs: &'a [Document], indices: &[usize]) -> Result<BTreeMap<&'a str, Vec<usize>>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in indices {
        let d = docs
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("document index {i} out of range")))?;
        groups.entry(d.domain.as_str()).or_default().push(i);
    }
    Ok(groups)
}

fn build_round(docs: &[Document], chosen: &[usize]) -> Result<Round> {
    let items = chosen.iter().map(|&i| docs[i].features.clone()).collect();
    let rewards = chosen
        .iter()
        .map(|&i| star_reward(docs[i].stars))
        .collect::<Result<_>>()?;
    Round::new(items, rewards)
}

/// `count` rounds; each picks a domain with probability proportional to its
/// size among domains holding at least `k` documents, then `k` distinct
/// documents of that domain.
pub fn make_rounds<R: Rng + ?Sized>(
    docs: &[Document],
    indices: &[usize],
    k: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Round>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be at least 2, got {k}")));
    }
    let groups: Vec<Vec<usize>> = by_domain(docs, indices)?
        .into_values()
        .filter(|g| g.len() >= k)
        .collect();
    let total: usize = groups.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::TooFewItems {
            needed: k,
            got: indices.len(),
        });
    }
    let mut rounds = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ticket = rng.random_range(0..total);
        let group = groups
            .iter()
            .find(|g| {
                if ticket < g.len() {
                    true
                } else {
                    ticket -= g.len();
                    false
                }
            })
            .expect("ticket below total");
        let chosen: Vec<usize> = index::sample(rng, group.len(), k)
            .into_iter()
            .map(|j| group[j])
            .collect();
        rounds.push(build_round(docs, &chosen)?);
    }
    Ok(rounds)
}

/// One pass over `indices`: each domain is shuffled and cut into groups of
/// `k` (a remainder smaller than `k` is left out), and the groups of all
/// domains are shuffled together. Every document appears at most once.
pub fn single_pass_rounds<R: Rng + ?Sized>(
    docs: &[Document],
    indices: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<Vec<Round>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be at least 2, got {k}")));
    }
    let mut chunks: Vec<Vec<usize>> = Vec::new();
    for (_, mut group) in by_domain(docs, indices)? {
        group.shuffle(rng);
        chunks.extend(group.chunks_exact(k).map(<[usize]>::to_vec));
    }
    if chunks.is_empty() {
        return Err(Error::TooFewItems {
            needed: k,
            got: indices.len(),
        });
    }
    chunks.shuffle(rng);
    chunks.iter().map(|c| build_round(docs, c)).collect()
}
