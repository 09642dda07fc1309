//! Signed feature hashing of unigrams and bigrams.
//!
//! Each feature string is hashed with 64-bit FNV-1a over its UTF-8 bytes,
//! prefixed by `u\x1f` (unigram) or `b\x1f` (bigram, tokens joined by
//! `\x1f`). The low bits give the bucket, bit 63 the sign. Counts are
//! accumulated and the vector is unit-normalized.

use std::hash::Hasher;

use fnv::{FnvHashMap, FnvHasher};

use super::preprocess::tokenize;
use crate::error::{Error, Result};
use crate::linalg::SparseVec;

pub const DEFAULT_HASH_DIM: usize = 1 << 20;
pub const MIN_HASH_DIM: usize = 1 << 10;

const SEP: u8 = 0x1f;

fn feature_hash(kind: u8, tokens: &[&str]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&[kind, SEP]);
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            h.write(&[SEP]);
        }
        h.write(t.as_bytes());
    }
    h.finish()
}

fn check_hash_dim(dim: usize) -> Result<()> {
    if dim < MIN_HASH_DIM || !dim.is_power_of_two() || dim > SparseVec::MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "hash dimension must be a power of two in [2^10, 2^31], got {dim}"
        )));
    }
    Ok(())
}

/// Hashes the tokens of already-preprocessed `text` into a unit vector of
/// dimension `dim`.
pub fn bigram_hash_features(text: &str, dim: usize) -> Result<SparseVec> {
    check_hash_dim(dim)?;
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::ZeroVector);
    }
    let mask = (dim - 1) as u64;
    let mut counts: FnvHashMap<u32, f64> = FnvHashMap::default();
    let mut add = |h: u64| {
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        *counts.entry((h & mask) as u32).or_insert(0.0) += sign;
    };
    for t in &tokens {
        add(feature_hash(b'u', &[t]));
    }
    for pair in tokens.windows(2) {
        add(feature_hash(b'b', pair));
    }
    SparseVec::from_pairs(dim, counts.into_iter().collect())?.normalize_unit()
}
