//! A small generated review corpus whose vocabulary correlates with the
//! star rating, for desk-scale experiments.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;

use super::corpus::Review;
use crate::error::{Error, Result};
use crate::rng;

const POSITIVE: &[&str] = &[
    "great",
    "excellent",
    "love",
    "perfect",
    "amazing",
    "wonderful",
    "best",
    "recommend",
    "happy",
    "fantastic",
    "solid",
    "enjoyed",
    "sturdy",
    "beautiful",
    "worth",
];

const NEGATIVE: &[&str] = &[
    "terrible",
    "awful",
    "broke",
    "waste",
    "poor",
    "disappointed",
    "worst",
    "refund",
    "useless",
    "boring",
    "flimsy",
    "returned",
    "annoying",
    "mediocre",
    "regret",
];

const COMMON: &[&str] = &[
    "the", "a", "it", "this", "i", "and", "was", "is", "for", "with", "my", "of", "to", "after", "one", "just",
    "really", "very", "but", "so", "bought", "got", "use", "time", "day", "week",
];

const DOMAINS: &[(&str, &[&str])] = &[
    (
        "books",
        &[
            "book",
            "author",
            "chapter",
            "story",
            "plot",
            "characters",
            "read",
            "pages",
            "novel",
            "ending",
        ],
    ),
    (
        "electronics",
        &[
            "battery", "screen", "charger", "cable", "device", "sound", "button", "setup", "app", "signal",
        ],
    ),
    (
        "kitchen",
        &[
            "pan",
            "knife",
            "blender",
            "lid",
            "handle",
            "coffee",
            "dishwasher",
            "recipe",
            "steel",
            "pot",
        ],
    ),
    (
        "toys",
        &[
            "kids", "son", "daughter", "game", "pieces", "puzzle", "box", "gift", "plastic", "colors",
        ],
    ),
];

/// Star distribution skewed toward the extremes.
pub const STAR_WEIGHTS: [f64; 5] = [0.40, 0.10, 0.05, 0.10, 0.35];

/// Shape of a generated corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub reviews: usize,
    pub domains: usize,
    /// Probability that a token is a sentiment word.
    pub sentiment_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SyntheticCorpus {
    fn default() -> Self {
        SyntheticCorpus {
            reviews: 2000,
            domains: DOMAINS.len(),
            sentiment_rate: 0.25,
            min_len: 12,
            max_len: 30,
            seed: 0,
        }
    }
}

impl SyntheticCorpus {
    /// Reviews with stars drawn from [`STAR_WEIGHTS`]. Each token is a
    /// sentiment word with probability `sentiment_rate`, positive with
    /// probability `(stars − 1)/4`; otherwise a common or domain word.
    /// Some reviews carry markup and emoticons to exercise preprocessing.
    pub fn generate(&self) -> Result<Vec<Review>> {
        if self.domains == 0 || self.domains > DOMAINS.len() {
            return Err(Error::InvalidArgument(format!(
                "domains must be in 1..={}",
                DOMAINS.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.sentiment_rate) || self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::InvalidArgument("invalid synthetic corpus shape".into()));
        }
        let mut r = rng::stream(self.seed, &[rng::label("synthetic-corpus")]);
        let stars_dist = WeightedIndex::new(STAR_WEIGHTS).expect("valid weights");
        let mut out = Vec::with_capacity(self.reviews);
        for i in 0..self.reviews {
            let (domain, topical) = DOMAINS[i % self.domains];
            let stars = stars_dist.sample(&mut r) as u8 + 1;
            let p_pos = (stars - 1) as f64 / 4.0;
            let len = r.random_range(self.min_len..=self.max_len);
            let mut words: Vec<&str> = Vec::with_capacity(len + 2);
            for _ in 0..len {
                let w = if r.random::<f64>() < self.sentiment_rate {
                    if r.random::<f64>() < p_pos {
                        POSITIVE
                    } else {
                        NEGATIVE
                    }
                } else if r.random::<f64>() < 0.5 {
                    COMMON
                } else {
                    topical
                };
                words.push(w.choose(&mut r).expect("non-empty"));
            }
            let mut text = words.join(" ");
            if let Some(first) = text.get(..1) {
                text = first.to_uppercase() + &text[1..];
            }
            match r.random_range(0..10) {
                0 if stars >= 4 => text.push_str(" :)"),
                0 if stars <= 2 => text.push_str(" :("),
                1 => text = format!("<p>{text}</p>"),
                2 => text.push_str("..."),
                _ => text.push('.'),
            }
            out.push(Review::new(stars, text, domain)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = SyntheticCorpus {
            reviews: 200,
            ..Default::default()
        };
        let a = spec.generate().unwrap();
        assert_eq!(a, spec.generate().unwrap());
        assert_eq!(a.len(), 200);
        let domains: std::collections::BTreeSet<&str> = a.iter().map(|r| r.domain.as_str()).collect();
        assert_eq!(domains.len(), 4);
    }

    #[test]
    fn vocabulary_tracks_rating() {
        let reviews = SyntheticCorpus::default().generate().unwrap();
        let share = |stars: u8| {
            let (mut pos, mut all) = (0usize, 0usize);
            for r in reviews.iter().filter(|r| r.stars == stars) {
                for w in r.text.split_whitespace() {
                    if POSITIVE.contains(&w) {
                        pos += 1;
                        all += 1;
                    } else if NEGATIVE.contains(&w) {
                        all += 1;
                    }
                }
            }
            pos as f64 / all as f64
        };
        assert!(share(5) > 0.9);
        assert!(share(1) < 0.1);
    }
}
