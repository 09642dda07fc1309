//! Synthetic sentences whose gold trees maximize a hidden linear score.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::sentence::{EdgeTemplates, Sentence, Token};
use super::tree::{cle_max_arborescence, tree_score, ParseTree};
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

const TAGS: &[&str] = &["NOUN", "VERB", "ADJ", "DET", "ADP", "ADV"];
const FORMS_PER_TAG: usize = 5;

/// Shape of a synthetic treebank.
#[derive(Clone, Debug, PartialEq)]
pub struct TreebankSpec {
    /// Words per sentence (the root is extra).
    pub words: usize,
    /// Edge feature dimension (power of two).
    pub dim: usize,
    pub seed: u64,
}

impl Default for TreebankSpec {
    fn default() -> Self {
        TreebankSpec {
            words: 5,
            dim: 128,
            seed: 0,
        }
    }
}

/// Generates sentences of random tagged words. A hidden unit vector `u`
/// scores edges by `u·φ(i, j)`; the gold tree is the arborescence of
/// maximal total score, so the linear model is well specified.
#[derive(Clone, Debug)]
pub struct SyntheticTreebank {
    templates: EdgeTemplates,
    words: usize,
    u: Vec<f64>,
    rng: SimRng,
}

impl SyntheticTreebank {
    pub fn new(spec: &TreebankSpec) -> Result<Self> {
        if spec.words == 0 {
            return Err(Error::InvalidArgument("sentences need at least one word".into()));
        }
        let templates = EdgeTemplates::new(spec.dim)?;
        let mut ur = rng::stream(spec.seed, &[rng::label("treebank-u")]);
        let g: Vec<f64> = (0..spec.dim).map(|_| ur.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(SyntheticTreebank {
            templates,
            words: spec.words,
            u: g.into_iter().map(|x| x / norm).collect(),
            rng: rng::stream(spec.seed, &[rng::label("treebank-sentences")]),
        })
    }

    /// The hidden scoring vector (unit norm).
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn templates(&self) -> &EdgeTemplates {
        &self.templates
    }

    pub fn next_sentence(&mut self) -> Result<Sentence> {
        let tokens: Vec<Token> = (0..self.words)
            .map(|_| {
                let tag = *TAGS.choose(&mut self.rng).expect("non-empty");
                let form = format!("{}{}", tag.to_lowercase(), self.rng.random_range(0..FORMS_PER_TAG));
                Token { form, tag: tag.into() }
            })
            .collect();
        let sentence = Sentence::from_tokens(&tokens, &self.templates)?;
        let gold = cle_max_arborescence(&sentence.edge_scores(&self.u)?)?;
        sentence.with_gold(gold)
    }

    /// `u·Φ(x, tree)`.
    pub fn reward(&self, sentence: &Sentence, tree: &ParseTree) -> Result<f64> {
        let scores = sentence.edge_scores(&self.u)?;
        Ok(tree_score(tree, &scores) / (sentence.nodes() - 1) as f64)
    }
}
