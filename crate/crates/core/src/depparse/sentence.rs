//! Sentences, edge feature templates and aggregated tree features.

use std::hash::Hasher;
use std::io::BufRead;

use fnv::{FnvHashMap, FnvHasher};

use super::tree::ParseTree;
use crate::env::UNIT_TOL;
use crate::error::{Error, Result};
use crate::linalg::SparseVec;

pub const ROOT_FORM: &str = "<root>";
pub const ROOT_TAG: &str = "ROOT";

/// A token with its form and coarse tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub tag: String,
}

/// Hashed edge templates over `(head, dependent)` token pairs.
///
/// | template      | string                                  |
/// |---------------|-----------------------------------------|
/// | bias          | `b`                                     |
/// | direction     | `dir=L` or `dir=R` (head left/right of dependent) |
/// | distance      | `dist=1..4+` joined with direction      |
/// | head tag      | `ht=TAG`                                |
/// | dep tag       | `dt=TAG`                                |
/// | tag pair      | `ht=TAG|dt=TAG`, and with direction     |
/// | head word     | `hw=FORM`                               |
/// | dep word      | `dw=FORM`                               |
/// | word pair     | `hw=FORM|dw=FORM`                       |
///
/// Each string is hashed with FNV-1a into `dim` signed buckets; the vector
/// is unit-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeTemplates {
    pub dim: usize,
}

impl EdgeTemplates {
    pub fn new(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() || !(16..=SparseVec::MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "edge feature dimension must be a power of two ≥ 16, got {dim}"
            )));
        }
        Ok(EdgeTemplates { dim })
    }

    pub fn feature_strings(head: &Token, dep: &Token, head_pos: usize, dep_pos: usize) -> Vec<String> {
        let dir = if head_pos < dep_pos { "R" } else { "L" };
        let dist = match head_pos.abs_diff(dep_pos) {
            d @ 1..=3 => d.to_string(),
            _ => "4+".to_string(),
        };
        vec![
            "b".to_string(),
            format!("dir={dir}"),
            format!("dist={dist}|dir={dir}"),
            format!("ht={}", head.tag),
            format!("dt={}", dep.tag),
            format!("ht={}|dt={}", head.tag, dep.tag),
            format!("ht={}|dt={}|dir={dir}", head.tag, dep.tag),
            format!("hw={}", head.form),
            format!("dw={}", dep.form),
            format!("hw={}|dw={}", head.form, dep.form),
        ]
    }

    pub fn edge_features(&self, head: &Token, dep: &Token, head_pos: usize, dep_pos: usize) -> Result<SparseVec> {
        let mask = (self.dim - 1) as u64;
        let mut acc: FnvHashMap<u32, f64> = FnvHashMap::default();
        for f in Self::feature_strings(head, dep, head_pos, dep_pos) {
            let mut h = FnvHasher::default();
            h.write(f.as_bytes());
            let h = h.finish();
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            *acc.entry((h & mask) as u32).or_insert(0.0) += sign;
        }
        SparseVec::from_pairs(self.dim, acc.into_iter().collect())?.normalize_unit()
    }
}

/// A sentence prepared for parsing: the root plus `s − 1` words, a unit
/// feature vector `φ(i, j)` for every candidate edge `i → j` (`j ≠ 0`,
/// `i ≠ j`), and optionally the gold tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Sentence {
    nodes: usize,
    dim: usize,
    /// Row-major `nodes × nodes`; `None` on the diagonal and into the root.
    edges: Vec<Option<SparseVec>>,
    gold: Option<ParseTree>,
}

impl Sentence {
    /// `feature(i, j)` is called for every candidate edge.
    pub fn from_fn<F>(nodes: usize, dim: usize, mut feature: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<SparseVec>,
    {
        if nodes < 2 {
            return Err(Error::InvalidTree(format!(
                "a sentence needs at least 2 nodes, got {nodes}"
            )));
        }
        let mut edges = vec![None; nodes * nodes];
        for i in 0..nodes {
            for j in 1..nodes {
                if i == j {
                    continue;
                }
                let phi = feature(i, j)?;
                crate::error::check_dim(dim, phi.dim())?;
                if (phi.norm() - 1.0).abs() > UNIT_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "edge feature ({i}, {j}) is not unit norm"
                    )));
                }
                edges[i * nodes + j] = Some(phi);
            }
        }
        Ok(Sentence {
            nodes,
            dim,
            edges,
            gold: None,
        })
    }

    /// Features from [`EdgeTemplates`] over `tokens` (words only; the root
    /// is prepended).
    pub fn from_tokens(tokens: &[Token], templates: &EdgeTemplates) -> Result<Self> {
        let root = Token {
            form: ROOT_FORM.into(),
            tag: ROOT_TAG.into(),
        };
        let all: Vec<&Token> = std::iter::once(&root).chain(tokens).collect();
        Sentence::from_fn(all.len(), templates.dim, |i, j| {
            templates.edge_features(all[i], all[j], i, j)
        })
    }

    pub fn with_gold(mut self, gold: ParseTree) -> Result<Self> {
        crate::error::check_dim(self.nodes, gold.nodes())?;
        self.gold = Some(gold);
        Ok(self)
    }

    /// Nodes including the root (`s_t`).
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gold(&self) -> Option<&ParseTree> {
        self.gold.as_ref()
    }

    /// `φ(i, j)` for the edge `i → j`.
    pub fn edge(&self, i: usize, j: usize) -> Result<&SparseVec> {
        if i >= self.nodes || j >= self.nodes {
            return Err(Error::InvalidArgument(format!(
                "edge ({i}, {j}) outside a sentence of {} nodes",
                self.nodes
            )));
        }
        self.edges[i * self.nodes + j]
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("({i}, {j}) is not a candidate edge")))
    }

    /// All candidate edge features.
    pub fn edge_features(&self) -> impl Iterator<Item = &SparseVec> {
        self.edges.iter().flatten()
    }

    /// `scores[i][j] = w·φ(i, j)`, `-∞` where there is no candidate edge.
    pub fn edge_scores(&self, weights: &[f64]) -> Result<Vec<Vec<f64>>> {
        crate::error::check_dim(self.dim, weights.len())?;
        let n = self.nodes;
        let mut out = vec![vec![f64::NEG_INFINITY; n]; n];
        for i in 0..n {
            for j in 1..n {
                if let Some(phi) = &self.edges[i * n + j] {
                    out[i][j] = phi.dot_dense_unchecked(weights);
                }
            }
        }
        Ok(out)
    }
}

/// `Φ(x, m) = (1/(s − 1)) Σ_{(i,j) ∈ m} φ(i, j)`.
///
/// The norm is at most 1; it equals 1 only when the edge features of the
/// tree coincide.
pub fn aggregate_features(sentence: &Sentence, tree: &ParseTree) -> Result<SparseVec> {
    if tree.nodes() != sentence.nodes() {
        return Err(Error::InvalidTree(format!(
            "tree over {} nodes for a sentence of {}",
            tree.nodes(),
            sentence.nodes()
        )));
    }
    let scale = 1.0 / (sentence.nodes() - 1) as f64;
    let mut acc: FnvHashMap<u32, f64> = FnvHashMap::default();
    for (h, d) in tree.edges() {
        for (i, v) in sentence.edge(h, d)?.iter() {
            *acc.entry(i as u32).or_insert(0.0) += v;
        }
    }
    let entries = acc.into_iter().map(|(i, v)| (i, v * scale)).collect();
    SparseVec::from_pairs(sentence.dim(), entries)
}

/// A sentence read from CoNLL-style input.
#[derive(Clone, Debug, PartialEq)]
pub struct ConllSentence {
    pub tokens: Vec<Token>,
    /// Gold heads, root first (`heads[0] = 0`).
    pub heads: Vec<usize>,
}

/// Reads whitespace-separated token lines, sentences separated by blank
/// lines. Three columns are `index form head`; ten-column CoNLL-X lines use
/// `ID FORM LEMMA CPOSTAG POSTAG FEATS HEAD ...`. Lines starting with `#`
/// are comments. Tags default to `_` when absent.
pub fn read_conll<R: BufRead>(input: R) -> Result<Vec<ConllSentence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut heads = vec![0usize];
    let flush = |tokens: &mut Vec<Token>, heads: &mut Vec<usize>, out: &mut Vec<ConllSentence>, line: usize| {
        if tokens.is_empty() {
            return Ok(());
        }
        ParseTree::new(heads.clone()).map_err(|e| Error::Parse {
            line,
            message: format!("sentence ending here: {e}"),
        })?;
        out.push(ConllSentence {
            tokens: std::mem::take(tokens),
            heads: std::mem::replace(heads, vec![0]),
        });
        Ok::<(), Error>(())
    };
    let mut last = 0;
    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        last = line_no;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            flush(&mut tokens, &mut heads, &mut out, line_no)?;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        let (form, tag, head) = match cols.len() {
            3 => (cols[1], "_", cols[2]),
            n if n >= 7 => (cols[1], cols[3], cols[6]),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected `index form head` or CoNLL-X columns".into(),
                })
            }
        };
        let bad = |m: String| Error::Parse {
            line: line_no,
            message: m,
        };
        let idx: usize = cols[0]
            .parse()
            .map_err(|_| bad(format!("invalid index `{}`", cols[0])))?;
        if idx != tokens.len() + 1 {
            return Err(bad(format!("expected index {}, got {idx}", tokens.len() + 1)));
        }
        let head: usize = head.parse().map_err(|_| bad(format!("invalid head `{head}`")))?;
        tokens.push(Token {
            form: form.to_lowercase(),
            tag: tag.to_string(),
        });
        heads.push(head);
    }
    flush(&mut tokens, &mut heads, &mut out, last)?;
    Ok(out)
}
