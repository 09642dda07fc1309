//! Dependency trees and maximum spanning arborescences.

use crate::error::{Error, Result};

/// Heads of a dependency tree over nodes `0..n`, where node 0 is the
/// artificial root. `heads[0]` is always 0 and carries no edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParseTree {
    heads: Vec<usize>,
}

impl ParseTree {
    pub fn new(heads: Vec<usize>) -> Result<Self> {
        validate(&heads)?;
        Ok(ParseTree { heads })
    }

    /// Every word attached to the root.
    pub fn flat(nodes: usize) -> Result<Self> {
        ParseTree::new(vec![0; nodes])
    }

    /// Number of nodes including the root.
    pub fn nodes(&self) -> usize {
        self.heads.len()
    }

    pub fn head(&self, j: usize) -> usize {
        self.heads[j]
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    /// `(head, dependent)` pairs in dependent order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.heads.len()).map(|j| (self.heads[j], j))
    }

    /// Whether `a` lies on the path from `b` up to the root (`a = b` counts).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut v = b;
        for _ in 0..self.heads.len() {
            if v == a {
                return true;
            }
            if v == 0 {
                return false;
            }
            v = self.heads[v];
        }
        false
    }

    /// The same tree with the head of `j` replaced by `i`.
    pub fn with_head(&self, j: usize, i: usize) -> Result<ParseTree> {
        let mut heads = self.heads.clone();
        if j == 0 || j >= heads.len() {
            return Err(Error::InvalidTree(format!("cannot reattach node {j}")));
        }
        heads[j] = i;
        ParseTree::new(heads)
    }

    /// Fraction of words whose head agrees with `gold`.
    pub fn accuracy(&self, gold: &ParseTree) -> Result<f64> {
        crate::error::check_dim(gold.nodes(), self.nodes())?;
        let words = self.nodes() - 1;
        let hits = (1..self.nodes()).filter(|&j| self.heads[j] == gold.heads[j]).count();
        Ok(hits as f64 / words as f64)
    }
}

fn validate(heads: &[usize]) -> Result<()> {
    let n = heads.len();
    if n < 2 {
        return Err(Error::InvalidTree(format!(
            "need a root and at least one word, got {n} nodes"
        )));
    }
    if heads[0] != 0 {
        return Err(Error::InvalidTree("root must not have a head".into()));
    }
    for (j, &h) in heads.iter().enumerate().skip(1) {
        if h >= n || h == j {
            return Err(Error::InvalidTree(format!("node {j} has invalid head {h}")));
        }
    }
    // Every word must reach the root within n steps.
    for j in 1..n {
        let mut v = j;
        let mut steps = 0;
        while v != 0 {
            v = heads[v];
            steps += 1;
            if steps > n {
                return Err(Error::InvalidTree(format!("node {j} is on a cycle")));
            }
        }
    }
    Ok(())
}

/// Sum of `scores[h][d]` over the tree's edges.
pub fn tree_score(tree: &ParseTree, scores: &[Vec<f64>]) -> f64 {
    tree.edges().map(|(h, d)| scores[h][d]).sum()
}

/// Chu–Liu–Edmonds: the spanning arborescence rooted at node 0 that
/// maximizes the total of `scores[head][dependent]`.
///
/// `scores` is `n × n`; `-∞` marks a missing edge. Entries into the root
/// and on the diagonal are ignored. Fails with [`Error::NoArborescence`]
/// when the finite edges admit no spanning arborescence.
pub fn cle_max_arborescence(scores: &[Vec<f64>]) -> Result<ParseTree> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::InvalidTree(format!("need at least 2 nodes, got {n}")));
    }
    for row in scores {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        if row.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
            return Err(Error::InvalidArgument("edge scores must be finite or -inf".into()));
        }
    }
    let mut s: Vec<Vec<f64>> = scores.to_vec();
    for (i, row) in s.iter_mut().enumerate() {
        row[0] = f64::NEG_INFINITY;
        row[i] = f64::NEG_INFINITY;
    }
    let heads = contract(&s).ok_or(Error::NoArborescence)?;
    ParseTree::new(heads)
}

/// Recursive contraction; node 0 is the root and `s[·][0]`, `s[i][i]`
/// are `-∞`.
fn contract(s: &[Vec<f64>]) -> Option<Vec<usize>> {
    let n = s.len();
    let mut best = vec![0usize; n];
    for j in 1..n {
        let mut b: Option<(usize, f64)> = None;
        for (i, row) in s.iter().enumerate() {
            let v = row[j];
            if v > f64::NEG_INFINITY && b.is_none_or(|(_, bv)| v > bv) {
                b = Some((i, v));
            }
        }
        best[j] = b?.0;
    }
    let Some(cycle) = find_cycle(&best) else {
        return Some(best);
    };

    let mut in_cycle = vec![false; n];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    let mut id = vec![0usize; n];
    let mut back = Vec::with_capacity(n);
    for v in 0..n {
        if !in_cycle[v] {
            id[v] = back.len();
            back.push(v);
        }
    }
    let c = back.len();
    for &v in &cycle {
        id[v] = c;
    }
    let m = c + 1;
    let mut s2 = vec![vec![f64::NEG_INFINITY; m]; m];
    // For an edge u → cycle: which cycle node it enters. For cycle → v: its source.
    let mut enters = vec![usize::MAX; m];
    let mut leaves = vec![usize::MAX; m];
    for u in 0..n {
        for v in 0..n {
            let w = s[u][v];
            if w == f64::NEG_INFINITY || (in_cycle[u] && in_cycle[v]) {
                continue;
            }
            let (iu, iv) = (id[u], id[v]);
            if in_cycle[v] {
                let adj = w - s[best[v]][v];
                if adj > s2[iu][c] {
                    s2[iu][c] = adj;
                    enters[iu] = v;
                }
            } else if in_cycle[u] {
                if w > s2[c][iv] {
                    s2[c][iv] = w;
                    leaves[iv] = u;
                }
            } else {
                s2[iu][iv] = w;
            }
        }
    }

    let sub = contract(&s2)?;
    let mut heads = best;
    for v in 1..n {
        if !in_cycle[v] {
            let p = sub[id[v]];
            heads[v] = if p == c { leaves[id[v]] } else { back[p] };
        }
    }
    let p = sub[c];
    heads[enters[p]] = back[p];
    Some(heads)
}

/// A cycle among the head pointers of nodes `1..n`, if any.
fn find_cycle(heads: &[usize]) -> Option<Vec<usize>> {
    let n = heads.len();
    // 0 = unvisited, 1 = on the current path, 2 = done.
    let mut state = vec![0u8; n];
    state[0] = 2;
    for start in 1..n {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = heads[v];
        }
        if state[v] == 1 {
            let pos = path.iter().position(|&x| x == v).expect("on path");
            return Some(path[pos..].to_vec());
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}
