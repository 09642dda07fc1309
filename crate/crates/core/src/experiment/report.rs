//! Trials, summaries and one-vs-one win counts.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one algorithm in one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub algorithm: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub rep: usize,
    pub params: String,
    pub test_error: f64,
    pub skip_rate: f64,
}

/// One summary line per algorithm and `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub mean_error: f64,
    pub p95_low: f64,
    pub p95_high: f64,
    pub skip_rate: f64,
}

/// Linear-interpolation percentile of `sorted` (`q` in `[0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

/// Mean test error and the central 95% band over repetitions, plus the
/// mean skip rate. Rows keep the first-appearance order of algorithms,
/// grouped by `K`.
pub fn summarize(trials: &[Trial]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, &str)> = Vec::new();
    let mut groups: BTreeMap<(usize, &str), Vec<&Trial>> = BTreeMap::new();
    for t in trials {
        let key = (t.k, t.algorithm.as_str());
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(t);
    }
    order.sort_by_key(|(k, _)| *k);
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let mut errors: Vec<f64> = g.iter().map(|t| t.test_error).collect();
            errors.sort_by(f64::total_cmp);
            let n = g.len() as f64;
            SummaryRow {
                algorithm: key.1.to_string(),
                k: key.0,
                mean_error: errors.iter().sum::<f64>() / n,
                p95_low: percentile(&errors, 0.025),
                p95_high: percentile(&errors, 0.975),
                skip_rate: g.iter().map(|t| t.skip_rate).sum::<f64>() / n,
            }
        })
        .collect()
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "K", "mean_error", "p95_low", "p95_high", "skip_rate"])?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.k.to_string(),
            fmt(r.mean_error),
            fmt(r.p95_low),
            fmt(r.p95_high),
            fmt(r.skip_rate),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))
}

pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Trials keep full float precision so reports can be recomputed exactly.
pub fn write_trials_csv<W: Write>(out: W, trials: &[Trial]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "K", "rep", "params", "test_error", "skip_rate"])?;
    for t in trials {
        w.write_record([
            t.algorithm.clone(),
            t.k.to_string(),
            t.rep.to_string(),
            t.params.clone(),
            format!("{:?}", t.test_error),
            format!("{:?}", t.skip_rate),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trials>", e))
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<Trial>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `wins[i][j]`: trials in which algorithm `i` had strictly lower error
/// than algorithm `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinMatrix {
    pub algorithms: Vec<String>,
    pub wins: Vec<Vec<usize>>,
    pub trials: usize,
}

impl WinMatrix {
    pub fn ties(&self, i: usize, j: usize) -> usize {
        self.trials - self.wins[i][j] - self.wins[j][i]
    }
}

/// Pairs up trials by `(K, rep)`; every algorithm must cover the same keys.
pub fn one_vs_one_matrix(trials: &[Trial]) -> Result<WinMatrix> {
    let mut algorithms: Vec<String> = Vec::new();
    let mut by_algo: BTreeMap<&str, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
    for t in trials {
        if !by_algo.contains_key(t.algorithm.as_str()) {
            algorithms.push(t.algorithm.clone());
        }
        if by_algo
            .entry(&t.algorithm)
            .or_default()
            .insert((t.k, t.rep), t.test_error)
            .is_some()
        {
            return Err(Error::InvalidArgument(format!(
                "duplicate trial for {} at K={} rep={}",
                t.algorithm, t.k, t.rep
            )));
        }
    }
    if algorithms.len() < 2 {
        return Err(Error::InvalidArgument("need at least two algorithms".into()));
    }
    let keys: Vec<(usize, usize)> = by_algo[algorithms[0].as_str()].keys().copied().collect();
    for a in &algorithms {
        if !by_algo[a.as_str()].keys().eq(keys.iter()) {
            return Err(Error::InvalidArgument(format!(
                "trials of {a} are not aligned with {}",
                algorithms[0]
            )));
        }
    }
    let n = algorithms.len();
    let mut wins = vec![vec![0usize; n]; n];
    for key in &keys {
        let errs: Vec<f64> = algorithms.iter().map(|a| by_algo[a.as_str()][key]).collect();
        for i in 0..n {
            for j in 0..n {
                if errs[i] < errs[j] {
                    wins[i][j] += 1;
                }
            }
        }
    }
    Ok(WinMatrix {
        algorithms,
        wins,
        trials: keys.len(),
    })
}

pub fn write_win_matrix_csv<W: Write>(out: W, m: &WinMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algorithm".to_string()];
    header.extend(m.algorithms.iter().cloned());
    w.write_record(&header)?;
    for (i, a) in m.algorithms.iter().enumerate() {
        let mut row = vec![a.clone()];
        row.extend(m.wins[i].iter().map(usize::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<win matrix>", e))
}
