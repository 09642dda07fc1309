//! Plain-text model checkpoints.
//!
//! Layout (one item per line, `#` starts a comment line):
//!
//! ```text
//! conquer-checkpoint 1
//! model conquer            # conquer | confidit | banditron
//! dim 4
//! param eta 1              # conquer, confidit
//! param alpha 0.5          # confidit
//! param gamma 0.2          # banditron
//! rounds 3
//! matrix diagonal          # diagonal | full | none
//! updates 3
//! since_refresh 3          # full only
//! w 0:0.25 3:-0.5          # non-zero weights, index:value
//! diag 0:1.25              # diagonal entries that differ from 1
//! a 0 2 0 0 0              # full only: row index, then D values (D rows)
//! inv 0 0.5 0 0 0          # full only: rows of the maintained inverse
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a
//! checkpoint back yields a bit-identical model.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::baselines::{BanditronModel, ConfiditModel};
use crate::error::{Error, Result};
use crate::linalg::{MatrixKind, SecondOrderMatrix};
use crate::model::LinearModel;

const MAGIC: &str = "conquer-checkpoint";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Checkpoint {
    Conquer(LinearModel),
    Confidit(ConfiditModel),
    Banditron(BanditronModel),
}

fn write_sparse_line<W: Write>(out: &mut W, tag: &str, values: &[f64], skip: f64) -> std::io::Result<()> {
    write!(out, "{tag}")?;
    for (i, v) in values.iter().enumerate() {
        if *v != skip {
            write!(out, " {i}:{v:?}")?;
        }
    }
    writeln!(out)
}

fn write_matrix<W: Write>(out: &mut W, m: &SecondOrderMatrix) -> std::io::Result<()> {
    writeln!(out, "matrix {}", m.kind())?;
    writeln!(out, "updates {}", m.updates())?;
    match m.kind() {
        MatrixKind::Diagonal => write_sparse_line(out, "diag", m.diagonal().expect("diagonal"), 1.0),
        MatrixKind::Full => {
            writeln!(out, "since_refresh {}", m.since_refresh())?;
            for (tag, rows) in [("a", m.to_dense()), ("inv", m.inverse_to_dense())] {
                for (r, row) in rows.iter().enumerate() {
                    write!(out, "{tag} {r}")?;
                    for v in row {
                        write!(out, " {v:?}")?;
                    }
                    writeln!(out)?;
                }
            }
            Ok(())
        }
    }
}

impl Checkpoint {
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC} {VERSION}")?;
        let (name, model, weights): (&str, Option<&LinearModel>, &[f64]) = match self {
            Checkpoint::Conquer(m) => ("conquer", Some(m), m.weights()),
            Checkpoint::Confidit(c) => ("confidit", Some(c.model()), c.weights()),
            Checkpoint::Banditron(b) => ("banditron", None, b.weights()),
        };
        writeln!(out, "model {name}")?;
        writeln!(out, "dim {}", weights.len())?;
        if let Some(m) = model {
            writeln!(out, "param eta {:?}", m.eta())?;
        }
        match self {
            Checkpoint::Confidit(c) => writeln!(out, "param alpha {:?}", c.alpha())?,
            Checkpoint::Banditron(b) => writeln!(out, "param gamma {:?}", b.gamma())?,
            Checkpoint::Conquer(_) => {}
        }
        writeln!(out, "rounds {}", model.map_or(0, |m| m.rounds()))?;
        match model {
            Some(m) => write_matrix(out, m.matrix())?,
            None => writeln!(out, "matrix none")?,
        }
        write_sparse_line(out, "w", weights, 0.0)?;
        writeln!(out, "end")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::read(BufReader::new(file))
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut p = Parsed::default();
        let mut saw_end = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<checkpoint>", e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let tag = parts.next().expect("non-empty line");
            let rest: Vec<&str> = parts.collect();
            if lineno == 0 || p.version.is_none() {
                if tag != MAGIC {
                    return Err(err(format!("expected `{MAGIC}` header")));
                }
                let v: u32 = one(&rest)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err("bad version".into()))?;
                if v != VERSION {
                    return Err(err(format!("unsupported checkpoint version {v}")));
                }
                p.version = Some(v);
                continue;
            }
            match tag {
                "model" => p.model = Some(one(&rest).ok_or_else(|| err("missing model".into()))?.to_string()),
                "dim" => p.dim = Some(parse_num(one(&rest), "dim").map_err(err)?),
                "param" => {
                    if rest.len() != 2 {
                        return Err(err("expected `param <name> <value>`".into()));
                    }
                    let v = parse_f64(rest[1]).map_err(err)?;
                    match rest[0] {
                        "eta" => p.eta = Some(v),
                        "alpha" => p.alpha = Some(v),
                        "gamma" => p.gamma = Some(v),
                        other => return Err(err(format!("unknown parameter `{other}`"))),
                    }
                }
                "rounds" => p.rounds = parse_num(one(&rest), "rounds").map_err(err)?,
                "matrix" => p.matrix = Some(one(&rest).ok_or_else(|| err("missing matrix kind".into()))?.to_string()),
                "updates" => p.updates = parse_num(one(&rest), "updates").map_err(err)?,
                "since_refresh" => p.since_refresh = parse_num(one(&rest), "since_refresh").map_err(err)?,
                "w" => p.w = parse_pairs(&rest).map_err(err)?,
                "diag" => p.diag = parse_pairs(&rest).map_err(err)?,
                "a" | "inv" => {
                    let (row, values) = rest.split_first().ok_or_else(|| err("empty matrix row".into()))?;
                    let row: usize = row.parse().map_err(|_| err("bad row index".into()))?;
                    let values = values
                        .iter()
                        .map(|s| parse_f64(s))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(err)?;
                    let target = if tag == "a" { &mut p.a_rows } else { &mut p.inv_rows };
                    target.push((row, values));
                }
                "end" => {
                    saw_end = true;
                    break;
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if !saw_end {
            return Err(Error::Parse {
                line: 0,
                message: "checkpoint is truncated (no `end`)".into(),
            });
        }
        p.build()
    }
}

fn one<'a>(rest: &[&'a str]) -> Option<&'a str> {
    match rest {
        [x] => Some(x),
        _ => None,
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("bad number `{s}`"))
}

fn parse_num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T, String> {
    s.and_then(|s| s.parse().ok()).ok_or_else(|| format!("bad {what}"))
}

fn parse_pairs(tokens: &[&str]) -> Result<Vec<(usize, f64)>, String> {
    tokens
        .iter()
        .map(|tok| {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| format!("expected index:value, got `{tok}`"))?;
            Ok((i.parse().map_err(|_| format!("bad index `{i}`"))?, parse_f64(v)?))
        })
        .collect()
}

#[derive(Default)]
struct Parsed {
    version: Option<u32>,
    model: Option<String>,
    dim: Option<usize>,
    eta: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
    rounds: u64,
    matrix: Option<String>,
    updates: u64,
    since_refresh: u64,
    w: Vec<(usize, f64)>,
    diag: Vec<(usize, f64)>,
    a_rows: Vec<(usize, Vec<f64>)>,
    inv_rows: Vec<(usize, Vec<f64>)>,
}

fn missing(what: &str) -> Error {
    Error::Parse {
        line: 0,
        message: format!("missing `{what}`"),
    }
}

fn scatter(dim: usize, pairs: &[(usize, f64)], fill: f64) -> Result<Vec<f64>> {
    let mut out = vec![fill; dim];
    for &(i, v) in pairs {
        *out.get_mut(i).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("index {i} out of range for dimension {dim}"),
        })? = v;
    }
    Ok(out)
}

fn dense_rows(dim: usize, mut rows: Vec<(usize, Vec<f64>)>) -> Result<Vec<f64>> {
    rows.sort_by_key(|(r, _)| *r);
    if rows.len() != dim || rows.iter().enumerate().any(|(i, (r, v))| *r != i || v.len() != dim) {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {dim} rows of {dim} values"),
        });
    }
    Ok(rows.into_iter().flat_map(|(_, v)| v).collect())
}

impl Parsed {
    fn build(self) -> Result<Checkpoint> {
        let dim = self.dim.ok_or_else(|| missing("dim"))?;
        let weights = scatter(dim, &self.w, 0.0)?;
        let model_name = self.model.clone().ok_or_else(|| missing("model"))?;
        if model_name == "banditron" {
            let gamma = self.gamma.ok_or_else(|| missing("param gamma"))?;
            return Ok(Checkpoint::Banditron(BanditronModel::from_parts(weights, gamma)?));
        }
        let matrix = match self.matrix.as_deref() {
            Some("diagonal") => SecondOrderMatrix::from_diagonal(scatter(dim, &self.diag, 1.0)?, self.updates)?,
            Some("full") => SecondOrderMatrix::from_full(
                dim,
                dense_rows(dim, self.a_rows)?,
                dense_rows(dim, self.inv_rows)?,
                self.updates,
                self.since_refresh,
            )?,
            _ => return Err(missing("matrix diagonal|full")),
        };
        let eta = self.eta.ok_or_else(|| missing("param eta"))?;
        let model = LinearModel::from_parts(weights, matrix, eta, self.rounds)?;
        match model_name.as_str() {
            "conquer" => Ok(Checkpoint::Conquer(model)),
            "confidit" => {
                let alpha = self.alpha.ok_or_else(|| missing("param alpha"))?;
                Ok(Checkpoint::Confidit(ConfiditModel::from_parts(model, alpha)?))
            }
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown model `{other}`"),
            }),
        }
    }
}
