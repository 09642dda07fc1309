//! Corpus file formats.
//!
//! Both formats are UTF-8, one review per line. Empty lines and lines
//! starting with `#` are skipped, except for the directives below.
//!
//! Raw reviews (TSV):
//!
//! ```text
//! #domain books
//! 5<TAB>A wonderful read.
//! 2<TAB>Dull.
//! ```
//!
//! Pre-featurized reviews:
//!
//! ```text
//! #dim 1048576
//! #domain books
//! 5 17:0.5 9021:-0.5 40000:0.7071067811865476
//! ```
//!
//! `#domain NAME` sets the domain of all following lines (default
//! `default`). `#dim D` must precede the first featurized line. Feature
//! values are written with full round-trip precision.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::corpus::{Document, Review, DEFAULT_DOMAIN};
use crate::error::{Error, Result};
use crate::linalg::SparseVec;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_stars(field: &str, line: usize) -> Result<u8> {
    match field.trim().parse::<u8>() {
        Ok(s) if (1..=5).contains(&s) => Ok(s),
        _ => Err(parse_err(line, format!("invalid star rating `{field}`"))),
    }
}

fn directive<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix('#')?.strip_prefix(name).map(str::trim)
}

fn check_domain(domain: &str, line: usize) -> Result<()> {
    if domain.is_empty() || domain.chars().any(char::is_whitespace) {
        return Err(parse_err(line, "domain must be a single non-empty word"));
    }
    Ok(())
}

pub fn read_reviews<R: BufRead>(input: R) -> Result<Vec<Review>> {
    let mut domain = DEFAULT_DOMAIN.to_string();
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if let Some(d) = directive(&line, "domain") {
            check_domain(d, line_no)?;
            domain = d.to_string();
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (stars, text) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected `stars<TAB>text`"))?;
        out.push(Review {
            stars: parse_stars(stars, line_no)?,
            text: text.to_string(),
            domain: domain.clone(),
        });
    }
    Ok(out)
}

pub fn write_reviews<W: Write>(out: &mut W, reviews: &[Review]) -> Result<()> {
    let io = |e| Error::io("<reviews>", e);
    let mut domain: Option<&str> = None;
    for r in reviews {
        if domain != Some(r.domain.as_str()) {
            check_domain(&r.domain, 0)?;
            writeln!(out, "#domain {}", r.domain).map_err(io)?;
            domain = Some(&r.domain);
        }
        if r.text.contains(['\n', '\r']) {
            return Err(Error::InvalidArgument("review text contains a line break".into()));
        }
        writeln!(out, "{}\t{}", r.stars, r.text).map_err(io)?;
    }
    Ok(())
}

/// Reads pre-featurized documents; returns them with their dimension.
pub fn read_documents<R: BufRead>(input: R) -> Result<(usize, Vec<Document>)> {
    let mut domain = DEFAULT_DOMAIN.to_string();
    let mut dim: Option<usize> = None;
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if let Some(d) = directive(&line, "domain") {
            check_domain(d, line_no)?;
            domain = d.to_string();
            continue;
        }
        if let Some(d) = directive(&line, "dim") {
            let d = d
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid dimension `{d}`")))?;
            if dim.is_some_and(|old| old != d) {
                return Err(parse_err(line_no, "conflicting #dim directives"));
            }
            dim = Some(d);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let d = dim.ok_or_else(|| parse_err(line_no, "#dim must precede the first document"))?;
        let mut fields = line.split_whitespace();
        let stars = parse_stars(fields.next().unwrap_or(""), line_no)?;
        let entries = fields
            .map(|f| {
                let (i, v) = f
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, format!("expected index:value, got `{f}`")))?;
                let i: u32 = i
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("invalid index `{i}`")))?;
                let v: f64 = v
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("invalid value `{v}`")))?;
                Ok((i, v))
            })
            .collect::<Result<Vec<_>>>()?;
        let features = SparseVec::new(d, entries).map_err(|e| parse_err(line_no, e.to_string()))?;
        out.push(Document {
            stars,
            domain: domain.clone(),
            features,
        });
    }
    let dim = dim.ok_or_else(|| parse_err(0, "missing #dim directive"))?;
    Ok((dim, out))
}

pub fn write_documents<W: Write>(out: &mut W, dim: usize, docs: &[Document]) -> Result<()> {
    let io = |e| Error::io("<documents>", e);
    writeln!(out, "#dim {dim}").map_err(io)?;
    let mut domain: Option<&str> = None;
    for d in docs {
        crate::error::check_dim(dim, d.features.dim())?;
        if domain != Some(d.domain.as_str()) {
            check_domain(&d.domain, 0)?;
            writeln!(out, "#domain {}", d.domain).map_err(io)?;
            domain = Some(&d.domain);
        }
        write!(out, "{}", d.stars).map_err(io)?;
        for (i, v) in d.features.iter() {
            write!(out, " {i}:{v:?}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_reviews(path: &Path) -> Result<Vec<Review>> {
    read_reviews(open(path)?)
}

pub fn load_documents(path: &Path) -> Result<(usize, Vec<Document>)> {
    read_documents(open(path)?)
}

pub fn save_reviews(path: &Path, reviews: &[Review]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_reviews(&mut w, reviews)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_documents(path: &Path, dim: usize, docs: &[Document]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_documents(&mut w, dim, docs)?;
    w.flush().map_err(|e| Error::io(path, e))
}
