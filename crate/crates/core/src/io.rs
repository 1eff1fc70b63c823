//! Text formats for models, matrices and ballots.
//!
//! * Model file: one `<position-string> <probability>` line per support
//!   permutation, heaviest first, probabilities with six decimals.
//! * Matrix file: one comma-separated row per line.
//! * Ballot file: `<position-string>,<count>` lines.
//!
//! Blank lines and lines starting with `#` are ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, StochasticMatrix, DEFAULT_STOCHASTIC_TOL};
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;
use crate::sinkhorn::{sinkhorn_normalize, SinkhornOptions};

/// A model file whose probabilities sum further than this from 1 is rejected.
/// Six-decimal rounding moves the sum by at most `support × 5e-7`.
pub const MODEL_FILE_MASS_TOL: f64 = 1e-3;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a model file. Probabilities are kept as written; the total mass
/// must be within [`MODEL_FILE_MASS_TOL`] of 1.
pub fn parse_model(text: &str) -> Result<SparseChoiceModel> {
    let mut entries = Vec::new();
    let mut n = None;
    let mut seen = std::collections::BTreeSet::new();
    for (line, l) in content_lines(text) {
        let mut parts = l.split_whitespace();
        let (Some(perm), Some(prob), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(line, "expected `<permutation> <probability>`"));
        };
        let perm = Permutation::parse_position_string(perm).map_err(|e| parse_err(line, e.to_string()))?;
        let prob: f64 = prob.parse().map_err(|e| parse_err(line, format!("bad probability {prob:?}: {e}")))?;
        if !(prob.is_finite() && prob > 0.0) {
            return Err(parse_err(line, format!("probability must be positive, got {prob}")));
        }
        match n {
            None => n = Some(perm.n()),
            Some(n) if n != perm.n() => {
                return Err(parse_err(line, format!("permutation has {} items, expected {n}", perm.n())))
            }
            _ => {}
        }
        if !seen.insert(perm.clone()) {
            return Err(parse_err(line, format!("duplicate permutation {perm}")));
        }
        entries.push((perm, prob));
    }
    let n = n.ok_or(Error::Empty("model file"))?;
    let model = SparseChoiceModel::new(n, entries)?;
    let mass = model.total_mass();
    if (mass - 1.0).abs() > MODEL_FILE_MASS_TOL {
        return Err(Error::Unnormalized { mass, tol: MODEL_FILE_MASS_TOL });
    }
    Ok(model)
}

/// Canonical model file text: heaviest permutation first, six decimals.
pub fn format_model(model: &SparseChoiceModel) -> String {
    let mut out = String::new();
    for (perm, p) in model.by_probability() {
        writeln!(out, "{perm} {p:.6}").unwrap();
    }
    out
}

/// How a matrix file is turned into a doubly stochastic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    /// Must already be doubly stochastic within 1e-9.
    Strict,
    /// Sinkhorn-balanced after parsing.
    Normalize,
    /// Entries are percentages: divided by 100, then Sinkhorn-balanced.
    Percent,
}

/// Parses comma-separated rows into a square matrix, unvalidated.
pub fn parse_square_matrix(text: &str) -> Result<SquareMatrix> {
    let mut rows = Vec::new();
    for (line, l) in content_lines(text) {
        let row: Vec<f64> = l
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>().map_err(|e| parse_err(line, format!("bad entry {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(parse_err(line, format!("row has {} entries, expected {first}", row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty("matrix file"));
    }
    SquareMatrix::from_rows(rows)
}

pub fn parse_matrix(text: &str, mode: MatrixMode) -> Result<StochasticMatrix> {
    let mut m = parse_square_matrix(text)?;
    match mode {
        MatrixMode::Strict => StochasticMatrix::new(m, DEFAULT_STOCHASTIC_TOL),
        MatrixMode::Normalize => sinkhorn_normalize(&m, &SinkhornOptions::default()),
        MatrixMode::Percent => {
            m.scale(0.01);
            sinkhorn_normalize(&m, &SinkhornOptions::default())
        }
    }
}

/// Comma-separated rows at full (round-trip) precision.
pub fn format_matrix(m: impl AsRef<SquareMatrix>) -> String {
    let mut out = String::new();
    for row in m.as_ref().rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

/// Ballot counts per permutation.
pub fn parse_ballots(text: &str) -> Result<BTreeMap<Permutation, u64>> {
    let mut counts = BTreeMap::new();
    let mut n = None;
    for (line, l) in content_lines(text) {
        let (perm, count) = l.rsplit_once(',').ok_or_else(|| parse_err(line, "expected `<permutation>,<count>`"))?;
        let perm = Permutation::parse_position_string(perm).map_err(|e| parse_err(line, e.to_string()))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|e| parse_err(line, format!("bad count {:?}: {e}", count.trim())))?;
        if count == 0 {
            return Err(parse_err(line, "counts must be positive"));
        }
        if *n.get_or_insert(perm.n()) != perm.n() {
            return Err(parse_err(line, format!("permutation has {} items", perm.n())));
        }
        *counts.entry(perm).or_insert(0) += count;
    }
    if counts.is_empty() {
        return Err(Error::Empty("ballot file"));
    }
    Ok(counts)
}

/// Empirical model of a ballot file.
pub fn ballots_to_model(counts: &BTreeMap<Permutation, u64>) -> Result<SparseChoiceModel> {
    let total: u64 = counts.values().sum();
    let n = counts.keys().next().ok_or(Error::Empty("ballots"))?.n();
    SparseChoiceModel::new(n, counts.iter().map(|(p, &c)| (p.clone(), c as f64 / total as f64)))
}

pub fn read_model(path: &Path) -> Result<SparseChoiceModel> {
    parse_model(&std::fs::read_to_string(path)?)
}

pub fn read_matrix(path: &Path, mode: MatrixMode) -> Result<StochasticMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?, mode)
}

pub fn read_ballots(path: &Path) -> Result<SparseChoiceModel> {
    ballots_to_model(&parse_ballots(&std::fs::read_to_string(path)?)?)
}
