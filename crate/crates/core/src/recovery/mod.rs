//! Sparse model recovery from noisy first-order marginals.
//!
//! [`recover`] walks candidate signature sets in lexicographic order and runs
//! the multiplicative-weights search on each; the first set that yields a
//! verified model wins. [`recover_search`] grows K and then tightens ε.
//! [`recover_without_signature`] replaces the signature cells with a grid of
//! quantized column masses. [`greedy_fit`] is a fast heuristic with no
//! recovery guarantee.

mod greedy;
mod mwu;
mod oracle;
mod quantized;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::model::SparseChoiceModel;
use crate::signature::{candidate_signature_sets, SignatureSet};

pub use greedy::{greedy_fit, GreedyFit};
pub use mwu::{mwu_budget, mwu_step, step_weights, Infeasible, MwuState};
pub use oracle::assignment_oracle;
pub use quantized::{quantized_vectors, recover_without_signature};

use mwu::Column;

/// What fixed the column masses of a recovered model.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Signature cells; each column's mass is `d` at its cell.
    Signature(SignatureSet),
    /// A quantized probability vector, one entry per column.
    Quantized(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// The averaged model rescaled to mass 1.
    pub model: SparseChoiceModel,
    /// Mass of the averaged mixture before rescaling; lies in [1 − ε, 1 + ε].
    pub total_mass: f64,
    /// ‖M(model) − d‖∞, recomputed from `model`.
    pub achieved_linf: f64,
    /// ‖M(mixture) − d‖∞ of the un-normalized mixture.
    pub raw_linf: f64,
    pub basis: Basis,
    /// Multiplicative-weights rounds run for the winning candidate.
    pub iterations: usize,
    pub epsilon: f64,
    /// Candidates (sets or mass vectors) examined up to and including the winner.
    pub candidates_examined: usize,
}

impl RecoveryResult {
    fn from_success(s: mwu::MwuSuccess, basis: Basis, epsilon: f64, examined: usize) -> Self {
        Self {
            total_mass: s.raw.total_mass(),
            model: s.normalized,
            achieved_linf: s.normalized_linf,
            raw_linf: s.raw_linf,
            basis,
            iterations: s.rounds,
            epsilon,
            candidates_examined: examined,
        }
    }
}

/// Outcome of a single multiplicative-weights run.
#[derive(Debug, Clone)]
pub enum MwuOutcome {
    Feasible(RecoveryResult),
    Infeasible(Infeasible),
}

impl MwuOutcome {
    pub fn feasible(self) -> Option<RecoveryResult> {
        match self {
            MwuOutcome::Feasible(r) => Some(r),
            MwuOutcome::Infeasible(_) => None,
        }
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")))
    }
}

fn signature_columns(d: &StochasticMatrix, sig: &SignatureSet) -> Vec<Column> {
    let cells = sig.cells();
    cells
        .iter()
        .map(|&c| Column {
            mass: d.get(c.row, c.col),
            fixed: Some(c),
            forbidden: cells.iter().copied().filter(|&o| o != c).collect(),
        })
        .collect()
}

/// Searches for a mixture of permutations, one per signature cell, whose
/// marginals are within 2ε of `d` in l∞.
///
/// The caller is expected to have applied the mass filter; sets whose masses
/// fall outside [1 − ε, 1 + ε] are rejected as a parameter error since the
/// width bound would not hold.
pub fn mwu_feasibility(d: &StochasticMatrix, sig: &SignatureSet, epsilon: f64) -> Result<MwuOutcome> {
    check_epsilon(epsilon)?;
    let n = d.n();
    if sig.cells().iter().any(|c| c.row >= n || c.col >= n) {
        return Err(Error::InvalidParameter(format!("signature {sig} lies outside the {n}x{n} grid")));
    }
    let columns = signature_columns(d, sig);
    let mass: f64 = columns.iter().map(|c| c.mass).sum();
    if (mass - 1.0).abs() > epsilon + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "signature mass {mass} is outside [1 − ε, 1 + ε]"
        )));
    }
    if columns.iter().any(|c| c.mass <= 0.0) {
        // A zero-mass column cannot carry a support permutation.
        return Ok(MwuOutcome::Infeasible(Infeasible::NoConsistentColumn {
            column: columns.iter().position(|c| c.mass <= 0.0).unwrap(),
        }));
    }
    Ok(match mwu::run(d, &columns, epsilon)? {
        Ok(s) => MwuOutcome::Feasible(RecoveryResult::from_success(s, Basis::Signature(sig.clone()), epsilon, 1)),
        Err(why) => MwuOutcome::Infeasible(why),
    })
}

/// Candidates evaluated concurrently per batch.
fn batch_size() -> usize {
    4 * rayon::current_num_threads().max(1)
}

/// Evaluates `items` in lexicographic batches and returns the first success
/// by position, independent of completion order.
pub(crate) fn first_success<T: Sync>(
    items: impl Iterator<Item = T>,
    eval: impl Fn(&T) -> Result<Option<RecoveryResult>> + Sync,
) -> Result<Option<RecoveryResult>> {
    let mut items = items.peekable();
    let mut offset = 0;
    while items.peek().is_some() {
        let batch: Vec<T> = items.by_ref().take(batch_size()).collect();
        let results: Vec<Result<Option<RecoveryResult>>> = batch.par_iter().map(&eval).collect();
        for (i, r) in results.into_iter().enumerate() {
            if let Some(mut found) = r? {
                found.candidates_examined = offset + i + 1;
                return Ok(Some(found));
            }
        }
        offset += batch.len();
    }
    Ok(None)
}

/// The lexicographically first candidate signature set of size `k` that
/// yields a verified model, or `None` if every candidate fails.
pub fn recover(d: &StochasticMatrix, k: usize, epsilon: f64) -> Result<Option<RecoveryResult>> {
    check_epsilon(epsilon)?;
    let candidates = candidate_signature_sets(d, k, epsilon)?;
    first_success(candidates, |sig| Ok(mwu_feasibility(d, sig, epsilon)?.feasible()))
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// ε is never halved below this.
    pub epsilon_floor: f64,
    /// Largest K tried; defaults to (n − 1)² + 1.
    pub max_k: Option<usize>,
}

impl SearchOptions {
    pub fn for_epsilon(epsilon0: f64) -> Self {
        Self { epsilon_floor: epsilon0 / 8.0, max_k: None }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// The result at the smallest ε that succeeded.
    pub best: RecoveryResult,
    /// Smallest K that succeeded at ε₀.
    pub k: usize,
    /// Every (K, ε, success) run, in order.
    pub attempts: Vec<(usize, f64, bool)>,
}

/// Tries K = 1, 2, … at ε₀ until a run succeeds, then halves ε while runs at
/// that K keep succeeding, stopping at the floor.
pub fn recover_search(d: &StochasticMatrix, epsilon0: f64, opts: &SearchOptions) -> Result<Option<SearchResult>> {
    check_epsilon(epsilon0)?;
    if !(opts.epsilon_floor > 0.0) {
        return Err(Error::InvalidParameter("epsilon floor must be positive".into()));
    }
    let n = d.n();
    let cap = opts.max_k.unwrap_or(crate::birkhoff::max_terms(n)).min(n * n);
    let mut attempts = Vec::new();
    for k in 1..=cap {
        let Some(first) = recover(d, k, epsilon0)? else {
            attempts.push((k, epsilon0, false));
            continue;
        };
        attempts.push((k, epsilon0, true));
        let mut best = first;
        let mut eps = epsilon0 / 2.0;
        while eps >= opts.epsilon_floor * (1.0 - 1e-12) {
            match recover(d, k, eps)? {
                Some(r) => {
                    attempts.push((k, eps, true));
                    best = r;
                    eps /= 2.0;
                }
                None => {
                    attempts.push((k, eps, false));
                    break;
                }
            }
        }
        return Ok(Some(SearchResult { best, k, attempts }));
    }
    Ok(None)
}
