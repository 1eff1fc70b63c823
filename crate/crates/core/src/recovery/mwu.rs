//! Multiplicative-weights feasibility search for a K-column mixture.
//!
//! The unknown is one permutation per column, column `k` carrying a known
//! mass `m_k`. For every cell `c` there are two packing rows,
//!
//! ```text
//!  (+)   Σ_k m_k·[σ_k ∋ c] ≥  d_c − ε
//!  (−)  −Σ_k m_k·[σ_k ∋ c] ≥ −d_c − ε
//! ```
//!
//! Each round the oracle maximizes the weighted slack Σ_ℓ p_ℓ(a_ℓ·z − b_ℓ)
//! column by column. A negative optimum certifies infeasibility; otherwise
//! every weight is multiplied by `1 − δ(a_ℓ·z − b_ℓ)`. After `T` rounds the
//! averaged iterate violates no row by more than ε.

use std::collections::HashMap;

use crate::ceil_tolerant;
use crate::error::{Error, Result};
use crate::matrix::{distance, Norm, SquareMatrix, StochasticMatrix};
use crate::model::{raw_marginals, SparseChoiceModel};
use crate::permutation::Permutation;
use crate::signature::Cell;

use super::oracle::{column_mask, solve_masked};

/// Step size `δ = min(ε/8, 1/2)`.
pub fn mwu_step(epsilon: f64) -> f64 {
    (epsilon / 8.0).min(0.5)
}

/// Round budget `T = ⌈64·ε⁻²·ln(2n²)⌉`.
pub fn mwu_budget(n: usize, epsilon: f64) -> usize {
    let rows = 2.0 * (n * n) as f64;
    ceil_tolerant(64.0 / (epsilon * epsilon) * rows.ln()) as usize
}

/// One unknown permutation: its mass and placement constraints.
#[derive(Debug, Clone)]
pub(crate) struct Column {
    pub mass: f64,
    pub fixed: Option<Cell>,
    pub forbidden: Vec<Cell>,
}

/// Why a candidate was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasible {
    /// The Lagrangian optimum went negative at this round.
    NegativeObjective { round: usize, objective: f64 },
    /// No permutation satisfies this column's placement constraints.
    NoConsistentColumn { column: usize },
    /// The averaged model missed the error bounds.
    Verification { raw_linf: f64, normalized_linf: f64 },
}

/// Lagrangian weights for the `2n²` packing rows, stored as logarithms so
/// that long runs at small ε cannot underflow. Materialized weights are
/// rescaled to sum to `2n²`.
#[derive(Debug, Clone)]
pub struct MwuState {
    /// Log-weights of the `(+)` rows, row-major by cell.
    log_plus: Vec<f64>,
    /// Log-weights of the `(−)` rows.
    log_minus: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    pub step: f64,
    pub budget: usize,
}

impl MwuState {
    pub fn new(n: usize, epsilon: f64) -> Self {
        let cells = n * n;
        Self {
            log_plus: vec![0.0; cells],
            log_minus: vec![0.0; cells],
            plus: vec![1.0; cells],
            minus: vec![1.0; cells],
            step: mwu_step(epsilon),
            budget: mwu_budget(n, epsilon),
        }
    }

    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    pub fn minus(&self) -> &[f64] {
        &self.minus
    }

    pub fn log_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_plus.iter().chain(&self.log_minus).copied()
    }

    pub fn total(&self) -> f64 {
        self.plus.iter().sum::<f64>() + self.minus.iter().sum::<f64>()
    }

    /// Applies `p ← p·(1 − δ·slack)` to every row and rescales to `2n²`.
    fn update(&mut self, coverage: &[f64], d: &[f64], epsilon: f64) -> Result<()> {
        for c in 0..d.len() {
            let gap = coverage[c] - d[c];
            let up = 1.0 - self.step * (gap + epsilon);
            let down = 1.0 - self.step * (-gap + epsilon);
            if !(up > 0.0 && down > 0.0) {
                return Err(Error::Numerical(format!(
                    "update factor left (0, 2): slack exceeds the width bound at cell {c}"
                )));
            }
            self.log_plus[c] += up.ln();
            self.log_minus[c] += down.ln();
        }
        let top = self.log_weights().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.log_weights().map(|l| (l - top).exp()).sum();
        let shift = top + sum.ln() - ((2 * d.len()) as f64).ln();
        if !shift.is_finite() {
            return Err(Error::Numerical("row weights are not finite".into()));
        }
        for (l, p) in self.log_plus.iter_mut().zip(self.plus.iter_mut()).chain(self.log_minus.iter_mut().zip(self.minus.iter_mut())) {
            *l -= shift;
            *p = l.exp();
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MwuSuccess {
    /// Averaged mixture before normalization; mass Σ m_k.
    pub raw: SparseChoiceModel,
    pub normalized: SparseChoiceModel,
    pub raw_linf: f64,
    pub normalized_linf: f64,
    pub rounds: usize,
}

/// Slack on the final verification thresholds for floating-point noise.
const VERIFY_SLACK: f64 = 1e-9;

pub(crate) fn run(d: &StochasticMatrix, columns: &[Column], epsilon: f64) -> Result<std::result::Result<MwuSuccess, Infeasible>> {
    let n = d.n();
    let cells = n * n;
    let dv = d.as_matrix().as_slice();
    let masks: Vec<Vec<bool>> = columns.iter().map(|c| column_mask(n, c.fixed, &c.forbidden)).collect();

    let mut state = MwuState::new(n, epsilon);
    let budget = state.budget;
    let mut tally: HashMap<Permutation, f64> = HashMap::new();
    let mut weights = SquareMatrix::zeros(n);
    let mut coverage = vec![0.0; cells];

    for round in 0..budget {
        // Σ_ℓ p_ℓ b_ℓ with b = ±d − ε.
        let mut bias = 0.0;
        for c in 0..cells {
            bias += (state.plus[c] - state.minus[c]) * dv[c] - (state.plus[c] + state.minus[c]) * epsilon;
        }
        coverage.iter_mut().for_each(|x| *x = 0.0);
        let mut objective = -bias;
        let mut chosen = Vec::with_capacity(columns.len());
        for (k, col) in columns.iter().enumerate() {
            for c in 0..cells {
                weights.set(c / n, c % n, (state.plus[c] - state.minus[c]) * col.mass);
            }
            let Some((perm, value)) = solve_masked(&weights, &masks[k]) else {
                return Ok(Err(Infeasible::NoConsistentColumn { column: k }));
            };
            objective += value;
            for (i, j) in perm.cells() {
                coverage[i * n + j] += col.mass;
            }
            chosen.push(perm);
        }
        if objective < -1e-12 * state.total() {
            return Ok(Err(Infeasible::NegativeObjective { round, objective }));
        }
        for (perm, col) in chosen.into_iter().zip(columns) {
            *tally.entry(perm).or_insert(0.0) += col.mass / budget as f64;
        }
        state.update(&coverage, dv, epsilon)?;
    }

    let raw = SparseChoiceModel::new(n, tally)?;
    let normalized = raw.normalized()?;
    let raw_linf = distance(raw_marginals(&raw), d, Norm::Linf)?;
    let normalized_linf = distance(raw_marginals(&normalized), d, Norm::Linf)?;
    if raw_linf > 2.0 * epsilon + VERIFY_SLACK || normalized_linf > 2.0 * epsilon + 2.0 * epsilon * epsilon + VERIFY_SLACK {
        return Ok(Err(Infeasible::Verification { raw_linf, normalized_linf }));
    }
    Ok(Ok(MwuSuccess { raw, normalized, raw_linf, normalized_linf, rounds: budget }))
}

/// Stand-alone access to a single update for inspection and testing.
pub fn step_weights(state: &mut MwuState, coverage: &SquareMatrix, d: &StochasticMatrix, epsilon: f64) -> Result<()> {
    state.update(coverage.as_slice(), d.as_matrix().as_slice(), epsilon)
}
