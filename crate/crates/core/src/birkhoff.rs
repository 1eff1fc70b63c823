//! Greedy Birkhoff–von Neumann decomposition.
//!
//! Each step takes the perfect matching on the residual's support whose
//! smallest entry is largest, records it with that entry as weight, and
//! subtracts. The bottleneck cell becomes exactly zero, so the residual moves
//! to a strictly lower-dimensional face of the Birkhoff polytope and at most
//! `(n − 1)² + 1` terms are produced.

use crate::error::{Error, Result};
use crate::matching::bottleneck_matching;
use crate::matrix::{distance, Norm, SquareMatrix, StochasticMatrix};
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Permutations with positive weights, in extraction order.
    pub terms: Vec<(Permutation, f64)>,
    /// l∞ distance between the input and Σ w·P(σ).
    pub residual_norm: f64,
}

impl Decomposition {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w).sum()
    }

    /// The terms as a model (weights as-is, not renormalized).
    pub fn to_model(&self) -> Result<SparseChoiceModel> {
        let n = self.terms.first().map_or(0, |(p, _)| p.n());
        SparseChoiceModel::new(n, self.terms.iter().cloned())
    }

    pub fn reconstruct(&self, n: usize) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(n);
        for (perm, w) in &self.terms {
            for (i, j) in perm.cells() {
                m.add(i, j, *w);
            }
        }
        m
    }
}

/// Upper bound on the number of terms for an `n × n` input.
pub fn max_terms(n: usize) -> usize {
    n.saturating_sub(1).pow(2) + 1
}

/// Decomposes `d` into weighted permutation matrices, treating entries at or
/// below `tol` as structural zeros and stopping once the residual's total
/// mass is at most `tol · n`.
pub fn decompose(d: &StochasticMatrix, tol: f64) -> Result<Decomposition> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    let n = d.n();
    let dev = d.as_matrix().stochastic_residual();
    if dev > tol.max(f64::EPSILON * n as f64) {
        return Err(Error::NotStochastic(format!(
            "row/column sums deviate from 1 by {dev:e} (tolerance {tol:e})"
        )));
    }

    let mut residual = d.as_matrix().clone();
    let mut mass = residual.total();
    let mut terms = Vec::new();
    while mass > tol * n as f64 {
        let (cols, weight) = match bottleneck_matching(&residual, tol) {
            Ok(found) => found,
            // Once peeling has started, small entries are leftovers of earlier
            // subtractions rather than structural zeros.
            Err(_) if !terms.is_empty() => match bottleneck_matching(&residual, 0.0) {
                Ok(found) => found,
                Err(_) if residual.as_slice().iter().all(|&v| v <= tol * n as f64) => break,
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        for (i, &j) in cols.iter().enumerate() {
            let left = residual.get(i, j) - weight;
            residual.set(i, j, if left > 0.0 { left } else { 0.0 });
        }
        terms.push((Permutation::from_ranks(cols).expect("matching is a bijection"), weight));
        let next = residual.total();
        debug_assert!(next < mass);
        mass = next;
    }

    let mut out = Decomposition { terms, residual_norm: 0.0 };
    out.residual_norm = distance(d, out.reconstruct(n), Norm::Linf)?;
    Ok(out)
}
