//! Recovery without the signature condition: the K column masses are not
//! read off `d` but enumerated on an ε/K grid.

use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

use super::mwu::{self, Column};
use super::{check_epsilon, first_success, Basis, RecoveryResult};

const GRID_SLACK: f64 = 1e-12;

/// Nondecreasing vectors of `k` positive multiples of `ε/k` whose sum lies
/// in [1 − ε, 1 + ε], in lexicographic order.
pub fn quantized_vectors(k: usize, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let q = epsilon / k as f64;
    // Work in integer multiples of q.
    let lo = ((1.0 - epsilon) / q - GRID_SLACK).ceil().max(k as f64) as usize;
    let hi = ((1.0 + epsilon) / q + GRID_SLACK).floor() as usize;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn walk(k: usize, min: usize, sum: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            if sum >= lo {
                out.push(cur.clone());
            }
            return;
        }
        let left = k - cur.len();
        let mut m = min;
        // remaining entries are all ≥ m
        while sum + m * left <= hi {
            cur.push(m);
            walk(k, m, sum + m, lo, hi, cur, out);
            cur.pop();
            m += 1;
        }
    }
    let mut ints = Vec::new();
    walk(k, 1, 0, lo, hi, &mut current, &mut ints);
    for v in ints {
        out.push(v.into_iter().map(|m| m as f64 * q).collect());
    }
    Ok(out)
}

/// First quantized mass vector (lexicographic) for which the
/// multiplicative-weights search finds a verified K-column mixture.
pub fn recover_without_signature(d: &StochasticMatrix, k: usize, epsilon: f64) -> Result<Option<RecoveryResult>> {
    check_epsilon(epsilon)?;
    let vectors = quantized_vectors(k, epsilon)?;
    first_success(vectors.into_iter(), |masses| {
        let columns: Vec<Column> =
            masses.iter().map(|&mass| Column { mass, fixed: None, forbidden: Vec::new() }).collect();
        Ok(mwu::run(d, &columns, epsilon)?
            .ok()
            .map(|s| RecoveryResult::from_success(s, Basis::Quantized(masses.clone()), epsilon, 1)))
    })
}
