//! Per-column linear optimization over the constrained Birkhoff polytope.
//!
//! Maximizing a linear functional over doubly stochastic matrices with one
//! cell pinned to 1 and some cells pinned to 0 attains its optimum at a
//! vertex, i.e. a permutation, so a maximum-weight assignment solves it.

use crate::error::{Error, Result};
use crate::matching::max_weight_assignment;
use crate::matrix::SquareMatrix;
use crate::permutation::Permutation;
use crate::signature::Cell;

/// Allowed-cell mask (row-major) for a column with an optional pinned cell
/// and a set of excluded cells.
pub(crate) fn column_mask(n: usize, fixed: Option<Cell>, forbidden: &[Cell]) -> Vec<bool> {
    let mut allowed = vec![true; n * n];
    if let Some(f) = fixed {
        for k in 0..n {
            allowed[f.row * n + k] = k == f.col;
            allowed[k * n + f.col] = k == f.row;
        }
    }
    for c in forbidden {
        allowed[c.index(n)] = false;
    }
    allowed
}

pub(crate) fn solve_masked(weights: &SquareMatrix, allowed: &[bool]) -> Option<(Permutation, f64)> {
    max_weight_assignment(weights, allowed)
        .map(|a| (Permutation::from_ranks(a.cols).expect("assignment is a bijection"), a.value))
}

/// Maximum-weight permutation σ with σ(fixed.row) = fixed.col and avoiding
/// every forbidden cell; ties go to the lexicographically smallest σ.
/// Returns `Ok(None)` when no such permutation exists.
pub fn assignment_oracle(
    weights: &SquareMatrix,
    fixed: Option<Cell>,
    forbidden: &[Cell],
) -> Result<Option<(Permutation, f64)>> {
    let n = weights.n();
    let in_range = |c: &Cell| c.row < n && c.col < n;
    if fixed.iter().chain(forbidden).any(|c| !in_range(c)) {
        return Err(Error::InvalidParameter(format!("cell outside the {n}x{n} grid")));
    }
    if let Some(f) = fixed {
        if forbidden.contains(&f) {
            return Err(Error::InvalidParameter(format!("fixed cell {f} is also forbidden")));
        }
    }
    if weights.as_slice().iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter("oracle weights must be finite".into()));
    }
    Ok(solve_masked(weights, &column_mask(n, fixed, forbidden)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn unconstrained_identity() {
        let (p, v) = assignment_oracle(&sq(&[&[1.0, 0.0], &[0.0, 1.0]]), None, &[]).unwrap().unwrap();
        assert_eq!(p, Permutation::identity(2));
        assert_eq!(v, 2.0);
    }

    #[test]
    fn fixed_cell_forces_swap() {
        let w = sq(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (p, v) = assignment_oracle(&w, Some(Cell::new(0, 1)), &[]).unwrap().unwrap();
        assert_eq!(p.to_string(), "21");
        assert_eq!(v, 0.0);
    }

    #[test]
    fn zero_weights_tie_break() {
        let (p, v) = assignment_oracle(&SquareMatrix::zeros(3), None, &[Cell::new(0, 0)]).unwrap().unwrap();
        // ranks (2, 1, 3): item 1 second, item 2 first
        assert_eq!(p.ranks(), &[1, 0, 2]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn infeasible_constraints() {
        // pin (1,1) and forbid the only completion at n = 2
        let r = assignment_oracle(&SquareMatrix::zeros(2), Some(Cell::new(0, 0)), &[Cell::new(1, 1)]).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn parameter_errors() {
        let w = SquareMatrix::zeros(2);
        assert!(assignment_oracle(&w, Some(Cell::new(0, 0)), &[Cell::new(0, 0)]).is_err());
        assert!(assignment_oracle(&w, Some(Cell::new(2, 0)), &[]).is_err());
    }
}
