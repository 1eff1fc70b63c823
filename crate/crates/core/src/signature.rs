//! The signature condition and candidate signature cell sets.
//!
//! A support has the signature property when each of its permutations
//! occupies some (item, position) cell that no other support permutation
//! occupies; the marginal at that cell is then exactly its probability.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;

/// An (item, position) cell, 0-based; printed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn index(&self, n: usize) -> usize {
        self.row * n + self.col
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row + 1, self.col + 1)
    }
}

/// `K ≥ 1` distinct cells hypothesized as signature components, sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignatureSet {
    cells: Vec<Cell>,
}

impl SignatureSet {
    pub fn new(mut cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Empty("signature set"));
        }
        cells.sort();
        if cells.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("signature cells must be distinct".into()));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl fmt::Display for SignatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cells.iter().map(Cell::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureCheck {
    pub holds: bool,
    /// For each support permutation, its first unique cell in (item, position)
    /// order, or `None` if every cell it occupies is shared.
    pub witnesses: BTreeMap<Permutation, Option<Cell>>,
}

impl SignatureCheck {
    pub fn lacking(&self) -> impl Iterator<Item = &Permutation> {
        self.witnesses.iter().filter(|(_, c)| c.is_none()).map(|(p, _)| p)
    }
}

pub fn check_signature(model: &SparseChoiceModel) -> SignatureCheck {
    let n = model.n();
    let mut cover = vec![0usize; n * n];
    for perm in model.support() {
        for (i, j) in perm.cells() {
            cover[i * n + j] += 1;
        }
    }
    let witnesses: BTreeMap<Permutation, Option<Cell>> = model
        .support()
        .map(|perm| {
            let cell = perm.cells().find(|&(i, j)| cover[i * n + j] == 1).map(|(i, j)| Cell::new(i, j));
            (perm.clone(), cell)
        })
        .collect();
    let holds = !witnesses.is_empty() && witnesses.values().all(Option::is_some);
    SignatureCheck { holds, witnesses }
}

/// Absolute slack on the mass window, absorbing rounding in `d`.
const MASS_SLACK: f64 = 1e-12;

/// Lexicographic stream of `k`-subsets of the `n²` cells (row-major order)
/// whose `d`-values sum into `[1 − ε, 1 + ε]`.
///
/// Branches whose partial sum already exceeds `1 + ε` are pruned. The
/// iterator can be resumed from any emitted set with [`CandidateSets::resume_after`].
#[derive(Debug, Clone)]
pub struct CandidateSets {
    n: usize,
    k: usize,
    values: Vec<f64>,
    lo: f64,
    hi: f64,
    stack: Vec<usize>,
    sums: Vec<f64>,
    next_start: usize,
    done: bool,
}

pub fn candidate_signature_sets(d: &StochasticMatrix, k: usize, epsilon: f64) -> Result<CandidateSets> {
    let n = d.n();
    if k == 0 || k > n * n {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={}", n * n)));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    Ok(CandidateSets {
        n,
        k,
        values: d.as_matrix().as_slice().to_vec(),
        lo: 1.0 - epsilon - MASS_SLACK,
        hi: 1.0 + epsilon + MASS_SLACK,
        stack: Vec::with_capacity(k),
        sums: vec![0.0],
        next_start: 0,
        done: false,
    })
}

impl CandidateSets {
    /// Positions the stream just after `set`, so the next item is the first
    /// qualifying set lexicographically greater than it.
    pub fn resume_after(mut self, set: &SignatureSet) -> Result<Self> {
        if set.len() != self.k {
            return Err(Error::InvalidParameter("resume set has the wrong size".into()));
        }
        self.stack.clear();
        self.sums = vec![0.0];
        for c in set.cells() {
            let idx = c.index(self.n);
            self.stack.push(idx);
            self.sums.push(self.sums.last().unwrap() + self.values[idx]);
        }
        let last = self.stack.pop().unwrap();
        self.sums.pop();
        self.next_start = last + 1;
        self.done = false;
        Ok(self)
    }

    fn emit(&self, last: usize) -> SignatureSet {
        let cells = self
            .stack
            .iter()
            .chain(std::iter::once(&last))
            .map(|&idx| Cell::new(idx / self.n, idx % self.n))
            .collect();
        SignatureSet { cells }
    }
}

impl Iterator for CandidateSets {
    type Item = SignatureSet;

    fn next(&mut self) -> Option<SignatureSet> {
        let m = self.values.len();
        while !self.done {
            let need = self.k - self.stack.len();
            if self.next_start + need > m {
                match self.stack.pop() {
                    Some(last) => {
                        self.sums.pop();
                        self.next_start = last + 1;
                        continue;
                    }
                    None => {
                        self.done = true;
                        break;
                    }
                }
            }
            let c = self.next_start;
            let s = self.sums.last().unwrap() + self.values[c];
            self.next_start = c + 1;
            if s > self.hi {
                continue;
            }
            if need > 1 {
                self.stack.push(c);
                self.sums.push(s);
            } else if s >= self.lo {
                return Some(self.emit(c));
            }
        }
        None
    }
}
