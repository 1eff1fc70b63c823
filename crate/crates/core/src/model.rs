//! Sparse distributions over permutations and the first-order marginal operator.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, StochasticMatrix};
use crate::permutation::Permutation;

/// Tolerance on total mass for [`marginals`].
pub const MASS_TOL: f64 = 1e-9;

/// A finitely supported, possibly un-normalized, measure on permutations of
/// `n` items. Zero-probability entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChoiceModel {
    n: usize,
    entries: BTreeMap<Permutation, f64>,
}

impl SparseChoiceModel {
    /// Builds a model, summing repeated permutations and dropping zeros.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (Permutation, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (perm, p) in entries {
            if perm.n() != n {
                return Err(Error::InvalidModel(format!(
                    "permutation {perm} has {} items, expected {n}",
                    perm.n()
                )));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidModel(format!("probability {p} for {perm}")));
            }
            *map.entry(perm).or_insert(0.0) += p;
        }
        map.retain(|_, p| *p > 0.0);
        Ok(Self { n, entries: map })
    }

    pub fn point_mass(perm: Permutation) -> Self {
        let n = perm.n();
        Self { n, entries: BTreeMap::from([(perm, 1.0)]) }
    }

    /// Equal mass on each distinct permutation given.
    pub fn uniform_over(n: usize, perms: impl IntoIterator<Item = Permutation>) -> Result<Self> {
        let perms: Vec<Permutation> = perms.into_iter().collect();
        let w = 1.0 / perms.len() as f64;
        Self::new(n, perms.into_iter().map(|p| (p, w)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// ∥λ∥₀.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total_mass() - 1.0).abs() <= tol
    }

    pub fn probability(&self, perm: &Permutation) -> f64 {
        self.entries.get(perm).copied().unwrap_or(0.0)
    }

    /// Entries in lexicographic permutation order.
    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn support(&self) -> impl Iterator<Item = &Permutation> {
        self.entries.keys()
    }

    /// Rescales to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::Empty("model has no mass"));
        }
        Ok(self.scaled(1.0 / mass))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
        }
    }

    /// The weighted sum `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Self::new(
            self.n,
            self.iter()
                .map(|(k, v)| (k.clone(), alpha * v))
                .chain(other.iter().map(|(k, v)| (k.clone(), beta * v))),
        )
    }

    /// Entries sorted by decreasing probability, ties in permutation order.
    pub fn by_probability(&self) -> Vec<(&Permutation, f64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

/// Σ λ(σ)·1[σ(i) = j] without any mass check.
pub fn raw_marginals(model: &SparseChoiceModel) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(model.n());
    for (perm, p) in model.iter() {
        for (i, j) in perm.cells() {
            m.add(i, j, p);
        }
    }
    m
}

/// First-order marginals M(λ) of a normalized model.
pub fn marginals(model: &SparseChoiceModel) -> Result<StochasticMatrix> {
    let mass = model.total_mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Unnormalized { mass, tol: MASS_TOL });
    }
    Ok(StochasticMatrix::new_unchecked(raw_marginals(model)))
}
