//! Sampling sparsifier: draw `T = ⌈n/ε²⌉` permutations from any model
//! consistent with `d` and keep their empirical distribution.
//!
//! Each marginal entry of the empirical model is a binomial mean, so
//! `E‖M(λ̂) − d‖₂² = Σ d_ij(1 − d_ij)/T ≤ n/T = ε²`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::birkhoff::decompose;
use crate::ceil_tolerant;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;

/// Input tolerance for sparsification.
pub const SPARSIFY_TOL: f64 = 1e-6;

/// Sample count for the standard bound.
pub fn sample_count(n: usize, epsilon: f64) -> usize {
    ceil_tolerant(n as f64 / (epsilon * epsilon)) as usize
}

/// Sample count `⌈4n/ε²⌉`, at which P(‖M(λ̂) − d‖₂ ≥ ε) ≤ 1/4 by Markov.
pub fn sample_count_markov(n: usize, epsilon: f64) -> usize {
    ceil_tolerant(4.0 * n as f64 / (epsilon * epsilon)) as usize
}

#[derive(Debug, Clone)]
pub struct Sparsified {
    pub model: SparseChoiceModel,
    pub samples: usize,
}

pub fn sample_sparsify(d: &StochasticMatrix, epsilon: f64, seed: u64) -> Result<Sparsified> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    sample_sparsify_with_count(d, sample_count(d.n(), epsilon), seed)
}

/// Empirical distribution of `samples` i.i.d. draws from a Birkhoff
/// decomposition of `d`.
pub fn sample_sparsify_with_count(d: &StochasticMatrix, samples: usize, seed: u64) -> Result<Sparsified> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let dec = decompose(d, SPARSIFY_TOL)?;
    let mut cumulative = Vec::with_capacity(dec.terms.len());
    let mut acc = 0.0;
    for (_, w) in &dec.terms {
        acc += w;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Permutation> = (0..samples)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(dec.terms.len() - 1);
            dec.terms[k].0.clone()
        })
        .collect();
    Ok(Sparsified { model: empirical_distribution(&draws)?, samples })
}

/// Each distinct permutation gets its multiplicity divided by the sample count.
pub fn empirical_distribution(samples: &[Permutation]) -> Result<SparseChoiceModel> {
    let first = samples.first().ok_or(Error::Empty("no samples"))?;
    let mut counts: BTreeMap<&Permutation, usize> = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_default() += 1;
    }
    let t = samples.len() as f64;
    SparseChoiceModel::new(first.n(), counts.into_iter().map(|(p, c)| (p.clone(), c as f64 / t)))
}
