//! Parametric families over permutations, random fixtures, and the
//! regularity conditions under which sparse signature approximations exist.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ceil_tolerant;
use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, StochasticMatrix};
use crate::model::{marginals, SparseChoiceModel};
use crate::permutation::{all_permutations, factorial, Permutation};
use crate::sinkhorn::{sinkhorn_normalize, SinkhornOptions};

/// Largest `n` for which full enumeration of `n!` permutations is allowed.
pub const ENUMERATION_LIMIT: usize = 8;

/// Multinomial logit (Plackett–Luce) weights, one per item.
#[derive(Debug, Clone, PartialEq)]
pub struct MnlParams {
    weights: Vec<f64>,
}

impl MnlParams {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("MNL weights"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("MNL weights must be positive, got {w}")));
        }
        Ok(Self { weights })
    }

    pub fn equal(n: usize) -> Self {
        Self { weights: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability of `perm`: the product over positions of the chosen item's
    /// weight divided by the weight still unranked.
    pub fn probability(&self, perm: &Permutation) -> f64 {
        let order = perm.order();
        let mut remaining: f64 = order.iter().map(|&i| self.weights[i]).sum();
        let mut p = 1.0;
        for &item in &order {
            p *= self.weights[item] / remaining;
            remaining -= self.weights[item];
        }
        p
    }
}

/// Exponential family parameters θ: P(σ) ∝ exp(Σ_i θ[i][σ(i)]).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamParams {
    theta: SquareMatrix,
}

impl ExpFamParams {
    pub fn new(theta: SquareMatrix) -> Result<Self> {
        if theta.n() == 0 {
            return Err(Error::Empty("theta"));
        }
        if theta.as_slice().iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("theta entries must be finite".into()));
        }
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: SquareMatrix::zeros(n) }
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    pub fn theta(&self) -> &SquareMatrix {
        &self.theta
    }

    pub fn energy(&self, perm: &Permutation) -> f64 {
        perm.cells().map(|(i, j)| self.theta.get(i, j)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Mnl(MnlParams),
    ExpFam(ExpFamParams),
}

impl Family {
    pub fn n(&self) -> usize {
        match self {
            Family::Mnl(p) => p.n(),
            Family::ExpFam(p) => p.n(),
        }
    }
}

/// Draws one ranking: positions are filled in order, each time choosing among
/// the unranked items with probability proportional to weight.
pub fn mnl_sample_with<R: Rng + ?Sized>(params: &MnlParams, rng: &mut R) -> Permutation {
    let mut remaining: Vec<usize> = (0..params.n()).collect();
    let mut order = Vec::with_capacity(params.n());
    while !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&i| params.weights[i]).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (k, &i) in remaining.iter().enumerate() {
            if u < params.weights[i] {
                pick = k;
                break;
            }
            u -= params.weights[i];
        }
        order.push(remaining.remove(pick));
    }
    Permutation::from_order(&order).expect("sequential draw is a bijection")
}

pub fn mnl_sample(params: &MnlParams, seed: u64) -> Permutation {
    mnl_sample_with(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` independent draws from one seeded stream.
pub fn mnl_samples(params: &MnlParams, count: usize, seed: u64) -> Vec<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| mnl_sample_with(params, &mut rng)).collect()
}

/// Full distribution by enumeration of all `n!` permutations (`n ≤ 8`).
pub fn exact_distribution(family: &Family) -> Result<SparseChoiceModel> {
    let n = family.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit { n, max: ENUMERATION_LIMIT });
    }
    let perms = all_permutations(n);
    let probs: Vec<f64> = match family {
        Family::Mnl(p) => perms.iter().map(|s| p.probability(s)).collect(),
        Family::ExpFam(p) => {
            let energies: Vec<f64> = perms.iter().map(|s| p.energy(s)).collect();
            let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let unnorm: Vec<f64> = energies.iter().map(|e| (e - top).exp()).collect();
            let z: f64 = unnorm.iter().sum();
            unnorm.into_iter().map(|u| u / z).collect()
        }
    };
    let model = SparseChoiceModel::new(n, perms.into_iter().zip(probs))?;
    // Renormalize away the rounding in the product formula.
    model.normalized()
}

/// The right-hand side factor in the regularity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionThreshold {
    /// √(ln n).
    SqrtLog,
    /// c·ln n / ε², the relaxed form.
    Relaxed { c: f64, epsilon: f64 },
}

impl ConditionThreshold {
    pub fn factor(&self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match *self {
            ConditionThreshold::SqrtLog => ln.sqrt(),
            ConditionThreshold::Relaxed { c, epsilon } => c * ln / (epsilon * epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub holds: bool,
    /// The attained ratio (may be `inf` for extreme exponential parameters).
    pub ratio: f64,
    /// Natural log of the ratio, always finite.
    pub log_ratio: f64,
    /// The bound the ratio is compared against.
    pub bound: f64,
}

/// Checks the MNL or exponential-family regularity condition.
///
/// MNL: with weights sorted ascending and `L = ⌈n^δ⌉`, tests
/// `w_max / Σ_{k ≤ n−L} w_(k) ≤ factor / n`.
/// Exponential family: tests `exp(θ_a + θ_b − θ_c − θ_d) ≤ factor` for the
/// worst four distinct cells, i.e. the two largest against the two smallest.
/// `delta_exponent` is only used by the MNL condition.
pub fn condition_check(family: &Family, delta_exponent: f64, threshold: ConditionThreshold) -> Result<ConditionReport> {
    let n = family.n();
    let factor = threshold.factor(n);
    if !(factor > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold factor {factor} is not positive")));
    }
    let (log_ratio, log_bound) = match family {
        Family::Mnl(p) => {
            if !(delta_exponent > 0.0 && delta_exponent < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "delta exponent must lie in (0, 1), got {delta_exponent}"
                )));
            }
            let l = ceil_tolerant((n as f64).powf(delta_exponent)) as usize;
            if l >= n {
                return Err(Error::InvalidParameter(format!(
                    "n − L = {n} − {l} leaves no weights to sum"
                )));
            }
            let mut w = p.weights().to_vec();
            w.sort_by(f64::total_cmp);
            let head: f64 = w[..n - l].iter().sum();
            let ratio = w[n - 1] / head;
            (ratio.ln(), (factor / n as f64).ln())
        }
        Family::ExpFam(p) => {
            if n * n < 4 {
                return Err(Error::InvalidParameter("need at least four distinct cells (n ≥ 2)".into()));
            }
            let mut t = p.theta().as_slice().to_vec();
            t.sort_by(f64::total_cmp);
            let m = t.len();
            ((t[m - 1] + t[m - 2]) - (t[0] + t[1]), factor.ln())
        }
    };
    Ok(ConditionReport {
        holds: log_ratio <= log_bound,
        ratio: log_ratio.exp(),
        log_ratio,
        bound: log_bound.exp(),
    })
}

/// `k` distinct uniformly random permutations of `n` items with weights from
/// normalized i.i.d. uniform(0, 1] draws.
pub fn random_sparse_model(n: usize, k: usize, seed: u64) -> Result<SparseChoiceModel> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and k ≥ 1, got n = {n}, k = {k}")));
    }
    if factorial(n).is_some_and(|f| (k as u64) > f) {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds {n}! distinct permutations")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Permutation> = if n <= ENUMERATION_LIMIT && (k as u64) * 2 > factorial(n).unwrap() {
        let all = all_permutations(n);
        all.choose_multiple(&mut rng, k).cloned().collect()
    } else {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(k);
        let mut order: Vec<usize> = (0..n).collect();
        while out.len() < k {
            order.shuffle(&mut rng);
            let p = Permutation::from_order(&order).unwrap();
            if seen.insert(p.clone()) {
                out.push(p);
            }
        }
        out
    };
    let raw: Vec<f64> = (0..k).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    SparseChoiceModel::new(n, perms.into_iter().zip(raw.into_iter().map(|w| w / total)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsMethod {
    /// Marginals of a random sparse model with `min(2n, n!)` permutations.
    Mixture,
    /// Sinkhorn balancing of an i.i.d. uniform(0, 1) matrix.
    Balanced,
}

pub fn random_doubly_stochastic(n: usize, seed: u64, method: DsMethod) -> Result<StochasticMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    match method {
        DsMethod::Mixture => {
            let k = factorial(n).map_or(2 * n, |f| (2 * n).min(f as usize));
            marginals(&random_sparse_model(n, k, seed)?)
        }
        DsMethod::Balanced => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..n * n).map(|_| 1.0 - rng.gen::<f64>()).collect();
            sinkhorn_normalize(&SquareMatrix::from_flat(n, data)?, &SinkhornOptions::default())
        }
    }
}
