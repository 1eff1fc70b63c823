//! Sinkhorn–Knopp balancing and the noisy-observation model built on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, StochasticMatrix};

#[derive(Debug, Clone, Copy)]
pub struct SinkhornOptions {
    /// Target bound on every |row sum − 1| and |column sum − 1|.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SinkhornReport {
    pub matrix: StochasticMatrix,
    /// Number of row+column sweeps performed.
    pub iterations: usize,
    pub residual: f64,
}

/// Alternately rescales rows and columns until all sums are within `tol` of 1.
pub fn sinkhorn_normalize(m: &SquareMatrix, opts: &SinkhornOptions) -> Result<StochasticMatrix> {
    sinkhorn_scale(m, opts).map(|r| r.matrix)
}

pub fn sinkhorn_scale(m: &SquareMatrix, opts: &SinkhornOptions) -> Result<SinkhornReport> {
    let n = m.n();
    if n == 0 {
        return Err(Error::Empty("matrix has no rows"));
    }
    if m.as_slice().iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter(
            "sinkhorn input must be finite and nonnegative".into(),
        ));
    }
    if let Some(i) = m.row_sums().iter().position(|&s| s <= 0.0) {
        return Err(Error::InvalidParameter(format!("row {} has no positive entry", i + 1)));
    }
    if let Some(j) = m.col_sums().iter().position(|&s| s <= 0.0) {
        return Err(Error::InvalidParameter(format!("column {} has no positive entry", j + 1)));
    }

    let mut x = m.clone();
    let mut residual = x.stochastic_residual();
    let mut iterations = 0;
    while residual > opts.tol {
        if iterations == opts.max_iters {
            return Err(Error::NotConverged { iterations, residual });
        }
        for (i, s) in x.row_sums().into_iter().enumerate() {
            for j in 0..n {
                x.set(i, j, x.get(i, j) / s);
            }
        }
        let cols = x.col_sums();
        for i in 0..n {
            for (j, s) in cols.iter().enumerate() {
                x.set(i, j, x.get(i, j) / s);
            }
        }
        iterations += 1;
        residual = x.stochastic_residual();
    }
    Ok(SinkhornReport { matrix: StochasticMatrix::new_unchecked(x), iterations, residual })
}

/// Sweeps allowed before a perturbed pattern is judged badly conditioned.
const PERTURB_SWEEPS: usize = 20_000;

/// Adds seeded noise of entrywise l2 norm at most `noise_bound` and rebalances.
///
/// Noise is drawn i.i.d. uniform on [−1, 1] per cell, scaled to the bound,
/// negatives are clipped to zero, and the result is Sinkhorn-balanced. If the
/// clipped pattern has no doubly stochastic scaling reachable at linear rate
/// (new positive cells that lie on no perfect matching), the draw is retried
/// with noise restricted to the support of `d`, which always balances.
pub fn perturb(d: &StochasticMatrix, noise_bound: f64, seed: u64) -> Result<StochasticMatrix> {
    if !(noise_bound >= 0.0) || !noise_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise bound must be a nonnegative real, got {noise_bound}"
        )));
    }
    if noise_bound == 0.0 {
        return Ok(d.clone());
    }
    let n = d.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let opts = SinkhornOptions { tol: 1e-12, max_iters: PERTURB_SWEEPS };

    let full = clipped(d, &noise, noise_bound, |_| true);
    if let Ok(m) = sinkhorn_normalize(&full, &opts) {
        return Ok(m);
    }
    // Support-preserving fallback: each positive cell keeps at least half its value.
    let mut bounded = noise.clone();
    for (k, e) in bounded.iter_mut().enumerate() {
        let v = d.as_matrix().as_slice()[k];
        *e = if v > 0.0 { e.max(-0.5 * v / noise_bound) } else { 0.0 };
    }
    let restricted = clipped(d, &bounded, noise_bound, |v| v > 0.0);
    sinkhorn_normalize(&restricted, &opts)
}

fn clipped(d: &StochasticMatrix, noise: &[f64], bound: f64, keep: impl Fn(f64) -> bool) -> SquareMatrix {
    let base = d.as_matrix().as_slice();
    let norm = noise
        .iter()
        .zip(base)
        .filter(|(_, &v)| keep(v))
        .map(|(e, _)| e * e)
        .sum::<f64>()
        .sqrt();
    let scale = if norm > 0.0 { bound / norm } else { 0.0 };
    let data = base
        .iter()
        .zip(noise)
        .map(|(&v, &e)| if keep(v) { (v + scale * e).max(0.0) } else { v })
        .collect();
    SquareMatrix::from_flat(d.n(), data).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{distance, Norm};

    fn sq(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn already_balanced_is_untouched() {
        let m = sq(&[&[0.25, 0.75], &[0.75, 0.25]]);
        let r = sinkhorn_scale(&m, &SinkhornOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.matrix.as_matrix(), &m);
    }

    #[test]
    fn diagonal_scaling() {
        let r = sinkhorn_normalize(&sq(&[&[2.0, 0.0], &[0.0, 2.0]]), &SinkhornOptions::default()).unwrap();
        assert_eq!(r.as_matrix(), &SquareMatrix::identity(2));
    }

    #[test]
    fn asymmetric_input_balances() {
        let r = sinkhorn_normalize(&sq(&[&[1.0, 1.0], &[1.0, 3.0]]), &SinkhornOptions::default()).unwrap();
        assert!(r.as_matrix().stochastic_residual() <= 1e-10);
        assert!((r.get(0, 1) - r.get(1, 0)).abs() < 1e-12);
        // Scaling preserves the cross ratio a·d/(b·c) = 3, and a 2x2 doubly
        // stochastic matrix is [[x, 1-x], [1-x, x]], so x/(1-x) = sqrt(3).
        let x = 3f64.sqrt() / (1.0 + 3f64.sqrt());
        assert!((r.get(0, 0) - x).abs() < 1e-10);
        assert!((r.get(1, 1) - x).abs() < 1e-10);
    }

    #[test]
    fn zero_pattern_preserved() {
        let m = sq(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 3.0], &[4.0, 0.0, 1.0]]);
        let r = sinkhorn_normalize(&m, &SinkhornOptions::default()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j) == 0.0, r.get(i, j) == 0.0);
            }
        }
    }

    #[test]
    fn idempotent() {
        let m = sq(&[&[1.0, 5.0, 2.0], &[3.0, 1.0, 1.0], &[0.5, 2.0, 7.0]]);
        let opts = SinkhornOptions::default();
        let once = sinkhorn_normalize(&m, &opts).unwrap();
        let twice = sinkhorn_normalize(once.as_matrix(), &opts).unwrap();
        assert!(distance(&once, &twice, Norm::Linf).unwrap() < 1e-11);
    }

    #[test]
    fn non_convergence_reports_residual() {
        // No total support: the (0,1) entry must decay to zero, sublinearly.
        let m = sq(&[&[1.0, 1.0], &[0.0, 1.0]]);
        match sinkhorn_scale(&m, &SinkhornOptions { tol: 1e-12, max_iters: 50 }) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 50);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_rows() {
        let m = sq(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert!(sinkhorn_normalize(&m, &SinkhornOptions::default()).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let d = StochasticMatrix::uniform(4);
        assert_eq!(perturb(&d, 0.0, 7).unwrap(), d);
    }

    #[test]
    fn perturbation_bound_monte_carlo() {
        let d = crate::generators::random_doubly_stochastic(5, 11, crate::generators::DsMethod::Balanced).unwrap();
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let out = perturb(&d, 0.1, seed).unwrap();
            assert!(out.as_matrix().stochastic_residual() <= 1e-9);
            assert!(out.as_matrix().as_slice().iter().all(|v| *v >= 0.0));
            worst = worst.max(distance(&out, &d, Norm::L2).unwrap());
        }
        assert!(worst <= 0.2, "worst perturbation {worst}");
        assert!(worst > 0.0);
    }

    #[test]
    fn perturbing_a_permutation_matrix_stays_stochastic() {
        let d = StochasticMatrix::identity(4);
        for seed in 0..30 {
            let out = perturb(&d, 0.05, seed).unwrap();
            assert!(out.as_matrix().stochastic_residual() <= 1e-9);
            assert!(distance(&out, &d, Norm::L2).unwrap() <= 0.1 + 1e-12);
        }
    }
}
