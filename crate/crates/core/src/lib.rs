//! Sparse choice models: distributions over permutations with small support,
//! learned from noisy first-order marginals.
//!
//! Permutations are stored 0-based (`ranks[item] = position`) and printed
//! 1-based as position strings (`24153` ranks candidate 2 first).

pub mod aggregation;
pub mod apa;
pub mod birkhoff;
pub mod cdf;
pub mod error;
pub mod generators;
pub mod io;
pub mod matching;
pub mod matrix;
pub mod model;
pub mod permutation;
pub mod recovery;
pub mod signature;
pub mod sinkhorn;
pub mod sparsify;

pub use error::{Error, Result};
pub use matrix::{distance, relative_error, Norm, RelativeErrorMode, SquareMatrix, StochasticMatrix};
pub use model::{marginals, raw_marginals, SparseChoiceModel};
pub use permutation::Permutation;
pub use signature::{Cell, SignatureSet};

/// Ceiling that forgives floating-point noise: values within 1e-9 of an
/// integer round to it, so `⌈50.000000000001⌉` stays 50.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x.ceil()
    }
}

#[cfg(test)]
mod tests {
    use super::ceil_tolerant;

    #[test]
    fn tolerant_ceiling() {
        assert_eq!(ceil_tolerant(8.0 / (0.4 * 0.4)), 50.0);
        assert_eq!(ceil_tolerant(49.2), 50.0);
        assert_eq!(ceil_tolerant(3.0), 3.0);
        assert_eq!(ceil_tolerant(3.0000001), 4.0);
    }
}
