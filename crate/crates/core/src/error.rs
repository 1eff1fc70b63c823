use std::fmt;

/// A matrix cell reported in diagnostics, printed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRef(pub usize, pub usize);

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0 + 1, self.1 + 1)
    }
}

fn one_based(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model mass {mass} is not 1 (tolerance {tol})")]
    Unnormalized { mass: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("relative error undefined: reference is zero at cell {0} where the approximation differs")]
    DivisionByZero(CellRef),

    #[error("matrix is not doubly stochastic: {0}")]
    NotStochastic(String),

    #[error(
        "no perfect matching on the positive support: rows {} only reach columns {}",
        one_based(rows),
        one_based(cols)
    )]
    HallViolation { rows: Vec<usize>, cols: Vec<usize> },

    #[error("sinkhorn scaling did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("n = {n} exceeds the enumeration limit of {max}; use a sampler instead")]
    SizeLimit { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
