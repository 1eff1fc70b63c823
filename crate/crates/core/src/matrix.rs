//! Dense square matrices and the doubly stochastic newtype.

use std::fmt;
use std::ops::Index;

use crate::error::{CellRef, Error, Result};

/// Default tolerance on row and column sums.
pub const DEFAULT_STOCHASTIC_TOL: f64 = 1e-9;

/// Row-major `n × n` matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self { n, data: vec![value; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "{} values cannot fill a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochastic_residual(&self) -> f64 {
        self.row_sums()
            .into_iter()
            .chain(self.col_sums())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl AsRef<SquareMatrix> for SquareMatrix {
    fn as_ref(&self) -> &SquareMatrix {
        self
    }
}

/// A nonnegative square matrix whose rows and columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(SquareMatrix);

impl StochasticMatrix {
    /// Validates nonnegativity and unit row/column sums within `tol`.
    pub fn new(m: SquareMatrix, tol: f64) -> Result<Self> {
        if m.n() == 0 {
            return Err(Error::Empty("matrix has no rows"));
        }
        if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite() || *v < 0.0) {
            let (i, j) = (pos / m.n(), pos % m.n());
            return Err(Error::NotStochastic(format!(
                "entry {} is {}",
                CellRef(i, j),
                m.get(i, j)
            )));
        }
        let residual = m.stochastic_residual();
        if residual > tol {
            return Err(Error::NotStochastic(format!(
                "row/column sums deviate from 1 by {residual:e} (tolerance {tol:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows)?, DEFAULT_STOCHASTIC_TOL)
    }

    /// Wraps without validation; for outputs that are stochastic by construction.
    pub(crate) fn new_unchecked(m: SquareMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(SquareMatrix::identity(n))
    }

    pub fn uniform(n: usize) -> Self {
        Self(SquareMatrix::filled(n, 1.0 / n as f64))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }
}

impl AsRef<SquareMatrix> for StochasticMatrix {
    fn as_ref(&self) -> &SquareMatrix {
        &self.0
    }
}

impl fmt::Display for StochasticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// Entrywise Euclidean (Frobenius) norm.
    L2,
    /// Largest absolute entry.
    Linf,
}

/// Entrywise distance between two matrices of equal dimension.
pub fn distance(a: impl AsRef<SquareMatrix>, b: impl AsRef<SquareMatrix>, norm: Norm) -> Result<f64> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    let diffs = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs());
    Ok(match norm {
        Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeErrorMode {
    /// Σ |approx − ref| / ref over all cells.
    Sum,
    /// The sum divided by the number of cells.
    Mean,
}

/// Relative deviation of `approx` from `reference`, cell by cell.
///
/// Cells where both agree contribute nothing even if the reference is zero.
pub fn relative_error(
    approx: impl AsRef<SquareMatrix>,
    reference: impl AsRef<SquareMatrix>,
    mode: RelativeErrorMode,
) -> Result<f64> {
    let (a, r) = (approx.as_ref(), reference.as_ref());
    if a.n() != r.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: r.n() });
    }
    let n = a.n();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let diff = (a.get(i, j) - r.get(i, j)).abs();
            if diff == 0.0 {
                continue;
            }
            if r.get(i, j) == 0.0 {
                return Err(Error::DivisionByZero(CellRef(i, j)));
            }
            sum += diff / r.get(i, j).abs();
        }
    }
    Ok(match mode {
        RelativeErrorMode::Sum => sum,
        RelativeErrorMode::Mean => sum / (n * n) as f64,
    })
}
