//! The 1980 American Psychological Association presidential election
//! fixture: first-order marginals of 5,738 complete ballots over five
//! candidates, and a six-permutation sparse model fitted to them.

use crate::matrix::{SquareMatrix, StochasticMatrix};
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;
use crate::sinkhorn::{sinkhorn_normalize, SinkhornOptions};

/// Percentage of voters ranking candidate `i` (row) at position `j` (column).
pub const TABLE_PERCENT: [[u32; 5]; 5] = [
    [18, 26, 23, 17, 15],
    [14, 19, 25, 24, 18],
    [28, 17, 14, 18, 23],
    [20, 17, 19, 20, 23],
    [20, 21, 20, 19, 20],
];

/// The fitted sparse model as published (mass 0.999999).
pub const MODEL: [(&str, f64); 6] = [
    ("24153", 0.211990),
    ("32541", 0.202406),
    ("15432", 0.197331),
    ("43215", 0.180417),
    ("51324", 0.145649),
    ("23154", 0.062206),
];

/// The table divided by 100; rows and columns sum to 0.99–1.01.
pub fn table_raw() -> SquareMatrix {
    SquareMatrix::from_rows(
        TABLE_PERCENT.iter().map(|r| r.iter().map(|&x| x as f64 / 100.0).collect()).collect(),
    )
    .expect("5x5 table")
}

/// The table after Sinkhorn balancing.
pub fn table() -> StochasticMatrix {
    sinkhorn_normalize(&table_raw(), &SinkhornOptions::default()).expect("table has full support")
}

/// The published model with its probabilities exactly as listed.
pub fn published_model_raw() -> SparseChoiceModel {
    SparseChoiceModel::new(5, MODEL.iter().map(|&(s, p)| (s.parse::<Permutation>().expect("fixture"), p)))
        .expect("fixture")
}

/// The published model rescaled to mass 1.
pub fn published_model() -> SparseChoiceModel {
    published_model_raw().normalized().expect("fixture")
}
