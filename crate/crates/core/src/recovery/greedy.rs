use crate::birkhoff::{decompose, DEFAULT_TOL};
use crate::error::Result;
use crate::matrix::{distance, Norm, StochasticMatrix};
use crate::model::{marginals, SparseChoiceModel};
use crate::signature::check_signature;

/// Output of the greedy heuristic. Carries no recovery guarantee.
#[derive(Debug, Clone)]
pub struct GreedyFit {
    pub model: SparseChoiceModel,
    /// ‖M(model) − d‖₂.
    pub l2_error: f64,
    /// Whether the l2 target was met (otherwise the full decomposition is returned).
    pub met_target: bool,
    /// Whether the model satisfies the signature condition.
    pub in_signature_family: bool,
    /// Number of decomposition terms available before truncation.
    pub terms_available: usize,
}

/// Max-bottleneck Birkhoff decomposition truncated to the shortest
/// heaviest-first prefix whose renormalized marginals are within `epsilon`
/// of `d` in l2.
pub fn greedy_fit(d: &StochasticMatrix, epsilon: f64) -> Result<GreedyFit> {
    let dec = decompose(d, DEFAULT_TOL.max(d.as_matrix().stochastic_residual()))?;
    let mut terms = dec.terms.clone();
    terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut best = None;
    for len in 1..=terms.len() {
        let model = SparseChoiceModel::new(d.n(), terms[..len].iter().cloned())?.normalized()?;
        let err = distance(marginals(&model)?, d, Norm::L2)?;
        if err <= epsilon {
            best = Some((model, err, true));
            break;
        }
        if len == terms.len() {
            best = Some((model, err, false));
        }
    }
    let (model, l2_error, met_target) = best.expect("decomposition has at least one term");
    let in_signature_family = check_signature(&model).holds;
    Ok(GreedyFit { model, l2_error, met_target, in_signature_family, terms_available: terms.len() })
}
