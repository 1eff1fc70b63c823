//! Hare-system (single transferable vote) elimination over a choice model.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::SparseChoiceModel;
use crate::permutation::Permutation;

/// One elimination round. Candidates are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// First-place mass of every candidate still in the race.
    pub tallies: BTreeMap<usize, f64>,
    pub eliminated: usize,
    /// Set when the minimum tally was shared and the tie-break decided.
    pub tie_broken: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TallyTrace {
    /// One round per eliminated candidate; the last survivor is not listed.
    pub rounds: Vec<Round>,
    /// Winner first, then candidates in reverse elimination order.
    pub ranking: Permutation,
    pub winner: usize,
}

impl TallyTrace {
    pub fn elimination_order(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.eliminated).collect()
    }
}

/// Tallies differing by less than this count as tied.
const TIE_TOL: f64 = 1e-12;

fn validate_remaining(model: &SparseChoiceModel, remaining: &BTreeSet<usize>) -> Result<()> {
    if remaining.is_empty() {
        return Err(Error::Empty("remaining candidate set"));
    }
    let n = model.n();
    if let Some(c) = remaining.iter().find(|&&c| c == 0 || c > n) {
        return Err(Error::InvalidParameter(format!("candidate {c} is outside 1..={n}")));
    }
    Ok(())
}

/// Mass of the highest-ranked (`top = true`) or lowest-ranked remaining
/// candidate on each support permutation.
fn extreme_tally(model: &SparseChoiceModel, remaining: &BTreeSet<usize>, top: bool) -> BTreeMap<usize, f64> {
    let mut tally: BTreeMap<usize, f64> = remaining.iter().map(|&c| (c, 0.0)).collect();
    for (perm, p) in model.iter() {
        let ranked = remaining.iter().map(|&c| (perm.rank_of(c - 1), c));
        let pick = if top { ranked.min() } else { ranked.max() };
        let (_, c) = pick.expect("remaining is nonempty");
        *tally.get_mut(&c).unwrap() += p;
    }
    tally
}

/// First-place mass per remaining candidate (1-based).
pub fn first_place_tally(model: &SparseChoiceModel, remaining: &BTreeSet<usize>) -> Result<BTreeMap<usize, f64>> {
    validate_remaining(model, remaining)?;
    Ok(extreme_tally(model, remaining, true))
}

/// Last-place mass per remaining candidate, used to break ties.
pub fn last_place_tally(model: &SparseChoiceModel, remaining: &BTreeSet<usize>) -> Result<BTreeMap<usize, f64>> {
    validate_remaining(model, remaining)?;
    Ok(extreme_tally(model, remaining, false))
}

/// Eliminates the candidate with least first-place mass until one remains.
///
/// Ties go against the candidate with more last-place mass among those
/// still standing, then against the larger index.
pub fn hare(model: &SparseChoiceModel) -> Result<TallyTrace> {
    if model.is_empty() {
        return Err(Error::Empty("choice model"));
    }
    let n = model.n();
    let mut remaining: BTreeSet<usize> = (1..=n).collect();
    let mut rounds = Vec::with_capacity(n.saturating_sub(1));
    while remaining.len() > 1 {
        let tallies = extreme_tally(model, &remaining, true);
        let low = tallies.values().copied().fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = tallies.iter().filter(|(_, &m)| m - low <= TIE_TOL).map(|(&c, _)| c).collect();
        let eliminated = if tied.len() == 1 {
            tied[0]
        } else {
            let last = extreme_tally(model, &remaining, false);
            *tied
                .iter()
                .max_by(|&&a, &&b| last[&a].total_cmp(&last[&b]).then(a.cmp(&b)))
                .unwrap()
        };
        remaining.remove(&eliminated);
        rounds.push(Round { tallies, eliminated, tie_broken: tied.len() > 1 });
    }
    let winner = *remaining.iter().next().expect("one candidate left");
    let mut order = vec![winner - 1];
    order.extend(rounds.iter().rev().map(|r| r.eliminated - 1));
    let ranking = Permutation::from_order(&order)?;
    Ok(TallyTrace { rounds, ranking, winner })
}
