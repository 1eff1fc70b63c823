//! Permutations as rank assignments.
//!
//! A [`Permutation`] stores, for every item, the position it is ranked at.
//! Storage is 0-based; everything that crosses an I/O boundary (parsing,
//! `Display`, position strings) is 1-based. A *position string* such as
//! `24153` lists candidates in rank order: the digit at position `r` is the
//! candidate ranked `r`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    ranks: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { ranks: (0..n).collect() }
    }

    /// Builds from 0-based ranks (`ranks[item] = position`).
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r >= n || seen[r] {
                return Err(Error::InvalidPermutation(format!(
                    "ranks {ranks:?} are not a bijection on 0..{n}"
                )));
            }
            seen[r] = true;
        }
        Ok(Self { ranks })
    }

    /// Builds from 1-based ranks (`ranks[i] = σ(i+1)`).
    pub fn from_one_based_ranks(ranks: &[usize]) -> Result<Self> {
        if ranks.contains(&0) {
            return Err(Error::InvalidPermutation(format!(
                "1-based ranks {ranks:?} contain 0"
            )));
        }
        Self::from_ranks(ranks.iter().map(|r| r - 1).collect())
    }

    /// Builds from an ordering: `order[position] = item` (0-based).
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![usize::MAX; n];
        for (pos, &item) in order.iter().enumerate() {
            if item >= n || ranks[item] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "order {order:?} is not a bijection on 0..{n}"
                )));
            }
            ranks[item] = pos;
        }
        Ok(Self { ranks })
    }

    /// Parses a position string: concatenated 1-based candidate digits
    /// (`24153`) or, for more than nine items, comma-separated candidates.
    pub fn parse_position_string(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidPermutation("empty position string".into()));
        }
        let candidates: Vec<usize> = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|e| {
                        Error::InvalidPermutation(format!("bad candidate {t:?}: {e}"))
                    })
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10).map(|d| d as usize).ok_or_else(|| {
                        Error::InvalidPermutation(format!("bad candidate digit {c:?} in {s:?}"))
                    })
                })
                .collect::<Result<_>>()?
        };
        if candidates.contains(&0) {
            return Err(Error::InvalidPermutation(format!(
                "candidates are 1-based, got 0 in {s:?}"
            )));
        }
        let order: Vec<usize> = candidates.iter().map(|c| c - 1).collect();
        Self::from_order(&order)
    }

    /// Candidates in rank order, 1-based; digits concatenated for n ≤ 9.
    pub fn to_position_string(&self) -> String {
        let order = self.order();
        if self.n() <= 9 {
            order.iter().map(|c| char::from(b'1' + *c as u8)).collect()
        } else {
            let parts: Vec<String> = order.iter().map(|c| (c + 1).to_string()).collect();
            parts.join(",")
        }
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    /// 0-based position of `item`.
    #[inline]
    pub fn rank_of(&self, item: usize) -> usize {
        self.ranks[item]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `order[position] = item`, the inverse permutation.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.n()];
        for (item, &pos) in self.ranks.iter().enumerate() {
            order[pos] = item;
        }
        order
    }

    /// Item ranked at `position` (0-based).
    pub fn item_at(&self, position: usize) -> usize {
        self.ranks
            .iter()
            .position(|&r| r == position)
            .expect("permutation is a bijection")
    }

    /// The (item, position) cells this permutation occupies, in item order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ranks.iter().copied().enumerate()
    }

    /// Relabels items: the result ranks `pi[i]` where `self` ranked `i`.
    pub fn relabel_items(&self, pi: &Permutation) -> Permutation {
        let mut ranks = vec![0; self.n()];
        for (item, &pos) in self.ranks.iter().enumerate() {
            ranks[pi.ranks[item]] = pos;
        }
        Permutation { ranks }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_position_string())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_position_string(s)
    }
}

/// `n!`, or `None` on overflow.
pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// All permutations of `n` items in lexicographic order of their rank vectors.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut ranks: Vec<usize> = (0..n).collect();
    loop {
        out.push(Permutation { ranks: ranks.clone() });
        // next_permutation
        let Some(i) = (1..n).rev().find(|&i| ranks[i - 1] < ranks[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| ranks[j] > ranks[i - 1]).unwrap();
        ranks.swap(i - 1, j);
        ranks[i..].reverse();
    }
    out
}

/// Steinhaus–Johnson–Trotter order over rankings: consecutive entries differ
/// by swapping the candidates at two adjacent positions. Starts at the
/// identity ranking.
pub fn sjt_order(n: usize) -> Vec<Permutation> {
    if n == 0 {
        return vec![Permutation { ranks: Vec::new() }];
    }
    // order[pos] = candidate; dirs: true = pointing left.
    let mut order: Vec<usize> = (0..n).collect();
    let mut left = vec![true; n];
    let mut out = vec![Permutation::from_order(&order).unwrap()];
    loop {
        let mut mobile: Option<usize> = None;
        for pos in 0..n {
            let target = if left[pos] { pos.checked_sub(1) } else { Some(pos + 1) };
            if let Some(t) = target.filter(|&t| t < n) {
                if order[pos] > order[t] && mobile.map_or(true, |m| order[pos] > order[m]) {
                    mobile = Some(pos);
                }
            }
        }
        let Some(pos) = mobile else { break };
        let value = order[pos];
        let t = if left[pos] { pos - 1 } else { pos + 1 };
        order.swap(pos, t);
        left.swap(pos, t);
        for p in 0..n {
            if order[p] > value {
                left[p] = !left[p];
            }
        }
        out.push(Permutation::from_order(&order).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_string_round_trip() {
        let p: Permutation = "24153".parse().unwrap();
        // candidate 2 at position 1, candidate 4 at 2, 1 at 3, 5 at 4, 3 at 5
        assert_eq!(p.ranks(), &[2, 0, 4, 1, 3]);
        assert_eq!(p.to_string(), "24153");
        assert_eq!(p.item_at(0), 1);
    }

    #[test]
    fn comma_strings_for_large_n() {
        let order: Vec<usize> = (0..11).rev().collect();
        let p = Permutation::from_order(&order).unwrap();
        let s = p.to_position_string();
        assert_eq!(s, "11,10,9,8,7,6,5,4,3,2,1");
        assert_eq!(Permutation::parse_position_string(&s).unwrap(), p);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_ranks(vec![0, 0]).is_err());
        assert!(Permutation::from_ranks(vec![0, 2]).is_err());
        assert!("1224".parse::<Permutation>().is_err());
        assert!("102".parse::<Permutation>().is_err());
        assert!("".parse::<Permutation>().is_err());
        assert!(Permutation::from_one_based_ranks(&[0, 1]).is_err());
    }

    #[test]
    fn one_based_ranks() {
        let p = Permutation::from_one_based_ranks(&[2, 3, 1]).unwrap();
        assert_eq!(p.ranks(), &[1, 2, 0]);
        assert_eq!(p.to_string(), "312");
    }

    #[test]
    fn enumeration_is_complete_and_sorted() {
        let all = all_permutations(4);
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all_permutations(1).len(), 1);
        assert_eq!(factorial(5), Some(120));
        assert_eq!(factorial(21), None);
    }

    #[test]
    fn sjt_adjacent_swaps() {
        for n in 1..=6 {
            let seq = sjt_order(n);
            assert_eq!(seq.len() as u64, factorial(n).unwrap());
            let mut sorted = seq.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), seq.len());
            for w in seq.windows(2) {
                let (a, b) = (w[0].order(), w[1].order());
                let diff: Vec<usize> = (0..n).filter(|&i| a[i] != b[i]).collect();
                assert_eq!(diff.len(), 2);
                assert_eq!(diff[1], diff[0] + 1);
            }
        }
        let strings: Vec<String> = sjt_order(3).iter().map(|p| p.to_string()).collect();
        assert_eq!(strings, ["123", "132", "312", "321", "231", "213"]);
    }
}
