//! Bipartite matching on `n × n` grids: perfect-matching tests, Hall
//! witnesses, max-bottleneck matchings and maximum-weight assignments.
//!
//! All matchings are returned as `cols[row]`. Whenever several matchings are
//! optimal the lexicographically smallest `cols` vector is returned.

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Kuhn's augmenting-path matching restricted to `rows` and the columns with
/// `col_free[j]`. Returns `row_of[col]` for the matched columns.
fn max_matching(
    n: usize,
    rows: &[usize],
    col_free: &[bool],
    edge: &impl Fn(usize, usize) -> bool,
) -> (usize, Vec<Option<usize>>) {
    fn augment(
        i: usize,
        n: usize,
        col_free: &[bool],
        edge: &impl Fn(usize, usize) -> bool,
        seen: &mut [bool],
        row_of: &mut [Option<usize>],
    ) -> bool {
        for j in 0..n {
            if !col_free[j] || seen[j] || !edge(i, j) {
                continue;
            }
            seen[j] = true;
            let free = match row_of[j] {
                None => true,
                Some(k) => augment(k, n, col_free, edge, seen, row_of),
            };
            if free {
                row_of[j] = Some(i);
                return true;
            }
        }
        false
    }

    let mut row_of = vec![None; n];
    let mut size = 0;
    let mut seen = vec![false; n];
    for &i in rows {
        seen.iter_mut().for_each(|s| *s = false);
        if augment(i, n, col_free, edge, &mut seen, &mut row_of) {
            size += 1;
        }
    }
    (size, row_of)
}

pub fn has_perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let rows: Vec<usize> = (0..n).collect();
    max_matching(n, &rows, &vec![true; n], &edge).0 == n
}

/// Lexicographically smallest perfect matching of the graph, if any.
pub fn lex_smallest_perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    if !has_perfect_matching(n, &edge) {
        return None;
    }
    let mut cols = Vec::with_capacity(n);
    let mut col_free = vec![true; n];
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let chosen = (0..n).find(|&j| {
            if !col_free[j] || !edge(i, j) {
                return false;
            }
            col_free[j] = false;
            let ok = max_matching(n, &rest, &col_free, &edge).0 == rest.len();
            col_free[j] = true;
            ok
        })?;
        col_free[chosen] = false;
        cols.push(chosen);
    }
    Some(cols)
}

/// A set of rows whose neighbourhood is smaller than itself, when the graph
/// has no perfect matching. Rows are returned sorted, with their neighbours.
pub fn hall_witness(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<(Vec<usize>, Vec<usize>)> {
    let rows: Vec<usize> = (0..n).collect();
    let (size, row_of) = max_matching(n, &rows, &vec![true; n], &edge);
    if size == n {
        return None;
    }
    let mut col_of = vec![None; n];
    for (j, r) in row_of.iter().enumerate() {
        if let Some(i) = r {
            col_of[*i] = Some(j);
        }
    }
    let start = (0..n).find(|&i| col_of[i].is_none()).expect("some row unmatched");
    // Rows reachable from the unmatched row by alternating paths.
    let mut in_rows = vec![false; n];
    let mut in_cols = vec![false; n];
    let mut stack = vec![start];
    in_rows[start] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if edge(i, j) && !in_cols[j] {
                in_cols[j] = true;
                let k = row_of[j].expect("maximum matching: reachable columns are matched");
                if !in_rows[k] {
                    in_rows[k] = true;
                    stack.push(k);
                }
            }
        }
    }
    let pick = |mask: &[bool]| (0..n).filter(|&x| mask[x]).collect::<Vec<_>>();
    Some((pick(&in_rows), pick(&in_cols)))
}

/// Perfect matching on `{v > floor}` maximizing its smallest entry.
///
/// Returns the matching and its bottleneck value; errors with a Hall witness
/// when the support above `floor` admits no perfect matching.
pub fn bottleneck_matching(m: &SquareMatrix, floor: f64) -> Result<(Vec<usize>, f64)> {
    let n = m.n();
    let mut levels: Vec<f64> = m.as_slice().iter().copied().filter(|&v| v > floor).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let feasible = |t: f64| has_perfect_matching(n, |i, j| m.get(i, j) >= t && m.get(i, j) > floor);
    if levels.is_empty() || !feasible(levels[0]) {
        let (rows, cols) = hall_witness(n, |i, j| m.get(i, j) > floor).unwrap_or_default();
        return Err(Error::HallViolation { rows, cols });
    }
    // Largest feasible level: levels[lo] feasible, levels[hi] infeasible (or past end).
    let (mut lo, mut hi) = (0, levels.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let threshold = levels[lo];
    let cols = lex_smallest_perfect_matching(n, |i, j| m.get(i, j) >= threshold)
        .expect("threshold level is feasible");
    let bottleneck = cols.iter().enumerate().map(|(i, &j)| m.get(i, j)).fold(f64::INFINITY, f64::min);
    Ok((cols, bottleneck))
}

/// Result of a maximum-weight assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub cols: Vec<usize>,
    pub value: f64,
}

/// Maximum-weight perfect matching using only `allowed` cells (row-major
/// mask). Returns `None` if the allowed cells admit no perfect matching.
///
/// Solves the dual with the O(n³) Hungarian method, then picks the
/// lexicographically smallest matching among the tight edges, which is
/// exactly the set of optimal assignments.
pub fn max_weight_assignment(w: &SquareMatrix, allowed: &[bool]) -> Option<Assignment> {
    let n = w.n();
    debug_assert_eq!(allowed.len(), n * n);
    if n == 0 {
        return Some(Assignment { cols: Vec::new(), value: 0.0 });
    }
    let ok = |i: usize, j: usize| allowed[i * n + j];
    if !has_perfect_matching(n, ok) {
        return None;
    }
    let cost = |i: usize, j: usize| -w.get(i, j);

    // Potentials are 1-indexed; index 0 is the virtual source column.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                if ok(i0 - 1, j - 1) {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            debug_assert!(delta.is_finite(), "a perfect matching exists");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let scale = w.as_slice().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let eps = 1e-9 * scale;
    let tight = |i: usize, j: usize| ok(i, j) && cost(i, j) - u[i + 1] - v[j + 1] <= eps;
    let cols = lex_smallest_perfect_matching(n, tight).unwrap_or_else(|| {
        let mut cols = vec![0; n];
        for j in 1..=n {
            cols[p[j] - 1] = j - 1;
        }
        cols
    });
    let value = cols.iter().enumerate().map(|(i, &j)| w.get(i, j)).sum();
    Some(Assignment { cols, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::all_permutations;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hall_witness_on_deficient_graph() {
        // Rows 0 and 1 can only use column 0.
        let edges = [[true, false, false], [true, false, false], [true, true, true]];
        let (rows, cols) = hall_witness(3, |i, j| edges[i][j]).unwrap();
        assert!(rows.len() > cols.len());
        assert_eq!(rows, vec![0, 1]);
        assert_eq!(cols, vec![0]);
        assert!(hall_witness(2, |_, _| true).is_none());
    }

    #[test]
    fn lex_smallest_matching() {
        assert_eq!(lex_smallest_perfect_matching(3, |_, _| true), Some(vec![0, 1, 2]));
        // derangements of 3: [1, 2, 0] and [2, 0, 1]
        assert_eq!(lex_smallest_perfect_matching(3, |i, j| i != j), Some(vec![1, 2, 0]));
        assert_eq!(lex_smallest_perfect_matching(2, |i, _| i == 0), None);
    }

    #[test]
    fn bottleneck_prefers_large_entries() {
        let m = SquareMatrix::from_rows(vec![vec![0.1, 0.9], vec![0.9, 0.1]]).unwrap();
        let (cols, b) = bottleneck_matching(&m, 0.0).unwrap();
        assert_eq!(cols, vec![1, 0]);
        assert_eq!(b, 0.9);
    }

    #[test]
    fn max_weight_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let w = SquareMatrix::from_flat(n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let allowed: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(0.8)).collect();
            let best = all_permutations(n)
                .into_iter()
                .filter(|p| p.cells().all(|(i, j)| allowed[i * n + j]))
                .map(|p| p.cells().map(|(i, j)| w.get(i, j)).sum::<f64>())
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            let got = max_weight_assignment(&w, &allowed);
            match (best, got) {
                (None, None) => {}
                (Some(b), Some(a)) => assert!((a.value - b).abs() < 1e-9, "{} vs {b}", a.value),
                (b, a) => panic!("feasibility disagreement: {b:?} vs {a:?}"),
            }
        }
    }

    #[test]
    fn ties_break_lexicographically() {
        let w = SquareMatrix::zeros(3);
        let mut allowed = vec![true; 9];
        allowed[0] = false;
        let a = max_weight_assignment(&w, &allowed).unwrap();
        assert_eq!(a.cols, vec![1, 0, 2]);
        assert_eq!(a.value, 0.0);
    }
}
