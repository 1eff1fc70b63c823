//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Each criterion also has a wall-clock
//! budget; overrunning it counts as a failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparse_choice::aggregation::hare;
use sparse_choice::apa;
use sparse_choice::birkhoff::decompose;
use sparse_choice::generators::{
    condition_check, random_doubly_stochastic, random_sparse_model, ConditionThreshold, DsMethod, Family, MnlParams,
};
use sparse_choice::permutation::all_permutations;
use sparse_choice::recovery::{assignment_oracle, greedy_fit, quantized_vectors, recover, recover_without_signature};
use sparse_choice::signature::check_signature;
use sparse_choice::sparsify::sample_sparsify;
use sparse_choice::{
    distance, marginals, raw_marginals, relative_error, Cell, Norm, Permutation, RelativeErrorMode, SparseChoiceModel,
    SquareMatrix, StochasticMatrix,
};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

/// Largest row or column sum deviation from 1.
fn stochastic_gap(m: &SquareMatrix) -> f64 {
    m.row_sums().into_iter().chain(m.col_sums()).map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
}

fn c1_marginal_operator() -> Check {
    let mut worst_gap: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize % 5);
        let k_max = if n <= 3 { [1, 2, 6][n - 1] } else { 8 };
        let k = 1 + (seed as usize * 7) % k_max;
        let a = random_sparse_model(n, k, seed).unwrap();
        let b = random_sparse_model(n, k_max.min(k + 1), seed + 1000).unwrap();
        worst_gap = worst_gap.max(stochastic_gap(&raw_marginals(&a)));
        let (alpha, beta) = (0.3 + 0.004 * seed as f64, 1.7);
        let lhs = raw_marginals(&a.combine(alpha, &b, beta).unwrap());
        let (ma, mb) = (raw_marginals(&a), raw_marginals(&b));
        for i in 0..n {
            for j in 0..n {
                let rhs = alpha * ma.get(i, j) + beta * mb.get(i, j);
                worst_lin = worst_lin.max((lhs.get(i, j) - rhs).abs());
            }
        }
    }
    check(
        worst_gap <= 1e-12 && worst_lin <= 1e-12,
        format!("max stochastic gap {worst_gap:.2e}, max linearity gap {worst_lin:.2e} (≤ 1e-12)"),
    )
}

fn c2_birkhoff() -> Check {
    let mut worst_err: f64 = 0.0;
    let mut most_terms = 0;
    for seed in 0..100u64 {
        let method = if seed % 2 == 0 { DsMethod::Mixture } else { DsMethod::Balanced };
        let d = random_doubly_stochastic(6, seed, method).unwrap();
        let dec = decompose(&d, 1e-9).unwrap();
        let err = distance(dec.reconstruct(6), &d, Norm::Linf).unwrap();
        worst_err = worst_err.max(err);
        most_terms = most_terms.max(dec.terms.len());
    }
    check(
        worst_err <= 1e-9 && most_terms <= 26,
        format!("max reconstruction l∞ {worst_err:.2e} (≤ 1e-9), max terms {most_terms} (≤ 26)"),
    )
}

fn c3_sampling_bound() -> Check {
    let (n, eps) = (8, 0.4);
    let mut total = 0.0;
    let mut t_ok = true;
    for seed in 0..200u64 {
        let d = random_doubly_stochastic(n, seed, DsMethod::Balanced).unwrap();
        let s = sample_sparsify(&d, eps, seed).unwrap();
        t_ok &= s.samples == 50;
        let e = distance(marginals(&s.model).unwrap(), &d, Norm::L2).unwrap();
        total += e * e;
    }
    let mean = total / 200.0;
    let bound = 1.1 * 8.0 / 50.0;

    // Any model on at most N/4 permutations is far from the uniform matrix.
    let uniform = StochasticMatrix::uniform(n);
    let mut closest = f64::INFINITY;
    for seed in 0..200u64 {
        let k = 1 + (seed as usize % 2);
        let m = random_sparse_model(n, k, seed).unwrap();
        closest = closest.min(distance(marginals(&m).unwrap(), &uniform, Norm::L2).unwrap());
    }
    check(
        t_ok && mean <= bound && closest >= 0.5,
        format!("T = 50: {t_ok}; mean squared l2 {mean:.4} (≤ {bound:.3}); min l2 to uniform at support ≤ 2: {closest:.3} (≥ 0.5)"),
    )
}

fn budget(n: usize, eps: f64) -> usize {
    (64.0 / (eps * eps) * (2.0 * (n * n) as f64).ln()).ceil() as usize
}

/// Random K-sparse models whose support has the signature property.
fn planted(n: usize, k: usize, count: usize, seed0: u64) -> Vec<SparseChoiceModel> {
    (seed0..)
        .map(|s| random_sparse_model(n, k, s).unwrap())
        .filter(|m| check_signature(m).holds)
        .take(count)
        .collect()
}

fn c4_planted_recovery() -> Check {
    let eps = 0.25;
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [4, 5] {
        let mut worst: f64 = 0.0;
        let mut max_support = 0;
        let mut iters_ok = true;
        for m in planted(n, 2, 5, 0) {
            let d = marginals(&m).unwrap();
            let Some(r) = recover(&d, 2, eps).unwrap() else {
                pass = false;
                lines.push(format!("N={n}: no result"));
                continue;
            };
            // recomputed from the returned model, not taken from the result
            let err = distance(marginals(&r.model).unwrap(), &d, Norm::Linf).unwrap();
            worst = worst.max(err);
            max_support = max_support.max(r.model.support_size());
            iters_ok &= r.iterations == budget(n, eps);
        }
        let t = budget(n, eps);
        pass &= worst <= 2.0 * eps && max_support <= 2 * t && iters_ok;
        lines.push(format!("N={n}: max l∞ {worst:.4} (≤ 0.5), max support {max_support} (≤ {}), T = {t}: {iters_ok}", 2 * t));
    }
    check(pass, lines.join("; "))
}

fn brute_force(w: &SquareMatrix, fixed: Option<Cell>, forbidden: &[Cell]) -> Option<(Vec<Permutation>, f64)> {
    let mut best: Option<(Vec<Permutation>, f64)> = None;
    for p in all_permutations(w.n()) {
        if fixed.is_some_and(|f| p.rank_of(f.row) != f.col) || forbidden.iter().any(|c| p.rank_of(c.row) == c.col) {
            continue;
        }
        let v: f64 = (0..w.n()).map(|i| w.get(i, p.rank_of(i))).sum();
        match &mut best {
            Some((args, bv)) if v == *bv => args.push(p),
            Some((_, bv)) if v < *bv => {}
            _ => best = Some((vec![p], v)),
        }
    }
    best
}

fn c5_oracle_equivalence() -> Check {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut infeasible = 0;
    for t in 0..1000 {
        // every other instance uses small integers so that ties are common
        let data: Vec<f64> = (0..n * n)
            .map(|_| if t % 2 == 0 { rng.gen_range(-1.0..1.0) } else { rng.gen_range(-2..=2) as f64 })
            .collect();
        let w = SquareMatrix::from_flat(n, data).unwrap();
        let fixed = rng.gen_bool(0.7).then(|| Cell::new(rng.gen_range(0..n), rng.gen_range(0..n)));
        let mut forbidden = Vec::new();
        for _ in 0..rng.gen_range(0..=4) {
            let c = Cell::new(rng.gen_range(0..n), rng.gen_range(0..n));
            if Some(c) != fixed && !forbidden.contains(&c) {
                forbidden.push(c);
            }
        }
        let got = assignment_oracle(&w, fixed, &forbidden).unwrap();
        let want = brute_force(&w, fixed, &forbidden);
        let ok = match (&got, &want) {
            (None, None) => {
                infeasible += 1;
                true
            }
            (Some((p, v)), Some((args, bv))) => v == bv && args.contains(p) && args.iter().min() == Some(p),
            _ => false,
        };
        mismatches += usize::from(!ok);
    }
    check(mismatches == 0, format!("{mismatches} mismatches in 1000 instances ({infeasible} infeasible)"))
}

/// min over w ∈ [0, 1] of ‖w·P + (1 − w)·Q − d‖∞ by golden-section search.
fn best_pair_error(p: &Permutation, q: &Permutation, d: &StochasticMatrix) -> f64 {
    let n = d.n();
    let err = |w: f64| {
        let mut m = SquareMatrix::zeros(n);
        for (i, j) in p.cells() {
            m.add(i, j, w);
        }
        for (i, j) in q.cells() {
            m.add(i, j, 1.0 - w);
        }
        distance(&m, d, Norm::Linf).unwrap()
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..100 {
        let (x, y) = (b - g * (b - a), a + g * (b - a));
        if err(x) <= err(y) {
            b = y;
        } else {
            a = x;
        }
    }
    err((a + b) / 2.0).min(err(0.0)).min(err(1.0))
}

fn c6_brute_force_parity() -> Check {
    let eps = 0.25;
    let perms = all_permutations(4);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut failures = 0;
    for m in planted(4, 2, 10, 100) {
        let d = marginals(&m).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..perms.len() {
            for j in i + 1..perms.len() {
                best = best.min(best_pair_error(&perms[i], &perms[j], &d));
            }
        }
        match recover(&d, 2, eps).unwrap() {
            Some(r) => {
                let achieved = distance(marginals(&r.model).unwrap(), &d, Norm::Linf).unwrap();
                worst_gap = worst_gap.max(achieved - best);
            }
            None => failures += 1,
        }
    }
    check(
        failures == 0 && worst_gap <= 2.0 * eps,
        format!("max (achieved − exhaustive best) {worst_gap:.4} (≤ 0.5), {failures} runs without result"),
    )
}

fn c7_apa() -> Check {
    let model = apa::published_model();
    let table = apa::table();
    let m = marginals(&model).unwrap();
    let err = relative_error(&m, &table, RelativeErrorMode::Mean).unwrap();
    let transposed = relative_error(m.as_matrix().transpose(), &table, RelativeErrorMode::Mean).unwrap();
    let trace = hare(&model).unwrap();
    let ranking = trace.ranking.to_string();
    check(
        err <= 0.10 && trace.winner == 1 && ranking == "13245",
        format!(
            "(a) mean relative error {err:.4} (≤ 0.10) [transposed reading: {transposed:.4}]; (b) winner {}, ranking {ranking}",
            trace.winner
        ),
    )
}

fn c8_greedy() -> Check {
    let table = apa::table();
    let fit = greedy_fit(&table, 1e-6).unwrap();
    let err = relative_error(marginals(&fit.model).unwrap(), &table, RelativeErrorMode::Mean).unwrap();
    let support = fit.model.support_size();

    let mut worst_l2: f64 = 0.0;
    let mut worst_support = 0;
    for m in planted(5, 3, 5, 0) {
        let d = marginals(&m).unwrap();
        let g = greedy_fit(&d, 1e-6).unwrap();
        worst_l2 = worst_l2.max(distance(marginals(&g.model).unwrap(), &d, Norm::L2).unwrap());
        worst_support = worst_support.max(g.model.support_size());
    }
    check(
        support <= 26 && err <= 0.15 && worst_l2 <= 1e-6 && worst_support <= 17,
        format!(
            "table: support {support} (≤ 26), mean relative error {err:.2e} (≤ 0.15); planted K=3, N=5: max l2 {worst_l2:.2e} (≤ 1e-6), max support {worst_support} (≤ 17)"
        ),
    )
}

fn c9_signature_density() -> Check {
    let hits = (0..100u64).filter(|&s| check_signature(&random_sparse_model(20, 10, s).unwrap()).holds).count();
    let equal = condition_check(&Family::Mnl(MnlParams::equal(100)), 0.5, ConditionThreshold::SqrtLog).unwrap();
    let mut w = vec![1.0; 100];
    w[99] = 1e4;
    let dominant =
        condition_check(&Family::Mnl(MnlParams::new(w).unwrap()), 0.5, ConditionThreshold::SqrtLog).unwrap();
    check(
        hits >= 95 && equal.holds && !dominant.holds,
        format!(
            "signature holds in {hits}/100 (≥ 95); equal MNL ratio {:.4} ≤ {:.4}: {}; dominant MNL ratio {:.1}: {}",
            equal.ratio, equal.bound, equal.holds, dominant.ratio, dominant.holds
        ),
    )
}

fn c10_without_signature() -> Check {
    let (k, eps) = (2, 0.25);
    let cycle = Permutation::from_one_based_ranks(&[2, 3, 1]).unwrap();
    let m = SparseChoiceModel::new(3, [(Permutation::identity(3), 0.6), (cycle, 0.4)]).unwrap();
    let d = marginals(&m).unwrap();
    let grid = quantized_vectors(k, eps).unwrap().len();
    let cap = ((k as f64 / eps).ceil() + 1.0).powi(k as i32) as usize;
    match recover_without_signature(&d, k, eps).unwrap() {
        Some(r) => {
            let err = distance(marginals(&r.model).unwrap(), &d, Norm::Linf).unwrap();
            check(
                err <= 0.5 && r.candidates_examined <= cap && grid <= cap,
                format!("l∞ {err:.4} (≤ 0.5), vectors tried {} of {grid} (≤ {cap})", r.candidates_examined),
            )
        }
        None => check(false, format!("no result over {grid} vectors")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, u64); 10] = [
        ("marginal operator", c1_marginal_operator, 5),
        ("Birkhoff decomposition", c2_birkhoff, 10),
        ("sampling sparsifier bound", c3_sampling_bound, 30),
        ("planted signature recovery", c4_planted_recovery, 120),
        ("assignment oracle equivalence", c5_oracle_equivalence, 10),
        ("brute-force recovery parity", c6_brute_force_parity, 300),
        ("APA reproduction", c7_apa, 1),
        ("greedy heuristic quality", c8_greedy, 5),
        ("signature density and condition checks", c9_signature_density, 10),
        ("recovery without signature", c10_without_signature, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, secs)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(secs);
        let pass = c.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "[{}] {:>2}. {name}: {} [{:.2?} of {secs}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            c.detail,
            elapsed
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
