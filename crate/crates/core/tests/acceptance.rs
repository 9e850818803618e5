//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use expdet::doptimal::{expected_doptimality, select_sensors, SelectOptions};
use expdet::ensemble::{
    block_expected_det_bruteforce, block_lower_bound, expected_det_bruteforce,
    expected_det_cauchy_binet, expected_det_closed_form, expected_det_monte_carlo, RankOneEnsemble,
    DEFAULT_MAX_TERMS,
};
use expdet::graphs::{
    block_expected_tree_count, enumerate_spanning_trees, expected_tree_count,
    expected_tree_count_bruteforce, tree_weight_sum, weighted_tree_count, BlockCaps, BlockMethod,
    Edge, WeightedGraph, DEFAULT_MAX_EDGES,
};
use expdet::instances::{self, instance_seed};
use expdet::verify::{
    best_boolean_log_det, duplicated_axes_model, gradient_fd_deviation, rel_dev,
    search_lower_bound_violations,
};

const BASE_SEED: u64 = 20_161_024;

fn report(id: u32, title: &str, ok: bool, detail: String) {
    println!(
        "[{}] criterion {id}: {title} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The 200 ensembles shared by criteria 1 and 2: n in 1..=4, m in n..=10.
fn ensembles() -> Vec<RankOneEnsemble> {
    (0..200)
        .map(|i| {
            let mut r = rng(instance_seed(BASE_SEED, i));
            let n = r.random_range(1..=4);
            let m = r.random_range(n..=10);
            instances::rank_one_ensemble(&mut r, n, m)
        })
        .collect()
}

fn graphs() -> Vec<WeightedGraph> {
    (0..100)
        .map(|i| instances::connected_graph(&mut rng(instance_seed(BASE_SEED ^ 0x3, i)), 6, 12))
        .collect()
}

fn k3(prob: f64) -> WeightedGraph {
    WeightedGraph::new(
        3,
        vec![
            Edge::new(0, 1, 1.0, prob),
            Edge::new(1, 2, 1.0, prob),
            Edge::new(0, 2, 1.0, prob),
        ],
    )
    .unwrap()
}

#[test]
fn criterion_1_closed_form_matches_outcome_enumeration() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for e in ensembles() {
        let bf = expected_det_bruteforce(&e, DEFAULT_MAX_TERMS).unwrap();
        let dev = (expected_det_closed_form(&e) - bf).abs();
        let bound = 1e-9 * bf.abs().max(1.0);
        all_ok &= dev <= bound;
        worst = worst.max(dev / bf.abs().max(1.0));
    }
    let elapsed = start.elapsed();
    report(
        1,
        "closed form vs 2^m enumeration on 200 ensembles",
        all_ok && elapsed < Duration::from_secs(10),
        format!("max scaled deviation {worst:e} <= 1e-9, runtime {elapsed:?} < 10s"),
    );
}

#[test]
fn criterion_2_subset_expansion_matches_closed_form() {
    let mut worst: f64 = 0.0;
    for e in ensembles() {
        let cb = expected_det_cauchy_binet(&e).unwrap();
        worst = worst.max(rel_dev(cb, expected_det_closed_form(&e)));
    }
    report(
        2,
        "n-subset expansion vs closed form on 200 ensembles",
        worst <= 1e-9,
        format!("max relative deviation {worst:e} <= 1e-9"),
    );
}

#[test]
fn criterion_3_matrix_tree_cross_check() {
    let mut worst: f64 = 0.0;
    for g in graphs() {
        assert!(g.vertex_count() <= 6 && g.edge_count() <= 12);
        let trees = enumerate_spanning_trees(&g, DEFAULT_MAX_EDGES).unwrap();
        worst = worst.max(rel_dev(
            weighted_tree_count(&g),
            tree_weight_sum(&g, &trees),
        ));
    }
    let k3_dev = (weighted_tree_count(&k3(1.0)) - 3.0).abs();
    report(
        3,
        "determinant tree count vs tree enumeration on 100 graphs",
        worst <= 1e-9 && k3_dev <= 1e-12,
        format!("max relative deviation {worst:e} <= 1e-9, K3 deviation {k3_dev:e} <= 1e-12"),
    );
}

#[test]
fn criterion_4_expected_tree_count_matches_state_enumeration() {
    let mut worst: f64 = 0.0;
    for g in graphs() {
        let bf = expected_tree_count_bruteforce(&g, DEFAULT_MAX_EDGES).unwrap();
        worst = worst.max(rel_dev(expected_tree_count(&g), bf));
    }
    let k3_dev = (expected_tree_count(&k3(0.5)) - 0.75).abs();
    report(
        4,
        "reweighted tree count vs 2^m edge states on 100 graphs",
        worst <= 1e-9 && k3_dev <= 1e-12,
        format!("max relative deviation {worst:e} <= 1e-9, K3 p=1/2 deviation {k3_dev:e} <= 1e-12"),
    );
}

#[test]
fn criterion_5_symmetric_lower_bound() {
    let mut worst = f64::NEG_INFINITY;
    let mut all_ok = true;
    for i in 0..200 {
        let b =
            instances::block_ensemble(&mut rng(instance_seed(BASE_SEED ^ 0x5, i)), 4, 6, 3, true);
        assert!(b.n() <= 4 && b.k() <= 6 && b.blocks().iter().all(|(u, _)| u.cols() <= 3));
        let excess =
            block_lower_bound(&b) - block_expected_det_bruteforce(&b, DEFAULT_MAX_TERMS).unwrap();
        all_ok &= excess <= 1e-10;
        worst = worst.max(excess);
    }
    let search = search_lower_bound_violations(BASE_SEED, 200);
    println!(
        "  general-case search (logged only): {} of {} instances exceed the bound, max excess {:e}",
        search.violations.len(),
        search.trials,
        search.max_excess
    );
    report(
        5,
        "det(sum p_i U_i U_iᵀ) <= exact expectation on 200 symmetric block ensembles",
        all_ok,
        format!("max bound - expectation {worst:e} <= 1e-10"),
    );
}

#[test]
fn criterion_6_block_methods_agree() {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let g = instances::block_graph(&mut rng(instance_seed(BASE_SEED ^ 0x6, i)), 5, 10, 5);
        assert!(g.vertex_count() <= 5 && g.edge_count() <= 10 && g.block_count().unwrap() <= 5);
        let closed =
            block_expected_tree_count(&g, BlockMethod::Closed, BlockCaps::default()).unwrap();
        let brute =
            block_expected_tree_count(&g, BlockMethod::BruteForce, BlockCaps::default()).unwrap();
        worst = worst.max(rel_dev(closed, brute));
    }
    let g = k3(0.5).with_blocks(&[0, 0, 1]).unwrap();
    let worked = [BlockMethod::Closed, BlockMethod::BruteForce]
        .map(|m| block_expected_tree_count(&g, m, BlockCaps::default()).unwrap());
    let worked_dev = worked.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    report(
        6,
        "tree-sum and block-state methods on 50 block graphs",
        worst <= 1e-9 && worked_dev <= 1e-12,
        format!("max relative deviation {worst:e} <= 1e-9, K3 block example deviation {worked_dev:e} <= 1e-12"),
    );
}

#[test]
fn criterion_7_sensor_selection() {
    let opts = SelectOptions::default();
    let axes = duplicated_axes_model();
    let res = select_sensors(&axes, 2, opts).unwrap();
    let axes_det = expected_doptimality(&axes, &res.probs).unwrap();
    let mut monotone = res.objective_trace.windows(2).all(|w| w[1].1 >= w[0].1);

    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_grad: f64 = 0.0;
    let mut feasible = true;
    for i in 0..20 {
        let mut r = rng(instance_seed(BASE_SEED ^ 0x7, i));
        let n = r.random_range(1..=3);
        let m = r.random_range(n + 1..=8);
        let k = r.random_range(n..=m);
        let model = instances::sensor_model(&mut r, m, n);
        let res = select_sensors(&model, k, opts).unwrap();
        monotone &= res.objective_trace.windows(2).all(|w| w[1].1 >= w[0].1);
        feasible &= (res.probs.iter().sum::<f64>() - k as f64).abs() <= 1e-8
            && res.probs.iter().all(|p| (0.0..=1.0).contains(p))
            && res.selected.len() == k;
        worst_gap = worst_gap.max(best_boolean_log_det(&model, k) - res.objective());
        let interior: Vec<f64> = (0..m).map(|_| r.random_range(0.2..0.9)).collect();
        worst_grad = worst_grad.max(gradient_fd_deviation(&model, &interior, 1e-6));
    }
    report(
        7,
        "relaxed D-optimal selection",
        axes_det >= 1.0 - 1e-6 && monotone && feasible && worst_gap <= 1e-9 && worst_grad <= 1e-5,
        format!(
            "axes det {axes_det} >= 1-1e-6, traces non-decreasing {monotone}, feasible {feasible}, \
             max boolean - relaxed {worst_gap:e} <= 1e-9, max gradient deviation {worst_grad:e} <= 1e-5"
        ),
    );
}

fn strip_timing(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("elapsed_ms="))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = expdet::cli::run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn criterion_8_determinism() {
    let (code_a, a) = run_cli(&["expdet", "verify", "--seed", "42"]);
    let (code_b, b) = run_cli(&["expdet", "verify", "--seed", "42"]);
    let reports_equal = strip_timing(&a) == strip_timing(&b);

    let e = ensembles().swap_remove(7);
    let x = expected_det_monte_carlo(&e, 20_000, 42).unwrap();
    let y = expected_det_monte_carlo(&e, 20_000, 42).unwrap();
    let mc_equal =
        x.mean.to_bits() == y.mean.to_bits() && x.std_error.to_bits() == y.std_error.to_bits();
    report(
        8,
        "verify --seed 42 twice and fixed-seed Monte Carlo",
        code_a == 0 && code_b == 0 && reports_equal && mc_equal,
        format!("exit codes {code_a}/{code_b}, reports identical {reports_equal}, Monte Carlo bit-identical {mc_equal}"),
    );
}
