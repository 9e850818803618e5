//! Seeded cross-check battery: every closed form against its enumeration oracle.
//!
//! Each instance draws from its own ChaCha8 stream seeded by
//! [`instance_seed`]`(base, index)`, so a failing instance can be replayed
//! from the seed the report names.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::doptimal::{
    expected_doptimality, log_det_gradient, log_det_objective, select_sensors, LinearSensorModel,
    SelectOptions,
};
use crate::ensemble::{
    block_expected_det_bruteforce, block_lower_bound, expected_det_bruteforce,
    expected_det_cauchy_binet, expected_det_closed_form, expected_det_monte_carlo, RankOneEnsemble,
    DEFAULT_MAX_TERMS,
};
use crate::graphs::{
    block_expected_tree_count, enumerate_spanning_trees, expected_tree_count,
    expected_tree_count_bruteforce, tree_weight_sum, weighted_tree_count, BlockCaps, BlockMethod,
    Edge, WeightedGraph, DEFAULT_MAX_EDGES,
};
use crate::instances::{self, instance_seed};
use crate::linalg::Matrix;
use crate::report::Check;
use crate::subsets::ColexSubsets;

/// Instance counts of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Size {
    Small,
    Medium,
}

#[derive(Debug, Clone, Copy)]
struct Counts {
    ensembles: usize,
    graphs: usize,
    block_ensembles: usize,
    general_search: usize,
    block_graphs: usize,
    models: usize,
}

impl Size {
    fn counts(self) -> Counts {
        match self {
            Size::Small => Counts {
                ensembles: 40,
                graphs: 25,
                block_ensembles: 40,
                general_search: 40,
                block_graphs: 15,
                models: 6,
            },
            Size::Medium => Counts {
                ensembles: 200,
                graphs: 100,
                block_ensembles: 200,
                general_search: 200,
                block_graphs: 50,
                models: 20,
            },
        }
    }
}

/// Implementations under test. Swapping one out lets a harness confirm the
/// battery catches a broken routine.
#[derive(Clone, Copy)]
pub struct Implementations {
    pub closed_form: fn(&RankOneEnsemble) -> f64,
    pub tree_count: fn(&WeightedGraph) -> f64,
    pub expected_tree_count: fn(&WeightedGraph) -> f64,
}

impl Default for Implementations {
    fn default() -> Self {
        Implementations {
            closed_form: expected_det_closed_form,
            tree_count: weighted_tree_count,
            expected_tree_count,
        }
    }
}

/// Tolerances pinned for every check.
pub mod tol {
    pub const CLOSED_FORM: f64 = 1e-9;
    pub const CAUCHY_BINET: f64 = 1e-9;
    pub const MATRIX_TREE: f64 = 1e-9;
    pub const K3_EXACT: f64 = 1e-12;
    pub const EXPECTED_TREES: f64 = 1e-9;
    pub const LOWER_BOUND: f64 = 1e-10;
    pub const BLOCK_METHODS: f64 = 1e-9;
    pub const SOLVER_DET: f64 = 1e-6;
    pub const DOMINANCE: f64 = 1e-9;
    pub const GRADIENT: f64 = 1e-5;
    pub const GRADIENT_STEP: f64 = 1e-6;
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Accumulates per-instance deviations into a [`Check`].
struct Tally {
    check: Check,
}

impl Tally {
    fn new(name: &str, tolerance: f64) -> Self {
        Tally {
            check: Check {
                name: name.to_string(),
                pass: true,
                max_deviation: 0.0,
                tolerance,
                instances: 0,
                failing_seed: None,
                note: None,
            },
        }
    }

    /// Records a deviation; the instance fails when it exceeds the tolerance
    /// or is not a number.
    fn record(&mut self, seed: u64, deviation: f64) {
        self.record_outcome(seed, deviation, deviation <= self.check.tolerance);
    }

    fn record_outcome(&mut self, seed: u64, deviation: f64, ok: bool) {
        let c = &mut self.check;
        c.instances += 1;
        if deviation.is_finite() {
            c.max_deviation = c.max_deviation.max(deviation);
        }
        if !ok || !deviation.is_finite() {
            c.pass = false;
            c.failing_seed.get_or_insert(seed);
        }
    }

    fn fail(&mut self, seed: u64, note: String) {
        self.check.instances += 1;
        self.check.pass = false;
        self.check.failing_seed.get_or_insert(seed);
        self.check.note.get_or_insert(note);
    }

    fn finish(self) -> Check {
        self.check
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_ensemble(seed: u64) -> RankOneEnsemble {
    use rand::Rng;
    let mut rng = rng_for(seed);
    let n = rng.random_range(1..=4);
    let m = rng.random_range(n..=10);
    instances::rank_one_ensemble(&mut rng, n, m)
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
    .expect("valid")
}

/// Runs the battery with the library's own implementations.
pub fn run_battery(size: Size, seed: u64) -> Vec<Check> {
    run_battery_with(size, seed, &Implementations::default())
}

pub fn run_battery_with(size: Size, seed: u64, imp: &Implementations) -> Vec<Check> {
    let counts = size.counts();
    let mut checks = Vec::new();
    checks.extend(rank_one_checks(seed, counts.ensembles, imp));
    checks.extend(graph_checks(seed, counts.graphs, imp));
    checks.extend(lower_bound_checks(
        seed,
        counts.block_ensembles,
        counts.general_search,
    ));
    checks.extend(block_graph_checks(seed, counts.block_graphs));
    checks.extend(solver_checks(seed, counts.models));
    checks
}

fn rank_one_checks(base: u64, count: usize, imp: &Implementations) -> Vec<Check> {
    let mut closed_form = Tally::new("closed_form_equivalence", tol::CLOSED_FORM);
    let mut cauchy = Tally::new("cauchy_binet_equivalence", tol::CAUCHY_BINET);
    for i in 0..count {
        let seed = instance_seed(base, i as u64);
        let e = random_ensemble(seed);
        let closed = (imp.closed_form)(&e);
        match expected_det_bruteforce(&e, DEFAULT_MAX_TERMS) {
            Ok(bf) => closed_form.record(seed, (closed - bf).abs() / bf.abs().max(1.0)),
            Err(err) => closed_form.fail(seed, err.to_string()),
        }
        match expected_det_cauchy_binet(&e) {
            Ok(cb) => cauchy.record(seed, rel_dev(cb, closed)),
            Err(err) => cauchy.fail(seed, err.to_string()),
        }
    }

    let mut mc = Tally::new("monte_carlo_determinism", 0.0);
    let seed = instance_seed(base, u64::MAX);
    let e = random_ensemble(seed);
    match (
        expected_det_monte_carlo(&e, 2000, seed),
        expected_det_monte_carlo(&e, 2000, seed),
    ) {
        (Ok(a), Ok(b)) => {
            let same = a.mean.to_bits() == b.mean.to_bits()
                && a.std_error.to_bits() == b.std_error.to_bits();
            mc.record_outcome(seed, (a.mean - b.mean).abs(), same);
        }
        (Err(err), _) | (_, Err(err)) => mc.fail(seed, err.to_string()),
    }
    vec![closed_form.finish(), cauchy.finish(), mc.finish()]
}

fn graph_checks(base: u64, count: usize, imp: &Implementations) -> Vec<Check> {
    let mut matrix_tree = Tally::new("matrix_tree", tol::MATRIX_TREE);
    let mut expected = Tally::new("expected_tree_count", tol::EXPECTED_TREES);
    for i in 0..count {
        let seed = instance_seed(base ^ 0x7472_6565, i as u64);
        let g = instances::connected_graph(&mut rng_for(seed), 6, 12);
        match enumerate_spanning_trees(&g, DEFAULT_MAX_EDGES) {
            Ok(trees) => matrix_tree.record(
                seed,
                rel_dev((imp.tree_count)(&g), tree_weight_sum(&g, &trees)),
            ),
            Err(err) => matrix_tree.fail(seed, err.to_string()),
        }
        match expected_tree_count_bruteforce(&g, DEFAULT_MAX_EDGES) {
            Ok(bf) => expected.record(seed, rel_dev((imp.expected_tree_count)(&g), bf)),
            Err(err) => expected.fail(seed, err.to_string()),
        }
    }
    let mut k3_count = Tally::new("k3_tree_count", tol::K3_EXACT);
    k3_count.record(0, ((imp.tree_count)(&k3(1.0)) - 3.0).abs());
    let mut k3_expected = Tally::new("k3_expected_tree_count", tol::K3_EXACT);
    k3_expected.record(0, ((imp.expected_tree_count)(&k3(0.5)) - 0.75).abs());
    vec![
        matrix_tree.finish(),
        k3_count.finish(),
        expected.finish(),
        k3_expected.finish(),
    ]
}

/// Outcome of the randomized search for lower-bound violations on
/// non-symmetric block ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundSearch {
    pub trials: usize,
    /// Seeds of instances where `det(sum p_i U_i V_iᵀ)` exceeded the expectation.
    pub violations: Vec<u64>,
    /// Largest `bound - expectation` seen.
    pub max_excess: f64,
}

/// Draws general (`V_i != U_i`) block ensembles and records where the
/// `det(sum p_i U_i V_iᵀ)` bound exceeds the exact expectation.
pub fn search_lower_bound_violations(base: u64, trials: usize) -> LowerBoundSearch {
    let mut out = LowerBoundSearch {
        trials,
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
    };
    for i in 0..trials {
        let seed = instance_seed(base ^ 0x6765_6e65, i as u64);
        let b = instances::block_ensemble(&mut rng_for(seed), 4, 6, 3, false);
        let exact = block_expected_det_bruteforce(&b, DEFAULT_MAX_TERMS).expect("k <= 6");
        let excess = block_lower_bound(&b) - exact;
        out.max_excess = out.max_excess.max(excess);
        if excess > tol::LOWER_BOUND {
            out.violations.push(seed);
        }
    }
    out
}

fn lower_bound_checks(base: u64, count: usize, search_trials: usize) -> Vec<Check> {
    let mut sym = Tally::new("symmetric_lower_bound", tol::LOWER_BOUND);
    for i in 0..count {
        let seed = instance_seed(base ^ 0x6c65_6d31, i as u64);
        let b = instances::block_ensemble(&mut rng_for(seed), 4, 6, 3, true);
        match block_expected_det_bruteforce(&b, DEFAULT_MAX_TERMS) {
            Ok(exact) => sym.record(seed, (block_lower_bound(&b) - exact).max(0.0)),
            Err(err) => sym.fail(seed, err.to_string()),
        }
    }
    // reported, never failed
    let search = search_lower_bound_violations(base, search_trials);
    let general = Check {
        name: "general_lower_bound_search".into(),
        pass: true,
        max_deviation: search.max_excess.max(0.0),
        tolerance: tol::LOWER_BOUND,
        instances: search.trials,
        failing_seed: None,
        note: Some(format!(
            "violations={} first_violation_seed={}",
            search.violations.len(),
            search
                .violations
                .first()
                .map_or_else(|| "none".to_string(), |s| s.to_string())
        )),
    };
    vec![sym.finish(), general]
}

fn block_graph_checks(base: u64, count: usize) -> Vec<Check> {
    let mut agree = Tally::new("block_method_agreement", tol::BLOCK_METHODS);
    for i in 0..count {
        let seed = instance_seed(base ^ 0x6c65_6d32, i as u64);
        let g = instances::block_graph(&mut rng_for(seed), 5, 10, 5);
        let closed = block_expected_tree_count(&g, BlockMethod::Closed, BlockCaps::default());
        let brute = block_expected_tree_count(&g, BlockMethod::BruteForce, BlockCaps::default());
        match (closed, brute) {
            (Ok(c), Ok(b)) => agree.record(seed, rel_dev(c, b)),
            (Err(err), _) | (_, Err(err)) => agree.fail(seed, err.to_string()),
        }
    }
    let mut worked = Tally::new("block_k3_example", tol::K3_EXACT);
    let g = k3(0.5).with_blocks(&[0, 0, 1]).expect("valid");
    for method in [BlockMethod::Closed, BlockMethod::BruteForce] {
        match block_expected_tree_count(&g, method, BlockCaps::default()) {
            Ok(v) => worked.record(0, (v - 1.0).abs()),
            Err(err) => worked.fail(0, err.to_string()),
        }
    }
    vec![agree.finish(), worked.finish()]
}

/// Duplicated-axes model: rows `e1, e1, e2, e2` of the identity in `R^2`.
pub fn duplicated_axes_model() -> LinearSensorModel {
    let h = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]).expect("valid");
    LinearSensorModel::isotropic(h).expect("valid")
}

/// Best `log det` over all Boolean selections of exactly `k` sensors.
pub fn best_boolean_log_det(model: &LinearSensorModel, k: usize) -> f64 {
    let m = model.sensors();
    ColexSubsets::new(m, k)
        .map(|subset| {
            let mut p = vec![0.0; m];
            subset.iter().for_each(|&i| p[i] = 1.0);
            log_det_objective(model, &p).expect("length m")
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest relative gap between the analytic gradient and central differences.
pub fn gradient_fd_deviation(model: &LinearSensorModel, p: &[f64], h: f64) -> f64 {
    let g = log_det_gradient(model, p).expect("interior point");
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let fd = (log_det_objective(model, &plus).expect("len")
            - log_det_objective(model, &minus).expect("len"))
            / (2.0 * h);
        worst = worst.max(rel_dev(fd, g[i]));
    }
    worst
}

fn solver_checks(base: u64, count: usize) -> Vec<Check> {
    use rand::Rng;
    let opts = SelectOptions::default();

    let mut axes = Tally::new("solver_duplicated_axes", tol::SOLVER_DET);
    let model = duplicated_axes_model();
    match select_sensors(&model, 2, opts) {
        Ok(res) => {
            let det = expected_doptimality(&model, &res.probs).unwrap_or(f64::NAN);
            axes.record(0, (1.0 - det).max(0.0));
        }
        Err(err) => axes.fail(0, err.to_string()),
    }

    let mut ascent = Tally::new("solver_ascent_and_feasibility", 1e-8);
    let mut dominance = Tally::new("relaxation_dominance", tol::DOMINANCE);
    let mut gradient = Tally::new("gradient_finite_difference", tol::GRADIENT);
    for i in 0..count {
        let seed = instance_seed(base ^ 0x646f_7074, i as u64);
        let mut rng = rng_for(seed);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(n + 1..=8);
        let k = rng.random_range(n..=m);
        let model = instances::sensor_model(&mut rng, m, n);

        let interior: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..0.9)).collect();
        gradient.record(
            seed,
            gradient_fd_deviation(&model, &interior, tol::GRADIENT_STEP),
        );

        match select_sensors(&model, k, opts) {
            Ok(res) => {
                let monotone = res.objective_trace.windows(2).all(|w| w[1].1 >= w[0].1);
                let sum_err = (res.probs.iter().sum::<f64>() - k as f64).abs();
                let in_box = res.probs.iter().all(|&p| (0.0..=1.0).contains(&p));
                ascent.record_outcome(seed, sum_err, monotone && in_box && sum_err <= 1e-8);
                let boolean = best_boolean_log_det(&model, k);
                dominance.record(seed, (boolean - res.objective()).max(0.0));
            }
            Err(err) => {
                ascent.fail(seed, err.to_string());
                dominance.fail(seed, err.to_string());
            }
        }
    }
    vec![
        axes.finish(),
        ascent.finish(),
        dominance.finish(),
        gradient.finish(),
    ]
}
