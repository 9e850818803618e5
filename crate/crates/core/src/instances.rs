//! Seeded random problem instances for cross-checks and demos.

use rand::Rng;

use crate::doptimal::{LinearSensorModel, Noise};
use crate::ensemble::{BlockEnsemble, RankOneEnsemble};
use crate::graphs::{Edge, WeightedGraph};
use crate::linalg::Matrix;

/// Derives the seed of instance `index` from a base seed (splitmix64 finalizer).
pub fn instance_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::new(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect(),
    )
    .expect("positive shape")
}

pub fn uniform_probs<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0.0..=1.0)).collect()
}

/// `n x m` ensemble with entries uniform in `[-1, 1]` and uniform probabilities.
pub fn rank_one_ensemble<R: Rng>(rng: &mut R, n: usize, m: usize) -> RankOneEnsemble {
    let u = uniform_matrix(rng, n, m);
    let v = uniform_matrix(rng, n, m);
    RankOneEnsemble::new(u, v, uniform_probs(rng, m)).expect("valid by construction")
}

/// Block ensemble with `n <= max_n`, `k <= max_k` blocks, ranks `r_i <= max_r`.
/// With `symmetric` every block has `V_i = U_i`.
pub fn block_ensemble<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_k: usize,
    max_r: usize,
    symmetric: bool,
) -> BlockEnsemble {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_k);
    let blocks = (0..k)
        .map(|_| {
            let r = rng.random_range(1..=max_r);
            let u = uniform_matrix(rng, n, r);
            let v = if symmetric {
                u.clone()
            } else {
                uniform_matrix(rng, n, r)
            };
            (u, v)
        })
        .collect();
    BlockEnsemble::new(blocks, uniform_probs(rng, k)).expect("valid by construction")
}

/// Connected multigraph with at most `max_vertices` vertices and `max_edges`
/// edges: a random spanning tree plus random extra edges. Weights lie in
/// `(0, 10]`, probabilities in `[0, 1]`.
pub fn connected_graph<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
) -> WeightedGraph {
    assert!(max_vertices >= 2 && max_edges + 1 >= max_vertices);
    let v = rng.random_range(2..=max_vertices);
    let extra = rng.random_range(0..=max_edges - (v - 1));
    let mut edges = Vec::with_capacity(v - 1 + extra);
    let weight = |rng: &mut R| 10.0 * (1.0 - rng.random::<f64>());
    for i in 1..v {
        let j = rng.random_range(0..i);
        let (t, h) = if rng.random::<bool>() { (i, j) } else { (j, i) };
        let w = weight(rng);
        edges.push(Edge::new(t, h, w, rng.random_range(0.0..=1.0)));
    }
    for _ in 0..extra {
        let t = rng.random_range(0..v);
        let h = (t + rng.random_range(1..v)) % v;
        let w = weight(rng);
        edges.push(Edge::new(t, h, w, rng.random_range(0.0..=1.0)));
    }
    // mix tree edges with extras
    for i in (1..edges.len()).rev() {
        let j = rng.random_range(0..=i);
        edges.swap(i, j);
    }
    WeightedGraph::new(v, edges).expect("valid by construction")
}

/// Connected graph whose edges are split into at most `max_blocks` blocks, every
/// edge carrying its block's probability.
pub fn block_graph<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
    max_blocks: usize,
) -> WeightedGraph {
    let g = connected_graph(rng, max_vertices, max_edges);
    let k = rng.random_range(1..=max_blocks.min(g.edge_count()));
    let block_prob = uniform_probs(rng, k);
    let block_of: Vec<usize> = (0..g.edge_count())
        .map(|_| rng.random_range(0..k))
        .collect();
    let edges = g
        .edges()
        .iter()
        .zip(&block_of)
        .map(|(e, &b)| Edge {
            prob: block_prob[b],
            ..*e
        })
        .collect();
    WeightedGraph::new(g.vertex_count(), edges)
        .and_then(|g| g.with_blocks(&block_of))
        .expect("valid by construction")
}

/// `m x n` observation matrix with entries in `[-1, 1]`, independent noise with
/// variances in `[0.25, 4]`, certain survival.
pub fn sensor_model<R: Rng>(rng: &mut R, m: usize, n: usize) -> LinearSensorModel {
    let h = uniform_matrix(rng, m, n);
    let var = (0..m).map(|_| rng.random_range(0.25..=4.0)).collect();
    LinearSensorModel::new(h, Noise::Diagonal(var), vec![1.0; m]).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeds_differ_per_index() {
        let a: Vec<u64> = (0..100).map(|i| instance_seed(42, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(instance_seed(1, 0), instance_seed(2, 0));
    }

    #[test]
    fn graphs_are_connected_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let g = connected_graph(&mut rng, 6, 12);
            assert!(g.vertex_count() <= 6 && g.edge_count() <= 12);
            assert!(crate::graphs::weighted_tree_count(&g) > 0.0);
            assert!(g.edges().iter().all(|e| e.weight > 0.0 && e.weight <= 10.0));
        }
        for _ in 0..100 {
            let g = block_graph(&mut rng, 5, 10, 5);
            assert!(g.block_count().unwrap() <= 5);
        }
    }
}
