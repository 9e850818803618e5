//! Random weighted graphs and their (expected) weighted spanning-tree counts.
//!
//! The weighted tree count `t_w(G)` is the sum over spanning trees of the
//! product of edge weights, and equals the determinant of the reduced weighted
//! Laplacian `A_w A_wᵀ`. When edge `i` survives independently with
//! probability `p_i`, the expected count is the tree count of the same graph
//! with weights `p_i w_i` ([`expected_tree_count`]).
//!
//! When edges fail in correlated blocks, [`block_expected_tree_count`] offers
//! a state-enumeration route and a tree-enumeration route that raises each
//! block probability to `1 / n_b(T)` per tree edge.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::ensemble::{check_probabilities, RankOneEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{det, KahanSum, Matrix};
use crate::subsets::ColexSubsets;

/// Default cap on the edge count for `2^m` and tree enumerations.
pub const DEFAULT_MAX_EDGES: usize = 16;

/// Default cap on the block count for block-state enumeration.
pub const DEFAULT_MAX_BLOCKS: usize = 20;

/// Undirected edge with a positive weight and a survival probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    pub prob: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: f64, prob: f64) -> Self {
        Edge {
            tail,
            head,
            weight,
            prob,
        }
    }

    pub fn unit(tail: usize, head: usize) -> Self {
        Edge::new(tail, head, 1.0, 1.0)
    }
}

/// Sign convention for columns of the incidence matrix. Only `A Aᵀ` enters
/// any result, so both conventions give identical tree counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `+1` at the lower vertex id, `-1` at the higher.
    #[default]
    LowerToHigher,
    /// `+1` at `tail`, `-1` at `head`, as listed.
    AsListed,
}

/// Weighted multigraph on vertices `0..vertex_count`, optionally with edges
/// partitioned into blocks that fail together.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    blocks: Option<BlockPartition>,
}

#[derive(Debug, Clone, PartialEq)]
struct BlockPartition {
    /// Dense block index per edge.
    block_of: Vec<usize>,
    /// Original label of each dense block, ascending.
    labels: Vec<usize>,
    probs: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count < 2 {
            return Err(Error::domain(format!(
                "graph needs at least 2 vertices, got {vertex_count}"
            )));
        }
        if edges.is_empty() {
            return Err(Error::domain("graph has no edges"));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertex_count || e.head >= vertex_count {
                return Err(Error::domain(format!(
                    "edge {i} ({}, {}) references a vertex outside 0..{vertex_count}",
                    e.tail, e.head
                )));
            }
            if e.tail == e.head {
                return Err(Error::domain(format!(
                    "edge {i} is a self-loop at {}",
                    e.tail
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::domain(format!(
                    "edge {i} has weight {}, must be positive",
                    e.weight
                )));
            }
        }
        let probs: Vec<f64> = edges.iter().map(|e| e.prob).collect();
        check_probabilities(&probs)?;
        Ok(WeightedGraph {
            vertex_count,
            edges,
            blocks: None,
        })
    }

    /// Assigns edge `i` to block `block_of[i]`. Block labels are arbitrary
    /// integers; every edge in a block must carry the same probability.
    pub fn with_blocks(mut self, block_of: &[usize]) -> Result<Self> {
        if block_of.len() != self.edges.len() {
            return Err(Error::dim(format!(
                "{} block labels for {} edges",
                block_of.len(),
                self.edges.len()
            )));
        }
        let mut prob_of_label: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, (&label, e)) in block_of.iter().zip(&self.edges).enumerate() {
            let p = *prob_of_label.entry(label).or_insert(e.prob);
            if p != e.prob {
                return Err(Error::domain(format!(
                    "edge {i} has probability {} but block {label} uses {p}",
                    e.prob
                )));
            }
        }
        let labels: Vec<usize> = prob_of_label.keys().copied().collect();
        let probs: Vec<f64> = prob_of_label.values().copied().collect();
        let dense = block_of
            .iter()
            .map(|l| labels.binary_search(l).expect("label recorded"))
            .collect();
        self.blocks = Some(BlockPartition {
            block_of: dense,
            labels,
            probs,
        });
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_blocks(&self) -> bool {
        self.blocks.is_some()
    }

    /// Number of blocks, if partitioned.
    pub fn block_count(&self) -> Option<usize> {
        self.blocks.as_ref().map(|b| b.labels.len())
    }

    /// Dense block index of every edge, if partitioned.
    pub fn block_of(&self) -> Option<&[usize]> {
        self.blocks.as_ref().map(|b| b.block_of.as_slice())
    }

    /// Per-block probability in dense block order, if partitioned.
    pub fn block_probs(&self) -> Option<&[f64]> {
        self.blocks.as_ref().map(|b| b.probs.as_slice())
    }

    /// Same topology and blocks with every weight replaced by `p_i w_i`.
    pub(crate) fn probability_weighted(&self) -> WeightedGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * e.prob,
                ..*e
            })
            .collect();
        WeightedGraph {
            vertex_count: self.vertex_count,
            edges,
            blocks: self.blocks.clone(),
        }
    }

    /// Reduced Laplacian `sum_i scale_i w_i a_i a_iᵀ` with `removed` deleted.
    fn scaled_reduced_laplacian(&self, removed: usize, scale: &[f64]) -> Matrix {
        let n = self.vertex_count - 1;
        let slot = |v: usize| -> Option<usize> {
            match v.cmp(&removed) {
                std::cmp::Ordering::Less => Some(v),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(v - 1),
            }
        };
        let mut l = Matrix::zeros(n, n);
        for (e, &s) in self.edges.iter().zip(scale) {
            let w = s * e.weight;
            if w == 0.0 {
                continue;
            }
            let (a, b) = (slot(e.tail), slot(e.head));
            if let Some(a) = a {
                l[(a, a)] += w;
            }
            if let Some(b) = b {
                l[(b, b)] += w;
            }
            if let (Some(a), Some(b)) = (a, b) {
                l[(a, b)] -= w;
                l[(b, a)] -= w;
            }
        }
        l
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count {
            return Err(Error::domain(format!(
                "vertex {v} does not exist (graph has {} vertices)",
                self.vertex_count
            )));
        }
        Ok(())
    }
}

/// `(vertex_count - 1) x m` unweighted incidence matrix with the row of
/// `removed_vertex` deleted, columns signed `+1` at the lower vertex id.
pub fn reduced_incidence(g: &WeightedGraph, removed_vertex: usize) -> Result<Matrix> {
    reduced_incidence_oriented(g, removed_vertex, Orientation::default())
}

pub fn reduced_incidence_oriented(
    g: &WeightedGraph,
    removed_vertex: usize,
    orientation: Orientation,
) -> Result<Matrix> {
    g.check_vertex(removed_vertex)?;
    let n = g.vertex_count - 1;
    let mut a = Matrix::zeros(n, g.edges.len());
    for (j, e) in g.edges.iter().enumerate() {
        let (plus, minus) = match orientation {
            Orientation::LowerToHigher => (e.tail.min(e.head), e.tail.max(e.head)),
            Orientation::AsListed => (e.tail, e.head),
        };
        for (v, sign) in [(plus, 1.0), (minus, -1.0)] {
            if v != removed_vertex {
                let row = if v > removed_vertex { v - 1 } else { v };
                a[(row, j)] = sign;
            }
        }
    }
    Ok(a)
}

/// `A_w = A sqrt(W)`, the reduced weighted incidence matrix.
pub fn reduced_weighted_incidence(
    g: &WeightedGraph,
    removed_vertex: usize,
    orientation: Orientation,
) -> Result<Matrix> {
    let sqrt_w: Vec<f64> = g.edges.iter().map(|e| e.weight.sqrt()).collect();
    reduced_incidence_oriented(g, removed_vertex, orientation)?.scale_columns(&sqrt_w)
}

/// Weighted spanning-tree count `det(A_w A_wᵀ)` with vertex 0 removed.
pub fn weighted_tree_count(g: &WeightedGraph) -> f64 {
    weighted_tree_count_with(g, 0, Orientation::default()).expect("vertex 0 exists")
}

/// Weighted spanning-tree count for an explicit removed vertex and orientation.
pub fn weighted_tree_count_with(
    g: &WeightedGraph,
    removed_vertex: usize,
    orientation: Orientation,
) -> Result<f64> {
    let a_w = reduced_weighted_incidence(g, removed_vertex, orientation)?;
    det(&a_w.matmul(&a_w.transpose())?)
}

/// Expected weighted tree count when edge `i` survives with probability `p_i`:
/// the tree count under weights `p_i w_i`.
pub fn expected_tree_count(g: &WeightedGraph) -> f64 {
    weighted_tree_count(&g.probability_weighted())
}

/// The ensemble `(A_w, A_w, p)` whose expected determinant is the expected
/// weighted tree count.
pub fn tree_ensemble(g: &WeightedGraph, removed_vertex: usize) -> Result<RankOneEnsemble> {
    let a_w = reduced_weighted_incidence(g, removed_vertex, Orientation::default())?;
    RankOneEnsemble::new(a_w.clone(), a_w, g.edges.iter().map(|e| e.prob).collect())
}

fn edge_cap(what: &'static str, m: usize, max_edges: usize) -> Result<()> {
    if m > max_edges {
        return Err(Error::Capacity {
            what,
            required: m as u128,
            limit: max_edges as u128,
        });
    }
    Ok(())
}

fn is_spanning_tree(vertex_count: usize, edges: &[Edge], subset: &[usize]) -> bool {
    let mut uf: UnionFind<usize> = UnionFind::new(vertex_count);
    // vertex_count - 1 edges without a cycle connect every vertex
    subset
        .iter()
        .all(|&i| uf.union(edges[i].tail, edges[i].head))
}

/// All spanning trees as sorted edge-index lists, in colexicographic order.
///
/// Fails with [`Error::Capacity`] when the graph has more than `max_edges` edges.
pub fn enumerate_spanning_trees(g: &WeightedGraph, max_edges: usize) -> Result<Vec<Vec<usize>>> {
    edge_cap("edges for tree enumeration", g.edges.len(), max_edges)?;
    Ok(ColexSubsets::new(g.edges.len(), g.vertex_count - 1)
        .filter(|q| is_spanning_tree(g.vertex_count, &g.edges, q))
        .collect())
}

/// `sum_T prod_{e in T} w(e)` over an explicit tree list.
pub fn tree_weight_sum(g: &WeightedGraph, trees: &[Vec<usize>]) -> f64 {
    trees
        .iter()
        .map(|t| t.iter().map(|&i| g.edges[i].weight).product::<f64>())
        .collect::<KahanSum>()
        .value()
}

fn outcome_probability(p: &[f64], mask: u64) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, &pi)| if mask >> i & 1 == 1 { pi } else { 1.0 - pi })
        .product()
}

/// Exact expected tree count by summing over all `2^m` edge states.
pub fn expected_tree_count_bruteforce(g: &WeightedGraph, max_edges: usize) -> Result<f64> {
    let m = g.edges.len();
    edge_cap("edges for state enumeration", m, max_edges.min(63))?;
    let probs: Vec<f64> = g.edges.iter().map(|e| e.prob).collect();
    let mut alive = vec![0.0; m];
    let mut acc = KahanSum::new();
    for mask in 0..(1u64 << m) {
        for (i, s) in alive.iter_mut().enumerate() {
            *s = (mask >> i & 1) as f64;
        }
        let t = det(&g.scaled_reduced_laplacian(0, &alive))?;
        acc.add(outcome_probability(&probs, mask) * t);
    }
    Ok(acc.value())
}

/// How [`block_expected_tree_count`] evaluates the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMethod {
    /// Sum over spanning trees of `prod_e p_b^(1/n_b(T)) w(e)`.
    Closed,
    /// Sum over all `2^k` block states.
    BruteForce,
}

/// Caps for [`block_expected_tree_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCaps {
    pub max_blocks: usize,
    pub max_edges: usize,
}

impl Default for BlockCaps {
    fn default() -> Self {
        BlockCaps {
            max_blocks: DEFAULT_MAX_BLOCKS,
            max_edges: DEFAULT_MAX_EDGES,
        }
    }
}

/// Expected weighted tree count when each block of edges survives as a unit.
pub fn block_expected_tree_count(
    g: &WeightedGraph,
    method: BlockMethod,
    caps: BlockCaps,
) -> Result<f64> {
    let blocks = g
        .blocks
        .as_ref()
        .ok_or_else(|| Error::domain("graph has no block partition"))?;
    match method {
        BlockMethod::BruteForce => {
            let k = blocks.labels.len();
            if k > caps.max_blocks.min(63) {
                return Err(Error::Capacity {
                    what: "block states",
                    required: 1u128 << k.min(127),
                    limit: 1u128 << caps.max_blocks.min(127),
                });
            }
            let mut alive = vec![0.0; g.edges.len()];
            let mut acc = KahanSum::new();
            for mask in 0..(1u64 << k) {
                for (s, &b) in alive.iter_mut().zip(&blocks.block_of) {
                    *s = (mask >> b & 1) as f64;
                }
                let t = det(&g.scaled_reduced_laplacian(0, &alive))?;
                acc.add(outcome_probability(&blocks.probs, mask) * t);
            }
            Ok(acc.value())
        }
        BlockMethod::Closed => {
            let trees = enumerate_spanning_trees(g, caps.max_edges)?;
            let mut per_block = vec![0usize; blocks.labels.len()];
            let mut acc = KahanSum::new();
            for tree in &trees {
                per_block.iter_mut().for_each(|c| *c = 0);
                for &i in tree {
                    per_block[blocks.block_of[i]] += 1;
                }
                let term: f64 = tree
                    .iter()
                    .map(|&i| {
                        let b = blocks.block_of[i];
                        fractional_power(blocks.probs[b], per_block[b]) * g.edges[i].weight
                    })
                    .product();
                acc.add(term);
            }
            Ok(acc.value())
        }
    }
}

/// `p^(1/count)` as `exp(ln p / count)`, with `0^(1/count) = 0`.
fn fractional_power(p: f64, count: usize) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        (p.ln() / count as f64).exp()
    }
}
