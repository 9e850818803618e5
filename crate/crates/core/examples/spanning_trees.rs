//! Weighted spanning tree counts and their expectation under random edge
//! failure, on a small five-vertex network.

use expdet::graphs::{
    enumerate_spanning_trees, expected_tree_count, expected_tree_count_bruteforce, tree_weight_sum,
    weighted_tree_count, Edge, WeightedGraph, DEFAULT_MAX_EDGES,
};

fn main() -> expdet::Result<()> {
    // 5-cycle plus one chord; (tail, head, weight, survival probability)
    let g = WeightedGraph::new(
        5,
        vec![
            Edge::new(0, 1, 1.0, 0.9),
            Edge::new(1, 2, 2.0, 0.8),
            Edge::new(2, 3, 0.5, 0.95),
            Edge::new(4, 3, 1.5, 0.7),
            Edge::new(0, 4, 3.0, 0.6),
            Edge::new(4, 1, 1.0, 0.85),
        ],
    )?;

    let trees = enumerate_spanning_trees(&g, DEFAULT_MAX_EDGES)?;
    println!("{} spanning trees", trees.len());
    for t in &trees {
        let w: f64 = t.iter().map(|&i| g.edges()[i].weight).product();
        println!("  edges {t:?}  weight {w}");
    }
    println!("sum of tree weights    {}", tree_weight_sum(&g, &trees));
    println!("matrix-tree count      {}", weighted_tree_count(&g));

    println!("expected (reweighted)  {}", expected_tree_count(&g));
    println!(
        "expected (2^m states)  {}",
        expected_tree_count_bruteforce(&g, DEFAULT_MAX_EDGES)?
    );
    Ok(())
}
