//! Edges that fail together. Each block of edges shares one coin flip, so
//! the per-edge reweighting no longer applies; the tree-sum formula and the
//! block-state enumeration must agree instead.

use expdet::graphs::{
    block_expected_tree_count, expected_tree_count, BlockCaps, BlockMethod, Edge, WeightedGraph,
};

fn main() -> expdet::Result<()> {
    let triangle = || {
        WeightedGraph::new(
            3,
            vec![
                Edge::new(0, 1, 1.0, 0.5),
                Edge::new(1, 2, 1.0, 0.5),
                Edge::new(0, 2, 1.0, 0.5),
            ],
        )
    };

    println!("independent edges: {}", expected_tree_count(&triangle()?));
    for blocks in [[0, 1, 2], [0, 0, 1], [0, 0, 0]] {
        let g = triangle()?.with_blocks(&blocks)?;
        let closed = block_expected_tree_count(&g, BlockMethod::Closed, BlockCaps::default())?;
        let brute = block_expected_tree_count(&g, BlockMethod::BruteForce, BlockCaps::default())?;
        println!("blocks {blocks:?}: tree-sum {closed:.6}  block states {brute:.6}");
    }
    Ok(())
}
