//! Rank-r blocks: the determinant of the mean sum against the exact
//! expectation. For symmetric blocks the former never exceeds the latter;
//! without symmetry it can.

use expdet::ensemble::{
    block_expected_det_bruteforce, block_lower_bound, BlockEnsemble, DEFAULT_MAX_TERMS,
};
use expdet::instances::{block_ensemble, instance_seed};
use expdet::verify::search_lower_bound_violations;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> expdet::Result<()> {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(3, i));
        let b: BlockEnsemble = block_ensemble(&mut rng, 4, 6, 3, true);
        let gap = block_lower_bound(&b) - block_expected_det_bruteforce(&b, DEFAULT_MAX_TERMS)?;
        worst = worst.max(gap);
    }
    println!("symmetric: max(bound - expectation) over 100 ensembles = {worst:e}");

    let search = search_lower_bound_violations(3, 100);
    println!(
        "general:   {} of {} ensembles exceed the bound (max excess {:e})",
        search.violations.len(),
        search.trials,
        search.max_excess
    );
    Ok(())
}
