//! Seeded Monte Carlo against the exact expectation.

use expdet::ensemble::{expected_det_closed_form, expected_det_monte_carlo};
use expdet::instances::{instance_seed, rank_one_ensemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> expdet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(7, 0));
    let e = rank_one_ensemble(&mut rng, 3, 9);
    let exact = expected_det_closed_form(&e);
    println!("exact {exact:.6}");

    for samples in [100, 1_000, 10_000, 100_000] {
        let est = expected_det_monte_carlo(&e, samples, 42)?;
        let z = (est.mean - exact) / est.std_error;
        println!(
            "N = {samples:>6}  mean {:.6}  se {:.6}  z {z:+.2}",
            est.mean, est.std_error
        );
    }

    // same seed, same bits
    let a = expected_det_monte_carlo(&e, 5_000, 1)?;
    let b = expected_det_monte_carlo(&e, 5_000, 1)?;
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    println!("seed 1 reproduces: {}", a.mean);
    Ok(())
}
