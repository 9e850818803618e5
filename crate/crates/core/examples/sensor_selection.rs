//! Pick k of m sensors by relaxed D-optimal design, then compare with the
//! best exhaustive choice.

use expdet::doptimal::{select_sensors, LinearSensorModel, SelectOptions};
use expdet::instances::{instance_seed, sensor_model};
use expdet::verify::{best_boolean_log_det, duplicated_axes_model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(name: &str, model: &LinearSensorModel, k: usize) -> expdet::Result<()> {
    let res = select_sensors(model, k, SelectOptions::default())?;
    let probs: Vec<String> = res.probs.iter().map(|p| format!("{p:.3}")).collect();
    println!("{name}: k = {k}");
    println!("  relaxed p   [{}]", probs.join(", "));
    println!("  selected    {:?}", res.selected);
    println!(
        "  log det     relaxed {:.6}, best subset {:.6}",
        res.objective(),
        best_boolean_log_det(model, k)
    );
    println!(
        "  {} accepted steps, converged {}",
        res.objective_trace.len() - 1,
        res.converged
    );
    Ok(())
}

fn main() -> expdet::Result<()> {
    // two copies of each axis: any split of mass within a pair is optimal
    show("duplicated axes", &duplicated_axes_model(), 2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(11, 0));
    show("random 8 x 3", &sensor_model(&mut rng, 8, 3), 4)?;
    Ok(())
}
