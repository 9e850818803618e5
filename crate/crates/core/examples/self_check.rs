//! Run the built-in verification battery and print each check.

use expdet::verify::{run_battery, Size};

fn main() {
    let checks = run_battery(Size::Small, 42);
    for c in &checks {
        println!(
            "{:<32} {}  dev {:e} (tol {:e}, {} instances)",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.max_deviation,
            c.tolerance,
            c.instances
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        eprintln!("{failed} checks failed");
        std::process::exit(1);
    }
}
