//! Cargo transport: a driven cart carries a cargo block coupled only by
//! friction, so braking and acceleration must respect the stick/slip
//! complementarity. Runs the braking scenario from the benchmark suite.

use crisp::harness::{run_single, RunConfig};
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::new("transport", "cargo_transport_brake");
    for (k, v) in [
        ("x1_0", "3.4"),
        ("x2_0", "3.4"),
        ("v1_0", "-4"),
        ("v2_0", "-4"),
        ("x1_target", "-0.35"),
        ("x2_target", "0"),
        ("v1_target", "-2"),
        ("v2_target", "-2"),
    ] {
        cfg.overrides.push((k.to_string(), v.to_string()));
    }
    cfg.solver.mu0 = 1.0;
    let out = run_single(&cfg, Some(Path::new("out/examples"))).unwrap();
    println!(
        "{:?} in {} iters, violation {:.1e}, tracking error {:.2e}",
        out.report.status, out.report.iterations, out.metrics.max_violation, out.metrics.tracking_error
    );
    println!("artifacts in out/examples/cargo_transport_brake_*");
}
