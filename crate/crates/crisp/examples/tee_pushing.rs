//! Tee pushing: like box pushing but the slider is a T-shaped block, so the
//! contact-face geometry is non-convex. Rotates the tee a quarter-turn onto
//! a circle target.

use crisp::harness::{run_single, RunConfig};
use std::f64::consts::PI;
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::new("push_t", "tee_pushing");
    cfg.overrides
        .push(("target_angle".to_string(), (PI / 4.0).to_string()));
    cfg.guess = crisp::InitialGuess::PassiveRollout;
    let out = run_single(&cfg, Some(Path::new("out/examples"))).unwrap();
    println!(
        "{:?} in {} iters, violation {:.1e}, position error {:.2e}, heading error {:.2e}",
        out.report.status,
        out.report.iterations,
        out.metrics.max_violation,
        out.metrics.translation_error,
        out.metrics.angle_error
    );
    println!("artifacts in out/examples/tee_pushing_*");
}
