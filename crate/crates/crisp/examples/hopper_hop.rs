//! One-legged hopper: leg compression, thrust, and steering are each gated
//! by contact complementarity. Starts standing and hops to a horizontal
//! target.

use crisp::harness::{run_single, RunConfig};
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::new("hopper", "hopper_hop");
    cfg.guess = crisp::InitialGuess::PassiveRollout;
    cfg.solver.aggressive_soc = true;
    let out = run_single(&cfg, Some(Path::new("out/examples"))).unwrap();
    println!(
        "{:?} in {} iters, violation {:.1e}, body position error {:.2e}",
        out.report.status, out.report.iterations, out.metrics.max_violation, out.metrics.translation_error
    );
    println!("artifacts in out/examples/hopper_hop_*");
}
