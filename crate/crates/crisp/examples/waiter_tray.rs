//! Waiter problem: slide a plate off a table edge using a pusher, with
//! friction complementarity at both the table and pusher contacts.

use crisp::harness::{run_single, RunConfig};
use std::path::Path;

fn main() {
    let cfg = RunConfig::new("waiter", "waiter_tray");
    let out = run_single(&cfg, Some(Path::new("out/examples"))).unwrap();
    println!(
        "{:?} in {} iters, violation {:.1e}, plate position error {:.2e}",
        out.report.status, out.report.iterations, out.metrics.max_violation, out.metrics.translation_error
    );
    println!("artifacts in out/examples/waiter_tray_*");
}
