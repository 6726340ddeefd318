//! A toy problem whose constraint qualification fails at the feasible point:
//! with a fixed penalty the iterates settle at the merit-stationary point
//! x1 = -1/sqrt(6 mu), and with penalty escalation enabled the stationary
//! point is driven toward the feasible set as mu grows to its cap.

use crisp::problems::problem_from_config;
use crisp::solver::{solve, SolverConfig};
use crisp::InitialGuess;

fn run(config: &SolverConfig) -> crisp::SolveReport {
    let def = problem_from_config("cq_fail", None, &[]).unwrap();
    let problem = def.build(config.complementarity_mode).unwrap();
    solve(&problem, &def.initial_guess(&InitialGuess::PassiveRollout), config).unwrap()
}

fn main() {
    let fixed = SolverConfig {
        penalty_updates_enabled: false,
        eps_p: 1e-10,
        eps_r: 1e-10,
        pred_stall_rel: 1e-12,
        ..SolverConfig::default()
    };
    let report = run(&fixed);
    println!(
        "fixed mu = 10:        {:?} in {:3} iters, x1 = {:+.8} (closed form {:+.8})",
        report.status,
        report.iterations,
        report.x[0],
        -1.0 / 60f64.sqrt()
    );

    let escalating = SolverConfig {
        eps_c: 1e-10,
        eps_p: 1e-8,
        eps_r: 1e-8,
        pred_stall_rel: 1e-10,
        max_iters: 20000,
        ..SolverConfig::default()
    };
    let report = run(&escalating);
    println!(
        "escalating penalties: {:?} in {:3} iters, x1 = {:+.8}, violation {:.1e}, largest mu {:.0e}",
        report.status, report.iterations, report.x[0], report.max_violation, report.mu_max_entry
    );
}
