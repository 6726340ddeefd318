//! Solves the two-variable complementarity toy whose only optimum is the
//! origin, from several starting points, and prints the stationarity
//! certificate for each solve.

use crisp::problems::problem_from_config;
use crisp::solver::{solve, SolverConfig};
use crisp::InitialGuess;

fn main() {
    let config = SolverConfig {
        // stopping tolerances matched to the ~1e-4 solution accuracy shown
        eps_p: 1e-6,
        eps_r: 1e-6,
        pred_stall_rel: 1e-9,
        ..SolverConfig::default()
    };
    for (x0, y0) in [(1.0, 1.0), (2.0, 0.5), (-1.0, 3.0), (0.3, -0.7)] {
        let overrides = vec![
            ("x0".to_string(), x0.to_string()),
            ("y0".to_string(), y0.to_string()),
        ];
        let def = problem_from_config("toy_mpcc", None, &overrides).unwrap();
        let problem = def.build(config.complementarity_mode).unwrap();
        let report =
            solve(&problem, &def.initial_guess(&InitialGuess::PassiveRollout), &config).unwrap();
        let cert = report
            .certificate
            .as_ref()
            .map(|c| format!("{:+.2e} over {} directions", c.min_directional_derivative, c.n_directions))
            .unwrap_or_else(|| "none".to_string());
        println!(
            "start ({x0:5.2}, {y0:5.2}): {:?} in {} iters, x* = ({:+.2e}, {:+.2e}), violation {:.1e}, min directional derivative {cert}",
            report.status, report.iterations, report.x[0], report.x[1], report.max_violation
        );
    }
}
