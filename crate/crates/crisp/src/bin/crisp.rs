//! Command-line front end: single solves, benchmark suites, and structural
//! problem checks.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 solver failure.

use clap::{Args, Parser, Subcommand};
use crisp::harness::{
    check_problem, default_out_dir, run_single, run_suite, summary_table, RunConfig, SUITE_NAMES,
};
use crisp::problems::PROBLEM_NAMES;
use crisp::solver::TerminationStatus;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crisp", about = "Trust-region solver for contact-implicit trajectory optimization", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and write trajectory/trace/summary artifacts
    Solve(SolveArgs),
    /// Run a benchmark suite and write per-run and aggregate tables
    Bench(BenchArgs),
    /// Run structural checks (derivatives, Hessian, passive rollout)
    Check(CheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// problem name
    #[arg(long)]
    problem: String,
    /// TOML parameter file (defaults apply when omitted)
    #[arg(long)]
    params: Option<PathBuf>,
    /// initial guess: all_zero, passive, or noisy[:sigma]
    #[arg(long, default_value = "all_zero")]
    guess: String,
    /// seed for noisy guesses and certificate directions
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// problem parameter or solver setting overrides, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// output directory (default: $CRISP_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// suite name
    #[arg(long)]
    suite: String,
    /// concurrent solves
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// master seed; per-run seeds are master + run index
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output directory (default: $CRISP_OUT_DIR or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// problem name, or "all"
    #[arg(long)]
    problem: String,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, short)]
    verbose: bool,
}

/// Splits overrides into solver-setting pairs and problem-parameter pairs.
/// Solver keys are matched against the SolverConfig field names.
fn apply_solver_override(solver: &mut crisp::SolverConfig, key: &str, value: &str) -> Option<Result<(), String>> {
    macro_rules! num {
        ($field:ident) => {{
            Some(match value.parse() {
                Ok(v) => {
                    solver.$field = v;
                    Ok(())
                }
                Err(e) => Err(format!("bad value for {key}: {e}")),
            })
        }};
    }
    match key {
        "max_iters" => num!(max_iters),
        "delta0" => num!(delta0),
        "delta_max" => num!(delta_max),
        "mu0" => num!(mu0),
        "mu_max" => num!(mu_max),
        "eta_low" => num!(eta_low),
        "eta_high" => num!(eta_high),
        "gamma_shrink" => num!(gamma_shrink),
        "gamma_expand" => num!(gamma_expand),
        "eps_c" => num!(eps_c),
        "eps_p" => num!(eps_p),
        "eps_r" => num!(eps_r),
        "qp_tol" => num!(qp_tol),
        "pred_stall_rel" => num!(pred_stall_rel),
        "penalty_updates_enabled" => num!(penalty_updates_enabled),
        "trust_reset_on_penalty_bump" => num!(trust_reset_on_penalty_bump),
        "aggressive_soc" => num!(aggressive_soc),
        "certificate_dirs" => num!(certificate_dirs),
        "certificate_fd_step" => num!(certificate_fd_step),
        "complementarity_mode" => Some(match value {
            "equality" => {
                solver.complementarity_mode = crisp::nlp::ProductMode::Equality;
                Ok(())
            }
            "inequality" => {
                solver.complementarity_mode = crisp::nlp::ProductMode::Inequality;
                Ok(())
            }
            other => Err(format!("bad complementarity_mode '{other}'")),
        }),
        _ => None,
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode, String> {
    let mut cfg = RunConfig::new(&args.problem, &args.problem);
    if let Some(path) = &args.params {
        cfg.params_toml =
            Some(std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    cfg.guess = args
        .guess
        .parse()
        .map_err(|e: String| format!("bad guess: {e}"))?;
    cfg.solver.seed = args.seed;
    if let crisp::InitialGuess::NoisyRollout { ref mut seed, .. } = cfg.guess {
        *seed = args.seed;
    }
    for pair in &args.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got '{pair}'"))?;
        match apply_solver_override(&mut cfg.solver, key, value) {
            Some(done) => done?,
            None => cfg.overrides.push((key.to_string(), value.to_string())),
        }
    }
    let out_dir = args.out.clone().unwrap_or_else(default_out_dir);
    let outcome = run_single(&cfg, Some(&out_dir))?;
    let m = &outcome.metrics;
    println!(
        "{}: {:?} in {} iterations | objective {:.6e} | violation {:.3e} | tracking error {:.3e}",
        args.problem,
        outcome.report.status,
        outcome.report.iterations,
        outcome.report.objective,
        outcome.report.max_violation,
        m.tracking_error,
    );
    println!("artifacts in {}", out_dir.display());
    Ok(match outcome.report.status {
        TerminationStatus::Success => ExitCode::SUCCESS,
        _ => ExitCode::from(2),
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode, String> {
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(default_out_dir)
        .join(&args.suite);
    let (outcomes, summary) = run_suite(&args.suite, args.jobs, args.seed, Some(&out_dir))?;
    for o in &outcomes {
        println!(
            "{}: {:?} in {} iterations | violation {:.3e} | tracking error {:.3e} | {}",
            o.label,
            o.report.status,
            o.report.iterations,
            o.metrics.max_violation,
            o.metrics.tracking_error,
            if o.metrics.success { "ok" } else { "MISS" },
        );
    }
    println!("{}", summary_table(&summary));
    println!("tables in {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode, String> {
    let params = match &args.params {
        Some(path) => {
            Some(std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?)
        }
        None => None,
    };
    let names: Vec<&str> = if args.problem == "all" {
        PROBLEM_NAMES.to_vec()
    } else {
        vec![args.problem.as_str()]
    };
    let mut failed = false;
    for name in names {
        match check_problem(name, params.as_deref(), &[], args.verbose) {
            Ok(()) => println!("{name}: ok"),
            Err(e) => {
                println!("{name}: FAIL — {e}");
                failed = true;
            }
        }
    }
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("problems: {}", PROBLEM_NAMES.join(", "));
            eprintln!("suites: {}", SUITE_NAMES.join(", "));
            ExitCode::from(1)
        }
    }
}
