//! Run orchestration: single solves, benchmark suites, success metrics, and
//! deterministic artifact files (trajectory CSV, trace JSONL, summary JSON).
//!
//! Everything written here is byte-deterministic under a fixed seed except
//! wall-clock times, which go to a separate timing file so the main artifacts
//! can be diffed across runs.

use crate::nlp::{MetricGroup, NlpProblem};
use crate::problems::{decode_trajectory, problem_from_config, InitialGuess, Trajectory};
use crate::solver::{solve, SolveReport, SolverConfig};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Success thresholds applied conjunctively to a returned trajectory: the
/// solution must be feasible and the terminal state must track its targets,
/// grouped by metric kind.
#[derive(Debug, Clone, Serialize)]
pub struct SuccessCriteria {
    pub max_violation: f64,
    /// bound on the norm of terminal translation errors
    pub translation: f64,
    pub translation_velocity: f64,
    /// bound on the norm of terminal angle errors (rad)
    pub angle: f64,
    pub angular_velocity: f64,
}

impl Default for SuccessCriteria {
    fn default() -> Self {
        SuccessCriteria {
            max_violation: 1e-5,
            translation: 0.1,
            translation_velocity: 0.5,
            angle: std::f64::consts::PI / 6.0,
            angular_velocity: 0.1 * std::f64::consts::PI,
        }
    }
}

/// Terminal tracking errors by metric group plus the conjunctive verdict.
#[derive(Debug, Clone, Serialize)]
pub struct MetricRecord {
    pub max_violation: f64,
    pub translation_error: f64,
    pub translation_velocity_error: f64,
    pub angle_error: f64,
    pub angular_velocity_error: f64,
    /// l2 norm of all terminal target errors, the scalar "tracking error"
    pub tracking_error: f64,
    pub success: bool,
}

/// Computes per-group terminal error norms from the final step of the
/// decision vector and applies `criteria` conjunctively. Problems without
/// terminal targets (the toys) are judged on feasibility alone.
pub fn evaluate_success(
    problem: &NlpProblem,
    x: &[f64],
    max_violation: f64,
    criteria: &SuccessCriteria,
) -> MetricRecord {
    let mut sq = [0.0f64; 4];
    if let Some(layout) = &problem.layout {
        let base = (layout.horizon - 1) * layout.stride();
        for t in &problem.terminal_targets {
            let err = x[base + t.slot] - t.target;
            let idx = match t.group {
                MetricGroup::Translation => 0,
                MetricGroup::TranslationVelocity => 1,
                MetricGroup::Angle => 2,
                MetricGroup::AngularVelocity => 3,
            };
            sq[idx] += err * err;
        }
    }
    let [te, ve, ae, we] = sq.map(f64::sqrt);
    let success = max_violation < criteria.max_violation
        && te < criteria.translation
        && ve < criteria.translation_velocity
        && ae < criteria.angle
        && we < criteria.angular_velocity;
    MetricRecord {
        max_violation,
        translation_error: te,
        translation_velocity_error: ve,
        angle_error: ae,
        angular_velocity_error: we,
        tracking_error: sq.iter().sum::<f64>().sqrt(),
        success,
    }
}

/// One fully specified solve: problem + parameters + guess + solver settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// registry name of the problem
    pub problem: String,
    /// optional TOML parameter text (file contents, not a path)
    pub params_toml: Option<String>,
    /// key=value parameter overrides applied on top of the TOML
    pub overrides: Vec<(String, String)>,
    pub guess: InitialGuess,
    pub solver: SolverConfig,
    pub criteria: SuccessCriteria,
    /// unique name used as the artifact file prefix
    pub label: String,
    pub emit_trajectory: bool,
    pub emit_trace: bool,
}

impl RunConfig {
    pub fn new(problem: &str, label: &str) -> Self {
        RunConfig {
            problem: problem.to_string(),
            params_toml: None,
            overrides: Vec::new(),
            guess: InitialGuess::AllZero,
            solver: SolverConfig::default(),
            criteria: SuccessCriteria::default(),
            label: label.to_string(),
            emit_trajectory: true,
            emit_trace: true,
        }
    }

    fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.push((key.to_string(), value.to_string()));
        self
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub label: String,
    pub report: SolveReport,
    pub metrics: MetricRecord,
}

/// Builds the problem, solves it, and evaluates the success criteria. Writes
/// artifact files under `out_dir` when given (see `write_artifacts` for the
/// file set).
pub fn run_single(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunOutcome, String> {
    let def = problem_from_config(&cfg.problem, cfg.params_toml.as_deref(), &cfg.overrides)?;
    let problem = def
        .build(cfg.solver.complementarity_mode)
        .map_err(|e| e.to_string())?;
    let x0 = def.initial_guess(&cfg.guess);
    let report = solve(&problem, &x0, &cfg.solver).map_err(|e| e.to_string())?;
    let metrics = evaluate_success(&problem, &report.x, report.max_violation, &cfg.criteria);
    let outcome = RunOutcome {
        label: cfg.label.clone(),
        report,
        metrics,
    };
    if let Some(dir) = out_dir {
        write_artifacts(cfg, &problem, &outcome, def.params_json(), dir)?;
    }
    Ok(outcome)
}

/// Serializes a float with 17 significant digits so the CSV round-trips
/// exactly back to the same f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("time");
    for name in &traj.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, step) in traj.steps.iter().enumerate() {
        out.push_str(&fmt_f64(i as f64 * traj.dt));
        for v in step {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub const TRACE_SCHEMA: &str = "trace-v1";

fn trace_jsonl(report: &SolveReport) -> String {
    let mut out = format!("{{\"schema\":\"{TRACE_SCHEMA}\"}}\n");
    for rec in &report.trace {
        out.push_str(&serde_json::to_string(rec).unwrap());
        out.push('\n');
    }
    out
}

fn write_artifacts(
    cfg: &RunConfig,
    problem: &NlpProblem,
    outcome: &RunOutcome,
    params: serde_json::Value,
    dir: &Path,
) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| -> Result<(), String> {
        std::fs::write(dir.join(name), text).map_err(|e| e.to_string())
    };
    let label = &cfg.label;
    if cfg.emit_trajectory {
        if let Some(traj) = decode_trajectory(problem, &outcome.report.x) {
            write(&format!("{label}_trajectory.csv"), &trajectory_csv(&traj))?;
        }
    }
    if cfg.emit_trace {
        write(&format!("{label}_trace.jsonl"), &trace_jsonl(&outcome.report))?;
    }
    let summary = serde_json::json!({
        "schema": "summary-v1",
        "label": label,
        "problem": cfg.problem,
        "params": params,
        "guess": format!("{:?}", cfg.guess),
        "solver": cfg.solver,
        "status": outcome.report.status,
        "iterations": outcome.report.iterations,
        "objective": outcome.report.objective,
        "merit": outcome.report.merit,
        "max_violation": outcome.report.max_violation,
        "final_delta": outcome.report.final_delta,
        "mu_max_entry": outcome.report.mu_max_entry,
        "certificate": outcome.report.certificate,
        "metrics": outcome.metrics,
        "solution": outcome.report.x,
    });
    write(
        &format!("{label}_summary.json"),
        &serde_json::to_string_pretty(&summary).unwrap(),
    )?;
    // wall time lives apart so the files above stay byte-identical across
    // repeat runs with the same seeds
    let timing = serde_json::json!({ "label": label, "wall_time_s": outcome.report.wall_time });
    write(&format!("{label}_timing.json"), &timing.to_string())
}

pub const SUITE_NAMES: &[&str] = &[
    "toy",
    "cartpole",
    "transport",
    "push_box",
    "push_t",
    "hopper",
    "waiter",
];

/// The documented benchmark grid for one suite. Solver settings that deviate
/// from the defaults are part of the suite definition and recorded in each
/// run's summary artifact.
pub fn suite_runs(suite: &str) -> Result<Vec<RunConfig>, String> {
    let runs = match suite {
        "toy" => {
            // passive rollout for the toys means "start at (x0, y0)"
            let mut runs = vec![
                RunConfig::new("toy_mpcc", "toy_mpcc_a").set("x0", 1.0).set("y0", 1.0),
                RunConfig::new("toy_mpcc", "toy_mpcc_b").set("x0", 2.0).set("y0", 0.5),
                RunConfig::new("toy_mpcc", "toy_mpcc_c").set("x0", -1.0).set("y0", 3.0),
                {
                    let mut c = RunConfig::new("cq_fail", "cq_fail_full");
                    // success here means escalating mu to its cap; the residual
                    // |x1|^3 passes a loose feasibility test long before that
                    c.solver.eps_c = 1e-10;
                    c.solver.eps_p = 1e-8;
                    c.solver.eps_r = 1e-8;
                    c.solver.pred_stall_rel = 1e-10;
                    c.solver.max_iters = 20000;
                    c
                },
            ];
            for c in &mut runs {
                c.guess = InitialGuess::PassiveRollout;
                if c.problem == "toy_mpcc" {
                    // stopping tolerances matched to 1e-4 solution accuracy
                    c.solver.eps_p = 1e-6;
                    c.solver.eps_r = 1e-6;
                    c.solver.pred_stall_rel = 1e-9;
                }
            }
            runs
        }
        "cartpole" => {
            let ics: &[(&str, f64, f64)] = &[
                ("cartpole_th02", 0.2, 0.0),
                ("cartpole_thm02", -0.2, 0.0),
                ("cartpole_th015_xd", 0.15, -0.5),
            ];
            ics.iter()
                .map(|(label, th0, xd0)| {
                    let mut c = RunConfig::new("cartpole", label)
                        .set("theta0", th0)
                        .set("xdot0", xd0);
                    c.guess = InitialGuess::PassiveRollout;
                    c.solver.mu0 = 200.0;
                    c.solver.complementarity_mode = crate::nlp::ProductMode::Inequality;
                    c.solver.aggressive_soc = true;
                    c
                })
                .collect()
        }
        "transport" => {
            let mut runs = vec![
                RunConfig::new("transport", "transport_mid"),
                RunConfig::new("transport", "transport_brake_left")
                    .set("x1_0", 3.4)
                    .set("v1_0", -4.0)
                    .set("v2_0", -4.0)
                    .set("x1_target", -0.35)
                    .set("v1_target", -2.0)
                    .set("v2_target", -2.0),
                RunConfig::new("transport", "transport_reposition_right")
                    .set("x1_0", 2.65)
                    .set("v1_0", 2.0)
                    .set("v2_0", 2.0)
                    .set("x1_target", 0.35),
            ];
            for c in &mut runs {
                // a softer initial penalty lets the slip structure form
                // before feasibility locks the no-slip local minimum in
                c.solver.mu0 = 1.0;
            }
            runs
        }
        "push_box" => (0..8)
            .map(|k| {
                let phi = k as f64 * std::f64::consts::FRAC_PI_4;
                RunConfig::new("push_box", &format!("push_box_k{k}")).set("target_angle", phi)
            })
            .collect(),
        "push_t" => {
            let mut runs = vec![
                RunConfig::new("push_t", "push_t_q1").set("target_angle", std::f64::consts::FRAC_PI_4),
                RunConfig::new("push_t", "push_t_q4")
                    .set("target_angle", -std::f64::consts::FRAC_PI_4),
            ];
            for c in &mut runs {
                c.guess = InitialGuess::PassiveRollout;
            }
            runs
        }
        "hopper" => {
            // the drop-and-stand rollout is feasible, so the solver spends
            // its iterations discovering the hop instead of repairing the
            // guess; the aggressive correction keeps the trust region open
            // through the stance-phase curvature
            let mut c = RunConfig::new("hopper", "hopper_1m");
            c.guess = InitialGuess::PassiveRollout;
            c.solver.aggressive_soc = true;
            vec![c]
        }
        "waiter" => vec![RunConfig::new("waiter", "waiter_edge")],
        other => {
            return Err(format!(
                "unknown suite '{other}' (expected one of {})",
                SUITE_NAMES.join(", ")
            ))
        }
    };
    Ok(runs)
}

/// Aggregate of a finished suite, mirroring the usual benchmark table
/// columns.
#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub suite: String,
    pub runs: usize,
    pub success_rate: f64,
    pub median_tracking_error: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_s: f64,
}

/// Runs a suite with up to `jobs` solves in flight. Per-run seeds derive from
/// `master_seed` + run index so re-runs are reproducible; outcomes come back
/// in suite order regardless of scheduling.
pub fn run_suite(
    suite: &str,
    jobs: usize,
    master_seed: u64,
    out_dir: Option<&Path>,
) -> Result<(Vec<RunOutcome>, BenchSummary), String> {
    let mut runs = suite_runs(suite)?;
    for (i, cfg) in runs.iter_mut().enumerate() {
        cfg.solver.seed = master_seed.wrapping_add(i as u64);
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    }
    let jobs = jobs.max(1).min(runs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunOutcome, String>>>> =
        runs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= runs.len() {
                    break;
                }
                let result = run_single(&runs[i], out_dir);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    let mut outcomes = Vec::with_capacity(runs.len());
    for slot in slots {
        outcomes.push(slot.into_inner().unwrap().unwrap()?);
    }
    let summary = summarize(suite, &outcomes);
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("runs.csv"), runs_csv(&outcomes)).map_err(|e| e.to_string())?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&summary).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let mut timing = String::from("label,wall_time_s\n");
        for o in &outcomes {
            let _ = writeln!(timing, "{},{}", o.label, fmt_f64(o.report.wall_time));
        }
        std::fs::write(dir.join("timing.csv"), timing).map_err(|e| e.to_string())?;
    }
    Ok((outcomes, summary))
}

fn summarize(suite: &str, outcomes: &[RunOutcome]) -> BenchSummary {
    let n = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.metrics.success).count();
    let mut errors: Vec<f64> = outcomes.iter().map(|o| o.metrics.tracking_error).collect();
    errors.sort_by(f64::total_cmp);
    let median = if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        errors[n / 2]
    } else {
        0.5 * (errors[n / 2 - 1] + errors[n / 2])
    };
    BenchSummary {
        suite: suite.to_string(),
        runs: n,
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        median_tracking_error: median,
        mean_iterations: outcomes.iter().map(|o| o.report.iterations as f64).sum::<f64>()
            / n.max(1) as f64,
        mean_wall_time_s: outcomes.iter().map(|o| o.report.wall_time).sum::<f64>()
            / n.max(1) as f64,
    }
}

/// One row per run; deterministic fields only (wall time is in timing.csv).
pub fn runs_csv(outcomes: &[RunOutcome]) -> String {
    let mut out = String::from(
        "label,status,iterations,objective,max_violation,tracking_error,\
         translation_error,translation_velocity_error,angle_error,angular_velocity_error,success\n",
    );
    for o in outcomes {
        let m = &o.metrics;
        let _ = writeln!(
            out,
            "{},{:?},{},{},{},{},{},{},{},{},{}",
            o.label,
            o.report.status,
            o.report.iterations,
            fmt_f64(o.report.objective),
            fmt_f64(o.report.max_violation),
            fmt_f64(m.tracking_error),
            fmt_f64(m.translation_error),
            fmt_f64(m.translation_velocity_error),
            fmt_f64(m.angle_error),
            fmt_f64(m.angular_velocity_error),
            m.success,
        );
    }
    out
}

pub fn summary_table(s: &BenchSummary) -> String {
    format!(
        "suite {}: {} runs | success rate {:.1}% | median tracking error {:.3e} | \
         mean iterations {:.1} | mean wall time {:.2}s",
        s.suite,
        s.runs,
        100.0 * s.success_rate,
        s.median_tracking_error,
        s.mean_iterations,
        s.mean_wall_time_s,
    )
}

/// Structural health checks for one problem: analytic derivatives against
/// finite differences at seeded random points, objective Hessian PSD via
/// factorization, and passive-rollout residuals on the dynamics rows.
pub fn check_problem(
    name: &str,
    params_toml: Option<&str>,
    overrides: &[(String, String)],
    verbose: bool,
) -> Result<(), String> {
    use crate::nlp::check_derivatives;
    use crate::sparse::LdltFactor;
    use rand::{Rng, SeedableRng};

    let def = problem_from_config(name, params_toml, overrides)?;
    // derivative checks are O(n^2) in the horizon; a short horizon exercises
    // every row template without the wait
    let mut short = overrides.to_vec();
    if !matches!(name, "toy_mpcc" | "cq_fail") && !overrides.iter().any(|(k, _)| k == "n_steps") {
        short.push(("n_steps".into(), "6".into()));
    }
    let small = problem_from_config(name, params_toml, &short)?;
    let problem = small
        .build(crate::nlp::ProductMode::Equality)
        .map_err(|e| e.to_string())?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for trial in 0..5 {
        let x: Vec<f64> = (0..problem.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let report = check_derivatives(&problem, &x, 1e-6);
        if verbose {
            println!(
                "derivatives trial {trial}: grad {:.2e} hess {:.2e} eq {:.2e} ineq {:.2e}",
                report.grad_max_rel_err,
                report.hess_max_rel_err,
                report.eq_jac_max_rel_err,
                report.ineq_jac_max_rel_err
            );
        }
        if !report.pass() {
            return Err(format!(
                "derivative check failed at trial {trial}: {:?}",
                report.failures
            ));
        }
    }

    // PSD check: shift by a tiny multiple of the largest diagonal entry so
    // structurally-zero columns factor, then require nonnegative pivots
    let hess = &problem.objective.hess;
    let mut max_diag = 0.0f64;
    let mut triplets = Vec::new();
    for (r, c, v) in hess.triplets() {
        if r == c {
            max_diag = max_diag.max(v.abs());
        }
        if r <= c {
            triplets.push((r, c, v));
        }
    }
    let shift = 1e-12 * (1.0 + max_diag);
    for j in 0..problem.n_vars {
        triplets.push((j, j, shift));
    }
    let upper = crate::sparse::CscMatrix::from_triplets(problem.n_vars, problem.n_vars, &triplets);
    let factor = LdltFactor::new(&upper).map_err(|e| format!("Hessian factorization: {e:?}"))?;
    if factor.min_pivot() < 0.0 {
        return Err(format!(
            "objective Hessian is not positive semidefinite (pivot {:.3e})",
            factor.min_pivot()
        ));
    }
    if verbose {
        println!("objective Hessian PSD (min pivot {:.3e})", factor.min_pivot());
    }

    // passive rollout must satisfy the dynamics equality rows; contact
    // product rows are the solver's job and are skipped by problems that
    // violate them at the rollout
    let full = def
        .build(crate::nlp::ProductMode::Equality)
        .map_err(|e| e.to_string())?;
    let x = def.initial_guess(&InitialGuess::PassiveRollout);
    let residuals = full.eval_eq(&x).map_err(|e| e.to_string())?;
    let worst = residuals
        .iter()
        .zip(&full.eq_rows)
        .filter(|(_, row)| !row.is_product)
        .fold(0.0f64, |a, (v, _)| a.max(v.abs()));
    if verbose {
        println!("passive rollout: worst equality residual {worst:.3e}");
    }
    if worst > 1e-8 {
        return Err(format!("passive rollout violates dynamics rows by {worst:.3e}"));
    }
    Ok(())
}

/// Default output directory: `$CRISP_OUT_DIR` or `./out`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("CRISP_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::toy_mpcc;

    #[test]
    fn success_requires_feasibility() {
        let params = crate::problems::CartpoleParams {
            n_steps: 3,
            ..Default::default()
        };
        let p = crate::problems::ProblemDef::build(&params, crate::nlp::ProductMode::Equality)
            .unwrap();
        let x = vec![0.0; p.n_vars];
        let criteria = SuccessCriteria::default();
        let good = evaluate_success(&p, &x, 0.0, &criteria);
        assert!(good.success, "{good:?}");
        let infeasible = evaluate_success(&p, &x, 1e-4, &criteria);
        assert!(!infeasible.success);
    }

    #[test]
    fn angle_threshold_is_conjunctive() {
        let params = crate::problems::CartpoleParams {
            n_steps: 3,
            ..Default::default()
        };
        let p = crate::problems::ProblemDef::build(&params, crate::nlp::ProductMode::Equality)
            .unwrap();
        let mut x = vec![0.0; p.n_vars];
        // slot 1 of the last step is the pole angle
        let layout = p.layout.as_ref().unwrap();
        x[(layout.horizon - 1) * layout.stride() + 1] = std::f64::consts::FRAC_PI_4;
        let rec = evaluate_success(&p, &x, 0.0, &SuccessCriteria::default());
        assert!(!rec.success);
        assert!((rec.angle_error - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn toy_problems_report_feasibility_only() {
        let p = toy_mpcc();
        let rec = evaluate_success(&p, &[0.3, 0.4], 0.0, &SuccessCriteria::default());
        assert!(rec.success);
        assert_eq!(rec.tracking_error, 0.0);
    }

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.1, -3.25e-17, 1.0 / 3.0, 123456.789] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn suites_are_well_formed() {
        for suite in SUITE_NAMES {
            let runs = suite_runs(suite).unwrap();
            assert!(!runs.is_empty(), "{suite}");
            let mut labels: Vec<&str> = runs.iter().map(|r| r.label.as_str()).collect();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), runs.len(), "duplicate labels in {suite}");
        }
        assert!(suite_runs("nope").is_err());
    }

    #[test]
    fn trajectory_csv_shape() {
        let traj = Trajectory {
            dt: 0.5,
            names: vec!["a".into(), "b".into()],
            steps: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        };
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time,a,b"));
        assert_eq!(csv.lines().count(), 3);
        let row: Vec<f64> = csv
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.5, 3.0, 4.0]);
    }

    #[test]
    fn toy_suite_runs_end_to_end() {
        let runs = suite_runs("toy").unwrap();
        let outcome = run_single(&runs[0], None).unwrap();
        assert_eq!(outcome.report.status, crate::solver::TerminationStatus::Success);
        assert!(outcome.metrics.success);
    }
}
