#![allow(dead_code)]

//! Randomized structural properties of the subproblem construction, the
//! solver loop invariants, and the problem library. Each property runs at
//! least 100 randomized cases and needs no benchmark-scale solves.

use crisp::nlp::{eval_merit, NlpProblem, PenaltyVector, ProductMode};
use crisp::problems::{
    decode_trajectory, encode_trajectory, problem_from_config, InitialGuess, ProblemDef,
};
use crisp::qp::solve_qp;
use crisp::solver::{solve, SolverConfig};
use crisp::subproblem::{apply_second_order_correction, build_subproblem, model_value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shipped problems at short horizons: every row template is exercised
/// without benchmark-size matrices.
fn small_problems() -> Vec<(String, Box<dyn ProblemDef>, NlpProblem)> {
    let trajectory = ["cartpole", "push_box", "transport", "push_t", "hopper", "waiter"];
    let mut out = Vec::new();
    for name in ["toy_mpcc", "cq_fail"] {
        let def = problem_from_config(name, None, &[]).unwrap();
        let p = def.build(ProductMode::Equality).unwrap();
        out.push((name.to_string(), def, p));
    }
    for name in trajectory {
        let overrides = vec![("n_steps".to_string(), "4".to_string())];
        let def = problem_from_config(name, None, &overrides).unwrap();
        let p = def.build(ProductMode::Equality).unwrap();
        out.push((name.to_string(), def, p));
    }
    out
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

struct Case {
    name: String,
    problem: NlpProblem,
    x: Vec<f64>,
    mu: PenaltyVector,
    delta: f64,
}

fn random_cases(count_per_problem: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut cases = Vec::new();
    for (name, _, problem) in small_problems() {
        for _ in 0..count_per_problem {
            let x = random_point(&mut rng, problem.n_vars);
            let mu0 = rng.gen_range(0.5..50.0);
            let mu = PenaltyVector::uniform(problem.n_eq(), problem.n_ineq(), mu0, 1e6);
            let delta = rng.gen_range(0.1..2.0);
            cases.push(Case {
                name: name.clone(),
                problem: problem.clone(),
                x,
                mu,
                delta,
            });
        }
    }
    cases
}


pub fn canonical_point_is_feasible() {
    let cases = random_cases(15); // 8 problems x 15 = 120
    assert!(cases.len() >= 100);
    for case in &cases {
        let qp = build_subproblem(&case.problem, &case.x, &case.mu, case.delta, 0.0).unwrap();
        let z = qp.canonical_point();
        let eq = qp.a_eq.matvec(&z);
        for (i, (lhs, rhs)) in eq.iter().zip(&qp.b_eq).enumerate() {
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            assert!(
                (lhs - rhs).abs() <= 1e-12 * scale,
                "{}: eq row {i}: {lhs} vs {rhs}",
                case.name
            );
        }
        let ineq = qp.a_ineq.matvec(&z);
        for (i, (lhs, rhs)) in ineq.iter().zip(&qp.b_ineq).enumerate() {
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            assert!(
                *lhs >= rhs - 1e-12 * scale,
                "{}: ineq row {i}: {lhs} < {rhs}",
                case.name
            );
        }
        for (j, v) in z.iter().enumerate() {
            assert!(
                *v >= qp.lb[j] - 1e-12 && *v <= qp.ub[j] + 1e-12,
                "{}: bound {j}",
                case.name
            );
        }
    }
}


pub fn model_at_zero_equals_merit() {
    let cases = random_cases(15);
    assert!(cases.len() >= 100);
    for case in &cases {
        let qp = build_subproblem(&case.problem, &case.x, &case.mu, case.delta, 0.0).unwrap();
        let merit = eval_merit(&case.problem, &case.x, &case.mu).unwrap();
        let model0 = model_value(&qp, &case.mu, &vec![0.0; case.problem.n_vars]);
        assert!(
            (merit - model0).abs() <= 1e-10 * (1.0 + merit.abs()),
            "{}: merit {merit} vs model(0) {model0}",
            case.name
        );
    }
}


pub fn predicted_reduction_is_nonnegative_and_step_in_bounds() {
    let cases = random_cases(13); // 104
    assert!(cases.len() >= 100);
    for case in &cases {
        let qp = build_subproblem(&case.problem, &case.x, &case.mu, case.delta, 0.0).unwrap();
        let sol = solve_qp(&qp, 1e-8, None).unwrap();
        let n = case.problem.n_vars;
        let p = &sol.z[..n];
        // the trust region is a hard bound on the step
        for (j, v) in p.iter().enumerate() {
            assert!(
                v.abs() <= case.delta * (1.0 + 1e-6) + 1e-9,
                "{}: step coordinate {j} = {v} exceeds delta {}",
                case.name,
                case.delta
            );
        }
        // the canonical point is feasible with model value = merit, so the
        // minimizer can never predict an increase
        let pred = model_value(&qp, &case.mu, &vec![0.0; n]) - model_value(&qp, &case.mu, p);
        assert!(pred >= -1e-8 * (1.0 + pred.abs()), "{}: pred {pred}", case.name);
    }
}


pub fn soc_model_is_exact_on_quadratic_constraints() {
    // the toys have a quadratic objective and degree-<=2 constraint rows
    // (products of linear expressions), so the corrected model evaluated at
    // the step must reproduce the true merit at x + p exactly
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for name in ["toy_mpcc", "cq_fail"] {
        let def = problem_from_config(name, None, &[]).unwrap();
        let problem = def.build(ProductMode::Equality).unwrap();
        for _ in 0..60 {
            let x = random_point(&mut rng, problem.n_vars);
            let mu = PenaltyVector::uniform(problem.n_eq(), problem.n_ineq(), 10.0, 1e6);
            let p = random_point(&mut rng, problem.n_vars);
            let mut qp = build_subproblem(&problem, &x, &mu, 2.0, 0.0).unwrap();
            apply_second_order_correction(&mut qp, &problem, &x, &p).unwrap();
            let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
            let merit_xp = eval_merit(&problem, &xp, &mu).unwrap();
            let model_p = model_value(&qp, &mu, &p);
            assert!(
                (merit_xp - model_p).abs() <= 1e-9 * (1.0 + merit_xp.abs()),
                "{name}: merit(x+p) {merit_xp} vs corrected model(p) {model_p}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 100);
}

/// Solver loop invariants read off the iteration trace: merit never
/// increases between penalty bumps, the penalty scale never decreases, and
/// accepted steps respect the trust region.

pub fn solver_trace_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut comparisons = 0;
    let mut configs: Vec<(String, Vec<(String, String)>, InitialGuess)> = Vec::new();
    for i in 0..35 {
        let x0 = rng.gen_range(-2.0..2.0);
        let y0 = rng.gen_range(-2.0..2.0);
        let name = if i % 2 == 0 { "toy_mpcc" } else { "cq_fail" };
        configs.push((
            name.to_string(),
            vec![("x0".into(), x0.to_string()), ("y0".into(), y0.to_string())],
            InitialGuess::AllZero,
        ));
    }
    for name in ["cartpole", "transport", "waiter"] {
        configs.push((
            name.to_string(),
            vec![("n_steps".into(), "5".into())],
            InitialGuess::PassiveRollout,
        ));
    }
    for (name, overrides, guess) in configs {
        let def = problem_from_config(&name, None, &overrides).unwrap();
        let problem = def.build(ProductMode::Equality).unwrap();
        let x0 = def.initial_guess(&guess);
        let config = SolverConfig {
            max_iters: 60,
            certificate_dirs: 0,
            ..SolverConfig::default()
        };
        let report = solve(&problem, &x0, &config).unwrap();
        for pair in report.trace.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            comparisons += 1;
            assert!(
                b.mu_max_entry >= a.mu_max_entry,
                "{name}: penalty decreased at iter {}",
                b.iter
            );
            if !a.penalty_bumped {
                assert!(
                    b.merit <= a.merit + 1e-10 * (1.0 + a.merit.abs()),
                    "{name}: merit rose from {} to {} at iter {}",
                    a.merit,
                    b.merit,
                    b.iter
                );
            }
        }
        // rec.delta is the radius after the update, so each step is bounded
        // by the previous record's delta (the first by delta0)
        let mut radius = config.delta0;
        for rec in &report.trace {
            assert!(
                rec.step_norm_inf <= radius * (1.0 + 1e-9) + 1e-12,
                "{name}: step {} exceeds delta {} at iter {}",
                rec.step_norm_inf,
                radius,
                rec.iter
            );
            radius = rec.delta;
        }
    }
    assert!(comparisons >= 100, "only {comparisons} trace comparisons");
}


pub fn derivative_checks_across_problems() {
    use crisp::nlp::check_derivatives;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for (name, _, problem) in small_problems() {
        for _ in 0..13 {
            let x = random_point(&mut rng, problem.n_vars);
            let report = check_derivatives(&problem, &x, 1e-6);
            assert!(
                report.pass() && report.max_rel_err() < 1e-4,
                "{name}: {:?}",
                report.failures
            );
            checked += 1;
        }
    }
    assert!(checked >= 100);
}


pub fn trajectory_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    for (name, _, problem) in small_problems() {
        if problem.layout.is_none() {
            continue; // the toys have no trajectory structure
        }
        for _ in 0..20 {
            let x = random_point(&mut rng, problem.n_vars);
            let traj = decode_trajectory(&problem, &x).unwrap();
            assert_eq!(encode_trajectory(&traj), x, "{name}");
            checked += 1;
        }
    }
    assert!(checked >= 100);
}
