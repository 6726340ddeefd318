//! The outer trust-region loop on the exact l1 penalty merit function.

use crate::nlp::{eval_merit, NlpError, NlpProblem, PenaltyVector, ProductMode};
use crate::qp::{solve_qp, solve_qp_oracle, QpData, QpError, QpSolution};
use crate::subproblem::{apply_second_order_correction, build_subproblem, model_value};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Threshold below which the predicted reduction counts as zero: the model
/// sees no descent direction inside the trust region.
pub const PRED_ZERO: f64 = 1e-14;

/// Default for [`SolverConfig::pred_stall_rel`].
pub const PRED_STALL_REL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("problem evaluation failed: {0}")]
    Nlp(#[from] NlpError),
    #[error("QP setup failed: {0}")]
    Qp(#[from] QpError),
}

/// Which subproblem solver to use. The enumeration oracle is only viable on
/// toy problems but lets tests cross-check the whole outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpBackend {
    Reference,
    Oracle,
}

impl std::str::FromStr for QpBackend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" => Ok(QpBackend::Reference),
            "oracle" => Ok(QpBackend::Oracle),
            other => Err(format!("unknown QP backend '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub delta0: f64,
    pub delta_max: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub eta_low: f64,
    pub eta_high: f64,
    pub gamma_shrink: f64,
    pub gamma_expand: f64,
    /// feasibility tolerance
    pub eps_c: f64,
    /// step-size convergence tolerance
    pub eps_p: f64,
    /// trust-radius convergence tolerance
    pub eps_r: f64,
    pub qp_tol: f64,
    /// The subproblem's predicted reduction is itself a stationarity
    /// certificate for the current merit function: when it falls below this
    /// fraction of the merit scale the iterate is treated as merit-converged,
    /// even though the l-infinity trust region may still produce
    /// boundary-length steps (which keeps the small-step test from firing).
    /// Tighten it to chase stationary points to higher accuracy.
    pub pred_stall_rel: f64,
    /// grow each violated row's penalty tenfold (capped) when the loop
    /// converges infeasibly; disable to study the merit function for fixed mu
    pub penalty_updates_enabled: bool,
    /// restore the initial trust radius after a penalty bump
    pub trust_reset_on_penalty_bump: bool,
    /// apply the second-order correction whenever the reduction ratio falls
    /// below `eta_high`, not only when the step increases the merit; costs an
    /// extra (warm-started) QP solve on those iterations but lets the trust
    /// region stay large on curved constraint manifolds
    pub aggressive_soc: bool,
    /// random directions sampled for the stationarity certificate (0 skips
    /// the certificate; the coordinate axes are always added on top)
    pub certificate_dirs: usize,
    pub certificate_fd_step: f64,
    pub seed: u64,
    pub qp_backend: QpBackend,
    /// how problem builders expand complementarity pairs: a*b = 0 or a*b <= 0
    pub complementarity_mode: ProductMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 1000,
            delta0: 1.0,
            delta_max: 10.0,
            mu0: 10.0,
            mu_max: 1e6,
            eta_low: 0.25,
            eta_high: 0.75,
            gamma_shrink: 0.25,
            gamma_expand: 2.0,
            eps_c: 1e-6,
            eps_p: 1e-3,
            eps_r: 1e-3,
            qp_tol: 1e-8,
            pred_stall_rel: PRED_STALL_REL,
            penalty_updates_enabled: true,
            trust_reset_on_penalty_bump: true,
            aggressive_soc: false,
            certificate_dirs: 64,
            certificate_fd_step: 1e-5,
            seed: 0,
            qp_backend: QpBackend::Reference,
            complementarity_mode: ProductMode::Equality,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminationStatus {
    /// converged with feasible constraints
    Success,
    /// converged infeasibly with some violated row already at mu_max
    PenaltyMaxOut,
    /// converged infeasibly with penalty updates disabled
    MeritStationary,
    MaxIterations,
    /// the QP backend failed even after a regularized retry
    QpFailure,
    Cancelled,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub merit: f64,
    pub objective: f64,
    pub max_violation: f64,
    /// trust radius after this iteration's update (the next QP's radius)
    pub delta: f64,
    pub rho: Option<f64>,
    pub step_norm_inf: f64,
    pub soc_used: bool,
    pub accepted: bool,
    pub penalty_bumped: bool,
    pub mu_max_entry: f64,
    pub qp_iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationarityCertificate {
    /// smallest one-sided directional derivative of the merit function over
    /// the sampled directions; nonnegative (up to tolerance) at a local
    /// minimizer
    pub min_directional_derivative: f64,
    pub n_directions: usize,
    pub fd_step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: TerminationStatus,
    pub x: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub merit: f64,
    pub max_violation: f64,
    pub final_delta: f64,
    pub mu_max_entry: f64,
    pub certificate: Option<StationarityCertificate>,
    pub wall_time: f64,
    pub trace: Vec<IterRecord>,
}

/// Ratio of actual to predicted merit reduction; `None` when the model
/// predicts no progress, which the caller treats as local convergence.
pub fn reduction_ratio(ared: f64, pred: f64) -> Option<f64> {
    if pred < PRED_ZERO {
        None
    } else {
        Some(ared / pred)
    }
}

pub fn solve(
    problem: &NlpProblem,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    solve_with_callback(problem, x0, config, &mut |_| true)
}

/// As `solve`, invoking `progress` after every iteration; returning `false`
/// cancels the run.
pub fn solve_with_callback(
    problem: &NlpProblem,
    x0: &[f64],
    config: &SolverConfig,
    progress: &mut dyn FnMut(&IterRecord) -> bool,
) -> Result<SolveReport, SolveError> {
    let n = problem.n_vars;
    assert_eq!(x0.len(), n, "initial point has wrong dimension");
    let mut x = x0.to_vec();
    let mut mu = PenaltyVector::uniform(problem.n_eq(), problem.n_ineq(), config.mu0, config.mu_max);
    let mut delta = config.delta0;
    let mut trace: Vec<IterRecord> = Vec::new();
    let mut warm: Option<QpSolution> = None;
    let mut status = TerminationStatus::MaxIterations;
    let mut iters_done = config.max_iters;
    let start = std::time::Instant::now();

    let run_qp = |qp: &QpData, warm: Option<&QpSolution>| match config.qp_backend {
        QpBackend::Reference => solve_qp(qp, config.qp_tol, warm),
        QpBackend::Oracle => solve_qp_oracle(qp),
    };

    'outer: for iter in 0..config.max_iters {
        let mut qp = build_subproblem(problem, &x, &mu, delta, 0.0)?;
        let sol = match run_qp(&qp, warm.as_ref()) {
            Ok(s) => s,
            Err(QpError::NumericalFailure) => {
                // regularized retry on the step block
                let qp2 = build_subproblem(problem, &x, &mu, delta, 1e-9)?;
                match run_qp(&qp2, None) {
                    Ok(s) => {
                        qp = qp2;
                        s
                    }
                    Err(_) => {
                        status = TerminationStatus::QpFailure;
                        iters_done = iter + 1;
                        break 'outer;
                    }
                }
            }
            Err(e) => return Err(e.into()),
        };
        let p: Vec<f64> = sol.z[..n].to_vec();
        let step_inf = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let qp_iterations = sol.iterations;

        let merit_x = eval_merit(problem, &x, &mu)?;
        let mut pred = model_value(&qp, &mu, &vec![0.0; n]) - model_value(&qp, &mu, &p);
        let mut rho = None;
        let mut soc_used = false;
        let mut accepted = false;
        let mut step = p;

        if pred >= PRED_ZERO {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let mut ared = merit_x - eval_merit(problem, &trial, &mu)?;
            let want_soc = ared < 0.0 || (config.aggressive_soc && ared < config.eta_high * pred);
            if want_soc {
                // second-order correction: re-solve with corrected constants
                soc_used = true;
                apply_second_order_correction(&mut qp, problem, &x, &step)?;
                if let Ok(sol2) = run_qp(&qp, Some(&sol)) {
                    let p2: Vec<f64> = sol2.z[..n].to_vec();
                    let pred2 =
                        model_value(&qp, &mu, &vec![0.0; n]) - model_value(&qp, &mu, &p2);
                    let trial2: Vec<f64> = x.iter().zip(&p2).map(|(a, b)| a + b).collect();
                    let ared2 = merit_x - eval_merit(problem, &trial2, &mu)?;
                    let better = if ared < 0.0 {
                        ared2 >= 0.0
                    } else {
                        ared2 > ared && reduction_ratio(ared2, pred2) > reduction_ratio(ared, pred)
                    };
                    if better && pred2 >= PRED_ZERO {
                        step = p2;
                        pred = pred2;
                        ared = ared2;
                    }
                    warm = Some(sol2);
                } else {
                    warm = Some(sol);
                }
            } else {
                warm = Some(sol);
            }

            if ared >= 0.0 {
                rho = reduction_ratio(ared, pred);
                let r = rho.unwrap_or(f64::INFINITY);
                accepted = true;
                for (xi, pi) in x.iter_mut().zip(&step) {
                    *xi += pi;
                }
                let moved_inf = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if r < config.eta_low {
                    delta *= config.gamma_shrink;
                } else if r > config.eta_high && moved_inf >= delta - 1e-9 {
                    delta = (config.gamma_expand * delta).min(config.delta_max);
                }
            } else {
                // both the raw and the corrected step increase the merit
                delta *= config.gamma_shrink;
            }
        } else {
            warm = Some(sol);
        }

        let viol = problem.constraint_violation(&x)?;
        let merit_now = eval_merit(problem, &x, &mu)?;
        let stalled = pred < config.pred_stall_rel * (1.0 + merit_x.abs());
        let mut penalty_bumped = false;
        let mut stop: Option<TerminationStatus> = None;
        if delta < config.eps_r || step_inf < config.eps_p || pred < PRED_ZERO || stalled {
            if viol.max() < config.eps_c {
                stop = Some(TerminationStatus::Success);
            } else if !config.penalty_updates_enabled {
                stop = Some(TerminationStatus::MeritStationary);
            } else {
                let mut maxed = false;
                for (i, v) in viol.per_row.iter().enumerate() {
                    if *v >= config.eps_c {
                        let slot = if i < problem.n_eq() {
                            &mut mu.mu_eq[i]
                        } else {
                            &mut mu.mu_ineq[i - problem.n_eq()]
                        };
                        if *slot >= config.mu_max {
                            maxed = true;
                        } else {
                            *slot = (10.0 * *slot).min(config.mu_max);
                            penalty_bumped = true;
                        }
                    }
                }
                if maxed {
                    stop = Some(TerminationStatus::PenaltyMaxOut);
                } else {
                    if config.trust_reset_on_penalty_bump {
                        delta = config.delta0;
                    }
                    warm = None;
                }
            }
        }

        let record = IterRecord {
            iter,
            merit: merit_now,
            objective: problem.objective.value(&x),
            max_violation: viol.max(),
            delta,
            rho,
            step_norm_inf: step_inf,
            soc_used,
            accepted,
            penalty_bumped,
            mu_max_entry: mu.max_entry(),
            qp_iterations,
        };
        let keep_going = progress(&record);
        trace.push(record);
        if let Some(s) = stop {
            status = s;
            iters_done = iter + 1;
            break 'outer;
        }
        if !keep_going {
            status = TerminationStatus::Cancelled;
            iters_done = iter + 1;
            break 'outer;
        }
    }

    let viol = problem.constraint_violation(&x)?;
    let certificate = if config.certificate_dirs > 0
        && matches!(
            status,
            TerminationStatus::Success | TerminationStatus::MeritStationary
        ) {
        Some(stationarity_certificate(
            problem,
            &x,
            &mu,
            config.certificate_dirs,
            config.certificate_fd_step,
            config.seed,
        )?)
    } else {
        None
    };

    Ok(SolveReport {
        status,
        objective: problem.objective.value(&x),
        merit: eval_merit(problem, &x, &mu)?,
        max_violation: viol.max(),
        final_delta: delta,
        mu_max_entry: mu.max_entry(),
        certificate,
        iterations: iters_done,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        x,
    })
}

/// Samples one-sided finite differences of the merit function along random
/// unit directions and both signs of every coordinate axis, returning the
/// smallest directional derivative seen. A clearly negative value disproves
/// local optimality of the merit function; values near zero support it.
pub fn stationarity_certificate(
    problem: &NlpProblem,
    x: &[f64],
    mu: &PenaltyVector,
    n_dirs: usize,
    fd_step: f64,
    seed: u64,
) -> Result<StationarityCertificate, SolveError> {
    let n = problem.n_vars;
    let base = eval_merit(problem, x, mu)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1ab1e);
    let mut min_dd = f64::INFINITY;
    let mut count = 0usize;
    let mut probe = |dir: &[f64]| -> Result<(), SolveError> {
        let xp: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + fd_step * d).collect();
        let dd = (eval_merit(problem, &xp, mu)? - base) / fd_step;
        min_dd = min_dd.min(dd);
        count += 1;
        Ok(())
    };
    for _ in 0..n_dirs {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for v in d.iter_mut() {
            *v /= norm;
        }
        probe(&d)?;
    }
    let mut axis = vec![0.0; n];
    for j in 0..n {
        axis[j] = 1.0;
        probe(&axis)?;
        axis[j] = -1.0;
        probe(&axis)?;
        axis[j] = 0.0;
    }
    Ok(StationarityCertificate {
        min_directional_derivative: min_dd,
        n_directions: count,
        fd_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{ComplementaritySpec, ProblemBuilder, ProductMode};

    fn toy_mpcc() -> NlpProblem {
        let mut b = ProblemBuilder::new(2);
        b.set_objective(vec![(0, 0, 2.0), (1, 1, 2.0)], vec![0.0, 0.0], 0.0);
        let i1 = b.add_inequality("x1", ProblemBuilder::linear_expr(vec![(0, 1.0)], 0.0));
        let i2 = b.add_inequality("x2", ProblemBuilder::linear_expr(vec![(1, 1.0)], 0.0));
        b.add_complementarity(
            "pair",
            ComplementaritySpec {
                lhs_index: i1,
                rhs_index: i2,
                product_mode: ProductMode::Equality,
            },
        )
        .unwrap();
        b.build().unwrap()
    }

    #[test]
    fn toy_mpcc_converges_to_origin() {
        let p = toy_mpcc();
        // step and stall tolerances well below the 1e-4 accuracy we assert on
        let config = SolverConfig {
            eps_p: 1e-6,
            eps_r: 1e-6,
            pred_stall_rel: 1e-9,
            ..SolverConfig::default()
        };
        for x0 in [[1.0, 1.0], [2.0, 0.5], [-1.0, 3.0]] {
            let r = solve(&p, &x0, &config).unwrap();
            assert_eq!(r.status, TerminationStatus::Success, "from {x0:?}");
            let norm = (r.x[0] * r.x[0] + r.x[1] * r.x[1]).sqrt();
            assert!(norm <= 1e-4, "from {x0:?}: |x| = {norm}");
            assert!(r.max_violation < 1e-6);
            let cert = r.certificate.unwrap();
            assert!(cert.min_directional_derivative >= -1e-3);
        }
    }

    #[test]
    fn merit_is_monotone_between_penalty_bumps() {
        let p = toy_mpcc();
        let r = solve(&p, &[2.0, 0.5], &SolverConfig::default()).unwrap();
        let mut prev: Option<f64> = None;
        for rec in &r.trace {
            if let Some(m) = prev {
                assert!(rec.merit <= m + 1e-10, "iter {}: {} > {}", rec.iter, rec.merit, m);
            }
            prev = if rec.penalty_bumped { None } else { Some(rec.merit) };
        }
    }

    #[test]
    fn trust_region_stays_within_bounds() {
        let p = toy_mpcc();
        let config = SolverConfig::default();
        let r = solve(&p, &[-1.0, 3.0], &config).unwrap();
        for rec in &r.trace {
            assert!(rec.delta <= config.delta_max + 1e-12);
            assert!(rec.step_norm_inf <= config.delta_max + 1e-9);
        }
    }

    #[test]
    fn cancellation_stops_the_loop() {
        let p = toy_mpcc();
        let mut calls = 0;
        let r = solve_with_callback(&p, &[2.0, 0.5], &SolverConfig::default(), &mut |_| {
            calls += 1;
            calls < 2
        })
        .unwrap();
        assert_eq!(r.status, TerminationStatus::Cancelled);
        assert_eq!(r.iterations, 2);
    }
}
