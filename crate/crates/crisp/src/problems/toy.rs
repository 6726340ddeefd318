//! The two analytical toy problems used throughout the tests.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{ComplementaritySpec, NlpError, NlpProblem, ProblemBuilder, ProductMode};
use serde::{Deserialize, Serialize};

/// min x1^2 + x2^2  s.t.  0 <= x1  perp  x2 >= 0. Global optimum at the
/// origin, where no constraint qualification holds.
pub fn toy_mpcc() -> NlpProblem {
    ToyMpccParams::default()
        .build(ProductMode::Equality)
        .expect("toy MPCC builds")
}

/// min x1  s.t.  x1^3 - x2 >= 0,  x1^3 + x2 >= 0. The optimum is the origin,
/// where the active gradients are (0, -1) and (0, 1): every linearization is
/// degenerate, so methods relying on constraint qualifications stall. The
/// l1 merit function for penalty mu has its stationary point at
/// x1 = -1/sqrt(6 mu).
pub fn cq_fail_toy() -> NlpProblem {
    CqFailParams::default()
        .build(ProductMode::Equality)
        .expect("CQ-fail toy builds")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyMpccParams {
    pub x0: f64,
    pub y0: f64,
}

impl Default for ToyMpccParams {
    fn default() -> Self {
        ToyMpccParams { x0: 1.0, y0: 1.0 }
    }
}

impl ProblemDef for ToyMpccParams {
    fn name(&self) -> &'static str {
        "toy_mpcc"
    }

    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError> {
        let mut b = ProblemBuilder::new(2);
        b.set_objective(vec![(0, 0, 2.0), (1, 1, 2.0)], vec![0.0, 0.0], 0.0);
        let i1 = b.add_inequality("x1_nonneg", ProblemBuilder::linear_expr(vec![(0, 1.0)], 0.0));
        let i2 = b.add_inequality("x2_nonneg", ProblemBuilder::linear_expr(vec![(1, 1.0)], 0.0));
        b.add_complementarity(
            "x1_perp_x2",
            ComplementaritySpec {
                lhs_index: i1,
                rhs_index: i2,
                product_mode: mode,
            },
        )?;
        b.build()
    }

    fn initial_guess(&self, guess: &InitialGuess) -> Vec<f64> {
        let mut x = match guess {
            InitialGuess::AllZero => vec![0.0, 0.0],
            _ => vec![self.x0, self.y0],
        };
        if let InitialGuess::NoisyRollout { seed, sigma } = guess {
            apply_noise(&mut x, *seed, *sigma);
        }
        x
    }

    fn params_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqFailParams {
    pub x0: f64,
    pub y0: f64,
}

impl Default for CqFailParams {
    fn default() -> Self {
        CqFailParams { x0: 1.0, y0: 0.5 }
    }
}

impl ProblemDef for CqFailParams {
    fn name(&self) -> &'static str {
        "cq_fail"
    }

    fn build(&self, _mode: ProductMode) -> Result<NlpProblem, NlpError> {
        let mut b = ProblemBuilder::new(2);
        b.set_objective(vec![], vec![1.0, 0.0], 0.0);
        b.add_inequality(
            "cubic_minus",
            ProblemBuilder::closure_expr(
                |x: &[f64]| x[0] * x[0] * x[0] - x[1],
                |x: &[f64], out: &mut Vec<(usize, f64)>| {
                    out.push((0, 3.0 * x[0] * x[0]));
                    out.push((1, -1.0));
                },
            ),
        );
        b.add_inequality(
            "cubic_plus",
            ProblemBuilder::closure_expr(
                |x: &[f64]| x[0] * x[0] * x[0] + x[1],
                |x: &[f64], out: &mut Vec<(usize, f64)>| {
                    out.push((0, 3.0 * x[0] * x[0]));
                    out.push((1, 1.0));
                },
            ),
        );
        b.build()
    }

    fn initial_guess(&self, guess: &InitialGuess) -> Vec<f64> {
        let mut x = match guess {
            InitialGuess::AllZero => vec![0.0, 0.0],
            _ => vec![self.x0, self.y0],
        };
        if let InitialGuess::NoisyRollout { seed, sigma } = guess {
            apply_noise(&mut x, *seed, *sigma);
        }
        x
    }

    fn params_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{check_derivatives, eval_merit, PenaltyVector};
    use crate::solver::{solve, SolverConfig};

    #[test]
    fn cq_fail_gradients_at_origin() {
        let p = cq_fail_toy();
        let j = p.jac_ineq(&[0.0, 0.0]).to_dense();
        assert_eq!(j[0], vec![0.0, -1.0]);
        assert_eq!(j[1], vec![0.0, 1.0]);
        assert!(p.constraint_violation(&[1.0, 0.0]).unwrap().max() == 0.0);
    }

    #[test]
    fn cq_fail_merit_stationary_point() {
        // closed form: x1 = -1/sqrt(6 mu) minimizes x1 + 2 mu max(0, -x1^3)
        let p = cq_fail_toy();
        let mu = PenaltyVector::uniform(0, 2, 10.0, 1e6);
        let star = -1.0 / 60.0f64.sqrt();
        let at = |x1: f64| eval_merit(&p, &[x1, 0.0], &mu).unwrap();
        assert!(at(star) < at(star + 1e-4));
        assert!(at(star) < at(star - 1e-4));
    }

    #[test]
    fn cq_fail_solver_finds_merit_stationary_point() {
        let p = cq_fail_toy();
        let config = SolverConfig {
            penalty_updates_enabled: false,
            eps_p: 1e-8,
            eps_r: 1e-8,
            pred_stall_rel: 1e-12,
            ..SolverConfig::default()
        };
        let star = -1.0 / 60.0f64.sqrt();
        for x0 in [[1.0, 0.5], [0.5, -0.3], [-0.2, 0.1], [2.0, 1.0], [-1.0, -1.0]] {
            let r = solve(&p, &x0, &config).unwrap();
            assert!(
                (r.x[0] - star).abs() <= 1e-4,
                "from {x0:?}: x1 = {} vs {star}",
                r.x[0]
            );
        }
    }

    #[test]
    fn cq_fail_full_algorithm_drives_x_to_zero() {
        let p = cq_fail_toy();
        // the cubic constraint residual |x1|^3 shrinks much faster than x1
        // itself, so a loose feasibility tolerance would declare success at a
        // moderate penalty; tighten eps_c to keep the escalation going until
        // mu reaches its cap
        let config = SolverConfig {
            eps_p: 1e-6,
            eps_r: 1e-6,
            eps_c: 1e-10,
            ..SolverConfig::default()
        };
        let r = solve(&p, &[1.0, 0.5], &config).unwrap();
        let bound = 1.0 / (6e6f64).sqrt() + 1e-4;
        assert!(r.x[0].abs() <= bound, "x1 = {}", r.x[0]);
        assert!(r.max_violation < 1e-6);
    }

    #[test]
    fn toy_derivatives() {
        for p in [toy_mpcc(), cq_fail_toy()] {
            let r = check_derivatives(&p, &[0.37, -0.52], 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }
}
