//! Plate extraction ("waiter") task with stick/slip friction.
//!
//! A long plate (body 1) sits under a table lip with a short overhang; an
//! actuated pusher (body 2) presses down on the overhang and drags the plate
//! out. Both friction interfaces (plate-on-table and pusher-on-plate) use
//! complementarity-based Coulomb models with velocity slack splits, and a
//! tipping constraint limits how much pusher force the overhang can take.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaiterParams {
    pub n_steps: usize,
    pub dt: f64,
    pub m1: f64,
    pub m2: f64,
    /// plate-table and pusher-plate friction coefficients
    pub mu1: f64,
    pub mu2: f64,
    pub g: f64,
    /// plate half-length; the table edge sits at x = 0
    pub l0: f64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub x1_target: f64,
    pub x2_target: f64,
    pub v_target: f64,
    pub r_u: f64,
    pub q_pos: f64,
    pub q_vel: f64,
}

impl Default for WaiterParams {
    fn default() -> Self {
        WaiterParams {
            n_steps: 200,
            dt: 0.02,
            m1: 1.0,
            m2: 1.0,
            mu1: 0.1,
            mu2: 0.9,
            g: 9.81,
            l0: 7.0,
            x1_0: -6.0,
            x2_0: 0.5,
            x1_target: 0.5,
            x2_target: 0.5,
            v_target: 2.0,
            r_u: 0.01,
            q_pos: 100.0,
            q_vel: 10.0,
        }
    }
}

const X1: usize = 0;
const X2: usize = 1;
const V1: usize = 2;
const V2: usize = 3;
const Z: usize = 4;
const W: usize = 5;
const P: usize = 6;
const Q: usize = 7;
const LN: usize = 8;
const U: usize = 9;
const FP: usize = 10;
const FT: usize = 11;
const FN: usize = 12;
const STRIDE: usize = 13;

impl ProblemDef for WaiterParams {
    fn name(&self) -> &'static str {
        "waiter"
    }

    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError> {
        if self.n_steps < 2 || self.dt <= 0.0 {
            return Err(NlpError::SpecError("n_steps >= 2 and dt > 0 required".into()));
        }
        let spec = |name: &str, role: VarRole| VarSpec {
            name: name.to_string(),
            role,
        };
        let layout = VariableLayout {
            horizon: self.n_steps,
            dt: self.dt,
            per_step: vec![
                spec("x1", VarRole::State),
                spec("x2", VarRole::State),
                spec("v1", VarRole::State),
                spec("v2", VarRole::State),
                spec("z", VarRole::State),
                spec("w", VarRole::State),
                spec("p", VarRole::State),
                spec("q", VarRole::State),
                spec("lambda_n", VarRole::Force),
                spec("u", VarRole::Control),
                spec("f_push", VarRole::Force),
                spec("f_table", VarRole::Force),
                spec("n_table", VarRole::Force),
            ],
        };
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let dt = self.dt;
        let (m1, m2, g, l0) = (self.m1, self.m2, self.g, self.l0);

        for (slot, value) in [(X1, self.x1_0), (X2, self.x2_0), (V1, 0.0), (V2, 0.0)] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            b.add_equality(
                format!("dyn_plate[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i + 1, V1), m1 / dt),
                        (at(i, V1), -m1 / dt),
                        (at(i, FP), -1.0),
                        (at(i, FT), 1.0),
                    ],
                    0.0,
                ),
            );
            b.add_equality(
                format!("dyn_pusher[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i + 1, V2), m2 / dt),
                        (at(i, V2), -m2 / dt),
                        (at(i, U), -1.0),
                        (at(i, FP), 1.0),
                    ],
                    0.0,
                ),
            );
            b.add_equality(
                format!("pos_plate[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i + 1, X1), 1.0), (at(i, X1), -1.0), (at(i + 1, V1), -dt)],
                    0.0,
                ),
            );
            b.add_equality(
                format!("pos_pusher[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i + 1, X2), 1.0), (at(i, X2), -1.0), (at(i + 1, V2), -dt)],
                    0.0,
                ),
            );
        }

        for i in 0..self.n_steps {
            let (x1i, x2i, lni) = (at(i, X1), at(i, X2), at(i, LN));
            // the table carries the plate weight not taken by the pusher
            b.add_equality(
                format!("normal_balance[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i, FN), 1.0), (lni, 1.0)],
                    -m1 * g,
                ),
            );
            // slack splits of the two sliding velocities
            b.add_equality(
                format!("slip_plate[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i, V1), 1.0), (at(i, Z), -1.0), (at(i, W), 1.0)],
                    0.0,
                ),
            );
            b.add_equality(
                format!("slip_pusher[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i, V2), 1.0),
                        (at(i, V1), -1.0),
                        (at(i, P), -1.0),
                        (at(i, Q), 1.0),
                    ],
                    0.0,
                ),
            );

            let z_row = b.add_inequality(
                format!("z_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, Z), 1.0)], 0.0),
            );
            let w_row = b.add_inequality(
                format!("w_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, W), 1.0)], 0.0),
            );
            let p_row = b.add_inequality(
                format!("p_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, P), 1.0)], 0.0),
            );
            let q_row = b.add_inequality(
                format!("q_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, Q), 1.0)], 0.0),
            );
            b.add_inequality(
                format!("table_normal_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, FN), 1.0)], 0.0),
            );
            b.add_inequality(
                format!("pusher_normal_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(lni, 1.0)], 0.0),
            );
            // the pusher stays on the overhang (x >= 0) and on the plate
            b.add_inequality(
                format!("pusher_past_edge[{i}]"),
                ProblemBuilder::linear_expr(vec![(x2i, 1.0)], 0.0),
            );
            b.add_inequality(
                format!("pusher_on_plate[{i}]"),
                ProblemBuilder::linear_expr(vec![(x2i, -1.0), (x1i, 1.0)], l0),
            );
            // pressing far beyond the edge would tip the plate
            b.add_inequality(
                format!("no_tipping[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| m1 * g * l0 - x[lni] * (x[x2i] - x[x1i] + l0),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((lni, -(x[x2i] - x[x1i] + l0)));
                        out.push((x2i, -x[lni]));
                        out.push((x1i, x[lni]));
                    },
                ),
            );

            // friction cone faces, each complementary to the matching slip
            // direction slack
            let t_hi = b.add_inequality(
                format!("table_cone_hi[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, FN), self.mu1), (at(i, FT), -1.0)], 0.0),
            );
            let t_lo = b.add_inequality(
                format!("table_cone_lo[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, FN), self.mu1), (at(i, FT), 1.0)], 0.0),
            );
            let p_hi = b.add_inequality(
                format!("pusher_cone_hi[{i}]"),
                ProblemBuilder::linear_expr(vec![(lni, self.mu2), (at(i, FP), -1.0)], 0.0),
            );
            let p_lo = b.add_inequality(
                format!("pusher_cone_lo[{i}]"),
                ProblemBuilder::linear_expr(vec![(lni, self.mu2), (at(i, FP), 1.0)], 0.0),
            );

            for (label, lhs, rhs) in [
                ("stick_plate", z_row, w_row),
                ("stick_pusher", p_row, q_row),
                ("table_slip_hi", z_row, t_hi),
                ("table_slip_lo", w_row, t_lo),
                ("pusher_slip_hi", p_row, p_hi),
                ("pusher_slip_lo", q_row, p_lo),
            ] {
                b.add_complementarity(
                    format!("{label}[{i}]"),
                    ComplementaritySpec {
                        lhs_index: lhs,
                        rhs_index: rhs,
                        product_mode: mode,
                    },
                )?;
            }
        }

        let mut hess = Vec::new();
        for i in 0..self.n_steps {
            hess.push((at(i, U), at(i, U), 2.0 * self.r_u));
        }
        let last = self.n_steps - 1;
        let targets = [
            (X1, self.q_pos, self.x1_target, MetricGroup::Translation),
            (X2, self.q_pos, self.x2_target, MetricGroup::Translation),
            (V1, self.q_vel, self.v_target, MetricGroup::TranslationVelocity),
            (V2, self.q_vel, self.v_target, MetricGroup::TranslationVelocity),
        ];
        let mut lin = vec![0.0; n];
        let mut constant = 0.0;
        let mut terminal = Vec::new();
        for (slot, w, target, group) in targets {
            hess.push((at(last, slot), at(last, slot), 2.0 * w));
            lin[at(last, slot)] = -2.0 * w * target;
            constant += w * target * target;
            terminal.push(TerminalTarget {
                slot,
                target,
                group,
            });
        }
        b.set_objective(hess, lin, constant);
        b.set_terminal_targets(terminal);
        b.set_layout(layout);
        b.build()
    }

    fn initial_guess(&self, guess: &InitialGuess) -> Vec<f64> {
        let n = self.n_steps * STRIDE;
        let mut x = vec![0.0; n];
        match guess {
            InitialGuess::AllZero => {}
            InitialGuess::PassiveRollout | InitialGuess::NoisyRollout { .. } => {
                // at rest: table carries the full plate weight, nothing moves
                for i in 0..self.n_steps {
                    x[i * STRIDE + X1] = self.x1_0;
                    x[i * STRIDE + X2] = self.x2_0;
                    x[i * STRIDE + FN] = self.m1 * self.g;
                }
            }
        }
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
    use crate::nlp::check_derivatives;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derivatives_at_random_points() {
        let params = WaiterParams {
            n_steps: 4,
            ..WaiterParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn rest_state_satisfies_equalities() {
        let params = WaiterParams {
            n_steps: 15,
            ..WaiterParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let x = params.initial_guess(&InitialGuess::PassiveRollout);
        let ce = p.eval_eq(&x).unwrap();
        let max = ce.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max < 1e-10, "max eq residual {max}");
    }
}
