//! Payload transport: a cargo block rests on an actuated cart and is moved
//! purely through friction. The friction force f on the cargo is an indirect
//! control: complementarity between the relative slip (split into p - q) and
//! the friction cone bounds selects static or kinetic friction.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportParams {
    pub n_steps: usize,
    pub dt: f64,
    /// cargo mass
    pub m1: f64,
    /// cart mass
    pub m2: f64,
    /// cargo-cart friction coefficient
    pub mu1: f64,
    pub g: f64,
    /// half-length of the cart bed: |x1 - x2| <= l0
    pub l0: f64,
    /// initial positions and velocities
    pub x1_0: f64,
    pub x2_0: f64,
    pub v1_0: f64,
    pub v2_0: f64,
    /// targets
    pub x1_target: f64,
    pub x2_target: f64,
    pub v1_target: f64,
    pub v2_target: f64,
    pub r_u: f64,
    pub q_pos: f64,
    pub q_vel: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            n_steps: 200,
            dt: 0.02,
            m1: 1.0,
            m2: 1.0,
            mu1: 0.3,
            g: 9.81,
            l0: 0.5,
            x1_0: 3.0,
            x2_0: 3.0,
            v1_0: 0.0,
            v2_0: 0.0,
            x1_target: 0.0,
            x2_target: 0.0,
            v1_target: 0.0,
            v2_target: 0.0,
            r_u: 0.01,
            q_pos: 1000.0,
            q_vel: 1000.0,
        }
    }
}

const X1: usize = 0;
const X2: usize = 1;
const XD1: usize = 2;
const XD2: usize = 3;
const P: usize = 4;
const Q: usize = 5;
const F: usize = 6;
const U: usize = 7;
const STRIDE: usize = 8;

impl ProblemDef for TransportParams {
    fn name(&self) -> &'static str {
        "transport"
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
                spec("xdot1", VarRole::State),
                spec("xdot2", VarRole::State),
                spec("p", VarRole::State),
                spec("q", VarRole::State),
                spec("f", VarRole::Force),
                spec("u", VarRole::Control),
            ],
        };
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let (m1, m2, dt) = (self.m1, self.m2, self.dt);
        let fmax = self.mu1 * self.m1 * self.g;

        for (slot, value) in [
            (X1, self.x1_0),
            (X2, self.x2_0),
            (XD1, self.v1_0),
            (XD2, self.v2_0),
        ] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            // m1 dv1/dt = f; m2 dv2/dt = u - f; positions semi-implicit
            b.add_equality(
                format!("dyn_cargo[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i + 1, XD1), m1 / dt),
                        (at(i, XD1), -m1 / dt),
                        (at(i, F), -1.0),
                    ],
                    0.0,
                ),
            );
            b.add_equality(
                format!("dyn_cart[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i + 1, XD2), m2 / dt),
                        (at(i, XD2), -m2 / dt),
                        (at(i, U), -1.0),
                        (at(i, F), 1.0),
                    ],
                    0.0,
                ),
            );
            b.add_equality(
                format!("pos_cargo[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i + 1, X1), 1.0), (at(i, X1), -1.0), (at(i + 1, XD1), -dt)],
                    0.0,
                ),
            );
            b.add_equality(
                format!("pos_cart[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(at(i + 1, X2), 1.0), (at(i, X2), -1.0), (at(i + 1, XD2), -dt)],
                    0.0,
                ),
            );
        }

        for i in 0..self.n_steps {
            // slip decomposition xd2 - xd1 = p - q
            b.add_equality(
                format!("slip[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![
                        (at(i, XD2), 1.0),
                        (at(i, XD1), -1.0),
                        (at(i, P), -1.0),
                        (at(i, Q), 1.0),
                    ],
                    0.0,
                ),
            );
            let p_row = b.add_inequality(
                format!("p_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, P), 1.0)], 0.0),
            );
            let q_row = b.add_inequality(
                format!("q_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, Q), 1.0)], 0.0),
            );
            let cone_hi = b.add_inequality(
                format!("cone_hi[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, F), -1.0)], fmax),
            );
            let cone_lo = b.add_inequality(
                format!("cone_lo[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, F), 1.0)], fmax),
            );
            for (label, lhs, rhs) in [
                ("slip_onesided", p_row, q_row),
                ("kinetic_fwd", p_row, cone_hi),
                ("kinetic_bwd", q_row, cone_lo),
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
            // cargo stays on the cart bed
            b.add_inequality(
                format!("bed_right[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, X1), -1.0), (at(i, X2), 1.0)], self.l0),
            );
            b.add_inequality(
                format!("bed_left[{i}]"),
                ProblemBuilder::linear_expr(vec![(at(i, X1), 1.0), (at(i, X2), -1.0)], self.l0),
            );
        }

        let mut hess = Vec::new();
        for i in 0..self.n_steps {
            hess.push((at(i, U), at(i, U), 2.0 * self.r_u));
        }
        let last = self.n_steps - 1;
        let mut lin = vec![0.0; n];
        let mut constant = 0.0;
        for (slot, w, target) in [
            (X1, self.q_pos, self.x1_target),
            (X2, self.q_pos, self.x2_target),
            (XD1, self.q_vel, self.v1_target),
            (XD2, self.q_vel, self.v2_target),
        ] {
            hess.push((at(last, slot), at(last, slot), 2.0 * w));
            lin[at(last, slot)] = -2.0 * w * target;
            constant += w * target * target;
        }
        b.set_objective(hess, lin, constant);

        b.set_terminal_targets(vec![
            TerminalTarget {
                slot: X1,
                target: self.x1_target,
                group: MetricGroup::Translation,
            },
            TerminalTarget {
                slot: X2,
                target: self.x2_target,
                group: MetricGroup::Translation,
            },
            TerminalTarget {
                slot: XD1,
                target: self.v1_target,
                group: MetricGroup::TranslationVelocity,
            },
            TerminalTarget {
                slot: XD2,
                target: self.v2_target,
                group: MetricGroup::TranslationVelocity,
            },
        ]);
        b.set_layout(layout);
        b.build()
    }

    fn initial_guess(&self, guess: &InitialGuess) -> Vec<f64> {
        let n = self.n_steps * STRIDE;
        let mut x = vec![0.0; n];
        match guess {
            InitialGuess::AllZero => {}
            InitialGuess::PassiveRollout | InitialGuess::NoisyRollout { .. } => {
                // zero control: cart coasts; cargo is carried along if static
                // friction can hold it (assumed here since accelerations are zero)
                for i in 0..self.n_steps {
                    let t = i as f64 * self.dt;
                    x[i * STRIDE + X1] = self.x1_0 + t * self.v1_0;
                    x[i * STRIDE + X2] = self.x2_0 + t * self.v2_0;
                    x[i * STRIDE + XD1] = self.v1_0;
                    x[i * STRIDE + XD2] = self.v2_0;
                    let slip = self.v2_0 - self.v1_0;
                    x[i * STRIDE + P] = slip.max(0.0);
                    x[i * STRIDE + Q] = (-slip).max(0.0);
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
        let params = TransportParams {
            n_steps: 5,
            ..TransportParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn passive_rollout_satisfies_dynamics() {
        let params = TransportParams {
            n_steps: 20,
            ..TransportParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let x = params.initial_guess(&InitialGuess::PassiveRollout);
        for (i, v) in p.eval_eq(&x).unwrap().iter().enumerate() {
            assert!(v.abs() < 1e-10, "eq row {i}: {v}");
        }
    }
}
