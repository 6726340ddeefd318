//! Cartpole between two soft walls.
//!
//! A cart slides on a rail with an inverted pole; spring walls at x = d1 and
//! x = -d2 push back on the pole tip through contact forces lam1 (right wall)
//! and lam2 (left wall). theta = 0 is upright; the tip position is
//! x + l sin(theta). Semi-implicit Euler, with the contact forces entering
//! through complementarity between the force and the sprung gap.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CartpoleParams {
    pub n_steps: usize,
    pub dt: f64,
    /// cart mass
    pub mc: f64,
    /// pole mass
    pub mp: f64,
    /// pole length
    pub l: f64,
    /// wall stiffnesses
    pub k1: f64,
    pub k2: f64,
    /// wall positions (right wall at +d1, left wall at -d2)
    pub d1: f64,
    pub d2: f64,
    pub g: f64,
    /// initial state
    pub x0: f64,
    pub theta0: f64,
    pub xdot0: f64,
    pub thetadot0: f64,
    /// control effort weight
    pub r_u: f64,
    /// terminal tracking weights
    pub q_pos: f64,
    pub q_angle: f64,
    pub q_vel: f64,
    pub q_avel: f64,
}

impl Default for CartpoleParams {
    fn default() -> Self {
        CartpoleParams {
            n_steps: 200,
            dt: 0.02,
            mc: 1.0,
            mp: 0.4,
            l: 0.6,
            k1: 100.0,
            k2: 100.0,
            d1: 0.35,
            d2: 0.35,
            g: 9.81,
            x0: 0.0,
            theta0: 0.2,
            xdot0: 0.0,
            thetadot0: 0.0,
            r_u: 0.01,
            q_pos: 300.0,
            q_angle: 100.0,
            q_vel: 100.0,
            q_avel: 100.0,
        }
    }
}

const X: usize = 0;
const TH: usize = 1;
const XD: usize = 2;
const THD: usize = 3;
const U: usize = 4;
const L1: usize = 5;
const L2: usize = 6;
const STRIDE: usize = 7;

impl CartpoleParams {
    fn layout(&self) -> VariableLayout {
        let spec = |name: &str, role: VarRole| VarSpec {
            name: name.to_string(),
            role,
        };
        VariableLayout {
            horizon: self.n_steps,
            dt: self.dt,
            per_step: vec![
                spec("x", VarRole::State),
                spec("theta", VarRole::State),
                spec("xdot", VarRole::State),
                spec("thetadot", VarRole::State),
                spec("u", VarRole::Control),
                spec("lambda1", VarRole::Force),
                spec("lambda2", VarRole::Force),
            ],
        }
    }

    /// One semi-implicit step: solve the 2x2 mass matrix for the next
    /// velocities given current angle and applied forces, then integrate
    /// positions with the new velocities.
    fn step_dynamics(
        &self,
        state: [f64; 4],
        u: f64,
        lam1: f64,
        lam2: f64,
    ) -> [f64; 4] {
        let [x, th, xd, thd] = state;
        let (mc, mp, l, g, dt) = (self.mc, self.mp, self.l, self.g, self.dt);
        let c = th.cos();
        // [mc+mp, mp l c; mp c, mp l] [ax; al] = [fx; fth]
        let fx = u - lam1 + lam2;
        let fth = (lam2 - lam1) * c + mp * g * th.sin();
        let a11 = mc + mp;
        let a12 = mp * l * c;
        let a21 = mp * c;
        let a22 = mp * l;
        let det = a11 * a22 - a12 * a21;
        let ax = (a22 * fx - a12 * fth) / det;
        let al = (a11 * fth - a21 * fx) / det;
        let xd1 = xd + ax * dt;
        let thd1 = thd + al * dt;
        [x + xd1 * dt, th + thd1 * dt, xd1, thd1]
    }
}

impl ProblemDef for CartpoleParams {
    fn name(&self) -> &'static str {
        "cartpole"
    }

    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError> {
        if self.n_steps < 2 || self.dt <= 0.0 {
            return Err(NlpError::SpecError("n_steps >= 2 and dt > 0 required".into()));
        }
        let layout = self.layout();
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let (mc, mp, l, g, dt) = (self.mc, self.mp, self.l, self.g, self.dt);

        // initial state
        for (slot, value) in [
            (X, self.x0),
            (TH, self.theta0),
            (XD, self.xdot0),
            (THD, self.thetadot0),
        ] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            let (xi, thi, xdi, thdi) = (at(i, X), at(i, TH), at(i, XD), at(i, THD));
            let (ui, l1i, l2i) = (at(i, U), at(i, L1), at(i, L2));
            let (xn, thn, xdn, thdn) =
                (at(i + 1, X), at(i + 1, TH), at(i + 1, XD), at(i + 1, THD));

            // velocity updates with the accelerations solved symbolically
            // from the 2x2 mass matrix:
            //   [mc+mp, mp l c; mp c, mp l] [xdd; thdd] = [F; G]
            // with F = u - lam1 + lam2 and G = (lam2-lam1) c + mp g sin(th),
            // giving xdd = (F - c G)/D and thdd = ((mc+mp) G - mp c F)/(mp l D)
            // where D = mc + mp sin(th)^2
            b.add_equality(
                format!("dyn_cart[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        let f = x[ui] - x[l1i] + x[l2i];
                        let g_ = (x[l2i] - x[l1i]) * c + mp * g * s;
                        let d = mc + mp * s * s;
                        x[xdn] - x[xdi] - dt * (f - c * g_) / d
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        let w = x[l2i] - x[l1i];
                        let f = x[ui] - x[l1i] + x[l2i];
                        let g_ = w * c + mp * g * s;
                        let d = mc + mp * s * s;
                        let xdd = (f - c * g_) / d;
                        out.push((xdn, 1.0));
                        out.push((xdi, -1.0));
                        out.push((ui, -dt / d));
                        out.push((l1i, dt * s * s / d));
                        out.push((l2i, -dt * s * s / d));
                        let dnum = s * g_ - c * (-w * s + mp * g * c);
                        out.push((thi, -dt * (dnum - xdd * 2.0 * mp * s * c) / d));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_pole[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        let f = x[ui] - x[l1i] + x[l2i];
                        let g_ = (x[l2i] - x[l1i]) * c + mp * g * s;
                        let d = mc + mp * s * s;
                        let thdd = ((mc + mp) * g_ - mp * c * f) / (mp * l * d);
                        x[thdn] - x[thdi] - dt * thdd
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        let w = x[l2i] - x[l1i];
                        let f = x[ui] - x[l1i] + x[l2i];
                        let g_ = w * c + mp * g * s;
                        let d = mc + mp * s * s;
                        let h = (mc + mp) * g_ - mp * c * f;
                        let thdd = h / (mp * l * d);
                        out.push((thdn, 1.0));
                        out.push((thdi, -1.0));
                        out.push((ui, dt * c / (l * d)));
                        out.push((l1i, dt * mc * c / (mp * l * d)));
                        out.push((l2i, -dt * mc * c / (mp * l * d)));
                        let dh = (mc + mp) * (-w * s + mp * g * c) + mp * s * f;
                        out.push((thi, -dt * (dh / (mp * l) - thdd * 2.0 * mp * s * c) / d));
                    },
                ),
            );
            // position integration with next velocities
            b.add_equality(
                format!("pos_x[{i}]"),
                ProblemBuilder::linear_expr(vec![(xn, 1.0), (xi, -1.0), (xdn, -dt)], 0.0),
            );
            b.add_equality(
                format!("pos_th[{i}]"),
                ProblemBuilder::linear_expr(vec![(thn, 1.0), (thi, -1.0), (thdn, -dt)], 0.0),
            );
        }

        // contact complementarity at every step
        let (k1, k2, d1, d2) = (self.k1, self.k2, self.d1, self.d2);
        for i in 0..self.n_steps {
            let (xi, thi, l1i, l2i) = (at(i, X), at(i, TH), at(i, L1), at(i, L2));
            let f1 = b.add_inequality(
                format!("lam1_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(l1i, 1.0)], 0.0),
            );
            let g1 = b.add_inequality(
                format!("gap_right[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[l1i] / k1 + d1 - x[xi] - l * x[thi].sin(),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((l1i, 1.0 / k1));
                        out.push((xi, -1.0));
                        out.push((thi, -l * x[thi].cos()));
                    },
                ),
            );
            let f2 = b.add_inequality(
                format!("lam2_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(l2i, 1.0)], 0.0),
            );
            let g2 = b.add_inequality(
                format!("gap_left[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[l2i] / k2 + d2 + x[xi] + l * x[thi].sin(),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((l2i, 1.0 / k2));
                        out.push((xi, 1.0));
                        out.push((thi, l * x[thi].cos()));
                    },
                ),
            );
            b.add_complementarity(
                format!("wall_right[{i}]"),
                ComplementaritySpec {
                    lhs_index: f1,
                    rhs_index: g1,
                    product_mode: mode,
                },
            )?;
            b.add_complementarity(
                format!("wall_left[{i}]"),
                ComplementaritySpec {
                    lhs_index: f2,
                    rhs_index: g2,
                    product_mode: mode,
                },
            )?;
        }

        // cost: control effort plus terminal tracking to the upright origin
        let mut hess = Vec::new();
        for i in 0..self.n_steps {
            hess.push((at(i, U), at(i, U), 2.0 * self.r_u));
        }
        let last = self.n_steps - 1;
        for (slot, w) in [
            (X, self.q_pos),
            (TH, self.q_angle),
            (XD, self.q_vel),
            (THD, self.q_avel),
        ] {
            hess.push((at(last, slot), at(last, slot), 2.0 * w));
        }
        b.set_objective(hess, vec![0.0; n], 0.0);

        b.set_terminal_targets(vec![
            TerminalTarget {
                slot: X,
                target: 0.0,
                group: MetricGroup::Translation,
            },
            TerminalTarget {
                slot: XD,
                target: 0.0,
                group: MetricGroup::TranslationVelocity,
            },
            TerminalTarget {
                slot: TH,
                target: 0.0,
                group: MetricGroup::Angle,
            },
            TerminalTarget {
                slot: THD,
                target: 0.0,
                group: MetricGroup::AngularVelocity,
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
                let mut state = [self.x0, self.theta0, self.xdot0, self.thetadot0];
                for i in 0..self.n_steps {
                    x[i * STRIDE + X] = state[0];
                    x[i * STRIDE + TH] = state[1];
                    x[i * STRIDE + XD] = state[2];
                    x[i * STRIDE + THD] = state[3];
                    state = self.step_dynamics(state, 0.0, 0.0, 0.0);
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

    fn small() -> CartpoleParams {
        CartpoleParams {
            n_steps: 5,
            ..CartpoleParams::default()
        }
    }

    #[test]
    fn derivatives_at_random_points() {
        let p = small().build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn passive_rollout_satisfies_dynamics() {
        let params = CartpoleParams {
            n_steps: 40,
            ..CartpoleParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let x = params.initial_guess(&InitialGuess::PassiveRollout);
        let ce = p.eval_eq(&x).unwrap();
        // dynamics and initial-state rows hold; product rows are trivially
        // zero because all forces are zero
        for (i, v) in ce.iter().enumerate() {
            assert!(v.abs() < 1e-10, "eq row {i}: {v}");
        }
    }

    #[test]
    fn zero_state_is_dynamics_feasible() {
        let params = CartpoleParams {
            n_steps: 10,
            theta0: 0.0,
            ..CartpoleParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let x = vec![0.0; p.n_vars];
        assert!(p.eval_eq(&x).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
}
