//! Planar one-legged hopper with contact-implicit foot forces.
//!
//! Body position (p_x, p_y), foot position (q_x, q_y), leg angle theta and
//! leg compression r, with a hip torque rate u1 and leg thrust u2. Contact is
//! implicit: the foot may only stay planted (q fixed) while the leg is
//! compressed, thrust requires ground contact (q_y = 0), and steering the leg
//! requires a compressed spring.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HopperParams {
    pub n_steps: usize,
    pub dt: f64,
    pub m: f64,
    pub g: f64,
    /// rest leg length and maximum compression (r0 < l0)
    pub l0: f64,
    pub r0: f64,
    /// release state
    pub px0: f64,
    pub py0: f64,
    pub theta0: f64,
    /// target horizontal body position
    pub px_target: f64,
    pub py_target: f64,
    pub r_u: f64,
    pub q_pos: f64,
    pub q_vel: f64,
}

impl Default for HopperParams {
    fn default() -> Self {
        HopperParams {
            n_steps: 100,
            dt: 0.02,
            m: 1.0,
            g: 9.81,
            l0: 0.5,
            r0: 0.25,
            px0: 0.0,
            py0: 0.5,
            theta0: 0.0,
            px_target: 1.0,
            py_target: 0.5,
            r_u: 0.01,
            q_pos: 100.0,
            q_vel: 10.0,
        }
    }
}

const PX: usize = 0;
const PY: usize = 1;
const QX: usize = 2;
const QY: usize = 3;
const TH: usize = 4;
const R: usize = 5;
const VX: usize = 6;
const VY: usize = 7;
const U1: usize = 8;
const U2: usize = 9;
const STRIDE: usize = 10;

impl ProblemDef for HopperParams {
    fn name(&self) -> &'static str {
        "hopper"
    }

    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError> {
        if self.n_steps < 2 || self.dt <= 0.0 {
            return Err(NlpError::SpecError("n_steps >= 2 and dt > 0 required".into()));
        }
        if self.r0 >= self.l0 {
            return Err(NlpError::SpecError("r0 must be below l0".into()));
        }
        let spec = |name: &str, role: VarRole| VarSpec {
            name: name.to_string(),
            role,
        };
        let layout = VariableLayout {
            horizon: self.n_steps,
            dt: self.dt,
            per_step: vec![
                spec("px", VarRole::State),
                spec("py", VarRole::State),
                spec("qx", VarRole::State),
                spec("qy", VarRole::State),
                spec("theta", VarRole::State),
                spec("r", VarRole::State),
                spec("vx", VarRole::State),
                spec("vy", VarRole::State),
                spec("u1", VarRole::Control),
                spec("u2", VarRole::Control),
            ],
        };
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let dt = self.dt;
        let (m, g, l0) = (self.m, self.g, self.l0);

        for (slot, value) in [
            (PX, self.px0),
            (PY, self.py0),
            (TH, self.theta0),
            (VX, 0.0),
            (VY, 0.0),
        ] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            let (pxi, pyi, qxi, qyi) = (at(i, PX), at(i, PY), at(i, QX), at(i, QY));
            let (thi, vxi, vyi) = (at(i, TH), at(i, VX), at(i, VY));
            let (u1i, u2i) = (at(i, U1), at(i, U2));
            let ri = at(i, R);
            let (pxn, pyn, qxn, qyn) =
                (at(i + 1, PX), at(i + 1, PY), at(i + 1, QX), at(i + 1, QY));
            let (thn, vxn, vyn) = (at(i + 1, TH), at(i + 1, VX), at(i + 1, VY));

            b.add_equality(
                format!("dyn_vx[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| m * (x[vxn] - x[vxi]) / dt + x[u2i] * x[thi].sin(),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((vxn, m / dt));
                        out.push((vxi, -m / dt));
                        out.push((u2i, x[thi].sin()));
                        out.push((thi, x[u2i] * x[thi].cos()));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_vy[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| m * (x[vyn] - x[vyi]) / dt - x[u2i] * x[thi].cos() + m * g,
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((vyn, m / dt));
                        out.push((vyi, -m / dt));
                        out.push((u2i, -x[thi].cos()));
                        out.push((thi, x[u2i] * x[thi].sin()));
                    },
                ),
            );
            // a compressed leg pins the foot in place
            b.add_equality(
                format!("foot_x[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[ri] * (x[qxn] - x[qxi]),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((ri, x[qxn] - x[qxi]));
                        out.push((qxn, x[ri]));
                        out.push((qxi, -x[ri]));
                    },
                ),
            );
            b.add_equality(
                format!("foot_y[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[ri] * (x[qyn] - x[qyi]),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((ri, x[qyn] - x[qyi]));
                        out.push((qyn, x[ri]));
                        out.push((qyi, -x[ri]));
                    },
                ),
            );
            // leg angle only follows the commanded rate while airborne
            b.add_equality(
                format!("pivot[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[qyi] * (x[thn] - x[thi] - dt * x[u1i]),
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((qyi, x[thn] - x[thi] - dt * x[u1i]));
                        out.push((thn, x[qyi]));
                        out.push((thi, -x[qyi]));
                        out.push((u1i, -dt * x[qyi]));
                    },
                ),
            );
            b.add_equality(
                format!("pos_x[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(pxn, 1.0), (pxi, -1.0), (vxn, -dt)],
                    0.0,
                ),
            );
            b.add_equality(
                format!("pos_y[{i}]"),
                ProblemBuilder::linear_expr(
                    vec![(pyn, 1.0), (pyi, -1.0), (vyn, -dt)],
                    0.0,
                ),
            );
        }

        for i in 0..self.n_steps {
            let (pxi, pyi, qxi, qyi) = (at(i, PX), at(i, PY), at(i, QX), at(i, QY));
            let (thi, ri, u1i, u2i) = (at(i, TH), at(i, R), at(i, U1), at(i, U2));

            b.add_equality(
                format!("geom_y[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| (l0 - x[ri]) * x[thi].cos() - x[pyi] + x[qyi],
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((ri, -x[thi].cos()));
                        out.push((thi, -(l0 - x[ri]) * x[thi].sin()));
                        out.push((pyi, -1.0));
                        out.push((qyi, 1.0));
                    },
                ),
            );
            b.add_equality(
                format!("geom_x[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| (l0 - x[ri]) * x[thi].sin() - x[qxi] + x[pxi],
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((ri, -x[thi].sin()));
                        out.push((thi, (l0 - x[ri]) * x[thi].cos()));
                        out.push((qxi, -1.0));
                        out.push((pxi, 1.0));
                    },
                ),
            );

            let r_row = b.add_inequality(
                format!("r_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(ri, 1.0)], 0.0),
            );
            b.add_inequality(
                format!("r_max[{i}]"),
                ProblemBuilder::linear_expr(vec![(ri, -1.0)], self.r0),
            );
            let qy_row = b.add_inequality(
                format!("foot_above_ground[{i}]"),
                ProblemBuilder::linear_expr(vec![(qyi, 1.0)], 0.0),
            );
            let u2_row = b.add_inequality(
                format!("thrust_nonneg[{i}]"),
                ProblemBuilder::linear_expr(vec![(u2i, 1.0)], 0.0),
            );
            let u1sq_row = b.add_inequality(
                format!("steer_sq[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| x[u1i] * x[u1i],
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((u1i, 2.0 * x[u1i]));
                    },
                ),
            );
            // compression only in contact, thrust only in contact,
            // steering only while the leg is extended
            for (label, lhs, rhs) in [
                ("compress_contact", r_row, qy_row),
                ("thrust_contact", u2_row, qy_row),
                ("steer_extended", u1sq_row, r_row),
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
            hess.push((at(i, U1), at(i, U1), 2.0 * self.r_u));
            hess.push((at(i, U2), at(i, U2), 2.0 * self.r_u));
        }
        let last = self.n_steps - 1;
        let targets = [
            (PX, self.q_pos, self.px_target, MetricGroup::Translation),
            (PY, self.q_pos, self.py_target, MetricGroup::Translation),
            (VX, self.q_vel, 0.0, MetricGroup::TranslationVelocity),
            (VY, self.q_vel, 0.0, MetricGroup::TranslationVelocity),
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
                // free fall with the leg extended below the body until the
                // foot meets the ground, then stand with the thrust
                // balancing gravity; every row except the thrust-contact
                // product at the touchdown step is satisfied exactly
                let (mut py, mut vy) = (self.py0, 0.0);
                for i in 0..self.n_steps {
                    x[i * STRIDE + PX] = self.px0;
                    x[i * STRIDE + PY] = py;
                    x[i * STRIDE + QX] = self.px0;
                    x[i * STRIDE + QY] = py - self.l0;
                    x[i * STRIDE + TH] = self.theta0;
                    x[i * STRIDE + VY] = vy;
                    let vy_free = vy - self.g * self.dt;
                    if py + vy_free * self.dt >= self.l0 {
                        vy = vy_free;
                    } else {
                        // land on the next step: pick the velocity that puts
                        // the body exactly at leg height and the thrust that
                        // produces it, so the dynamics rows stay exact
                        let vy_next = (self.l0 - py) / self.dt;
                        x[i * STRIDE + U2] =
                            self.m * (vy_next - vy) / self.dt + self.m * self.g;
                        vy = vy_next;
                    }
                    py += vy * self.dt;
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
        let params = HopperParams {
            n_steps: 4,
            ..HopperParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn drop_and_stand_rollout_satisfies_equalities() {
        // from a drop the guess may violate the thrust-contact product at
        // the touchdown steps, but nothing else
        for py0 in [0.5, 1.5] {
            let params = HopperParams {
                n_steps: 20,
                py0,
                ..HopperParams::default()
            };
            let p = params.build(ProductMode::Equality).unwrap();
            let x = params.initial_guess(&InitialGuess::PassiveRollout);
            let ce = p.eval_eq(&x).unwrap();
            let max = ce
                .iter()
                .zip(&p.eq_rows)
                .filter(|(_, row)| !row.is_product)
                .fold(0.0f64, |a, (v, _)| a.max(v.abs()));
            assert!(max < 1e-10, "py0 {py0}: max eq residual {max}");
            if py0 == 0.5 {
                let all = ce.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(all < 1e-10, "standing start: product residual {all}");
            }
        }
    }
}
