//! Planar T-block pushing with contact-implicit face selection.
//!
//! Same quasi-static limit-surface dynamics as the box pusher, but the slider
//! is a T-shaped block with eight candidate contact faces. Each face force is
//! paired with a gap expression built from absolute-value splits
//! v_i - w_i = d_i of the contact point's signed distances to the face lines,
//! so the active face is selected implicitly by complementarity.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushTParams {
    pub n_steps: usize,
    pub dt: f64,
    /// unit length of the tee: the bar is 4l wide and 1l tall, the stem is
    /// 1l wide and 3l tall
    pub l: f64,
    /// centroid height above the stem bottom, in units of l
    pub dc: f64,
    pub mu: f64,
    pub m: f64,
    pub g: f64,
    pub c: f64,
    pub r: f64,
    pub px0: f64,
    pub py0: f64,
    pub theta0: f64,
    pub target_radius: f64,
    pub target_angle: f64,
    pub r_f: f64,
    /// small linear cost keeping the unused eighth split bounded
    pub eps_vw: f64,
    pub q_pos: f64,
    pub q_angle: f64,
}

impl Default for PushTParams {
    fn default() -> Self {
        PushTParams {
            n_steps: 50,
            dt: 0.05,
            l: 1.0,
            dc: 18.5 / 7.0,
            mu: 0.3,
            m: 1.0,
            g: 9.81,
            c: 0.6,
            r: 1.0,
            px0: 0.0,
            py0: 0.0,
            theta0: 0.0,
            target_radius: 1.0,
            target_angle: std::f64::consts::FRAC_PI_4,
            r_f: 0.01,
            eps_vw: 1e-3,
            q_pos: 100.0,
            q_angle: 100.0,
        }
    }
}

const PX: usize = 0;
const PY: usize = 1;
const TH: usize = 2;
const CX: usize = 3;
const CY: usize = 4;
const L0: usize = 5; // lambda_1 .. lambda_8 at L0..L0+7
const V0: usize = 13; // v_1 .. v_8
const W0: usize = 21; // w_1 .. w_8
const STRIDE: usize = 29;

/// sign making s_i * lambda_i the nonnegative face force magnitude
const FORCE_SIGN: [f64; 8] = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0];

impl PushTParams {
    /// signed distances d_i split as v_i - w_i, for i = 1..=7 (index 0..7
    /// here; the eighth split has no defining gap)
    fn split_defs(&self) -> [(usize, f64); 7] {
        let (l, dc) = (self.l, self.dc);
        [
            (CX, -2.0 * l),
            (CY, -(4.0 - dc) * l),
            (CY, -(3.0 - dc) * l),
            (CX, -0.5 * l),
            (CY, dc * l),
            (CX, 0.5 * l),
            (CX, 2.0 * l),
        ]
    }

    /// gap expression for face k as (split indices, constant); face 0 is the
    /// plain top-edge gap handled separately
    fn gap_defs(&self) -> [(Vec<usize>, f64); 7] {
        let l = self.l;
        [
            (vec![0, 1, 2], -l),         // face 2
            (vec![0, 2, 3], -1.5 * l),   // face 3
            (vec![2, 3, 4], -3.0 * l),   // face 4
            (vec![3, 4, 5], -l),         // face 5
            (vec![2, 4, 5], -3.0 * l),   // face 6
            (vec![2, 5, 6], -1.5 * l),   // face 7
            (vec![1, 2, 6], -l),         // face 8
        ]
    }
}

impl ProblemDef for PushTParams {
    fn name(&self) -> &'static str {
        "push_t"
    }

    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError> {
        if self.n_steps < 2 || self.dt <= 0.0 {
            return Err(NlpError::SpecError("n_steps >= 2 and dt > 0 required".into()));
        }
        let spec = |name: &str, role: VarRole| VarSpec {
            name: name.to_string(),
            role,
        };
        let mut per_step = vec![
            spec("px", VarRole::State),
            spec("py", VarRole::State),
            spec("theta", VarRole::State),
            spec("cx", VarRole::State),
            spec("cy", VarRole::State),
        ];
        for k in 1..=8 {
            per_step.push(spec(&format!("lambda{k}"), VarRole::Force));
        }
        for k in 1..=8 {
            per_step.push(spec(&format!("v{k}"), VarRole::State));
        }
        for k in 1..=8 {
            per_step.push(spec(&format!("w{k}"), VarRole::State));
        }
        let layout = VariableLayout {
            horizon: self.n_steps,
            dt: self.dt,
            per_step,
        };
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let dt = self.dt;
        let kt = dt / (self.mu * self.m * self.g);
        let kr = dt / (self.c * self.r * self.mu * self.m * self.g);
        let (l, dc) = (self.l, self.dc);

        for (slot, value) in [(PX, self.px0), (PY, self.py0), (TH, self.theta0)] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            let (pxi, pyi, thi, cxi, cyi) =
                (at(i, PX), at(i, PY), at(i, TH), at(i, CX), at(i, CY));
            let (pxn, pyn, thn) = (at(i + 1, PX), at(i + 1, PY), at(i + 1, TH));
            // tangential faces 2,4,6,8 drive body-x, normal faces 1,3,5,7
            // drive body-y
            let tan: [usize; 4] = [at(i, L0 + 1), at(i, L0 + 3), at(i, L0 + 5), at(i, L0 + 7)];
            let nor: [usize; 4] = [at(i, L0), at(i, L0 + 2), at(i, L0 + 4), at(i, L0 + 6)];
            let sum = |x: &[f64], idx: &[usize; 4]| idx.iter().map(|&j| x[j]).sum::<f64>();

            b.add_equality(
                format!("dyn_px[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        x[pxn] - x[pxi] - kt * (sum(x, &tan) * c - sum(x, &nor) * s)
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        out.push((pxn, 1.0));
                        out.push((pxi, -1.0));
                        for &j in &tan {
                            out.push((j, -kt * c));
                        }
                        for &j in &nor {
                            out.push((j, kt * s));
                        }
                        out.push((thi, kt * (sum(x, &tan) * s + sum(x, &nor) * c)));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_py[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        x[pyn] - x[pyi] - kt * (sum(x, &tan) * s + sum(x, &nor) * c)
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        out.push((pyn, 1.0));
                        out.push((pyi, -1.0));
                        for &j in &tan {
                            out.push((j, -kt * s));
                        }
                        for &j in &nor {
                            out.push((j, -kt * c));
                        }
                        out.push((thi, -kt * (sum(x, &tan) * c - sum(x, &nor) * s)));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_th[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        x[thn] - x[thi] - kr * (x[cxi] * sum(x, &nor) - x[cyi] * sum(x, &tan))
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        out.push((thn, 1.0));
                        out.push((thi, -1.0));
                        out.push((cxi, -kr * sum(x, &nor)));
                        out.push((cyi, kr * sum(x, &tan)));
                        for &j in &nor {
                            out.push((j, -kr * x[cxi]));
                        }
                        for &j in &tan {
                            out.push((j, kr * x[cyi]));
                        }
                    },
                ),
            );
        }

        for i in 0..self.n_steps {
            let (cxi, cyi) = (at(i, CX), at(i, CY));

            // absolute-value splits: v_k - w_k = d_k for the first seven
            for (k, (slot, constant)) in self.split_defs().into_iter().enumerate() {
                b.add_equality(
                    format!("split{}[{i}]", k + 1),
                    ProblemBuilder::linear_expr(
                        vec![
                            (at(i, V0 + k), 1.0),
                            (at(i, W0 + k), -1.0),
                            (at(i, slot), -1.0),
                        ],
                        -constant,
                    ),
                );
            }

            let mut v_rows = [0usize; 8];
            let mut w_rows = [0usize; 8];
            for k in 0..8 {
                v_rows[k] = b.add_inequality(
                    format!("v{}_nonneg[{i}]", k + 1),
                    ProblemBuilder::linear_expr(vec![(at(i, V0 + k), 1.0)], 0.0),
                );
                w_rows[k] = b.add_inequality(
                    format!("w{}_nonneg[{i}]", k + 1),
                    ProblemBuilder::linear_expr(vec![(at(i, W0 + k), 1.0)], 0.0),
                );
                b.add_complementarity(
                    format!("split_excl{}[{i}]", k + 1),
                    ComplementaritySpec {
                        lhs_index: v_rows[k],
                        rhs_index: w_rows[k],
                        product_mode: mode,
                    },
                )?;
            }

            let mut force_rows = [0usize; 8];
            for k in 0..8 {
                force_rows[k] = b.add_inequality(
                    format!("force{}_nonneg[{i}]", k + 1),
                    ProblemBuilder::linear_expr(vec![(at(i, L0 + k), FORCE_SIGN[k])], 0.0),
                );
            }

            // face 1: top edge of the bar, gap (4 - dc) l - cy
            let gap1 = b.add_inequality(
                format!("gap1[{i}]"),
                ProblemBuilder::linear_expr(vec![(cyi, -1.0)], (4.0 - dc) * l),
            );
            b.add_complementarity(
                format!("face1[{i}]"),
                ComplementaritySpec {
                    lhs_index: force_rows[0],
                    rhs_index: gap1,
                    product_mode: mode,
                },
            )?;
            // faces 2..8: gaps built from the splits
            for (k, (splits, constant)) in self.gap_defs().into_iter().enumerate() {
                let mut coeffs = Vec::new();
                for s in splits {
                    coeffs.push((at(i, V0 + s), 1.0));
                    coeffs.push((at(i, W0 + s), 1.0));
                }
                let gap = b.add_inequality(
                    format!("gap{}[{i}]", k + 2),
                    ProblemBuilder::linear_expr(coeffs, constant),
                );
                b.add_complementarity(
                    format!("face{}[{i}]", k + 2),
                    ComplementaritySpec {
                        lhs_index: force_rows[k + 1],
                        rhs_index: gap,
                        product_mode: mode,
                    },
                )?;
            }

            // at most one face active
            for a in 0..8 {
                for c in a + 1..8 {
                    b.add_complementarity(
                        format!("excl{}_{}[{i}]", a + 1, c + 1),
                        ComplementaritySpec {
                            lhs_index: force_rows[a],
                            rhs_index: force_rows[c],
                            product_mode: mode,
                        },
                    )?;
                }
            }

            // contact point stays within the tee's bounding envelope
            b.add_inequality(
                format!("cx_hi[{i}]"),
                ProblemBuilder::linear_expr(vec![(cxi, -1.0)], 2.0 * l),
            );
            b.add_inequality(
                format!("cx_lo[{i}]"),
                ProblemBuilder::linear_expr(vec![(cxi, 1.0)], 2.0 * l),
            );
            b.add_inequality(
                format!("cy_lo[{i}]"),
                ProblemBuilder::linear_expr(vec![(cyi, 1.0)], dc * l),
            );
        }

        let mut hess = Vec::new();
        let mut lin = vec![0.0; n];
        for i in 0..self.n_steps {
            for k in 0..8 {
                hess.push((at(i, L0 + k), at(i, L0 + k), 2.0 * self.r_f));
            }
            lin[at(i, V0 + 7)] = self.eps_vw;
            lin[at(i, W0 + 7)] = self.eps_vw;
        }
        let last = self.n_steps - 1;
        let phi = self.target_angle;
        let targets = [
            (PX, self.q_pos, self.target_radius * phi.cos(), MetricGroup::Translation),
            (PY, self.q_pos, self.target_radius * phi.sin(), MetricGroup::Translation),
            (TH, self.q_angle, phi, MetricGroup::Angle),
        ];
        let mut constant = 0.0;
        let mut terminal = Vec::new();
        for (slot, w, target, group) in targets {
            hess.push((at(last, slot), at(last, slot), 2.0 * w));
            lin[at(last, slot)] += -2.0 * w * target;
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
                // stationary pose with consistent absolute-value splits at
                // the contact point cx = cy = 0
                let splits = self.split_defs();
                for i in 0..self.n_steps {
                    x[i * STRIDE + PX] = self.px0;
                    x[i * STRIDE + PY] = self.py0;
                    x[i * STRIDE + TH] = self.theta0;
                    for (k, (_, constant)) in splits.iter().enumerate() {
                        let d = *constant; // d_k at c = 0
                        x[i * STRIDE + V0 + k] = d.max(0.0);
                        x[i * STRIDE + W0 + k] = (-d).max(0.0);
                    }
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
        let params = PushTParams {
            n_steps: 3,
            ..PushTParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn passive_guess_satisfies_equalities() {
        let params = PushTParams {
            n_steps: 6,
            ..PushTParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let x = params.initial_guess(&InitialGuess::PassiveRollout);
        let ce = p.eval_eq(&x).unwrap();
        let max = ce.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max < 1e-10, "max eq residual {max}");
    }
}
