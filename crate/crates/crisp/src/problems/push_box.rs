//! Planar box pushing with quasi-static ellipsoidal limit-surface dynamics.
//!
//! The box pose is (p_x, p_y, theta); a single contact point (c_x, c_y) in
//! body frame can exert a normal force on any of the four faces. Face choice
//! is contact-implicit: each face force is complementary to the gap between
//! the contact point and that face, and pairwise exclusivity products keep
//! at most one face active. Body-frame forces map to pose velocities through
//! the limit surface normalized by mu*m*g.

use super::{apply_noise, InitialGuess, ProblemDef};
use crate::nlp::{
    ComplementaritySpec, MetricGroup, NlpError, NlpProblem, ProblemBuilder, ProductMode,
    TerminalTarget, VarRole, VarSpec, VariableLayout,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushBoxParams {
    pub n_steps: usize,
    pub dt: f64,
    /// half-extents of the box
    pub a: f64,
    pub b: f64,
    /// ground friction coefficient, box mass, gravity
    pub mu: f64,
    pub m: f64,
    pub g: f64,
    /// limit-surface integration constant in [0, 1]
    pub c: f64,
    /// characteristic contact distance
    pub r: f64,
    /// initial pose
    pub px0: f64,
    pub py0: f64,
    pub theta0: f64,
    /// target pose: radius * (cos phi, sin phi) with heading phi
    pub target_radius: f64,
    pub target_angle: f64,
    pub r_f: f64,
    pub q_pos: f64,
    pub q_angle: f64,
}

impl Default for PushBoxParams {
    fn default() -> Self {
        PushBoxParams {
            n_steps: 200,
            dt: 0.02,
            a: 0.25,
            b: 0.25,
            mu: 0.3,
            m: 1.0,
            g: 9.81,
            c: 0.6,
            r: 0.25,
            px0: 0.0,
            py0: 0.0,
            theta0: 0.0,
            target_radius: 3.0,
            target_angle: 0.0,
            r_f: 0.01,
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
const L1Y: usize = 5;
const L2X: usize = 6;
const L3Y: usize = 7;
const L4X: usize = 8;
const STRIDE: usize = 9;

impl ProblemDef for PushBoxParams {
    fn name(&self) -> &'static str {
        "push_box"
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
                spec("px", VarRole::State),
                spec("py", VarRole::State),
                spec("theta", VarRole::State),
                spec("cx", VarRole::State),
                spec("cy", VarRole::State),
                spec("lambda1y", VarRole::Force),
                spec("lambda2x", VarRole::Force),
                spec("lambda3y", VarRole::Force),
                spec("lambda4x", VarRole::Force),
            ],
        };
        let n = layout.n_vars();
        let mut b = ProblemBuilder::new(n);
        let at = |i: usize, slot: usize| i * STRIDE + slot;
        let dt = self.dt;
        // translational and rotational limit-surface gains
        let kt = dt / (self.mu * self.m * self.g);
        let kr = dt / (self.c * self.r * self.mu * self.m * self.g);

        for (slot, value) in [(PX, self.px0), (PY, self.py0), (TH, self.theta0)] {
            b.add_equality(
                format!("init[{slot}]"),
                ProblemBuilder::linear_expr(vec![(at(0, slot), 1.0)], -value),
            );
        }

        for i in 0..self.n_steps - 1 {
            let (pxi, pyi, thi, cxi, cyi) =
                (at(i, PX), at(i, PY), at(i, TH), at(i, CX), at(i, CY));
            let (l1, l2, l3, l4) = (at(i, L1Y), at(i, L2X), at(i, L3Y), at(i, L4X));
            let (pxn, pyn, thn) = (at(i + 1, PX), at(i + 1, PY), at(i + 1, TH));

            b.add_equality(
                format!("dyn_px[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        x[pxn] - x[pxi] - kt * (fx * c - fy * s)
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        out.push((pxn, 1.0));
                        out.push((pxi, -1.0));
                        out.push((l2, -kt * c));
                        out.push((l4, -kt * c));
                        out.push((l1, kt * s));
                        out.push((l3, kt * s));
                        out.push((thi, kt * (fx * s + fy * c)));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_py[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let (s, c) = x[thi].sin_cos();
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        x[pyn] - x[pyi] - kt * (fx * s + fy * c)
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let (s, c) = x[thi].sin_cos();
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        out.push((pyn, 1.0));
                        out.push((pyi, -1.0));
                        out.push((l2, -kt * s));
                        out.push((l4, -kt * s));
                        out.push((l1, -kt * c));
                        out.push((l3, -kt * c));
                        out.push((thi, -kt * (fx * c - fy * s)));
                    },
                ),
            );
            b.add_equality(
                format!("dyn_th[{i}]"),
                ProblemBuilder::closure_expr(
                    move |x: &[f64]| {
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        x[thn] - x[thi] - kr * (x[cxi] * fy - x[cyi] * fx)
                    },
                    move |x: &[f64], out: &mut Vec<(usize, f64)>| {
                        let fx = x[l2] + x[l4];
                        let fy = x[l1] + x[l3];
                        out.push((thn, 1.0));
                        out.push((thi, -1.0));
                        out.push((cxi, -kr * fy));
                        out.push((cyi, kr * fx));
                        out.push((l1, -kr * x[cxi]));
                        out.push((l3, -kr * x[cxi]));
                        out.push((l2, kr * x[cyi]));
                        out.push((l4, kr * x[cyi]));
                    },
                ),
            );
        }

        for i in 0..self.n_steps {
            let (cxi, cyi) = (at(i, CX), at(i, CY));
            let (l1, l2, l3, l4) = (at(i, L1Y), at(i, L2X), at(i, L3Y), at(i, L4X));
            // signed face forces, all constrained nonnegative: lambda3y and
            // lambda4x push in negative directions
            let f1 = b.add_inequality(
                format!("f_bottom[{i}]"),
                ProblemBuilder::linear_expr(vec![(l1, 1.0)], 0.0),
            );
            let f2 = b.add_inequality(
                format!("f_left[{i}]"),
                ProblemBuilder::linear_expr(vec![(l2, 1.0)], 0.0),
            );
            let f3 = b.add_inequality(
                format!("f_top[{i}]"),
                ProblemBuilder::linear_expr(vec![(l3, -1.0)], 0.0),
            );
            let f4 = b.add_inequality(
                format!("f_right[{i}]"),
                ProblemBuilder::linear_expr(vec![(l4, -1.0)], 0.0),
            );
            let g1 = b.add_inequality(
                format!("gap_bottom[{i}]"),
                ProblemBuilder::linear_expr(vec![(cyi, 1.0)], self.b),
            );
            let g2 = b.add_inequality(
                format!("gap_left[{i}]"),
                ProblemBuilder::linear_expr(vec![(cxi, 1.0)], self.a),
            );
            let g3 = b.add_inequality(
                format!("gap_top[{i}]"),
                ProblemBuilder::linear_expr(vec![(cyi, -1.0)], self.b),
            );
            let g4 = b.add_inequality(
                format!("gap_right[{i}]"),
                ProblemBuilder::linear_expr(vec![(cxi, -1.0)], self.a),
            );
            for (label, f, gap) in [
                ("face_bottom", f1, g1),
                ("face_left", f2, g2),
                ("face_top", f3, g3),
                ("face_right", f4, g4),
            ] {
                b.add_complementarity(
                    format!("{label}[{i}]"),
                    ComplementaritySpec {
                        lhs_index: f,
                        rhs_index: gap,
                        product_mode: mode,
                    },
                )?;
            }
            // at most one face active
            let faces = [f1, f2, f3, f4];
            for (ai, &lhs) in faces.iter().enumerate() {
                for &rhs in faces.iter().skip(ai + 1) {
                    b.add_complementarity(
                        format!("excl[{i}][{lhs}x{rhs}]"),
                        ComplementaritySpec {
                            lhs_index: lhs,
                            rhs_index: rhs,
                            product_mode: mode,
                        },
                    )?;
                }
            }
        }

        let mut hess = Vec::new();
        for i in 0..self.n_steps {
            for slot in [L1Y, L2X, L3Y, L4X] {
                hess.push((at(i, slot), at(i, slot), 2.0 * self.r_f));
            }
        }
        let last = self.n_steps - 1;
        let phi = self.target_angle;
        let targets = [
            (PX, self.q_pos, self.target_radius * phi.cos()),
            (PY, self.q_pos, self.target_radius * phi.sin()),
            (TH, self.q_angle, phi),
        ];
        let mut lin = vec![0.0; n];
        let mut constant = 0.0;
        for (slot, w, target) in targets {
            hess.push((at(last, slot), at(last, slot), 2.0 * w));
            lin[at(last, slot)] = -2.0 * w * target;
            constant += w * target * target;
        }
        b.set_objective(hess, lin, constant);

        b.set_terminal_targets(vec![
            TerminalTarget {
                slot: PX,
                target: targets[0].2,
                group: MetricGroup::Translation,
            },
            TerminalTarget {
                slot: PY,
                target: targets[1].2,
                group: MetricGroup::Translation,
            },
            TerminalTarget {
                slot: TH,
                target: phi,
                group: MetricGroup::Angle,
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
                // zero forces: the box never moves from its initial pose
                for i in 0..self.n_steps {
                    x[i * STRIDE + PX] = self.px0;
                    x[i * STRIDE + PY] = self.py0;
                    x[i * STRIDE + TH] = self.theta0;
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
        let params = PushBoxParams {
            n_steps: 5,
            ..PushBoxParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.n_vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_derivatives(&p, &x, 1e-6);
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn pure_left_force_pushes_along_body_x() {
        // a single left-face force at cy = 0 translates the box along +x
        let params = PushBoxParams {
            n_steps: 2,
            ..PushBoxParams::default()
        };
        let p = params.build(ProductMode::Equality).unwrap();
        let mut x = vec![0.0; p.n_vars];
        x[L2X] = 1.0; // force at step 0
        x[CX] = -params.a;
        x[STRIDE + PX] = params.dt / (params.mu * params.m * params.g);
        let ce = p.eval_eq(&x).unwrap();
        // the three dynamics rows (after the 3 init rows) balance exactly
        for (i, v) in ce.iter().take(6).enumerate() {
            assert!(v.abs() < 1e-12, "row {i}: {v}");
        }
    }
}
