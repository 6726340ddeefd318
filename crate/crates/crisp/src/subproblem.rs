//! Construction of the convex trust-region subproblem.
//!
//! Around the current iterate the l1 merit function is modeled by a smooth QP
//! in the extended variable z = (p, v, w, t): equality violation splits into
//! nonnegative elastics v - w, inequality violation is absorbed by t >= 0, and
//! each slack is charged its row's penalty weight. The canonical point
//! (p = 0, slacks set to the current violation) is always feasible, so the
//! subproblem never fails for geometric reasons.

use crate::nlp::{NlpError, NlpProblem, PenaltyVector};
use crate::qp::{LocalModel, QpData, SliceMap};
use crate::sparse::CscMatrix;

/// Builds the subproblem QP at `x` with trust radius `delta`. `hess_shift`
/// is an extra diagonal term on the step block, used for a regularized retry
/// when the factorization stalls.
pub fn build_subproblem(
    problem: &NlpProblem,
    x: &[f64],
    mu: &PenaltyVector,
    delta: f64,
    hess_shift: f64,
) -> Result<QpData, NlpError> {
    let n = problem.n_vars;
    let me = problem.n_eq();
    let mi = problem.n_ineq();
    let nz = n + 2 * me + mi;
    let slice_map = SliceMap {
        p: 0..n,
        v: n..n + me,
        w: n + me..n + 2 * me,
        t: n + 2 * me..nz,
    };

    let j_val = problem.objective.value(x);
    let grad_j = problem.objective.gradient(x);
    let c_eq = problem.eval_eq(x)?;
    let c_ineq = problem.eval_ineq(x)?;
    let jac_eq = problem.jac_eq(x);
    let jac_ineq = problem.jac_ineq(x);
    if !j_val.is_finite() || grad_j.iter().any(|v| !v.is_finite()) {
        return Err(NlpError::NonFiniteEvaluation {
            label: "objective".into(),
        });
    }

    let mut quad_trip: Vec<(usize, usize, f64)> = problem.objective.hess.triplets();
    if hess_shift > 0.0 {
        for j in 0..n {
            quad_trip.push((j, j, hess_shift));
        }
    }
    let quad = CscMatrix::from_triplets(nz, nz, &quad_trip);

    let mut lin = vec![0.0; nz];
    lin[..n].copy_from_slice(&grad_j);
    for i in 0..me {
        lin[slice_map.v.start + i] = mu.mu_eq[i];
        lin[slice_map.w.start + i] = mu.mu_eq[i];
    }
    for i in 0..mi {
        lin[slice_map.t.start + i] = mu.mu_ineq[i];
    }

    let mut eq_trip: Vec<(usize, usize, f64)> = jac_eq.triplets();
    for i in 0..me {
        eq_trip.push((i, slice_map.v.start + i, -1.0));
        eq_trip.push((i, slice_map.w.start + i, 1.0));
    }
    let a_eq = CscMatrix::from_triplets(me, nz, &eq_trip);
    let b_eq: Vec<f64> = c_eq.iter().map(|c| -c).collect();

    let mut ineq_trip: Vec<(usize, usize, f64)> = jac_ineq.triplets();
    for i in 0..mi {
        ineq_trip.push((i, slice_map.t.start + i, 1.0));
    }
    let a_ineq = CscMatrix::from_triplets(mi, nz, &ineq_trip);
    let b_ineq: Vec<f64> = c_ineq.iter().map(|c| -c).collect();

    let mut lb = vec![0.0; nz];
    let mut ub = vec![f64::INFINITY; nz];
    for j in 0..n {
        lb[j] = -delta;
        ub[j] = delta;
    }

    Ok(QpData {
        quad,
        lin,
        constant: j_val,
        a_eq,
        b_eq,
        a_ineq,
        b_ineq,
        lb,
        ub,
        slice_map,
        model: Some(LocalModel {
            j_val,
            grad_j,
            c_eq,
            c_ineq,
        }),
    })
}

/// Value of the nonsmooth local model q(p): the quadratic objective model
/// plus the weighted l1 penalty on the linearized constraints. Equals the
/// merit function at p = 0.
pub fn model_value(qp: &QpData, mu: &PenaltyVector, p: &[f64]) -> f64 {
    let model = qp.model.as_ref().expect("subproblem carries a local model");
    let n = qp.slice_map.p.end;
    let mut z = vec![0.0; qp.n()];
    z[..n].copy_from_slice(p);
    let mut val = model.j_val
        + model.grad_j.iter().zip(p).map(|(g, v)| g * v).sum::<f64>()
        + 0.5 * qp.quad.quad_form(&z);
    let jp_eq = qp.a_eq.matvec(&z);
    for (i, c) in model.c_eq.iter().enumerate() {
        val += mu.mu_eq[i] * (c + jp_eq[i]).abs();
    }
    let jp_ineq = qp.a_ineq.matvec(&z);
    for (i, c) in model.c_ineq.iter().enumerate() {
        val += mu.mu_ineq[i] * (-(c + jp_ineq[i])).max(0.0);
    }
    val
}

/// Replaces the constraint constants with their second-order corrected
/// values d_i = c_i(x+p) - c_i(x) - grad c_i . p, keeping the Jacobians and
/// the trust region unchanged.
pub fn apply_second_order_correction(
    qp: &mut QpData,
    problem: &NlpProblem,
    x: &[f64],
    p: &[f64],
) -> Result<(), NlpError> {
    let n = problem.n_vars;
    let mut z = vec![0.0; qp.n()];
    z[..n].copy_from_slice(p);
    let jp_eq = qp.a_eq.matvec(&z);
    let jp_ineq = qp.a_ineq.matvec(&z);
    let xp: Vec<f64> = x.iter().zip(p).map(|(a, b)| a + b).collect();
    let c_eq_xp = problem.eval_eq(&xp)?;
    let c_ineq_xp = problem.eval_ineq(&xp)?;

    let model = qp.model.as_mut().expect("subproblem carries a local model");
    for i in 0..model.c_eq.len() {
        // c_i + d_i = c_i(x+p) - grad c_i . p
        model.c_eq[i] = c_eq_xp[i] - jp_eq[i];
        qp.b_eq[i] = -model.c_eq[i];
    }
    for i in 0..model.c_ineq.len() {
        model.c_ineq[i] = c_ineq_xp[i] - jp_ineq[i];
        qp.b_ineq[i] = -model.c_ineq[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{eval_merit, ComplementaritySpec, ProblemBuilder, ProductMode};
    use crate::qp::solve_qp;

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
    fn canonical_point_is_feasible() {
        let p = toy_mpcc();
        let mu = PenaltyVector::uniform(p.n_eq(), p.n_ineq(), 10.0, 1e6);
        for x in [[1.0, 1.0], [-0.5, 0.3], [2.0, -0.7]] {
            let qp = build_subproblem(&p, &x, &mu, 1.0, 0.0).unwrap();
            let z = qp.canonical_point();
            let eq = qp.a_eq.matvec(&z);
            for (v, b) in eq.iter().zip(&qp.b_eq) {
                assert!((v - b).abs() < 1e-12);
            }
            let ineq = qp.a_ineq.matvec(&z);
            for (v, b) in ineq.iter().zip(&qp.b_ineq) {
                assert!(*v >= b - 1e-12);
            }
            for (j, v) in z.iter().enumerate() {
                assert!(*v >= qp.lb[j] - 1e-12 && *v <= qp.ub[j] + 1e-12);
            }
        }
    }

    #[test]
    fn model_at_zero_equals_merit() {
        let p = toy_mpcc();
        let mu = PenaltyVector::uniform(p.n_eq(), p.n_ineq(), 10.0, 1e6);
        for x in [[1.0, 1.0], [-0.5, 0.3], [0.0, 0.0]] {
            let qp = build_subproblem(&p, &x, &mu, 1.0, 0.0).unwrap();
            let merit = eval_merit(&p, &x, &mu).unwrap();
            let q0 = model_value(&qp, &mu, &[0.0, 0.0]);
            assert!((q0 - merit).abs() <= 1e-10 * merit.abs().max(1.0));
        }
    }

    #[test]
    fn predicted_reduction_is_nonnegative() {
        let p = toy_mpcc();
        let mu = PenaltyVector::uniform(p.n_eq(), p.n_ineq(), 10.0, 1e6);
        let x = [1.0, 1.0];
        let qp = build_subproblem(&p, &x, &mu, 1.0, 0.0).unwrap();
        let sol = solve_qp(&qp, 1e-8, None).unwrap();
        let step = &sol.z[..2];
        let pred = model_value(&qp, &mu, &[0.0, 0.0]) - model_value(&qp, &mu, step);
        assert!(pred >= -1e-8, "pred = {pred}");
        assert!(pred > 0.1); // a real step exists from (1,1)
    }

    #[test]
    fn soc_is_exact_for_quadratic_constraints() {
        // single equality x1^2 + x2 - 1 = 0
        let mut b = ProblemBuilder::new(2);
        b.add_equality(
            "parab",
            ProblemBuilder::closure_expr(
                |x: &[f64]| x[0] * x[0] + x[1] - 1.0,
                |x: &[f64], out: &mut Vec<(usize, f64)>| {
                    out.push((0, 2.0 * x[0]));
                    out.push((1, 1.0));
                },
            ),
        );
        let prob = b.build().unwrap();
        let mu = PenaltyVector::uniform(1, 0, 10.0, 1e6);
        let x = [0.7, -0.2];
        let step = [0.3, 0.5];
        let mut qp = build_subproblem(&prob, &x, &mu, 1.0, 0.0).unwrap();
        apply_second_order_correction(&mut qp, &prob, &x, &step).unwrap();
        // corrected linear model evaluated at the step reproduces c(x+p)
        let model = qp.model.as_ref().unwrap();
        let mut z = vec![0.0; qp.n()];
        z[..2].copy_from_slice(&step);
        let lin_at_step = model.c_eq[0] + qp.a_eq.matvec(&z)[0];
        let truth = prob.eval_eq(&[x[0] + step[0], x[1] + step[1]]).unwrap()[0];
        assert!((lin_at_step - truth).abs() < 1e-12);
    }
}
