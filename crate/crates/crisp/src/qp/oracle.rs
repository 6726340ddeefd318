//! Brute-force reference solver: enumerate candidate active sets, solve the
//! resulting equality-constrained KKT systems densely, and keep the feasible
//! candidate with the smallest objective. Exponential, so only usable on tiny
//! problems; exists to cross-check the interior-point backend.

use super::{kkt_residuals, KktInfo, QpData, QpError, QpSolution, QpStatus};
use crate::sparse::dense_solve;

const MAX_ROWS: usize = 25;
const FEAS_TOL: f64 = 1e-9;

pub fn solve_qp_oracle(qp: &QpData) -> Result<QpSolution, QpError> {
    let n = qp.n();
    let me = qp.n_eq();
    let mi = qp.n_ineq();

    // general inequalities followed by finite bound rows, as (coeffs, rhs)
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let ineq_dense = qp.a_ineq.to_dense();
    for i in 0..mi {
        rows.push((ineq_dense[i].clone(), qp.b_ineq[i]));
    }
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        if qp.lb[j].is_finite() {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push((r, qp.lb[j]));
            bound_rows.push((j, 1.0));
        }
        if qp.ub[j].is_finite() {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push((r, -qp.ub[j]));
            bound_rows.push((j, -1.0));
        }
    }
    let m_tot = rows.len();
    if m_tot > MAX_ROWS || n + me + m_tot > 2 * MAX_ROWS {
        return Err(QpError::ProblemTooLarge);
    }

    let p_dense = qp.quad.to_dense();
    let eq_dense = qp.a_eq.to_dense();
    let max_active = n.saturating_sub(me).min(m_tot);

    let feasible = |z: &[f64]| -> bool {
        for (i, (coeffs, rhs)) in rows.iter().enumerate() {
            let v: f64 = coeffs.iter().zip(z).map(|(a, b)| a * b).sum();
            let _ = i;
            if v < rhs - FEAS_TOL {
                return false;
            }
        }
        let eqv = qp.a_eq.matvec(z);
        eqv.iter()
            .zip(&qp.b_eq)
            .all(|(v, b)| (v - b).abs() <= FEAS_TOL)
    };

    struct Candidate {
        z: Vec<f64>,
        y_eq: Vec<f64>,
        y_act: Vec<f64>,
        active: Vec<usize>,
        obj: f64,
    }
    let mut best: Option<Candidate> = None;
    let mut tried = 0usize;

    let mut active: Vec<usize> = Vec::new();
    // iterative enumeration of subsets of size 0..=max_active
    fn visit(
        active: &mut Vec<usize>,
        start: usize,
        max_size: usize,
        m_tot: usize,
        try_set: &mut dyn FnMut(&[usize]),
    ) {
        try_set(active);
        if active.len() == max_size {
            return;
        }
        for i in start..m_tot {
            active.push(i);
            visit(active, i + 1, max_size, m_tot, try_set);
            active.pop();
        }
    }

    {
        let mut try_set = |act: &[usize]| {
            tried += 1;
            let k = act.len();
            let dim = n + me + k;
            let mut a = vec![vec![0.0; dim]; dim];
            let mut b = vec![0.0; dim];
            for r in 0..n {
                for c in 0..n {
                    a[r][c] = p_dense[r][c];
                }
                for (c, eq_row) in eq_dense.iter().enumerate() {
                    a[r][n + c] = -eq_row[r];
                }
                for (c, &ai) in act.iter().enumerate() {
                    a[r][n + me + c] = -rows[ai].0[r];
                }
                b[r] = -qp.lin[r];
            }
            for (r, eq_row) in eq_dense.iter().enumerate() {
                a[n + r][..n].copy_from_slice(eq_row);
                b[n + r] = qp.b_eq[r];
            }
            for (r, &ai) in act.iter().enumerate() {
                a[n + me + r][..n].copy_from_slice(&rows[ai].0);
                b[n + me + r] = rows[ai].1;
            }
            let sol = match dense_solve(&mut a, &mut b) {
                Some(s) => s,
                None => return,
            };
            let z = &sol[..n];
            if !feasible(z) {
                return;
            }
            let obj = qp.objective(z);
            let replace = match &best {
                None => true,
                Some(c) => {
                    obj < c.obj - 1e-12
                        || ((obj - c.obj).abs() <= 1e-9
                            && c.y_act.iter().any(|&y| y < -FEAS_TOL)
                            && sol[n + me..].iter().all(|&y| y >= -FEAS_TOL))
                }
            };
            if replace {
                best = Some(Candidate {
                    z: z.to_vec(),
                    y_eq: sol[n..n + me].to_vec(),
                    y_act: sol[n + me..].to_vec(),
                    active: act.to_vec(),
                    obj,
                });
            }
        };
        visit(&mut active, 0, max_active, m_tot, &mut try_set);
    }

    let best = best.ok_or(QpError::NumericalFailure)?;
    let mut y_ineq = vec![0.0; mi];
    let mut y_bounds = vec![0.0; n];
    for (&ai, &y) in best.active.iter().zip(&best.y_act) {
        if ai < mi {
            y_ineq[ai] = y;
        } else {
            let (j, sign) = bound_rows[ai - mi];
            y_bounds[j] += sign * y;
        }
    }
    let mut sol = QpSolution {
        z: best.z,
        y_eq: best.y_eq,
        y_ineq,
        y_bounds,
        status: QpStatus::Optimal,
        kkt: KktInfo {
            primal_res: 0.0,
            dual_res: 0.0,
            gap: 0.0,
        },
        iterations: tried,
    };
    sol.kkt = kkt_residuals(qp, &sol);
    if sol.kkt.max() > 1e-8 {
        sol.status = QpStatus::MaxIter;
    }
    Ok(sol)
}
