//! Primal-dual interior-point backend (Mehrotra predictor-corrector).
//!
//! Bounds are folded into the inequality block as identity rows, the KKT
//! system is solved with a sparse LDL' factorization of the regularized
//! quasidefinite matrix, and iterative refinement recovers the accuracy lost
//! to the static regularization. Data is equilibrated once up front with a
//! Ruiz-style scaling.

use super::{kkt_residuals, KktInfo, QpData, QpError, QpSolution, QpStatus};
use crate::sparse::{CscMatrix, LdltFactor};

const MAX_ITERS: usize = 200;
const STATIC_REG: f64 = 1e-9;
const FRACTION_TO_BOUNDARY: f64 = 0.995;
const RUIZ_ROUNDS: usize = 10;

struct Scaling {
    d: Vec<f64>,    // variable scaling
    e: Vec<f64>,    // row scaling, equalities then inequality block
    cost: f64,      // objective scaling
}

fn scale_rows_cols(m: &mut CscMatrix, row: &[f64], col: &[f64]) {
    for j in 0..m.ncols {
        for k in m.colptr[j]..m.colptr[j + 1] {
            m.values[k] *= row[m.rowind[k]] * col[j];
        }
    }
}

fn col_inf_norms(m: &CscMatrix, out: &mut [f64]) {
    for j in 0..m.ncols {
        for k in m.colptr[j]..m.colptr[j + 1] {
            out[j] = out[j].max(m.values[k].abs());
        }
    }
}

fn row_inf_norms(m: &CscMatrix, out: &mut [f64]) {
    for j in 0..m.ncols {
        for k in m.colptr[j]..m.colptr[j + 1] {
            out[m.rowind[k]] = out[m.rowind[k]].max(m.values[k].abs());
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve the canonical QP to the requested KKT tolerance. An optional warm
/// start seeds the interior-point iteration from a previous solution.
pub fn solve_qp(
    qp: &QpData,
    tol: f64,
    warm: Option<&QpSolution>,
) -> Result<QpSolution, QpError> {
    let n = qp.n();
    let me = qp.n_eq();
    let mi = qp.n_ineq();
    if qp.lb.len() != n || qp.ub.len() != n {
        return Err(QpError::DimensionMismatch("bound length != n".into()));
    }
    if qp.a_eq.nrows != me || qp.a_eq.ncols != n || qp.a_ineq.ncols != n {
        return Err(QpError::DimensionMismatch("constraint matrix shape".into()));
    }

    // Stack general inequalities and finite bounds into G z >= h.
    let mut g_trip: Vec<(usize, usize, f64)> = qp.a_ineq.triplets();
    let mut h: Vec<f64> = qp.b_ineq.clone();
    // (variable, +1 for lower bound, -1 for upper bound)
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        if qp.lb[j].is_finite() {
            g_trip.push((mi + bound_rows.len(), j, 1.0));
            h.push(qp.lb[j]);
            bound_rows.push((j, 1.0));
        }
        if qp.ub[j].is_finite() {
            g_trip.push((mi + bound_rows.len(), j, -1.0));
            h.push(-qp.ub[j]);
            bound_rows.push((j, -1.0));
        }
    }
    let mg = h.len();
    let mut g = CscMatrix::from_triplets(mg, n, &g_trip);

    // Ruiz equilibration of [[P, A'], [A, 0]] with A = [A_eq; G], followed by
    // a scalar cost scaling each round.
    let mut p_s = qp.quad.clone();
    let mut q_s = qp.lin.clone();
    let mut aeq_s = qp.a_eq.clone();
    let mut beq_s = qp.b_eq.clone();
    let mut h_s = h.clone();
    let mut scal = Scaling {
        d: vec![1.0; n],
        e: vec![1.0; me + mg],
        cost: 1.0,
    };
    for _ in 0..RUIZ_ROUNDS {
        let mut cn = vec![0.0f64; n];
        col_inf_norms(&p_s, &mut cn);
        col_inf_norms(&aeq_s, &mut cn);
        col_inf_norms(&g, &mut cn);
        let mut rn = vec![0.0f64; me + mg];
        row_inf_norms(&aeq_s, &mut rn[..me]);
        row_inf_norms(&g, &mut rn[me..]);
        let dd: Vec<f64> = cn
            .iter()
            .map(|&v| if v > 1e-10 { 1.0 / v.sqrt() } else { 1.0 })
            .collect();
        let ee: Vec<f64> = rn
            .iter()
            .map(|&v| if v > 1e-10 { 1.0 / v.sqrt() } else { 1.0 })
            .collect();
        scale_rows_cols(&mut p_s, &dd, &dd);
        scale_rows_cols(&mut aeq_s, &ee[..me], &dd);
        scale_rows_cols(&mut g, &ee[me..], &dd);
        for j in 0..n {
            q_s[j] *= dd[j];
            scal.d[j] *= dd[j];
        }
        for i in 0..me {
            beq_s[i] *= ee[i];
            scal.e[i] *= ee[i];
        }
        for i in 0..mg {
            h_s[i] *= ee[me + i];
            scal.e[me + i] *= ee[me + i];
        }
        // cost scaling
        let mut pc = vec![0.0f64; n];
        col_inf_norms(&p_s, &mut pc);
        let mean = if n > 0 {
            pc.iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        let denom = mean.max(inf_norm(&q_s));
        let gamma = if denom > 1e-12 { 1.0 / denom } else { 1.0 };
        for v in p_s.values.iter_mut() {
            *v *= gamma;
        }
        for v in q_s.iter_mut() {
            *v *= gamma;
        }
        scal.cost *= gamma;
    }

    // No inequalities at all: one Newton solve on the equality KKT system.
    if mg == 0 {
        return solve_equality_qp(qp, tol, &p_s, &q_s, &aeq_s, &beq_s, &scal);
    }

    // Assemble the upper triangle of the quasidefinite KKT matrix
    //   [ P    A_eq'  G'      ]
    //   [ A_eq  -dI    0      ]
    //   [ G      0   -(W+dI)  ]
    // with W = diag(s / lambda) refreshed every iteration.
    let dim = n + me + mg;
    let mut reg = STATIC_REG;
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    for (r, c, v) in p_s.triplets() {
        if r <= c {
            trip.push((r, c, v));
        }
    }
    for j in 0..n {
        trip.push((j, j, reg));
    }
    for (r, c, v) in aeq_s.triplets() {
        trip.push((c, n + r, v));
    }
    for i in 0..me {
        trip.push((n + i, n + i, -reg));
    }
    for (r, c, v) in g.triplets() {
        trip.push((c, n + me + r, v));
    }
    for i in 0..mg {
        trip.push((n + me + i, n + me + i, -1.0 - reg));
    }
    let mut kkt = CscMatrix::from_triplets(dim, dim, &trip);
    let mut diag_pos = vec![usize::MAX; dim];
    for j in 0..dim {
        for k in kkt.colptr[j]..kkt.colptr[j + 1] {
            if kkt.rowind[k] == j {
                diag_pos[j] = k;
            }
        }
    }
    let base_values = kkt.values.clone();

    let mut factor = match LdltFactor::new(&kkt) {
        Ok(f) => f,
        Err(_) => {
            // regularized retry with a heavier static shift
            reg = 1e-6;
            for j in 0..n {
                kkt.values[diag_pos[j]] = base_values[diag_pos[j]] - STATIC_REG + reg;
            }
            for j in n..dim {
                kkt.values[diag_pos[j]] = base_values[diag_pos[j]] + STATIC_REG - reg;
            }
            LdltFactor::new(&kkt).map_err(|_| QpError::NumericalFailure)?
        }
    };

    let refine_solve = |factor: &LdltFactor, w: &[f64], rhs: &[f64]| -> Vec<f64> {
        let mut x = factor.solve(rhs);
        for _ in 0..2 {
            let mut r = rhs.to_vec();
            // r -= K x (true Newton matrix, no regularization)
            let mut tmp = vec![0.0; n];
            p_s.axpy(1.0, &x[..n], &mut tmp);
            aeq_s.axpy_t(1.0, &x[n..n + me], &mut tmp);
            g.axpy_t(1.0, &x[n + me..], &mut tmp);
            for j in 0..n {
                r[j] -= tmp[j];
            }
            let eq = aeq_s.matvec(&x[..n]);
            for i in 0..me {
                r[n + i] -= eq[i];
            }
            let gi = g.matvec(&x[..n]);
            for i in 0..mg {
                r[n + me + i] -= gi[i] - w[i] * x[n + me + i];
            }
            if inf_norm(&r) < 1e-13 {
                break;
            }
            let dx = factor.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    };

    // Initial point: solve the KKT system with W = I and shift the slack and
    // multiplier blocks into the positive orthant.
    let mut z = vec![0.0; n];
    let mut y = vec![0.0; me];
    let mut s = vec![1.0; mg];
    let mut lam = vec![1.0; mg];
    {
        let mut seeded = false;
        if let Some(ws) = warm {
            if ws.z.len() == n && ws.y_eq.len() == me {
                for j in 0..n {
                    z[j] = ws.z[j] / scal.d[j];
                }
                for i in 0..me {
                    y[i] = scal.cost * ws.y_eq[i] / scal.e[i];
                }
                for i in 0..mi {
                    lam[i] = scal.cost * ws.y_ineq[i] / scal.e[me + i];
                }
                for (k, &(j, sign)) in bound_rows.iter().enumerate() {
                    lam[mi + k] =
                        scal.cost * (sign * ws.y_bounds[j]) / scal.e[me + mi + k];
                }
                let gz = g.matvec(&z);
                for i in 0..mg {
                    s[i] = gz[i] - h_s[i];
                }
                seeded = true;
            }
        }
        if !seeded {
            let w1 = vec![1.0; mg];
            let mut rhs = vec![0.0; dim];
            for j in 0..n {
                rhs[j] = -q_s[j];
            }
            rhs[n..n + me].copy_from_slice(&beq_s);
            rhs[n + me..].copy_from_slice(&h_s);
            let x0 = refine_solve(&factor, &w1, &rhs);
            z.copy_from_slice(&x0[..n]);
            for i in 0..me {
                y[i] = -x0[n + i];
            }
            let gz = g.matvec(&z);
            for i in 0..mg {
                s[i] = gz[i] - h_s[i];
                lam[i] = -x0[n + me + i];
            }
        }
        let ds = (-1.5 * s.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
        let dl = (-1.5 * lam.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
        for v in s.iter_mut() {
            *v += ds;
        }
        for v in lam.iter_mut() {
            *v += dl;
        }
        let dot: f64 = s.iter().zip(&lam).map(|(a, b)| a * b).sum();
        let sum_s: f64 = s.iter().sum();
        let sum_l: f64 = lam.iter().sum();
        let shift_s = if sum_l > 1e-12 { 0.5 * dot / sum_l } else { 1.0 };
        let shift_l = if sum_s > 1e-12 { 0.5 * dot / sum_s } else { 1.0 };
        for v in s.iter_mut() {
            *v += shift_s + 1e-8;
        }
        for v in lam.iter_mut() {
            *v += shift_l + 1e-8;
        }
    }

    let build_solution = |z: &[f64], y: &[f64], lam: &[f64], iters: usize| -> QpSolution {
        let mut zu: Vec<f64> = (0..n).map(|j| scal.d[j] * z[j]).collect();
        for j in 0..n {
            zu[j] = zu[j].max(qp.lb[j]).min(qp.ub[j]);
        }
        let y_eq: Vec<f64> = (0..me).map(|i| scal.e[i] * y[i] / scal.cost).collect();
        let y_ineq: Vec<f64> = (0..mi)
            .map(|i| scal.e[me + i] * lam[i] / scal.cost)
            .collect();
        let mut y_bounds = vec![0.0; n];
        for (k, &(j, sign)) in bound_rows.iter().enumerate() {
            y_bounds[j] += sign * scal.e[me + mi + k] * lam[mi + k] / scal.cost;
        }
        let mut sol = QpSolution {
            z: zu,
            y_eq,
            y_ineq,
            y_bounds,
            status: QpStatus::MaxIter,
            kkt: KktInfo {
                primal_res: f64::INFINITY,
                dual_res: f64::INFINITY,
                gap: f64::INFINITY,
            },
            iterations: iters,
        };
        sol.kkt = kkt_residuals(qp, &sol);
        sol
    };

    let mut best: Option<QpSolution> = None;
    for iter in 0..MAX_ITERS {
        // residuals in scaled space
        let mut r_d = q_s.clone();
        p_s.axpy(1.0, &z, &mut r_d);
        aeq_s.axpy_t(-1.0, &y, &mut r_d);
        g.axpy_t(-1.0, &lam, &mut r_d);
        let mut r_e = aeq_s.matvec(&z);
        for i in 0..me {
            r_e[i] -= beq_s[i];
        }
        let gz = g.matvec(&z);
        let mut r_i = vec![0.0; mg];
        for i in 0..mg {
            r_i[i] = gz[i] - s[i] - h_s[i];
        }
        let mu = s.iter().zip(&lam).map(|(a, b)| a * b).sum::<f64>() / mg as f64;

        // unscaled convergence check
        let cand = build_solution(&z, &y, &lam, iter);
        let score = cand.kkt.max();
        if best.as_ref().map_or(true, |b| score < b.kkt.max()) {
            best = Some(cand);
        }
        let b = best.as_ref().unwrap();
        if b.kkt.max() <= tol {
            let mut out = best.take().unwrap();
            out.status = QpStatus::Optimal;
            return Ok(out);
        }

        // refresh W and refactor
        let mut w = vec![0.0; mg];
        kkt.values.copy_from_slice(&base_values);
        for j in 0..n {
            kkt.values[diag_pos[j]] = base_values[diag_pos[j]] - STATIC_REG + reg;
        }
        for i in 0..me {
            kkt.values[diag_pos[n + i]] = -reg;
        }
        for i in 0..mg {
            w[i] = (s[i] / lam[i]).max(1e-12);
            kkt.values[diag_pos[n + me + i]] = -(w[i] + reg);
        }
        if factor.refactor(&kkt.values).is_err() {
            if reg < 1e-6 {
                reg = 1e-6;
                for j in 0..n {
                    kkt.values[diag_pos[j]] = base_values[diag_pos[j]] - STATIC_REG + reg;
                }
                for i in 0..me {
                    kkt.values[diag_pos[n + i]] = -reg;
                }
                for i in 0..mg {
                    kkt.values[diag_pos[n + me + i]] = -(w[i] + reg);
                }
                if factor.refactor(&kkt.values).is_err() {
                    return Err(QpError::NumericalFailure);
                }
            } else {
                return Err(QpError::NumericalFailure);
            }
        }

        // affine (predictor) direction
        let mut rhs = vec![0.0; dim];
        for j in 0..n {
            rhs[j] = -r_d[j];
        }
        for i in 0..me {
            rhs[n + i] = -r_e[i];
        }
        for i in 0..mg {
            // -r_i - Lambda^{-1} r_c with r_c = s.*lam
            rhs[n + me + i] = -r_i[i] - s[i];
        }
        let aff = refine_solve(&factor, &w, &rhs);
        let dz_a = &aff[..n];
        let dlam_a: Vec<f64> = aff[n + me..].iter().map(|v| -v).collect();
        let ds_a: Vec<f64> = (0..mg)
            .map(|i| -(s[i] * lam[i] + s[i] * dlam_a[i]) / lam[i])
            .collect();
        let _ = dz_a;

        let alpha_aff = {
            let mut a = 1.0f64;
            for i in 0..mg {
                if ds_a[i] < 0.0 {
                    a = a.min(-s[i] / ds_a[i]);
                }
                if dlam_a[i] < 0.0 {
                    a = a.min(-lam[i] / dlam_a[i]);
                }
            }
            a
        };
        let mu_aff = (0..mg)
            .map(|i| (s[i] + alpha_aff * ds_a[i]) * (lam[i] + alpha_aff * dlam_a[i]))
            .sum::<f64>()
            / mg as f64;
        let sigma = (mu_aff / mu).max(0.0).min(1.0).powi(3);

        // corrector
        for i in 0..mg {
            let r_c = s[i] * lam[i] - sigma * mu + ds_a[i] * dlam_a[i];
            rhs[n + me + i] = -r_i[i] - r_c / lam[i];
        }
        let dir = refine_solve(&factor, &w, &rhs);
        let dz = &dir[..n];
        let dy: Vec<f64> = dir[n..n + me].iter().map(|v| -v).collect();
        let dlam: Vec<f64> = dir[n + me..].iter().map(|v| -v).collect();
        let ds: Vec<f64> = (0..mg)
            .map(|i| {
                let r_c = s[i] * lam[i] - sigma * mu + ds_a[i] * dlam_a[i];
                -(r_c + s[i] * dlam[i]) / lam[i]
            })
            .collect();

        let mut alpha = 1.0f64;
        for i in 0..mg {
            if ds[i] < 0.0 {
                alpha = alpha.min(-FRACTION_TO_BOUNDARY * s[i] / ds[i]);
            }
            if dlam[i] < 0.0 {
                alpha = alpha.min(-FRACTION_TO_BOUNDARY * lam[i] / dlam[i]);
            }
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            break;
        }
        for j in 0..n {
            z[j] += alpha * dz[j];
        }
        for i in 0..me {
            y[i] += alpha * dy[i];
        }
        for i in 0..mg {
            s[i] = (s[i] + alpha * ds[i]).max(1e-300);
            lam[i] = (lam[i] + alpha * dlam[i]).max(1e-300);
        }
    }

    let mut out = best.unwrap_or_else(|| build_solution(&z, &y, &lam, MAX_ITERS));
    out.status = if out.kkt.max() <= tol {
        QpStatus::Optimal
    } else {
        QpStatus::MaxIter
    };
    Ok(out)
}

/// Direct KKT solve for QPs without inequality constraints or finite bounds.
#[allow(clippy::too_many_arguments)]
fn solve_equality_qp(
    qp: &QpData,
    tol: f64,
    p_s: &CscMatrix,
    q_s: &[f64],
    aeq_s: &CscMatrix,
    beq_s: &[f64],
    scal: &Scaling,
) -> Result<QpSolution, QpError> {
    let n = qp.n();
    let me = qp.n_eq();
    let dim = n + me;
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    for (r, c, v) in p_s.triplets() {
        if r <= c {
            trip.push((r, c, v));
        }
    }
    for j in 0..n {
        trip.push((j, j, STATIC_REG));
    }
    for (r, c, v) in aeq_s.triplets() {
        trip.push((c, n + r, v));
    }
    for i in 0..me {
        trip.push((n + i, n + i, -STATIC_REG));
    }
    let kkt = CscMatrix::from_triplets(dim, dim, &trip);
    let factor = LdltFactor::new(&kkt).map_err(|_| QpError::NumericalFailure)?;
    let mut rhs = vec![0.0; dim];
    for j in 0..n {
        rhs[j] = -q_s[j];
    }
    rhs[n..].copy_from_slice(beq_s);
    let mut x = factor.solve(&rhs);
    for _ in 0..3 {
        let mut r = rhs.clone();
        let mut tmp = vec![0.0; n];
        p_s.axpy(1.0, &x[..n], &mut tmp);
        aeq_s.axpy_t(1.0, &x[n..], &mut tmp);
        for j in 0..n {
            r[j] -= tmp[j];
        }
        let eq = aeq_s.matvec(&x[..n]);
        for i in 0..me {
            r[n + i] -= eq[i];
        }
        if inf_norm(&r) < 1e-14 {
            break;
        }
        let dx = factor.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let z: Vec<f64> = (0..n).map(|j| scal.d[j] * x[j]).collect();
    let y_eq: Vec<f64> = (0..me).map(|i| -scal.e[i] * x[n + i] / scal.cost).collect();
    let mut sol = QpSolution {
        z,
        y_eq,
        y_ineq: Vec::new(),
        y_bounds: vec![0.0; n],
        status: QpStatus::Optimal,
        kkt: KktInfo {
            primal_res: 0.0,
            dual_res: 0.0,
            gap: 0.0,
        },
        iterations: 1,
    };
    sol.kkt = kkt_residuals(qp, &sol);
    if sol.kkt.max() > tol {
        sol.status = QpStatus::MaxIter;
    }
    Ok(sol)
}
