//! Sparse convex QP in canonical form and the solver backends.
//!
//! The canonical form is
//!   minimize   0.5 z'Pz + q'z + constant
//!   subject to A_eq z = b_eq,  A_ineq z >= b_ineq,  lb <= z <= ub.

mod ip;
mod oracle;

pub use ip::solve_qp;
pub use oracle::solve_qp_oracle;

use crate::sparse::CscMatrix;
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("numerical failure in QP backend after regularized retry")]
    NumericalFailure,
    #[error("problem too large for the active-set enumeration oracle")]
    ProblemTooLarge,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Index ranges of the trial step and the elastic slacks inside z.
#[derive(Debug, Clone)]
pub struct SliceMap {
    pub p: Range<usize>,
    pub v: Range<usize>,
    pub w: Range<usize>,
    pub t: Range<usize>,
}

impl SliceMap {
    pub fn whole(n: usize) -> Self {
        SliceMap {
            p: 0..n,
            v: n..n,
            w: n..n,
            t: n..n,
        }
    }
}

/// Local linearization data carried alongside the QP so that the nonsmooth
/// model can be evaluated and the second-order correction applied without
/// re-deriving anything from the constraint matrices.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub j_val: f64,
    pub grad_j: Vec<f64>,
    /// c_i(x_k) for equality rows; the matching QP right-hand side is -c_i.
    pub c_eq: Vec<f64>,
    pub c_ineq: Vec<f64>,
}

pub struct QpData {
    /// full symmetric PSD quadratic cost
    pub quad: CscMatrix,
    pub lin: Vec<f64>,
    pub constant: f64,
    pub a_eq: CscMatrix,
    pub b_eq: Vec<f64>,
    pub a_ineq: CscMatrix,
    pub b_ineq: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub slice_map: SliceMap,
    pub model: Option<LocalModel>,
}

impl QpData {
    pub fn n(&self) -> usize {
        self.lin.len()
    }
    pub fn n_eq(&self) -> usize {
        self.b_eq.len()
    }
    pub fn n_ineq(&self) -> usize {
        self.b_ineq.len()
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        0.5 * self.quad.quad_form(z)
            + self.lin.iter().zip(z).map(|(q, v)| q * v).sum::<f64>()
            + self.constant
    }

    /// The always-feasible canonical point: p = 0, equality slacks split the
    /// constraint value into positive and negative parts, inequality slacks
    /// absorb the violation.
    pub fn canonical_point(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n()];
        // b_eq = -c_i, b_ineq = -c_i by construction
        for (k, i) in self.slice_map.v.clone().enumerate() {
            let c = -self.b_eq[k];
            z[i] = c.max(0.0);
        }
        for (k, i) in self.slice_map.w.clone().enumerate() {
            let c = -self.b_eq[k];
            z[i] = (-c).max(0.0);
        }
        for (k, i) in self.slice_map.t.clone().enumerate() {
            let c = -self.b_ineq[k];
            z[i] = (-c).max(0.0);
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum QpStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KktInfo {
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
}

impl KktInfo {
    pub fn max(&self) -> f64 {
        self.primal_res.max(self.dual_res).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: Vec<f64>,
    pub y_eq: Vec<f64>,
    pub y_ineq: Vec<f64>,
    /// combined bound dual: positive entries push off the lower bound,
    /// negative off the upper
    pub y_bounds: Vec<f64>,
    pub status: QpStatus,
    pub kkt: KktInfo,
    pub iterations: usize,
}

/// Infinity-norm KKT residuals of a primal-dual pair.
pub fn kkt_residuals(qp: &QpData, sol: &QpSolution) -> KktInfo {
    let n = qp.n();
    let mut dual = qp.lin.clone();
    qp.quad.axpy(1.0, &sol.z, &mut dual);
    qp.a_eq.axpy_t(-1.0, &sol.y_eq, &mut dual);
    qp.a_ineq.axpy_t(-1.0, &sol.y_ineq, &mut dual);
    for j in 0..n {
        dual[j] -= sol.y_bounds[j];
    }
    let dual_res = dual.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut primal_res = 0.0f64;
    let eq = qp.a_eq.matvec(&sol.z);
    for (v, b) in eq.iter().zip(&qp.b_eq) {
        primal_res = primal_res.max((v - b).abs());
    }
    let ineq = qp.a_ineq.matvec(&sol.z);
    let mut gap = 0.0f64;
    for ((v, b), y) in ineq.iter().zip(&qp.b_ineq).zip(&sol.y_ineq) {
        primal_res = primal_res.max((b - v).max(0.0));
        gap = gap.max((y * (v - b)).abs());
    }
    for j in 0..n {
        primal_res = primal_res.max((qp.lb[j] - sol.z[j]).max(0.0));
        primal_res = primal_res.max((sol.z[j] - qp.ub[j]).max(0.0));
        let yb = sol.y_bounds[j];
        if yb > 0.0 && qp.lb[j].is_finite() {
            gap = gap.max((yb * (sol.z[j] - qp.lb[j])).abs());
        } else if yb < 0.0 && qp.ub[j].is_finite() {
            gap = gap.max((yb * (qp.ub[j] - sol.z[j])).abs());
        }
    }

    KktInfo {
        primal_res,
        dual_res,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qp(
        n: usize,
        quad: Vec<(usize, usize, f64)>,
        lin: Vec<f64>,
        a_eq: Vec<(usize, usize, f64)>,
        b_eq: Vec<f64>,
        a_ineq: Vec<(usize, usize, f64)>,
        b_ineq: Vec<f64>,
        lb: Vec<f64>,
        ub: Vec<f64>,
    ) -> QpData {
        QpData {
            quad: CscMatrix::from_triplets(n, n, &quad),
            lin,
            constant: 0.0,
            a_eq: CscMatrix::from_triplets(b_eq.len(), n, &a_eq),
            b_eq,
            a_ineq: CscMatrix::from_triplets(b_ineq.len(), n, &a_ineq),
            b_ineq,
            lb,
            ub,
            slice_map: SliceMap::whole(n),
            model: None,
        }
    }

    #[test]
    fn scalar_inequality() {
        // min 0.5 p^2 s.t. p >= 1: optimum p = 1 with multiplier 1
        let d = qp(
            1,
            vec![(0, 0, 1.0)],
            vec![0.0],
            vec![],
            vec![],
            vec![(0, 0, 1.0)],
            vec![1.0],
            vec![f64::NEG_INFINITY],
            vec![f64::INFINITY],
        );
        let s = solve_qp(&d, 1e-9, None).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 1.0).abs() < 1e-8);
        assert!((s.y_ineq[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn scalar_bound() {
        // same optimum expressed through a lower bound
        let d = qp(
            1,
            vec![(0, 0, 1.0)],
            vec![0.0],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![1.0],
            vec![f64::INFINITY],
        );
        let s = solve_qp(&d, 1e-9, None).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 1.0).abs() < 1e-8);
        assert!((s.y_bounds[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn equality_only() {
        // min 0.5(x^2 + y^2) s.t. x + y = 2: optimum (1, 1), dual 1
        let d = qp(
            2,
            vec![(0, 0, 1.0), (1, 1, 1.0)],
            vec![0.0, 0.0],
            vec![(0, 0, 1.0), (0, 1, 1.0)],
            vec![2.0],
            vec![],
            vec![],
            vec![f64::NEG_INFINITY; 2],
            vec![f64::INFINITY; 2],
        );
        let s = solve_qp(&d, 1e-9, None).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 1.0).abs() < 1e-9);
        assert!((s.z[1] - 1.0).abs() < 1e-9);
        assert!((s.y_eq[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn oracle_matches_hand_solution() {
        // min (x-2)^2 + (y-2)^2 s.t. x + y <= 2, x,y >= 0: optimum (1,1)
        let d = qp(
            2,
            vec![(0, 0, 2.0), (1, 1, 2.0)],
            vec![-4.0, -4.0],
            vec![],
            vec![],
            vec![(0, 0, -1.0), (0, 1, -1.0)],
            vec![-2.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY; 2],
        );
        let s = solve_qp_oracle(&d).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.z[0] - 1.0).abs() < 1e-9);
        assert!((s.z[1] - 1.0).abs() < 1e-9);
    }

    pub(crate) fn random_qp(seed: u64) -> QpData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        // PSD quadratic cost M'M + 0.1 I
        let m: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut quad = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += m[k][r] * m[k][c];
                }
                if r == c {
                    v += 0.1;
                }
                quad.push((r, c, v));
            }
        }
        let lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        // constraints built around a known feasible point
        let xf: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let me = 2;
        let mut a_eq = Vec::new();
        let mut b_eq = vec![0.0; me];
        for r in 0..me {
            for c in 0..n {
                let v = rng.gen_range(-1.0..1.0);
                a_eq.push((r, c, v));
                b_eq[r] += v * xf[c];
            }
        }
        let mi = 3;
        let mut a_ineq = Vec::new();
        let mut b_ineq = vec![0.0; mi];
        for r in 0..mi {
            for c in 0..n {
                let v = rng.gen_range(-1.0..1.0);
                a_ineq.push((r, c, v));
                b_ineq[r] += v * xf[c];
            }
            b_ineq[r] -= rng.gen_range(0.0..1.0);
        }
        let mut lb = vec![f64::NEG_INFINITY; n];
        let mut ub = vec![f64::INFINITY; n];
        for j in 0..3 {
            lb[j] = xf[j] - rng.gen_range(0.1..2.0);
            if rng.gen_bool(0.5) {
                ub[j] = xf[j] + rng.gen_range(0.1..2.0);
            }
        }
        qp(n, quad, lin, a_eq, b_eq, a_ineq, b_ineq, lb, ub)
    }

    #[test]
    fn backend_matches_oracle_on_random_qps() {
        for seed in 0..30u64 {
            let d = random_qp(seed);
            let reference = solve_qp_oracle(&d).unwrap();
            assert_eq!(reference.status, QpStatus::Optimal, "oracle seed {seed}");
            let s = solve_qp(&d, 1e-8, None).unwrap();
            assert_eq!(s.status, QpStatus::Optimal, "ip seed {seed}");
            assert!(s.kkt.max() <= 1e-8, "seed {seed}: {:?}", s.kkt);
            let diff = (d.objective(&s.z) - d.objective(&reference.z)).abs();
            assert!(diff < 1e-6, "seed {seed}: objective gap {diff}");
        }
    }

    #[test]
    fn warm_start_preserves_status() {
        for seed in 0..10u64 {
            let d = random_qp(seed);
            let cold = solve_qp(&d, 1e-8, None).unwrap();
            let warm = solve_qp(&d, 1e-8, Some(&cold)).unwrap();
            assert_eq!(warm.status, QpStatus::Optimal, "seed {seed}");
            assert!(warm.iterations <= cold.iterations + 2, "seed {seed}");
        }
    }
}
