//! Problem abstraction: convex-objective NLPs with equality and inequality
//! constraints (inequalities in the `c_i(x) >= 0` convention) and
//! complementarity pairs expanded into ordinary constraint rows.

mod builder;
mod deriv_check;

pub use builder::{expand_complementarity, ComplementaritySpec, ProblemBuilder, ProductMode, ScalarExpr};
pub use deriv_check::{check_derivatives, DerivReport};

use crate::sparse::{CscMatrix, LdltFactor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlpError {
    #[error("non-finite evaluation in constraint '{label}'")]
    NonFiniteEvaluation { label: String },
    #[error("complementarity pair ({0}, {1}) already expanded")]
    DuplicateConstraint(usize, usize),
    #[error("row {0} is not a registered inequality row")]
    NotInequalityRow(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("objective Hessian is not positive semidefinite (min pivot {0:.3e})")]
    HessianNotPsd(f64),
    #[error("objective Hessian is not symmetric (max asymmetry {0:.3e})")]
    HessianAsymmetric(f64),
    #[error("invalid problem specification: {0}")]
    SpecError(String),
}

/// A scalar constraint expression with an analytic sparse gradient.
pub trait RowFn: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Appends (var index, partial derivative) pairs; entries may repeat and
    /// are summed by the consumer.
    fn gradient(&self, x: &[f64], out: &mut Vec<(usize, f64)>);
}

pub(crate) struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl RowFn for LinearRow {
    fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.constant
    }
    fn gradient(&self, _x: &[f64], out: &mut Vec<(usize, f64)>) {
        out.extend_from_slice(&self.coeffs);
    }
}

pub(crate) struct ClosureRow<V, G> {
    pub val: V,
    pub grad: G,
}

impl<V, G> RowFn for ClosureRow<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut Vec<(usize, f64)>) + Send + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.val)(x)
    }
    fn gradient(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        (self.grad)(x, out)
    }
}

/// Product of two registered expressions; the gradient is assembled from the
/// operand gradients as a*grad(b) + b*grad(a).
pub(crate) struct ProductRow {
    pub lhs: ScalarExpr,
    pub rhs: ScalarExpr,
}

impl RowFn for ProductRow {
    fn value(&self, x: &[f64]) -> f64 {
        self.lhs.value(x) * self.rhs.value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        let a = self.lhs.value(x);
        let b = self.rhs.value(x);
        let start = out.len();
        self.lhs.gradient(x, out);
        for e in out[start..].iter_mut() {
            e.1 *= b;
        }
        let start = out.len();
        self.rhs.gradient(x, out);
        for e in out[start..].iter_mut() {
            e.1 *= a;
        }
    }
}

#[derive(Clone)]
pub struct ConstraintRow {
    pub label: String,
    /// true for rows generated from a complementarity pair (a*b terms);
    /// passive-rollout checks skip these since satisfying them is the
    /// solver's job
    pub is_product: bool,
    pub(crate) expr: ScalarExpr,
}

/// Convex quadratic objective 0.5 x'Hx + g'x + c with a constant Hessian.
#[derive(Clone)]
pub struct QuadraticObjective {
    pub hess: CscMatrix,
    pub lin: Vec<f64>,
    pub constant: f64,
}

impl QuadraticObjective {
    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.hess.quad_form(x)
            + self.lin.iter().zip(x).map(|(g, v)| g * v).sum::<f64>()
            + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.lin.clone();
        self.hess.axpy(1.0, x, &mut g);
        g
    }
}

/// Role of a per-step variable, used for trajectory decoding and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VarRole {
    State,
    Control,
    Force,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub role: VarRole,
}

/// Flat-vector layout of a time-indexed problem: `horizon` steps, each
/// holding the per-step variables in declaration order.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct VariableLayout {
    pub horizon: usize,
    pub dt: f64,
    pub per_step: Vec<VarSpec>,
}

impl VariableLayout {
    pub fn stride(&self) -> usize {
        self.per_step.len()
    }
    pub fn n_vars(&self) -> usize {
        self.horizon * self.stride()
    }
    pub fn index(&self, step: usize, slot: usize) -> usize {
        debug_assert!(step < self.horizon && slot < self.stride());
        step * self.stride() + slot
    }
    pub fn slot(&self, name: &str) -> Option<usize> {
        self.per_step.iter().position(|v| v.name == name)
    }
}

/// Error group a terminal tracking target belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MetricGroup {
    Translation,
    TranslationVelocity,
    Angle,
    AngularVelocity,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TerminalTarget {
    pub slot: usize,
    pub target: f64,
    pub group: MetricGroup,
}

#[derive(Clone)]
pub struct NlpProblem {
    pub n_vars: usize,
    pub objective: QuadraticObjective,
    pub eq_rows: Vec<ConstraintRow>,
    pub ineq_rows: Vec<ConstraintRow>,
    pub layout: Option<VariableLayout>,
    pub terminal_targets: Vec<TerminalTarget>,
}

/// Constraint violation summary; `per_row` concatenates the equality block
/// (|c_i|) followed by the inequality block ([c_i]^-).
#[derive(Debug, Clone)]
pub struct ViolationReport {
    pub max_eq: f64,
    pub max_ineq: f64,
    pub per_row: Vec<f64>,
}

impl ViolationReport {
    pub fn max(&self) -> f64 {
        self.max_eq.max(self.max_ineq)
    }
}

impl NlpProblem {
    pub fn n_eq(&self) -> usize {
        self.eq_rows.len()
    }
    pub fn n_ineq(&self) -> usize {
        self.ineq_rows.len()
    }

    pub fn eval_eq(&self, x: &[f64]) -> Result<Vec<f64>, NlpError> {
        eval_rows(&self.eq_rows, x)
    }

    pub fn eval_ineq(&self, x: &[f64]) -> Result<Vec<f64>, NlpError> {
        eval_rows(&self.ineq_rows, x)
    }

    pub fn jac_eq(&self, x: &[f64]) -> CscMatrix {
        jac_rows(&self.eq_rows, self.n_vars, x)
    }

    pub fn jac_ineq(&self, x: &[f64]) -> CscMatrix {
        jac_rows(&self.ineq_rows, self.n_vars, x)
    }

    pub fn constraint_violation(&self, x: &[f64]) -> Result<ViolationReport, NlpError> {
        assert_eq!(x.len(), self.n_vars);
        let ce = self.eval_eq(x)?;
        let ci = self.eval_ineq(x)?;
        let mut per_row = Vec::with_capacity(ce.len() + ci.len());
        let mut max_eq: f64 = 0.0;
        for v in &ce {
            let a = v.abs();
            max_eq = max_eq.max(a);
            per_row.push(a);
        }
        let mut max_ineq: f64 = 0.0;
        for v in &ci {
            let a = (-v).max(0.0);
            max_ineq = max_ineq.max(a);
            per_row.push(a);
        }
        Ok(ViolationReport {
            max_eq,
            max_ineq,
            per_row,
        })
    }
}

fn eval_rows(rows: &[ConstraintRow], x: &[f64]) -> Result<Vec<f64>, NlpError> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let v = row.expr.value(x);
        if !v.is_finite() {
            return Err(NlpError::NonFiniteEvaluation {
                label: row.label.clone(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

fn jac_rows(rows: &[ConstraintRow], n_vars: usize, x: &[f64]) -> CscMatrix {
    let mut triplets = Vec::new();
    let mut scratch = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        scratch.clear();
        row.expr.gradient(x, &mut scratch);
        for &(j, v) in &scratch {
            triplets.push((i, j, v));
        }
    }
    CscMatrix::from_triplets(rows.len(), n_vars, &triplets)
}

/// Per-constraint l1 penalty weights. Entries only ever grow.
#[derive(Debug, Clone)]
pub struct PenaltyVector {
    pub mu_eq: Vec<f64>,
    pub mu_ineq: Vec<f64>,
    pub mu_max: f64,
}

impl PenaltyVector {
    pub fn uniform(n_eq: usize, n_ineq: usize, mu0: f64, mu_max: f64) -> Self {
        assert!(mu0 > 0.0 && mu0 <= mu_max);
        PenaltyVector {
            mu_eq: vec![mu0; n_eq],
            mu_ineq: vec![mu0; n_ineq],
            mu_max,
        }
    }

    pub fn max_entry(&self) -> f64 {
        self.mu_eq
            .iter()
            .chain(self.mu_ineq.iter())
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// Weighted exact l1 penalty merit: J(x) + sum mu_i |c_i| + sum mu_i [c_i]^-.
pub fn eval_merit(problem: &NlpProblem, x: &[f64], mu: &PenaltyVector) -> Result<f64, NlpError> {
    assert_eq!(x.len(), problem.n_vars);
    if mu.mu_eq.len() != problem.n_eq() || mu.mu_ineq.len() != problem.n_ineq() {
        return Err(NlpError::DimensionMismatch(
            "penalty vector does not match constraint counts".into(),
        ));
    }
    let mut merit = problem.objective.value(x);
    for (row, &m) in problem.eq_rows.iter().zip(&mu.mu_eq) {
        let v = row.expr.value(x);
        if !v.is_finite() {
            return Err(NlpError::NonFiniteEvaluation {
                label: row.label.clone(),
            });
        }
        merit += m * v.abs();
    }
    for (row, &m) in problem.ineq_rows.iter().zip(&mu.mu_ineq) {
        let v = row.expr.value(x);
        if !v.is_finite() {
            return Err(NlpError::NonFiniteEvaluation {
                label: row.label.clone(),
            });
        }
        merit += m * (-v).max(0.0);
    }
    Ok(merit)
}

/// One-shot PSD check: attempted LDL' factorization of H + 1e-12 I with a
/// -1e-10 tolerance on the minimum pivot.
pub(crate) fn check_hessian_psd(hess: &CscMatrix) -> Result<(), NlpError> {
    let n = hess.nrows;
    // symmetry check
    let ht = hess.transpose();
    let mut max_asym: f64 = 0.0;
    let d = hess.to_dense();
    let dt = ht.to_dense();
    for i in 0..n {
        for j in 0..n {
            max_asym = max_asym.max((d[i][j] - dt[i][j]).abs());
        }
    }
    if max_asym > 1e-12 {
        return Err(NlpError::HessianAsymmetric(max_asym));
    }
    let mut triplets = Vec::new();
    for (r, c, v) in hess.triplets() {
        if r <= c {
            triplets.push((r, c, v));
        }
    }
    for i in 0..n {
        triplets.push((i, i, 1e-12));
    }
    let upper = CscMatrix::from_triplets(n, n, &triplets);
    match LdltFactor::new(&upper) {
        Ok(f) => {
            if f.min_pivot() < -1e-10 {
                Err(NlpError::HessianNotPsd(f.min_pivot()))
            } else {
                Ok(())
            }
        }
        Err(_) => Err(NlpError::HessianNotPsd(f64::NEG_INFINITY)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::builder::{ComplementaritySpec, ProblemBuilder};
    use std::sync::Arc;

    /// min x1^2 + x2^2  s.t.  0 <= x1  perp  x2 >= 0
    fn toy_mpcc() -> NlpProblem {
        let mut b = ProblemBuilder::new(2);
        b.set_objective(vec![(0, 0, 2.0), (1, 1, 2.0)], vec![0.0, 0.0], 0.0);
        let i1 = b.add_inequality("x1_nonneg", ProblemBuilder::linear_expr(vec![(0, 1.0)], 0.0));
        let i2 = b.add_inequality("x2_nonneg", ProblemBuilder::linear_expr(vec![(1, 1.0)], 0.0));
        b.add_complementarity(
            "x1_perp_x2",
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
    fn toy_mpcc_shape() {
        let p = toy_mpcc();
        assert_eq!(p.n_vars, 2);
        assert_eq!(p.n_eq(), 1);
        assert_eq!(p.n_ineq(), 2);
    }

    #[test]
    fn merit_values() {
        let p = toy_mpcc();
        let mu = PenaltyVector::uniform(p.n_eq(), p.n_ineq(), 10.0, 1e6);
        assert_eq!(eval_merit(&p, &[1.0, 1.0], &mu).unwrap(), 12.0);
        assert_eq!(eval_merit(&p, &[1.0, 0.0], &mu).unwrap(), 1.0);
        assert_eq!(eval_merit(&p, &[0.0, 0.0], &mu).unwrap(), 0.0);
        // violated inequality: x1 = -0.5 contributes 10 * 0.5
        let m = eval_merit(&p, &[-0.5, 0.0], &mu).unwrap();
        assert!((m - (0.25 + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn violation_report() {
        let p = toy_mpcc();
        let r = p.constraint_violation(&[1.0, 1.0]).unwrap();
        assert_eq!(r.max_eq, 1.0);
        assert_eq!(r.max_ineq, 0.0);
        assert_eq!(r.max(), 1.0);
        let r = p.constraint_violation(&[-0.5, 0.0]).unwrap();
        assert_eq!(r.max_eq, 0.0);
        assert_eq!(r.max_ineq, 0.5);
        let r = p.constraint_violation(&[0.0, 0.0]).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn duplicate_pair_rejected() {
        let mut b = ProblemBuilder::new(2);
        let i1 = b.add_inequality("a", ProblemBuilder::linear_expr(vec![(0, 1.0)], 0.0));
        let i2 = b.add_inequality("b", ProblemBuilder::linear_expr(vec![(1, 1.0)], 0.0));
        let spec = ComplementaritySpec {
            lhs_index: i1,
            rhs_index: i2,
            product_mode: ProductMode::Equality,
        };
        b.add_complementarity("p", spec.clone()).unwrap();
        assert!(matches!(
            b.add_complementarity("p2", spec),
            Err(NlpError::DuplicateConstraint(_, _))
        ));
    }

    #[test]
    fn derivative_check_passes_on_toy() {
        let p = toy_mpcc();
        let r = check_derivatives(&p, &[0.3, 0.7], 1e-6);
        assert!(r.pass(), "{:?}", r);
        assert!(r.max_rel_err() < 1e-6);
    }

    #[test]
    fn derivative_check_flags_wrong_gradient() {
        let mut b = ProblemBuilder::new(2);
        // value x1*x2 but gradient with a flipped sign on x2
        b.add_equality(
            "bad",
            ProblemBuilder::closure_expr(
                |x: &[f64]| x[0] * x[1],
                |x: &[f64], out: &mut Vec<(usize, f64)>| {
                    out.push((0, x[1]));
                    out.push((1, -x[0]));
                },
            ),
        );
        let p = b.build().unwrap();
        let r = check_derivatives(&p, &[0.4, 0.8], 1e-6);
        assert!(!r.pass());
    }

    #[test]
    fn product_row_gradient() {
        let a: ScalarExpr = Arc::new(LinearRow {
            coeffs: vec![(0, 2.0)],
            constant: 1.0,
        });
        let b: ScalarExpr = Arc::new(LinearRow {
            coeffs: vec![(1, 3.0)],
            constant: -1.0,
        });
        let row = ProductRow { lhs: a, rhs: b };
        let x = [0.5, 1.0];
        assert!((row.value(&x) - 2.0 * 2.0).abs() < 1e-14);
        let mut g = Vec::new();
        row.gradient(&x, &mut g);
        let mut dense = [0.0; 2];
        for (j, v) in g {
            dense[j] += v;
        }
        // d/dx1 = 2*(3 x2 - 1) = 4, d/dx2 = 3*(2 x1 + 1) = 6
        assert!((dense[0] - 4.0).abs() < 1e-14);
        assert!((dense[1] - 6.0).abs() < 1e-14);
    }
}
