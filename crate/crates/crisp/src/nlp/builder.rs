//! Incremental problem construction, including expansion of complementarity
//! pairs into ordinary constraint rows.

use super::{
    check_hessian_psd, ClosureRow, ConstraintRow, LinearRow, NlpError, NlpProblem, ProductRow,
    QuadraticObjective, RowFn, TerminalTarget, VariableLayout,
};
use crate::sparse::CscMatrix;
use std::collections::HashSet;
use std::sync::Arc;

pub type ScalarExpr = Arc<dyn RowFn>;

/// How the product row of a complementarity pair is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMode {
    /// a*b = 0
    Equality,
    /// a*b <= 0, encoded as -a*b >= 0
    Inequality,
}

impl Default for ProductMode {
    fn default() -> Self {
        ProductMode::Equality
    }
}

/// References two scalar expressions already registered as inequality rows
/// (a >= 0, b >= 0); expansion adds the product row coupling them.
#[derive(Debug, Clone, Copy)]
pub struct ComplementaritySpec {
    pub lhs_index: usize,
    pub rhs_index: usize,
    pub product_mode: ProductMode,
}

pub struct ProblemBuilder {
    n_vars: usize,
    objective: Option<QuadraticObjective>,
    eq_rows: Vec<ConstraintRow>,
    ineq_rows: Vec<ConstraintRow>,
    expanded_pairs: HashSet<(usize, usize)>,
    layout: Option<VariableLayout>,
    terminal_targets: Vec<TerminalTarget>,
}

impl ProblemBuilder {
    pub fn new(n_vars: usize) -> Self {
        ProblemBuilder {
            n_vars,
            objective: None,
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
            expanded_pairs: HashSet::new(),
            layout: None,
            terminal_targets: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set_layout(&mut self, layout: VariableLayout) {
        self.layout = Some(layout);
    }

    pub fn set_terminal_targets(&mut self, targets: Vec<TerminalTarget>) {
        self.terminal_targets = targets;
    }

    /// Objective 0.5 x'Hx + g'x + c from Hessian triplets (full symmetric).
    pub fn set_objective(&mut self, hess: Vec<(usize, usize, f64)>, lin: Vec<f64>, constant: f64) {
        assert_eq!(lin.len(), self.n_vars);
        self.objective = Some(QuadraticObjective {
            hess: CscMatrix::from_triplets(self.n_vars, self.n_vars, &hess),
            lin,
            constant,
        });
    }

    pub fn linear_expr(coeffs: Vec<(usize, f64)>, constant: f64) -> ScalarExpr {
        Arc::new(LinearRow { coeffs, constant })
    }

    pub fn closure_expr<V, G>(val: V, grad: G) -> ScalarExpr
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut Vec<(usize, f64)>) + Send + Sync + 'static,
    {
        Arc::new(ClosureRow { val, grad })
    }

    /// Registers c(x) = 0; returns the equality row index.
    pub fn add_equality(&mut self, label: impl Into<String>, expr: ScalarExpr) -> usize {
        self.eq_rows.push(ConstraintRow {
            label: label.into(),
            is_product: false,
            expr,
        });
        self.eq_rows.len() - 1
    }

    /// Registers c(x) >= 0; returns the inequality row index.
    pub fn add_inequality(&mut self, label: impl Into<String>, expr: ScalarExpr) -> usize {
        self.ineq_rows.push(ConstraintRow {
            label: label.into(),
            is_product: false,
            expr,
        });
        self.ineq_rows.len() - 1
    }

    /// Registers c(x) <= 0 by negation.
    pub fn add_inequality_le(&mut self, label: impl Into<String>, expr: ScalarExpr) -> usize {
        let neg = Arc::new(NegRow { inner: expr });
        self.add_inequality(label, neg)
    }

    /// Expands `0 <= a  perp  b >= 0` where `a`, `b` are registered
    /// inequality rows: appends the product row (a*b = 0 or -a*b >= 0).
    pub fn add_complementarity(
        &mut self,
        label: impl Into<String>,
        spec: ComplementaritySpec,
    ) -> Result<(), NlpError> {
        let lhs = self
            .ineq_rows
            .get(spec.lhs_index)
            .ok_or(NlpError::NotInequalityRow(spec.lhs_index))?
            .expr
            .clone();
        let rhs = self
            .ineq_rows
            .get(spec.rhs_index)
            .ok_or(NlpError::NotInequalityRow(spec.rhs_index))?
            .expr
            .clone();
        if !self
            .expanded_pairs
            .insert((spec.lhs_index, spec.rhs_index))
        {
            return Err(NlpError::DuplicateConstraint(spec.lhs_index, spec.rhs_index));
        }
        let product: ScalarExpr = Arc::new(ProductRow { lhs, rhs });
        match spec.product_mode {
            ProductMode::Equality => {
                let i = self.add_equality(label, product);
                self.eq_rows[i].is_product = true;
            }
            ProductMode::Inequality => {
                let i = self.add_inequality_le(label, product);
                self.ineq_rows[i].is_product = true;
            }
        }
        Ok(())
    }

    pub fn build(self) -> Result<NlpProblem, NlpError> {
        let objective = self.objective.unwrap_or(QuadraticObjective {
            hess: CscMatrix::zeros(self.n_vars, self.n_vars),
            lin: vec![0.0; self.n_vars],
            constant: 0.0,
        });
        if objective.lin.len() != self.n_vars {
            return Err(NlpError::DimensionMismatch("objective gradient length".into()));
        }
        check_hessian_psd(&objective.hess)?;
        Ok(NlpProblem {
            n_vars: self.n_vars,
            objective,
            eq_rows: self.eq_rows,
            ineq_rows: self.ineq_rows,
            layout: self.layout,
            terminal_targets: self.terminal_targets,
        })
    }
}

struct NegRow {
    inner: ScalarExpr,
}

impl RowFn for NegRow {
    fn value(&self, x: &[f64]) -> f64 {
        -self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        let start = out.len();
        self.inner.gradient(x, out);
        for e in out[start..].iter_mut() {
            e.1 = -e.1;
        }
    }
}

/// Standalone form of the complementarity expansion.
pub fn expand_complementarity(
    spec: ComplementaritySpec,
    builder: &mut ProblemBuilder,
    label: impl Into<String>,
) -> Result<(), NlpError> {
    builder.add_complementarity(label, spec)
}
