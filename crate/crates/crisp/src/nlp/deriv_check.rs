//! Central finite-difference validation of the analytic derivatives.

use super::NlpProblem;

#[derive(Debug, Clone)]
pub struct DerivReport {
    pub grad_max_rel_err: f64,
    pub hess_max_rel_err: f64,
    pub eq_jac_max_rel_err: f64,
    pub ineq_jac_max_rel_err: f64,
    pub threshold: f64,
    /// (block, row) pairs exceeding the threshold, block in
    /// {"grad", "hess", "eq", "ineq"}
    pub failures: Vec<(String, usize)>,
}

impl DerivReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
    pub fn max_rel_err(&self) -> f64 {
        self.grad_max_rel_err
            .max(self.hess_max_rel_err)
            .max(self.eq_jac_max_rel_err)
            .max(self.ineq_jac_max_rel_err)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Checks analytic gradient/Jacobians against central differences with step
/// `h`, and the (constant) objective Hessian against differences of the
/// analytic gradient. Rows exceeding 1e-4 relative error are flagged.
pub fn check_derivatives(problem: &NlpProblem, x: &[f64], h: f64) -> DerivReport {
    assert!(h > 0.0);
    let n = problem.n_vars;
    let threshold = 1e-4;
    let mut failures = Vec::new();

    let grad = problem.objective.gradient(x);
    let hess = problem.objective.hess.to_dense();
    let je = problem.jac_eq(x).to_dense();
    let ji = problem.jac_ineq(x).to_dense();

    let mut grad_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    let mut eq_err = vec![0.0f64; problem.n_eq()];
    let mut ineq_err = vec![0.0f64; problem.n_ineq()];

    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = problem.objective.value(&xp);
        let gp = problem.objective.gradient(&xp);
        let cep = problem.eval_eq(&xp).expect("finite eval");
        let cip = problem.eval_ineq(&xp).expect("finite eval");
        xp[j] = x[j] - h;
        let fm = problem.objective.value(&xp);
        let gm = problem.objective.gradient(&xp);
        let cem = problem.eval_eq(&xp).expect("finite eval");
        let cim = problem.eval_ineq(&xp).expect("finite eval");
        xp[j] = x[j];

        grad_err = grad_err.max(rel_err(grad[j], (fp - fm) / (2.0 * h)));
        for i in 0..n {
            hess_err = hess_err.max(rel_err(hess[i][j], (gp[i] - gm[i]) / (2.0 * h)));
        }
        for i in 0..problem.n_eq() {
            eq_err[i] = eq_err[i].max(rel_err(je[i][j], (cep[i] - cem[i]) / (2.0 * h)));
        }
        for i in 0..problem.n_ineq() {
            ineq_err[i] = ineq_err[i].max(rel_err(ji[i][j], (cip[i] - cim[i]) / (2.0 * h)));
        }
    }

    if grad_err > threshold {
        failures.push(("grad".to_string(), 0));
    }
    if hess_err > threshold {
        failures.push(("hess".to_string(), 0));
    }
    for (i, &e) in eq_err.iter().enumerate() {
        if e > threshold {
            failures.push(("eq".to_string(), i));
        }
    }
    for (i, &e) in ineq_err.iter().enumerate() {
        if e > threshold {
            failures.push(("ineq".to_string(), i));
        }
    }

    DerivReport {
        grad_max_rel_err: grad_err,
        hess_max_rel_err: hess_err,
        eq_jac_max_rel_err: eq_err.iter().cloned().fold(0.0, f64::max),
        ineq_jac_max_rel_err: ineq_err.iter().cloned().fold(0.0, f64::max),
        threshold,
        failures,
    }
}
