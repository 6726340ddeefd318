//! CRISP: a primal-only sequential convex programming solver for nonlinear
//! programs with complementarity constraints, together with a set of
//! contact-implicit motion planning benchmark problems.
//!
//! The solver minimizes a weighted exact l1 penalty merit function by solving
//! a sequence of convex trust-region quadratic programs. Each subproblem is
//! feasible by construction (elastic slacks absorb linearized constraint
//! violation), so no constraint qualification is ever needed and the method
//! applies directly to MPCCs.

pub mod harness;
pub mod nlp;
pub mod problems;
pub mod qp;
pub mod solver;
pub mod sparse;
pub mod subproblem;

pub use nlp::{
    eval_merit, NlpProblem, PenaltyVector, ProblemBuilder, ViolationReport,
};
pub use problems::{problem_from_config, InitialGuess, ProblemDef, PROBLEM_NAMES};
pub use qp::{solve_qp, solve_qp_oracle, QpData, QpSolution, QpStatus};
pub use solver::{solve, solve_with_callback, SolveReport, SolverConfig, TerminationStatus};
pub use sparse::CscMatrix;
pub use subproblem::{apply_second_order_correction, build_subproblem, model_value};
pub use harness::{evaluate_success, run_single, run_suite, suite_runs, RunConfig, SuccessCriteria, SUITE_NAMES};
