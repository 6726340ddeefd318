//! Cross-checks the iterative QP backend against the brute-force active-set
//! enumeration oracle on a small strictly convex QP with equality,
//! inequality, and bound constraints.

use crisp::qp::{kkt_residuals, solve_qp, solve_qp_oracle, QpData, SliceMap};
use crisp::sparse::CscMatrix;

fn main() {
    // minimize (z1-1)^2 + (z2+2)^2 + z3^2
    // s.t. z1 + z2 + z3 = 1, z1 - z2 >= -0.5, -1 <= z <= 1
    let n = 3;
    let qp = QpData {
        quad: CscMatrix::from_triplets(n, n, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]),
        lin: vec![-2.0, 4.0, 0.0],
        constant: 5.0,
        a_eq: CscMatrix::from_triplets(1, n, &[(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)]),
        b_eq: vec![1.0],
        a_ineq: CscMatrix::from_triplets(1, n, &[(0, 0, 1.0), (0, 1, -1.0)]),
        b_ineq: vec![-0.5],
        lb: vec![-1.0; n],
        ub: vec![1.0; n],
        slice_map: SliceMap::whole(n),
        model: None,
    };

    let backend = solve_qp(&qp, 1e-9, None).unwrap();
    let oracle = solve_qp_oracle(&qp).unwrap();
    let kkt = kkt_residuals(&qp, &backend);

    println!("backend: z = {:?}", backend.z);
    println!("oracle:  z = {:?}", oracle.z);
    println!(
        "objective gap {:.2e}, max KKT residual {:.2e}",
        (qp.objective(&backend.z) - qp.objective(&oracle.z)).abs(),
        kkt.max()
    );
}
