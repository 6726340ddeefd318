//! Minimal sparse matrix support: compressed sparse column storage plus the
//! factorization machinery needed by the QP backend.

mod ldlt;

pub use ldlt::{LdltError, LdltFactor};

/// Sparse matrix in compressed sparse column form.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowind: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&k| (triplets[k].1, triplets[k].0));
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowind = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            rowind.push(r);
            values.push(v);
            colptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..ncols {
            colptr[c + 1] += colptr[c];
        }
        CscMatrix {
            nrows,
            ncols,
            colptr,
            rowind,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.rowind.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.colptr[j]..self.colptr[j + 1];
        range.map(move |p| (self.rowind[p], self.values[p]))
    }

    /// y += alpha * A * x
    pub fn axpy(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for j in 0..self.ncols {
            let xj = alpha * x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowind[p]] += self.values[p] * xj;
            }
        }
    }

    /// y += alpha * A' * x
    pub fn axpy_t(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            let mut acc = 0.0;
            for p in self.colptr[j]..self.colptr[j + 1] {
                acc += self.values[p] * x[self.rowind[p]];
            }
            y[j] += alpha * acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.axpy(1.0, x, &mut y);
        y
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.axpy_t(1.0, x, &mut y);
        y
    }

    /// x' * A * x for symmetric A stored in full.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                acc += self.values[p] * x[self.rowind[p]] * xj;
            }
        }
        acc
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.rowind {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut colptr = counts.clone();
        let mut rowind = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let r = self.rowind[p];
                let dst = colptr[r];
                rowind[dst] = j;
                values[dst] = self.values[p];
                colptr[r] += 1;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            colptr: counts,
            rowind,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                d[self.rowind[p]][j] += self.values[p];
            }
        }
        d
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                t.push((self.rowind[p], j, self.values[p]));
            }
        }
        t
    }
}

/// Dense LU solve with partial pivoting, in place. Used by the active-set
/// oracle and a few tests where systems stay tiny.
pub fn dense_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].abs();
        for i in k + 1..n {
            if a[i][k].abs() > best {
                best = a[i][k].abs();
                piv = i;
            }
        }
        if best < 1e-13 {
            return None;
        }
        if piv != k {
            a.swap(k, piv);
            b.swap(k, piv);
        }
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern whose upper
/// triangle is given. Returns `perm` such that new index i maps to old
/// index `perm[i]`.
pub fn reverse_cuthill_mckee(n: usize, upper: &CscMatrix) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..upper.ncols {
        for p in upper.colptr[j]..upper.colptr[j + 1] {
            let r = upper.rowind[p];
            if r != j {
                adj[r].push(j);
                adj[j].push(r);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    loop {
        // lowest-degree unvisited node as the next start
        let start = match (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]) {
            Some(s) => s,
            None => break,
        };
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().cloned().filter(|&v| !visited[v]).collect();
            nbrs.sort_unstable_by_key(|&v| degree[v]);
            for v in nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_assembly_sums_duplicates() {
        let a = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 4.0)]);
        let d = a.to_dense();
        assert_eq!(d[0][0], 3.0);
        assert_eq!(d[1][1], 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matvec_and_transpose_agree() {
        let a = CscMatrix::from_triplets(
            3,
            2,
            &[(0, 0, 1.0), (2, 0, -2.0), (1, 1, 3.0), (2, 1, 0.5)],
        );
        let x = [2.0, -1.0];
        let y = a.matvec(&x);
        assert_eq!(y, vec![2.0, -3.0, -4.5]);
        let yt = a.transpose().matvec_t(&x);
        // (A')' x == A x
        assert_eq!(yt, y);
    }

    #[test]
    fn dense_solve_recovers_solution() {
        let mut a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let mut b = vec![1.0, 2.0];
        let x = dense_solve(&mut a, &mut b).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = CscMatrix::from_triplets(
            4,
            4,
            &[(0, 0, 1.0), (0, 3, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)],
        );
        let mut p = reverse_cuthill_mckee(4, &a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
