//! LDL' factorization of sparse symmetric quasidefinite matrices.
//!
//! The matrix is supplied as its upper triangle in CSC form. A symmetric
//! permutation is applied up front (reverse Cuthill-McKee by default) and the
//! symbolic analysis is kept so that matrices with the same pattern can be
//! refactorized cheaply, which is what the interior-point backend does at
//! every iteration.

use super::{reverse_cuthill_mckee, CscMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LdltError {
    #[error("matrix must be square")]
    NotSquare,
    #[error("matrix must be upper triangular with a full diagonal")]
    BadPattern,
    #[error("zero pivot at column {0}")]
    ZeroPivot(usize),
}

pub struct LdltFactor {
    n: usize,
    /// new index -> old index
    perm: Vec<usize>,
    /// permuted upper-triangular pattern; values refreshed on refactor
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<f64>,
    /// map from position in the permuted pattern to position in the caller's
    /// upper-triangle value array
    value_map: Vec<usize>,
    etree: Vec<isize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    // workspaces
    work_y: Vec<f64>,
    work_marker: Vec<bool>,
    work_elim: Vec<usize>,
    work_yidx: Vec<usize>,
    work_next: Vec<usize>,
}

impl LdltFactor {
    /// Symbolic analysis of `upper` (pattern only; values reused by
    /// [`refactor`](Self::refactor)). The numeric factorization is run once.
    pub fn new(upper: &CscMatrix) -> Result<Self, LdltError> {
        if upper.nrows != upper.ncols {
            return Err(LdltError::NotSquare);
        }
        let n = upper.nrows;
        let perm = reverse_cuthill_mckee(n, upper);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // permute the pattern, tracking where each permuted entry reads its
        // value from in the original storage order
        let mut trip: Vec<(usize, usize, usize)> = Vec::with_capacity(upper.nnz());
        for j in 0..n {
            for p in upper.colptr[j]..upper.colptr[j + 1] {
                let r = upper.rowind[p];
                if r > j {
                    return Err(LdltError::BadPattern);
                }
                let (mut nr, mut nc) = (iperm[r], iperm[j]);
                if nr > nc {
                    std::mem::swap(&mut nr, &mut nc);
                }
                trip.push((nr, nc, p));
            }
        }
        trip.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut ap = vec![0usize; n + 1];
        let mut ai = Vec::with_capacity(trip.len());
        let mut value_map = Vec::with_capacity(trip.len());
        for &(r, c, src) in &trip {
            ai.push(r);
            value_map.push(src);
            ap[c + 1] += 1;
        }
        for c in 0..n {
            ap[c + 1] += ap[c];
        }
        // require an explicit diagonal entry in every column
        for c in 0..n {
            if ap[c + 1] == ap[c] || ai[ap[c + 1] - 1] != c {
                return Err(LdltError::BadPattern);
            }
        }

        // elimination tree and column counts
        let mut etree = vec![-1isize; n];
        let mut lnz = vec![0usize; n];
        let mut w = vec![usize::MAX; n];
        for j in 0..n {
            w[j] = j;
            for p in ap[j]..ap[j + 1] {
                let mut i = ai[p];
                if i == j {
                    continue;
                }
                while w[i] != j {
                    if etree[i] == -1 {
                        etree[i] = j as isize;
                    }
                    lnz[i] += 1;
                    w[i] = j;
                    i = etree[i] as usize;
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + lnz[j];
        }
        let lnz_total = lp[n];

        let ax = vec![0.0; ai.len()];
        let mut f = LdltFactor {
            n,
            perm,
            ap,
            ai,
            ax,
            value_map,
            etree,
            lp,
            li: vec![0; lnz_total],
            lx: vec![0.0; lnz_total],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
            work_y: vec![0.0; n],
            work_marker: vec![false; n],
            work_elim: vec![0; n],
            work_yidx: vec![0; n],
            work_next: vec![0; n],
        };
        f.refactor(&upper.values)?;
        Ok(f)
    }

    /// Numeric refactorization for new values over the same pattern.
    /// `values` is the caller's upper-triangle value array in the original
    /// (unpermuted) storage order.
    pub fn refactor(&mut self, values: &[f64]) -> Result<(), LdltError> {
        assert_eq!(values.len(), self.value_map.len());
        for (dst, &src) in self.value_map.iter().enumerate() {
            self.ax[dst] = values[src];
        }
        let LdltFactor {
            n,
            perm,
            ap,
            ai,
            ax,
            lp,
            etree,
            li,
            lx,
            d,
            dinv,
            work_y: y,
            work_marker: marker,
            work_elim: elim,
            work_yidx: yidx,
            work_next: next,
            ..
        } = self;
        let n = *n;
        next.copy_from_slice(&lp[..n]);
        for k in 0..n {
            // scatter row k of A (held as column k of the upper triangle)
            let mut nnz_y = 0usize;
            d[k] = 0.0;
            for p in ap[k]..ap[k + 1] {
                let i = ai[p];
                if i == k {
                    d[k] = ax[p];
                    continue;
                }
                y[i] = ax[p];
                // walk the elimination tree up to (but excluding) k
                let mut node = i;
                if !marker[node] {
                    let mut n_elim = 0usize;
                    while !marker[node] {
                        marker[node] = true;
                        elim[n_elim] = node;
                        n_elim += 1;
                        let parent = etree[node];
                        if parent < 0 || parent as usize >= k {
                            break;
                        }
                        node = parent as usize;
                    }
                    while n_elim > 0 {
                        n_elim -= 1;
                        yidx[nnz_y] = elim[n_elim];
                        nnz_y += 1;
                    }
                }
            }
            // eliminate in topological (reverse stack) order
            for idx in (0..nnz_y).rev() {
                let c = yidx[idx];
                let yc = y[c];
                for p in lp[c]..next[c] {
                    y[li[p]] -= lx[p] * yc;
                }
                let p = next[c];
                next[c] += 1;
                li[p] = k;
                let lkc = yc * dinv[c];
                lx[p] = lkc;
                d[k] -= yc * lkc;
                y[c] = 0.0;
                marker[c] = false;
            }
            if d[k] == 0.0 {
                return Err(LdltError::ZeroPivot(perm[k]));
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(())
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // L y = b
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        // D z = y
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        // L' w = z
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[j] = acc;
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[self.perm[i]] = x[i];
        }
        out
    }

    /// Minimum diagonal pivot, used for the one-shot PSD check on objective
    /// Hessians.
    pub fn min_pivot(&self) -> f64 {
        self.d.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
