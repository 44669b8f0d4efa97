//! Profile (skyline) LDL^T factorization for symmetric sparse matrices,
//! with reverse Cuthill-McKee reordering to keep the profile narrow.

use std::collections::VecDeque;

use crate::error::{FlutterError, Result};
use crate::linalg::sparse::CsrMatrix;
use crate::scalar::Real;

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(n: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
    let degree: Vec<usize> = adjacency.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut start_candidates: Vec<usize> = (0..n).collect();
    start_candidates.sort_by_key(|&i| (degree[i], i));
    for &seed in &start_candidates {
        if visited[seed] {
            continue;
        }
        let root = pseudo_peripheral(seed, adjacency, &degree, &visited);
        let mut queue = VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(root: usize, adjacency: &[Vec<usize>], blocked: &[bool]) -> Vec<Vec<usize>> {
    let mut seen: Vec<bool> = blocked.to_vec();
    seen[root] = true;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().expect("non-empty") {
            for &u in &adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(seed: usize, adjacency: &[Vec<usize>], degree: &[usize], blocked: &[bool]) -> usize {
    let mut root = seed;
    let mut depth = bfs_levels(root, adjacency, blocked).len();
    for _ in 0..8 {
        let levels = bfs_levels(root, adjacency, blocked);
        let last = levels.last().expect("non-empty");
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).expect("non-empty");
        let d = bfs_levels(candidate, adjacency, blocked).len();
        if d > depth {
            depth = d;
            root = candidate;
        } else {
            break;
        }
    }
    root
}

/// Symmetric adjacency (without self loops) of the union of several patterns.
pub fn pattern_adjacency<T: Real>(mats: &[&CsrMatrix<T>]) -> Vec<Vec<usize>> {
    let n = mats[0].rows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for m in mats {
        for r in 0..n {
            for (c, _) in m.row(r) {
                if c != r {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// `P A P^T = L D L^T` in skyline storage.
#[derive(Debug, Clone)]
pub struct SkylineLdl<T> {
    n: usize,
    perm: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Offset of each row's first stored entry in `values`; the diagonal is last.
    start: Vec<usize>,
    values: Vec<T>,
    negative_pivots: usize,
}

impl<T: Real> SkylineLdl<T> {
    /// Factors `sum_i c_i A_i` for symmetric matrices sharing dimension.
    pub fn factor_combination(terms: &[(&CsrMatrix<T>, T)], perm: &[usize]) -> Result<Self> {
        let n = terms[0].0.rows;
        if perm.len() != n {
            return Err(FlutterError::Factorization("ordering has wrong length".into()));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (m, _) in terms {
            for r in 0..n {
                let pr = inv[r];
                for (c, _) in m.row(r) {
                    let pc = inv[c];
                    if pc < pr {
                        first[pr] = first[pr].min(pc);
                    } else {
                        first[pc] = first[pc].min(pr);
                    }
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![T::zero(); start[n]];
        for (m, coef) in terms {
            for r in 0..n {
                let pr = inv[r];
                for (c, v) in m.row(r) {
                    let pc = inv[c];
                    // Only the lower triangle of the permuted matrix is stored.
                    if pc <= pr {
                        values[start[pr] + (pc - first[pr])] += *coef * v;
                    }
                }
            }
        }
        let mut f = Self {
            n,
            perm: perm.to_vec(),
            first,
            start,
            values,
            negative_pivots: 0,
        };
        f.factor_in_place()?;
        Ok(f)
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.n;
        let mut diag = vec![T::zero(); n];
        let mut scale = T::zero();
        for i in 0..n {
            scale = scale.max(self.values[self.start[i + 1] - 1].abs());
        }
        let tiny = scale * T::epsilon() * T::lit(1e-2);
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            // u_ij = a_ij - sum_k u_ik l_jk, for fi <= j < i
            for j in fi..i {
                let fj = self.first[j];
                let sj = self.start[j];
                let k0 = fi.max(fj);
                let mut s = T::zero();
                if k0 < j {
                    let row_i = &self.values[si + (k0 - fi)..si + (j - fi)];
                    let row_j = &self.values[sj + (k0 - fj)..sj + (j - fj)];
                    for (a, b) in row_i.iter().zip(row_j) {
                        s += *a * *b;
                    }
                }
                self.values[si + (j - fi)] -= s;
            }
            let mut d = self.values[si + (i - fi)];
            for j in fi..i {
                let u = self.values[si + (j - fi)];
                let l = u / diag[j];
                d -= u * l;
                self.values[si + (j - fi)] = l;
            }
            if !(d.abs() > tiny) || !d.is_finite() {
                return Err(FlutterError::Factorization(format!(
                    "zero pivot {d} at permuted row {i} of {n}"
                )));
            }
            if d < T::zero() {
                self.negative_pivots += 1;
            }
            diag[i] = d;
            self.values[si + (i - fi)] = d;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of negative pivots, i.e. eigenvalues of the factored matrix below zero.
    pub fn negative_pivots(&self) -> usize {
        self.negative_pivots
    }

    pub fn profile_len(&self) -> usize {
        self.values.len()
    }

    pub fn solve_in_place(&self, b: &mut [T], work: &mut Vec<T>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let x = work.as_mut_slice();
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let mut s = T::zero();
            for (l, xv) in self.values[si..si + (i - fi)].iter().zip(&x[fi..i]) {
                s += *l * *xv;
            }
            x[i] -= s;
        }
        // D z = y
        for i in 0..n {
            x[i] /= self.values[self.start[i + 1] - 1];
        }
        // L^T x = z
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = x[i];
            for (l, xv) in self.values[si..si + (i - fi)].iter().zip(&mut x[fi..i]) {
                *xv -= *l * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        let mut work = Vec::with_capacity(self.n);
        self.solve_in_place(&mut x, &mut work);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_2d(n: usize) -> CsrMatrix<f64> {
        let id = |i: usize, j: usize| j * n + i;
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                t.push((id(i, j), id(i, j), 4.0));
                if i + 1 < n {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
                if j + 1 < n {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n * n, n * n, t)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_2d(7);
        let adj = pattern_adjacency(&[&a]);
        let mut p = reverse_cuthill_mckee(49, &adj);
        p.sort_unstable();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn solves_shifted_laplacian() {
        let a = laplacian_2d(9);
        let n = 81;
        let id = CsrMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect());
        let perm = reverse_cuthill_mckee(n, &pattern_adjacency(&[&a]));
        let f = SkylineLdl::factor_combination(&[(&a, 1.0), (&id, 0.5)], &perm).unwrap();
        assert_eq!(f.negative_pivots(), 0);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        for i in 0..n {
            b[i] += 0.5 * x_true[i];
        }
        let x = f.solve(&b);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_shift_counts_negative_pivots() {
        // Eigenvalues of the 1-D Laplacian tridiag(-1, 2, -1), n = 4: 2 - 2cos(k pi / 5).
        let n = 4;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let id = CsrMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect());
        let perm: Vec<usize> = (0..n).collect();
        // Shift 1.5 lies between eigenvalues 1.382 and 2.618 -> two below.
        let f = SkylineLdl::factor_combination(&[(&a, 1.0), (&id, -1.5)], &perm).unwrap();
        assert_eq!(f.negative_pivots(), 2);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(SkylineLdl::factor_combination(&[(&a, 1.0)], &[0, 1]).is_err());
    }
}
