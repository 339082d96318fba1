//! Compressed sparse row storage and a direct sparse solver.
//!
//! `solve` reorders the unknowns with reverse Cuthill-McKee, factors the
//! permuted matrix as a band matrix with partial pivoting, and checks the
//! residual of the result (with up to two steps of iterative refinement).

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Pivots below this multiple of the largest row norm are treated as zero.
const SINGULAR_THRESHOLD: f64 = 1e-13;

const MAX_REFINEMENT_STEPS: usize = 2;

/// Square sparse matrix in CSR format with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn new(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_offsets.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, actual: row_offsets.len() });
        }
        if row_offsets[0] != 0 || row_offsets[n] != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::InvalidArgument("inconsistent CSR array lengths".into()));
        }
        for i in 0..n {
            let (s, e) = (row_offsets[i], row_offsets[i + 1]);
            if s > e {
                return Err(Error::InvalidArgument(format!("row offsets decrease at row {i}")));
            }
            let cols = &col_indices[s..e];
            if cols.iter().any(|&c| c >= n) {
                return Err(Error::InvalidArgument(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("unsorted or duplicate columns in row {i}")));
            }
        }
        Ok(CsrMatrix { n, row_offsets, col_indices, values })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix { n, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n, row_offsets: (0..=n).collect(), col_indices: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: r.len() });
            }
            triplets.extend(r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (i, j, v)));
        }
        Self::from_triplets(n, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Position of `(i, j)` in the value array, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let s = self.row_offsets[i];
        let e = self.row_offsets[i + 1];
        self.col_indices[s..e].binary_search(&j).ok().map(|k| s + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    fn max_row_norm(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

pub fn matvec(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: x.len() });
    }
    Ok((0..a.n).map(|i| a.row(i).map(|(j, v)| v * x[j]).sum()).collect())
}

/// `||A x - rhs||_2`.
pub fn residual_norm(a: &CsrMatrix, x: &[f64], rhs: &[f64]) -> Result<f64> {
    if rhs.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: rhs.len() });
    }
    let ax = matvec(a, x)?;
    Ok(ax.iter().zip(rhs).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `A x = rhs` directly, requiring `||Ax - rhs|| <= tol ||rhs||`.
pub fn solve(a: &CsrMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if rhs.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, actual: rhs.len() });
    }
    if a.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    let lu = BandLu::factor(a)?;
    let rhs_norm = norm2(rhs);
    let mut x = lu.solve(rhs);
    let bound = tol * rhs_norm;
    let mut res = residual_norm(a, &x, rhs)?;
    let mut steps = 0;
    while res > bound && steps < MAX_REFINEMENT_STEPS {
        let ax = matvec(a, &x)?;
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        res = residual_norm(a, &x, rhs)?;
        steps += 1;
    }
    if res > bound || !res.is_finite() {
        return Err(Error::Inaccurate { residual: res, bound });
    }
    Ok(x)
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern. `perm[k]` is
/// the original index placed at position `k`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree = |v: usize| adj[v].len();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // lowest-degree unvisited vertex, then move to a pseudo-peripheral one
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree(v), v)).unwrap();
        let start = pseudo_peripheral(&adj, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adj, v);
        let depth = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if depth <= ecc && v != seed {
            break;
        }
        ecc = depth;
        let far = (0..adj.len())
            .filter(|&w| level[w] == depth)
            .min_by_key(|&w| (adj[w].len(), w))
            .unwrap_or(v);
        if far == v {
            break;
        }
        v = far;
    }
    v
}

/// LU factors of a permuted band matrix, LAPACK `gbtrf` style: row
/// interchanges are applied step by step and multipliers stay in place.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl BandLu {
    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
            }
        }
        // row i stores columns i-kl ..= i+ku+kl
        let width = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[at(inv[i], inv[j])] = v;
            }
        }

        let threshold = SINGULAR_THRESHOLD * a.max_row_norm();
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = band[at(k, k)].abs();
            for r in k + 1..=last_row {
                let v = band[at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best >= threshold) || best == 0.0 {
                return Err(Error::Singular { index: perm[k], pivot: best });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    band.swap(at(k, j), at(p, j));
                }
            }
            let d = band[at(k, k)];
            for r in k + 1..=last_row {
                let l = band[at(r, k)] / d;
                band[at(r, k)] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        band[at(r, j)] -= l * band[at(k, j)];
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, width, band, pivots, perm })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, kl, ku, width) = (self.n, self.kl, self.ku, self.width);
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    y[r] -= self.band[at(r, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..=(k + ku + kl).min(n - 1) {
                s -= self.band[at(k, j)] * y[j];
            }
            y[k] = s / self.band[at(k, k)];
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}
