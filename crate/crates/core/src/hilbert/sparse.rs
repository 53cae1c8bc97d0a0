use std::collections::VecDeque;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::C64;

/// Rows per rayon task in parallel products. Each row is reduced serially in
/// column order, so the result does not depend on the thread count.
const PAR_CHUNK: usize = 4096;
const PAR_THRESHOLD: usize = 1 << 14;

/// Coordinate-form accumulator. Duplicate coordinates are summed on `build`.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        assert!(row < self.dim && col < self.dim, "entry ({row},{col}) outside dim {}", self.dim);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseOperator {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = SparseOperator {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        op.prune();
        op.hermitian = op.check_hermitian(0.0);
        op
    }
}

/// Square complex operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        let mut b = SparseBuilder::with_capacity(dim, dim);
        for i in 0..dim {
            b.push(i, i, C64::new(1.0, 0.0));
        }
        b.build()
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut b = SparseBuilder::new(m.nrows());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    b.push(r, c, v);
                }
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Exact structural Hermiticity, decided at assembly.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Coordinate view `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let slice = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match slice.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn prune(&mut self) {
        let zero = C64::new(0.0, 0.0);
        if self.vals.iter().all(|v| *v != zero) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != zero {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    fn check_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.check_hermitian(tol)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row_dot = |r: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        };
        if self.dim >= PAR_THRESHOLD {
            y.par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(chunk, out)| {
                    let base = chunk * PAR_CHUNK;
                    for (i, yi) in out.iter_mut().enumerate() {
                        *yi = row_dot(base + i);
                    }
                });
        } else {
            for (r, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(r);
            }
        }
    }

    /// `A M` for a dense `M` with `dim` rows.
    pub fn mul_dense(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(m.nrows(), self.dim);
        let mut out = DMatrix::zeros(self.dim, m.ncols());
        for j in 0..m.ncols() {
            for r in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * m[(self.cols[k], j)];
                }
                out[(r, j)] = acc;
            }
        }
        out
    }

    /// `M A` for a dense `M` with `dim` columns.
    pub fn dense_mul(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(m.ncols(), self.dim);
        let mut out = DMatrix::zeros(m.nrows(), self.dim);
        for c in 0..self.dim {
            for k in self.row_ptr[c]..self.row_ptr[c + 1] {
                let v = self.vals[k];
                let b = self.cols[k];
                for a in 0..m.nrows() {
                    out[(a, b)] += m[(a, c)] * v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scale(&self, s: C64) -> SparseOperator {
        let mut b = SparseBuilder::with_capacity(self.dim, self.nnz());
        for (r, c, v) in self.entries() {
            b.push(r, c, v * s);
        }
        b.build()
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut b = SparseBuilder::with_capacity(self.dim, self.nnz() + other.nnz());
        for (r, c, v) in self.entries().chain(other.entries()) {
            b.push(r, c, v);
        }
        b.build()
    }

    pub fn sub(&self, other: &SparseOperator) -> SparseOperator {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> SparseOperator {
        let mut b = SparseBuilder::with_capacity(self.dim, self.nnz());
        for (r, c, v) in self.entries() {
            b.push(c, r, v.conj());
        }
        b.build()
    }

    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut b = SparseBuilder::new(self.dim);
        for (r, k, v) in self.entries() {
            for (c, w) in other.row(k) {
                b.push(r, c, v * w);
            }
        }
        b.build()
    }

    pub fn commutator(&self, other: &SparseOperator) -> SparseOperator {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Largest absolute entry, zero for the empty operator.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `<x|A|x>`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let ax = self.apply(x);
        x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum()
    }

    /// Restriction to the coordinate subspace spanned by `basis` (sorted full
    /// indices). Entries leaving the subspace are dropped.
    pub fn restrict(&self, basis: &[usize]) -> SparseOperator {
        let mut position = vec![usize::MAX; self.dim];
        for (i, &b) in basis.iter().enumerate() {
            position[b] = i;
        }
        let mut builder = SparseBuilder::new(basis.len());
        for (i, &b) in basis.iter().enumerate() {
            for (c, v) in self.row(b) {
                let j = position[c];
                if j != usize::MAX {
                    builder.push(i, j, v);
                }
            }
        }
        builder.build()
    }

    /// Smallest coordinate subspace containing `seeds` and invariant under
    /// the operator's sparsity graph (symmetrized). Returned sorted.
    pub fn invariant_closure(&self, seeds: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.dim];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let adj = self.symmetric_adjacency();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..self.dim).filter(|&i| seen[i]).collect()
    }

    fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.dim];
        for (r, c, _) in self.entries() {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        adj
    }

    /// Connected components of the sparsity graph, each sorted, ordered by
    /// their smallest index. The operator is block diagonal over them.
    pub fn connected_blocks(&self) -> Vec<Vec<usize>> {
        let adj = self.symmetric_adjacency();
        let mut label = vec![usize::MAX; self.dim];
        let mut blocks = Vec::new();
        for start in 0..self.dim {
            if label[start] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut members = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            blocks.push(members);
        }
        blocks
    }
}
