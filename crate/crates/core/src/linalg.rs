//! Dense Hermitian eigensolves, applied block by block over the connected
//! components of a sparse operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::hilbert::SparseOperator;
use crate::{Error, Result, C64};

/// Eigenpairs of a Hermitian matrix, ascending eigenvalues, vectors as columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

pub fn eigh(m: &DMatrix<C64>) -> Eigensystem {
    let n = m.nrows();
    if n == 1 {
        return Eigensystem {
            values: vec![m[(0, 0)].re],
            vectors: DMatrix::identity(1, 1),
        };
    }
    // Symmetrize first; the solver only reads one triangle.
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigensystem { values, vectors }
}

/// `f(H)` for Hermitian `H` through its eigendecomposition.
pub fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
    let e = eigh(m);
    let n = m.nrows();
    let mut scaled = e.vectors.clone();
    for c in 0..n {
        let fc = f(e.values[c]);
        for r in 0..n {
            scaled[(r, c)] *= fc;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Eigendecomposition of a sparse Hermitian operator computed per connected
/// block of its sparsity graph.
#[derive(Debug, Clone)]
pub struct BlockEigensystem {
    dim: usize,
    blocks: Vec<(Vec<usize>, Eigensystem)>,
}

/// Reference to one eigenpair inside a [`BlockEigensystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenIndex {
    pub block: usize,
    pub column: usize,
}

impl BlockEigensystem {
    /// Fails with a capacity error when a connected block exceeds `cap`.
    pub fn of(op: &SparseOperator, cap: usize) -> Result<Self> {
        let blocks = op
            .connected_blocks()
            .into_iter()
            .map(|basis| {
                if basis.len() > cap {
                    return Err(Error::Capacity {
                        required: basis.len() as u128,
                        max: cap,
                    });
                }
                let sub = op.restrict(&basis).to_dense();
                Ok((basis, eigh(&sub)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: op.dim(),
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[(Vec<usize>, Eigensystem)] {
        &self.blocks
    }

    pub fn indices(&self) -> impl Iterator<Item = EigenIndex> + '_ {
        self.blocks.iter().enumerate().flat_map(|(b, (basis, _))| {
            (0..basis.len()).map(move |column| EigenIndex { block: b, column })
        })
    }

    pub fn value(&self, idx: EigenIndex) -> f64 {
        self.blocks[idx.block].1.values[idx.column]
    }

    /// Amplitude of eigenvector `idx` on full basis state `full`.
    pub fn component(&self, idx: EigenIndex, full: usize) -> C64 {
        let (basis, eig) = &self.blocks[idx.block];
        match basis.binary_search(&full) {
            Ok(pos) => eig.vectors[(pos, idx.column)],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// All eigenvalues in ascending order.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|(_, e)| e.values.iter().copied())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `exp(-i H t) psi`.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        assert_eq!(psi.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (basis, eig) in &self.blocks {
            if basis.iter().all(|&i| psi[i] == C64::new(0.0, 0.0)) {
                continue;
            }
            let n = basis.len();
            // coefficients in the eigenbasis, then phases, then back
            let coeffs: Vec<C64> = (0..n)
                .map(|k| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (r, &i) in basis.iter().enumerate() {
                        acc += eig.vectors[(r, k)].conj() * psi[i];
                    }
                    acc * C64::from_polar(1.0, -eig.values[k] * t)
                })
                .collect();
            for (r, &i) in basis.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (k, ck) in coeffs.iter().enumerate() {
                    acc += eig.vectors[(r, k)] * ck;
                }
                out[i] = acc;
            }
        }
        out
    }
}
