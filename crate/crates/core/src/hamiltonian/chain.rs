use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{ChainSpec, CouplingRange};
use crate::hilbert::{spin_operators, SparseBuilder, SparseOperator, SpinQuantum};
use crate::{Error, Result, C64, DEFAULT_MAX_DIM};

/// `g_i (field . S) + D Sz^2 + E (Sx^2 - Sy^2)` for one site.
pub fn build_site_hamiltonian(spec: &ChainSpec, site: usize) -> Result<DMatrix<C64>> {
    if site >= spec.n_sites {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: spec.n_sites,
        });
    }
    let o = spin_operators(spec.spin);
    let g = spec.g_factors[site];
    let [bx, by, bz] = spec.field;
    let re = |x: f64| C64::new(x, 0.0);
    let zeeman = &o.sx * re(g * bx) + &o.sy * re(g * by) + &o.sz * re(g * bz);
    let zfs = &o.sz * &o.sz * re(spec.zfs_d);
    let rhombic = (&o.sx * &o.sx - &o.sy * &o.sy) * re(spec.anisotropy_e);
    Ok(zeeman + zfs + rhombic)
}

/// Term-wise representation of the chain Hamiltonian, able to generate the
/// column of any basis state without materializing the full operator.
#[derive(Debug, Clone)]
pub struct ChainHamiltonian {
    spin: SpinQuantum,
    n_sites: usize,
    dim: usize,
    site_terms: Vec<DMatrix<C64>>,
    bonds: Vec<(usize, usize, f64)>,
    /// `<a-1|S+|a>` indexed by local index `a` (zero for `a = 0`).
    raise: Vec<f64>,
    strides: Vec<usize>,
}

impl ChainHamiltonian {
    pub fn new(spec: &ChainSpec, max_dim: usize) -> Result<Self> {
        spec.validate()?;
        let dim = spec.hilbert_dim(max_dim)?;
        let site_terms = (0..spec.n_sites)
            .map(|i| build_site_hamiltonian(spec, i))
            .collect::<Result<Vec<_>>>()?;
        let d = spec.spin.multiplicity();
        let s = spec.spin.value();
        let raise = (0..d)
            .map(|a| {
                if a == 0 {
                    0.0
                } else {
                    let m = spec.spin.m(a);
                    (s * (s + 1.0) - m * (m + 1.0)).sqrt()
                }
            })
            .collect();
        let strides = (0..spec.n_sites)
            .map(|i| d.pow((spec.n_sites - 1 - i) as u32))
            .collect();
        Ok(Self {
            spin: spec.spin,
            n_sites: spec.n_sites,
            dim,
            site_terms,
            bonds: spec.bonds(),
            raise,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Calls `emit(row, value)` for every nonzero `H[row, col]`. The same row
    /// may be emitted more than once; callers sum.
    pub fn for_each_in_column(&self, col: usize, mut emit: impl FnMut(usize, C64)) {
        let d = self.spin.multiplicity();
        let local = |i: usize| (col / self.strides[i]) % d;
        let mut diag = C64::new(0.0, 0.0);
        for (i, term) in self.site_terms.iter().enumerate() {
            let a = local(i);
            for b in 0..d {
                let v = term[(b, a)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                if b == a {
                    diag += v;
                } else {
                    emit(col + b * self.strides[i] - a * self.strides[i], v);
                }
            }
        }
        for &(i, j, coupling) in &self.bonds {
            let (ai, aj) = (local(i), local(j));
            diag += C64::new(coupling * self.spin.m(ai) * self.spin.m(aj), 0.0);
            // S+_i S-_j: site i index decreases, site j index increases
            if ai > 0 && aj + 1 < d {
                let amp = 0.5 * coupling * self.raise[ai] * self.raise[aj + 1];
                emit(col - self.strides[i] + self.strides[j], C64::new(amp, 0.0));
            }
            if aj > 0 && ai + 1 < d {
                let amp = 0.5 * coupling * self.raise[aj] * self.raise[ai + 1];
                emit(col + self.strides[i] - self.strides[j], C64::new(amp, 0.0));
            }
        }
        if diag != C64::new(0.0, 0.0) {
            emit(col, diag);
        }
    }

    pub fn to_sparse(&self) -> SparseOperator {
        let mut b = SparseBuilder::with_capacity(self.dim, self.dim * (1 + 2 * self.bonds.len().min(4 * self.n_sites)));
        for col in 0..self.dim {
            self.for_each_in_column(col, |row, v| b.push(row, col, v));
        }
        b.build()
    }

    /// Restriction to the smallest coordinate subspace that contains `seeds`
    /// and is invariant under the Hamiltonian. Exact: the generator is
    /// Hermitian, so the reachable set is closed under both directions.
    pub fn sector(&self, seeds: &[usize]) -> Sector {
        let mut position: HashMap<usize, usize> = HashMap::new();
        let mut basis: Vec<usize> = Vec::new();
        for &s in seeds {
            assert!(s < self.dim, "seed {s} outside dimension {}", self.dim);
            if let std::collections::hash_map::Entry::Vacant(e) = position.entry(s) {
                e.insert(basis.len());
                basis.push(s);
            }
        }
        let mut head = 0;
        while head < basis.len() {
            let col = basis[head];
            head += 1;
            self.for_each_in_column(col, |row, _| {
                if let std::collections::hash_map::Entry::Vacant(e) = position.entry(row) {
                    e.insert(basis.len());
                    basis.push(row);
                }
            });
        }
        basis.sort_unstable();
        for (i, &b) in basis.iter().enumerate() {
            position.insert(b, i);
        }
        let mut builder = SparseBuilder::new(basis.len());
        for (j, &col) in basis.iter().enumerate() {
            self.for_each_in_column(col, |row, v| builder.push(position[&row], j, v));
        }
        Sector {
            full_dim: self.dim,
            basis,
            operator: builder.build(),
        }
    }
}

/// Invariant coordinate subspace of a chain Hamiltonian together with the
/// restricted operator.
#[derive(Debug, Clone)]
pub struct Sector {
    pub full_dim: usize,
    /// Sorted full-space indices spanning the sector.
    pub basis: Vec<usize>,
    pub operator: SparseOperator,
}

impl Sector {
    pub fn position(&self, full: usize) -> Option<usize> {
        self.basis.binary_search(&full).ok()
    }
}

/// `H = sum_i H_s(i) + J sum_i S_i . S_{i+1}` with open boundaries.
pub fn build_total_hamiltonian(spec: &ChainSpec) -> Result<SparseOperator> {
    build_total_hamiltonian_capped(spec, DEFAULT_MAX_DIM)
}

pub fn build_total_hamiltonian_capped(spec: &ChainSpec, max_dim: usize) -> Result<SparseOperator> {
    if spec.range != CouplingRange::NearestNeighbor {
        return Err(Error::InvalidSpec {
            field: "range",
            reason: "nearest-neighbour builder called on a long-range spec".into(),
        });
    }
    Ok(ChainHamiltonian::new(spec, max_dim)?.to_sparse())
}

/// Same local terms as [`build_total_hamiltonian`], every pair coupled with
/// `J / |i - j|^3`.
pub fn build_long_range_hamiltonian(spec: &ChainSpec) -> Result<SparseOperator> {
    build_long_range_hamiltonian_capped(spec, DEFAULT_MAX_DIM)
}

pub fn build_long_range_hamiltonian_capped(spec: &ChainSpec, max_dim: usize) -> Result<SparseOperator> {
    if !matches!(spec.range, CouplingRange::PowerLaw { .. }) {
        return Err(Error::InvalidSpec {
            field: "range",
            reason: "long-range builder requires a power_law range".into(),
        });
    }
    Ok(ChainHamiltonian::new(spec, max_dim)?.to_sparse())
}

/// Dispatches on `spec.range`.
pub fn build_chain_hamiltonian(spec: &ChainSpec, max_dim: usize) -> Result<SparseOperator> {
    Ok(ChainHamiltonian::new(spec, max_dim)?.to_sparse())
}
