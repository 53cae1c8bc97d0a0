//! Effective Hamiltonians of the memory (`|±S>`) and bus (`|±1/2>`) bands,
//! and the exact block-diagonalization they are checked against.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ChainSpec;
use crate::hilbert::{embed, spin_operators, SparseOperator, SpinQuantum, StateVector};
use crate::linalg::{eigh, BlockEigensystem};
use crate::{Error, Result, C64, DENSE_CAP};

/// Boundary-correction constant of the memory Ising coupling in the bulk.
pub const XI_BULK: f64 = 90.0;
/// Same constant on the two bonds touching the chain ends.
pub const XI_BOUNDARY: f64 = 63.0;

/// Closed-form couplings of both effective Hamiltonians (spin 3/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    pub j_mem: f64,
    pub delta_mem_bulk: f64,
    pub delta_mem_boundary: f64,
    pub eta_mem: f64,
    pub j_bus_x: f64,
    pub j_bus_y: f64,
    pub delta_bus: f64,
    pub eta_bus: f64,
}

pub fn effective_couplings(spec: &ChainSpec) -> Result<EffectiveCouplings> {
    if spec.spin != SpinQuantum::THREE_HALVES {
        return Err(Error::InvalidSpec {
            field: "spin",
            reason: format!("effective couplings are derived for S = 3/2, got S = {}", spec.spin.value()),
        });
    }
    let d = spec.zfs_d;
    if d == 0.0 {
        return Err(Error::SingularParameter("effective couplings require zfs_d != 0"));
    }
    let j = spec.exchange_j;
    let e = spec.anisotropy_e;
    let d2 = d * d;
    let delta_mem = |xi: f64| 2.25 * j * (1.0 - j / (8.0 * d)) - j * 9.0 * e * e / (2.0 * d2) - xi * j.powi(3) / (256.0 * d2);
    Ok(EffectiveCouplings {
        j_mem: 9.0 * j * (j * j + 16.0 * e * e) / (64.0 * d2),
        delta_mem_bulk: delta_mem(XI_BULK),
        delta_mem_boundary: delta_mem(XI_BOUNDARY),
        eta_mem: 27.0 * j.powi(3) / (128.0 * d2),
        j_bus_x: j - 3.0 * e * j / d,
        j_bus_y: j + 3.0 * e * j / d,
        delta_bus: j / 4.0 - 39.0 * j * j / (32.0 * d),
        eta_bus: -3.0 * j * j / (4.0 * d),
    })
}

struct Pauli {
    x: DMatrix<C64>,
    y: DMatrix<C64>,
    z: DMatrix<C64>,
}

fn pauli() -> Pauli {
    let o = spin_operators(SpinQuantum::ONE_HALF);
    let two = C64::new(2.0, 0.0);
    Pauli {
        x: o.sx * two,
        y: o.sy * two,
        z: o.sz * two,
    }
}

fn pair(a: &DMatrix<C64>, i: usize, b: &DMatrix<C64>, j: usize, n: usize) -> Result<SparseOperator> {
    let q = SpinQuantum::ONE_HALF;
    Ok(embed(a, i, n, q)?.matmul(&embed(b, j, n, q)?))
}

fn effective_dim_check(spec: &ChainSpec) -> Result<()> {
    if spec.n_sites >= usize::BITS as usize - 1 {
        return Err(Error::Capacity {
            required: 1u128 << spec.n_sites.min(127),
            max: usize::MAX,
        });
    }
    Ok(())
}

/// `sum_j J_mem (tx tx + ty ty) + Delta_mem tz tz` on nearest neighbours plus
/// `eta_mem tz_j tz_{j+2}`, open boundary. End bonds use the boundary value
/// of `Delta_mem`.
pub fn build_mem_effective(spec: &ChainSpec) -> Result<SparseOperator> {
    let c = effective_couplings(spec)?;
    effective_dim_check(spec)?;
    let n = spec.n_sites;
    let p = pauli();
    let mut h = SparseOperator::zeros(1 << n);
    let re = |x: f64| C64::new(x, 0.0);
    for j in 0..n.saturating_sub(1) {
        let boundary = j == 0 || j + 2 == n;
        let delta = if boundary { c.delta_mem_boundary } else { c.delta_mem_bulk };
        h = h
            .add(&pair(&p.x, j, &p.x, j + 1, n)?.scale(re(c.j_mem)))
            .add(&pair(&p.y, j, &p.y, j + 1, n)?.scale(re(c.j_mem)))
            .add(&pair(&p.z, j, &p.z, j + 1, n)?.scale(re(delta)));
    }
    for j in 0..n.saturating_sub(2) {
        h = h.add(&pair(&p.z, j, &p.z, j + 2, n)?.scale(re(c.eta_mem)));
    }
    Ok(h)
}

/// `sum_j Jx sx sx + Jy sy sy + Delta sz sz` on nearest neighbours plus
/// `eta_bus (sx_j sx_{j+2} + sy_j sy_{j+2})`, open boundary.
pub fn build_bus_effective(spec: &ChainSpec) -> Result<SparseOperator> {
    let c = effective_couplings(spec)?;
    effective_dim_check(spec)?;
    let n = spec.n_sites;
    let p = pauli();
    let mut h = SparseOperator::zeros(1 << n);
    let re = |x: f64| C64::new(x, 0.0);
    for j in 0..n.saturating_sub(1) {
        h = h
            .add(&pair(&p.x, j, &p.x, j + 1, n)?.scale(re(c.j_bus_x)))
            .add(&pair(&p.y, j, &p.y, j + 1, n)?.scale(re(c.j_bus_y)))
            .add(&pair(&p.z, j, &p.z, j + 1, n)?.scale(re(c.delta_bus)));
    }
    for j in 0..n.saturating_sub(2) {
        h = h
            .add(&pair(&p.x, j, &p.x, j + 2, n)?.scale(re(c.eta_bus)))
            .add(&pair(&p.y, j, &p.y, j + 2, n)?.scale(re(c.eta_bus)));
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceKind {
    Memory,
    Bus,
}

/// Encoding of one qubit per site into a pair of spin levels.
///
/// Logical bit 1 is the upper level (`+S` or `+1/2`), bit 0 the lower level.
/// Effective basis states are ordered like the full basis: site 0 slowest and
/// the upper level first on every site, so effective index bit `k` (counting
/// from the most significant) is `1 - bit` of site `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceCode {
    kind: SubspaceKind,
    spin: SpinQuantum,
    n_sites: usize,
    /// Full-space index of each effective basis state.
    embedding: Vec<usize>,
}

impl SubspaceCode {
    pub fn new(kind: SubspaceKind, spin: SpinQuantum, n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidSpec {
                field: "n_sites",
                reason: "must be at least 1".into(),
            });
        }
        spin.chain_dim(n_sites).ok_or(Error::Capacity {
            required: u128::MAX,
            max: usize::MAX,
        })?;
        let [upper, lower] = Self::levels_for(kind, spin);
        let up = spin.index_of_twice_m(upper)?;
        let down = spin.index_of_twice_m(lower)?;
        let d = spin.multiplicity();
        let embedding = (0..1usize << n_sites)
            .map(|eff| {
                (0..n_sites).fold(0usize, |acc, site| {
                    let local = if (eff >> (n_sites - 1 - site)) & 1 == 0 { up } else { down };
                    acc * d + local
                })
            })
            .collect();
        Ok(Self {
            kind,
            spin,
            n_sites,
            embedding,
        })
    }

    pub fn for_spec(kind: SubspaceKind, spec: &ChainSpec) -> Result<Self> {
        Self::new(kind, spec.spin, spec.n_sites)
    }

    fn levels_for(kind: SubspaceKind, spin: SpinQuantum) -> [i32; 2] {
        match kind {
            SubspaceKind::Memory => {
                let s2 = spin.twice_spin() as i32;
                [s2, -s2]
            }
            SubspaceKind::Bus => [1, -1],
        }
    }

    pub fn kind(&self) -> SubspaceKind {
        self.kind
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn effective_dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn full_dim(&self) -> usize {
        self.spin.multiplicity().pow(self.n_sites as u32)
    }

    /// `2m` of the level representing logical bit 0 and bit 1.
    pub fn bit_map(&self) -> [(u8, i32); 2] {
        let [upper, lower] = Self::levels_for(self.kind, self.spin);
        [(0, lower), (1, upper)]
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    /// Effective index of the product state with the given logical bits.
    pub fn effective_index(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.n_sites {
            return Err(Error::LabelLength {
                expected: self.n_sites,
                found: bits.len(),
            });
        }
        Ok(bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b == 0)))
    }

    /// Full-space index of the product state with the given logical bits.
    pub fn full_index(&self, bits: &[u8]) -> Result<usize> {
        Ok(self.embedding[self.effective_index(bits)?])
    }

    /// Restriction of a full-space state onto the subspace (no renormalization).
    pub fn project(&self, full: &[C64]) -> Result<Vec<C64>> {
        if full.len() != self.full_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.full_dim(),
                found: full.len(),
            });
        }
        Ok(self.embedding.iter().map(|&i| full[i]).collect())
    }

    /// Adjoint of [`project`](Self::project).
    pub fn embed(&self, eff: &[C64]) -> Result<Vec<C64>> {
        if eff.len() != self.effective_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.effective_dim(),
                found: eff.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.full_dim()];
        for (&i, &a) in self.embedding.iter().zip(eff) {
            out[i] = a;
        }
        Ok(out)
    }

    /// Transfer endpoints for a chain operator of dimension `dim`: the
    /// initial state has bit 1 on site 0 and bit 0 elsewhere, the target has
    /// bit 1 on the last site only. `dim` selects full-space or effective
    /// indexing.
    pub fn transfer_states(&self, dim: usize) -> Result<(StateVector, StateVector)> {
        let n = self.n_sites;
        let mut init = vec![0u8; n];
        init[0] = 1;
        let mut target = vec![0u8; n];
        target[n - 1] = 1;
        if dim == self.effective_dim() {
            Ok((
                StateVector::basis(dim, self.effective_index(&init)?)?,
                StateVector::basis(dim, self.effective_index(&target)?)?,
            ))
        } else if dim == self.full_dim() {
            Ok((
                StateVector::basis(dim, self.full_index(&init)?)?,
                StateVector::basis(dim, self.full_index(&target)?)?,
            ))
        } else {
            Err(Error::DimensionMismatch {
                expected: self.full_dim(),
                found: dim,
            })
        }
    }
}

/// Exact effective Hamiltonian of a band, computed by diagonalizing `h`.
///
/// The `2^N` eigenstates with the largest weight inside the subspace are
/// taken as the band; their overlaps with the subspace basis, made unitary
/// by symmetric orthogonalization, carry the band energies back into the
/// subspace basis.
pub fn numerical_effective_block(h: &SparseOperator, sub: &SubspaceCode) -> Result<DMatrix<C64>> {
    if h.dim() != sub.full_dim() {
        return Err(Error::DimensionMismatch {
            expected: sub.full_dim(),
            found: h.dim(),
        });
    }
    let eig = BlockEigensystem::of(h, DENSE_CAP)?;
    let n = sub.effective_dim();
    let mut weighted: Vec<_> = eig
        .indices()
        .map(|idx| {
            let w: f64 = sub.embedding().iter().map(|&i| eig.component(idx, i).norm_sqr()).sum();
            (w, idx)
        })
        .collect();
    weighted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let last_in = weighted[n - 1].0;
    let first_out = weighted.get(n).map_or(0.0, |x| x.0);
    if last_in <= 0.5 || first_out >= 0.5 {
        return Err(Error::BandAmbiguity {
            rank: n - 1,
            weight: last_in,
            next: first_out,
        });
    }
    let selected = &weighted[..n];
    // W[a, k] = <a|v_k>
    let w = DMatrix::from_fn(n, n, |a, k| eig.component(selected[k].1, sub.embedding()[a]));
    let gram = w.adjoint() * &w;
    let g = eigh(&gram);
    let mut inv_sqrt = g.vectors.clone();
    for c in 0..n {
        let s = 1.0 / g.values[c].sqrt();
        for r in 0..n {
            inv_sqrt[(r, c)] *= C64::new(s, 0.0);
        }
    }
    let inv_sqrt = inv_sqrt * g.vectors.adjoint();
    let u = w * inv_sqrt;
    let mut scaled = u.clone();
    for k in 0..n {
        let e = eig.value(selected[k].1);
        for a in 0..n {
            scaled[(a, k)] *= C64::new(e, 0.0);
        }
    }
    let block = scaled * u.adjoint();
    Ok((&block + block.adjoint()) * C64::new(0.5, 0.0))
}
