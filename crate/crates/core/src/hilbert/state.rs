use serde::{Deserialize, Serialize};

use super::SpinQuantum;
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-10;

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, rejecting vectors whose norm is not 1 within 1e-10.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap_probability(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

pub(crate) fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Per-site magnetic quantum numbers, stored as `2m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisLabel {
    twice_m: Vec<i32>,
}

impl BasisLabel {
    pub fn from_twice_m(twice_m: Vec<i32>) -> Self {
        Self { twice_m }
    }

    /// Builds a label from `m` values; each must be a multiple of 1/2.
    pub fn from_m(m: &[f64]) -> Result<Self> {
        let twice_m = m
            .iter()
            .map(|&x| {
                let t = 2.0 * x;
                if (t - t.round()).abs() > 1e-12 || !t.is_finite() {
                    Err(Error::InvalidMagneticNumber { m: x, spin: f64::NAN })
                } else {
                    Ok(t.round() as i32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { twice_m })
    }

    /// Label of basis index `index` in a chain of `n_sites`.
    pub fn from_index(index: usize, n_sites: usize, spin: SpinQuantum) -> Self {
        let d = spin.multiplicity();
        let mut twice_m = vec![0; n_sites];
        let mut rest = index;
        for site in (0..n_sites).rev() {
            twice_m[site] = spin.twice_m(rest % d);
            rest /= d;
        }
        Self { twice_m }
    }

    pub fn n_sites(&self) -> usize {
        self.twice_m.len()
    }

    pub fn twice_m(&self) -> &[i32] {
        &self.twice_m
    }

    pub fn m(&self, site: usize) -> f64 {
        self.twice_m[site] as f64 / 2.0
    }

    /// Position in the product basis (site 0 slowest, `m` descending).
    pub fn index(&self, spin: SpinQuantum) -> Result<usize> {
        let d = spin.multiplicity();
        let mut idx = 0usize;
        for &tm in &self.twice_m {
            let local = spin.index_of_twice_m(tm)?;
            idx = idx
                .checked_mul(d)
                .and_then(|v| v.checked_add(local))
                .ok_or(Error::Capacity {
                    required: u128::MAX,
                    max: usize::MAX,
                })?;
        }
        Ok(idx)
    }
}

/// Unit basis vector for `labels`.
pub fn product_state(labels: &BasisLabel, spin: SpinQuantum) -> Result<StateVector> {
    let index = labels.index(spin)?;
    let dim = spin
        .chain_dim(labels.n_sites())
        .ok_or(Error::Capacity {
            required: u128::MAX,
            max: usize::MAX,
        })?;
    StateVector::basis(dim, index)
}
