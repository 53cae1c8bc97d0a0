//! Spin algebra and the product basis of a chain.
//!
//! Basis convention used everywhere in the crate: site 0 is the leftmost
//! (slowest-varying) tensor factor, and within a site the states are ordered
//! by descending magnetic quantum number, `m = +S, S-1, ..., -S`.

mod sparse;
mod state;

pub use sparse::{SparseBuilder, SparseOperator};
pub use state::{product_state, BasisLabel, StateVector};
pub(crate) use state::l2_norm;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Spin length stored as `2S`. Only half-integer spins are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpinQuantum {
    twice_spin: u32,
}

impl SpinQuantum {
    pub fn new(twice_spin: u32) -> Result<Self> {
        if twice_spin == 0 {
            return Err(Error::NonPositiveSpin { twice_spin });
        }
        if twice_spin % 2 == 0 {
            return Err(Error::IntegerSpin { twice_spin });
        }
        Ok(Self { twice_spin })
    }

    /// `S = 3/2`, the spin of the reference model.
    pub const THREE_HALVES: SpinQuantum = SpinQuantum { twice_spin: 3 };
    pub const ONE_HALF: SpinQuantum = SpinQuantum { twice_spin: 1 };

    pub fn twice_spin(self) -> u32 {
        self.twice_spin
    }

    pub fn value(self) -> f64 {
        self.twice_spin as f64 / 2.0
    }

    /// Local dimension `2S + 1`.
    pub fn multiplicity(self) -> usize {
        self.twice_spin as usize + 1
    }

    /// `2m` of the local basis state at `index`.
    pub fn twice_m(self, index: usize) -> i32 {
        self.twice_spin as i32 - 2 * index as i32
    }

    pub fn m(self, index: usize) -> f64 {
        self.twice_m(index) as f64 / 2.0
    }

    /// Local basis index of the state with magnetic number `2m`.
    pub fn index_of_twice_m(self, twice_m: i32) -> Result<usize> {
        let s2 = self.twice_spin as i32;
        if twice_m.abs() > s2 || (s2 - twice_m) % 2 != 0 {
            return Err(Error::InvalidMagneticNumber {
                m: twice_m as f64 / 2.0,
                spin: self.value(),
            });
        }
        Ok(((s2 - twice_m) / 2) as usize)
    }

    /// Checked `d^n`. Returns `None` on overflow.
    pub fn chain_dim(self, n_sites: usize) -> Option<usize> {
        let exp = u32::try_from(n_sites).ok()?;
        self.multiplicity().checked_pow(exp)
    }
}

impl TryFrom<f64> for SpinQuantum {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice.is_finite() && twice >= 0.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::InvalidSpec {
                field: "spin",
                reason: format!("{s} is not a multiple of 1/2"),
            });
        }
        SpinQuantum::new(twice.round() as u32)
    }
}

impl From<SpinQuantum> for f64 {
    fn from(s: SpinQuantum) -> f64 {
        s.value()
    }
}

/// Dense single-site spin matrices in the `m`-descending basis.
#[derive(Debug, Clone)]
pub struct SiteOperatorSet {
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
    pub s_plus: DMatrix<C64>,
    pub s_minus: DMatrix<C64>,
}

impl SiteOperatorSet {
    pub fn identity(&self) -> DMatrix<C64> {
        DMatrix::identity(self.sz.nrows(), self.sz.ncols())
    }
}

/// Standard ladder construction: `<m+1|S+|m> = sqrt(S(S+1) - m(m+1))`.
pub fn spin_operators(spin: SpinQuantum) -> SiteOperatorSet {
    let d = spin.multiplicity();
    let s = spin.value();
    let sz = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(spin.m(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // Raising moves from index c to index c-1 (m grows as the index shrinks).
    let s_plus = DMatrix::from_fn(d, d, |r, c| {
        if c >= 1 && r == c - 1 {
            let m = spin.m(c);
            C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s_minus = s_plus.adjoint();
    let sx = (&s_plus + &s_minus) * C64::new(0.5, 0.0);
    // (S+ - S-) / 2i
    let sy = (&s_plus - &s_minus) * C64::new(0.0, -0.5);
    SiteOperatorSet {
        sx,
        sy,
        sz,
        s_plus,
        s_minus,
    }
}

/// Tensor `site_op` into the chain at `site`, identity elsewhere.
pub fn embed(
    site_op: &DMatrix<C64>,
    site: usize,
    n_sites: usize,
    spin: SpinQuantum,
) -> Result<SparseOperator> {
    if site >= n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let d = spin.multiplicity();
    if site_op.nrows() != d || site_op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: site_op.nrows(),
        });
    }
    let dim = spin.chain_dim(n_sites).ok_or(Error::Capacity {
        required: u128::MAX,
        max: usize::MAX,
    })?;
    let stride = d.pow((n_sites - 1 - site) as u32);
    let mut builder = SparseBuilder::new(dim);
    for col in 0..dim {
        let a = (col / stride) % d;
        for b in 0..d {
            let v = site_op[(b, a)];
            if v != C64::new(0.0, 0.0) {
                let row = col - a * stride + b * stride;
                builder.push(row, col, v);
            }
        }
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn rejects_integer_and_zero_spin() {
        assert_eq!(
            SpinQuantum::new(2),
            Err(Error::IntegerSpin { twice_spin: 2 })
        );
        assert_eq!(
            SpinQuantum::new(0),
            Err(Error::NonPositiveSpin { twice_spin: 0 })
        );
        assert!(SpinQuantum::try_from(1.0).is_err());
        assert!(SpinQuantum::try_from(0.75).is_err());
        assert_eq!(SpinQuantum::try_from(2.5).unwrap().twice_spin(), 5);
    }

    #[test]
    fn spin_half_sz() {
        let ops = spin_operators(SpinQuantum::ONE_HALF);
        assert_eq!(ops.sz[(0, 0)].re, 0.5);
        assert_eq!(ops.sz[(1, 1)].re, -0.5);
    }

    #[test]
    fn spin_three_halves_ladder_element() {
        let spin = SpinQuantum::THREE_HALVES;
        let ops = spin_operators(spin);
        let from = spin.index_of_twice_m(-3).unwrap();
        let to = spin.index_of_twice_m(-1).unwrap();
        assert!((ops.s_plus[(to, from)].re - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn su2_algebra_holds() {
        for twice in [1, 3, 5, 7, 9] {
            let spin = SpinQuantum::new(twice).unwrap();
            let o = spin_operators(spin);
            let comm = &o.sx * &o.sy - &o.sy * &o.sx;
            let isz = &o.sz * C64::new(0.0, 1.0);
            assert!(close(&comm, &isz, 1e-14), "S = {}", spin.value());
            assert!(close(&o.s_plus, &o.s_minus.adjoint(), 0.0));
            let casimir = &o.sx * &o.sx + &o.sy * &o.sy + &o.sz * &o.sz;
            let s = spin.value();
            assert!(close(&casimir, &(o.identity() * C64::new(s * (s + 1.0), 0.0)), 1e-12));
        }
    }

    #[test]
    fn embed_identity_is_identity() {
        let spin = SpinQuantum::THREE_HALVES;
        let id = spin_operators(spin).identity();
        for site in 0..3 {
            let op = embed(&id, site, 3, spin).unwrap();
            assert_eq!(op.dim(), 64);
            assert_eq!(op.nnz(), 64);
            assert!(op.entries().all(|(r, c, v)| r == c && v == C64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn embed_sz_diagonal_action() {
        let spin = SpinQuantum::THREE_HALVES;
        let sz0 = embed(&spin_operators(spin).sz, 0, 2, spin).unwrap();
        let label = BasisLabel::from_m(&[-1.5, 0.5]).unwrap();
        let psi = product_state(&label, spin).unwrap();
        let out = sz0.apply(psi.amplitudes());
        let idx = label.index(spin).unwrap();
        assert_eq!(out[idx], C64::new(-1.5, 0.0));
    }

    #[test]
    fn embed_raising_on_second_site() {
        let spin = SpinQuantum::THREE_HALVES;
        let sp1 = embed(&spin_operators(spin).s_plus, 1, 2, spin).unwrap();
        let from = BasisLabel::from_m(&[-1.5, -1.5]).unwrap();
        let to = BasisLabel::from_m(&[-1.5, -0.5]).unwrap();
        let out = sp1.apply(product_state(&from, spin).unwrap().amplitudes());
        let to_idx = to.index(spin).unwrap();
        for (i, z) in out.iter().enumerate() {
            if i == to_idx {
                assert!((z.re - 3f64.sqrt()).abs() < 1e-15 && z.im == 0.0);
            } else {
                assert_eq!(*z, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn embed_rejects_bad_site() {
        let spin = SpinQuantum::THREE_HALVES;
        let err = embed(&spin_operators(spin).sz, 2, 2, spin).unwrap_err();
        assert_eq!(err, Error::SiteOutOfRange { site: 2, n_sites: 2 });
    }

    #[test]
    fn embedded_casimir_per_site() {
        let spin = SpinQuantum::THREE_HALVES;
        let o = spin_operators(spin);
        for site in 0..3 {
            let x = embed(&o.sx, site, 3, spin).unwrap();
            let y = embed(&o.sy, site, 3, spin).unwrap();
            let z = embed(&o.sz, site, 3, spin).unwrap();
            let cas = x.matmul(&x).add(&y.matmul(&y)).add(&z.matmul(&z)).to_dense();
            let expect = DMatrix::<C64>::identity(64, 64) * C64::new(3.75, 0.0);
            assert!(close(&cas, &expect, 1e-12));
        }
    }
}
