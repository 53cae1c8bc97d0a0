//! `exp(-iHt) psi` by Lanczos-Krylov steps, or exactly through a block
//! eigendecomposition for small operators.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::hilbert::l2_norm;
use crate::hilbert::{SparseOperator, StateVector};
use crate::linalg::BlockEigensystem;
use crate::{Error, Result, C64, DENSE_CAP};

/// Operators up to this dimension are propagated through their eigenbasis.
pub const DENSE_PROPAGATION_DIM: usize = 1024;

/// Largest Krylov subspace built in one step.
pub const KRYLOV_MAX_SUBSPACE: usize = 40;

/// Step budget of a single `evolve` call.
const KRYLOV_MAX_STEPS: usize = 1_000_000;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Propagator for a fixed Hamiltonian.
#[derive(Debug)]
pub enum Propagator<'a> {
    Dense(BlockEigensystem),
    Krylov { h: &'a SparseOperator, tol: f64 },
}

impl<'a> Propagator<'a> {
    /// Chooses the eigenbasis route for `dim <= 1024`, Krylov otherwise.
    pub fn new(h: &'a SparseOperator, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        if h.dim() <= DENSE_PROPAGATION_DIM {
            Ok(Propagator::Dense(BlockEigensystem::of(h, DENSE_CAP)?))
        } else {
            Ok(Propagator::Krylov { h, tol })
        }
    }

    pub fn krylov(h: &'a SparseOperator, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Propagator::Krylov { h, tol })
    }

    pub fn dim(&self) -> usize {
        match self {
            Propagator::Dense(e) => e.dim(),
            Propagator::Krylov { h, .. } => h.dim(),
        }
    }

    /// `exp(-iH dt) psi`.
    pub fn step(&self, psi: &[C64], dt: f64) -> Result<Vec<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        if dt == 0.0 {
            return Ok(psi.to_vec());
        }
        match self {
            Propagator::Dense(e) => Ok(e.evolve(psi, dt)),
            Propagator::Krylov { h, tol } => krylov_evolve(h, psi, dt, *tol, KRYLOV_MAX_SUBSPACE),
        }
    }
}

/// `exp(-iHt) psi0` with error at most `tol` in the 2-norm.
pub fn evolve(h: &SparseOperator, psi0: &StateVector, t: f64, tol: f64) -> Result<StateVector> {
    let prop = Propagator::new(h, tol)?;
    let out = prop.step(psi0.amplitudes(), t)?;
    Ok(StateVector::from_raw_unchecked(out))
}

/// Adaptive Lanczos propagation.
///
/// Each step extends the Krylov basis one vector at a time (with full
/// reorthogonalization) until the a-posteriori estimate
/// `beta_m |e_m^T exp(-i T tau) e_1|` drops below the step's share of `tol`;
/// if the basis reaches `max_subspace` first, the step length is shrunk.
pub fn krylov_evolve(h: &SparseOperator, psi: &[C64], t: f64, tol: f64, max_subspace: usize) -> Result<Vec<C64>> {
    let n = h.dim();
    assert_eq!(psi.len(), n);
    let norm0 = l2_norm(psi);
    if norm0 == 0.0 || t == 0.0 {
        return Ok(psi.to_vec());
    }
    let sign = t.signum();
    let total = t.abs();
    let max_subspace = max_subspace.clamp(2, n.max(2));

    let mut state: Vec<C64> = psi.to_vec();
    let mut done = 0.0;
    let mut tau = total;
    let mut steps = 0usize;
    let mut last_err = 0.0;

    while done < total {
        steps += 1;
        if steps > KRYLOV_MAX_STEPS {
            return Err(Error::NonConvergence {
                t_reached: sign * done,
                residual: last_err,
            });
        }
        tau = tau.min(total - done);
        let scale = l2_norm(&state);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_subspace + 1);
        basis.push(state.iter().map(|z| z / scale).collect());
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![C64::new(0.0, 0.0); n];

        // Some((coeffs, tau)) once the step is accepted
        let mut accepted: Option<(Vec<C64>, f64)> = None;
        for j in 0..max_subspace {
            h.apply_into(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w).re;
            axpy(C64::new(-alpha, 0.0), &basis[j], &mut w);
            if j > 0 {
                axpy(C64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
            alphas.push(alpha);
            let beta = l2_norm(&w);
            let m = alphas.len();
            let breakdown = beta <= 1e-13 * (alpha.abs() + betas.last().copied().unwrap_or(0.0)).max(1e-300);
            let small = TridiagExp::new(&alphas, &betas);
            if breakdown || m == n {
                // invariant subspace: the projection is exact
                accepted = Some((small.apply(sign * tau), tau));
                break;
            }
            let budget = tol * tau / total;
            let y = small.apply(sign * tau);
            let err = beta * y[m - 1].norm();
            last_err = err;
            if err <= budget {
                accepted = Some((y, tau));
                break;
            }
            if j + 1 == max_subspace {
                // shrink the step on the final basis
                let mut trial = tau;
                loop {
                    trial *= 0.5;
                    if trial < total * 1e-14 {
                        return Err(Error::NonConvergence {
                            t_reached: sign * done,
                            residual: err,
                        });
                    }
                    let y = small.apply(sign * trial);
                    let e = beta * y[m - 1].norm();
                    last_err = e;
                    if e <= tol * trial / total {
                        accepted = Some((y, trial));
                        break;
                    }
                }
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|z| z / beta).collect());
        }
        let (coeffs, used) = accepted.expect("krylov step produced no result");
        let mut next = vec![C64::new(0.0, 0.0); n];
        for (v, c) in basis.iter().zip(&coeffs) {
            axpy(c * scale, v, &mut next);
        }
        state = next;
        done += used;
        // grow again after a shrink
        tau = used * if used < tau { 1.5 } else { 1.0 };
    }
    Ok(state)
}

/// `exp(-i T s) e_1` for a real symmetric tridiagonal `T`.
struct TridiagExp {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl TridiagExp {
    fn new(alphas: &[f64], betas: &[f64]) -> Self {
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        if m == 1 {
            return Self {
                values: vec![alphas[0]],
                vectors: DMatrix::from_element(1, 1, 1.0),
            };
        }
        let eig = SymmetricEigen::new(t);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    fn apply(&self, s: f64) -> Vec<C64> {
        let m = self.values.len();
        let first_row: Vec<C64> = (0..m)
            .map(|k| C64::from_polar(self.vectors[(0, k)], -self.values[k] * s))
            .collect();
        (0..m)
            .map(|r| (0..m).map(|k| first_row[k] * self.vectors[(r, k)]).sum())
            .collect()
    }
}
