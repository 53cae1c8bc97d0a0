//! Dephasing master equation
//! `d rho/dt = -i[H, rho] + gamma sum_j (Sz_j rho Sz_j - {Sz_j^2, rho}/2)`.
//!
//! Because every `Sz_j` is diagonal in the product basis, the dissipator acts
//! elementwise: `rho_ab` is damped at rate `gamma/2 sum_j (m_j(a) - m_j(b))^2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::fidelity::{CurveSnapshot, FidelityCurve};
use crate::hamiltonian::{ChainHamiltonian, ChainSpec, SubspaceCode, SubspaceKind};
use crate::hilbert::{BasisLabel, SparseOperator, StateVector};
use crate::linalg::eigh;
use crate::{Error, Result, C64};

/// Hermiticity tolerance of a valid density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace tolerance of a valid density matrix.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated before a state counts as unphysical.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(elements: DMatrix<C64>) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} matrix is not square",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let rho = Self { elements };
        let herm = rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("hermiticity defect {herm:e}")));
        }
        let tr = (rho.trace() - 1.0).abs();
        if tr > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace off by {tr:e}")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Self {
            elements: &v * v.adjoint(),
        }
    }

    fn from_raw(elements: DMatrix<C64>) -> Self {
        Self { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn into_elements(self) -> DMatrix<C64> {
        self.elements
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.elements[(r, c)] - self.elements[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.elements).values[0]
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        assert_eq!(psi.len(), self.dim());
        let mut acc = C64::new(0.0, 0.0);
        for (r, pr) in psi.iter().enumerate() {
            for (c, pc) in psi.iter().enumerate() {
                acc += pr.conj() * self.elements[(r, c)] * pc;
            }
        }
        acc.re
    }

    /// Diagonal element `rho_kk`.
    pub fn population(&self, k: usize) -> f64 {
        self.elements[(k, k)].re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    /// `L_j = Sz_j` on every site.
    SzDephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladSpec {
    pub gamma: f64,
    pub jump_kind: JumpKind,
}

impl LindbladSpec {
    pub fn sz_dephasing(gamma: f64) -> Result<Self> {
        let s = Self {
            gamma,
            jump_kind: JumpKind::SzDephasing,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dephasing rate must be finite and non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    /// Initial RK4 step.
    pub step: f64,
    /// Allowed step-doubling discrepancy per unit time.
    pub tol: f64,
    /// Steps below this abort the run.
    pub min_step: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tol: 1e-7,
            min_step: 1e-9,
        }
    }
}

/// Worst invariant violations seen at the output times. Nothing is repaired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladDiagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    /// Smallest step the error control settled on.
    pub final_step: f64,
}

/// `rho(t_k)` for every grid time, with the integration diagnostics.
#[derive(Debug, Clone)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: LindbladDiagnostics,
}

/// Integrates the master equation on the full space of `spec` with default
/// options and returns `rho(t)` for every grid time.
pub fn lindblad_evolve(
    h: &SparseOperator,
    rho0: &DensityMatrix,
    lspec: &LindbladSpec,
    spec: &ChainSpec,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    Ok(lindblad_evolve_with(h, rho0, lspec, spec, t_grid, &LindbladOptions::default())?.states)
}

pub fn lindblad_evolve_with(
    h: &SparseOperator,
    rho0: &DensityMatrix,
    lspec: &LindbladSpec,
    spec: &ChainSpec,
    t_grid: &[f64],
    opts: &LindbladOptions,
) -> Result<LindbladTrajectory> {
    let dim = spec.hilbert_dim(usize::MAX)?;
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.dim(),
        });
    }
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    let basis: Vec<usize> = (0..dim).collect();
    let mut states = Vec::with_capacity(t_grid.len());
    let diagnostics = integrate(h, &basis, spec, rho0.elements(), lspec, t_grid, opts, |_, rho| {
        states.push(DensityMatrix::from_raw(rho.clone()))
    })?;
    Ok(LindbladTrajectory {
        times: t_grid.to_vec(),
        states,
        diagnostics,
    })
}

/// Elementwise dephasing rates `-gamma/2 sum_j (m_j(a) - m_j(b))^2` over a
/// set of product-basis states.
fn dephasing_rates(basis: &[usize], spec: &ChainSpec, gamma: f64) -> DMatrix<f64> {
    let labels: Vec<Vec<i32>> = basis
        .iter()
        .map(|&i| BasisLabel::from_index(i, spec.n_sites, spec.spin).twice_m().to_vec())
        .collect();
    DMatrix::from_fn(basis.len(), basis.len(), |a, b| {
        let s: i32 = labels[a].iter().zip(&labels[b]).map(|(x, y)| (x - y) * (x - y)).sum();
        // twice_m differences: divide the square by 4
        -0.5 * gamma * s as f64 / 4.0
    })
}

fn rhs(h: &SparseOperator, rates: &DMatrix<f64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let mi = C64::new(0.0, -1.0);
    let mut out = (h.mul_dense(rho) - h.dense_mul(rho)) * mi;
    for (o, (r, g)) in out.iter_mut().zip(rho.iter().zip(rates.iter())) {
        *o += r * *g;
    }
    out
}

fn rk4(h: &SparseOperator, rates: &DMatrix<f64>, rho: &DMatrix<C64>, dt: f64, n: usize) -> DMatrix<C64> {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut x = rho.clone();
    for _ in 0..n {
        let k1 = rhs(h, rates, &x);
        let k2 = rhs(h, rates, &(&x + &k1 * half));
        let k3 = rhs(h, rates, &(&x + &k2 * half));
        let k4 = rhs(h, rates, &(&x + &k3 * full));
        x += (k1 + (k2 + k3) * two + k4) * sixth;
    }
    x
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Drives the RK4 integration of `rho0` (expressed on `basis`, a set of
/// full-space indices invariant under `h`) and hands every grid sample to
/// `observe`.
#[allow(clippy::too_many_arguments)]
fn integrate(
    h: &SparseOperator,
    basis: &[usize],
    spec: &ChainSpec,
    rho0: &DMatrix<C64>,
    lspec: &LindbladSpec,
    t_grid: &[f64],
    opts: &LindbladOptions,
    mut observe: impl FnMut(usize, &DMatrix<C64>),
) -> Result<LindbladDiagnostics> {
    lspec.validate()?;
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "time grid must be non-empty, non-negative and strictly increasing".into(),
        ));
    }
    if !(opts.step > 0.0 && opts.tol > 0.0 && opts.min_step > 0.0) {
        return Err(Error::InvalidArgument("integrator step and tolerances must be positive".into()));
    }
    let rates = dephasing_rates(basis, spec, lspec.gamma);
    let mut diag = LindbladDiagnostics {
        max_trace_error: 0.0,
        max_hermiticity_defect: 0.0,
        min_eigenvalue: f64::INFINITY,
        final_step: opts.step,
    };
    let mut record = |k: usize, rho: &DMatrix<C64>, diag: &mut LindbladDiagnostics| {
        let r = DensityMatrix::from_raw(rho.clone());
        diag.max_trace_error = diag.max_trace_error.max((r.trace() - 1.0).abs());
        diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(r.hermiticity_defect());
        diag.min_eigenvalue = diag.min_eigenvalue.min(r.min_eigenvalue());
        observe(k, rho);
    };

    let mut rho = rho0.clone();
    let mut step = opts.step;
    let mut now = 0.0;
    for (k, &t) in t_grid.iter().enumerate() {
        let span = t - now;
        if span > 0.0 {
            loop {
                let n = (span / step).ceil().max(1.0) as usize;
                let dt = span / n as f64;
                let coarse = rk4(h, &rates, &rho, dt, n);
                let fine = rk4(h, &rates, &rho, 0.5 * dt, 2 * n);
                let err = max_abs_diff(&coarse, &fine);
                if err <= opts.tol * span {
                    rho = fine;
                    break;
                }
                step = 0.5 * dt;
                if step < opts.min_step {
                    return Err(Error::StepUnderflow { t: now, step });
                }
            }
            now = t;
        }
        record(k, &rho, &mut diag);
    }
    diag.final_step = step;
    Ok(diag)
}

/// Full-Hamiltonian sector of `seed` plus the embedding of `rho0 = |seed><seed|`.
fn seeded_sector(spec: &ChainSpec, seed: usize, max_dim: usize) -> Result<(SparseOperator, Vec<usize>, usize)> {
    let chain = ChainHamiltonian::new(spec, max_dim)?;
    let sector = chain.sector(&[seed]);
    let p = sector.position(seed).expect("sector contains its seed");
    Ok((sector.operator, sector.basis, p))
}

fn pure_on(dim: usize, p: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::zeros(dim, dim);
    rho[(p, p)] = C64::new(1.0, 0.0);
    rho
}

/// Curve plus the integrator's diagnostics.
#[derive(Debug, Clone)]
pub struct DephasedCurve {
    pub curve: FidelityCurve,
    pub diagnostics: LindbladDiagnostics,
}

/// `F_s(t) = <psi|rho(t)|psi>` for the memory configuration
/// `|-S, +S, ..., +S>` under the full Hamiltonian with dephasing.
pub fn storage_fidelity_curve(spec: &ChainSpec, lspec: &LindbladSpec, t_grid: &[f64]) -> Result<FidelityCurve> {
    Ok(storage_fidelity_curve_with(spec, lspec, t_grid, &LindbladOptions::default(), crate::DEFAULT_MAX_DIM)?.curve)
}

pub fn storage_fidelity_curve_with(
    spec: &ChainSpec,
    lspec: &LindbladSpec,
    t_grid: &[f64],
    opts: &LindbladOptions,
    max_dim: usize,
) -> Result<DephasedCurve> {
    spec.validate()?;
    let s2 = spec.spin.twice_spin() as i32;
    let mut twice_m = vec![s2; spec.n_sites];
    twice_m[0] = -s2;
    let seed = BasisLabel::from_twice_m(twice_m).index(spec.spin)?;
    let (op, basis, p) = seeded_sector(spec, seed, max_dim)?;
    let mut values = Vec::with_capacity(t_grid.len());
    let diagnostics = integrate(&op, &basis, spec, &pure_on(op.dim(), p), lspec, t_grid, opts, |_, rho| {
        values.push(rho[(p, p)].re.clamp(0.0, 1.0))
    })?;
    let curve = FidelityCurve::new(t_grid.to_vec(), values)?.with_snapshot(snapshot(spec, "storage", lspec, opts));
    Ok(DephasedCurve { curve, diagnostics })
}

/// Transfer fidelity `<target|rho(t)|target>` with dephasing, full
/// Hamiltonian, endpoints as in the unitary transfer protocol.
pub fn dephased_transfer_curve(
    spec: &ChainSpec,
    kind: SubspaceKind,
    lspec: &LindbladSpec,
    t_grid: &[f64],
    opts: &LindbladOptions,
    max_dim: usize,
) -> Result<DephasedCurve> {
    spec.validate()?;
    let sub = SubspaceCode::for_spec(kind, spec)?;
    let mut init = vec![0u8; spec.n_sites];
    init[0] = 1;
    let mut target = vec![0u8; spec.n_sites];
    target[spec.n_sites - 1] = 1;
    let i0 = sub.full_index(&init)?;
    let it = sub.full_index(&target)?;
    let (op, basis, p) = seeded_sector(spec, i0, max_dim)?;
    let q = basis.binary_search(&it).ok();
    let mut values = Vec::with_capacity(t_grid.len());
    let diagnostics = integrate(&op, &basis, spec, &pure_on(op.dim(), p), lspec, t_grid, opts, |_, rho| {
        values.push(q.map_or(0.0, |q| rho[(q, q)].re.clamp(0.0, 1.0)))
    })?;
    let name = match kind {
        SubspaceKind::Memory => "dephased_transfer/memory",
        SubspaceKind::Bus => "dephased_transfer/bus",
    };
    let curve = FidelityCurve::new(t_grid.to_vec(), values)?.with_snapshot(snapshot(spec, name, lspec, opts));
    Ok(DephasedCurve { curve, diagnostics })
}

fn snapshot(spec: &ChainSpec, protocol: &str, lspec: &LindbladSpec, opts: &LindbladOptions) -> CurveSnapshot {
    let parameters = [
        ("gamma".to_string(), lspec.gamma),
        ("step".to_string(), opts.step),
        ("tol".to_string(), opts.tol),
    ]
    .into_iter()
    .collect();
    CurveSnapshot {
        chain: spec.clone(),
        protocol: protocol.to_string(),
        parameters,
    }
}
