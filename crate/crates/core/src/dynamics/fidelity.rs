use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::propagate::Propagator;
use crate::hamiltonian::{
    build_bus_effective, build_mem_effective, ChainHamiltonian, ChainSpec, SubspaceCode, SubspaceKind,
};
use crate::hilbert::{SparseOperator, StateVector};
use crate::linalg::BlockEigensystem;
use crate::{Error, Result, C64};

/// Generating parameters stored alongside a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSnapshot {
    pub chain: ChainSpec,
    pub protocol: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

/// Sampled `F(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub spec_snapshot: Option<CurveSnapshot>,
}

impl FidelityCurve {
    /// Checks that times increase strictly and values lie in `[0, 1 + 1e-9]`.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0 + 1e-9)) {
            return Err(Error::InvalidArgument(format!("fidelity value {v} outside [0, 1]")));
        }
        Ok(Self {
            times,
            values,
            spec_snapshot: None,
        })
    }

    pub fn with_snapshot(mut self, snapshot: CurveSnapshot) -> Self {
        self.spec_snapshot = Some(snapshot);
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let k = self.times.partition_point(|&x| x < t);
        if k == self.times.len() {
            return None;
        }
        if self.times[k] == t {
            return Some(self.values[k]);
        }
        if k == 0 {
            return None;
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[k - 1] * (1.0 - w) + self.values[k] * w)
    }

    /// CSV with header `t,F`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["t", "F"]).map_err(io)?;
        for (t, f) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), f.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// First maximum of a fidelity curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub t_star: f64,
    pub f_max: f64,
}

/// Peak acceptance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakOptions {
    /// Minimum topographic prominence of an accepted maximum. Ripples on the
    /// rising flank of the full-Hamiltonian curves (amplitude ~1e-4) are
    /// skipped; the physical transfer peak has prominence of order one.
    pub prominence: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self { prominence: 0.01 }
    }
}

/// First peak with the default prominence.
pub fn first_peak(curve: &FidelityCurve) -> Result<PeakRecord> {
    first_peak_with(&curve.times, &curve.values, PeakOptions::default())
}

/// First grid maximum whose prominence reaches `opts.prominence`, refined by
/// the parabola through it and its two neighbours. On a plateau the earliest
/// plateau sample is returned unrefined.
pub fn first_peak_with(times: &[f64], values: &[f64], opts: PeakOptions) -> Result<PeakRecord> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    if times.len() < 3 {
        return Err(Error::InvalidArgument("peak search needs at least 3 samples".into()));
    }
    let k = locate_peak(values, opts.prominence).ok_or(Error::NoPeak)?;
    let plateau = values[k + 1] == values[k];
    if plateau {
        return Ok(PeakRecord {
            t_star: times[k],
            f_max: values[k].min(1.0),
        });
    }
    let (t_star, f) = parabola_vertex(
        (times[k - 1], values[k - 1]),
        (times[k], values[k]),
        (times[k + 1], values[k + 1]),
    );
    Ok(PeakRecord {
        t_star,
        f_max: f.max(values[k]).min(1.0),
    })
}

/// Index of the first accepted maximum (start of its plateau).
fn locate_peak(v: &[f64], prominence: f64) -> Option<usize> {
    let n = v.len();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] && peak_prominence(v, i, j) >= prominence {
                return Some(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    None
}

/// Prominence of the plateau `v[a..=b]`: height above the higher of the two
/// minima reached before the curve climbs above the plateau on either side.
fn peak_prominence(v: &[f64], a: usize, b: usize) -> f64 {
    let h = v[a];
    let mut left = h;
    for &x in v[..a].iter().rev() {
        if x > h {
            break;
        }
        left = left.min(x);
    }
    let mut right = h;
    for &x in &v[b + 1..] {
        if x > h {
            break;
        }
        right = right.min(x);
    }
    h - left.max(right)
}

/// Vertex of the parabola through three points, clamped to their span.
fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    // Newton form: y = y0 + a (x - x0) + c (x - x0)(x - x1)
    let a = (y1 - y0) / (x1 - x0);
    let b = (y2 - y1) / (x2 - x1);
    let c = (b - a) / (x2 - x0);
    if !(c < 0.0) {
        return (x1, y1);
    }
    let x = (0.5 * (x0 + x1) - a / (2.0 * c)).clamp(x0, x2);
    let y = y0 + a * (x - x0) + c * (x - x0) * (x - x1);
    (x, y)
}

/// `0, step, 2 step, ...` up to and including `t_end` (within rounding).
pub fn uniform_grid(t_end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("bad grid: end {t_end}, step {step}")));
    }
    let n = (t_end / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "time grid must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Which Hamiltonian drives a transfer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Full chain Hamiltonian (range taken from the spec).
    Full,
    /// Analytic effective Hamiltonian of the encoding band.
    Effective,
}

/// Knobs of a transfer run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferOptions {
    pub tol: f64,
    pub max_dim: usize,
    /// Stop sampling once the first peak is settled.
    pub stop_after_peak: Option<PeakOptions>,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_dim: crate::DEFAULT_MAX_DIM,
            stop_after_peak: None,
        }
    }
}

/// Outcome of a transfer run.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRun {
    pub curve: FidelityCurve,
    /// Dimension actually propagated (after sector restriction).
    pub propagated_dim: usize,
}

/// `|<target| exp(-iHt) |init>|^2` on `t_grid`.
///
/// `h` is either a full chain operator or an effective one (`2^N`); the
/// endpoints come from `sub.transfer_states`. Propagation is restricted to
/// the invariant subspace generated by the initial state.
pub fn transfer_fidelity_curve(
    h: &SparseOperator,
    spec: &ChainSpec,
    sub: &SubspaceCode,
    t_grid: &[f64],
    tol: f64,
) -> Result<FidelityCurve> {
    check_grid(t_grid)?;
    if sub.n_sites() != spec.n_sites {
        return Err(Error::DimensionMismatch {
            expected: spec.n_sites,
            found: sub.n_sites(),
        });
    }
    let (init, target) = sub.transfer_states(h.dim())?;
    let i0 = basis_index(&init);
    let it = basis_index(&target);
    let basis = h.invariant_closure(&[i0]);
    let restricted = h.restrict(&basis);
    let values = sector_curve(&restricted, &basis, i0, it, t_grid, tol, None)?;
    FidelityCurve::new(t_grid[..values.len()].to_vec(), values)
}

/// Transfer run that never materializes the full operator: the sector of
/// the initial state is generated directly from the chain terms.
pub fn run_transfer(
    spec: &ChainSpec,
    kind: SubspaceKind,
    model: Model,
    t_grid: &[f64],
    opts: &TransferOptions,
) -> Result<TransferRun> {
    spec.validate()?;
    check_grid(t_grid)?;
    let sub = SubspaceCode::for_spec(kind, spec)?;
    let mut init_bits = vec![0u8; spec.n_sites];
    init_bits[0] = 1;
    let mut target_bits = vec![0u8; spec.n_sites];
    target_bits[spec.n_sites - 1] = 1;
    let (op, basis, i0, it) = match model {
        Model::Full => {
            let chain = ChainHamiltonian::new(spec, opts.max_dim)?;
            let i0 = sub.full_index(&init_bits)?;
            let it = sub.full_index(&target_bits)?;
            let sector = chain.sector(&[i0]);
            (sector.operator, sector.basis, i0, it)
        }
        Model::Effective => {
            let h = match kind {
                SubspaceKind::Memory => build_mem_effective(spec)?,
                SubspaceKind::Bus => build_bus_effective(spec)?,
            };
            let i0 = sub.effective_index(&init_bits)?;
            let it = sub.effective_index(&target_bits)?;
            let basis = h.invariant_closure(&[i0]);
            (h.restrict(&basis), basis, i0, it)
        }
    };
    let values = sector_curve(&op, &basis, i0, it, t_grid, opts.tol, opts.stop_after_peak)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("tol".to_string(), opts.tol);
    let protocol = format!(
        "transfer/{}/{}",
        match kind {
            SubspaceKind::Memory => "memory",
            SubspaceKind::Bus => "bus",
        },
        match model {
            Model::Full => "full",
            Model::Effective => "effective",
        }
    );
    let curve = FidelityCurve::new(t_grid[..values.len()].to_vec(), values)?.with_snapshot(CurveSnapshot {
        chain: spec.clone(),
        protocol,
        parameters,
    });
    Ok(TransferRun {
        curve,
        propagated_dim: op.dim(),
    })
}

fn basis_index(state: &StateVector) -> usize {
    state
        .amplitudes()
        .iter()
        .position(|a| *a != C64::new(0.0, 0.0))
        .expect("basis state has a nonzero amplitude")
}

/// Fidelity samples inside an invariant sector `basis` (sorted full
/// indices) carrying the restricted operator `op`.
fn sector_curve(
    op: &SparseOperator,
    basis: &[usize],
    i0: usize,
    it: usize,
    t_grid: &[f64],
    tol: f64,
    stop: Option<PeakOptions>,
) -> Result<Vec<f64>> {
    let p0 = basis.binary_search(&i0).expect("sector contains its seed");
    let Ok(pt) = basis.binary_search(&it) else {
        // target unreachable: the fidelity vanishes identically
        return Ok(vec![0.0; t_grid.len()]);
    };
    let mut values = Vec::with_capacity(t_grid.len());
    let settled = |values: &[f64]| match stop {
        Some(o) => values.len() >= 3 && locate_peak(values, o.prominence).is_some(),
        None => false,
    };
    let prop = Propagator::new(op, tol)?;
    match &prop {
        Propagator::Dense(eig) => {
            let amp = DenseAmplitude::new(eig, p0, pt);
            for &t in t_grid {
                // exp(0) is the identity; skip the rounding of the eigen sum
                let f = if t == 0.0 {
                    if p0 == pt { 1.0 } else { 0.0 }
                } else {
                    amp.at(t).norm_sqr().min(1.0)
                };
                values.push(f);
                if settled(&values) {
                    break;
                }
            }
        }
        Propagator::Krylov { .. } => {
            let mut psi = vec![C64::new(0.0, 0.0); op.dim()];
            psi[p0] = C64::new(1.0, 0.0);
            let mut now = 0.0;
            for &t in t_grid {
                psi = prop.step(&psi, t - now)?;
                now = t;
                values.push(psi[pt].norm_sqr().min(1.0));
                if settled(&values) {
                    break;
                }
            }
        }
    }
    Ok(values)
}

/// `<e_target| exp(-iHt) |e_init>` from a block eigensystem.
struct DenseAmplitude {
    energies: Vec<f64>,
    weights: Vec<C64>,
}

impl DenseAmplitude {
    fn new(eig: &BlockEigensystem, init: usize, target: usize) -> Self {
        let mut energies = Vec::new();
        let mut weights = Vec::new();
        for idx in eig.indices() {
            let w = eig.component(idx, target) * eig.component(idx, init).conj();
            if w != C64::new(0.0, 0.0) {
                energies.push(eig.value(idx));
                weights.push(w);
            }
        }
        Self { energies, weights }
    }

    fn at(&self, t: f64) -> C64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * C64::from_polar(1.0, -e * t))
            .sum()
    }
}
