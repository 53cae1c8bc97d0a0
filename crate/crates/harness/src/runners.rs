use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use magchain::dynamics::{
    dephased_transfer_curve, first_peak, run_transfer, spectrum_capped, storage_fidelity_curve_with, uniform_grid,
    FidelityCurve, LindbladOptions, LindbladSpec, Model, PeakOptions, PeakRecord, TransferOptions,
};
use magchain::hamiltonian::{ChainSpec, CouplingRange, SubspaceKind};
use magchain::hilbert::SpinQuantum;
use magchain::pulses::{analytic_transition, measure_transition, resonant_frequency};

use crate::error::{HarnessError, HarnessResult};
use crate::result::{Cell, ExperimentResult, Provenance, Table, Tolerances};

/// Global run settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub max_dim: usize,
    pub lindblad: LindbladOptions,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_dim: magchain::DEFAULT_MAX_DIM,
            lindblad: LindbladOptions::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> HarnessResult<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(HarnessError::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.max_dim == 0 {
            return Err(HarnessError::Config("--max-dim must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn transfer(&self, stop: bool) -> TransferOptions {
        TransferOptions {
            tol: self.tol,
            max_dim: self.max_dim,
            stop_after_peak: stop.then(PeakOptions::default),
        }
    }

    pub(crate) fn provenance(&self, started: Instant, assumptions: &[&str]) -> Provenance {
        Provenance {
            engine: "magchain".into(),
            engine_version: env!("CARGO_PKG_VERSION").into(),
            tolerances: Tolerances {
                propagator_tol: self.tol,
                max_dim: self.max_dim,
                peak_prominence: PeakOptions::default().prominence,
                lindblad_step: self.lindblad.step,
                lindblad_tol: self.lindblad.tol,
            },
            wall_time_s: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            assumptions: assumptions.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Transfer-grid step (units of 1/J).
pub const TRANSFER_STEP: f64 = 0.01;

fn reference_spec(n: usize, d: f64, e: f64) -> ChainSpec {
    ChainSpec::reference(n).with_zfs(d).with_anisotropy(e)
}

fn peak_or_nan(curve: &FidelityCurve) -> HarnessResult<PeakRecord> {
    match first_peak(curve) {
        Ok(p) => Ok(p),
        Err(magchain::Error::NoPeak) => Ok(PeakRecord {
            t_star: f64::NAN,
            f_max: f64::NAN,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Bus transfer `|1,0,...,0> -> |0,...,0,1>` over `[0, 2N]`, stopped once the
/// first peak is settled.
fn bus_peak(spec: &ChainSpec, model: Model, settings: &Settings) -> HarnessResult<PeakRecord> {
    let grid = uniform_grid(2.0 * spec.n_sites as f64, TRANSFER_STEP)?;
    let run = run_transfer(spec, SubspaceKind::Bus, model, &grid, &settings.transfer(true))?;
    peak_or_nan(&run.curve)
}

// ---------------------------------------------------------------- table 1

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: usize,
    pub f_max_sr: f64,
    pub jt_star_sr: f64,
    pub f_max_lr: f64,
    pub jt_star_lr: f64,
}

/// Reference values of the transfer table at `D = -20 J`, `E = 0`.
pub const REFERENCE_TABLE1: [Table1Row; 9] = [
    Table1Row { n: 2, f_max_sr: 0.9993, jt_star_sr: 0.79, f_max_lr: 0.9993, jt_star_lr: 0.79 },
    Table1Row { n: 3, f_max_sr: 0.9829, jt_star_sr: 1.12, f_max_lr: 0.9805, jt_star_lr: 1.10 },
    Table1Row { n: 4, f_max_sr: 0.9464, jt_star_sr: 1.38, f_max_lr: 0.9512, jt_star_lr: 1.37 },
    Table1Row { n: 5, f_max_sr: 0.9035, jt_star_sr: 1.73, f_max_lr: 0.9105, jt_star_lr: 1.62 },
    Table1Row { n: 6, f_max_sr: 0.8764, jt_star_sr: 1.98, f_max_lr: 0.8653, jt_star_lr: 1.86 },
    Table1Row { n: 7, f_max_sr: 0.8409, jt_star_sr: 2.23, f_max_lr: 0.8339, jt_star_lr: 2.20 },
    Table1Row { n: 8, f_max_sr: 0.8005, jt_star_sr: 2.47, f_max_lr: 0.8058, jt_star_lr: 2.43 },
    Table1Row { n: 9, f_max_sr: 0.7776, jt_star_sr: 2.83, f_max_lr: 0.7753, jt_star_lr: 2.66 },
    Table1Row { n: 10, f_max_sr: 0.7535, jt_star_sr: 3.07, f_max_lr: 0.7438, jt_star_lr: 2.90 },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Params {
    pub d_over_j: f64,
    pub e_over_j: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for Table1Params {
    fn default() -> Self {
        Self {
            d_over_j: -20.0,
            e_over_j: 0.0,
            n_min: 2,
            n_max: 10,
        }
    }
}

/// Bus-transfer `(F_max, Jt*)` per chain length for nearest-neighbour and
/// `1/r^3` couplings, both under the full Hamiltonian, plus the effective
/// bus model for comparison.
pub fn run_table1(settings: &Settings, params: &Table1Params) -> HarnessResult<(Vec<Table1Row>, ExperimentResult)> {
    settings.validate()?;
    if params.n_min < 2 || params.n_max < params.n_min {
        return Err(HarnessError::Config(format!(
            "chain lengths must satisfy 2 <= n_min <= n_max, got {}..{}",
            params.n_min, params.n_max
        )));
    }
    let started = Instant::now();
    let ns: Vec<usize> = (params.n_min..=params.n_max).collect();
    let jobs: Vec<(usize, u8)> = ns.iter().flat_map(|&n| [(n, 0u8), (n, 1), (n, 2)]).collect();
    let peaks = jobs
        .par_iter()
        .map(|&(n, which)| {
            let base = reference_spec(n, params.d_over_j, params.e_over_j);
            match which {
                0 => bus_peak(&base, Model::Full, settings),
                1 => bus_peak(&base.with_range(CouplingRange::DIPOLAR), Model::Full, settings),
                _ => bus_peak(&base, Model::Effective, settings),
            }
        })
        .collect::<HarnessResult<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut table = Table::new(
        "table1",
        &["n", "f_max_sr", "jt_star_sr", "f_max_lr", "jt_star_lr", "f_max_eff", "jt_star_eff"],
    );
    for (k, &n) in ns.iter().enumerate() {
        let (sr, lr, eff) = (peaks[3 * k], peaks[3 * k + 1], peaks[3 * k + 2]);
        rows.push(Table1Row {
            n,
            f_max_sr: sr.f_max,
            jt_star_sr: sr.t_star,
            f_max_lr: lr.f_max,
            jt_star_lr: lr.t_star,
        });
        table.push(vec![
            n.into(),
            sr.f_max.into(),
            sr.t_star.into(),
            lr.f_max.into(),
            lr.t_star.into(),
            eff.f_max.into(),
            eff.t_star.into(),
        ]);
    }
    let mut outputs = vec![table];
    if params.d_over_j == -20.0 && params.e_over_j == 0.0 {
        let mut cmp = Table::new(
            "reference_comparison",
            &["n", "f_max_sr", "ref_f_max_sr", "jt_star_sr", "ref_jt_star_sr", "f_max_lr", "ref_f_max_lr", "jt_star_lr", "ref_jt_star_lr"],
        );
        for row in &rows {
            if let Some(r) = REFERENCE_TABLE1.iter().find(|r| r.n == row.n) {
                cmp.push(vec![
                    row.n.into(),
                    row.f_max_sr.into(),
                    r.f_max_sr.into(),
                    row.jt_star_sr.into(),
                    r.jt_star_sr.into(),
                    row.f_max_lr.into(),
                    r.f_max_lr.into(),
                    row.jt_star_lr.into(),
                    r.jt_star_lr.into(),
                ]);
            }
        }
        outputs.push(cmp);
    }
    let result = ExperimentResult {
        experiment_id: "table1".into(),
        inputs: json!({
            "chain": reference_spec(params.n_min, params.d_over_j, params.e_over_j),
            "protocol": {
                "kind": "transfer",
                "encoding": "bus",
                "models": ["full nearest_neighbor", "full power_law(3)", "effective"],
                "n_range": [params.n_min, params.n_max],
                "t_end": "2N",
                "step": TRANSFER_STEP,
            },
        }),
        outputs,
        provenance: settings.provenance(
            started,
            &[
                "table parameters assumed: D = -20 J, E = 0, full Hamiltonian, bus encoding",
                "first peak = first maximum with prominence >= 0.01",
            ],
        ),
    };
    Ok((rows, result))
}

// ---------------------------------------------------------------- fig 2

/// Full `N = 5` spectra for `D/J` from -30 to 0 in unit steps, with the
/// lowest and highest 32 levels tagged.
pub fn run_fig2(settings: &Settings) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let ds: Vec<f64> = (0..=30).map(|k| -30.0 + k as f64).collect();
    let spectra = ds
        .par_iter()
        .map(|&d| spectrum_capped(&reference_spec(5, d, 0.0), None, settings.max_dim))
        .collect::<Result<Vec<_>, _>>()?;
    let band = 32;
    let mut levels = Table::new("spectrum", &["d_over_j", "level", "energy", "band"]);
    let mut summary = Table::new(
        "bands",
        &["d_over_j", "lowest_band_width", "gap_above_lowest", "highest_band_width", "gap_below_highest"],
    );
    for (d, values) in ds.iter().zip(&spectra) {
        let n = values.len();
        for (k, e) in values.iter().enumerate() {
            let tag = if k < band {
                "lowest32"
            } else if k >= n - band {
                "highest32"
            } else {
                "other"
            };
            levels.push(vec![(*d).into(), k.into(), (*e).into(), tag.into()]);
        }
        summary.push(vec![
            (*d).into(),
            (values[band - 1] - values[0]).into(),
            (values[band] - values[band - 1]).into(),
            (values[n - 1] - values[n - band]).into(),
            (values[n - band] - values[n - band - 1]).into(),
        ]);
    }
    Ok(ExperimentResult {
        experiment_id: "fig2".into(),
        inputs: json!({
            "chain": reference_spec(5, -20.0, 0.0),
            "protocol": {"kind": "spectrum", "d_over_j": ds},
        }),
        outputs: vec![levels, summary],
        provenance: settings.provenance(started, &[]),
    })
}

// ---------------------------------------------------------------- fig 4

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig4Variant {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for Fig4Variant {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            other => Err(HarnessError::Config(format!("unknown fig4 variant `{other}` (expected a, b, c or d)"))),
        }
    }
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |y - fit| / |y|`.
    pub max_relative_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_relative_residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| ((b - intercept - slope * a) / b).abs())
        .fold(0.0, f64::max);
    LinearFit {
        slope,
        intercept,
        max_relative_residual,
    }
}

/// Largest pointwise distance of two curves sampled on the same grid.
pub fn sup_distance(a: &FidelityCurve, b: &FidelityCurve) -> f64 {
    assert_eq!(a.times, b.times);
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// (a, b): `N = 3` bus transfer under the full and the effective
/// Hamiltonian for `E = 0` and `E = J`; (c, d): effective-model `F_max` and
/// `Jt*` for `N = 2..10`, `E in {0, 0.5, 1} J`.
pub fn run_fig4(settings: &Settings, variant: Fig4Variant) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let (id, outputs, inputs) = match variant {
        Fig4Variant::A | Fig4Variant::B => {
            let e = if variant == Fig4Variant::A { 0.0 } else { 1.0 };
            let spec = reference_spec(3, -20.0, e);
            let grid = uniform_grid(5.0, TRANSFER_STEP)?;
            let curves = [Model::Full, Model::Effective]
                .par_iter()
                .map(|&m| run_transfer(&spec, SubspaceKind::Bus, m, &grid, &settings.transfer(false)))
                .collect::<Result<Vec<_>, _>>()?;
            let (full, eff) = (&curves[0].curve, &curves[1].curve);
            let mut table = Table::new("curves", &["t", "f_full", "f_effective"]);
            for k in 0..grid.len() {
                table.push(vec![grid[k].into(), full.values[k].into(), eff.values[k].into()]);
            }
            let pf = peak_or_nan(full)?;
            let pe = peak_or_nan(eff)?;
            let mut summary = Table::new("summary", &["quantity", "value"]);
            summary.push(vec!["sup_distance".into(), sup_distance(full, eff).into()]);
            summary.push(vec!["f_max_full".into(), pf.f_max.into()]);
            summary.push(vec!["jt_star_full".into(), pf.t_star.into()]);
            summary.push(vec!["f_max_effective".into(), pe.f_max.into()]);
            summary.push(vec!["jt_star_effective".into(), pe.t_star.into()]);
            let id = if variant == Fig4Variant::A { "fig4a" } else { "fig4b" };
            let inputs = json!({
                "chain": spec,
                "protocol": {"kind": "transfer", "encoding": "bus", "models": ["full", "effective"], "t_end": 5.0, "step": TRANSFER_STEP},
            });
            (id, vec![table, summary], inputs)
        }
        Fig4Variant::C | Fig4Variant::D => {
            let es = [0.0, 0.5, 1.0];
            let ns: Vec<usize> = (2..=10).collect();
            let jobs: Vec<(f64, usize)> = es.iter().flat_map(|&e| ns.iter().map(move |&n| (e, n))).collect();
            let peaks = jobs
                .par_iter()
                .map(|&(e, n)| bus_peak(&reference_spec(n, -20.0, e), Model::Effective, settings))
                .collect::<HarnessResult<Vec<_>>>()?;
            let mut table = Table::new("scaling", &["e_over_j", "n", "f_max", "jt_star"]);
            for (&(e, n), p) in jobs.iter().zip(&peaks) {
                table.push(vec![e.into(), n.into(), p.f_max.into(), p.t_star.into()]);
            }
            let mut fits = Table::new("jt_star_fit", &["e_over_j", "slope", "intercept", "max_relative_residual"]);
            for (k, &e) in es.iter().enumerate() {
                let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
                let y: Vec<f64> = peaks[k * ns.len()..(k + 1) * ns.len()].iter().map(|p| p.t_star).collect();
                let fit = linear_fit(&x, &y);
                fits.push(vec![e.into(), fit.slope.into(), fit.intercept.into(), fit.max_relative_residual.into()]);
            }
            let id = if variant == Fig4Variant::C { "fig4c" } else { "fig4d" };
            let inputs = json!({
                "chain": reference_spec(2, -20.0, 0.0),
                "protocol": {"kind": "transfer", "encoding": "bus", "model": "effective", "e_over_j": es, "n_range": [2, 10], "t_end": "2N", "step": TRANSFER_STEP},
            });
            let outputs = if variant == Fig4Variant::C { vec![table, fits] } else { vec![fits, table] };
            (id, outputs, inputs)
        }
    };
    Ok(ExperimentResult {
        experiment_id: id.into(),
        inputs,
        outputs,
        provenance: settings.provenance(started, &[]),
    })
}

// ---------------------------------------------------------------- fig 5

/// Dephasing rates of the `F_max` sweep.
pub const FIG5_GAMMAS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

/// `N = 2` bus transfer with dephasing: (a) `F(t)` at `gamma = 0.5 J`,
/// (b) `F_max` against `gamma` for `E = 0` and `E = J`.
pub fn run_fig5(settings: &Settings) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let es = [0.0, 1.0];
    let curve_grid = uniform_grid(10.0, TRANSFER_STEP)?;
    let peak_grid = uniform_grid(3.0, TRANSFER_STEP)?;
    let mut jobs: Vec<(f64, f64, bool)> = es.iter().map(|&e| (e, 0.5, true)).collect();
    jobs.extend(es.iter().flat_map(|&e| FIG5_GAMMAS.iter().map(move |&g| (e, g, false))));
    let curves = jobs
        .par_iter()
        .map(|&(e, g, long)| {
            let grid = if long { &curve_grid } else { &peak_grid };
            dephased_transfer_curve(
                &reference_spec(2, -20.0, e),
                SubspaceKind::Bus,
                &LindbladSpec::sz_dephasing(g)?,
                grid,
                &settings.lindblad,
                settings.max_dim,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut a = Table::new("transfer_gamma_0.5", &["e_over_j", "t", "F"]);
    let mut b = Table::new("f_max_vs_gamma", &["e_over_j", "gamma", "f_max", "jt_star"]);
    let mut diag = Table::new("diagnostics", &["e_over_j", "gamma", "max_trace_error", "max_hermiticity_defect", "min_eigenvalue"]);
    for (&(e, g, long), c) in jobs.iter().zip(&curves) {
        if long {
            for (t, f) in c.curve.times.iter().zip(&c.curve.values) {
                a.push(vec![e.into(), (*t).into(), (*f).into()]);
            }
        } else {
            let p = peak_or_nan(&c.curve)?;
            b.push(vec![e.into(), g.into(), p.f_max.into(), p.t_star.into()]);
        }
        let d = c.diagnostics;
        diag.push(vec![e.into(), g.into(), d.max_trace_error.into(), d.max_hermiticity_defect.into(), d.min_eigenvalue.into()]);
    }
    Ok(ExperimentResult {
        experiment_id: "fig5".into(),
        inputs: json!({
            "chain": reference_spec(2, -20.0, 0.0),
            "protocol": {"kind": "lindblad", "encoding": "bus", "e_over_j": es, "gamma": FIG5_GAMMAS, "curve_gamma": 0.5, "t_end_curve": 10.0, "t_end_peak": 3.0, "step": TRANSFER_STEP},
        }),
        outputs: vec![a, b, diag],
        provenance: settings.provenance(started, &[]),
    })
}

// ---------------------------------------------------------------- fig 6

/// Storage-fidelity grid: `[0, 100]` in steps of 0.5.
pub fn fig6_grid() -> Vec<f64> {
    uniform_grid(100.0, 0.5).expect("fixed grid")
}

/// `N = 2` storage fidelity of `|-3/2, 3/2>`: (a) `gamma in {0.05, 0.1,
/// 0.2} J` at `E = 0`; (b) `E in {0, 0.5, 1} J` at `gamma = 0.5 J`.
pub fn run_fig6(settings: &Settings) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let grid = fig6_grid();
    let mut jobs: Vec<(&str, f64, f64)> = [0.05, 0.1, 0.2].iter().map(|&g| ("a", g, 0.0)).collect();
    jobs.extend([0.0, 0.5, 1.0].iter().map(|&e| ("b", 0.5, e)));
    let curves = jobs
        .par_iter()
        .map(|&(_, g, e)| {
            storage_fidelity_curve_with(
                &reference_spec(2, -20.0, e),
                &LindbladSpec::sz_dephasing(g)?,
                &grid,
                &settings.lindblad,
                settings.max_dim,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("storage", &["panel", "gamma", "e_over_j", "t", "F_s"]);
    for (&(panel, g, e), c) in jobs.iter().zip(&curves) {
        for (t, f) in c.curve.times.iter().zip(&c.curve.values) {
            table.push(vec![panel.into(), g.into(), e.into(), (*t).into(), (*f).into()]);
        }
    }
    Ok(ExperimentResult {
        experiment_id: "fig6".into(),
        inputs: json!({
            "chain": reference_spec(2, -20.0, 0.0),
            "protocol": {"kind": "storage", "panels": {"a": {"gamma": [0.05, 0.1, 0.2], "e_over_j": 0.0}, "b": {"gamma": 0.5, "e_over_j": [0.0, 0.5, 1.0]}}, "t_end": 100.0, "step": 0.5},
        }),
        outputs: vec![table],
        provenance: settings.provenance(started, &[]),
    })
}

// ---------------------------------------------------------------- pulse

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub spin: SpinQuantum,
    pub zfs_d: f64,
    pub amplitude: f64,
    /// Resonant `|D| (2S - 1)` when absent.
    pub frequency: Option<f64>,
}

impl Default for PulseParams {
    fn default() -> Self {
        Self {
            spin: SpinQuantum::THREE_HALVES,
            zfs_d: -20.0,
            amplitude: 1.0,
            frequency: None,
        }
    }
}

/// Resonant pulse on one magnet: level populations plus the measured and
/// rotating-frame transition time and fidelity.
pub fn run_pulse(settings: &Settings, params: &PulseParams) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let m = measure_transition(params.spin, params.zfs_d, params.amplitude, params.frequency)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(m.curves.twice_m.iter().map(|k| format!("P_{{{k}/2}}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = Table::new("populations", &col_refs);
    for (t, p) in m.curves.times.iter().zip(&m.curves.populations) {
        let mut row: Vec<Cell> = vec![(*t).into()];
        row.extend(p.iter().map(|x| Cell::from(*x)));
        table.push(row);
    }
    let mut summary = Table::new("summary", &["quantity", "value"]);
    summary.push(vec!["t_peak".into(), m.t_peak.into()]);
    summary.push(vec!["peak_population".into(), m.peak_population.into()]);
    summary.push(vec!["max_norm_error".into(), m.curves.max_norm_error.into()]);
    if params.spin == SpinQuantum::THREE_HALVES {
        let a = analytic_transition(params.amplitude, params.zfs_d)?;
        summary.push(vec!["analytic_delta_t".into(), a.delta_t.into()]);
        summary.push(vec!["analytic_fidelity".into(), a.fidelity.into()]);
    }
    let frequency = params.frequency.unwrap_or_else(|| resonant_frequency(params.spin, params.zfs_d));
    Ok(ExperimentResult {
        experiment_id: "pulse".into(),
        inputs: json!({
            "spin": params.spin,
            "zfs_d": params.zfs_d,
            "protocol": {"kind": "pulse", "amplitude": params.amplitude, "frequency": frequency, "duration": m.curves.times.last()},
        }),
        outputs: vec![table, summary],
        provenance: settings.provenance(started, &["drive at omega = |D| (2S - 1); transition fidelity = peak population"]),
    })
}
