//! JSON configuration of the `simulate` command:
//! `{"chain": {...ChainSpec...}, "protocol": {"kind": ..., ...}}`.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use magchain::dynamics::{
    dephased_transfer_curve, first_peak, run_transfer, spectrum_capped, storage_fidelity_curve_with, uniform_grid,
    FidelityCurve, LindbladSpec, Model,
};
use magchain::hamiltonian::{effective_couplings, ChainSpec, SubspaceKind};
use magchain::pulses::{resonant_frequency, simulate_pulse, PulseSpec};

use crate::error::{HarnessError, HarnessResult};
use crate::result::{Cell, ExperimentResult, Table};
use crate::runners::{Settings, TRANSFER_STEP};

/// Encoding band of a transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    Bus,
    Memory,
}

impl From<Encoding> for SubspaceKind {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Bus => SubspaceKind::Bus,
            Encoding::Memory => SubspaceKind::Memory,
        }
    }
}

fn default_model() -> Model {
    Model::Full
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Protocol {
    /// Unitary transfer `|1,0,...,0> -> |0,...,0,1>`.
    Transfer {
        #[serde(default)]
        encoding: Encoding,
        #[serde(default = "default_model")]
        model: Model,
        #[serde(default)]
        t_end: Option<f64>,
        #[serde(default)]
        step: Option<f64>,
        #[serde(default = "yes")]
        stop_after_peak: bool,
    },
    /// Storage fidelity of `|-S, +S, ..., +S>` with dephasing.
    Storage {
        gamma: f64,
        #[serde(default)]
        t_end: Option<f64>,
        #[serde(default)]
        step: Option<f64>,
    },
    /// Transfer with dephasing.
    Lindblad {
        gamma: f64,
        #[serde(default)]
        encoding: Encoding,
        #[serde(default)]
        t_end: Option<f64>,
        #[serde(default)]
        step: Option<f64>,
    },
    /// Drive on a single site of the chain's spin and `zfs_d`.
    Pulse {
        amplitude: f64,
        #[serde(default)]
        frequency: Option<f64>,
        duration: f64,
        #[serde(default)]
        samples: Option<usize>,
    },
    /// Lowest `count` levels (all when absent).
    Spectrum {
        #[serde(default)]
        count: Option<usize>,
    },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::Transfer {
            encoding: Encoding::Bus,
            model: Model::Full,
            t_end: None,
            step: None,
            stop_after_peak: true,
        }
    }
}

fn default_chain() -> ChainSpec {
    ChainSpec::reference(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_chain")]
    pub chain: ChainSpec,
    #[serde(default)]
    pub protocol: Protocol,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.chain.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn positive(name: &str, v: f64) -> HarnessResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(HarnessError::Config(format!("protocol.{name} must be positive, got {v}")))
    }
}

/// Default transfer window: `2N` for the bus; for the memory band, four
/// times the two-site tunneling time `pi / (4 J_mem)` scaled by `N / 2`.
fn default_transfer_end(spec: &ChainSpec, encoding: Encoding) -> HarnessResult<f64> {
    let n = spec.n_sites as f64;
    match encoding {
        Encoding::Bus => Ok(2.0 * n),
        Encoding::Memory => {
            let c = effective_couplings(spec)
                .map_err(|e| HarnessError::Config(format!("protocol.t_end required: {e}")))?;
            Ok(n * std::f64::consts::PI / (2.0 * c.j_mem.abs()))
        }
    }
}

fn curve_tables(curve: &FidelityCurve, column: &str) -> HarnessResult<Vec<Table>> {
    let mut data = Table::new("curve", &["t", column]);
    for (t, f) in curve.times.iter().zip(&curve.values) {
        data.push(vec![(*t).into(), (*f).into()]);
    }
    let mut summary = Table::new("summary", &["quantity", "value"]);
    match first_peak(curve) {
        Ok(p) => {
            summary.push(vec!["t_star".into(), p.t_star.into()]);
            summary.push(vec!["f_max".into(), p.f_max.into()]);
        }
        Err(magchain::Error::NoPeak) => summary.push(vec!["t_star".into(), "none".into()]),
        Err(e) => return Err(e.into()),
    }
    Ok(vec![data, summary])
}

/// Runs the configured protocol.
pub fn simulate(settings: &Settings, cfg: &SimulationConfig) -> HarnessResult<ExperimentResult> {
    settings.validate()?;
    let started = Instant::now();
    let spec = &cfg.chain;
    let (kind, outputs) = match &cfg.protocol {
        Protocol::Transfer {
            encoding,
            model,
            t_end,
            step,
            stop_after_peak,
        } => {
            let t_end = positive("t_end", t_end.map_or_else(|| default_transfer_end(spec, *encoding), Ok)?)?;
            let step = positive(
                "step",
                step.unwrap_or(match encoding {
                    Encoding::Bus => TRANSFER_STEP,
                    Encoding::Memory => t_end / 20_000.0,
                }),
            )?;
            let grid = uniform_grid(t_end, step)?;
            let run = run_transfer(spec, (*encoding).into(), *model, &grid, &settings.transfer(*stop_after_peak))?;
            ("transfer", curve_tables(&run.curve, "F")?)
        }
        Protocol::Storage { gamma, t_end, step } => {
            let grid = uniform_grid(positive("t_end", t_end.unwrap_or(100.0))?, positive("step", step.unwrap_or(0.5))?)?;
            let lspec = LindbladSpec::sz_dephasing(*gamma).map_err(|e| HarnessError::Config(e.to_string()))?;
            let c = storage_fidelity_curve_with(spec, &lspec, &grid, &settings.lindblad, settings.max_dim)?;
            let mut t = curve_tables(&c.curve, "F_s")?;
            t.truncate(1);
            ("storage", t)
        }
        Protocol::Lindblad {
            gamma,
            encoding,
            t_end,
            step,
        } => {
            let t_end = positive("t_end", t_end.map_or_else(|| default_transfer_end(spec, *encoding), Ok)?)?;
            let grid = uniform_grid(t_end, positive("step", step.unwrap_or(TRANSFER_STEP))?)?;
            let lspec = LindbladSpec::sz_dephasing(*gamma).map_err(|e| HarnessError::Config(e.to_string()))?;
            let c = dephased_transfer_curve(spec, (*encoding).into(), &lspec, &grid, &settings.lindblad, settings.max_dim)?;
            ("lindblad", curve_tables(&c.curve, "F")?)
        }
        Protocol::Pulse {
            amplitude,
            frequency,
            duration,
            samples,
        } => {
            let pulse = PulseSpec {
                amplitude: *amplitude,
                frequency: frequency.unwrap_or_else(|| resonant_frequency(spec.spin, spec.zfs_d)),
                duration: *duration,
            };
            let samples = samples.unwrap_or(1000).max(1);
            let grid: Vec<f64> = (0..=samples).map(|k| duration * k as f64 / samples as f64).collect();
            let c = simulate_pulse(spec.spin, spec.zfs_d, &pulse, &grid)?;
            let mut cols = vec!["t".to_string()];
            cols.extend(c.twice_m.iter().map(|k| format!("P_{{{k}/2}}")));
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut table = Table::new("populations", &refs);
            for (t, p) in c.times.iter().zip(&c.populations) {
                let mut row: Vec<Cell> = vec![(*t).into()];
                row.extend(p.iter().map(|x| Cell::from(*x)));
                table.push(row);
            }
            ("pulse", vec![table])
        }
        Protocol::Spectrum { count } => {
            let levels = spectrum_capped(spec, *count, settings.max_dim)?;
            let mut table = Table::new("spectrum", &["level", "energy"]);
            for (k, e) in levels.iter().enumerate() {
                table.push(vec![k.into(), (*e).into()]);
            }
            ("spectrum", vec![table])
        }
    };
    Ok(ExperimentResult {
        experiment_id: format!("simulate-{kind}"),
        inputs: json!({"chain": spec, "protocol": cfg.protocol}),
        outputs,
        provenance: settings.provenance(started, &[]),
    })
}
