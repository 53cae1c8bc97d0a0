//! Resonant transverse pulse on a single magnet, `H(t) = D Sz^2 + B cos(wt) Sx`,
//! moving population from `|-S>` to `|-S+1>`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{first_peak_with, PeakOptions};
use crate::hilbert::{spin_operators, SpinQuantum};
use crate::{Error, Result, C64};

/// Samples per period of the fastest of carrier and Rabi oscillation.
const STEPS_PER_PERIOD: f64 = 200.0;

/// Drive `B cos(omega t)` along x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// `mu_B g B`, energy units.
    pub amplitude: f64,
    /// Angular frequency `omega`.
    pub frequency: f64,
    pub duration: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, v: f64| Error::InvalidSpec {
            field,
            reason: format!("must be finite and non-negative, got {v}"),
        };
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(bad("amplitude", self.amplitude));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(bad("duration", self.duration));
        }
        if !self.frequency.is_finite() {
            return Err(bad("frequency", self.frequency));
        }
        Ok(())
    }

    /// Largest RK4 step allowed for this drive.
    pub fn max_step(&self) -> f64 {
        let mut shortest = f64::INFINITY;
        if self.frequency != 0.0 {
            shortest = shortest.min(2.0 * std::f64::consts::PI / self.frequency.abs());
        }
        if self.amplitude > 0.0 {
            shortest = shortest.min(2.0 * std::f64::consts::PI / self.amplitude);
        }
        if shortest.is_finite() {
            shortest / STEPS_PER_PERIOD
        } else {
            (self.duration / 1000.0).max(1e-3)
        }
    }
}

/// `|<m|psi(t)>|^2` for every level, `m` descending from `+S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationCurves {
    pub times: Vec<f64>,
    pub twice_m: Vec<i32>,
    /// `populations[k][a]` at `times[k]` for level `a`.
    pub populations: Vec<Vec<f64>>,
    /// Largest `|norm - 1|` seen at the sample times.
    pub max_norm_error: f64,
}

impl PopulationCurves {
    /// Population series of level `twice_m`.
    pub fn level(&self, twice_m: i32) -> Option<Vec<f64>> {
        let a = self.twice_m.iter().position(|&x| x == twice_m)?;
        Some(self.populations.iter().map(|p| p[a]).collect())
    }

    /// CSV with header `t,P_{m}` per level.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.twice_m.iter().map(|m| format!("P_{{{m}/2}}")));
        w.write_record(&header).map_err(err)?;
        for (t, p) in self.times.iter().zip(&self.populations) {
            let mut row = vec![t.to_string()];
            row.extend(p.iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Integrates the driven single-site problem from `|-S>`.
///
/// RK4 runs in the interaction picture of `D Sz^2`, so only the drive sets
/// the step; the populations are unaffected by the frame change.
pub fn simulate_pulse(spin: SpinQuantum, zfs_d: f64, pulse: &PulseSpec, t_grid: &[f64]) -> Result<PopulationCurves> {
    pulse.validate()?;
    if !zfs_d.is_finite() {
        return Err(Error::InvalidSpec {
            field: "zfs_d",
            reason: format!("must be finite, got {zfs_d}"),
        });
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "time grid must be non-empty, non-negative and strictly increasing".into(),
        ));
    }
    if let Some(&last) = t_grid.last() {
        if last > pulse.duration * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "time grid ends at {last}, after the pulse ({})",
                pulse.duration
            )));
        }
    }
    let d = spin.multiplicity();
    let sx = spin_operators(spin).sx;
    let energy: Vec<f64> = (0..d).map(|a| zfs_d * spin.m(a) * spin.m(a)).collect();
    // nearest-neighbour couplings (a, a+1) of Sx, real
    let coupling: Vec<f64> = (0..d - 1).map(|a| sx[(a, a + 1)].re).collect();
    let gap: Vec<f64> = (0..d - 1).map(|a| energy[a] - energy[a + 1]).collect();

    let deriv = |t: f64, phi: &[C64], out: &mut [C64]| {
        let drive = pulse.amplitude * (pulse.frequency * t).cos();
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for a in 0..d - 1 {
            // <a|V_I|a+1> = drive * Sx[a,a+1] * exp(i (E_a - E_{a+1}) t)
            let v = C64::from_polar(drive * coupling[a], gap[a] * t);
            out[a] += C64::new(0.0, -1.0) * v * phi[a + 1];
            out[a + 1] += C64::new(0.0, -1.0) * v.conj() * phi[a];
        }
    };

    let mut phi = vec![C64::new(0.0, 0.0); d];
    phi[d - 1] = C64::new(1.0, 0.0);
    let max_step = pulse.max_step();
    let mut now = 0.0;
    let mut populations = Vec::with_capacity(t_grid.len());
    let mut max_norm_error = 0.0f64;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![C64::new(0.0, 0.0); d], vec![C64::new(0.0, 0.0); d], vec![C64::new(0.0, 0.0); d], vec![C64::new(0.0, 0.0); d]);
    let mut tmp = vec![C64::new(0.0, 0.0); d];
    for &t in t_grid {
        let span = t - now;
        if span > 0.0 && pulse.amplitude > 0.0 {
            let n = (span / max_step).ceil() as usize;
            let h = span / n as f64;
            if !(h > 0.0) || now + h == now {
                return Err(Error::StepUnderflow { t: now, step: h });
            }
            for s in 0..n {
                let t0 = now + s as f64 * h;
                deriv(t0, &phi, &mut k1);
                for a in 0..d {
                    tmp[a] = phi[a] + k1[a] * (0.5 * h);
                }
                deriv(t0 + 0.5 * h, &tmp, &mut k2);
                for a in 0..d {
                    tmp[a] = phi[a] + k2[a] * (0.5 * h);
                }
                deriv(t0 + 0.5 * h, &tmp, &mut k3);
                for a in 0..d {
                    tmp[a] = phi[a] + k3[a] * h;
                }
                deriv(t0 + h, &tmp, &mut k4);
                for a in 0..d {
                    phi[a] += (k1[a] + (k2[a] + k3[a]) * 2.0 + k4[a]) * (h / 6.0);
                }
            }
        }
        now = t;
        let p: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
        max_norm_error = max_norm_error.max((p.iter().sum::<f64>().sqrt() - 1.0).abs());
        populations.push(p);
    }
    Ok(PopulationCurves {
        times: t_grid.to_vec(),
        twice_m: (0..d).map(|a| spin.twice_m(a)).collect(),
        populations,
        max_norm_error,
    })
}

/// Rotating-frame estimate for the `|-3/2> -> |-1/2>` transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    pub delta_t: f64,
    pub fidelity: f64,
}

/// `dt = 2 pi / (sqrt(3) B) (1 + (B/D)^2 / 12)`, `F = 1 - (B/D)^2 / 3`.
pub fn analytic_transition(amplitude: f64, zfs_d: f64) -> Result<TransitionEstimate> {
    if zfs_d == 0.0 {
        return Err(Error::SingularParameter("zfs_d"));
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pulse amplitude must be positive and finite, got {amplitude}"
        )));
    }
    let r2 = (amplitude / zfs_d).powi(2);
    Ok(TransitionEstimate {
        delta_t: 2.0 * std::f64::consts::PI / (3f64.sqrt() * amplitude) * (1.0 + r2 / 12.0),
        fidelity: 1.0 - r2 / 3.0,
    })
}

/// Frequency of the `|-S> -> |-S+1>` line, `|D| (2S - 1)`.
pub fn resonant_frequency(spin: SpinQuantum, zfs_d: f64) -> f64 {
    zfs_d.abs() * (spin.twice_spin() as f64 - 1.0)
}

/// Simulated transition: first maximum of the `|-S+1>` population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredTransition {
    pub t_peak: f64,
    pub peak_population: f64,
    pub curves: PopulationCurves,
}

/// Drives at `frequency` (resonant when `None`) for 1.5 predicted transition
/// times and locates the first population maximum of `|-S+1>`.
pub fn measure_transition(
    spin: SpinQuantum,
    zfs_d: f64,
    amplitude: f64,
    frequency: Option<f64>,
) -> Result<MeasuredTransition> {
    if zfs_d == 0.0 {
        return Err(Error::SingularParameter("zfs_d"));
    }
    if spin.twice_spin() < 3 {
        return Err(Error::InvalidArgument("a spin-1/2 site has no second level to drive to".into()));
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pulse amplitude must be positive and finite, got {amplitude}"
        )));
    }
    // Rabi half period for matrix element sqrt(2S)/2
    let rabi_half = 2.0 * std::f64::consts::PI / ((spin.twice_spin() as f64).sqrt() * amplitude);
    let duration = 1.5 * rabi_half;
    let pulse = PulseSpec {
        amplitude,
        frequency: frequency.unwrap_or_else(|| resonant_frequency(spin, zfs_d)),
        duration,
    };
    let n = 3000;
    let grid: Vec<f64> = (0..=n).map(|k| duration * k as f64 / n as f64).collect();
    let curves = simulate_pulse(spin, zfs_d, &pulse, &grid)?;
    let target = -(spin.twice_spin() as i32) + 2;
    let series = curves.level(target).expect("level exists for S >= 3/2");
    let peak = first_peak_with(&grid, &series, PeakOptions::default())?;
    Ok(MeasuredTransition {
        t_peak: peak.t_star,
        peak_population: peak.f_max,
        curves,
    })
}
