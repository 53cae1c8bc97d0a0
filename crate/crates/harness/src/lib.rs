//! Reproduction runners for the transfer table, the spectra, the transfer
//! and dephasing curves and the pulse analysis, plus the `simulate` command
//! driven by a JSON config. Every run yields an [`ExperimentResult`] that
//! is written as `data.csv`, `result.json` and `spec.json`.

mod config;
mod error;
mod result;
mod runners;

pub use config::{simulate, Encoding, Protocol, SimulationConfig};
pub use error::{HarnessError, HarnessResult};
pub use result::{Cell, ExperimentResult, Provenance, Table, Tolerances};
pub use runners::{
    fig6_grid, linear_fit, run_fig2, run_fig4, run_fig5, run_fig6, run_pulse, run_table1, sup_distance, Fig4Variant,
    LinearFit, PulseParams, Settings, Table1Params, Table1Row, FIG5_GAMMAS, REFERENCE_TABLE1, TRANSFER_STEP,
};
