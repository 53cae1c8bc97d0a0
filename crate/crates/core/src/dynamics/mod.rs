//! Time evolution: unitary propagation, transfer and storage fidelities,
//! dephasing, spectra.

mod fidelity;
mod lindblad;
mod propagate;
mod spectrum;

pub use fidelity::{
    first_peak, first_peak_with, run_transfer, transfer_fidelity_curve, uniform_grid, CurveSnapshot, FidelityCurve,
    Model, PeakOptions, PeakRecord, TransferOptions, TransferRun,
};
pub use lindblad::{
    dephased_transfer_curve, lindblad_evolve, lindblad_evolve_with, storage_fidelity_curve,
    storage_fidelity_curve_with, DensityMatrix, DephasedCurve, JumpKind, LindbladDiagnostics, LindbladOptions,
    LindbladSpec, LindbladTrajectory, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
pub use propagate::{evolve, krylov_evolve, Propagator, DENSE_PROPAGATION_DIM, KRYLOV_MAX_SUBSPACE};
pub use spectrum::{memory_tunneling_splitting, spectrum, spectrum_capped};
