use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin must be positive, got 2S = {twice_spin}")]
    NonPositiveSpin { twice_spin: u32 },

    #[error("integer spin S = {} is not supported; the chain requires half-integer spins", *twice_spin as f64 / 2.0)]
    IntegerSpin { twice_spin: u32 },

    #[error("invalid chain specification: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("magnetic quantum number m = {m} is not valid for spin S = {spin}")]
    InvalidMagneticNumber { m: f64, spin: f64 },

    #[error("label has {found} sites, expected {expected}")]
    LabelLength { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: |norm - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Hilbert space dimension {required} exceeds the configured maximum {max}")]
    Capacity { required: u128, max: usize },

    #[error("singular parameter: {0}")]
    SingularParameter(&'static str),

    #[error("band assignment is ambiguous: weight of state {rank} in the band is {weight:.4}, next outside is {next:.4}")]
    BandAmbiguity { rank: usize, weight: f64, next: f64 },

    #[error("propagator did not converge at t = {t_reached}: residual estimate {residual:e}")]
    NonConvergence { t_reached: f64, residual: f64 },

    #[error("integrator step underflow at t = {t}: step {step:e}")]
    StepUnderflow { t: f64, step: f64 },

    #[error("curve has no qualifying peak")]
    NoPeak,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
