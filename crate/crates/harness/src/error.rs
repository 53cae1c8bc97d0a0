use thiserror::Error;

/// Failures of a harness run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] magchain::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }

    /// 2 for configuration errors, 3 for capacity, 4 for numerical
    /// non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use magchain::Error as E;
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(e) => match e {
                E::Capacity { .. } => 3,
                E::NonConvergence { .. } | E::StepUnderflow { .. } => 4,
                E::NonPositiveSpin { .. }
                | E::IntegerSpin { .. }
                | E::InvalidSpec { .. }
                | E::InvalidArgument(_)
                | E::SingularParameter(_)
                | E::InvalidMagneticNumber { .. }
                | E::SiteOutOfRange { .. } => 2,
                _ => 1,
            },
            HarnessError::Io { .. } => 1,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
