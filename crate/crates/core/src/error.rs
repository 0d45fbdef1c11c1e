use thiserror::Error;

use crate::split::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix `{name}` contains a non-finite entry")]
    NonFinite { name: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix `{name}` is not symmetric positive definite")]
    NotSpd { name: &'static str },

    #[error("no stabilizing initial feedback could be found")]
    NotStabilizable,

    #[error("feedback does not stabilize the closed loop")]
    NotStabilizing,

    #[error("Riccati iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("subproblem {index} is not controllable and the current feedback is not stabilizing")]
    SubproblemNotControllable { index: usize },

    #[error("every subsystem was skipped in sweep {sweep}")]
    AllSubsystemsUncontrollable { sweep: usize },

    #[error("invalid sweep order: {0}")]
    InvalidOrder(String),

    #[error("no convergence within {} sweeps", .report.sweeps_executed)]
    MaxSweepsExceeded { report: Box<SolveReport> },

    #[error("subproblem {subsystem} failed in sweep {sweep}: {source}")]
    SubproblemFailure {
        sweep: usize,
        subsystem: usize,
        #[source]
        source: Box<Error>,
        report: Box<SolveReport>,
    },

    #[error("operation requires the {expected:?} time domain")]
    DomainMismatch { expected: crate::TimeDomain },

    #[error("value matrix is not optimal (Riccati residual {residual:e})")]
    NotOptimal { residual: f64 },

    #[error("matrix `{name}` is not block diagonal")]
    NotBlockDiagonal { name: &'static str },

    #[error("insufficient data: {pairs} qualifying error pairs, need at least 3")]
    InsufficientData { pairs: usize },

    #[error("problem generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
