use classify_core::ClassifyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}: {text:?}")]
    Parse { line: usize, text: String },
    #[error("no observations")]
    NoObservations,
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("analysis does not provide this plot")]
    PlotUnavailable,
    #[error(transparent)]
    Model(#[from] ClassifyError),
}

impl CliError {
    /// Process exit code: 2 for input and usage problems, 3 when exact
    /// enumeration is infeasible, 4 for internal invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(
                ClassifyError::EnumerationInfeasible { .. } | ClassifyError::MdpInfeasible { .. },
            ) => 3,
            CliError::Model(ClassifyError::InvariantViolation(_)) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
