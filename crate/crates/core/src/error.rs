use thiserror::Error;

/// Unified error type for the crate.
///
/// Variants map onto the CLI exit codes: I/O failures exit with 3, everything
/// else here is a data or validation problem and exits with 2 (usage problems
/// are caught by the argument parser and exit with 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} = {value} is out of range: {requirement}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("insufficient data: need at least {required} outcomes, have {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("step {index} is out of bounds for an empirical profile with {len} entries")]
    ProfileIndexOutOfBounds { index: usize, len: usize },

    #[error("series do not overlap: [{first_a}, {last_a}] vs [{first_b}, {last_b}]")]
    InsufficientOverlap {
        first_a: usize,
        last_a: usize,
        first_b: usize,
        last_b: usize,
    },

    #[error("expected a Z target and a U or Y estimate, got {target} vs {estimate}")]
    IncompatibleSeriesKinds {
        target: &'static str,
        estimate: &'static str,
    },

    #[error("no samples left to summarize after skips and validity trimming")]
    EmptySummaryWindow,

    #[error("trace line {line}: {reason}")]
    TraceParse { line: usize, reason: String },

    #[error("trace declares count={declared} but contains {actual} outcomes")]
    TraceCountMismatch { declared: usize, actual: usize },

    #[error("unsupported trace version {found:?} (expected \"fdrtrace v1\")")]
    TraceVersion { found: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("table cell {ordinal} (profile {profile}, m={m}) failed: {source}")]
    CellFailed {
        ordinal: usize,
        profile: String,
        m: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI should terminate with for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::CellFailed { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
