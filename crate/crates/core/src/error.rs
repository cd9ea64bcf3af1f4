use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what}: {requested} qubits exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("relative entropy is infinite: support of the first argument is not contained in the second")]
    InfiniteRelativeEntropy,

    #[error("value {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("estimator {strategy} cannot be used with the {kernel} kernel")]
    IncompatibleEstimator {
        strategy: &'static str,
        kernel: &'static str,
    },

    #[error("Pauli noise parameters ({qx}, {qy}, {qz}) do not define a completely positive channel")]
    NotCompletelyPositive { qx: f64, qy: f64, qz: f64 },

    #[error("linear system is singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("labels must be -1 or +1, found {0}")]
    NonBinaryLabel(f64),

    #[error("degenerate sampler: {0}")]
    DegenerateSampler(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
