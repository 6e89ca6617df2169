use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    Index { index: usize, n_qubits: usize },

    #[error("size error: {0}")]
    Size(String),

    /// The circuit cannot be lowered onto the register/device.
    #[error("compile error: {0}")]
    Compile(String),

    /// A pulse or state violates a precondition of the simulator.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Invalid input data (labels, kernel entries, shapes).
    #[error("data error: {0}")]
    Data(String),

    /// Rejection sampling could not fill the requested quotas.
    #[error("dataset generation failed: {0}")]
    Generation(String),

    #[error("training failed: {0}")]
    Training(String),
}

impl Error {
    /// `true` for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Generation(_) | Error::Training(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
