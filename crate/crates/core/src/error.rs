use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Dimension or length mismatch, or a size outside the supported range.
    #[error("size error: {0}")]
    Size(String),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    Index { index: usize, n_qubits: usize },

    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Fractional inverse requested on a metric that is numerically singular.
    #[error("ill-conditioned metric: eigenvalue {eigenvalue:e} below floor {floor:e} with beta={beta}")]
    Conditioning {
        eigenvalue: f64,
        floor: f64,
        beta: f64,
    },

    /// Argument outside the mathematical domain (e.g. log of zero fidelity).
    #[error("domain error: {0}")]
    Domain(String),

    /// Zero-norm search direction where a positive quadratic form is required.
    #[error("degenerate direction: {0}")]
    Degenerate(String),

    #[error("search failed: {0}")]
    Search(String),
}
