use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{n} qubits exceeds the configured limit of {limit}")]
    QubitLimit { n: usize, limit: usize },

    #[error("dimension mismatch: state has {state} qubits, hamiltonian has {hamiltonian}")]
    DimensionMismatch { state: usize, hamiltonian: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite beta {beta} at step {step}")]
    NonFiniteBeta { step: usize, beta: f64 },

    #[error("mean ratio at n = {n} never reaches {target} within {l_max} layers")]
    ThresholdNotReached { n: usize, target: f64, l_max: usize },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("draw budget exhausted after {draws} draws: found {found} of {requested} distinct graphs")]
    BudgetExhausted {
        draws: usize,
        found: usize,
        requested: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
