use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has {n} vertices; brute-force check supports at most {max}")]
    TooLarge { n: usize, max: usize },

    #[error("symmetric eigen-solver failed: {0}")]
    EigenSolver(String),

    #[error("non-integer eigenvalue {value} (off by {distance:.3e})")]
    NonIntegerEigenvalue { value: f64, distance: f64 },

    #[error("eigenvalue 0 is not simple ({count} eigenvalues round to 0)")]
    ZeroNotSimple { count: usize },

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("overlap {0:e} is outside (0, 1)")]
    OverlapOutOfRange(f64),

    #[error("overlap {0:e} below floor 1e-12")]
    OverlapFloor(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ancilla is entangled (|1> mass {mass:.3e})")]
    EntangledAncilla { mass: f64 },

    #[error("ancilla gate applied to a state without an ancilla")]
    NoAncilla,

    #[error("schedule contains oracle phases but no marked vertex is bound")]
    MissingOracle,

    #[error("graph is not known to be vertex-transitive")]
    NotVertexTransitive,

    #[error("graph has {n} vertices; verification cap is {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
