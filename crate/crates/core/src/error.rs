use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} exceeds the supported maximum {max} (at most {max_qubits} qubits)")]
    DimensionCap { dim: usize, max: usize, max_qubits: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |A - A^dag| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("state vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("measurement vectors are not orthogonal: |<v0|v1>| = {overlap:e}")]
    NotOrthogonal { overlap: f64 },

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("negative duration tau = {0}")]
    NegativeDuration(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("basis invariant violated: {0}")]
    InvalidBasis(String),

    #[error("row {row} of the transition matrix sums to {sum} (deviation {deviation:e})")]
    RowSum { row: usize, sum: f64, deviation: f64 },

    #[error("transition entry ({row},{col}) = {value:e} lies outside [0, 1]")]
    ProbabilityRange { row: usize, col: usize, value: f64 },

    #[error("outcome probabilities sum to {sum} (deviation {deviation:e})")]
    ProbabilitySum { sum: f64, deviation: f64 },

    #[error("the semigroup is not relaxing (kernel dimension {kernel_dimension})")]
    NotRelaxing { kernel_dimension: usize },

    #[error("chain is not irreducible and aperiodic")]
    NotErgodic,

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("stationary distribution cross-check failed: power iteration and linear solve differ by {difference:e}")]
    CrossCheck { difference: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid bit string {0:?}")]
    InvalidBitString(String),
}

impl Error {
    /// True when the error signals a violated numerical invariant rather than
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ImaginaryResidue { .. }
                | Error::NonFinite
                | Error::RowSum { .. }
                | Error::ProbabilityRange { .. }
                | Error::ProbabilitySum { .. }
                | Error::NoConvergence { .. }
                | Error::CrossCheck { .. }
                | Error::EigenSolver(_)
                | Error::Singular(_)
                | Error::InvalidBasis(_)
        )
    }
}
