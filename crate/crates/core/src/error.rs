use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("state norm {norm} differs from 1")]
    NotNormalized { norm: f64 },

    #[error("matrix is not a projector: {0}")]
    NotProjector(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("partition is not a complete orthogonal decomposition: {0}")]
    PartitionInvalid(String),

    #[error("pre/post-selection pair gives zero weight (value {weight:e})")]
    DegenerateSelection { weight: f64 },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),

    #[error("classification counterexample: {0}")]
    CounterexampleFound(String),

    #[error("generators {first:?} and {second:?} do not commute (norm {norm:e})")]
    NonCommutingGenerators {
        first: String,
        second: String,
        norm: f64,
    },

    #[error("{count} generators exceed the atom cap of {cap}")]
    TooManyGenerators { count: usize, cap: usize },

    #[error("closure exceeded cap {cap} with {size} elements so far")]
    ClosureCapExceeded { cap: usize, size: usize },

    #[error("assignment has imaginary part {imag:e}")]
    NonRealAssignment { imag: f64 },

    #[error("scenario is not logical: {0}")]
    NotLogical(String),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("operator space is not commutative (norm {norm:e})")]
    NotCommutative { norm: f64 },

    #[error("operator space does not contain the identity")]
    MissingIdentity,

    #[error("no generic combination found after {attempts} draws")]
    GenericityFailure { attempts: usize },

    #[error("center projector does not factor as P_A ⊗ I_B (residual {residual:e})")]
    FactorizationFailure { residual: f64 },

    #[error("decoration does not cover wire {wire}")]
    IncompleteDecoration { wire: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed at {location}: {invariant}")]
    Validation { location: String, invariant: String },
}

impl Error {
    /// True for errors that signal a numerical tolerance breakdown rather
    /// than bad input.
    pub fn is_tolerance_failure(&self) -> bool {
        matches!(
            self,
            Error::CounterexampleFound(_)
                | Error::NonRealAssignment { .. }
                | Error::GenericityFailure { .. }
                | Error::FactorizationFailure { .. }
        )
    }
}
