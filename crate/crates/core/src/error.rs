use thiserror::Error;

pub type Result<T> = std::result::Result<T, GbtError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbtError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid local dimension {0}; qudits need d >= 2")]
    InvalidDimension(usize),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("zero vector has no well-defined phase")]
    ZeroVector,

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("degenerate observable: eigenvalue {value} is shared by Bell states {states:?}; measuring it cannot single out one Bell state")]
    DegenerateObservable { value: f64, states: Vec<usize> },

    #[error("inconsistent spectral form: total Born probability {0:e}")]
    InconsistentSpectrum(f64),

    #[error("no Weyl correction inverts the conditional map of outcome {outcome}")]
    NoCorrection { outcome: usize },

    #[error("invalid Weyl word: {0}")]
    InvalidWord(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
