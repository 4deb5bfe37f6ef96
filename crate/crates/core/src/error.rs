use thiserror::Error;

/// Errors raised by model construction, the Lindblad engine and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArmError {
    #[error("Fock truncation n_max must be at least 1, got {0}")]
    InvalidTruncation(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not Hermitian (max |H - H^dag| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("collapse rate must be non-negative, got {0}")]
    NegativeRate(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dispersive shift undefined at zero detuning")]
    ZeroDetuning,

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("step size underflow at t = {t} ns (dt = {dt:e} ns)")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("state invariant violated at t = {t} ns: {detail}")]
    InvariantViolation { t: f64, detail: String },

    #[error("ambiguous dressed-state label for |{label}>: best overlap {overlap:.3}")]
    AmbiguousLabel { label: String, overlap: f64 },

    #[error("decay is not exponential: log-fit rms residual {residual:e}")]
    NonExponentialDecay { residual: f64 },

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("spectrum slice is malformed: {0}")]
    MalformedSlice(String),

    #[error("at grid point {index} ({context}): {source}")]
    AtGridPoint {
        index: usize,
        context: String,
        #[source]
        source: Box<ArmError>,
    },
}

pub type Result<T> = std::result::Result<T, ArmError>;
