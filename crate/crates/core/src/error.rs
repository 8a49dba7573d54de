use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("map is singular (min singular value {min_sv:.3e}, max {max_sv:.3e})")]
    SingularMap { min_sv: f64, max_sv: f64 },

    #[error("generator is singular at t = {t}: {reason}")]
    SingularGenerator { t: f64, reason: String },

    #[error("time {t} outside the family domain [{t_min}, {t_max}]")]
    OutOfDomain { t: f64, t_min: f64, t_max: f64 },

    #[error("finite-difference step {h} too large at t = {t} for the family domain")]
    StepTooLarge { t: f64, h: f64 },

    #[error("generator is not of GKSL form (relative reconstruction residual {residual:.3e})")]
    ResidualTooLarge { residual: f64 },

    #[error("matrix 1-norm {norm:.3e} exceeds the exponential overflow guard")]
    Overflow { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("probe set is not informationally complete (stack min singular value {min_sv:.3e})")]
    SingularProbeStack { min_sv: f64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
