use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("Sobolev index must be non-negative, got {0}")]
    NegativeSobolevIndex(f64),

    #[error("point {re}+{im}i lies outside the closed unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("coefficient vector is empty or contains non-finite entries")]
    NonFinite,

    #[error("constraint a*conj(c) + |c|^2/(1-|p|^2) = 2 violated (residual {residual:e})")]
    ConstraintViolation { residual: f64 },

    #[error("pole parameter must satisfy 0 < |p| < 1, got |p| = {0}")]
    PoleOutOfDisk(f64),

    #[error("datum is non-resonant (|2a + c| = {0:e}); the operation needs 2a + c = 0")]
    NotResonant(f64),

    #[error("time {t} outside the admissible interval [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("Hermitian eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("resolvent solve ill-conditioned (condition estimate {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("blow-up suspected at t = {t}: {reason}")]
    BlowupSuspected { t: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
