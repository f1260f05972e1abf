use cslab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("blow-up abort: {0}")]
    Blowup(LabError),
    #[error("{0}")]
    Numerics(LabError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Numerics(_) => 1,
            CliError::Blowup(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::BlowupSuspected { .. } | LabError::IllConditioned { .. } => CliError::Blowup(e),
            LabError::NotResonant(_)
            | LabError::ConstraintViolation { .. }
            | LabError::PoleOutOfDisk(_)
            | LabError::NegativeSobolevIndex(_) => CliError::Config(e.to_string()),
            e => CliError::Numerics(e),
        }
    }
}
