use nanofiber_cavity::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("solver failure: {0}")]
    Solver(CoreError),

    #[error("integrator failure: {0}")]
    Integrator(CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Integrator-stage wrapper: parameter errors stay configuration errors.
    pub fn integrator(e: CoreError) -> Self {
        match CliError::from(e) {
            CliError::Solver(e) => CliError::Integrator(e),
            other => other,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Integrator(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { field, reason } => CliError::Config {
                field: field.to_string(),
                reason,
            },
            CoreError::OutsideCavity { .. } => CliError::config("atom.z_nm", e.to_string()),
            CoreError::StepTooLarge { .. }
            | CoreError::WindowOutOfRange { .. }
            | CoreError::NonPositivePopulation { .. } => CliError::Integrator(e),
            other => CliError::Solver(other),
        }
    }
}
