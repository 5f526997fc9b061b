use std::io;

use thiserror::Error;

use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Scenario {
        path: String,
        #[source]
        source: ScenarioError,
    },

    #[error(transparent)]
    Model(qmeas_core::Error),

    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 0 success, 1 usage, 2 scenario validation, 3 internal consistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Scenario { .. } => 2,
            CliError::Model(e) => match e {
                qmeas_core::Error::Consistency(_) | qmeas_core::Error::ReproductionMismatch { .. } => 3,
                _ => 2,
            },
            CliError::Consistency(_) => 3,
        }
    }
}

impl From<qmeas_core::Error> for CliError {
    fn from(e: qmeas_core::Error) -> Self {
        CliError::Model(e)
    }
}
