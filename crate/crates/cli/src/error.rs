use std::path::PathBuf;

use homfit_core::analysis::AnalysisError;
use homfit_core::estimation::EstimationError;
use homfit_core::model::ModelError;
use homfit_photonics::PhotonicsError;
use thiserror::Error;

/// Exit status for bad input: unreadable files, malformed data, invalid
/// parameters. Matches the usage-error status of the argument parser.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Input(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::Model(m) => m.into(),
            EstimationError::NonConvergence(_) => CliError::Convergence(e.to_string()),
            EstimationError::Numerical(_) => CliError::Numerical(e.to_string()),
            EstimationError::UndefinedObjective | EstimationError::NoPeak { .. } | EstimationError::InvalidSpec(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Estimation(e) => e.into(),
            AnalysisError::Infeasible(_) => CliError::Numerical(e.to_string()),
            AnalysisError::Invalid(_) | AnalysisError::NotPeaked => CliError::Input(e.to_string()),
        }
    }
}

impl From<PhotonicsError> for CliError {
    fn from(e: PhotonicsError) -> Self {
        match e {
            PhotonicsError::NoConvergence(_) => CliError::Convergence(e.to_string()),
            PhotonicsError::Cutoff { .. } | PhotonicsError::NotGuided { .. } | PhotonicsError::ZeroPower => {
                CliError::Numerical(e.to_string())
            }
            PhotonicsError::Invalid(_) | PhotonicsError::Extrapolation { .. } | PhotonicsError::Parse { .. } => {
                CliError::Input(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_by_class() {
        let input: CliError = ModelError::DegenerateKernel.into();
        let numerical: CliError = EstimationError::Numerical("x".into()).into();
        let conv: CliError = PhotonicsError::NoConvergence("x".into()).into();
        assert_eq!(input.exit_code(), EXIT_INPUT);
        assert_eq!(numerical.exit_code(), EXIT_NUMERICAL);
        assert_eq!(conv.exit_code(), EXIT_CONVERGENCE);
    }
}
