use std::fmt;

use ssn_core::community::CommunityError;
use ssn_core::{
    AnnotationError, MatrixIoError, OntologyError, PipelineError, SemsimError, SsnError,
};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_COMPUTE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<OntologyError> for CliError {
    fn from(e: OntologyError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<AnnotationError> for CliError {
    fn from(e: AnnotationError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<MatrixIoError> for CliError {
    fn from(e: MatrixIoError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<SemsimError> for CliError {
    fn from(e: SemsimError) -> Self {
        CliError::compute(e.to_string())
    }
}

impl From<SsnError> for CliError {
    fn from(e: SsnError) -> Self {
        match e {
            SsnError::InvalidNetwork(_) | SsnError::InvalidConfig(_) | SsnError::Io(_) => {
                CliError::input(e.to_string())
            }
            _ => CliError::compute(e.to_string()),
        }
    }
}

impl From<CommunityError> for CliError {
    fn from(e: CommunityError) -> Self {
        match e {
            CommunityError::IdMismatch(_) | CommunityError::LabelMismatch(_) => {
                CliError::input(e.to_string())
            }
            _ => CliError::compute(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ontology(e) => e.into(),
            PipelineError::Annotations(e) => e.into(),
            PipelineError::Semsim(e) => e.into(),
            PipelineError::Ssn(e) => e.into(),
            PipelineError::Community(e) => e.into(),
            PipelineError::EmptyNamespace(_) => CliError::input(e.to_string()),
            PipelineError::EmptyPruned => CliError::compute(e.to_string()),
        }
    }
}
