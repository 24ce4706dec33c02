//! Semantic similarity networks: construction, thresholding and spectra.

mod network;
pub mod spectral;
mod threshold;

use thiserror::Error;

use crate::linalg::SolverError;

pub use network::{build_ssn, NetworkKind, WeightedEdge, WeightedNetwork};
pub use spectral::{
    detect_nearly_disconnected, laplacian_spectrum, laplacian_spectrum_with, LaplacianKind,
    SpectralOptions, Spectrum, ZERO_EIGENVALUE_TOL,
};
pub use threshold::{
    local_threshold, local_thresholds, prune, prune_once, prune_with, PruneResult,
    SpectralReport, ThresholdConfig, REPORT_EIGENVALUES,
};

#[derive(Debug, Error)]
pub enum SsnError {
    #[error("node {node} has degree {degree}; a local threshold needs at least 2")]
    DegreeTooLow { node: String, degree: usize },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("network needs at least 3 nodes, got {0}")]
    TooSmall(usize),
    #[error("invalid threshold configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
