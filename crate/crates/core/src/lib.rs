//! Semantic similarity networks over Gene Ontology annotations.
//!
//! The crate goes from an OBO ontology and GAF annotations to gene product
//! similarity matrices ([`semsim`]), builds weighted networks from them and
//! prunes those with a spectrally guided local threshold ([`ssn`]), then
//! compares the communities found on raw and pruned networks ([`community`]).

pub mod annotations;
pub mod community;
pub mod format;
pub mod linalg;
pub mod ontology;
pub mod pipeline;
pub mod semsim;
pub mod ssn;

pub use annotations::{
    compute_ic, parse_gaf, parse_gaf_with, AnnotationCorpus, AnnotationError, GafDiagnostics,
    GafOptions, GeneProductId, ICTable,
};
pub use community::{
    coherence, detect_communities, modularity, CoherenceReport, CommunityDetector,
    CommunityError, GreedyModularity, Partition,
};
pub use ontology::{
    parse_obo, parse_obo_with, Namespace, OntologyError, OntologyGraph, ParseOptions, TermId,
    TermIdx,
};
pub use pipeline::{analyze, compare, Comparison, Dataset, PipelineError, DEFAULT_SEED};
pub use semsim::{
    MatrixBuild, MatrixIoError, MeasureId, MixerId, Semsim, SemsimError, SemsimOptions,
    SimilarityMatrix,
};
pub use ssn::{
    build_ssn, detect_nearly_disconnected, laplacian_spectrum, prune, LaplacianKind,
    NetworkKind, PruneResult, SpectralReport, Spectrum, SsnError, ThresholdConfig,
    WeightedNetwork,
};
