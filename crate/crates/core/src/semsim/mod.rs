//! Term- and gene-level semantic similarity measures.
//!
//! IC-based term measures (Resnik, Lin, Jiang-Conrath, Relevance) score a
//! pair of terms through a shared ancestor: either the most informative
//! common ancestor or, for the GraSM variants, the mean IC over the disjoint
//! common ancestors. Gene products are compared either by mixing the term
//! pair matrix ([`MixerId`]) or directly on their ancestor-closed term sets
//! (Kappa, Cosine, Weighted Jaccard, Czekanowski-Dice).

mod gene;
mod matrix;
mod term;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{AnnotationCorpus, ICTable};
use crate::ontology::{Namespace, OntologyGraph, TermId};

pub use gene::PairScore;
pub use matrix::{MatrixBuild, MatrixIoError, SimilarityMatrix};

#[derive(Debug, Error)]
pub enum SemsimError {
    #[error("no information content for term {0}")]
    UnknownIC(TermId),
    #[error("terms {0} and {1} share no informative ancestor")]
    NoInformativeAncestor(TermId, TermId),
    #[error("terms {0} and {1} belong to different namespaces")]
    NamespaceMismatch(TermId, TermId),
    #[error("gene product {0} has no usable annotations")]
    NoAnnotations(String),
    #[error("need at least 2 products with usable annotations, got {usable}")]
    TooFewProducts { usable: usize },
    #[error("measure {0} is not a {1} measure")]
    WrongMeasureKind(MeasureId, &'static str),
    #[error("ontology, corpus and IC table disagree on namespace")]
    InconsistentInputs,
}

pub type Result<T, E = SemsimError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureId {
    Resnik,
    ResnikGraSM,
    Lin,
    LinGraSM,
    JiangConrath,
    JiangConrathGraSM,
    Relevance,
    Kappa,
    Cosine,
    WeightedJaccard,
    CzekanowskiDice,
}

impl MeasureId {
    pub const ALL: [MeasureId; 11] = [
        MeasureId::Resnik,
        MeasureId::ResnikGraSM,
        MeasureId::Lin,
        MeasureId::LinGraSM,
        MeasureId::JiangConrath,
        MeasureId::JiangConrathGraSM,
        MeasureId::Relevance,
        MeasureId::Kappa,
        MeasureId::Cosine,
        MeasureId::WeightedJaccard,
        MeasureId::CzekanowskiDice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Resnik => "Resnik",
            MeasureId::ResnikGraSM => "ResnikGraSM",
            MeasureId::Lin => "Lin",
            MeasureId::LinGraSM => "LinGraSM",
            MeasureId::JiangConrath => "JiangConrath",
            MeasureId::JiangConrathGraSM => "JiangConrathGraSM",
            MeasureId::Relevance => "Relevance",
            MeasureId::Kappa => "Kappa",
            MeasureId::Cosine => "Cosine",
            MeasureId::WeightedJaccard => "WeightedJaccard",
            MeasureId::CzekanowskiDice => "CzekanowskiDice",
        }
    }

    /// Term-pair measure behind a gene-level pairwise measure.
    pub fn term_measure(self) -> Option<TermMeasure> {
        use AncestorRule::*;
        use IcMeasure::*;
        let (measure, rule) = match self {
            MeasureId::Resnik => (Resnik, Mica),
            MeasureId::ResnikGraSM => (Resnik, Grasm),
            MeasureId::Lin => (Lin, Mica),
            MeasureId::LinGraSM => (Lin, Grasm),
            MeasureId::JiangConrath => (JiangConrath, Mica),
            MeasureId::JiangConrathGraSM => (JiangConrath, Grasm),
            MeasureId::Relevance => (Relevance, Mica),
            _ => return None,
        };
        Some(TermMeasure { measure, rule })
    }

    /// Measure used when none is requested.
    pub const DEFAULT: MeasureId = MeasureId::Lin;

    pub fn is_pairwise(self) -> bool {
        self.term_measure().is_some()
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let wanted = s.trim().replace(['-', '_', ' '], "").to_ascii_lowercase();
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == wanted)
            .ok_or_else(|| format!("unknown measure {s:?}"))
    }
}

/// How a term-pair matrix collapses into one gene-pair score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum MixerId {
    Max,
    Avg,
    #[default]
    BMA,
}

impl MixerId {
    pub const ALL: [MixerId; 3] = [MixerId::Max, MixerId::Avg, MixerId::BMA];

    pub fn name(self) -> &'static str {
        match self {
            MixerId::Max => "Max",
            MixerId::Avg => "Avg",
            MixerId::BMA => "BMA",
        }
    }
}

impl fmt::Display for MixerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MixerId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(MixerId::Max),
            "avg" | "average" | "mean" => Ok(MixerId::Avg),
            "bma" => Ok(MixerId::BMA),
            _ => Err(format!("unknown mixer {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IcMeasure {
    Resnik,
    Lin,
    JiangConrath,
    Relevance,
}

/// Which shared-ancestor IC a term measure uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AncestorRule {
    /// IC of the most informative common ancestor.
    Mica,
    /// Mean IC over the disjoint common ancestors.
    Grasm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermMeasure {
    pub measure: IcMeasure,
    pub rule: AncestorRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemsimOptions {
    /// Cosine over 0/1 indicators instead of IC-weighted components.
    pub cosine_binary: bool,
    /// Czekanowski-Dice over ancestor-closed sets (otherwise direct sets).
    pub dice_on_closure: bool,
}

impl Default for SemsimOptions {
    fn default() -> Self {
        SemsimOptions {
            cosine_binary: false,
            dice_on_closure: true,
        }
    }
}

/// Everything a measure needs for one namespace.
#[derive(Debug, Clone, Copy)]
pub struct Semsim<'a> {
    pub graph: &'a OntologyGraph,
    pub corpus: &'a AnnotationCorpus,
    pub ic: &'a ICTable,
    pub options: SemsimOptions,
}

impl<'a> Semsim<'a> {
    pub fn new(
        graph: &'a OntologyGraph,
        corpus: &'a AnnotationCorpus,
        ic: &'a ICTable,
    ) -> Result<Self> {
        if corpus.namespace() != ic.namespace() {
            return Err(SemsimError::InconsistentInputs);
        }
        Ok(Semsim {
            graph,
            corpus,
            ic,
            options: SemsimOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SemsimOptions) -> Self {
        self.options = options;
        self
    }

    pub fn namespace(&self) -> Namespace {
        self.corpus.namespace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_names_round_trip() {
        for m in MeasureId::ALL {
            assert_eq!(m.name().parse::<MeasureId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert_eq!(
            "jiang-conrath".parse::<MeasureId>().unwrap(),
            MeasureId::JiangConrath
        );
        assert!("Wang".parse::<MeasureId>().is_err());
        assert_eq!(MeasureId::ALL.len(), 11);
        assert_eq!(
            MeasureId::ALL.iter().filter(|m| m.is_pairwise()).count(),
            7
        );
    }

    #[test]
    fn mixer_default_is_bma() {
        assert_eq!(MixerId::default(), MixerId::BMA);
        assert_eq!("avg".parse::<MixerId>().unwrap(), MixerId::Avg);
    }
}
