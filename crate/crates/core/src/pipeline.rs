//! End-to-end runs: annotations in, similarity matrix, networks and
//! communities out.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{
    compute_ic, parse_gaf_with, AnnotationCorpus, AnnotationError, GafDiagnostics, GafOptions,
    ICTable,
};
use crate::community::{coherence, detect_communities, CoherenceReport, CommunityError, Partition};
use crate::format::format_g;
use crate::ontology::{parse_obo, Namespace, OntologyError, OntologyGraph};
use crate::semsim::{MatrixBuild, MeasureId, MixerId, Semsim, SemsimError, SimilarityMatrix};
use crate::ssn::{build_ssn, prune, NetworkKind, PruneResult, SsnError, ThresholdConfig, WeightedNetwork};

/// Seed used for community detection when none is given.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Annotations(#[from] AnnotationError),
    #[error(transparent)]
    Semsim(#[from] SemsimError),
    #[error(transparent)]
    Ssn(#[from] SsnError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error("no annotations in namespace {0}")]
    EmptyNamespace(Namespace),
    #[error("pruning removed every edge")]
    EmptyPruned,
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// A parsed ontology plus annotations, ready for one or more analyses.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: OntologyGraph,
    pub corpora: Vec<(AnnotationCorpus, ICTable)>,
    pub diagnostics: GafDiagnostics,
}

impl Dataset {
    pub fn load<R1: BufRead, R2: BufRead>(obo: R1, gaf: R2, organism: Option<&str>) -> Result<Self> {
        let graph = parse_obo(obo)?;
        let options = GafOptions {
            organism: organism.map(str::to_string),
            ..Default::default()
        };
        let parsed = parse_gaf_with(gaf, &graph, &options)?;
        let mut corpora = Vec::new();
        for (_, corpus) in parsed.corpora {
            if corpus.is_empty() {
                continue;
            }
            let corpus = corpus.propagate(&graph)?;
            let ic = compute_ic(&corpus)?;
            corpora.push((corpus, ic));
        }
        Ok(Dataset {
            graph,
            corpora,
            diagnostics: parsed.diagnostics,
        })
    }

    pub fn namespaces(&self) -> Vec<Namespace> {
        self.corpora.iter().map(|(c, _)| c.namespace()).collect()
    }

    pub fn semsim(&self, namespace: Namespace) -> Result<Semsim<'_>> {
        let (corpus, ic) = self
            .corpora
            .iter()
            .find(|(c, _)| c.namespace() == namespace)
            .ok_or(PipelineError::EmptyNamespace(namespace))?;
        Ok(Semsim::new(&self.graph, corpus, ic)?)
    }

    /// Matrix over every annotated product of the namespace.
    pub fn matrix(&self, namespace: Namespace, measure: MeasureId, mixer: MixerId) -> Result<MatrixBuild> {
        let s = self.semsim(namespace)?;
        Ok(s.build_matrix(&s.all_products(), measure, mixer)?)
    }
}

/// Communities of one network and how coherent they are.
#[derive(Debug, Clone)]
pub struct CommunityRun {
    pub partition: Partition,
    pub coherence: CoherenceReport,
}

#[derive(Serialize)]
struct CommunityRunJson<'a> {
    partition: serde_json::Value,
    coherence: &'a CoherenceReport,
}

impl CommunityRun {
    /// `{"partition": {...}, "coherence": {...}}`.
    pub fn to_json(&self) -> String {
        let partition: serde_json::Value =
            serde_json::from_str(&self.partition.to_json()).expect("partition json");
        serde_json::to_string(&CommunityRunJson {
            partition,
            coherence: &self.coherence,
        })
        .expect("community run serializes")
    }

    /// Per-community summary rows.
    pub fn to_csv(&self) -> String {
        self.coherence.to_csv()
    }
}

pub fn communities(g: &WeightedNetwork, m: &SimilarityMatrix, seed: u64) -> Result<CommunityRun> {
    let partition = detect_communities(g, seed)?;
    let coherence = coherence(&partition, m)?;
    Ok(CommunityRun {
        partition,
        coherence,
    })
}

/// Everything derived from one similarity matrix.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub raw: WeightedNetwork,
    pub prune: PruneResult,
    pub raw_communities: CommunityRun,
    /// Absent when pruning left no edges.
    pub pruned_communities: Option<CommunityRun>,
}

pub fn analyze(m: &SimilarityMatrix, cfg: &ThresholdConfig, seed: u64) -> Result<Analysis> {
    let raw = build_ssn(m);
    let prune = prune(&raw, cfg)?;
    let raw_communities = communities(&raw, m, seed)?;
    let pruned_communities = if prune.pruned.is_empty() {
        None
    } else {
        Some(communities(&prune.pruned, m, seed)?)
    };
    Ok(Analysis {
        raw,
        prune,
        raw_communities,
        pruned_communities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub network: NetworkKind,
    pub modularity: f64,
    pub coherence: f64,
    pub communities: usize,
    pub nodes: usize,
    pub edges: usize,
}

/// Raw and pruned networks side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: [ComparisonRow; 2],
    pub converged: bool,
    pub final_alpha: f64,
}

impl Comparison {
    pub fn raw(&self) -> &ComparisonRow {
        &self.rows[0]
    }

    pub fn pruned(&self) -> &ComparisonRow {
        &self.rows[1]
    }

    pub fn pruned_dominates(&self) -> bool {
        self.pruned().modularity > self.raw().modularity
            && self.pruned().coherence > self.raw().coherence
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("comparison serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("network,modularity,coherence,communities,nodes,edges\n");
        for r in &self.rows {
            let kind = match r.network {
                NetworkKind::Raw => "raw",
                NetworkKind::Pruned => "pruned",
            };
            out.push_str(&format!(
                "{kind},{},{},{},{},{}\n",
                format_g(r.modularity, 10),
                format_g(r.coherence, 10),
                r.communities,
                r.nodes,
                r.edges
            ));
        }
        out
    }
}

fn row(network: NetworkKind, g: &WeightedNetwork, run: &CommunityRun) -> ComparisonRow {
    ComparisonRow {
        network,
        modularity: run.partition.modularity(),
        coherence: run.coherence.overall_weighted_mean,
        communities: run.partition.community_count(),
        nodes: g.node_count(),
        edges: g.edge_count(),
    }
}

impl Analysis {
    pub fn comparison(&self) -> Result<Comparison> {
        let pruned = self
            .pruned_communities
            .as_ref()
            .ok_or(PipelineError::EmptyPruned)?;
        Ok(Comparison {
            rows: [
                row(NetworkKind::Raw, &self.raw, &self.raw_communities),
                row(NetworkKind::Pruned, &self.prune.pruned, pruned),
            ],
            converged: self.prune.converged,
            final_alpha: self.prune.final_alpha,
        })
    }
}

pub fn compare(m: &SimilarityMatrix, cfg: &ThresholdConfig, seed: u64) -> Result<Comparison> {
    analyze(m, cfg, seed)?.comparison()
}
