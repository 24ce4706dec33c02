//! GAF ingestion, true-path propagation and the information-content table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{Namespace, OntologyGraph, TermId, TermIdx};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("line {line}: malformed annotation line ({columns} columns, need at least 9)")]
    MalformedLine { line: usize, columns: usize },
    #[error("annotation corpus is empty")]
    EmptyCorpus,
    #[error("no information content for term {0}")]
    UnknownIC(TermId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = AnnotationError> = std::result::Result<T, E>;

/// Term frequencies count distinct gene products, never annotation rows.
pub const COUNT_DISTINCT_PRODUCTS: bool = true;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneProductId {
    pub accession: String,
    pub organism: String,
}

impl fmt::Display for GeneProductId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.accession)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GafDiagnostics {
    pub skipped_unknown_term: usize,
    pub skipped_not_qualifier: usize,
    pub malformed: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skipped_evidence: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, Default)]
pub struct GafOptions {
    /// Evidence codes (column 7) to accept; `None` accepts every code.
    pub evidence_allowlist: Option<BTreeSet<String>>,
    /// Organism label used when column 13 is absent or empty.
    pub organism: Option<String>,
}

/// Gene product annotations for a single namespace.
#[derive(Debug, Clone)]
pub struct AnnotationCorpus {
    namespace: Namespace,
    direct: BTreeMap<GeneProductId, Vec<TermIdx>>,
    propagated_counts: BTreeMap<TermIdx, usize>,
    total: usize,
}

#[derive(Debug, Clone)]
pub struct GafParse {
    pub corpora: BTreeMap<Namespace, AnnotationCorpus>,
    pub diagnostics: GafDiagnostics,
}

impl GafParse {
    pub fn corpus(&self, namespace: Namespace) -> &AnnotationCorpus {
        &self.corpora[&namespace]
    }
}

pub fn parse_gaf<R: BufRead>(source: R, g: &OntologyGraph) -> Result<GafParse> {
    parse_gaf_with(source, g, &GafOptions::default())
}

pub fn parse_gaf_with<R: BufRead>(
    source: R,
    g: &OntologyGraph,
    options: &GafOptions,
) -> Result<GafParse> {
    let mut direct: BTreeMap<Namespace, BTreeMap<GeneProductId, BTreeSet<TermIdx>>> =
        Namespace::ALL.iter().map(|ns| (*ns, BTreeMap::new())).collect();
    let mut diagnostics = GafDiagnostics::default();
    let mut usable = 0usize;

    for (n, line) in source.lines().enumerate() {
        let line = line?;
        if line.starts_with('!') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 9 {
            return Err(AnnotationError::MalformedLine {
                line: n + 1,
                columns: cols.len(),
            });
        }
        let accession = cols[1].trim();
        let qualifier = cols[3];
        let term = cols[4].trim();
        let evidence = cols[6].trim();
        let aspect = cols[8].trim();

        if qualifier.split('|').any(|q| q.trim() == "NOT") {
            diagnostics.skipped_not_qualifier += 1;
            continue;
        }
        if let Some(allow) = &options.evidence_allowlist {
            if !allow.contains(evidence) {
                diagnostics.skipped_evidence += 1;
                continue;
            }
        }
        let Some(namespace) = Namespace::from_aspect(aspect) else {
            diagnostics.malformed += 1;
            continue;
        };
        if accession.is_empty() {
            diagnostics.malformed += 1;
            continue;
        }
        let idx = TermId::new(term).ok().and_then(|id| g.lookup(&id));
        let Some(idx) = idx.filter(|i| !g.term(*i).obsolete) else {
            diagnostics.skipped_unknown_term += 1;
            continue;
        };
        if g.term(idx).namespace != namespace {
            diagnostics.malformed += 1;
            continue;
        }
        let organism = cols
            .get(12)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .or_else(|| options.organism.clone())
            .unwrap_or_default();
        let product = GeneProductId {
            accession: accession.to_string(),
            organism,
        };
        direct
            .get_mut(&namespace)
            .expect("all namespaces present")
            .entry(product)
            .or_default()
            .insert(idx);
        usable += 1;
    }
    if usable == 0 {
        return Err(AnnotationError::EmptyCorpus);
    }

    let corpora = direct
        .into_iter()
        .map(|(namespace, products)| {
            let direct = products
                .into_iter()
                .map(|(p, terms)| (p, terms.into_iter().collect()))
                .collect();
            (
                namespace,
                AnnotationCorpus {
                    namespace,
                    direct,
                    propagated_counts: BTreeMap::new(),
                    total: 0,
                },
            )
        })
        .collect();
    Ok(GafParse {
        corpora,
        diagnostics,
    })
}

impl AnnotationCorpus {
    /// Build a corpus directly from product → term lists.
    pub fn from_direct<I, T>(
        namespace: Namespace,
        g: &OntologyGraph,
        products: I,
    ) -> crate::ontology::Result<Self>
    where
        I: IntoIterator<Item = (GeneProductId, T)>,
        T: IntoIterator<Item = TermId>,
    {
        let mut direct: BTreeMap<GeneProductId, BTreeSet<TermIdx>> = BTreeMap::new();
        for (p, terms) in products {
            let entry = direct.entry(p).or_default();
            for t in terms {
                entry.insert(g.require(&t)?);
            }
        }
        Ok(AnnotationCorpus {
            namespace,
            direct: direct
                .into_iter()
                .filter(|(_, t)| !t.is_empty())
                .map(|(p, t)| (p, t.into_iter().collect()))
                .collect(),
            propagated_counts: BTreeMap::new(),
            total: 0,
        })
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_empty()
    }

    pub fn is_propagated(&self) -> bool {
        self.total > 0
    }

    /// Number of gene products with at least one annotation.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn products(&self) -> impl Iterator<Item = &GeneProductId> {
        self.direct.keys()
    }

    pub fn direct(&self) -> &BTreeMap<GeneProductId, Vec<TermIdx>> {
        &self.direct
    }

    pub fn product(&self, accession: &str) -> Option<(&GeneProductId, &[TermIdx])> {
        self.direct
            .iter()
            .find(|(p, _)| p.accession == accession)
            .map(|(p, t)| (p, t.as_slice()))
    }

    pub fn propagated_count(&self, t: TermIdx) -> usize {
        self.propagated_counts.get(&t).copied().unwrap_or(0)
    }

    pub fn propagated_counts(&self) -> &BTreeMap<TermIdx, usize> {
        &self.propagated_counts
    }

    /// Count, for every term, the distinct products whose closure contains it.
    pub fn propagate(mut self, g: &OntologyGraph) -> Result<Self> {
        if self.direct.is_empty() {
            return Err(AnnotationError::EmptyCorpus);
        }
        let mut counts: BTreeMap<TermIdx, usize> = BTreeMap::new();
        for terms in self.direct.values() {
            let mut closed: BTreeSet<TermIdx> = BTreeSet::new();
            for t in terms {
                closed.extend(g.closure(*t).iter().copied());
            }
            for t in closed {
                *counts.entry(t).or_default() += 1;
            }
        }
        self.propagated_counts = counts;
        self.total = self.direct.len();
        Ok(self)
    }
}

/// Information content per term, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct ICTable {
    namespace: Namespace,
    ic: BTreeMap<TermIdx, f64>,
    max_ic: f64,
}

pub fn compute_ic(corpus: &AnnotationCorpus) -> Result<ICTable> {
    if corpus.total == 0 {
        return Err(AnnotationError::EmptyCorpus);
    }
    let total = corpus.total as f64;
    let ic: BTreeMap<TermIdx, f64> = corpus
        .propagated_counts
        .iter()
        .filter(|(_, c)| **c > 0)
        .map(|(t, c)| {
            let p = *c as f64 / total;
            // + 0.0 turns -0.0 at p = 1 into 0.0
            (*t, -p.ln() + 0.0)
        })
        .collect();
    let max_ic = ic.values().copied().fold(0.0, f64::max);
    Ok(ICTable {
        namespace: corpus.namespace,
        ic,
        max_ic,
    })
}

impl ICTable {
    /// Table with explicit values; `max_ic` is derived from them.
    pub fn from_values(namespace: Namespace, values: impl IntoIterator<Item = (TermIdx, f64)>) -> Self {
        let ic: BTreeMap<TermIdx, f64> = values.into_iter().collect();
        let max_ic = ic.values().copied().fold(0.0, f64::max);
        ICTable {
            namespace,
            ic,
            max_ic,
        }
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn get(&self, t: TermIdx) -> Option<f64> {
        self.ic.get(&t).copied()
    }

    pub fn require(&self, t: TermIdx, g: &OntologyGraph) -> Result<f64> {
        self.get(t)
            .ok_or_else(|| AnnotationError::UnknownIC(g.term(t).id.clone()))
    }

    pub fn lookup(&self, id: &TermId, g: &OntologyGraph) -> Result<f64> {
        let idx = g
            .lookup(id)
            .ok_or_else(|| AnnotationError::UnknownIC(id.clone()))?;
        self.require(idx, g)
    }

    pub fn contains(&self, t: TermIdx) -> bool {
        self.ic.contains_key(&t)
    }

    pub fn max_ic(&self) -> f64 {
        self.max_ic
    }

    /// Number of terms carrying an IC value.
    pub fn len(&self) -> usize {
        self.ic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ic.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermIdx, f64)> + '_ {
        self.ic.iter().map(|(t, v)| (*t, *v))
    }
}
