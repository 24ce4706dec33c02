//! Restricted OBO parsing and ancestor queries over the term DAG.
//!
//! Only `[Term]` stanzas are read. The recognised keys are `id`, `name`,
//! `namespace`, `is_a`, `relationship: part_of` and `is_obsolete`; every
//! other key (and every other stanza type) is skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("line {line}: malformed stanza: {reason}")]
    MalformedStanza { line: usize, reason: String },
    #[error("cycle detected through term {0}")]
    CycleDetected(TermId),
    #[error("term {from} references undeclared term {target}")]
    DanglingReference { from: TermId, target: TermId },
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("terms {0} and {1} belong to different namespaces")]
    NamespaceMismatch(TermId, TermId),
    #[error("invalid term id {0:?}")]
    InvalidTermId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = OntologyError> = std::result::Result<T, E>;

/// Identifier of the form `PREFIX:digits`, e.g. `GO:0008150`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TermId(String);

impl TermId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        match value.split_once(':') {
            Some((prefix, digits))
                if !prefix.is_empty()
                    && !prefix.contains(char::is_whitespace)
                    && !digits.is_empty()
                    && digits.bytes().all(|b| b.is_ascii_digit()) =>
            {
                Ok(TermId(value))
            }
            _ => Err(OntologyError::InvalidTermId(value)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TermId {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self> {
        TermId::new(s)
    }
}

impl TryFrom<String> for TermId {
    type Error = OntologyError;

    fn try_from(value: String) -> Result<Self> {
        TermId::new(value)
    }
}

impl From<TermId> for String {
    fn from(id: TermId) -> String {
        id.0
    }
}

/// One of the three GO sub-ontologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Namespace {
    #[serde(rename = "MF")]
    MolecularFunction,
    #[serde(rename = "BP")]
    BiologicalProcess,
    #[serde(rename = "CC")]
    CellularComponent,
}

impl Namespace {
    pub const ALL: [Namespace; 3] = [
        Namespace::MolecularFunction,
        Namespace::BiologicalProcess,
        Namespace::CellularComponent,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Namespace::MolecularFunction => "MF",
            Namespace::BiologicalProcess => "BP",
            Namespace::CellularComponent => "CC",
        }
    }

    pub fn obo_name(self) -> &'static str {
        match self {
            Namespace::MolecularFunction => "molecular_function",
            Namespace::BiologicalProcess => "biological_process",
            Namespace::CellularComponent => "cellular_component",
        }
    }

    /// GAF column 9 aspect letter.
    pub fn from_aspect(aspect: &str) -> Option<Self> {
        match aspect {
            "F" => Some(Namespace::MolecularFunction),
            "P" => Some(Namespace::BiologicalProcess),
            "C" => Some(Namespace::CellularComponent),
            _ => None,
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Namespace {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "MF" | "mf" | "molecular_function" => Ok(Namespace::MolecularFunction),
            "BP" | "bp" | "biological_process" => Ok(Namespace::BiologicalProcess),
            "CC" | "cc" | "cellular_component" => Ok(Namespace::CellularComponent),
            other => Err(format!("unknown namespace {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    IsA,
    PartOf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub id: TermId,
    pub name: String,
    pub namespace: Namespace,
    pub obsolete: bool,
}

/// Dense index of a term inside one [`OntologyGraph`].
///
/// Indices follow ascending [`TermId`] order, so comparing indices compares ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermIdx(pub u32);

impl TermIdx {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Traverse `part_of` edges in addition to `is_a` when computing closures.
    pub include_part_of: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            include_part_of: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub child: TermIdx,
    pub parent: TermIdx,
    pub relation: Relation,
}

/// Immutable term DAG with precomputed reflexive ancestor closures.
#[derive(Debug, Clone)]
pub struct OntologyGraph {
    terms: Vec<Term>,
    index: HashMap<TermId, TermIdx>,
    edges: Vec<Edge>,
    parents: Vec<Vec<TermIdx>>,
    closure: Vec<Vec<TermIdx>>,
    roots: BTreeMap<Namespace, Vec<TermIdx>>,
    options: ParseOptions,
}

impl PartialEq for OntologyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.edges == other.edges
            && self.options.include_part_of == other.options.include_part_of
    }
}

#[derive(Default)]
struct RawStanza {
    line: usize,
    id: Option<String>,
    name: Option<String>,
    namespace: Option<String>,
    obsolete: bool,
    parents: Vec<(String, Relation, usize)>,
}

/// Strip a trailing `! comment` and `{qualifier}` block from a reference value.
fn reference_token(value: &str) -> &str {
    let value = value.split('!').next().unwrap_or("");
    let value = value.split('{').next().unwrap_or("");
    value.split_whitespace().next().unwrap_or("")
}

fn malformed(line: usize, reason: impl Into<String>) -> OntologyError {
    OntologyError::MalformedStanza {
        line,
        reason: reason.into(),
    }
}

pub fn parse_obo<R: BufRead>(source: R) -> Result<OntologyGraph> {
    parse_obo_with(source, ParseOptions::default())
}

pub fn parse_obo_with<R: BufRead>(source: R, options: ParseOptions) -> Result<OntologyGraph> {
    let mut stanzas = Vec::new();
    let mut current: Option<RawStanza> = None;
    let mut in_term = false;
    let mut line_no = 0;

    for line in source.lines() {
        line_no += 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(malformed(line_no, format!("bad stanza header {line:?}")));
            }
            if let Some(done) = current.take() {
                stanzas.push(done);
            }
            in_term = line == "[Term]";
            if in_term {
                current = Some(RawStanza {
                    line: line_no,
                    ..Default::default()
                });
            }
            continue;
        }
        let Some(stanza) = current.as_mut().filter(|_| in_term) else {
            // header tags and non-Term stanzas
            continue;
        };
        let Some((key, value)) = line.split_once(':') else {
            return Err(malformed(line_no, format!("expected `key: value`, got {line:?}")));
        };
        let value = value.trim();
        match key.trim() {
            "id" => {
                if stanza.id.is_some() {
                    return Err(malformed(line_no, "duplicate id tag"));
                }
                stanza.id = Some(value.to_string());
            }
            "name" => stanza.name = Some(value.to_string()),
            "namespace" => stanza.namespace = Some(value.to_string()),
            "is_obsolete" => stanza.obsolete = value == "true",
            "is_a" => {
                let target = reference_token(value);
                if target.is_empty() {
                    return Err(malformed(line_no, "empty is_a target"));
                }
                stanza
                    .parents
                    .push((target.to_string(), Relation::IsA, line_no));
            }
            "relationship" => {
                let mut parts = value.split_whitespace();
                let (Some(kind), Some(rest)) = (parts.next(), parts.next()) else {
                    return Err(malformed(line_no, "relationship needs a type and a target"));
                };
                if kind == "part_of" {
                    let target = reference_token(rest);
                    stanza
                        .parents
                        .push((target.to_string(), Relation::PartOf, line_no));
                }
            }
            _ => {}
        }
    }
    if let Some(done) = current.take() {
        stanzas.push(done);
    }
    if stanzas.is_empty() {
        return Err(malformed(line_no, "no [Term] stanzas found"));
    }

    let mut terms = Vec::with_capacity(stanzas.len());
    let mut pending = Vec::with_capacity(stanzas.len());
    for stanza in stanzas {
        let id = stanza
            .id
            .ok_or_else(|| malformed(stanza.line, "term stanza without id"))?;
        let id = TermId::new(id).map_err(|e| malformed(stanza.line, e.to_string()))?;
        let namespace = stanza
            .namespace
            .ok_or_else(|| malformed(stanza.line, format!("term {id} has no namespace")))?
            .parse::<Namespace>()
            .map_err(|e| malformed(stanza.line, e))?;
        terms.push(Term {
            id: id.clone(),
            name: stanza.name.unwrap_or_default(),
            namespace,
            obsolete: stanza.obsolete,
        });
        pending.push((id, stanza.line, stanza.parents));
    }
    terms.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in terms.windows(2) {
        if pair[0].id == pair[1].id {
            let line = pending
                .iter()
                .filter(|(id, _, _)| *id == pair[0].id)
                .map(|(_, line, _)| *line)
                .max()
                .unwrap_or(0);
            return Err(malformed(line, format!("duplicate term {}", pair[0].id)));
        }
    }
    let index: HashMap<TermId, TermIdx> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.clone(), TermIdx(i as u32)))
        .collect();

    let mut edges = Vec::new();
    for (child_id, _, parents) in pending {
        let child = index[&child_id];
        for (target, relation, line) in parents {
            let target_id = TermId::new(target).map_err(|e| malformed(line, e.to_string()))?;
            let Some(&parent) = index.get(&target_id) else {
                return Err(OntologyError::DanglingReference {
                    from: child_id,
                    target: target_id,
                });
            };
            // edges crossing namespaces are dropped
            if terms[child.get()].namespace != terms[parent.get()].namespace {
                continue;
            }
            edges.push(Edge {
                child,
                parent,
                relation,
            });
        }
    }
    edges.sort();
    edges.dedup();

    OntologyGraph::from_parts(terms, index, edges, options)
}

impl OntologyGraph {
    fn from_parts(
        terms: Vec<Term>,
        index: HashMap<TermId, TermIdx>,
        edges: Vec<Edge>,
        options: ParseOptions,
    ) -> Result<Self> {
        let n = terms.len();
        let mut all_parents = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        for e in &edges {
            all_parents[e.child.get()].push(e.parent);
            if e.relation == Relation::IsA || options.include_part_of {
                parents[e.child.get()].push(e.parent);
            }
        }
        // Acyclicity is checked over every stored relation, traversed or not.
        let order = topological_order(&all_parents)
            .map_err(|member| OntologyError::CycleDetected(terms[member].id.clone()))?;

        let mut closure: Vec<Vec<TermIdx>> = vec![Vec::new(); n];
        for &t in &order {
            let mut set: BTreeSet<TermIdx> = BTreeSet::new();
            set.insert(TermIdx(t as u32));
            for p in &parents[t] {
                set.extend(closure[p.get()].iter().copied());
            }
            closure[t] = set.into_iter().collect();
        }

        let mut roots: BTreeMap<Namespace, Vec<TermIdx>> = BTreeMap::new();
        for (i, term) in terms.iter().enumerate() {
            if !term.obsolete && parents[i].is_empty() {
                roots.entry(term.namespace).or_default().push(TermIdx(i as u32));
            }
        }

        Ok(OntologyGraph {
            terms,
            index,
            edges,
            parents,
            closure,
            roots,
            options,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn options(&self) -> ParseOptions {
        self.options
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, idx: TermIdx) -> &Term {
        &self.terms[idx.get()]
    }

    pub fn lookup(&self, id: &TermId) -> Option<TermIdx> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &TermId) -> Result<TermIdx> {
        self.lookup(id)
            .ok_or_else(|| OntologyError::UnknownTerm(id.to_string()))
    }

    /// Every parsed edge, including relations not traversed under the current options.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Parents reachable through traversed relations.
    pub fn parents_of(&self, idx: TermIdx) -> &[TermIdx] {
        &self.parents[idx.get()]
    }

    pub fn roots(&self, namespace: Namespace) -> &[TermIdx] {
        self.roots.get(&namespace).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sorted reflexive ancestor closure of `idx`.
    pub fn closure(&self, idx: TermIdx) -> &[TermIdx] {
        &self.closure[idx.get()]
    }

    pub fn is_ancestor(&self, ancestor: TermIdx, of: TermIdx) -> bool {
        self.closure(of).binary_search(&ancestor).is_ok()
    }

    pub fn ancestors(&self, t: &TermId) -> Result<BTreeSet<TermId>> {
        let idx = self.require(t)?;
        Ok(self.ids(self.closure(idx)))
    }

    pub fn common_ancestors(&self, t1: &TermId, t2: &TermId) -> Result<BTreeSet<TermId>> {
        let a = self.require(t1)?;
        let b = self.require(t2)?;
        if self.term(a).namespace != self.term(b).namespace {
            return Err(OntologyError::NamespaceMismatch(t1.clone(), t2.clone()));
        }
        Ok(self.ids(&self.common_ancestor_indices(a, b)))
    }

    /// Sorted intersection of two closures.
    pub fn common_ancestor_indices(&self, a: TermIdx, b: TermIdx) -> Vec<TermIdx> {
        intersect_sorted(self.closure(a), self.closure(b))
    }

    fn ids(&self, indices: &[TermIdx]) -> BTreeSet<TermId> {
        indices.iter().map(|i| self.term(*i).id.clone()).collect()
    }

    /// Canonical OBO rendering; parsing it yields an identical graph.
    pub fn to_obo(&self) -> String {
        let mut out = String::from("format-version: 1.2\n");
        let mut by_child: Vec<Vec<&Edge>> = vec![Vec::new(); self.terms.len()];
        for e in &self.edges {
            by_child[e.child.get()].push(e);
        }
        for (i, term) in self.terms.iter().enumerate() {
            out.push_str("\n[Term]\n");
            out.push_str(&format!("id: {}\n", term.id));
            out.push_str(&format!("name: {}\n", term.name));
            out.push_str(&format!("namespace: {}\n", term.namespace.obo_name()));
            for e in &by_child[i] {
                let parent = &self.terms[e.parent.get()].id;
                match e.relation {
                    Relation::IsA => out.push_str(&format!("is_a: {parent}\n")),
                    Relation::PartOf => {
                        out.push_str(&format!("relationship: part_of {parent}\n"))
                    }
                }
            }
            if term.obsolete {
                out.push_str("is_obsolete: true\n");
            }
        }
        out
    }
}

pub(crate) fn intersect_sorted<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Parents-first order, or the smallest index found on a cycle.
fn topological_order(parents: &[Vec<TermIdx>]) -> std::result::Result<Vec<usize>, usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = parents.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        mark[start] = Mark::Active;
        stack.push((start, 0));
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(p) = parents[node].get(*next) {
                *next += 1;
                let p = p.get();
                match mark[p] {
                    Mark::New => {
                        mark[p] = Mark::Active;
                        stack.push((p, 0));
                    }
                    Mark::Active => {
                        let pos = stack.iter().position(|(v, _)| *v == p).unwrap_or(0);
                        let member = stack[pos..].iter().map(|(v, _)| *v).min().unwrap_or(p);
                        return Err(member);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}
