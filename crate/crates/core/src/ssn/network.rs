use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::format::format_g;
use crate::semsim::SimilarityMatrix;

use super::SsnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Raw,
    Pruned,
}

/// Undirected edge between node positions `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Edge-weighted graph over gene products.
///
/// Edges are kept sorted by `(a, b)`; there are no self-loops or duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    nodes: Vec<String>,
    edges: Vec<WeightedEdge>,
    kind: NetworkKind,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    source: String,
    target: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonNetwork {
    nodes: Vec<String>,
    edges: Vec<JsonEdge>,
    kind: NetworkKind,
}

impl WeightedNetwork {
    /// Build from `(a, b, w)` triples over `nodes`.
    pub fn new(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        kind: NetworkKind,
    ) -> Result<Self, SsnError> {
        let mut seen = std::collections::HashSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(SsnError::InvalidNetwork(format!("duplicate node {n}")));
            }
        }
        let mut out: Vec<WeightedEdge> = Vec::new();
        for (a, b, weight) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(SsnError::InvalidNetwork(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(SsnError::InvalidNetwork(format!("self-loop on {}", nodes[a])));
            }
            let valid = match kind {
                NetworkKind::Raw => weight > 0.0 && weight <= 1.0,
                NetworkKind::Pruned => weight == 0.5 || weight == 1.0,
            };
            if !valid {
                return Err(SsnError::InvalidNetwork(format!(
                    "weight {weight} not allowed on a {kind:?} network"
                )));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            out.push(WeightedEdge { a, b, weight });
        }
        out.sort_by_key(|e| (e.a, e.b));
        if out.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err(SsnError::InvalidNetwork("duplicate edge".into()));
        }
        let net = WeightedNetwork {
            nodes,
            edges: out,
            kind,
        };
        if kind == NetworkKind::Pruned && net.degrees().contains(&0) {
            return Err(SsnError::InvalidNetwork(
                "pruned networks cannot contain isolated nodes".into(),
            ));
        }
        Ok(net)
    }

    pub(crate) fn from_sorted_unchecked(
        nodes: Vec<String>,
        edges: Vec<WeightedEdge>,
        kind: NetworkKind,
    ) -> Self {
        WeightedNetwork { nodes, edges, kind }
    }

    pub fn empty(kind: NetworkKind) -> Self {
        WeightedNetwork {
            nodes: Vec::new(),
            edges: Vec::new(),
            kind,
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    /// Neighbour lists in ascending neighbour order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|(n, _)| *n);
        }
        adj
    }

    /// Node-name pairs, for subset comparisons across networks.
    pub fn edge_names(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|e| {
                let (x, y) = (self.nodes[e.a].as_str(), self.nodes[e.b].as_str());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect()
    }

    /// Connected component label per node, components numbered by first node.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(u, _) in &adj[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    /// `node_a<TAB>node_b<TAB>weight` lines, weights as `%.10g`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.nodes[e.a],
                self.nodes[e.b],
                format_g(e.weight, 10)
            )?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("tsv output is utf-8")
    }

    /// Parse an edge list. Nodes are ordered by first appearance.
    pub fn read_tsv<R: BufRead>(input: R, kind: NetworkKind) -> Result<Self, SsnError> {
        let mut nodes = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut intern = |name: &str, nodes: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                nodes.push(name.to_string());
                nodes.len() - 1
            })
        };
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(SsnError::InvalidNetwork(format!(
                    "line {}: expected 3 tab-separated columns",
                    n + 1
                )));
            }
            let w: f64 = cols[2].trim().parse().map_err(|_| {
                SsnError::InvalidNetwork(format!("line {}: bad weight {:?}", n + 1, cols[2]))
            })?;
            let a = intern(cols[0], &mut nodes);
            let b = intern(cols[1], &mut nodes);
            edges.push((a, b, w));
        }
        WeightedNetwork::new(nodes, edges, kind)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonNetwork {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| JsonEdge {
                    source: self.nodes[e.a].clone(),
                    target: self.nodes[e.b].clone(),
                    weight: e.weight,
                })
                .collect(),
            kind: self.kind,
        };
        serde_json::to_string(&doc).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SsnError> {
        let doc: JsonNetwork =
            serde_json::from_str(text).map_err(|e| SsnError::InvalidNetwork(e.to_string()))?;
        let index: BTreeMap<&str, usize> = doc
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let (Some(&a), Some(&b)) = (index.get(e.source.as_str()), index.get(e.target.as_str()))
            else {
                return Err(SsnError::InvalidNetwork(format!(
                    "edge {} - {} references an unknown node",
                    e.source, e.target
                )));
            };
            edges.push((a, b, e.weight));
        }
        WeightedNetwork::new(doc.nodes.clone(), edges, doc.kind)
    }
}

/// Raw network: one edge per pair with strictly positive similarity.
pub fn build_ssn(m: &SimilarityMatrix) -> WeightedNetwork {
    let n = m.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = m.get(i, j);
            if w > 0.0 {
                edges.push(WeightedEdge { a: i, b: j, weight: w });
            }
        }
    }
    WeightedNetwork::from_sorted_unchecked(m.ids().to_vec(), edges, NetworkKind::Raw)
}
