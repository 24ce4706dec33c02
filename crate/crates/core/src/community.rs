//! Community detection and the intrinsic coherence of the communities found.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::format_g;
use crate::semsim::SimilarityMatrix;
use crate::ssn::WeightedNetwork;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("graph is empty")]
    EmptyGraph,
    #[error("partition does not label the network's nodes: {0}")]
    LabelMismatch(String),
    #[error("partition node {0} is not in the similarity matrix")]
    IdMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

pub type Result<T, E = CommunityError> = std::result::Result<T, E>;

/// Assignment of every node to a community; labels are dense from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    nodes: Vec<String>,
    labels: Vec<usize>,
    modularity: f64,
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    assignment: BTreeMap<String, usize>,
    communities: usize,
    modularity: f64,
}

impl Partition {
    /// Partition from raw labels; they are renumbered densely by first appearance.
    pub fn new(nodes: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        if nodes.len() != labels.len() {
            return Err(CommunityError::InvalidPartition(format!(
                "{} nodes but {} labels",
                nodes.len(),
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = nodes.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(CommunityError::InvalidPartition(format!("duplicate node {dup}")));
        }
        Ok(Partition {
            labels: densify(&labels),
            nodes,
            modularity: 0.0,
        })
    }

    pub fn with_modularity(mut self, g: &WeightedNetwork) -> Result<Self> {
        self.modularity = modularity(g, &self)?;
        Ok(self)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn label_of(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node).map(|i| self.labels[i])
    }

    /// Member positions per label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (i, l) in self.labels.iter().enumerate() {
            out[*l].push(i);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PartitionJson {
            assignment: self
                .nodes
                .iter()
                .cloned()
                .zip(self.labels.iter().copied())
                .collect(),
            communities: self.community_count(),
            modularity: self.modularity,
        })
        .expect("partition serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PartitionJson = serde_json::from_str(text)
            .map_err(|e| CommunityError::InvalidPartition(e.to_string()))?;
        let (nodes, labels) = doc.assignment.into_iter().unzip();
        let mut p = Partition::new(nodes, labels)?;
        p.modularity = doc.modularity;
        Ok(p)
    }
}

fn densify(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Weighted Newman-Girvan modularity.
pub fn modularity(g: &WeightedNetwork, p: &Partition) -> Result<f64> {
    let labels = labels_for(g, p)?;
    let adj = g.adjacency();
    let strength: Vec<f64> = adj
        .iter()
        .map(|nbrs| nbrs.iter().map(|(_, w)| w).sum())
        .collect();
    let two_m: f64 = strength.iter().sum();
    if two_m == 0.0 {
        return Ok(0.0);
    }
    let ncomm = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); ncomm];
    for (v, l) in labels.iter().enumerate() {
        members[*l].push(v);
    }
    let mut q = 0.0;
    for (c, nodes) in members.iter().enumerate() {
        let mut inside = 0.0;
        let mut total = 0.0;
        for &v in nodes {
            total += strength[v];
            for &(u, w) in &adj[v] {
                if labels[u] == c {
                    inside += w;
                }
            }
        }
        q += inside / two_m - (total / two_m).powi(2);
    }
    Ok(q)
}

/// Community label per network node position.
fn labels_for(g: &WeightedNetwork, p: &Partition) -> Result<Vec<usize>> {
    if p.nodes.len() != g.node_count() {
        return Err(CommunityError::LabelMismatch(format!(
            "{} labelled nodes for {} network nodes",
            p.nodes.len(),
            g.node_count()
        )));
    }
    let index: HashMap<&str, usize> = p
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    g.nodes()
        .iter()
        .map(|n| {
            index
                .get(n.as_str())
                .map(|i| p.labels[*i])
                .ok_or_else(|| CommunityError::LabelMismatch(format!("node {n} is unlabelled")))
        })
        .collect()
}

/// Pluggable community detection.
pub trait CommunityDetector {
    fn detect(&self, g: &WeightedNetwork, seed: u64) -> Result<Partition>;
}

/// Agglomerative greedy modularity maximisation.
///
/// Starts from singletons and repeatedly merges the adjacent pair with the
/// largest positive gain; equal gains go to the smallest label pair. The seed
/// permutes the initial labels.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyModularity;

#[derive(PartialEq)]
struct Candidate {
    gain: f64,
    pair: (usize, usize),
    versions: (u32, u32),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl CommunityDetector for GreedyModularity {
    fn detect(&self, g: &WeightedNetwork, seed: u64) -> Result<Partition> {
        let n = g.node_count();
        if n == 0 {
            return Err(CommunityError::EmptyGraph);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        // community c starts as the node v with perm[v] == c
        let two_m: f64 = 2.0 * g.edges().iter().map(|e| e.weight).sum::<f64>();
        let mut share = vec![0.0; n];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for e in g.edges() {
            let (ca, cb) = (perm[e.a], perm[e.b]);
            share[ca] += e.weight;
            share[cb] += e.weight;
            *links[ca].entry(cb).or_default() += e.weight;
            *links[cb].entry(ca).or_default() += e.weight;
        }
        let mut alive = vec![true; n];
        let mut version = vec![0u32; n];
        let mut owner: Vec<usize> = (0..n).collect();

        if two_m > 0.0 {
            share.iter_mut().for_each(|s| *s /= two_m);
            let gain = |e: f64, a: f64, b: f64| 2.0 * (e / two_m - a * b);
            let mut heap = BinaryHeap::new();
            for c in 0..n {
                for (&d, &e) in links[c].range(c + 1..) {
                    heap.push(Candidate {
                        gain: gain(e, share[c], share[d]),
                        pair: (c, d),
                        versions: (0, 0),
                    });
                }
            }
            while let Some(best) = heap.pop() {
                let (c, d) = best.pair;
                if !alive[c] || !alive[d] || best.versions != (version[c], version[d]) {
                    continue;
                }
                if best.gain <= 0.0 {
                    break;
                }
                // merge d into c (c < d keeps the smaller label)
                let moved = std::mem::take(&mut links[d]);
                for (x, e) in moved {
                    if x == c {
                        continue;
                    }
                    *links[c].entry(x).or_default() += e;
                    let back = links[x].remove(&d).unwrap_or(0.0);
                    *links[x].entry(c).or_default() += back;
                }
                links[c].remove(&d);
                share[c] += share[d];
                alive[d] = false;
                version[c] += 1;
                owner[d] = c;
                for (&x, &e) in &links[c] {
                    let (lo, hi) = if c < x { (c, x) } else { (x, c) };
                    heap.push(Candidate {
                        gain: gain(e, share[c], share[x]),
                        pair: (lo, hi),
                        versions: (version[lo], version[hi]),
                    });
                }
            }
        }

        let find = |mut c: usize| {
            while owner[c] != c {
                c = owner[c];
            }
            c
        };
        let labels: Vec<usize> = (0..n).map(|v| find(perm[v])).collect();
        Partition::new(g.nodes().to_vec(), labels)?.with_modularity(g)
    }
}

pub fn detect_communities(g: &WeightedNetwork, seed: u64) -> Result<Partition> {
    GreedyModularity.detect(g, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// Mean intra-community similarity, for communities with at least two members.
    pub per_community: BTreeMap<usize, f64>,
    pub sizes: BTreeMap<usize, usize>,
    /// Pair-count weighted mean over all communities.
    pub overall_weighted_mean: f64,
    pub modularity: f64,
    /// Set when no community has a pair (the overall mean is then reported as 0).
    pub degenerate: bool,
}

impl CoherenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coherence serializes")
    }

    /// `community,size,coherence` rows; singletons have an empty coherence.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("community,size,coherence\n");
        for (label, size) in &self.sizes {
            let value = self
                .per_community
                .get(label)
                .map(|v| format_g(*v, 10))
                .unwrap_or_default();
            out.push_str(&format!("{label},{size},{value}\n"));
        }
        out
    }
}

pub fn coherence(p: &Partition, m: &SimilarityMatrix) -> Result<CoherenceReport> {
    let index: HashMap<&str, usize> = m
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut per_community = BTreeMap::new();
    let mut sizes = BTreeMap::new();
    let mut sum_all = 0.0;
    let mut pairs_all = 0usize;
    for (label, members) in p.members().into_iter().enumerate() {
        let mut idx = members
            .iter()
            .map(|v| {
                let name = &p.nodes[*v];
                index
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| CommunityError::IdMismatch(name.clone()))
            })
            .collect::<Result<Vec<usize>>>()?;
        idx.sort_unstable();
        sizes.insert(label, idx.len());
        if idx.len() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                sum += m.get(i, j);
                pairs += 1;
            }
        }
        per_community.insert(label, sum / pairs as f64);
        sum_all += sum;
        pairs_all += pairs;
    }
    let degenerate = pairs_all == 0;
    Ok(CoherenceReport {
        per_community,
        sizes,
        overall_weighted_mean: if degenerate {
            0.0
        } else {
            sum_all / pairs_all as f64
        },
        modularity: p.modularity,
        degenerate,
    })
}
