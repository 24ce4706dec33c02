//! Hybrid local/global thresholding.
//!
//! Each node gets a local cutoff `k = mean + alpha * sd` over its incident
//! weights. An edge that clears the cutoff at both endpoints survives with
//! weight 1, at one endpoint with weight 0.5. `alpha` is the global knob:
//! [`prune`] raises it until the pruned graph's Laplacian shows a
//! (nearly) disconnected structure.

use serde::{Deserialize, Serialize};

use super::spectral::{detect_nearly_disconnected, laplacian_spectrum_with, LaplacianKind, SpectralOptions};
use super::{NetworkKind, SsnError, WeightedEdge, WeightedNetwork};

/// Eigenvalues kept per iteration report.
pub const REPORT_EIGENVALUES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub alpha_start: f64,
    pub alpha_step: f64,
    pub alpha_max: f64,
    pub fiedler_tolerance: f64,
    pub laplacian_kind: LaplacianKind,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            alpha_start: 0.0,
            alpha_step: 0.25,
            alpha_max: 3.0,
            fiedler_tolerance: 0.05,
            laplacian_kind: LaplacianKind::SymmetricNormalized,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<(), SsnError> {
        let finite = [
            self.alpha_start,
            self.alpha_step,
            self.alpha_max,
            self.fiedler_tolerance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(SsnError::InvalidConfig("values must be finite".into()));
        }
        if self.alpha_step <= 0.0 {
            return Err(SsnError::InvalidConfig("alpha_step must be > 0".into()));
        }
        if self.fiedler_tolerance <= 0.0 {
            return Err(SsnError::InvalidConfig("fiedler_tolerance must be > 0".into()));
        }
        if self.alpha_start > self.alpha_max {
            return Err(SsnError::InvalidConfig(
                "alpha_start must not exceed alpha_max".into(),
            ));
        }
        Ok(())
    }

    /// The alpha schedule `alpha_start + i * alpha_step` up to `alpha_max`.
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..)
            .map(move |i| self.alpha_start + i as f64 * self.alpha_step)
            .take_while(move |a| *a <= self.alpha_max + 1e-12)
    }
}

/// Spectral verdict for one alpha of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub alpha: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub eigenvalues: Vec<f64>,
    pub zero_count: usize,
    pub fiedler_value: f64,
    pub nearly_disconnected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneResult {
    pub pruned: WeightedNetwork,
    pub iterations: Vec<SpectralReport>,
    pub final_alpha: f64,
    pub converged: bool,
}

#[derive(Serialize)]
struct PruneResultJson<'a> {
    converged: bool,
    final_alpha: f64,
    node_count: usize,
    edge_count: usize,
    iterations: &'a [SpectralReport],
}

impl PruneResult {
    /// JSON summary with the per-iteration spectra (the network itself is
    /// serialized separately).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PruneResultJson {
            converged: self.converged,
            final_alpha: self.final_alpha,
            node_count: self.pruned.node_count(),
            edge_count: self.pruned.edge_count(),
            iterations: &self.iterations,
        })
        .expect("prune result serializes")
    }
}

/// Mean plus `alpha` population standard deviations of the incident weights.
fn threshold_of(weights: &[f64], alpha: f64) -> f64 {
    let n = weights.len() as f64;
    // Offsetting by the minimum makes uniform weights give their exact value.
    let base = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = base + weights.iter().map(|w| w - base).sum::<f64>() / n;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
    mean + alpha * var.sqrt()
}

pub fn local_threshold(g: &WeightedNetwork, node: usize, alpha: f64) -> Result<f64, SsnError> {
    let adj = g.adjacency();
    let weights: Vec<f64> = adj
        .get(node)
        .ok_or_else(|| SsnError::UnknownNode(node.to_string()))?
        .iter()
        .map(|(_, w)| *w)
        .collect();
    if weights.len() < 2 {
        return Err(SsnError::DegreeTooLow {
            node: g.nodes()[node].clone(),
            degree: weights.len(),
        });
    }
    Ok(threshold_of(&weights, alpha))
}

/// Per-node thresholds; `None` for nodes of degree < 2, which never vote.
pub fn local_thresholds(g: &WeightedNetwork, alpha: f64) -> Vec<Option<f64>> {
    g.adjacency()
        .iter()
        .map(|nbrs| {
            (nbrs.len() >= 2).then(|| {
                let w: Vec<f64> = nbrs.iter().map(|(_, w)| *w).collect();
                threshold_of(&w, alpha)
            })
        })
        .collect()
}

/// One thresholding pass over a raw network. An empty result is a valid
/// outcome (no edge survived).
pub fn prune_once(g: &WeightedNetwork, alpha: f64) -> WeightedNetwork {
    let thresholds = local_thresholds(g, alpha);
    let passes = |node: usize, w: f64| thresholds[node].is_some_and(|k| w > k);
    let kept: Vec<WeightedEdge> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let votes = passes(e.a, e.weight) as u8 + passes(e.b, e.weight) as u8;
            match votes {
                2 => Some(WeightedEdge { weight: 1.0, ..*e }),
                1 => Some(WeightedEdge { weight: 0.5, ..*e }),
                _ => None,
            }
        })
        .collect();

    let mut used = vec![false; g.node_count()];
    for e in &kept {
        used[e.a] = true;
        used[e.b] = true;
    }
    let mut remap = vec![usize::MAX; g.node_count()];
    let mut nodes = Vec::new();
    for (i, name) in g.nodes().iter().enumerate() {
        if used[i] {
            remap[i] = nodes.len();
            nodes.push(name.clone());
        }
    }
    let edges = kept
        .into_iter()
        .map(|e| WeightedEdge {
            a: remap[e.a],
            b: remap[e.b],
            weight: e.weight,
        })
        .collect();
    WeightedNetwork::from_sorted_unchecked(nodes, edges, NetworkKind::Pruned)
}

pub fn prune(g: &WeightedNetwork, cfg: &ThresholdConfig) -> Result<PruneResult, SsnError> {
    prune_with(g, cfg, &SpectralOptions::default())
}

pub fn prune_with(
    g: &WeightedNetwork,
    cfg: &ThresholdConfig,
    spectral: &SpectralOptions,
) -> Result<PruneResult, SsnError> {
    cfg.validate()?;
    if g.node_count() < 3 {
        return Err(SsnError::TooSmall(g.node_count()));
    }
    let mut iterations = Vec::new();
    let mut last: Option<(WeightedNetwork, f64)> = None;
    for alpha in cfg.alphas() {
        let candidate = prune_once(g, alpha);
        if candidate.is_empty() {
            iterations.push(SpectralReport {
                alpha,
                node_count: 0,
                edge_count: 0,
                eigenvalues: Vec::new(),
                zero_count: 0,
                fiedler_value: 0.0,
                nearly_disconnected: false,
            });
            break;
        }
        let spectrum =
            laplacian_spectrum_with(&candidate, cfg.laplacian_kind, REPORT_EIGENVALUES, spectral)?;
        let nearly = detect_nearly_disconnected(&spectrum, cfg.fiedler_tolerance);
        iterations.push(SpectralReport {
            alpha,
            node_count: candidate.node_count(),
            edge_count: candidate.edge_count(),
            eigenvalues: spectrum.eigenvalues,
            zero_count: spectrum.zero_count,
            fiedler_value: spectrum.fiedler_value,
            nearly_disconnected: nearly,
        });
        if nearly {
            return Ok(PruneResult {
                pruned: candidate,
                iterations,
                final_alpha: alpha,
                converged: true,
            });
        }
        last = Some((candidate, alpha));
    }
    let (pruned, final_alpha) = match last {
        Some(found) => found,
        None => (
            WeightedNetwork::empty(NetworkKind::Pruned),
            iterations.last().map_or(cfg.alpha_start, |r| r.alpha),
        ),
    };
    Ok(PruneResult {
        pruned,
        iterations,
        final_alpha,
        converged: false,
    })
}
