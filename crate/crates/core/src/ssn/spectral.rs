use serde::{Deserialize, Serialize};

use crate::linalg::{dense_eigenvalues, lanczos_smallest, LanczosOptions, SparseSym};

use super::{SsnError, WeightedNetwork};

/// Eigenvalues below this count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianKind {
    /// `L = D - W`
    Combinatorial,
    /// `L = I - D^-1/2 W D^-1/2`
    #[default]
    SymmetricNormalized,
}

impl std::str::FromStr for LaplacianKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "combinatorial" => Ok(LaplacianKind::Combinatorial),
            "symmetric-normalized" | "normalized" => Ok(LaplacianKind::SymmetricNormalized),
            other => Err(format!("unknown laplacian kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// The smallest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Zero eigenvalues, one per connected component.
    pub zero_count: usize,
    /// Smallest nonzero eigenvalue of the largest component.
    pub fiedler_value: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Largest operator handed to the dense solver.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: 2000,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// Laplacian of the subgraph induced by `members` (sorted node positions).
pub fn laplacian(g: &WeightedNetwork, kind: LaplacianKind, members: &[usize]) -> SparseSym {
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &m) in members.iter().enumerate() {
        local[m] = i;
    }
    let n = members.len();
    let mut degree = vec![0.0; n];
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        let (a, b) = (local[e.a], local[e.b]);
        if a == usize::MAX || b == usize::MAX {
            continue;
        }
        degree[a] += e.weight;
        degree[b] += e.weight;
        rows[a].push((b, e.weight));
        rows[b].push((a, e.weight));
    }
    match kind {
        LaplacianKind::Combinatorial => {
            for r in &mut rows {
                r.iter_mut().for_each(|(_, w)| *w = -*w);
            }
            SparseSym::new(degree, rows)
        }
        LaplacianKind::SymmetricNormalized => {
            let inv_sqrt: Vec<f64> = degree
                .iter()
                .map(|d| if *d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                .collect();
            for (i, r) in rows.iter_mut().enumerate() {
                r.iter_mut()
                    .for_each(|(j, w)| *w = -*w * inv_sqrt[i] * inv_sqrt[*j]);
            }
            let diag = degree
                .iter()
                .map(|d| if *d > 0.0 { 1.0 } else { 0.0 })
                .collect();
            SparseSym::new(diag, rows)
        }
    }
}

pub fn laplacian_spectrum(
    g: &WeightedNetwork,
    kind: LaplacianKind,
    k: usize,
) -> Result<Spectrum, SsnError> {
    laplacian_spectrum_with(g, kind, k, &SpectralOptions::default())
}

pub fn laplacian_spectrum_with(
    g: &WeightedNetwork,
    kind: LaplacianKind,
    k: usize,
    opts: &SpectralOptions,
) -> Result<Spectrum, SsnError> {
    let n = g.node_count();
    if n == 0 {
        return Err(SsnError::EmptyGraph);
    }
    let labels = g.components();
    let ncomp = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (v, c) in labels.iter().enumerate() {
        members[*c].push(v);
    }
    // largest component, ties to the one holding the earliest node
    let largest = (0..ncomp)
        .max_by(|a, b| members[*a].len().cmp(&members[*b].len()).then(b.cmp(a)))
        .expect("at least one component");

    let all: Vec<usize> = (0..n).collect();
    let (spectrum, largest_values) = if n <= opts.dense_limit {
        let values = clamp_nonnegative(dense_eigenvalues(&laplacian(g, kind, &all)));
        let largest_values = if ncomp == 1 {
            values.clone()
        } else {
            clamp_nonnegative(dense_eigenvalues(&laplacian(g, kind, &members[largest])))
        };
        (values, largest_values)
    } else {
        let mut values = Vec::new();
        let mut largest_values = Vec::new();
        for (c, nodes) in members.iter().enumerate() {
            let want = if c == largest { k.max(2) } else { k };
            let vals = component_smallest(g, kind, nodes, want, opts)?;
            if c == largest {
                largest_values = vals.clone();
            }
            values.extend(vals);
        }
        values.sort_by(f64::total_cmp);
        (values, largest_values)
    };

    let zero_count = spectrum
        .iter()
        .filter(|v| **v < ZERO_EIGENVALUE_TOL)
        .count();
    let fiedler_value = largest_values.get(1).copied().unwrap_or(0.0);
    Ok(Spectrum {
        eigenvalues: spectrum.into_iter().take(k.max(1)).collect(),
        zero_count,
        fiedler_value,
    })
}

fn component_smallest(
    g: &WeightedNetwork,
    kind: LaplacianKind,
    nodes: &[usize],
    want: usize,
    opts: &SpectralOptions,
) -> Result<Vec<f64>, SsnError> {
    let op = laplacian(g, kind, nodes);
    let values = if nodes.len() <= opts.dense_limit {
        dense_eigenvalues(&op).into_iter().take(want).collect()
    } else {
        lanczos_smallest(&op, want, opts.lanczos)?
            .into_iter()
            .map(|(v, _)| v)
            .collect()
    };
    Ok(clamp_nonnegative(values))
}

/// Laplacians are positive semi-definite; drop round-off below zero.
fn clamp_nonnegative(values: Vec<f64>) -> Vec<f64> {
    values.into_iter().map(|v| v.max(0.0)).collect()
}

/// Disconnected, or connected through a weak cut.
pub fn detect_nearly_disconnected(spectrum: &Spectrum, fiedler_tolerance: f64) -> bool {
    spectrum.zero_count >= 2 || spectrum.fiedler_value < fiedler_tolerance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssn::NetworkKind;

    fn net(n: usize, edges: &[(usize, usize, f64)]) -> WeightedNetwork {
        WeightedNetwork::new(
            (0..n).map(|i| format!("v{i}")).collect(),
            edges.iter().copied(),
            NetworkKind::Raw,
        )
        .unwrap()
    }

    fn complete(n: usize) -> WeightedNetwork {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j, 1.0));
            }
        }
        net(n, &e)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn path_p3_spectrum() {
        let g = net(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = laplacian_spectrum(&g, LaplacianKind::Combinatorial, 3).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 1.0, 3.0], 1e-9), "{:?}", s.eigenvalues);
        assert_eq!(s.zero_count, 1);
        assert!((s.fiedler_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn k4_spectrum() {
        let s = laplacian_spectrum(&complete(4), LaplacianKind::Combinatorial, 4).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 4.0, 4.0, 4.0], 1e-9));
        let s = laplacian_spectrum(&complete(4), LaplacianKind::SymmetricNormalized, 4).unwrap();
        let third = 4.0 / 3.0;
        assert!(close(&s.eigenvalues, &[0.0, third, third, third], 1e-9));
    }

    #[test]
    fn disjoint_edges_have_two_zeros() {
        let g = net(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let s = laplacian_spectrum(&g, LaplacianKind::Combinatorial, 3).unwrap();
        assert_eq!(s.zero_count, 2);
        assert!(detect_nearly_disconnected(&s, 0.05));
        assert!((s.fiedler_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nearly_disconnected_verdicts() {
        let s = laplacian_spectrum(&complete(4), LaplacianKind::SymmetricNormalized, 3).unwrap();
        assert!(!detect_nearly_disconnected(&s, 0.05));
        let s = laplacian_spectrum(&complete(4), LaplacianKind::Combinatorial, 3).unwrap();
        assert!(!detect_nearly_disconnected(&s, 0.05));
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = WeightedNetwork::empty(NetworkKind::Pruned);
        assert!(matches!(
            laplacian_spectrum(&g, LaplacianKind::Combinatorial, 3),
            Err(SsnError::EmptyGraph)
        ));
    }

    #[test]
    fn iterative_path_matches_dense() {
        // two components: a 40-cycle with chords and a 25-path
        let mut e = Vec::new();
        for i in 0..40 {
            e.push((i, (i + 1) % 40, 1.0));
            if i % 5 == 0 {
                e.push((i, (i + 7) % 40, 0.5));
            }
        }
        for i in 40..64 {
            e.push((i, i + 1, 0.5));
        }
        e.sort_by_key(|a| (a.0.min(a.1), a.0.max(a.1)));
        e.dedup_by(|a, b| (a.0.min(a.1), a.0.max(a.1)) == (b.0.min(b.1), b.0.max(b.1)));
        let g = net(65, &e);
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let dense = laplacian_spectrum(&g, kind, 5).unwrap();
            let opts = SpectralOptions {
                dense_limit: 10,
                ..Default::default()
            };
            let iter = laplacian_spectrum_with(&g, kind, 5, &opts).unwrap();
            assert_eq!(dense.zero_count, 2);
            assert_eq!(iter.zero_count, 2);
            assert!(close(&dense.eigenvalues, &iter.eigenvalues, 1e-8), "{dense:?} {iter:?}");
            assert!((dense.fiedler_value - iter.fiedler_value).abs() < 1e-8);
        }
    }
}
