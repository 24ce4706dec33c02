//! Checks behind each acceptance criterion. Every check returns a short
//! summary on success and a description of the first violation otherwise.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssn_core::semsim::{AncestorRule, IcMeasure, TermMeasure};
use ssn_core::ssn::{laplacian_spectrum, prune_once};
use ssn_core::*;

use super::oracle::Oracle;

pub type Check = Result<String, String>;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn planted() -> Dataset {
    Dataset::load(
        read_fixture("planted.obo").as_bytes(),
        read_fixture("planted.gaf").as_bytes(),
        None,
    )
    .expect("planted fixture loads")
}

pub const BP: Namespace = Namespace::BiologicalProcess;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mixer_name(m: MixerId) -> &'static str {
    match m {
        MixerId::Max => "Max",
        MixerId::Avg => "Avg",
        MixerId::BMA => "BMA",
    }
}

/// All eleven measures (pairwise ones under every mixer) against the oracle.
pub fn ssm_oracle() -> Check {
    let start = Instant::now();
    let data = planted();
    let oracle = Oracle::new(
        &read_fixture("planted.obo"),
        &read_fixture("planted.gaf"),
        "biological_process",
        "P",
    );
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    for measure in MeasureId::ALL {
        let mixers: &[MixerId] = if measure.is_pairwise() {
            &[MixerId::Max, MixerId::Avg, MixerId::BMA]
        } else {
            &[MixerId::BMA]
        };
        for &mixer in mixers {
            let m = data.matrix(BP, measure, mixer).map_err(|e| e.to_string())?.matrix;
            let ids = m.ids();
            ensure(
                ids.iter().cloned().collect::<BTreeSet<_>>()
                    == oracle.products.keys().cloned().collect(),
                || "matrix products differ from the oracle's".into(),
            )?;
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    let want = oracle.gene_sim(measure.name(), mixer_name(mixer), &ids[i], &ids[j]);
                    let diff = (m.get(i, j) - want).abs();
                    worst = worst.max(diff);
                    ensure(diff <= 1e-12, || {
                        format!(
                            "{} {} ({}, {}): {} vs oracle {want}",
                            measure.name(),
                            mixer_name(mixer),
                            ids[i],
                            ids[j],
                            m.get(i, j)
                        )
                    })?;
                    compared += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}, limit 5 s")
    })?;
    Ok(format!(
        "{compared} pairs, max |diff| {worst:e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

/// Symmetry, range, self-similarity, IC monotonicity and GraSM = MICA on singleton DCA sets.
pub fn ssm_algebraic() -> Check {
    let data = planted();
    let s = data.semsim(BP).map_err(|e| e.to_string())?;
    let products = s.all_products();
    let self_one = [
        MeasureId::Lin,
        MeasureId::LinGraSM,
        MeasureId::JiangConrath,
        MeasureId::JiangConrathGraSM,
        MeasureId::Cosine,
        MeasureId::WeightedJaccard,
        MeasureId::CzekanowskiDice,
    ];
    let mut checked = 0usize;
    for measure in MeasureId::ALL {
        for p in &products {
            let same = s.gene_sim(measure, MixerId::BMA, p, p).map_err(|e| e.to_string())?;
            if self_one.contains(&measure) {
                ensure(same == 1.0, || format!("{} self({p}) = {same}", measure.name()))?;
            }
            for q in &products {
                let pq = s.gene_sim(measure, MixerId::BMA, p, q).map_err(|e| e.to_string())?;
                let qp = s.gene_sim(measure, MixerId::BMA, q, p).map_err(|e| e.to_string())?;
                ensure(pq == qp, || format!("{} asymmetric on ({p}, {q})", measure.name()))?;
                ensure((0.0..=1.0).contains(&pq), || {
                    format!("{} ({p}, {q}) = {pq} out of range", measure.name())
                })?;
                checked += 1;
            }
        }
    }

    let g = &data.graph;
    for e in g.edges() {
        let (Some(child), Some(parent)) = (s.ic.get(e.child), s.ic.get(e.parent)) else {
            continue;
        };
        ensure(child >= parent, || {
            format!(
                "ic({}) = {child} < ic({}) = {parent}",
                g.term(e.child).id,
                g.term(e.parent).id
            )
        })?;
    }

    let terms: Vec<TermIdx> = s.ic.iter().map(|(t, _)| t).collect();
    let mut singleton = 0usize;
    let mut multi = 0usize;
    for &a in &terms {
        for &b in &terms {
            let dca = s.dca(a, b).map_err(|e| e.to_string())?;
            if dca.len() != 1 {
                multi += 1;
                continue;
            }
            singleton += 1;
            for measure in [IcMeasure::Resnik, IcMeasure::Lin, IcMeasure::JiangConrath] {
                let plain = s
                    .term_sim(TermMeasure { measure, rule: AncestorRule::Mica }, a, b)
                    .map_err(|e| e.to_string())?;
                let grasm = s
                    .term_sim(TermMeasure { measure, rule: AncestorRule::Grasm }, a, b)
                    .map_err(|e| e.to_string())?;
                ensure(plain == grasm, || {
                    format!(
                        "{measure:?}: GraSM {grasm} != MICA {plain} on ({}, {})",
                        g.term(a).id,
                        g.term(b).id
                    )
                })?;
            }
        }
    }
    ensure(multi > 0, || "fixture has no pair with several DCAs".into())?;
    Ok(format!(
        "{checked} gene pairs, {} edges, {singleton} single-DCA term pairs",
        g.edges().len()
    ))
}

fn planted_raw() -> WeightedNetwork {
    let m = planted()
        .matrix(BP, MeasureId::DEFAULT, MixerId::BMA)
        .expect("planted matrix")
        .matrix;
    build_ssn(&m)
}

fn random_network(rng: &mut ChaCha8Rng, n: usize, density: f64) -> WeightedNetwork {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j, rng.gen_range(0.01..=1.0)));
            }
        }
    }
    WeightedNetwork::new((0..n).map(|i| format!("n{i}")).collect(), edges, NetworkKind::Raw)
        .expect("random network")
}

fn edge_set(g: &WeightedNetwork) -> BTreeSet<(String, String)> {
    g.edge_names()
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

pub fn thresholding() -> Check {
    let alphas = [0.0, 0.5, 1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut graphs = vec![planted_raw()];
    for _ in 0..20 {
        let n = rng.gen_range(3..=40);
        let density = rng.gen_range(0.1..0.9);
        graphs.push(random_network(&mut rng, n, density));
    }
    for (gi, g) in graphs.iter().enumerate() {
        let raw = edge_set(g);
        let mut previous: Option<BTreeSet<(String, String)>> = None;
        for alpha in alphas {
            let p = prune_once(g, alpha);
            let kept = edge_set(&p);
            ensure(kept.is_subset(&raw), || format!("graph {gi} alpha {alpha}: not a subset"))?;
            ensure(
                p.edges().iter().all(|e| e.weight == 0.5 || e.weight == 1.0),
                || format!("graph {gi} alpha {alpha}: weight outside {{0.5, 1}}"),
            )?;
            ensure(!p.degrees().contains(&0), || {
                format!("graph {gi} alpha {alpha}: isolated node")
            })?;
            if let Some(prev) = &previous {
                ensure(kept.is_subset(prev), || {
                    format!("graph {gi}: edges kept at alpha {alpha} but not before")
                })?;
            }
            previous = Some(kept);
        }
    }

    let path = WeightedNetwork::new(
        ["a", "b", "c", "d"].map(String::from).to_vec(),
        [(0, 1, 0.9), (1, 2, 0.1), (2, 3, 0.9)],
        NetworkKind::Raw,
    )
    .map_err(|e| e.to_string())?;
    let p = prune_once(&path, 0.0);
    let got: Vec<(String, String, f64)> = p
        .edges()
        .iter()
        .map(|e| (p.nodes()[e.a].clone(), p.nodes()[e.b].clone(), e.weight))
        .collect();
    let want = vec![
        ("a".to_string(), "b".to_string(), 0.5),
        ("c".to_string(), "d".to_string(), 0.5),
    ];
    ensure(got == want, || format!("4-node path gave {got:?}"))?;
    Ok(format!("{} graphs x {} alphas, 4-node path exact", graphs.len(), alphas.len()))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Component count by breadth-first search over the edge list.
fn traversal_components(g: &WeightedNetwork) -> usize {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    count
}

fn complete(n: usize) -> WeightedNetwork {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)));
    WeightedNetwork::new((0..n).map(|i| format!("k{i}")).collect(), edges, NetworkKind::Raw)
        .expect("complete graph")
}

pub fn barbell() -> WeightedNetwork {
    let m = SimilarityMatrix::read_csv(read_fixture("barbell.csv").as_bytes()).expect("barbell");
    build_ssn(&m)
}

pub fn spectral() -> Check {
    let comb = LaplacianKind::Combinatorial;
    let p3 = WeightedNetwork::new(
        ["x", "y", "z"].map(String::from).to_vec(),
        [(0, 1, 1.0), (1, 2, 1.0)],
        NetworkKind::Raw,
    )
    .map_err(|e| e.to_string())?;
    let s = laplacian_spectrum(&p3, comb, 3).map_err(|e| e.to_string())?;
    ensure(close(&s.eigenvalues, &[0.0, 1.0, 3.0], 1e-9), || {
        format!("P3 spectrum {:?}", s.eigenvalues)
    })?;
    let s = laplacian_spectrum(&complete(4), comb, 4).map_err(|e| e.to_string())?;
    ensure(close(&s.eigenvalues, &[0.0, 4.0, 4.0, 4.0], 1e-9), || {
        format!("K4 spectrum {:?}", s.eigenvalues)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let n = rng.gen_range(1..=50);
        let density = rng.gen_range(0.0..0.2);
        let g = random_network(&mut rng, n, density);
        let want = traversal_components(&g);
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let s = laplacian_spectrum(&g, kind, n).map_err(|e| e.to_string())?;
            ensure(s.zero_count == want, || {
                format!("random graph {i} ({kind:?}): {} zeros, {want} components", s.zero_count)
            })?;
        }
    }

    let cfg = ThresholdConfig::default();
    let s = laplacian_spectrum(&barbell(), cfg.laplacian_kind, 6).map_err(|e| e.to_string())?;
    ensure(detect_nearly_disconnected(&s, 0.05), || {
        format!("barbell not flagged: fiedler {}", s.fiedler_value)
    })?;
    let k4 = laplacian_spectrum(&complete(4), cfg.laplacian_kind, 4).map_err(|e| e.to_string())?;
    ensure(!detect_nearly_disconnected(&k4, 0.05), || "K4 flagged".into())?;
    Ok(format!(
        "P3, K4 exact; 100 random graphs; barbell fiedler {:.5}",
        s.fiedler_value
    ))
}

pub fn end_to_end() -> Check {
    let start = Instant::now();
    let m = planted()
        .matrix(BP, MeasureId::DEFAULT, MixerId::default())
        .map_err(|e| e.to_string())?
        .matrix;
    let c = compare(&m, &ThresholdConfig::default(), DEFAULT_SEED).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (raw, pruned) = (c.raw(), c.pruned());
    let summary = format!(
        "modularity {:.4} -> {:.4}, coherence {:.4} -> {:.4}, {:.2} s",
        raw.modularity,
        pruned.modularity,
        raw.coherence,
        pruned.coherence,
        elapsed.as_secs_f64()
    );
    ensure(pruned.modularity > raw.modularity, || format!("modularity not higher: {summary}"))?;
    ensure(pruned.coherence > raw.coherence, || format!("coherence not higher: {summary}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("too slow: {summary}"))?;
    Ok(summary)
}
