use std::collections::BTreeSet;

use proptest::prelude::*;
use ssn_core::ssn::{laplacian_spectrum, prune_once};
use ssn_core::*;

const BP: Namespace = Namespace::BiologicalProcess;

/// A random DAG: term `i` points at one or two earlier terms.
fn ontology() -> impl Strategy<Value = (usize, Vec<Vec<(usize, bool)>>)> {
    (4usize..14).prop_flat_map(|n| {
        let parents = (1..n)
            .map(|i| prop::collection::vec((0..i, any::<bool>()), 1..=2))
            .collect::<Vec<_>>();
        (Just(n), parents)
    })
}

fn obo_text(n: usize, parents: &[Vec<(usize, bool)>]) -> String {
    let mut out = String::new();
    for i in 0..n {
        out.push_str(&format!(
            "[Term]\nid: GO:{i:07}\nname: t{i}\nnamespace: biological_process\n"
        ));
        if i > 0 {
            let mut seen = BTreeSet::new();
            for &(p, part_of) in &parents[i - 1] {
                if !seen.insert(p) {
                    continue;
                }
                if part_of {
                    out.push_str(&format!("relationship: part_of GO:{p:07}\n"));
                } else {
                    out.push_str(&format!("is_a: GO:{p:07}\n"));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn gaf_text(annotations: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for (p, terms) in annotations.iter().enumerate() {
        for t in terms {
            out.push_str(&format!(
                "DB\tP{p:02}\tp{p}\t\tGO:{t:07}\tREF\tIDA\t\tP\t\t\tprotein\ttaxon:1\t20240101\tDB\n"
            ));
        }
    }
    out
}

fn dataset() -> impl Strategy<Value = Dataset> {
    ontology().prop_flat_map(|(n, parents)| {
        let annotations = prop::collection::vec(prop::collection::vec(0..n, 1..4), 3..8);
        (Just(n), Just(parents), annotations).prop_map(|(n, parents, annotations)| {
            Dataset::load(
                obo_text(n, &parents).as_bytes(),
                gaf_text(&annotations).as_bytes(),
                None,
            )
            .expect("generated dataset loads")
        })
    })
}

fn network(max_nodes: usize) -> impl Strategy<Value = WeightedNetwork> {
    (3..max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        prop::collection::vec(prop::option::weighted(0.5, 0.01f64..=1.0), pairs.len()).prop_map(
            move |weights| {
                let edges = pairs
                    .iter()
                    .zip(weights)
                    .filter_map(|(&(i, j), w)| w.map(|w| (i, j, w)));
                WeightedNetwork::new(
                    (0..n).map(|i| format!("v{i}")).collect(),
                    edges,
                    NetworkKind::Raw,
                )
                .unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ic_never_decreases_towards_the_leaves(data in dataset()) {
        let s = data.semsim(BP).unwrap();
        for e in data.graph.edges() {
            if let (Some(c), Some(p)) = (s.ic.get(e.child), s.ic.get(e.parent)) {
                prop_assert!(c >= p);
            }
        }
    }

    #[test]
    fn matrices_are_symmetric_bounded_with_unit_diagonal(data in dataset()) {
        for measure in MeasureId::ALL {
            let s = data.semsim(BP).unwrap();
            let products = s.all_products();
            if products.len() < 2 {
                continue;
            }
            let m = s.build_matrix(&products, measure, MixerId::BMA).unwrap().matrix;
            for i in 0..m.len() {
                prop_assert_eq!(m.get(i, i), 1.0);
                for j in 0..m.len() {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    prop_assert!((0.0..=1.0).contains(&m.get(i, j)));
                }
            }
        }
    }

    #[test]
    fn identical_profiles_score_one(data in dataset()) {
        let s = data.semsim(BP).unwrap();
        for p in s.all_products() {
            for measure in [MeasureId::Lin, MeasureId::JiangConrath, MeasureId::Cosine,
                            MeasureId::WeightedJaccard, MeasureId::CzekanowskiDice] {
                prop_assert_eq!(s.gene_sim(measure, MixerId::BMA, &p, &p).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn matrix_serializations_round_trip(data in dataset()) {
        let s = data.semsim(BP).unwrap();
        let products = s.all_products();
        prop_assume!(products.len() >= 2);
        let m = s.build_matrix(&products, MeasureId::Lin, MixerId::BMA).unwrap().matrix;
        prop_assert_eq!(SimilarityMatrix::from_json(&m.to_json()).unwrap(), m.clone());
        let back = SimilarityMatrix::read_csv(m.to_csv().as_bytes()).unwrap();
        prop_assert_eq!(back.ids(), m.ids());
        for i in 0..m.len() {
            for j in 0..m.len() {
                prop_assert!((back.get(i, j) - m.get(i, j)).abs() <= 1e-9);
            }
        }
        prop_assert_eq!(back.to_csv(), m.to_csv());
    }

    #[test]
    fn pruning_keeps_a_shrinking_subset(g in network(25), a in 0.0f64..2.0, step in 0.0f64..1.5) {
        let raw: BTreeSet<_> = g.edge_names().into_iter().collect();
        let low = prune_once(&g, a);
        let high = prune_once(&g, a + step);
        let low_set: BTreeSet<_> = low.edge_names().into_iter().collect();
        let high_set: BTreeSet<_> = high.edge_names().into_iter().collect();
        prop_assert!(low_set.is_subset(&raw));
        prop_assert!(high_set.is_subset(&low_set));
        for p in [&low, &high] {
            prop_assert!(p.edges().iter().all(|e| e.weight == 0.5 || e.weight == 1.0));
            prop_assert!(!p.degrees().contains(&0));
        }
    }

    #[test]
    fn zero_eigenvalues_count_components(g in network(30)) {
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::SymmetricNormalized] {
            let s = laplacian_spectrum(&g, kind, g.node_count()).unwrap();
            prop_assert_eq!(s.zero_count, g.component_count());
            prop_assert!(s.eigenvalues.iter().all(|v| *v >= 0.0));
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn greedy_partition_is_dense_and_not_worse_than_singletons(g in network(25), seed in any::<u64>()) {
        let p = detect_communities(&g, seed).unwrap();
        let k = p.community_count();
        prop_assert_eq!(p.labels().iter().copied().collect::<BTreeSet<_>>(), (0..k).collect());
        let singletons = Partition::new(g.nodes().to_vec(), (0..g.node_count()).collect()).unwrap();
        prop_assert!(p.modularity() >= modularity(&g, &singletons).unwrap() - 1e-12);
        prop_assert!((p.modularity() - modularity(&g, &p).unwrap()).abs() < 1e-12);
        prop_assert_eq!(detect_communities(&g, seed).unwrap(), p);
    }

    #[test]
    fn network_round_trips(g in network(15)) {
        prop_assert_eq!(WeightedNetwork::from_json(&g.to_json()).unwrap(), g.clone());
    }
}
