mod common;

use std::collections::{BTreeSet, HashSet};

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tosg::brw::{brw_extract, get_initial_vertices, random_walk_sample, BrwParams, WalkDirection};
use tosg::ibs::{
    approximate_ppr, build_partition, ibs_extract, influence_scores, select_topk, IbsParams, PprParams,
};
use tosg::kg::{Term, TermTriple, VertexId, RDF_TYPE};
use tosg::task::TaskSpec;

/// Community A holds the targets; community B shares no edge with A.
fn two_communities(seed: u64) -> Vec<TermTriple> {
    let a = random_triples(seed, &GenSpec { vertices: 60, triples: 200, literal_fraction: 0.0, ..Default::default() });
    let b = random_triples(seed + 1, &GenSpec { vertices: 60, triples: 200, literal_fraction: 0.0, ..Default::default() });
    let rename = |t: &Term| match t.kind() {
        tosg::kg::TermKind::Iri if t.value().starts_with(&format!("{EX}e")) => Term::iri(t.value().replace("/e", "/b")),
        _ => t.clone(),
    };
    let mut out = a;
    for t in b {
        // B uses its own classes so no vertex of B is a target
        let o = if &*t.predicate == RDF_TYPE {
            Term::iri(format!("{}B", t.object.value()))
        } else {
            rename(&t.object)
        };
        out.push(TermTriple::new(rename(&t.subject), t.predicate.to_string(), o));
    }
    out
}

fn in_b(t: &Term) -> bool {
    t.value().starts_with(&format!("{EX}b")) || t.value().ends_with('B')
}

#[test]
fn initial_vertices_rerun() {
    let targets: Vec<VertexId> = (0..1000).map(VertexId).collect();
    let a = get_initial_vertices(100, &targets, 1).unwrap();
    assert_eq!(a, get_initial_vertices(100, &targets, 1).unwrap());
    assert_ne!(a, get_initial_vertices(100, &targets, 2).unwrap());
}

#[test]
fn unreachable_community_is_never_sampled() {
    let triples = two_communities(40);
    let kg = build(&triples);
    let task = TaskSpec::node_classification(&type_iri(0), &format!("{EX}p0"));
    for seed in 0..5 {
        let params = BrwParams { seed, walks_per_seed: 3, ..Default::default() };
        let sg = brw_extract(&kg, &task, &params).unwrap();
        assert!(sg.triple_set().iter().all(|t| !in_b(&t.subject) && !in_b(&t.object)));
        let params = IbsParams { seed, batch_size: 10, ..Default::default() };
        let sg = ibs_extract(&kg, &task, &params).unwrap();
        assert!(sg.triple_set().iter().all(|t| !in_b(&t.subject) && !in_b(&t.object)));
    }
}

#[test]
fn ppr_matches_power_iteration() {
    let triples = random_triples(12, &GenSpec { vertices: 150, triples: 400, ..Default::default() });
    let kg = build(&triples);
    let adj = structural_adjacency(&triples);
    let params = PprParams::default();
    for s in kg.vertices().step_by(17) {
        let source = kg.term(s);
        let deg = adj[source].len();
        if deg == 0 {
            continue;
        }
        let exact = power_iteration_ppr(&adj, source, params.alpha);
        let approx = approximate_ppr(&kg, s, &params).unwrap();
        for v in kg.vertices() {
            let term = kg.term(v);
            let err = (approx.get(v) - exact.get(term).copied().unwrap_or(0.0)).abs();
            assert!(err <= params.epsilon * adj[term].len() as f64 + 1e-12, "{term}: {err}");
        }
    }
}

#[test]
fn batch_scores_equal_standalone() {
    let kg = build(&random_triples(13, &GenSpec { vertices: 150, triples: 500, ..Default::default() }));
    let targets: Vec<VertexId> = kg.vertices().step_by(7).take(20).collect();
    let params = PprParams::default();
    let batch = influence_scores(&kg, &targets, &params).unwrap();
    for (t, s) in targets.iter().zip(&batch) {
        assert_eq!(s, &approximate_ppr(&kg, *t, &params).unwrap());
    }
}

#[test]
fn topk_equals_full_sort() {
    let kg = build(&random_triples(14, &GenSpec { vertices: 150, triples: 600, ..Default::default() }));
    let targets: Vec<VertexId> = kg.vertices().step_by(11).take(10).collect();
    let scores = influence_scores(&kg, &targets, &PprParams::default()).unwrap();
    let pairs = select_topk(&targets, &scores, 16);
    for s in &scores {
        let mut all: Vec<(VertexId, f64)> = s.scores.iter().copied().filter(|&(v, _)| v != s.source).collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let expected: Vec<VertexId> = all.into_iter().take(16).map(|(v, _)| v).collect();
        let got: Vec<VertexId> = pairs.iter().filter(|p| p.0 == s.source).map(|p| p.1).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn partition_picks_one_full_cluster() {
    // two cliques of 4 targets each, joined by nothing
    let mut triples = Vec::new();
    for c in 0..2 {
        for i in 0..4 {
            let v = iri(&format!("c{c}_{i}"));
            triples.push(TermTriple::new(v.clone(), RDF_TYPE, Term::iri(type_iri(0))));
            for j in 0..4 {
                if i != j {
                    triples.push(TermTriple::new(v.clone(), format!("{EX}p"), iri(&format!("c{c}_{j}"))));
                }
            }
        }
    }
    let kg = build(&triples);
    let targets: Vec<VertexId> = (0..8)
        .map(|i| kg.lookup(&iri(&format!("c{}_{}", i / 4, i % 4))).unwrap())
        .collect();
    let scores = influence_scores(&kg, &targets, &PprParams::default()).unwrap();
    let pairs = select_topk(&targets, &scores, 3);
    for seed in 0..6 {
        let part = build_partition(&kg, &targets, &pairs, 4, seed, WalkDirection::Both);
        let clusters: HashSet<char> = part
            .iter()
            .map(|&v| kg.term(v).value().chars().nth(EX.len() + 1).unwrap())
            .collect();
        assert_eq!(part.len(), 4);
        assert_eq!(clusters.len(), 1, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn walks_are_paths(seed in 0u64..10_000, h in 1usize..6, both in any::<bool>()) {
        let kg = build(&random_triples(seed % 50, &GenSpec { vertices: 100, triples: 250, ..Default::default() }));
        let dir = if both { WalkDirection::Both } else { WalkDirection::Outgoing };
        let v = VertexId((seed % kg.num_vertices() as u64) as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = random_walk_sample(&kg, v, h, dir, &mut rng);
        prop_assert!(!path.is_empty() && path.len() <= h + 1);
        prop_assert_eq!(path[0], v);
        for w in path.windows(2) {
            let next: BTreeSet<VertexId> = kg.structural_neighbors(w[0], dir.as_direction()).collect();
            prop_assert!(next.contains(&w[1]));
        }
    }

    #[test]
    fn push_conserves_mass(seed in 0u64..10_000) {
        let kg = build(&random_triples(seed, &GenSpec { vertices: 60, triples: 120, ..Default::default() }));
        let graph = tosg::ibs::ProjectedGraph::new(&kg, WalkDirection::Both);
        let s = VertexId((seed % kg.num_vertices() as u64) as u32);
        let state = tosg::ibs::forward_push(&graph, s, &PprParams::default());
        let mass: f64 = state.estimate.values().sum::<f64>() + state.residual.values().sum::<f64>();
        prop_assert!((mass - 1.0).abs() <= 1e-9);
        prop_assert!(state.estimate.values().all(|p| *p >= 0.0));
    }
}
