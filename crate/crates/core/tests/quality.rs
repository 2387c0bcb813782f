mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use proptest::prelude::*;
use tosg::kg::{Direction, Term, TermTriple};
use tosg::quality::{avg_distance_to_target, disconnected_ratio, neighbor_type_entropy, targets_in};

fn spec(vertices: usize, triples: usize) -> GenSpec {
    GenSpec { vertices, triples, ..Default::default() }
}

fn mean_distance_oracle(triples: &[TermTriple], targets: &BTreeSet<Term>) -> f64 {
    let adj = structural_adjacency(triples);
    // all-pairs: each vertex keeps its own nearest target
    let mut sum = 0usize;
    let mut n = 0usize;
    for v in entity_terms(triples) {
        if targets.contains(&v) {
            continue;
        }
        let dist = bfs(&adj, std::slice::from_ref(&v));
        if let Some(d) = targets.iter().filter_map(|t| dist.get(t)).min() {
            sum += d;
            n += 1;
        }
    }
    if n == 0 { 0.0 } else { sum as f64 / n as f64 }
}

#[test]
fn entropy_matches_oracle() {
    for seed in 0..40 {
        let triples = random_triples(seed, &spec(80, 150));
        let kg = build(&triples);
        let got = neighbor_type_entropy(&kg).unwrap();
        assert!((got - entropy_oracle(&triples)).abs() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn disconnection_and_distance_match_oracles() {
    for seed in 0..40 {
        let triples = random_triples(seed, &spec(60, 70));
        let kg = build(&triples);
        let terms = instances_of(&triples, &type_iri(0));
        let targets = targets_in(&kg, terms.iter().cloned());
        let got = disconnected_ratio(&kg, &targets);
        assert!((got - disconnected_oracle(&triples, &terms)).abs() < 1e-9, "seed {seed}");
        let mean = avg_distance_to_target(&kg, &targets, Direction::Both).mean;
        assert!((mean - mean_distance_oracle(&triples, &terms)).abs() < 1e-9, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metrics_ignore_input_order(seed in 0u64..1000, shift in 1usize..50) {
        let triples = random_triples(seed, &spec(40, 80));
        let mut rotated = triples.clone();
        rotated.rotate_left(shift % triples.len());
        rotated.reverse();
        let (a, b) = (build(&triples), build(&rotated));
        let terms = instances_of(&triples, &type_iri(1));
        let report = |kg| tosg::quality::report_for_targets(kg, &targets_in(kg, terms.iter().cloned()));
        prop_assert_eq!(report(&a), report(&b));
    }

    #[test]
    fn uniform_counts_give_zero(n in 1usize..30, k in 1usize..4) {
        // every vertex sees exactly k neighbor types around a typed ring
        let mut triples = Vec::new();
        for i in 0..n {
            let v = iri(&format!("r{i}"));
            for t in 0..k {
                triples.push(TermTriple::new(v.clone(), tosg::kg::RDF_TYPE, Term::iri(type_iri(t))));
            }
            triples.push(TermTriple::new(v, format!("{EX}next"), iri(&format!("r{}", (i + 1) % n))));
        }
        let h = neighbor_type_entropy(&build(&triples)).unwrap();
        prop_assert_eq!(h, 0.0);
    }
}

#[test]
fn entropy_histogram_oracle_is_sane() {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for c in [1, 1, 2, 2] {
        *counts.entry(c).or_default() += 1;
    }
    let h: f64 = counts.values().map(|&c| -0.25 * c as f64 * (0.25 * c as f64).log2()).sum();
    assert_eq!(h, 1.0);
}
