//! Generators and brute-force oracles shared by the integration tests. The
//! oracles work on plain term triples and never touch the graph indices.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tosg::kg::{GraphBuilder, KnowledgeGraph, Term, TermTriple, RDF_TYPE};
use tosg::rgcn::{FeatureAssignment, Relation, RgcnReferenceModel};

pub const EX: &str = "http://ex.org/";

pub fn iri(local: &str) -> Term {
    Term::iri(format!("{EX}{local}"))
}

pub fn type_iri(i: usize) -> String {
    format!("{EX}T{i}")
}

#[derive(Clone, Debug)]
pub struct GenSpec {
    pub vertices: usize,
    pub triples: usize,
    pub types: usize,
    pub predicates: usize,
    pub literal_fraction: f64,
    pub typed_fraction: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            vertices: 200,
            triples: 800,
            types: 6,
            predicates: 5,
            literal_fraction: 0.1,
            typed_fraction: 0.8,
        }
    }
}

/// Random typed multigraph as term triples. Entities are `e<i>`, classes
/// `T<j>`, predicates `p<k>`.
pub fn random_triples(seed: u64, spec: &GenSpec) -> Vec<TermTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let types = spec.types.max(1);
    for v in 0..spec.vertices {
        if rng.random_bool(spec.typed_fraction) {
            let n = if rng.random_bool(0.2) { 2 } else { 1 };
            for _ in 0..n {
                let t = rng.random_range(0..types);
                out.push(TermTriple::new(iri(&format!("e{v}")), RDF_TYPE, Term::iri(type_iri(t))));
            }
        }
    }
    for _ in 0..spec.triples {
        let s = rng.random_range(0..spec.vertices);
        let p = format!("{EX}p{}", rng.random_range(0..spec.predicates.max(1)));
        let o = if rng.random_bool(spec.literal_fraction) {
            Term::plain_literal(&format!("lit {}", rng.random_range(0..spec.vertices)))
        } else {
            iri(&format!("e{}", rng.random_range(0..spec.vertices)))
        };
        out.push(TermTriple::new(iri(&format!("e{s}")), p, o));
    }
    out
}

pub fn build(triples: &[TermTriple]) -> KnowledgeGraph {
    let mut b = GraphBuilder::new(RDF_TYPE);
    for t in triples {
        b.add_triple(t.clone()).unwrap();
    }
    b.finish()
}

pub fn to_ntriples(triples: &[TermTriple]) -> String {
    triples.iter().map(|t| format!("{t}\n")).collect()
}

pub fn term_set(kg: &KnowledgeGraph) -> BTreeSet<TermTriple> {
    kg.term_triples().collect()
}

fn is_type(t: &TermTriple) -> bool {
    &*t.predicate == RDF_TYPE
}

/// Triples on direction-respecting paths of at most `h` hops from instances
/// of `target_type`. Intermediate hops never use type assertions.
pub fn pattern_oracle(triples: &[TermTriple], targets: &BTreeSet<Term>, d: u8, h: u8) -> BTreeSet<TermTriple> {
    let mut reach: HashSet<Term> = targets.iter().cloned().collect();
    for _ in 1..h {
        let mut next = reach.clone();
        for t in triples.iter().filter(|t| !is_type(t)) {
            if reach.contains(&t.subject) {
                next.insert(t.object.clone());
            }
            if d == 2 && reach.contains(&t.object) {
                next.insert(t.subject.clone());
            }
        }
        reach = next;
    }
    triples
        .iter()
        .filter(|t| reach.contains(&t.subject) || (d == 2 && reach.contains(&t.object)))
        .cloned()
        .collect()
}

pub fn instances_of(triples: &[TermTriple], class: &str) -> BTreeSet<Term> {
    triples
        .iter()
        .filter(|t| is_type(t) && t.object == Term::iri(class))
        .map(|t| t.subject.clone())
        .collect()
}

/// Undirected structural adjacency with one entry per distinct triple
/// endpoint.
pub fn structural_adjacency(triples: &[TermTriple]) -> HashMap<Term, Vec<Term>> {
    let mut adj: HashMap<Term, Vec<Term>> = HashMap::new();
    let unique: BTreeSet<&TermTriple> = triples.iter().collect();
    for t in unique {
        adj.entry(t.subject.clone()).or_default();
        adj.entry(t.object.clone()).or_default();
        if is_type(t) {
            continue;
        }
        adj.get_mut(&t.subject).unwrap().push(t.object.clone());
        adj.get_mut(&t.object).unwrap().push(t.subject.clone());
    }
    adj
}

/// Dense personalized PageRank by power iteration. Vertices without
/// neighbors return their mass to the source.
pub fn power_iteration_ppr(adj: &HashMap<Term, Vec<Term>>, source: &Term, alpha: f64) -> HashMap<Term, f64> {
    let mut p: HashMap<Term, f64> = adj.keys().map(|k| (k.clone(), 0.0)).collect();
    *p.get_mut(source).unwrap() = 1.0;
    for _ in 0..10_000 {
        let mut next: HashMap<Term, f64> = adj.keys().map(|k| (k.clone(), 0.0)).collect();
        *next.get_mut(source).unwrap() += alpha;
        for (u, mass) in &p {
            if *mass == 0.0 {
                continue;
            }
            let ns = &adj[u];
            if ns.is_empty() {
                *next.get_mut(source).unwrap() += (1.0 - alpha) * mass;
            } else {
                let share = (1.0 - alpha) * mass / ns.len() as f64;
                for w in ns {
                    *next.get_mut(w).unwrap() += share;
                }
            }
        }
        let diff: f64 = next.iter().map(|(k, v)| (v - p[k]).abs()).sum();
        p = next;
        if diff < 1e-15 {
            break;
        }
    }
    p
}

/// Breadth-first distances from `sources` over an adjacency list.
pub fn bfs(adj: &HashMap<Term, Vec<Term>>, sources: &[Term]) -> HashMap<Term, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        if adj.contains_key(s) && !dist.contains_key(s) {
            dist.insert(s.clone(), 0);
            queue.push_back(s.clone());
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for w in &adj[&u] {
            if !dist.contains_key(w) {
                dist.insert(w.clone(), d + 1);
                queue.push_back(w.clone());
            }
        }
    }
    dist
}

/// Vertices of `V'`: every subject and every object of a non-type triple.
pub fn entity_terms(triples: &[TermTriple]) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in triples {
        out.insert(t.subject.clone());
        if !is_type(t) {
            out.insert(t.object.clone());
        }
    }
    out
}

/// Shannon entropy of per-vertex distinct neighbor-type counts.
pub fn entropy_oracle(triples: &[TermTriple]) -> f64 {
    let mut types: HashMap<Term, BTreeSet<Term>> = HashMap::new();
    for t in triples.iter().filter(|t| is_type(t)) {
        types.entry(t.subject.clone()).or_default().insert(t.object.clone());
    }
    let mut seen: HashMap<Term, BTreeSet<Term>> = HashMap::new();
    for v in entity_terms(triples) {
        if !v.is_literal() {
            seen.insert(v, BTreeSet::new());
        }
    }
    for t in triples.iter().filter(|t| !is_type(t)) {
        for (a, b) in [(&t.subject, &t.object), (&t.object, &t.subject)] {
            if let (Some(set), Some(ts)) = (seen.get_mut(a), types.get(b)) {
                set.extend(ts.iter().cloned());
            }
        }
    }
    let mut histogram: HashMap<usize, f64> = HashMap::new();
    for set in seen.values() {
        *histogram.entry(set.len()).or_default() += 1.0;
    }
    let n = seen.len() as f64;
    histogram
        .values()
        .map(|c| {
            let p = c / n;
            -p * p.ln() / std::f64::consts::LN_2
        })
        .sum()
}

/// Union-find connectivity: percentage of non-target entity vertices in a
/// structural component without a target.
pub fn disconnected_oracle(triples: &[TermTriple], targets: &BTreeSet<Term>) -> f64 {
    let vs: Vec<Term> = entity_terms(triples).into_iter().collect();
    let index: HashMap<&Term, usize> = vs.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut parent: Vec<usize> = (0..vs.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    for t in triples.iter().filter(|t| !is_type(t)) {
        let (a, b) = (index[&t.subject], index[&t.object]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut good = HashSet::new();
    for (i, v) in vs.iter().enumerate() {
        if targets.contains(v) {
            good.insert(find(&mut parent, i));
        }
    }
    let mut others = 0;
    let mut stray = 0;
    for (i, v) in vs.iter().enumerate() {
        if targets.contains(v) {
            continue;
        }
        others += 1;
        if !good.contains(&find(&mut parent, i)) {
            stray += 1;
        }
    }
    if others == 0 {
        0.0
    } else {
        100.0 * stray as f64 / others as f64
    }
}

pub type Mat = Vec<Vec<f64>>;

fn weight(model: &RgcnReferenceModel, layer: usize, rel: Option<&Relation>) -> Mat {
    let m = match rel {
        Some(r) => model.relation_weight(layer, r),
        None => model.self_weight(layer),
    };
    (0..m.dim).map(|r| (0..m.dim).map(|c| m.get(r, c)).collect()).collect()
}

fn matvec(w: &Mat, x: &[f64]) -> Vec<f64> {
    w.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = b[0].len();
    a.iter()
        .map(|row| (0..n).map(|c| row.iter().zip(b).map(|(x, br)| x * br[c]).sum()).collect())
        .collect()
}

/// Dense oracle. Returns final embeddings and, when `wrt` is given, the
/// forward-mode Jacobian `d h_u / d x_wrt` for every u.
pub fn dense_forward(
    model: &RgcnReferenceModel,
    kg: &KnowledgeGraph,
    feats: &FeatureAssignment,
    wrt: Option<usize>,
) -> (Vec<Vec<f64>>, Vec<Mat>) {
    let n = kg.num_vertices();
    let d = model.dim;
    // adjacency a[rel][i][j] = number of edges j -> i for that relation
    let mut adj: BTreeMap<Relation, Vec<Vec<f64>>> = BTreeMap::new();
    for t in kg.triples() {
        let p = kg.predicate_iri(t.predicate).to_string();
        let fwd = adj
            .entry(Relation { predicate: p.clone(), inverse: false })
            .or_insert_with(|| vec![vec![0.0; n]; n]);
        fwd[t.object.index()][t.subject.index()] += 1.0;
        if model.inverse_relations {
            let inv = adj
                .entry(Relation { predicate: p, inverse: true })
                .or_insert_with(|| vec![vec![0.0; n]; n]);
            inv[t.subject.index()][t.object.index()] += 1.0;
        }
    }
    let mut h: Vec<Vec<f64>> = kg.vertices().map(|v| feats.get(kg.term(v)).unwrap().to_vec()).collect();
    let zero = vec![vec![0.0; d]; d];
    let eye: Mat = (0..d).map(|r| (0..d).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect();
    let mut jac: Vec<Mat> = (0..n).map(|i| if Some(i) == wrt { eye.clone() } else { zero.clone() }).collect();
    for layer in 0..model.layers {
        let w0 = weight(model, layer, None);
        let mut pre: Vec<Vec<f64>> = h.iter().map(|x| matvec(&w0, x)).collect();
        let mut dpre: Vec<Mat> = jac.iter().map(|j| matmul(&w0, j)).collect();
        for (rel, a) in &adj {
            let w = weight(model, layer, Some(rel));
            for i in 0..n {
                let c: f64 = a[i].iter().sum();
                if c == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if a[i][j] == 0.0 {
                        continue;
                    }
                    let m = matvec(&w, &h[j]);
                    let dm = matmul(&w, &jac[j]);
                    for r in 0..d {
                        pre[i][r] += a[i][j] * m[r] / c;
                        for k in 0..d {
                            dpre[i][r][k] += a[i][j] * dm[r][k] / c;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for r in 0..d {
                if pre[i][r] <= 0.0 {
                    pre[i][r] = 0.0;
                    dpre[i][r].fill(0.0);
                }
            }
        }
        h = pre;
        jac = dpre;
    }
    (h, jac)
}
