//! Deterministic reference RGCN forward pass.
//!
//! Used only to check extraction, never to train. Weights and features are
//! derived from a seed and the IRI / term text, so the same vertex gets the
//! same inputs in a graph and in any of its subgraphs. Neighbors are reduced
//! in term order and relations in IRI order, which makes results
//! bit-for-bit reproducible across dictionaries.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::kg::{KgError, KnowledgeGraph, PredicateId, Subgraph, Term, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum RgcnError {
    #[error("no feature vector for {0}")]
    MissingFeature(Term),
    #[error("feature of {term} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        term: Term,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Relation of a message: a predicate, followed forward or (when inverse
/// relations are enabled) backward.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub predicate: String,
    pub inverse: bool,
}

/// Square `dim x dim` matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }
}

fn derived_rng(parts: &[&[u8]]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RgcnReferenceModel {
    pub layers: usize,
    pub dim: usize,
    pub seed: u64,
    /// Also pass messages against edge direction, with separate weights.
    pub inverse_relations: bool,
}

impl RgcnReferenceModel {
    pub fn new(layers: usize, dim: usize, seed: u64) -> Self {
        RgcnReferenceModel {
            layers,
            dim,
            seed,
            inverse_relations: true,
        }
    }

    fn matrix(&self, parts: &[&[u8]]) -> Matrix {
        let mut rng = derived_rng(parts);
        let data = (0..self.dim * self.dim)
            .map(|_| rng.random_range(-0.5..=0.5))
            .collect();
        Matrix {
            dim: self.dim,
            data,
        }
    }

    /// `W_r` of `layer`, uniform in [-0.5, 0.5].
    pub fn relation_weight(&self, layer: usize, relation: &Relation) -> Matrix {
        let dir: &[u8] = if relation.inverse { b"inv" } else { b"fwd" };
        self.matrix(&[
            b"relation",
            &self.seed.to_le_bytes(),
            &(layer as u64).to_le_bytes(),
            dir,
            relation.predicate.as_bytes(),
        ])
    }

    /// Self-loop weight `W_0` of `layer`.
    pub fn self_weight(&self, layer: usize) -> Matrix {
        self.matrix(&[b"self", &self.seed.to_le_bytes(), &(layer as u64).to_le_bytes()])
    }
}

/// Input vectors keyed by term.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureAssignment {
    pub dim: usize,
    vectors: HashMap<Term, Vec<f64>>,
}

impl FeatureAssignment {
    pub fn new(dim: usize) -> Self {
        FeatureAssignment {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Uniform in [-1, 1], derived from `seed` and the term text.
    pub fn seeded(kg: &KnowledgeGraph, dim: usize, seed: u64) -> Self {
        let mut f = FeatureAssignment::new(dim);
        for v in kg.vertices() {
            let term = kg.term(v);
            let mut rng = derived_rng(&[b"feature", &seed.to_le_bytes(), term.to_string().as_bytes()]);
            let x = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            f.vectors.insert(term.clone(), x);
        }
        f
    }

    pub fn constant(kg: &KnowledgeGraph, dim: usize, value: f64) -> Self {
        let mut f = FeatureAssignment::new(dim);
        for v in kg.vertices() {
            f.vectors.insert(kg.term(v).clone(), vec![value; dim]);
        }
        f
    }

    pub fn insert(&mut self, term: Term, x: Vec<f64>) {
        self.vectors.insert(term, x);
    }

    pub fn get(&self, term: &Term) -> Option<&[f64]> {
        self.vectors.get(term).map(Vec::as_slice)
    }

    pub fn get_mut(&mut self, term: &Term) -> Option<&mut Vec<f64>> {
        self.vectors.get_mut(term)
    }
}

/// Output of the last layer, indexed by vertex id of the evaluated graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    pub vectors: Vec<Vec<f64>>,
}

impl Embeddings {
    pub fn get(&self, v: VertexId) -> &[f64] {
        &self.vectors[v.index()]
    }
}

struct MessagePlan {
    relations: Vec<Relation>,
    /// Per vertex: (relation index, sorted sources).
    incoming: Vec<Vec<(usize, Vec<VertexId>)>>,
}

fn message_plan(kg: &KnowledgeGraph, inverse: bool) -> MessagePlan {
    let mut keys: Vec<(Relation, PredicateId, bool)> = kg
        .predicates()
        .flat_map(|p| {
            let iri = kg.predicate_iri(p).to_string();
            let fwd = (Relation { predicate: iri.clone(), inverse: false }, p, false);
            let inv = inverse.then(|| (Relation { predicate: iri, inverse: true }, p, true));
            std::iter::once(fwd).chain(inv)
        })
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let index: HashMap<(PredicateId, bool), usize> = keys
        .iter()
        .enumerate()
        .map(|(i, (_, p, inv))| ((*p, *inv), i))
        .collect();
    let mut incoming = Vec::with_capacity(kg.num_vertices());
    for v in kg.vertices() {
        let mut groups: HashMap<usize, Vec<VertexId>> = HashMap::new();
        for &(p, s) in kg.in_edges(v) {
            groups.entry(index[&(p, false)]).or_default().push(s);
        }
        if inverse {
            for &(p, o) in kg.out_edges(v) {
                groups.entry(index[&(p, true)]).or_default().push(o);
            }
        }
        let mut groups: Vec<(usize, Vec<VertexId>)> = groups.into_iter().collect();
        groups.sort_unstable_by_key(|g| g.0);
        for (_, sources) in &mut groups {
            sources.sort_by(|a, b| kg.term(*a).cmp(kg.term(*b)));
        }
        incoming.push(groups);
    }
    MessagePlan {
        relations: keys.into_iter().map(|k| k.0).collect(),
        incoming,
    }
}

/// `h_i' = relu( sum_r sum_{j in N_i^r} W_r h_j / |N_i^r| + W_0 h_i )`,
/// applied `layers` times.
pub fn rgcn_forward(
    model: &RgcnReferenceModel,
    sg: &KnowledgeGraph,
    feats: &FeatureAssignment,
) -> Result<Embeddings, RgcnError> {
    let d = model.dim;
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(sg.num_vertices());
    for v in sg.vertices() {
        let term = sg.term(v);
        let x = feats
            .get(term)
            .ok_or_else(|| RgcnError::MissingFeature(term.clone()))?;
        if x.len() != d {
            return Err(RgcnError::DimensionMismatch {
                term: term.clone(),
                found: x.len(),
                expected: d,
            });
        }
        h.push(x.to_vec());
    }
    if model.layers == 0 {
        return Ok(Embeddings { vectors: h });
    }
    let plan = message_plan(sg, model.inverse_relations);
    let mut tmp = vec![0.0; d];
    let mut rel_sum = vec![0.0; d];
    for layer in 0..model.layers {
        let w0 = model.self_weight(layer);
        let weights: Vec<Matrix> = plan
            .relations
            .iter()
            .map(|r| model.relation_weight(layer, r))
            .collect();
        let mut next = Vec::with_capacity(h.len());
        for (i, groups) in plan.incoming.iter().enumerate() {
            let mut acc = vec![0.0; d];
            w0.mul_vec(&h[i], &mut acc);
            for (r, sources) in groups {
                rel_sum.fill(0.0);
                for j in sources {
                    weights[*r].mul_vec(&h[j.index()], &mut tmp);
                    for (s, t) in rel_sum.iter_mut().zip(&tmp) {
                        *s += t;
                    }
                }
                let c = sources.len() as f64;
                for (a, s) in acc.iter_mut().zip(&rel_sum) {
                    *a += s / c;
                }
            }
            for a in &mut acc {
                *a = a.max(0.0);
            }
            next.push(acc);
        }
        h = next;
    }
    Ok(Embeddings { vectors: h })
}

/// Central finite-difference estimate of `sum_ij |d h_u,i / d X_v,j|`.
pub fn influence_fd(
    model: &RgcnReferenceModel,
    sg: &KnowledgeGraph,
    feats: &FeatureAssignment,
    v: VertexId,
    u: VertexId,
    step: f64,
) -> Result<f64, RgcnError> {
    for x in [v, u] {
        if !sg.contains_vertex(x) {
            return Err(KgError::UnknownVertex(x).into());
        }
    }
    let term = sg.term(v).clone();
    let mut work = feats.clone();
    if work.get(&term).is_none() {
        return Err(RgcnError::MissingFeature(term));
    }
    let mut total = 0.0;
    for j in 0..model.dim {
        let base = work.get(&term).unwrap()[j];
        work.get_mut(&term).unwrap()[j] = base + step;
        let plus = rgcn_forward(model, sg, &work)?;
        work.get_mut(&term).unwrap()[j] = base - step;
        let minus = rgcn_forward(model, sg, &work)?;
        work.get_mut(&term).unwrap()[j] = base;
        total += plus
            .get(u)
            .iter()
            .zip(minus.get(u))
            .map(|(a, b)| ((a - b) / (2.0 * step)).abs())
            .sum::<f64>();
    }
    Ok(total)
}

/// Vertices with a message path of at most `layers` hops into a target,
/// i.e. everything the targets' final embeddings can depend on.
pub fn message_passing_scope(
    sg: &KnowledgeGraph,
    targets: &[VertexId],
    layers: usize,
    inverse_relations: bool,
) -> Vec<VertexId> {
    let mut dist: Vec<Option<usize>> = vec![None; sg.num_vertices()];
    let mut queue = VecDeque::new();
    for &t in targets {
        if sg.contains_vertex(t) && dist[t.index()].is_none() {
            dist[t.index()] = Some(0);
            queue.push_back(t);
        }
    }
    while let Some(x) = queue.pop_front() {
        let d = dist[x.index()].unwrap();
        if d == layers {
            continue;
        }
        let sources = sg.in_edges(x).iter().map(|&(_, s)| s);
        let inverse: &[(PredicateId, VertexId)] = if inverse_relations { sg.out_edges(x) } else { &[] };
        for y in sources.chain(inverse.iter().map(|&(_, o)| o)) {
            if dist[y.index()].is_none() {
                dist[y.index()] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    sg.vertices().filter(|v| dist[v.index()].is_some()).collect()
}

/// Drops every vertex outside [`message_passing_scope`].
pub fn prune_to_scope(
    sg: &KnowledgeGraph,
    targets: &[VertexId],
    layers: usize,
    inverse_relations: bool,
) -> Result<Subgraph, RgcnError> {
    let keep = message_passing_scope(sg, targets, layers, inverse_relations);
    Ok(sg.induced_subgraph(keep, false)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruningCheck {
    pub kept_vertices: usize,
    pub removed_vertices: usize,
    pub targets_compared: usize,
    /// Largest absolute coordinate difference over target embeddings.
    pub max_delta: f64,
    pub bit_identical: bool,
}

/// Runs the model on `sg` and on its pruned version and compares the
/// target embeddings.
pub fn check_pruning_invariance(
    model: &RgcnReferenceModel,
    sg: &KnowledgeGraph,
    targets: &[VertexId],
    feats: &FeatureAssignment,
) -> Result<PruningCheck, RgcnError> {
    let pruned = prune_to_scope(sg, targets, model.layers, model.inverse_relations)?;
    let full = rgcn_forward(model, sg, feats)?;
    let small = rgcn_forward(model, &pruned, feats)?;
    let mut max_delta: f64 = 0.0;
    let mut identical = true;
    let mut compared = 0;
    for &t in targets {
        // an isolated target can vanish when it has no triples at all
        let Some(p) = pruned.lookup(sg.term(t)) else { continue };
        compared += 1;
        for (a, b) in full.get(t).iter().zip(small.get(p)) {
            identical &= a.to_bits() == b.to_bits();
            max_delta = max_delta.max((a - b).abs());
        }
    }
    Ok(PruningCheck {
        kept_vertices: pruned.num_vertices(),
        removed_vertices: sg.num_vertices() - pruned.num_vertices(),
        targets_compared: compared,
        max_delta,
        bit_identical: identical,
    })
}
