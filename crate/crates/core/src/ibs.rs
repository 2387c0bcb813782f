//! Influence-based extraction.
//!
//! Influence of a vertex on a target is approximated by personalized
//! PageRank computed with forward push on the untyped projection of the
//! graph. Each target keeps its `k` most influential neighbors; a partition
//! of `bs` targets with overlapping neighborhoods is then assembled and the
//! induced subgraph returned.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::brw::WalkDirection;
use crate::kg::{KnowledgeGraph, Provenance, Subgraph, VertexId};
use crate::task::{resolve_targets, TaskSpec};
use crate::SamplingError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PprParams {
    /// Teleport probability.
    pub alpha: f64,
    /// Per-degree residual tolerance.
    pub epsilon: f64,
    pub direction: WalkDirection,
}

impl Default for PprParams {
    fn default() -> Self {
        PprParams {
            alpha: 0.25,
            epsilon: 0.0002,
            direction: WalkDirection::Both,
        }
    }
}

impl PprParams {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SamplingError::InvalidParams("alpha must lie in (0, 1)".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(SamplingError::InvalidParams("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Homogeneous view used for push: predicates dropped, type assertions
/// removed, parallel edges kept as repeated neighbors.
#[derive(Clone, Debug)]
pub struct ProjectedGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
}

impl ProjectedGraph {
    pub fn new(kg: &KnowledgeGraph, direction: WalkDirection) -> Self {
        let dir = direction.as_direction();
        let mut offsets = Vec::with_capacity(kg.num_vertices() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for v in kg.vertices() {
            neighbors.extend(kg.structural_neighbors(v, dir));
            offsets.push(neighbors.len());
        }
        ProjectedGraph { offsets, neighbors }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }
}

/// Estimate and residual vectors left by forward push.
#[derive(Clone, Debug)]
pub struct PushState {
    pub source: VertexId,
    pub estimate: HashMap<VertexId, f64>,
    pub residual: HashMap<VertexId, f64>,
    pub pushes: usize,
}

#[derive(PartialEq)]
struct Candidate {
    ratio: f64,
    vertex: VertexId,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio
            .total_cmp(&other.ratio)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Forward push from `source`.
///
/// Repeatedly pushes the vertex with the largest `r(u) / deg(u)` (ties to the
/// smaller id) while `r(u) >= epsilon * deg(u)`. A vertex without neighbors
/// sends its non-teleported residual back to the source; its threshold uses
/// degree 1.
pub fn forward_push(graph: &ProjectedGraph, source: VertexId, params: &PprParams) -> PushState {
    let alpha = params.alpha;
    let eps = params.epsilon;
    let eff_deg = |v: VertexId| graph.degree(v).max(1) as f64;
    let mut estimate: HashMap<VertexId, f64> = HashMap::new();
    let mut residual: HashMap<VertexId, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    residual.insert(source, 1.0);
    heap.push(Candidate {
        ratio: 1.0 / eff_deg(source),
        vertex: source,
    });
    let mut pushes = 0;
    let mut touched: Vec<VertexId> = Vec::new();

    while let Some(Candidate { ratio, vertex: u }) = heap.pop() {
        let r = residual.get(&u).copied().unwrap_or(0.0);
        let d = eff_deg(u);
        if r < eps * d || r / d != ratio {
            continue;
        }
        pushes += 1;
        *estimate.entry(u).or_insert(0.0) += alpha * r;
        residual.insert(u, 0.0);
        let spread = (1.0 - alpha) * r;
        let neighbors = graph.neighbors(u);
        touched.clear();
        if neighbors.is_empty() {
            *residual.entry(source).or_insert(0.0) += spread;
            touched.push(source);
        } else {
            let share = spread / neighbors.len() as f64;
            for &w in neighbors {
                *residual.entry(w).or_insert(0.0) += share;
            }
            touched.extend_from_slice(neighbors);
            touched.dedup();
        }
        for &w in &touched {
            let rw = residual[&w];
            let dw = eff_deg(w);
            if rw >= eps * dw {
                heap.push(Candidate {
                    ratio: rw / dw,
                    vertex: w,
                });
            }
        }
    }
    residual.retain(|_, r| *r != 0.0);
    PushState {
        source,
        estimate,
        residual,
        pushes,
    }
}

/// Sparse influence of every vertex on one source, sorted by vertex id.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceScores {
    pub source: VertexId,
    pub scores: Vec<(VertexId, f64)>,
}

impl InfluenceScores {
    fn from_state(state: &PushState) -> Self {
        let mut scores: Vec<(VertexId, f64)> = state
            .estimate
            .iter()
            .filter(|(_, s)| **s > 0.0)
            .map(|(v, s)| (*v, *s))
            .collect();
        scores.sort_unstable_by_key(|(v, _)| *v);
        InfluenceScores {
            source: state.source,
            scores,
        }
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.scores
            .binary_search_by_key(&v, |(u, _)| *u)
            .map(|i| self.scores[i].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.scores.iter().map(|(_, s)| s).sum()
    }
}

pub fn approximate_ppr(
    kg: &KnowledgeGraph,
    source: VertexId,
    params: &PprParams,
) -> Result<InfluenceScores, SamplingError> {
    params.validate()?;
    if !kg.contains_vertex(source) {
        return Err(SamplingError::Kg(crate::kg::KgError::UnknownVertex(source)));
    }
    let graph = ProjectedGraph::new(kg, params.direction);
    Ok(InfluenceScores::from_state(&forward_push(&graph, source, params)))
}

pub fn influence_scores(
    kg: &KnowledgeGraph,
    targets: &[VertexId],
    params: &PprParams,
) -> Result<Vec<InfluenceScores>, SamplingError> {
    params.validate()?;
    let graph = ProjectedGraph::new(kg, params.direction);
    influence_scores_on(&graph, targets, params)
}

fn influence_scores_on(
    graph: &ProjectedGraph,
    targets: &[VertexId],
    params: &PprParams,
) -> Result<Vec<InfluenceScores>, SamplingError> {
    if targets.is_empty() {
        return Err(SamplingError::EmptyTargetSet);
    }
    let mut seen = HashSet::with_capacity(targets.len());
    for &t in targets {
        if t.index() >= graph.num_vertices() {
            return Err(SamplingError::Kg(crate::kg::KgError::UnknownVertex(t)));
        }
        if !seen.insert(t) {
            return Err(SamplingError::DuplicateTarget(t));
        }
    }
    Ok(targets
        .par_iter()
        .map(|&t| InfluenceScores::from_state(&forward_push(graph, t, params)))
        .collect())
}

/// For each target, its `k` highest-scored vertices other than itself
/// (ties to the smaller id). Vertices with zero score are never selected.
pub fn select_topk(
    targets: &[VertexId],
    scores: &[InfluenceScores],
    k: usize,
) -> Vec<(VertexId, VertexId)> {
    let by_source: HashMap<VertexId, &InfluenceScores> =
        scores.iter().map(|s| (s.source, s)).collect();
    let mut pairs = Vec::new();
    for &t in targets {
        let Some(s) = by_source.get(&t) else { continue };
        let mut ranked: Vec<(VertexId, f64)> = s
            .scores
            .iter()
            .copied()
            .filter(|&(v, score)| v != t && score > 0.0)
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        pairs.extend(ranked.into_iter().take(k).map(|(v, _)| (t, v)));
    }
    pairs
}

/// Assembles a partition of up to `bs` targets.
///
/// Starting from a seeded random target, the target whose `{t} ∪ topk(t)`
/// overlaps most with the vertices accumulated so far is added next (ties to
/// the smaller id). The result contains the chosen targets, their top-k
/// vertices, and the vertices of one shortest connecting path from each
/// target to each of its top-k vertices, so every member stays connected to
/// a target inside the induced subgraph.
pub fn build_partition(
    kg: &KnowledgeGraph,
    targets: &[VertexId],
    pairs: &[(VertexId, VertexId)],
    bs: usize,
    seed: u64,
    direction: WalkDirection,
) -> Vec<VertexId> {
    let graph = ProjectedGraph::new(kg, direction);
    build_partition_on(&graph, targets, pairs, bs, seed)
}

fn build_partition_on(
    graph: &ProjectedGraph,
    targets: &[VertexId],
    pairs: &[(VertexId, VertexId)],
    bs: usize,
    seed: u64,
) -> Vec<VertexId> {
    let mut sorted_targets = targets.to_vec();
    sorted_targets.sort_unstable();
    sorted_targets.dedup();
    if sorted_targets.is_empty() || bs == 0 {
        return Vec::new();
    }
    let mut topk: BTreeMap<VertexId, Vec<VertexId>> =
        sorted_targets.iter().map(|&t| (t, Vec::new())).collect();
    for &(t, v) in pairs {
        if let Some(list) = topk.get_mut(&t) {
            list.push(v);
        }
    }

    let selected: Vec<VertexId> = if bs >= sorted_targets.len() {
        sorted_targets.clone()
    } else {
        greedy_overlap(&sorted_targets, &topk, bs, seed)
    };

    let mut members: HashSet<VertexId> = HashSet::new();
    for t in &selected {
        members.insert(*t);
        let wanted = &topk[t];
        members.extend(wanted.iter().copied());
        members.extend(connecting_paths(graph, *t, wanted));
    }
    let mut out: Vec<VertexId> = members.into_iter().collect();
    out.sort_unstable();
    out
}

fn greedy_overlap(
    targets: &[VertexId],
    topk: &BTreeMap<VertexId, Vec<VertexId>>,
    bs: usize,
    seed: u64,
) -> Vec<VertexId> {
    let footprint = |t: VertexId| std::iter::once(t).chain(topk[&t].iter().copied());
    let mut holders: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &t in targets {
        for v in footprint(t) {
            holders.entry(v).or_default().push(t);
        }
    }
    let mut overlap: HashMap<VertexId, usize> = HashMap::new();
    let mut chosen: HashSet<VertexId> = HashSet::new();
    let mut accumulated: HashSet<VertexId> = HashSet::new();
    // max-heap on (overlap, smaller id)
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<VertexId>)> = BinaryHeap::new();
    let mut order = Vec::with_capacity(bs);
    let mut fallback = 0usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = targets[rng.random_range(0..targets.len())];
    loop {
        chosen.insert(next);
        order.push(next);
        if order.len() == bs {
            break;
        }
        for v in footprint(next) {
            if accumulated.insert(v) {
                for &c in &holders[&v] {
                    if !chosen.contains(&c) {
                        let e = overlap.entry(c).or_insert(0);
                        *e += 1;
                        heap.push((*e, std::cmp::Reverse(c)));
                    }
                }
            }
        }
        let mut pick = None;
        while let Some((count, std::cmp::Reverse(c))) = heap.pop() {
            if !chosen.contains(&c) && overlap.get(&c) == Some(&count) {
                pick = Some(c);
                break;
            }
        }
        next = match pick {
            Some(c) => c,
            None => {
                while chosen.contains(&targets[fallback]) {
                    fallback += 1;
                }
                targets[fallback]
            }
        };
    }
    order
}

/// Vertices on BFS shortest paths from `from` to each of `to`.
fn connecting_paths(graph: &ProjectedGraph, from: VertexId, to: &[VertexId]) -> Vec<VertexId> {
    let mut remaining: HashSet<VertexId> = to.iter().copied().filter(|&v| v != from).collect();
    if remaining.is_empty() {
        return Vec::new();
    }
    let goals: Vec<VertexId> = remaining.iter().copied().collect();
    let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
    parent.insert(from, from);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in graph.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(u);
                remaining.remove(&w);
                queue.push_back(w);
            }
        }
        if remaining.is_empty() {
            break;
        }
    }
    let mut path = Vec::new();
    for g in goals {
        let mut cur = g;
        while let Some(&p) = parent.get(&cur) {
            if p == cur {
                break;
            }
            path.push(p);
            cur = p;
        }
    }
    path
}

#[derive(Clone, Debug, PartialEq)]
pub struct IbsParams {
    pub batch_size: usize,
    pub top_k: usize,
    pub ppr: PprParams,
    pub seed: u64,
}

impl Default for IbsParams {
    fn default() -> Self {
        IbsParams {
            batch_size: 20_000,
            top_k: 16,
            ppr: PprParams::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IbsOutcome {
    pub subgraph: Subgraph,
    pub scores: Vec<InfluenceScores>,
}

pub fn ibs_extract(
    kg: &KnowledgeGraph,
    task: &TaskSpec,
    params: &IbsParams,
) -> Result<Subgraph, SamplingError> {
    ibs_extract_with_scores(kg, task, params).map(|o| o.subgraph)
}

pub fn ibs_extract_with_scores(
    kg: &KnowledgeGraph,
    task: &TaskSpec,
    params: &IbsParams,
) -> Result<IbsOutcome, SamplingError> {
    params.ppr.validate()?;
    if params.batch_size == 0 || params.top_k == 0 {
        return Err(SamplingError::InvalidParams(
            "batch_size and top_k must be >= 1".into(),
        ));
    }
    let targets = resolve_targets(kg, task)?.vertices;
    let graph = ProjectedGraph::new(kg, params.ppr.direction);
    let scores = influence_scores_on(&graph, &targets, &params.ppr)?;
    let pairs = select_topk(&targets, &scores, params.top_k);
    let partition = build_partition_on(&graph, &targets, &pairs, params.batch_size, params.seed);
    let mut subgraph = kg.induced_subgraph(partition, true)?;
    *subgraph.provenance_mut() = Provenance::new("ibs")
        .with("bs", params.batch_size)
        .with("k", params.top_k)
        .with("alpha", params.ppr.alpha)
        .with("epsilon", params.ppr.epsilon)
        .with("direction", params.ppr.direction.as_str())
        .with("seed", params.seed);
    Ok(IbsOutcome { subgraph, scores })
}

/// `source \t vertex \t score` rows for every target.
pub fn write_scores_tsv<W: std::io::Write>(
    kg: &KnowledgeGraph,
    scores: &[InfluenceScores],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "source\tvertex\tscore")?;
    for s in scores {
        for &(v, score) in &s.scores {
            writeln!(w, "{}\t{}\t{score:e}", kg.term(s.source), kg.term(v))?;
        }
    }
    w.flush()
}
