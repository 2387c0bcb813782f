//! Biased random walk extraction.
//!
//! Walks are rooted only at target vertices. Every vertex a walk touches is
//! kept, and the result is the subgraph induced by the visited set.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::kg::{Direction, KnowledgeGraph, Provenance, Subgraph, VertexId};
use crate::task::{resolve_targets, TaskSpec};
use crate::SamplingError;

/// Walk direction: follow edges forward only, or in either direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkDirection {
    Outgoing,
    #[default]
    Both,
}

impl WalkDirection {
    pub fn as_direction(self) -> Direction {
        match self {
            WalkDirection::Outgoing => Direction::Outgoing,
            WalkDirection::Both => Direction::Both,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WalkDirection::Outgoing => "outgoing",
            WalkDirection::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrwParams {
    pub walk_length: usize,
    pub batch_size: usize,
    pub walks_per_seed: usize,
    pub seed: u64,
    pub direction: WalkDirection,
}

impl Default for BrwParams {
    fn default() -> Self {
        BrwParams {
            walk_length: 3,
            batch_size: 20_000,
            walks_per_seed: 1,
            seed: 0,
            direction: WalkDirection::Both,
        }
    }
}

impl BrwParams {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.walk_length == 0 || self.batch_size == 0 || self.walks_per_seed == 0 {
            return Err(SamplingError::InvalidParams(
                "walk_length, batch_size and walks_per_seed must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

// Stream 0 of the seed picks initial vertices; walk (i, j) uses stream
// 1 + (i << 24 | j), so adding walks per seed never perturbs earlier walks.
fn walk_rng(seed: u64, root: usize, walk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + (((root as u64) << 24) | walk as u64));
    rng
}

/// Uniformly picks `min(bs, |targets|)` distinct targets. Output is sorted.
pub fn get_initial_vertices(
    bs: usize,
    targets: &[VertexId],
    seed: u64,
) -> Result<Vec<VertexId>, SamplingError> {
    if targets.is_empty() {
        return Err(SamplingError::EmptyTargetSet);
    }
    let mut picked: Vec<VertexId> = if bs >= targets.len() {
        targets.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, targets.len(), bs)
            .into_iter()
            .map(|i| targets[i])
            .collect()
    };
    picked.sort_unstable();
    picked.dedup();
    Ok(picked)
}

/// Walks up to `h` steps from `v`, picking uniformly among the structural
/// neighbors (type assertions are not traversed). Stops early at a dead end.
/// Returns the visited vertices in walk order, starting with `v`.
pub fn random_walk_sample<R: Rng + ?Sized>(
    kg: &KnowledgeGraph,
    v: VertexId,
    h: usize,
    direction: WalkDirection,
    rng: &mut R,
) -> Vec<VertexId> {
    let dir = direction.as_direction();
    let mut path = Vec::with_capacity(h + 1);
    path.push(v);
    let mut current = v;
    let mut scratch = Vec::new();
    for _ in 0..h {
        scratch.clear();
        scratch.extend(kg.structural_neighbors(current, dir));
        if scratch.is_empty() {
            break;
        }
        current = scratch[rng.random_range(0..scratch.len())];
        path.push(current);
    }
    path
}

/// Vertex set `V_s` of the walk phase: initial vertices plus everything the
/// walks visited.
pub fn brw_vertex_set(
    kg: &KnowledgeGraph,
    targets: &[VertexId],
    params: &BrwParams,
) -> Result<Vec<VertexId>, SamplingError> {
    params.validate()?;
    let initial = get_initial_vertices(params.batch_size, targets, params.seed)?;
    let visited: BTreeSet<VertexId> = initial
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &root)| {
            (0..params.walks_per_seed).flat_map(move |j| {
                let mut rng = walk_rng(params.seed, i, j);
                random_walk_sample(kg, root, params.walk_length, params.direction, &mut rng)
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(visited.into_iter().collect())
}

pub fn brw_extract(
    kg: &KnowledgeGraph,
    task: &TaskSpec,
    params: &BrwParams,
) -> Result<Subgraph, SamplingError> {
    let targets = resolve_targets(kg, task)?.vertices;
    let vs = brw_vertex_set(kg, &targets, params)?;
    let mut sg = kg.induced_subgraph(vs, true)?;
    *sg.provenance_mut() = Provenance::new("brw")
        .with("h", params.walk_length)
        .with("bs", params.batch_size)
        .with("walks_per_seed", params.walks_per_seed)
        .with("seed", params.seed)
        .with("direction", params.direction.as_str());
    Ok(sg)
}
