use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::kg::{KnowledgeGraph, PredicateId, Provenance, Subgraph, Term, TermTriple, Triple, VertexId};
use crate::kg::project_triples;

use super::bgp::{render_count, Branch, Header, Hop, Side};
use super::{BgpQuery, QueryJob, SparqlBackend, SparqlError};

type Rows = Arc<Vec<Triple>>;

/// In-process evaluation of generated BGPs by index lookups. Each branch is
/// enumerated once, sorted by `(s, p, o)` term order and cached, so pages
/// are plain slices.
pub struct LocalBackend<'a> {
    kg: &'a KnowledgeGraph,
    cache: Mutex<HashMap<String, Arc<OnceLock<Rows>>>>,
}

impl<'a> LocalBackend<'a> {
    pub fn new(kg: &'a KnowledgeGraph) -> Self {
        LocalBackend {
            kg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn rows(&self, bgp: &BgpQuery, branch: usize) -> Rows {
        let key = render_count(bgp, branch, None);
        let cell = self.cache.lock().unwrap().entry(key).or_default().clone();
        cell.get_or_init(|| Arc::new(branch_rows(self.kg, bgp, &bgp.branches[branch])))
            .clone()
    }
}

impl SparqlBackend for LocalBackend<'_> {
    fn id(&self) -> String {
        "local".to_string()
    }

    fn count(&self, bgp: &BgpQuery, branch: usize) -> Result<u64, SparqlError> {
        Ok(self.rows(bgp, branch).len() as u64)
    }

    fn fetch(&self, bgp: &BgpQuery, job: &QueryJob) -> Result<Vec<TermTriple>, SparqlError> {
        let rows = self.rows(bgp, job.branch);
        let start = (job.offset as usize).min(rows.len());
        let end = start.saturating_add(job.limit as usize).min(rows.len());
        Ok(rows[start..end].iter().map(|t| self.kg.term_triple(t)).collect())
    }
}

fn cmp_rows(kg: &KnowledgeGraph, a: &Triple, b: &Triple) -> Ordering {
    kg.term(a.subject)
        .cmp(kg.term(b.subject))
        .then_with(|| kg.predicate_iri(a.predicate).cmp(kg.predicate_iri(b.predicate)))
        .then_with(|| kg.term(a.object).cmp(kg.term(b.object)))
}

fn subjects_with(kg: &KnowledgeGraph, p: PredicateId, object: VertexId) -> impl Iterator<Item = VertexId> + '_ {
    kg.in_edges(object)
        .iter()
        .filter(move |(q, _)| *q == p)
        .map(|&(_, s)| s)
}

fn anchors(kg: &KnowledgeGraph, header: &Header, side: Side) -> Vec<VertexId> {
    let (Some(tp), Some(class)) = (
        kg.lookup_predicate(&header.type_predicate),
        kg.lookup(&Term::iri(header.target_type.as_str())),
    ) else {
        return Vec::new();
    };
    let mut typed: Vec<VertexId> = subjects_with(kg, tp, class).collect();
    typed.sort_unstable();
    typed.dedup();
    let Some((bridge, object_type)) = &header.bridge else {
        return typed;
    };
    let Some(pt) = kg.lookup_predicate(bridge) else {
        return Vec::new();
    };
    let object_class = match object_type {
        Some(t) => match kg.lookup(&Term::iri(t.as_str())) {
            Some(c) => Some(c),
            None => return Vec::new(),
        },
        None => None,
    };
    let object_ok = |u: VertexId| match object_class {
        Some(c) => kg.out_edges(u).iter().any(|&(q, o)| q == tp && o == c),
        None => true,
    };
    let mut out = Vec::new();
    for &v in &typed {
        let mut linked = kg
            .out_edges(v)
            .iter()
            .filter(|&&(q, u)| q == pt && object_ok(u))
            .map(|&(_, u)| u)
            .peekable();
        match side {
            Side::Subject => {
                if linked.peek().is_some() {
                    out.push(v);
                }
            }
            Side::Object => out.extend(linked),
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn hop_edges(kg: &KnowledgeGraph, x: VertexId, hop: Hop) -> impl Iterator<Item = Triple> + '_ {
    let (edges, out) = match hop {
        Hop::Out => (kg.out_edges(x), true),
        Hop::In => (kg.in_edges(x), false),
    };
    edges.iter().map(move |&(p, y)| {
        if out {
            Triple::new(x, p, y)
        } else {
            Triple::new(y, p, x)
        }
    })
}

fn far_end(t: &Triple, hop: Hop) -> VertexId {
    match hop {
        Hop::Out => t.object,
        Hop::In => t.subject,
    }
}

/// Solution multiset of one branch, sorted by term order.
pub(crate) fn branch_rows(kg: &KnowledgeGraph, bgp: &BgpQuery, branch: &Branch) -> Vec<Triple> {
    let tp = kg.lookup_predicate(&bgp.header.type_predicate);
    let mut rows = Vec::new();
    let mut frontier = anchors(kg, &bgp.header, branch.side);
    let (last, inner) = branch.hops.split_last().expect("branches have at least one hop");
    for &hop in inner {
        let mut next = Vec::new();
        for &x in &frontier {
            next.extend(
                hop_edges(kg, x, hop)
                    .filter(|t| Some(t.predicate) != tp)
                    .map(|t| far_end(&t, hop)),
            );
        }
        // multiset semantics: one entry per matching intermediate triple
        frontier = next;
    }
    for &x in &frontier {
        rows.extend(hop_edges(kg, x, *last));
    }
    rows.sort_unstable_by(|a, b| cmp_rows(kg, a, b));
    if bgp.distinct() {
        rows.dedup();
    }
    rows
}

/// Evaluates every branch without pagination and deduplicates.
pub fn local_bgp_match(kg: &KnowledgeGraph, bgp: &BgpQuery) -> Subgraph {
    let mut all: Vec<Triple> = bgp
        .branches
        .iter()
        .flat_map(|b| branch_rows(kg, bgp, b))
        .collect();
    all.sort_unstable();
    all.dedup();
    let graph = project_triples(kg, all);
    Subgraph::new(
        graph,
        Provenance::new("sparql")
            .with("d", bgp.d)
            .with("h", bgp.h)
            .with("backend", "local"),
    )
}
