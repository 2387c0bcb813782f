//! Query-based extraction.
//!
//! A task and the `(d, h)` parameters become a set of basic graph pattern
//! branches. Each branch is counted, split into `LIMIT`/`OFFSET` pages and
//! fetched by a pool of workers, either from a remote endpoint or from the
//! in-process matcher. The merged rows are deduplicated into a [`Subgraph`].

mod bgp;
mod http;
mod local;
mod plan;
pub mod tsv;

pub use bgp::{get_bgp, get_bgp_with, render_count, render_page, BgpQuery, Branch, Header, Hop, Side};
pub use http::{EndpointConfig, HttpBackend};
pub use local::{local_bgp_match, LocalBackend};
pub use plan::{
    execute_plan, execution_planner, get_graph_size, resume_plan, PartialResult, QueryBatchPlan,
    QueryJob,
};

use crate::kg::{GraphBuilder, KgError, KnowledgeGraph, Provenance, Subgraph, TermTriple};
use crate::task::{TaskError, TaskSpec};

#[derive(Debug, thiserror::Error)]
pub enum SparqlError {
    #[error("unsupported parameters: {0}")]
    UnsupportedParams(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("query rejected with status {status}: {body}")]
    QueryRejected { status: u16, body: String },
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("job {index} (branch {}, offset {}) failed: {cause}", job.branch, job.offset)]
    JobFailed {
        index: usize,
        job: QueryJob,
        cause: Box<SparqlError>,
        partial: Box<PartialResult>,
    },
}

/// Source of branch counts and pages.
pub trait SparqlBackend: Sync {
    fn id(&self) -> String;
    fn count(&self, bgp: &BgpQuery, branch: usize) -> Result<u64, SparqlError>;
    fn fetch(&self, bgp: &BgpQuery, job: &QueryJob) -> Result<Vec<TermTriple>, SparqlError>;
}

pub enum Backend<'a> {
    Endpoint(EndpointConfig),
    Local(&'a KnowledgeGraph),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparqlParams {
    /// 1: outgoing predicates only, 2: outgoing and incoming.
    pub d: u8,
    /// Hop radius, 1 or 2.
    pub h: u8,
    pub batch_size: u64,
    pub workers: usize,
}

impl Default for SparqlParams {
    fn default() -> Self {
        SparqlParams {
            d: 1,
            h: 1,
            batch_size: 20_000,
            workers: 4,
        }
    }
}

/// Set-deduplicates a row multiset into a fresh subgraph.
pub fn drop_duplicates(
    rows: impl IntoIterator<Item = TermTriple>,
    type_predicate: &str,
) -> Result<Subgraph, SparqlError> {
    let mut builder = GraphBuilder::new(type_predicate);
    for t in rows {
        builder.add_triple(t)?;
    }
    Ok(Subgraph::new(builder.finish(), Provenance::new("sparql")))
}

pub fn sparql_extract(
    backend: Backend<'_>,
    task: &TaskSpec,
    params: &SparqlParams,
) -> Result<Subgraph, SparqlError> {
    match backend {
        Backend::Local(kg) => {
            let local = LocalBackend::new(kg);
            extract_with(&local, kg.type_predicate_iri(), task, params)
        }
        Backend::Endpoint(config) => {
            let tp = config.type_predicate.clone();
            let http = HttpBackend::new(config)?;
            extract_with(&http, &tp, task, params)
        }
    }
}

/// The full pipeline against any backend.
pub fn extract_with(
    backend: &dyn SparqlBackend,
    type_predicate: &str,
    task: &TaskSpec,
    params: &SparqlParams,
) -> Result<Subgraph, SparqlError> {
    let bgp = get_bgp_with(task, params.d, params.h, type_predicate)?;
    let counts = get_graph_size(backend, &bgp)?;
    let plan = execution_planner(&bgp, &counts, params.batch_size)?;
    log::info!(
        "{} jobs over {} branches, about {} rows",
        plan.jobs.len(),
        bgp.branches.len(),
        plan.estimated_rows()
    );
    let rows = execute_plan(backend, &bgp, &plan, params.workers)?;
    let mut sg = drop_duplicates(rows, type_predicate)?;
    *sg.provenance_mut() = Provenance::new("sparql")
        .with("d", params.d)
        .with("h", params.h)
        .with("bs", params.batch_size)
        .with("workers", params.workers)
        .with("backend", backend.id());
    Ok(sg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_ntriples, IngestOptions, Term};

    const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

    fn kg(src: &str) -> KnowledgeGraph {
        ingest_ntriples(src.as_bytes(), &IngestOptions::default())
            .unwrap()
            .graph
    }

    fn params(d: u8, h: u8, bs: u64) -> SparqlParams {
        SparqlParams {
            d,
            h,
            batch_size: bs,
            workers: 2,
        }
    }

    #[test]
    fn star_d1h1() {
        let mut src = format!("<hub> {TYPE} <T> .\n<x> <p> <hub> .\n");
        for i in 0..4 {
            src += &format!("<hub> <p> <l{i}> .\n");
        }
        let g = kg(&src);
        let task = TaskSpec::node_classification("T", "p");
        let sg = sparql_extract(Backend::Local(&g), &task, &params(1, 1, 2)).unwrap();
        assert_eq!(sg.num_triples(), 5);
        assert!(sg.lookup_iri("x").is_none());
        assert_eq!(sg.provenance().params["backend"], "local");
    }

    #[test]
    fn path_d2h1_gets_both_sides() {
        let g = kg(&format!("<a> <p> <t> .\n<t> <p> <b> .\n<t> {TYPE} <T> .\n"));
        let task = TaskSpec::node_classification("T", "p");
        let sg = sparql_extract(Backend::Local(&g), &task, &params(2, 1, 1)).unwrap();
        assert_eq!(sg.num_triples(), 3);
    }

    #[test]
    fn duplicates_dropped() {
        let t = TermTriple::new(Term::iri("a"), "p", Term::iri("b"));
        let sg = drop_duplicates(std::iter::repeat_n(t, 5), crate::kg::RDF_TYPE).unwrap();
        assert_eq!(sg.num_triples(), 1);
        assert_eq!(drop_duplicates([], crate::kg::RDF_TYPE).unwrap().num_triples(), 0);
    }

    #[test]
    fn empty_graph_counts_zero() {
        let g = KnowledgeGraph::empty(crate::kg::RDF_TYPE);
        let bgp = get_bgp(&TaskSpec::node_classification("T", "p"), 2, 2).unwrap();
        let counts = get_graph_size(&LocalBackend::new(&g), &bgp).unwrap();
        assert_eq!(counts, vec![0; 6]);
        assert_eq!(local_bgp_match(&g, &bgp).num_triples(), 0);
    }

    #[test]
    fn link_prediction_anchors_both_ends() {
        let g = kg(&format!(
            "<a> {TYPE} <A> .\n<b> {TYPE} <B> .\n<a> <cites> <b> .\n<b> <q> <z> .\n<c> {TYPE} <A> .\n<c> <r> <w> .\n"
        ));
        let task = TaskSpec::link_prediction("A", "cites", Some("B"));
        let sg = sparql_extract(Backend::Local(&g), &task, &params(1, 1, 3)).unwrap();
        // a's two triples and b's two; c has no link
        assert_eq!(sg.num_triples(), 4);
        assert!(sg.lookup_iri("c").is_none());
        let bgp = get_bgp(&task, 2, 1).unwrap();
        assert_eq!(bgp.text.matches("<cites>").count(), 1);
    }
}
