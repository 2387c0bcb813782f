use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::graph::{project, KnowledgeGraph, VertexId};
use super::term::TermTriple;
use super::KgError;

/// Which engine produced a subgraph and with what parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: String,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(engine: impl Into<String>) -> Self {
        Provenance {
            engine: engine.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

/// An extracted graph `KG'` with its own dictionary.
#[derive(Clone, Debug)]
pub struct Subgraph {
    graph: KnowledgeGraph,
    provenance: Provenance,
}

impl Subgraph {
    pub fn new(graph: KnowledgeGraph, provenance: Provenance) -> Self {
        Subgraph { graph, provenance }
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn provenance_mut(&mut self) -> &mut Provenance {
        &mut self.provenance
    }

    pub fn into_graph(self) -> KnowledgeGraph {
        self.graph
    }

    /// Dictionary-independent view of the triple set.
    pub fn triple_set(&self) -> BTreeSet<TermTriple> {
        self.graph.term_triples().collect()
    }
}

impl Deref for Subgraph {
    type Target = KnowledgeGraph;

    fn deref(&self) -> &KnowledgeGraph {
        &self.graph
    }
}

impl KnowledgeGraph {
    /// Keeps every triple whose endpoints both lie in `vs`. With
    /// `keep_type_triples`, type assertions of members of `vs` are retained
    /// even when the class vertex is not in `vs`.
    pub fn induced_subgraph(
        &self,
        vs: impl IntoIterator<Item = VertexId>,
        keep_type_triples: bool,
    ) -> Result<Subgraph, KgError> {
        let mut member = vec![false; self.num_vertices()];
        for v in vs {
            if !self.contains_vertex(v) {
                return Err(KgError::UnknownVertex(v));
            }
            member[v.index()] = true;
        }
        let retained = self.triples().iter().copied().filter(|t| {
            member[t.subject.index()]
                && (member[t.object.index()]
                    || (keep_type_triples && self.is_type_predicate(t.predicate)))
        });
        let graph = project(self, retained);
        Ok(Subgraph::new(graph, Provenance::new("induced")))
    }

    /// Same graph, re-encoded as a subgraph of itself.
    pub fn to_subgraph(&self, provenance: Provenance) -> Subgraph {
        Subgraph::new(self.clone(), provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_ntriples, IngestOptions};

    fn kg(src: &str) -> KnowledgeGraph {
        ingest_ntriples(src.as_bytes(), &IngestOptions::default())
            .unwrap()
            .graph
    }

    const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

    #[test]
    fn all_vertices_is_identity() {
        let g = kg(&format!("<a> <p> <b> .\n<b> <p> <c> .\n<a> {TYPE} <T> .\n"));
        let sg = g.induced_subgraph(g.vertices(), false).unwrap();
        assert_eq!(sg.triple_set(), g.term_triples().collect());
    }

    #[test]
    fn path_endpoints_share_no_edge() {
        let g = kg(&format!("<a> <p> <b> .\n<b> <p> <c> .\n<a> {TYPE} <T> .\n"));
        let a = g.lookup_iri("a").unwrap();
        let c = g.lookup_iri("c").unwrap();
        let sg = g.induced_subgraph([a, c], false).unwrap();
        assert_eq!(sg.num_triples(), 0);
        let sg = g.induced_subgraph([a, c], true).unwrap();
        assert_eq!(sg.num_triples(), 1);
        assert_eq!(sg.num_node_types(), 1);
    }

    #[test]
    fn unknown_vertex_rejected() {
        let g = kg("<a> <p> <b> .\n");
        assert!(g.induced_subgraph([VertexId(5)], false).is_err());
    }
}
