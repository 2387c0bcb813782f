use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use super::term::{Term, TermKind, TermTriple};
use super::KgError;

macro_rules! handle {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

handle!(
    /// Dense handle for an IRI, blank node or literal.
    VertexId
);
handle!(
    /// Dense handle for a predicate IRI.
    PredicateId
);
handle!(
    /// Dense handle for a class IRI used as object of the type predicate.
    NodeTypeId
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: VertexId,
    pub predicate: PredicateId,
    pub object: VertexId,
}

impl Triple {
    pub fn new(subject: VertexId, predicate: PredicateId, object: VertexId) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Outgoing,
    Incoming,
    Both,
}

/// Compressed adjacency: `edges[offsets[v]..offsets[v + 1]]`.
#[derive(Clone, Debug, Default)]
struct Csr<T> {
    offsets: Vec<usize>,
    edges: Vec<T>,
}

impl<T: Copy> Csr<T> {
    fn from_sorted(n: usize, keyed: impl Iterator<Item = (usize, T)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut edges = Vec::new();
        for (k, e) in keyed {
            offsets[k + 1] += 1;
            edges.push(e);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, edges }
    }

    #[inline]
    fn row(&self, v: usize) -> &[T] {
        &self.edges[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Immutable typed multigraph with dictionary-encoded terms.
///
/// Triples are deduplicated and kept sorted by `(subject, predicate, object)`.
/// Adjacency lists are sorted by `(predicate, endpoint)`, so iteration is
/// deterministic for a given input byte stream.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    terms: Vec<Term>,
    term_index: HashMap<Term, VertexId>,
    predicates: Vec<Arc<str>>,
    predicate_index: HashMap<Arc<str>, PredicateId>,
    type_predicate_iri: Arc<str>,
    type_predicate: Option<PredicateId>,
    triples: Vec<Triple>,
    out_index: Csr<(PredicateId, VertexId)>,
    in_index: Csr<(PredicateId, VertexId)>,
    by_predicate: Csr<u32>,
    type_of: Csr<NodeTypeId>,
    class_vertex: Vec<VertexId>,
    by_type: Vec<Vec<VertexId>>,
}

impl KnowledgeGraph {
    pub fn empty(type_predicate_iri: &str) -> Self {
        GraphBuilder::new(type_predicate_iri).finish()
    }

    pub fn num_vertices(&self) -> usize {
        self.terms.len()
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn num_node_types(&self) -> usize {
        self.class_vertex.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.terms.len() as u32).map(VertexId)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.index() < self.terms.len()
    }

    fn check(&self, v: VertexId) -> Result<(), KgError> {
        if self.contains_vertex(v) {
            Ok(())
        } else {
            Err(KgError::UnknownVertex(v))
        }
    }

    /// Panics if `v` is not a vertex of this graph.
    pub fn term(&self, v: VertexId) -> &Term {
        &self.terms[v.index()]
    }

    pub fn lookup(&self, term: &Term) -> Option<VertexId> {
        self.term_index.get(term).copied()
    }

    pub fn lookup_iri(&self, iri: &str) -> Option<VertexId> {
        self.lookup(&Term::iri(iri))
    }

    pub fn predicate_iri(&self, p: PredicateId) -> &str {
        &self.predicates[p.index()]
    }

    pub(crate) fn predicate_shared(&self, p: PredicateId) -> &Arc<str> {
        &self.predicates[p.index()]
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredicateId> + '_ {
        (0..self.predicates.len() as u32).map(PredicateId)
    }

    pub fn lookup_predicate(&self, iri: &str) -> Option<PredicateId> {
        self.predicate_index.get(iri).copied()
    }

    pub fn type_predicate(&self) -> Option<PredicateId> {
        self.type_predicate
    }

    pub fn type_predicate_iri(&self) -> &str {
        &self.type_predicate_iri
    }

    #[inline]
    pub fn is_type_predicate(&self, p: PredicateId) -> bool {
        self.type_predicate == Some(p)
    }

    pub fn node_types(&self) -> impl Iterator<Item = NodeTypeId> + '_ {
        (0..self.class_vertex.len() as u32).map(NodeTypeId)
    }

    /// IRI (or blank label) of the class behind a node type.
    pub fn node_type_term(&self, c: NodeTypeId) -> &Term {
        self.term(self.class_vertex[c.index()])
    }

    pub fn lookup_node_type(&self, iri: &str) -> Option<NodeTypeId> {
        let v = self.lookup_iri(iri)?;
        self.class_vertex
            .binary_search(&v)
            .ok()
            .map(|i| NodeTypeId(i as u32))
    }

    /// Node types asserted for `v`, ascending.
    pub fn types_of(&self, v: VertexId) -> &[NodeTypeId] {
        self.type_of.row(v.index())
    }

    pub fn vertices_of_type(&self, c: NodeTypeId) -> Result<&[VertexId], KgError> {
        self.by_type
            .get(c.index())
            .map(Vec::as_slice)
            .ok_or(KgError::UnknownType(c))
    }

    /// `(predicate, object)` pairs of triples with subject `v`.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[(PredicateId, VertexId)] {
        self.out_index.row(v.index())
    }

    /// `(predicate, subject)` pairs of triples with object `v`.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> &[(PredicateId, VertexId)] {
        self.in_index.row(v.index())
    }

    /// Triples using predicate `p`, in `(subject, object)` order.
    pub fn triples_with_predicate(&self, p: PredicateId) -> impl Iterator<Item = Triple> + '_ {
        self.by_predicate
            .row(p.index())
            .iter()
            .map(move |&i| self.triples[i as usize])
    }

    pub fn neighbors(
        &self,
        v: VertexId,
        direction: Direction,
    ) -> Result<Vec<(PredicateId, VertexId)>, KgError> {
        self.check(v)?;
        Ok(match direction {
            Direction::Outgoing => self.out_edges(v).to_vec(),
            Direction::Incoming => self.in_edges(v).to_vec(),
            Direction::Both => {
                let mut all = self.out_edges(v).to_vec();
                all.extend_from_slice(self.in_edges(v));
                all
            }
        })
    }

    /// Neighbors reachable over non-type edges, outgoing first. Entries are
    /// repeated once per connecting triple.
    pub fn structural_neighbors(
        &self,
        v: VertexId,
        direction: Direction,
    ) -> impl Iterator<Item = VertexId> + '_ {
        let out: &[(PredicateId, VertexId)] = match direction {
            Direction::Incoming => &[],
            _ => self.out_edges(v),
        };
        let inc: &[(PredicateId, VertexId)] = match direction {
            Direction::Outgoing => &[],
            _ => self.in_edges(v),
        };
        out.iter()
            .chain(inc.iter())
            .filter(move |(p, _)| !self.is_type_predicate(*p))
            .map(|&(_, u)| u)
    }

    /// True when `v` takes part in a triple other than as the class of a
    /// type assertion.
    pub fn is_entity(&self, v: VertexId) -> bool {
        !self.out_edges(v).is_empty()
            || self
                .in_edges(v)
                .iter()
                .any(|(p, _)| !self.is_type_predicate(*p))
    }

    /// Vertices that are subjects of some triple or objects of a non-type
    /// triple. Classes referenced only through type assertions are excluded.
    pub fn entity_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.is_entity(v))
    }

    pub fn term_triple(&self, t: &Triple) -> TermTriple {
        TermTriple {
            subject: self.term(t.subject).clone(),
            predicate: self.predicate_shared(t.predicate).clone(),
            object: self.term(t.object).clone(),
        }
    }

    pub fn term_triples(&self) -> impl Iterator<Item = TermTriple> + '_ {
        self.triples.iter().map(move |t| self.term_triple(t))
    }

    pub fn write_ntriples<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.triples {
            writeln!(
                w,
                "{} <{}> {} .",
                self.term(t.subject),
                self.predicate_iri(t.predicate),
                self.term(t.object)
            )?;
        }
        w.flush()
    }

    /// Three-column CSV with a `s,p,o` header; terms in N-Triples syntax.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), KgError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "p", "o"])?;
        for t in &self.triples {
            out.write_record([
                self.term(t.subject).to_string(),
                format!("<{}>", self.predicate_iri(t.predicate)),
                self.term(t.object).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `id \t kind \t lexical` for every vertex, in id order.
    pub fn write_dictionary_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "id\tkind\tlexical")?;
        for (i, term) in self.terms.iter().enumerate() {
            writeln!(
                w,
                "{i}\t{}\t{}",
                term.kind().as_str(),
                term.to_string().replace('\t', "\\t")
            )?;
        }
        w.flush()
    }
}

/// Accumulates triples and produces a [`KnowledgeGraph`].
///
/// Vertex handles are assigned in order of first appearance (subject before
/// object), predicates likewise.
#[derive(Debug)]
pub struct GraphBuilder {
    type_predicate_iri: Arc<str>,
    terms: Vec<Term>,
    term_index: HashMap<Term, VertexId>,
    predicates: Vec<Arc<str>>,
    predicate_index: HashMap<Arc<str>, PredicateId>,
    triples: Vec<Triple>,
}

impl GraphBuilder {
    pub fn new(type_predicate_iri: &str) -> Self {
        GraphBuilder {
            type_predicate_iri: Arc::from(type_predicate_iri),
            terms: Vec::new(),
            term_index: HashMap::new(),
            predicates: Vec::new(),
            predicate_index: HashMap::new(),
            triples: Vec::new(),
        }
    }

    fn intern(&mut self, term: Term) -> VertexId {
        if let Some(&id) = self.term_index.get(&term) {
            return id;
        }
        let id = VertexId(self.terms.len() as u32);
        self.terms.push(term.clone());
        self.term_index.insert(term, id);
        id
    }

    fn intern_predicate(&mut self, iri: &Arc<str>) -> PredicateId {
        if let Some(&id) = self.predicate_index.get(iri) {
            return id;
        }
        let id = PredicateId(self.predicates.len() as u32);
        self.predicates.push(iri.clone());
        self.predicate_index.insert(iri.clone(), id);
        id
    }

    pub fn add(&mut self, subject: Term, predicate: &Arc<str>, object: Term) -> Result<(), KgError> {
        if subject.is_literal() {
            return Err(KgError::LiteralSubject(subject.to_string()));
        }
        let s = self.intern(subject);
        let p = self.intern_predicate(predicate);
        let o = self.intern(object);
        self.triples.push(Triple::new(s, p, o));
        Ok(())
    }

    pub fn add_triple(&mut self, t: TermTriple) -> Result<(), KgError> {
        self.add(t.subject, &t.predicate, t.object)
    }

    pub fn finish(self) -> KnowledgeGraph {
        let GraphBuilder {
            type_predicate_iri,
            terms,
            term_index,
            predicates,
            predicate_index,
            triples,
        } = self;
        assemble(
            type_predicate_iri,
            terms,
            term_index,
            predicates,
            predicate_index,
            triples,
        )
    }
}

/// Re-encodes a subset of `parent`'s triples into a fresh graph. Handles are
/// assigned in order of first appearance in `triples`.
pub(crate) fn project(parent: &KnowledgeGraph, triples: impl IntoIterator<Item = Triple>) -> KnowledgeGraph {
    const NONE: u32 = u32::MAX;
    let mut vmap = vec![NONE; parent.num_vertices()];
    let mut pmap = vec![NONE; parent.num_predicates()];
    let mut terms = Vec::new();
    let mut predicates: Vec<Arc<str>> = Vec::new();
    let mut out = Vec::new();
    let mut map_v = |v: VertexId, terms: &mut Vec<Term>| {
        let slot = &mut vmap[v.index()];
        if *slot == NONE {
            *slot = terms.len() as u32;
            terms.push(parent.term(v).clone());
        }
        VertexId(*slot)
    };
    for t in triples {
        let s = map_v(t.subject, &mut terms);
        let slot = &mut pmap[t.predicate.index()];
        if *slot == NONE {
            *slot = predicates.len() as u32;
            predicates.push(parent.predicate_shared(t.predicate).clone());
        }
        let p = PredicateId(*slot);
        let o = map_v(t.object, &mut terms);
        out.push(Triple::new(s, p, o));
    }
    let term_index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), VertexId(i as u32)))
        .collect();
    let predicate_index = predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), PredicateId(i as u32)))
        .collect();
    assemble(
        parent.type_predicate_iri.clone(),
        terms,
        term_index,
        predicates,
        predicate_index,
        out,
    )
}

fn assemble(
    type_predicate_iri: Arc<str>,
    terms: Vec<Term>,
    term_index: HashMap<Term, VertexId>,
    predicates: Vec<Arc<str>>,
    predicate_index: HashMap<Arc<str>, PredicateId>,
    mut triples: Vec<Triple>,
) -> KnowledgeGraph {
    let n = terms.len();
    triples.sort_unstable();
    triples.dedup();

    let out_index = Csr::from_sorted(
        n,
        triples
            .iter()
            .map(|t| (t.subject.index(), (t.predicate, t.object))),
    );
    let mut incoming: Vec<(VertexId, PredicateId, VertexId)> = triples
        .iter()
        .map(|t| (t.object, t.predicate, t.subject))
        .collect();
    incoming.sort_unstable();
    let in_index = Csr::from_sorted(n, incoming.into_iter().map(|(o, p, s)| (o.index(), (p, s))));

    let mut by_pred: Vec<(PredicateId, u32)> = triples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.predicate, i as u32))
        .collect();
    by_pred.sort_unstable();
    let by_predicate = Csr::from_sorted(
        predicates.len(),
        by_pred.into_iter().map(|(p, i)| (p.index(), i)),
    );

    let type_predicate = predicate_index.get(&*type_predicate_iri).copied();
    let mut class_vertex: Vec<VertexId> = Vec::new();
    let mut assertions: Vec<(VertexId, VertexId)> = Vec::new();
    if let Some(tp) = type_predicate {
        for t in triples.iter().filter(|t| t.predicate == tp) {
            if terms[t.object.index()].kind() != TermKind::Literal {
                class_vertex.push(t.object);
                assertions.push((t.subject, t.object));
            }
        }
    }
    class_vertex.sort_unstable();
    class_vertex.dedup();
    let mut typed: Vec<(VertexId, NodeTypeId)> = assertions
        .into_iter()
        .map(|(v, c)| {
            let id = class_vertex.binary_search(&c).expect("class registered");
            (v, NodeTypeId(id as u32))
        })
        .collect();
    typed.sort_unstable();
    typed.dedup();
    let mut by_type = vec![Vec::new(); class_vertex.len()];
    for &(v, c) in &typed {
        by_type[c.index()].push(v);
    }
    let type_of = Csr::from_sorted(n, typed.into_iter().map(|(v, c)| (v.index(), c)));

    KnowledgeGraph {
        terms,
        term_index,
        predicates,
        predicate_index,
        type_predicate_iri,
        type_predicate,
        triples,
        out_index,
        in_index,
        by_predicate,
        type_of,
        class_vertex,
        by_type,
    }
}
