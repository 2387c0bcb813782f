//! Dictionary-encoded knowledge graph store.
//!
//! A [`KnowledgeGraph`] is built once from N-Triples (plain or gzip) and never
//! mutated afterwards, so it can be shared freely between threads. Every
//! extraction engine produces a [`Subgraph`], which is itself a small
//! `KnowledgeGraph` with its own dictionary plus a record of how it was made.

mod graph;
pub mod ntriples;
mod subgraph;
mod term;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use flate2::read::MultiGzDecoder;

pub(crate) use graph::project as project_triples;
pub use graph::{Direction, GraphBuilder, KnowledgeGraph, NodeTypeId, PredicateId, Triple, VertexId};
pub use subgraph::{Provenance, Subgraph};
pub use term::{Term, TermKind, TermTriple, RDF_TYPE};

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown node type {0}")]
    UnknownType(NodeTypeId),
    #[error("literal {0} cannot be a subject")]
    LiteralSubject(String),
}

/// A rejected statement.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct IngestOptions {
    pub type_predicate: String,
    /// Abort on the first malformed line instead of collecting errors.
    pub strict: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            type_predicate: RDF_TYPE.to_string(),
            strict: false,
        }
    }
}

#[derive(Debug)]
pub struct Ingested {
    pub graph: KnowledgeGraph,
    pub errors: Vec<ParseError>,
    pub statements: usize,
}

/// Wraps `reader` in a gzip decoder when the stream starts with the gzip magic.
pub fn maybe_decompress<'a, R: Read + 'a>(reader: R) -> io::Result<Box<dyn BufRead + 'a>> {
    let mut buffered = BufReader::with_capacity(1 << 16, reader);
    let head = buffered.fill_buf()?;
    if head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b {
        Ok(Box::new(BufReader::with_capacity(
            1 << 16,
            MultiGzDecoder::new(buffered),
        )))
    } else {
        Ok(Box::new(buffered))
    }
}

pub fn ingest_ntriples<R: Read>(source: R, options: &IngestOptions) -> Result<Ingested, KgError> {
    let mut reader = maybe_decompress(source)?;
    let mut builder = GraphBuilder::new(&options.type_predicate);
    let mut errors = Vec::new();
    let mut statements = 0;
    let mut line = String::new();
    let mut number = 0;
    let mut predicate_cache: Option<Arc<str>> = None;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        number += 1;
        match ntriples::parse_line(line.trim_end_matches(['\n', '\r'])) {
            Ok(None) => {}
            Ok(Some((s, p, o))) => {
                // Consecutive statements usually share a predicate.
                let p = match &predicate_cache {
                    Some(cached) if **cached == *p.value() => cached.clone(),
                    _ => {
                        let fresh = p.shared_value().clone();
                        predicate_cache = Some(fresh.clone());
                        fresh
                    }
                };
                builder.add(s, &p, o)?;
                statements += 1;
            }
            Err(reason) => {
                let err = ParseError {
                    line: number,
                    reason,
                };
                if options.strict {
                    return Err(err.into());
                }
                errors.push(err);
            }
        }
    }
    Ok(Ingested {
        graph: builder.finish(),
        errors,
        statements,
    })
}

/// Reads the `s,p,o` CSV written by [`KnowledgeGraph::write_csv`].
pub fn ingest_csv<R: Read>(source: R, options: &IngestOptions) -> Result<Ingested, KgError> {
    let mut reader = csv::Reader::from_reader(maybe_decompress(source)?);
    let mut builder = GraphBuilder::new(&options.type_predicate);
    let mut errors = Vec::new();
    let mut statements = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let parsed = (|| {
            if record.len() != 3 {
                return Err(format!("expected 3 columns, found {}", record.len()));
            }
            let term = |s: &str| -> Result<Term, String> {
                let (t, rest) = ntriples::parse_term(s.trim())?;
                if rest.trim().is_empty() {
                    Ok(t)
                } else {
                    Err(format!("trailing content after term: {rest}"))
                }
            };
            let s = term(&record[0])?;
            let p = term(&record[1])?;
            let o = term(&record[2])?;
            if p.kind() != TermKind::Iri || s.is_literal() {
                return Err("invalid subject or predicate".to_string());
            }
            Ok((s, p, o))
        })();
        match parsed {
            Ok((s, p, o)) => {
                builder.add(s, p.shared_value(), o)?;
                statements += 1;
            }
            Err(reason) => {
                let err = ParseError { line, reason };
                if options.strict {
                    return Err(err.into());
                }
                errors.push(err);
            }
        }
    }
    Ok(Ingested {
        graph: builder.finish(),
        errors,
        statements,
    })
}

/// Loads a graph from disk, choosing CSV for `.csv`/`.csv.gz` paths and
/// N-Triples otherwise.
pub fn ingest_path(path: &Path, options: &IngestOptions) -> Result<Ingested, KgError> {
    let file = File::open(path)?;
    let name = path.to_string_lossy();
    if name.ends_with(".csv") || name.ends_with(".csv.gz") {
        ingest_csv(file, options)
    } else {
        ingest_ntriples(file, options)
    }
}
