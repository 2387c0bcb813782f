//! Trainer-ready bundles.
//!
//! Layout of an export directory:
//!
//! | file | content |
//! |------|---------|
//! | `nodes.tsv` | `type  id  term  types`, ids dense per node type |
//! | `edge_types.tsv` | `index  src_type  predicate  dst_type  count` |
//! | `edges/<index>.tsv` | `src  dst` dense ids of one edge type |
//! | `labels.tsv`, `label_dict.tsv` | label id per labeled node, label terms |
//! | `splits.tsv` | train / valid / test per node |
//! | `manifest.json` | provenance, counts and SHA-256 of every file |
//!
//! A node's section is its smallest class IRI. Untyped entities go to
//! `_untyped` and literals to `_literal`. Type assertions are not edges: they
//! are carried by the `types` column.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::kg::{
    ntriples, GraphBuilder, KgError, KnowledgeGraph, Provenance, Subgraph, Term, TermTriple, VertexId,
};
use crate::task::{LabelMap, SplitAssignment, TaskKind, TaskSpec};

pub const UNTYPED: &str = "_untyped";
pub const LITERAL: &str = "_literal";

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("checksum mismatch for {0}")]
    Checksum(String),
    #[error("malformed bundle: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportWarning {
    /// A labeled or split vertex missing from the subgraph; dropped.
    DanglingLabel(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Omit `label_predicate` triples whose subject carries a label.
    pub exclude_label_edges: bool,
    pub label_predicate: Option<String>,
}

impl ExportOptions {
    /// Label edges are dropped for NC (they would leak the answer) and kept
    /// for LP.
    pub fn for_task(task: &TaskSpec) -> Self {
        ExportOptions {
            exclude_label_edges: task.kind == TaskKind::NodeClassification,
            label_predicate: task.target_predicate.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub nodes: usize,
    pub edges: usize,
    pub node_types: usize,
    pub edge_types: usize,
    pub labels: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub excluded_label_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub engine: String,
    pub params: BTreeMap<String, String>,
    pub type_predicate: String,
    pub counts: Counts,
    pub warnings: Vec<ExportWarning>,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug)]
pub struct ExportBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Dense per-type index of the exported nodes.
struct NodeIndex {
    /// Section name and dense id, by subgraph vertex.
    slot: HashMap<VertexId, (String, usize)>,
    sections: BTreeMap<String, Vec<VertexId>>,
}

fn primary_type(kg: &KnowledgeGraph, v: VertexId) -> String {
    if kg.term(v).is_literal() {
        return LITERAL.to_string();
    }
    kg.types_of(v)
        .iter()
        .map(|&c| kg.node_type_term(c).value())
        .min()
        .map_or_else(|| UNTYPED.to_string(), str::to_string)
}

fn node_index(kg: &KnowledgeGraph) -> NodeIndex {
    let mut sections: BTreeMap<String, Vec<VertexId>> = BTreeMap::new();
    for v in kg.entity_vertices() {
        sections.entry(primary_type(kg, v)).or_default().push(v);
    }
    let mut slot = HashMap::new();
    for (name, members) in &mut sections {
        members.sort_by(|a, b| kg.term(*a).cmp(kg.term(*b)));
        for (i, &v) in members.iter().enumerate() {
            slot.insert(v, (name.clone(), i));
        }
    }
    NodeIndex { slot, sections }
}

// Raw control characters are re-escaped so every cell stays on one line;
// the escaped token denotes the same literal.
fn cell(term: &Term) -> String {
    term.to_string()
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn write(&mut self, rel: &str, body: &[u8]) -> io::Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = BufWriter::new(fs::File::create(&path)?);
        f.write_all(body)?;
        f.flush()?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            bytes: body.len() as u64,
            sha256: hex::encode(Sha256::digest(body)),
        });
        Ok(())
    }
}

pub fn export_bundle(
    sg: &Subgraph,
    labels: Option<&LabelMap>,
    splits: Option<&SplitAssignment>,
    outdir: &Path,
    options: &ExportOptions,
) -> Result<ExportBundle, ExportError> {
    let kg = sg.graph();
    fs::create_dir_all(outdir)?;
    let index = node_index(kg);
    let mut out = Writer {
        dir: outdir.to_path_buf(),
        files: Vec::new(),
    };
    let mut counts = Counts {
        nodes: index.slot.len(),
        node_types: index.sections.keys().filter(|k| !k.starts_with('_')).count(),
        ..Counts::default()
    };
    let mut warnings = Vec::new();

    let mut nodes = String::from("type\tid\tterm\ttypes\n");
    for (name, members) in &index.sections {
        for (i, &v) in members.iter().enumerate() {
            let mut types: Vec<&str> = kg.types_of(v).iter().map(|&c| kg.node_type_term(c).value()).collect();
            types.sort_unstable();
            nodes += &format!("{name}\t{i}\t{}\t{}\n", cell(kg.term(v)), types.join(" "));
        }
    }
    out.write("nodes.tsv", nodes.as_bytes())?;

    let labeled = |v: VertexId| labels.is_some_and(|l| l.get(kg.term(v)).is_some());
    let label_predicate = options
        .label_predicate
        .as_deref()
        .filter(|_| options.exclude_label_edges)
        .and_then(|p| kg.lookup_predicate(p));
    let mut edges: BTreeMap<(String, String, String), BTreeSet<(usize, usize)>> = BTreeMap::new();
    for t in kg.triples() {
        if kg.is_type_predicate(t.predicate) {
            continue;
        }
        if Some(t.predicate) == label_predicate && labeled(t.subject) {
            counts.excluded_label_edges += 1;
            continue;
        }
        let (st, s) = &index.slot[&t.subject];
        let (ot, o) = &index.slot[&t.object];
        let key = (st.clone(), kg.predicate_iri(t.predicate).to_string(), ot.clone());
        edges.entry(key).or_default().insert((*s, *o));
    }
    let mut edge_types = String::from("index\tsrc_type\tpredicate\tdst_type\tcount\n");
    for (i, ((st, p, ot), pairs)) in edges.iter().enumerate() {
        edge_types += &format!("{i}\t{st}\t{p}\t{ot}\t{}\n", pairs.len());
        let mut body = String::from("src\tdst\n");
        for (s, o) in pairs {
            body += &format!("{s}\t{o}\n");
        }
        out.write(&format!("edges/{i}.tsv"), body.as_bytes())?;
        counts.edges += pairs.len();
    }
    counts.edge_types = edges.len();
    out.write("edge_types.tsv", edge_types.as_bytes())?;

    let lookup = |term: &Term, warnings: &mut Vec<ExportWarning>| match kg
        .lookup(term)
        .and_then(|v| index.slot.get(&v))
    {
        Some(s) => Some(s.clone()),
        None => {
            log::warn!("{term} is not in the subgraph; dropped from export");
            warnings.push(ExportWarning::DanglingLabel(term.to_string()));
            None
        }
    };

    let mut label_body = String::from("type\tid\tlabel\n");
    let mut label_rows = Vec::new();
    if let Some(l) = labels {
        for (term, id) in l.iter() {
            if let Some((ty, i)) = lookup(term, &mut warnings) {
                label_rows.push((ty, i, id.0));
            }
        }
    }
    label_rows.sort();
    counts.labels = label_rows.len();
    for (ty, i, id) in label_rows {
        label_body += &format!("{ty}\t{i}\t{id}\n");
    }
    out.write("labels.tsv", label_body.as_bytes())?;
    let mut dict = Vec::new();
    match labels {
        Some(l) => l.write_dictionary_tsv(&mut dict)?,
        None => LabelMap::default().write_dictionary_tsv(&mut dict)?,
    }
    out.write("label_dict.tsv", &dict)?;

    let mut split_body = String::from("type\tid\tsplit\n");
    let mut split_rows = Vec::new();
    if let Some(s) = splits {
        for (term, split) in &s.assignment {
            if let Some((ty, i)) = lookup(term, &mut warnings) {
                split_rows.push((ty, i, *split));
            }
        }
    }
    split_rows.sort();
    for (ty, i, split) in split_rows {
        match split {
            crate::task::Split::Train => counts.train += 1,
            crate::task::Split::Valid => counts.valid += 1,
            crate::task::Split::Test => counts.test += 1,
        }
        split_body += &format!("{ty}\t{i}\t{}\n", split.as_str());
    }
    out.write("splits.tsv", split_body.as_bytes())?;

    let provenance: &Provenance = sg.provenance();
    let manifest = Manifest {
        engine: provenance.engine.clone(),
        params: provenance.params.clone(),
        type_predicate: kg.type_predicate_iri().to_string(),
        counts,
        warnings,
        files: out.files,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    fs::write(outdir.join("manifest.json"), json)?;
    Ok(ExportBundle {
        dir: outdir.to_path_buf(),
        manifest,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ExportError> {
    Ok(serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?)
}

/// Recomputes every checksum listed in the manifest.
pub fn verify_bundle(dir: &Path) -> Result<Manifest, ExportError> {
    let manifest = read_manifest(dir)?;
    for f in &manifest.files {
        let body = fs::read(dir.join(&f.path))?;
        if hex::encode(Sha256::digest(&body)) != f.sha256 {
            return Err(ExportError::Checksum(f.path.clone()));
        }
    }
    Ok(manifest)
}

fn rows(dir: &Path, rel: &str) -> Result<Vec<Vec<String>>, ExportError> {
    let text = fs::read_to_string(dir.join(rel))?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect())
}

fn parse_cell(s: &str) -> Result<Term, ExportError> {
    let (t, rest) = ntriples::parse_term(s).map_err(ExportError::Malformed)?;
    if !rest.trim().is_empty() {
        return Err(ExportError::Malformed(format!("trailing text in {s}")));
    }
    Ok(t)
}

/// Rebuilds a graph from nodes and edge files: type assertions come from the
/// `types` column, other triples from the edge indices.
pub fn read_bundle(dir: &Path) -> Result<KnowledgeGraph, ExportError> {
    let manifest = verify_bundle(dir)?;
    let tp = manifest.type_predicate.as_str();
    let type_arc: std::sync::Arc<str> = tp.into();
    let mut builder = GraphBuilder::new(tp);
    let mut by_slot: HashMap<(String, usize), Term> = HashMap::new();
    for row in rows(dir, "nodes.tsv")? {
        let [ty, id, term, types] = row.as_slice() else {
            return Err(ExportError::Malformed(format!("nodes row {row:?}")));
        };
        let term = parse_cell(term)?;
        let id: usize = id
            .parse()
            .map_err(|_| ExportError::Malformed(format!("node id {id}")))?;
        for class in types.split(' ').filter(|c| !c.is_empty()) {
            builder.add(term.clone(), &type_arc, Term::iri(class))?;
        }
        by_slot.insert((ty.clone(), id), term);
    }
    for row in rows(dir, "edge_types.tsv")? {
        let [index, st, p, ot, _] = row.as_slice() else {
            return Err(ExportError::Malformed(format!("edge type row {row:?}")));
        };
        let p: std::sync::Arc<str> = p.as_str().into();
        for pair in rows(dir, &format!("edges/{index}.tsv"))? {
            let resolve = |ty: &String, id: &String| -> Result<Term, ExportError> {
                let id: usize = id
                    .parse()
                    .map_err(|_| ExportError::Malformed(format!("edge id {id}")))?;
                by_slot
                    .get(&(ty.clone(), id))
                    .cloned()
                    .ok_or_else(|| ExportError::Malformed(format!("dangling edge endpoint {ty}/{id}")))
            };
            let [s, o] = pair.as_slice() else {
                return Err(ExportError::Malformed(format!("edge row {pair:?}")));
            };
            builder.add(resolve(st, s)?, &p, resolve(ot, o)?)?;
        }
    }
    Ok(builder.finish())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VersionDiff {
    pub added: Vec<TermTriple>,
    pub removed: Vec<TermTriple>,
}

/// Triple set difference between two versions of a graph.
pub fn diff_versions(old: &KnowledgeGraph, new: &KnowledgeGraph) -> VersionDiff {
    let before: BTreeSet<TermTriple> = old.term_triples().collect();
    let after: BTreeSet<TermTriple> = new.term_triples().collect();
    VersionDiff {
        added: after.difference(&before).cloned().collect(),
        removed: before.difference(&after).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_ntriples, IngestOptions};

    const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

    fn sg(src: &str) -> Subgraph {
        let g = ingest_ntriples(src.as_bytes(), &IngestOptions::default())
            .unwrap()
            .graph;
        g.to_subgraph(Provenance::new("test"))
    }

    #[test]
    fn empty_bundle_has_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let b = export_bundle(&sg(""), None, None, dir.path(), &ExportOptions::default()).unwrap();
        assert_eq!(b.manifest.counts, Counts::default());
        verify_bundle(dir.path()).unwrap();
        assert_eq!(read_bundle(dir.path()).unwrap().num_triples(), 0);
    }

    #[test]
    fn two_sections_dense_ids() {
        let dir = tempfile::tempdir().unwrap();
        let g = sg(&format!(
            "<a> {TYPE} <A> .\n<b> {TYPE} <B> .\n<a> <p> <b> .\n<c> {TYPE} <A> .\n"
        ));
        let b = export_bundle(&g, None, None, dir.path(), &ExportOptions::default()).unwrap();
        assert_eq!(b.manifest.counts.node_types, 2);
        let nodes = fs::read_to_string(dir.path().join("nodes.tsv")).unwrap();
        assert!(nodes.contains("A\t0\t<a>\tA\n"));
        assert!(nodes.contains("A\t1\t<c>\tA\n"));
        assert!(nodes.contains("B\t0\t<b>\tB\n"));
        let edges = fs::read_to_string(dir.path().join("edges/0.tsv")).unwrap();
        assert_eq!(edges, "src\tdst\n0\t0\n");
    }

    #[test]
    fn tampering_detected() {
        let dir = tempfile::tempdir().unwrap();
        export_bundle(&sg("<a> <p> <b> .\n"), None, None, dir.path(), &ExportOptions::default()).unwrap();
        fs::write(dir.path().join("nodes.tsv"), "type\tid\tterm\ttypes\n").unwrap();
        assert!(matches!(verify_bundle(dir.path()), Err(ExportError::Checksum(_))));
    }

    #[test]
    fn version_diff() {
        let a = sg("<a> <p> <b> .\n<a> <p> <c> .\n");
        let b = sg("<a> <p> <b> .\n<a> <p> <d> .\n");
        let d = diff_versions(&a, &b);
        assert_eq!(d.added.len(), 1);
        assert_eq!(d.removed.len(), 1);
        assert_eq!(d.added[0].object, Term::iri("d"));
    }
}
