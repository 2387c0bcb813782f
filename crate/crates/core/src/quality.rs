//! Quality indicators of an extracted subgraph.
//!
//! The vertex set `V'` of a subgraph is its entity vertices: class vertices
//! that appear only as objects of type assertions are not counted. Topology
//! is measured over non-type edges.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::kg::{Direction, KnowledgeGraph, NodeTypeId, Term, VertexId};
use crate::task::{resolve_targets, TaskError, TaskSpec};

#[derive(Debug, thiserror::Error)]
pub enum QualityError {
    #[error("subgraph has no vertices")]
    EmptySubgraph,
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// Neighbor-type entropy in bits.
///
/// For every non-literal vertex, counts the distinct node types among its
/// neighbors in both directions, ignoring type edges and literal neighbors.
/// Returns the Shannon entropy of the distribution of those counts.
///
/// ```
/// use tosg::kg::{ingest_ntriples, IngestOptions};
/// use tosg::quality::neighbor_type_entropy;
///
/// let nt = "<a> <p> <b> .\n<b> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <T> .\n";
/// let kg = ingest_ntriples(nt.as_bytes(), &IngestOptions::default()).unwrap().graph;
/// // a sees one type, b sees none
/// assert_eq!(neighbor_type_entropy(&kg).unwrap(), 1.0);
/// ```
pub fn neighbor_type_entropy(sg: &KnowledgeGraph) -> Result<f64, QualityError> {
    let mut histogram: HashMap<usize, usize> = HashMap::new();
    let mut total = 0usize;
    let mut seen: Vec<NodeTypeId> = Vec::new();
    for v in sg.entity_vertices() {
        if sg.term(v).is_literal() {
            continue;
        }
        seen.clear();
        for u in sg.structural_neighbors(v, Direction::Both) {
            seen.extend_from_slice(sg.types_of(u));
        }
        seen.sort_unstable();
        seen.dedup();
        *histogram.entry(seen.len()).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(QualityError::EmptySubgraph);
    }
    let mut counts: Vec<usize> = histogram.into_values().collect();
    counts.sort_unstable();
    let n = total as f64;
    Ok(counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetStats {
    pub target_count: usize,
    /// Percentage of non-literal vertices that are targets.
    pub target_ratio: f64,
    /// Same, with literal vertices in the denominator.
    pub target_ratio_with_literals: f64,
    pub node_types: usize,
    /// Distinct predicates other than the type predicate.
    pub edge_types: usize,
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn target_mask(sg: &KnowledgeGraph, targets: &[VertexId]) -> Vec<bool> {
    let mut mask = vec![false; sg.num_vertices()];
    for &t in targets {
        if sg.contains_vertex(t) {
            mask[t.index()] = true;
        }
    }
    mask
}

pub fn target_stats(sg: &KnowledgeGraph, targets: &[VertexId]) -> TargetStats {
    let mask = target_mask(sg, targets);
    let (mut entities, mut non_literal, mut hits) = (0, 0, 0);
    for v in sg.entity_vertices() {
        entities += 1;
        if !sg.term(v).is_literal() {
            non_literal += 1;
        }
        if mask[v.index()] {
            hits += 1;
        }
    }
    let edge_types = sg
        .predicates()
        .filter(|&p| !sg.is_type_predicate(p) && sg.triples_with_predicate(p).next().is_some())
        .count();
    TargetStats {
        target_count: hits,
        target_ratio: percent(hits, non_literal),
        target_ratio_with_literals: percent(hits, entities),
        node_types: sg.num_node_types(),
        edge_types,
    }
}

/// Hop distance from the nearest target, `None` if unreachable. Type edges
/// are not traversed.
pub fn target_distances(sg: &KnowledgeGraph, targets: &[VertexId], direction: Direction) -> Vec<Option<u32>> {
    let mut dist = vec![None; sg.num_vertices()];
    let mut queue = VecDeque::new();
    for &t in targets {
        if sg.contains_vertex(t) && dist[t.index()].is_none() {
            dist[t.index()] = Some(0);
            queue.push_back(t);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()].unwrap() + 1;
        for u in sg.structural_neighbors(v, direction) {
            if dist[u.index()].is_none() {
                dist[u.index()] = Some(d);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Percentage of non-target vertices with no undirected path to a target.
pub fn disconnected_ratio(sg: &KnowledgeGraph, targets: &[VertexId]) -> f64 {
    let mask = target_mask(sg, targets);
    let dist = target_distances(sg, targets, Direction::Both);
    let (mut others, mut stray) = (0, 0);
    for v in sg.entity_vertices() {
        if mask[v.index()] {
            continue;
        }
        others += 1;
        if dist[v.index()].is_none() {
            stray += 1;
        }
    }
    percent(stray, others)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    /// Mean hop distance over connected non-target vertices; 0 when there
    /// are none.
    pub mean: f64,
    pub connected_non_targets: usize,
}

impl DistanceStats {
    pub fn no_connected_non_targets(&self) -> bool {
        self.connected_non_targets == 0
    }
}

/// Multi-source BFS from all targets. `Direction::Both` is the undirected
/// view; `Direction::Outgoing` follows edges away from targets.
pub fn avg_distance_to_target(sg: &KnowledgeGraph, targets: &[VertexId], direction: Direction) -> DistanceStats {
    let mask = target_mask(sg, targets);
    let dist = target_distances(sg, targets, direction);
    let (mut sum, mut n) = (0u64, 0usize);
    for v in sg.entity_vertices() {
        if mask[v.index()] {
            continue;
        }
        if let Some(d) = dist[v.index()] {
            sum += u64::from(d);
            n += 1;
        }
    }
    DistanceStats {
        mean: if n == 0 { 0.0 } else { sum as f64 / n as f64 },
        connected_non_targets: n,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub vertices: usize,
    pub vertices_without_literals: usize,
    pub triples: usize,
    pub targets: usize,
    pub target_ratio: f64,
    pub target_ratio_with_literals: f64,
    pub node_types: usize,
    pub edge_types: usize,
    pub disconnected_ratio: f64,
    pub avg_distance_to_target: f64,
    pub entropy: f64,
    pub empty_subgraph: bool,
    pub no_connected_non_targets: bool,
}

/// Maps target terms into `sg`, dropping those it does not contain.
pub fn targets_in(sg: &KnowledgeGraph, terms: impl IntoIterator<Item = Term>) -> Vec<VertexId> {
    let set: HashSet<VertexId> = terms.into_iter().filter_map(|t| sg.lookup(&t)).collect();
    let mut out: Vec<VertexId> = set.into_iter().collect();
    out.sort_unstable();
    out
}

/// Indicators of `sg` for `task`. Targets are resolved on `kg` when given
/// (normally the full graph) and intersected with `sg`.
pub fn quality_report(
    sg: &KnowledgeGraph,
    task: &TaskSpec,
    kg: Option<&KnowledgeGraph>,
) -> Result<QualityReport, QualityError> {
    let source = kg.unwrap_or(sg);
    let resolved = resolve_targets(source, task)?.vertices;
    let targets = targets_in(sg, resolved.iter().map(|&v| source.term(v).clone()));
    Ok(report_for_targets(sg, &targets))
}

pub fn report_for_targets(sg: &KnowledgeGraph, targets: &[VertexId]) -> QualityReport {
    let vertices = sg.entity_vertices().count();
    let vertices_without_literals = sg
        .entity_vertices()
        .filter(|&v| !sg.term(v).is_literal())
        .count();
    let entropy = neighbor_type_entropy(sg);
    let stats = target_stats(sg, targets);
    let distance = avg_distance_to_target(sg, targets, Direction::Both);
    QualityReport {
        vertices,
        vertices_without_literals,
        triples: sg.num_triples(),
        targets: stats.target_count,
        target_ratio: stats.target_ratio,
        target_ratio_with_literals: stats.target_ratio_with_literals,
        node_types: stats.node_types,
        edge_types: stats.edge_types,
        disconnected_ratio: disconnected_ratio(sg, targets),
        avg_distance_to_target: distance.mean,
        entropy: entropy.as_ref().copied().unwrap_or(0.0),
        empty_subgraph: entropy.is_err(),
        no_connected_non_targets: distance.no_connected_non_targets(),
    }
}

const COLUMNS: [&str; 11] = [
    "vertices",
    "vertices_no_literals",
    "triples",
    "targets",
    "target_ratio_pct",
    "node_types",
    "edge_types",
    "target_disconnected_pct",
    "avg_dist_target",
    "entropy_bits",
    "flags",
];

impl QualityReport {
    fn cells(&self) -> Vec<String> {
        let mut flags = Vec::new();
        if self.empty_subgraph {
            flags.push("empty");
        }
        if self.no_connected_non_targets {
            flags.push("no_connected_non_targets");
        }
        vec![
            self.vertices.to_string(),
            self.vertices_without_literals.to_string(),
            self.triples.to_string(),
            self.targets.to_string(),
            format!("{:.2}", self.target_ratio),
            self.node_types.to_string(),
            self.edge_types.to_string(),
            format!("{:.2}", self.disconnected_ratio),
            format!("{:.3}", self.avg_distance_to_target),
            format!("{:.4}", self.entropy),
            if flags.is_empty() { "-".into() } else { flags.join(",") },
        ]
    }
}

/// One TSV row per named report, with a header line.
pub fn write_reports_tsv<W: Write>(mut w: W, reports: &[(String, QualityReport)]) -> io::Result<()> {
    writeln!(w, "name\t{}", COLUMNS.join("\t"))?;
    for (name, r) in reports {
        writeln!(w, "{name}\t{}", r.cells().join("\t"))?;
    }
    Ok(())
}

/// Aligned text matrix, one row per report.
pub fn render_table(reports: &[(String, QualityReport)]) -> String {
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("name".to_string())
        .chain(COLUMNS.iter().map(|c| c.to_string()))
        .collect()];
    for (name, r) in reports {
        rows.push(std::iter::once(name.clone()).chain(r.cells()).collect());
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{ingest_ntriples, IngestOptions};

    const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

    fn kg(src: &str) -> KnowledgeGraph {
        ingest_ntriples(src.as_bytes(), &IngestOptions::default())
            .unwrap()
            .graph
    }

    fn ids(g: &KnowledgeGraph, names: &[&str]) -> Vec<VertexId> {
        names.iter().map(|n| g.lookup_iri(n).unwrap()).collect()
    }

    #[test]
    fn three_equal_outcomes() {
        // a, b see type A only; c sees A and B; d sees A and B
        let g = kg(&format!(
            "<x> {TYPE} <A> .\n<y> {TYPE} <B> .\n\
             <a> <p> <x> .\n<b> <p> <x> .\n<c> <p> <x> .\n<c> <p> <y> .\n<d> <p> <x> .\n<d> <p> <y> .\n"
        ));
        // x and y each see no typed neighbor, adding two zero counts
        let h = neighbor_type_entropy(&g).unwrap();
        // counts: a=1,b=1,c=2,d=2,x=0,y=0 -> three equal classes
        assert!((h - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn one_bit_case() {
        let g = kg(&format!(
            "<a> {TYPE} <A> .\n<b> {TYPE} <B> .\n<a> <p> <b> .\n\
             <c> {TYPE} <A> .\n<c> {TYPE} <B> .\n<d> {TYPE} <A> .\n<d> {TYPE} <C> .\n<c> <p> <d> .\n"
        ));
        assert_eq!(neighbor_type_entropy(&g).unwrap(), 1.0);
    }

    #[test]
    fn uniform_counts_zero_entropy() {
        let g = kg("<a> <p> <b> .\n<c> <p> <d> .\n");
        assert_eq!(neighbor_type_entropy(&g).unwrap(), 0.0);
        assert!(matches!(
            neighbor_type_entropy(&KnowledgeGraph::empty(crate::kg::RDF_TYPE)),
            Err(QualityError::EmptySubgraph)
        ));
    }

    #[test]
    fn star_and_path_distances() {
        let g = kg("<t> <p> <a> .\n<t> <p> <b> .\n<t> <p> <c> .\n");
        let s = avg_distance_to_target(&g, &ids(&g, &["t"]), Direction::Both);
        assert_eq!(s.mean, 1.0);
        let g = kg("<t> <p> <a> .\n<a> <p> <b> .\n");
        let s = avg_distance_to_target(&g, &ids(&g, &["t"]), Direction::Both);
        assert_eq!(s.mean, 1.5);
        let s = avg_distance_to_target(&g, &ids(&g, &["b"]), Direction::Outgoing);
        assert!(s.no_connected_non_targets());
    }

    #[test]
    fn stray_component() {
        let mut src = String::new();
        for i in 0..7 {
            src += &format!("<t> <p> <n{i}> .\n");
        }
        src += "<s0> <p> <s1> .\n<s1> <p> <s2> .\n";
        let g = kg(&src);
        assert_eq!(disconnected_ratio(&g, &ids(&g, &["t"])), 30.0);
    }

    #[test]
    fn ratios() {
        let g = kg(&format!("<a> {TYPE} <T> .\n<a> <p> <b> .\n<a> <q> \"lit\" .\n"));
        let s = target_stats(&g, &ids(&g, &["a"]));
        assert_eq!(s.target_ratio, 50.0);
        assert!((s.target_ratio_with_literals - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!((s.node_types, s.edge_types), (1, 2));
        let s = target_stats(&g, &[]);
        assert_eq!(s.target_ratio, 0.0);
    }

    #[test]
    fn empty_report_is_flagged() {
        let r = report_for_targets(&KnowledgeGraph::empty(crate::kg::RDF_TYPE), &[]);
        assert!(r.empty_subgraph);
        assert_eq!(r.triples, 0);
        let table = render_table(&[("empty".into(), r)]);
        assert!(table.contains("empty"));
    }
}
