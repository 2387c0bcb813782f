//! GNN task descriptions: target resolution, single-label construction and
//! train/valid/test splits.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::{KnowledgeGraph, Term, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("labels can only be built for node classification tasks")]
    NotNodeClassification,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("target {0} has no value for the time predicate")]
    MissingTimeValue(Term),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Non-fatal conditions reported next to a result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskWarning {
    EmptyTargetSet,
    /// Every vertex of a label with fewer than three instances went to train.
    SmallLabel { label: Option<Term>, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    NodeClassification,
    LinkPrediction,
}

/// A node-classification or link-prediction task, described by IRIs so the
/// same spec can be resolved against a full graph and its subgraphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Class of the target vertices.
    pub target_type: String,
    /// Label predicate for NC, predicted link for LP.
    #[serde(default)]
    pub target_predicate: Option<String>,
    /// Class of the LP object side.
    #[serde(default)]
    pub object_type: Option<String>,
    /// Keep only vertices whose label ranks among the N most frequent.
    #[serde(default)]
    pub top_n_labels: Option<usize>,
}

impl TaskSpec {
    pub fn node_classification(target_type: &str, label_predicate: &str) -> Self {
        TaskSpec {
            kind: TaskKind::NodeClassification,
            target_type: target_type.to_string(),
            target_predicate: Some(label_predicate.to_string()),
            object_type: None,
            top_n_labels: None,
        }
    }

    pub fn link_prediction(target_type: &str, predicate: &str, object_type: Option<&str>) -> Self {
        TaskSpec {
            kind: TaskKind::LinkPrediction,
            target_type: target_type.to_string(),
            target_predicate: Some(predicate.to_string()),
            object_type: object_type.map(str::to_string),
            top_n_labels: None,
        }
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        if self.target_type.is_empty() {
            return Err(TaskError::InvalidTask("target_type is required".into()));
        }
        if self.target_predicate.as_deref().is_none_or(str::is_empty) {
            return Err(TaskError::InvalidTask(
                "target_predicate is required for both NC and LP tasks".into(),
            ));
        }
        if self.top_n_labels == Some(0) {
            return Err(TaskError::InvalidTask("top_n_labels must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Targets {
    pub vertices: Vec<VertexId>,
    pub warnings: Vec<TaskWarning>,
}

/// Resolves `V_T`. A class or predicate absent from `kg` yields an empty set
/// with [`TaskWarning::EmptyTargetSet`] rather than an error, because a data
/// driven dictionary cannot tell "unknown" from "no instances".
pub fn resolve_targets(kg: &KnowledgeGraph, task: &TaskSpec) -> Result<Targets, TaskError> {
    task.validate()?;
    let typed: &[VertexId] = match kg.lookup_node_type(&task.target_type) {
        Some(c) => kg.vertices_of_type(c).expect("type id from this graph"),
        None => &[],
    };
    let vertices = match task.kind {
        TaskKind::NodeClassification => typed.to_vec(),
        TaskKind::LinkPrediction => {
            let iri = task.target_predicate.as_deref().unwrap_or_default();
            let object_class = match task.object_type.as_deref() {
                Some(t) => match kg.lookup_node_type(t) {
                    Some(c) => Some(c),
                    None => return Ok(empty_targets()),
                },
                None => None,
            };
            let object_ok =
                |u: VertexId| object_class.is_none_or(|c| kg.types_of(u).contains(&c));
            match kg.lookup_predicate(iri) {
                Some(p) => typed
                    .iter()
                    .copied()
                    .filter(|&v| kg.out_edges(v).iter().any(|&(q, u)| q == p && object_ok(u)))
                    .collect(),
                None => Vec::new(),
            }
        }
    };
    if vertices.is_empty() {
        return Ok(empty_targets());
    }
    Ok(Targets {
        vertices,
        warnings: Vec::new(),
    })
}

fn empty_targets() -> Targets {
    log::warn!("task resolves to an empty target set");
    Targets {
        vertices: Vec::new(),
        warnings: vec![TaskWarning::EmptyTargetSet],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelId(pub u32);

/// Single label per target vertex.
///
/// Label ids follow the frequency ranking: id 0 is the most frequent label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelMap {
    assignments: BTreeMap<Term, LabelId>,
    labels: Vec<Term>,
    frequencies: Vec<usize>,
    excluded: usize,
}

impl LabelMap {
    pub fn get(&self, vertex: &Term) -> Option<LabelId> {
        self.assignments.get(vertex).copied()
    }

    pub fn label(&self, id: LabelId) -> &Term {
        &self.labels[id.0 as usize]
    }

    pub fn labels(&self) -> &[Term] {
        &self.labels
    }

    /// Number of targets carrying each retained label (before single-label
    /// resolution), indexed by label id.
    pub fn frequencies(&self) -> &[usize] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Labeled targets dropped by the top-N filter.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, LabelId)> {
        self.assignments.iter().map(|(t, l)| (t, *l))
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "vertex\tlabel")?;
        for (v, l) in self.iter() {
            writeln!(w, "{v}\t{}", l.0)?;
        }
        w.flush()
    }

    pub fn write_dictionary_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "label\tterm\tfrequency")?;
        for (i, (t, f)) in self.labels.iter().zip(&self.frequencies).enumerate() {
            writeln!(w, "{i}\t{t}\t{f}")?;
        }
        w.flush()
    }
}

pub fn build_labels(kg: &KnowledgeGraph, task: &TaskSpec) -> Result<LabelMap, TaskError> {
    if task.kind != TaskKind::NodeClassification {
        return Err(TaskError::NotNodeClassification);
    }
    let targets = resolve_targets(kg, task)?;
    let Some(p) = task
        .target_predicate
        .as_deref()
        .and_then(|iri| kg.lookup_predicate(iri))
    else {
        return Ok(LabelMap::default());
    };

    let candidates: Vec<(VertexId, Vec<VertexId>)> = targets
        .vertices
        .iter()
        .map(|&v| {
            let labels = kg
                .out_edges(v)
                .iter()
                .filter(|(q, _)| *q == p)
                .map(|&(_, o)| o)
                .collect::<Vec<_>>();
            (v, labels)
        })
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut frequency: HashMap<VertexId, usize> = HashMap::new();
    for (_, labels) in &candidates {
        for &l in labels {
            *frequency.entry(l).or_default() += 1;
        }
    }
    // Most frequent first, lexicographically smallest term on ties.
    let mut ranking: Vec<VertexId> = frequency.keys().copied().collect();
    ranking.sort_by(|a, b| {
        frequency[b]
            .cmp(&frequency[a])
            .then_with(|| kg.term(*a).cmp(kg.term(*b)))
    });
    let rank: HashMap<VertexId, usize> = ranking.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let allowed = task.top_n_labels.unwrap_or(usize::MAX);

    let mut kept: Vec<(VertexId, usize)> = Vec::new();
    let mut excluded = 0;
    for (v, labels) in &candidates {
        let best = labels.iter().map(|l| rank[l]).min().expect("non-empty");
        if best < allowed {
            kept.push((*v, best));
        } else {
            excluded += 1;
        }
    }
    let mut used: Vec<usize> = kept.iter().map(|&(_, r)| r).collect();
    used.sort_unstable();
    used.dedup();
    let id_of: HashMap<usize, LabelId> = used
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, LabelId(i as u32)))
        .collect();
    Ok(LabelMap {
        assignments: kept
            .into_iter()
            .map(|(v, r)| (kg.term(v).clone(), id_of[&r]))
            .collect(),
        labels: used.iter().map(|&r| kg.term(ranking[r]).clone()).collect(),
        frequencies: used.iter().map(|&r| frequency[&ranking[r]]).collect(),
        excluded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schema", rename_all = "kebab-case")]
pub enum SplitSpec {
    /// Per-label seeded shuffle cut at the given `[train, valid, test]` fractions.
    StratifiedRandom {
        #[serde(default = "default_ratios")]
        ratios: [f64; 3],
        #[serde(default)]
        seed: u64,
    },
    /// `value <= train_until` is train, `<= valid_until` is valid, the rest test.
    TimePredicate {
        time_predicate: String,
        train_until: String,
        valid_until: String,
    },
}

fn default_ratios() -> [f64; 3] {
    [0.8, 0.1, 0.1]
}

impl SplitSpec {
    pub fn stratified(seed: u64) -> Self {
        SplitSpec::StratifiedRandom {
            ratios: default_ratios(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        match self {
            SplitSpec::StratifiedRandom { ratios, .. } => {
                if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(TaskError::InvalidSplit("ratios must be positive".into()));
                }
                let sum: f64 = ratios.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(TaskError::InvalidSplit(format!(
                        "ratios must sum to 1, got {sum}"
                    )));
                }
                Ok(())
            }
            SplitSpec::TimePredicate {
                train_until,
                valid_until,
                ..
            } => {
                if compare_time(valid_until, train_until) != Ordering::Greater {
                    return Err(TaskError::InvalidSplit(
                        "valid cut must come after the train cut".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitAssignment {
    pub assignment: BTreeMap<Term, Split>,
    pub warnings: Vec<TaskWarning>,
}

impl SplitAssignment {
    pub fn get(&self, vertex: &Term) -> Option<Split> {
        self.assignment.get(vertex).copied()
    }

    /// `(train, valid, test)` sizes.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for s in self.assignment.values() {
            match s {
                Split::Train => c.0 += 1,
                Split::Valid => c.1 += 1,
                Split::Test => c.2 += 1,
            }
        }
        c
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "vertex\tsplit")?;
        for (v, s) in &self.assignment {
            writeln!(w, "{v}\t{}", s.as_str())?;
        }
        w.flush()
    }
}

/// Splits the labeled targets (all targets when `labels` is `None`).
pub fn make_splits(
    targets: &[VertexId],
    labels: Option<&LabelMap>,
    kg: &KnowledgeGraph,
    split: &SplitSpec,
) -> Result<SplitAssignment, TaskError> {
    split.validate()?;
    let population: Vec<(&Term, Option<LabelId>)> = targets
        .iter()
        .map(|&v| kg.term(v))
        .filter_map(|t| match labels {
            Some(map) => map.get(t).map(|l| (t, Some(l))),
            None => Some((t, None)),
        })
        .collect();
    let mut out = SplitAssignment::default();
    match split {
        SplitSpec::StratifiedRandom { ratios, seed } => {
            let mut groups: BTreeMap<Option<LabelId>, Vec<&Term>> = BTreeMap::new();
            for (t, l) in population {
                groups.entry(l).or_default().push(t);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for (label, mut members) in groups {
                // Sort by term so the outcome ignores input order.
                members.sort();
                members.dedup();
                let n = members.len();
                if n < 3 {
                    out.warnings.push(TaskWarning::SmallLabel {
                        label: label.and_then(|l| labels.map(|m| m.label(l).clone())),
                        count: n,
                    });
                    for t in members {
                        out.assignment.insert(t.clone(), Split::Train);
                    }
                    continue;
                }
                members.shuffle(&mut rng);
                let [_, n_valid, n_test] = apportion(n, ratios);
                for (i, t) in members.into_iter().enumerate() {
                    let s = if i < n_valid {
                        Split::Valid
                    } else if i < n_valid + n_test {
                        Split::Test
                    } else {
                        Split::Train
                    };
                    out.assignment.insert(t.clone(), s);
                }
            }
        }
        SplitSpec::TimePredicate {
            time_predicate,
            train_until,
            valid_until,
        } => {
            let p = kg.lookup_predicate(time_predicate);
            for (t, _) in population {
                let v = kg.lookup(t).expect("term from this graph");
                let value = p.and_then(|p| {
                    kg.out_edges(v)
                        .iter()
                        .filter(|(q, _)| *q == p)
                        .filter_map(|&(_, o)| kg.term(o).literal_lexical())
                        .min_by(|a, b| compare_time(a, b))
                });
                let value = value.ok_or_else(|| TaskError::MissingTimeValue(t.clone()))?;
                let s = if compare_time(value, train_until) != Ordering::Greater {
                    Split::Train
                } else if compare_time(value, valid_until) != Ordering::Greater {
                    Split::Valid
                } else {
                    Split::Test
                };
                out.assignment.insert(t.clone(), s);
            }
        }
    }
    Ok(out)
}

/// Largest-remainder split of `n` by `ratios`; every share is within one of
/// its exact value. Remainder ties go to the earlier split.
fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact = ratios.map(|r| n as f64 * r);
    let mut sizes = exact.map(|x| (x + 1e-9).floor() as usize);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - sizes[a] as f64;
        let fb = exact[b] - sizes[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n.saturating_sub(sizes.iter().sum());
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

/// Orders time values: integers numerically, anything else as ISO-8601 text.
/// When the granularities differ the finer value is truncated to the coarser
/// one, so `2018-05-01` equals the cut `2018`.
pub fn compare_time(value: &str, cut: &str) -> Ordering {
    let (value, cut) = (value.trim(), cut.trim());
    if let (Ok(a), Ok(b)) = (value.parse::<i64>(), cut.parse::<i64>()) {
        return a.cmp(&b);
    }
    let norm = |s: &str| match s.parse::<i64>() {
        Ok(y) if y >= 0 => format!("{y:04}"),
        _ => s.to_string(),
    };
    let (value, cut) = (norm(value), norm(cut));
    let len = value.len().min(cut.len());
    value.as_bytes()[..len].cmp(&cut.as_bytes()[..len])
}

/// Task and split settings read from a TOML file.
///
/// ```toml
/// type_predicate = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"   # optional
///
/// [task]
/// kind = "node-classification"        # or "link-prediction"
/// target_type = "https://example.org/Paper"
/// target_predicate = "https://example.org/publishedIn"
/// top_n_labels = 50                   # optional
///
/// [split]
/// schema = "stratified-random"        # or "time-predicate"
/// ratios = [0.8, 0.1, 0.1]
/// seed = 7
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    #[serde(default)]
    pub type_predicate: Option<String>,
    pub task: TaskSpec,
    #[serde(default)]
    pub split: Option<SplitSpec>,
}

impl TaskConfig {
    pub fn from_toml(text: &str) -> Result<Self, TaskError> {
        let cfg: TaskConfig = toml::from_str(text).map_err(|e| TaskError::Config(e.to_string()))?;
        cfg.task.validate()?;
        if let Some(s) = &cfg.split {
            s.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, TaskError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
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

    #[test]
    fn nc_without_instances_is_empty_with_warning() {
        let g = kg(&format!("<a> {TYPE} <Author> .\n"));
        let t = resolve_targets(&g, &TaskSpec::node_classification("Paper", "venue")).unwrap();
        assert!(t.vertices.is_empty());
        assert_eq!(t.warnings, vec![TaskWarning::EmptyTargetSet]);
    }

    #[test]
    fn lp_single_link() {
        let g = kg(&format!("<a> {TYPE} <T> .\n<a> <cites> <b> .\n<c> {TYPE} <T> .\n"));
        let t = resolve_targets(&g, &TaskSpec::link_prediction("T", "cites", None)).unwrap();
        assert_eq!(t.vertices, vec![g.lookup_iri("a").unwrap()]);
    }

    #[test]
    fn invalid_task_rejected() {
        let mut task = TaskSpec::node_classification("T", "p");
        task.target_predicate = None;
        assert!(matches!(task.validate(), Err(TaskError::InvalidTask(_))));
    }

    #[test]
    fn single_and_most_frequent_label() {
        let mut src = String::new();
        // x carries L1 and L2; L1 is globally more frequent.
        for i in 0..10 {
            src += &format!("<p{i}> {TYPE} <Paper> .\n<p{i}> <venue> <L1> .\n");
        }
        for i in 10..13 {
            src += &format!("<p{i}> {TYPE} <Paper> .\n<p{i}> <venue> <L2> .\n");
        }
        src += &format!("<x> {TYPE} <Paper> .\n<x> <venue> <L2> .\n<x> <venue> <L1> .\n");
        let g = kg(&src);
        let labels = build_labels(&g, &TaskSpec::node_classification("Paper", "venue")).unwrap();
        let l1 = labels.get(&Term::iri("p0")).unwrap();
        assert_eq!(labels.label(l1), &Term::iri("L1"));
        assert_eq!(labels.get(&Term::iri("x")), Some(l1));
        assert_eq!(labels.label(labels.get(&Term::iri("p11")).unwrap()), &Term::iri("L2"));
        assert_eq!(labels.frequencies(), &[11, 4]);
    }

    #[test]
    fn equal_frequency_tie_goes_to_smaller_iri() {
        let g = kg(&format!(
            "<x> {TYPE} <P> .\n<x> <v> <B> .\n<x> <v> <A> .\n<y> {TYPE} <P> .\n<y> <v> <A> .\n<y> <v> <B> .\n"
        ));
        let labels = build_labels(&g, &TaskSpec::node_classification("P", "v")).unwrap();
        for v in ["x", "y"] {
            let l = labels.get(&Term::iri(v)).unwrap();
            assert_eq!(labels.label(l), &Term::iri("A"));
        }
    }

    #[test]
    fn labels_require_nc() {
        let g = kg("");
        assert!(matches!(
            build_labels(&g, &TaskSpec::link_prediction("T", "p", None)),
            Err(TaskError::NotNodeClassification)
        ));
    }

    #[test]
    fn exact_division_split() {
        let mut src = String::new();
        for i in 0..10 {
            src += &format!("<p{i}> {TYPE} <P> .\n<p{i}> <v> <L> .\n");
        }
        let g = kg(&src);
        let task = TaskSpec::node_classification("P", "v");
        let targets = resolve_targets(&g, &task).unwrap().vertices;
        let labels = build_labels(&g, &task).unwrap();
        let s = make_splits(&targets, Some(&labels), &g, &SplitSpec::stratified(3)).unwrap();
        assert_eq!(s.counts(), (8, 1, 1));
        let again = make_splits(&targets, Some(&labels), &g, &SplitSpec::stratified(3)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn tiny_label_goes_to_train() {
        let g = kg(&format!("<a> {TYPE} <P> .\n<a> <v> <L> .\n<b> {TYPE} <P> .\n<b> <v> <L> .\n"));
        let task = TaskSpec::node_classification("P", "v");
        let targets = resolve_targets(&g, &task).unwrap().vertices;
        let labels = build_labels(&g, &task).unwrap();
        let s = make_splits(&targets, Some(&labels), &g, &SplitSpec::stratified(0)).unwrap();
        assert_eq!(s.counts(), (2, 0, 0));
        assert!(matches!(s.warnings[0], TaskWarning::SmallLabel { count: 2, .. }));
    }

    #[test]
    fn ratio_validation() {
        let bad = SplitSpec::StratifiedRandom {
            ratios: [0.8, 0.1, 0.2],
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let neg = SplitSpec::StratifiedRandom {
            ratios: [1.1, -0.05, -0.05],
            seed: 0,
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn time_comparison_rules() {
        assert_eq!(compare_time("2018", "2018"), Ordering::Equal);
        assert_eq!(compare_time("999", "2018"), Ordering::Less);
        assert_eq!(compare_time("2018-05-01", "2018"), Ordering::Equal);
        assert_eq!(compare_time("2019-01-01", "2018-12-31"), Ordering::Greater);
        assert_eq!(compare_time("2017", "2018-06-30"), Ordering::Less);
    }

    #[test]
    fn time_split_missing_value() {
        let g = kg(&format!("<a> {TYPE} <P> .\n"));
        let spec = SplitSpec::TimePredicate {
            time_predicate: "year".into(),
            train_until: "2018".into(),
            valid_until: "2019".into(),
        };
        let targets = vec![g.lookup_iri("a").unwrap()];
        assert!(matches!(
            make_splits(&targets, None, &g, &spec),
            Err(TaskError::MissingTimeValue(_))
        ));
    }

    #[test]
    fn config_parses() {
        let cfg = TaskConfig::from_toml(
            r#"
            [task]
            kind = "node-classification"
            target_type = "http://x/Paper"
            target_predicate = "http://x/venue"
            top_n_labels = 50

            [split]
            schema = "time-predicate"
            time_predicate = "http://x/year"
            train_until = "2018"
            valid_until = "2019"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.task.top_n_labels, Some(50));
        assert!(matches!(cfg.split, Some(SplitSpec::TimePredicate { .. })));
        let cfg = TaskConfig::from_toml(
            "[task]\nkind = \"link-prediction\"\ntarget_type = \"T\"\ntarget_predicate = \"p\"\n[split]\nschema = \"stratified-random\"\n",
        )
        .unwrap();
        assert_eq!(
            cfg.split,
            Some(SplitSpec::StratifiedRandom {
                ratios: [0.8, 0.1, 0.1],
                seed: 0
            })
        );
    }
}
