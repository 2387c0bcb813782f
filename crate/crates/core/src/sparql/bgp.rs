use std::fmt::Write as _;

use crate::kg::RDF_TYPE;
use crate::task::{TaskKind, TaskSpec};

use super::SparqlError;

/// One step away from the anchor vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hop {
    Out,
    In,
}

/// Which end of the LP bridge a branch grows from. NC branches always use
/// `Subject`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Subject,
    Object,
}

/// Pattern that fixes the anchor vertices of every branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub type_predicate: String,
    pub target_type: String,
    /// LP only: `(p_T, object type)`.
    pub bridge: Option<(String, Option<String>)>,
}

/// An independently pageable sub-query: a path of hops from an anchor. The
/// last hop is the projected triple; earlier hops never follow the type
/// predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub side: Side,
    pub hops: Vec<Hop>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BgpQuery {
    pub header: Header,
    pub branches: Vec<Branch>,
    pub d: u8,
    pub h: u8,
    pub text: String,
}

impl BgpQuery {
    pub fn is_link_prediction(&self) -> bool {
        self.header.bridge.is_some()
    }

    /// LP anchors are joined through the bridge, so rows repeat per link;
    /// those branches are evaluated with DISTINCT.
    pub fn distinct(&self) -> bool {
        self.is_link_prediction()
    }
}

pub fn get_bgp(task: &TaskSpec, d: u8, h: u8) -> Result<BgpQuery, SparqlError> {
    get_bgp_with(task, d, h, RDF_TYPE)
}

pub fn get_bgp_with(
    task: &TaskSpec,
    d: u8,
    h: u8,
    type_predicate: &str,
) -> Result<BgpQuery, SparqlError> {
    task.validate()?;
    if !(1..=2).contains(&d) {
        return Err(SparqlError::UnsupportedParams(format!("d must be 1 or 2, got {d}")));
    }
    if !(1..=2).contains(&h) {
        return Err(SparqlError::UnsupportedParams(format!("h must be 1 or 2, got {h}")));
    }
    let bridge = match task.kind {
        TaskKind::NodeClassification => None,
        TaskKind::LinkPrediction => Some((
            task.target_predicate.clone().unwrap_or_default(),
            task.object_type.clone(),
        )),
    };
    let header = Header {
        type_predicate: type_predicate.to_string(),
        target_type: task.target_type.clone(),
        bridge,
    };
    let dirs: &[Hop] = if d == 1 { &[Hop::Out] } else { &[Hop::Out, Hop::In] };
    let mut paths: Vec<Vec<Hop>> = dirs.iter().map(|&x| vec![x]).collect();
    if h == 2 {
        for &a in dirs {
            for &b in dirs {
                paths.push(vec![a, b]);
            }
        }
    }
    let sides: &[Side] = if header.bridge.is_some() {
        &[Side::Subject, Side::Object]
    } else {
        &[Side::Subject]
    };
    let branches = sides
        .iter()
        .flat_map(|&side| paths.iter().map(move |hops| Branch { side, hops: hops.clone() }))
        .collect();
    let mut q = BgpQuery {
        header,
        branches,
        d,
        h,
        text: String::new(),
    };
    q.text = full_text(&q);
    Ok(q)
}

struct Vars {
    anchor: &'static str,
    s: &'static str,
    o: &'static str,
}

fn anchor_var(side: Side) -> &'static str {
    match side {
        Side::Subject => "?v",
        Side::Object => "?u",
    }
}

impl Branch {
    // Variables bound to the projected subject and object.
    fn vars(&self) -> Vars {
        let anchor = anchor_var(self.side);
        let mid = match self.hops[0] {
            Hop::Out => "?o1",
            Hop::In => "?s1",
        };
        let x = if self.hops.len() == 1 { anchor } else { mid };
        match self.hops[self.hops.len() - 1] {
            Hop::Out => Vars { anchor, s: x, o: "?o" },
            Hop::In => Vars { anchor, s: "?s", o: x },
        }
    }

    /// `(s, p, o)` variables in ORDER BY order.
    pub fn order_vars(&self) -> [&'static str; 3] {
        let v = self.vars();
        [v.s, "?p", v.o]
    }

    fn path_patterns(&self, type_predicate: &str) -> String {
        let v = self.vars();
        let mut out = String::new();
        if self.hops.len() == 2 {
            let (s1, mid) = (v.anchor, if self.hops[0] == Hop::Out { "?o1" } else { "?s1" });
            match self.hops[0] {
                Hop::Out => {
                    let _ = write!(out, "{s1} ?p1 {mid}. ");
                }
                Hop::In => {
                    let _ = write!(out, "{mid} ?p1 {s1}. ");
                }
            }
            let _ = write!(out, "FILTER(?p1 != <{type_predicate}>) ");
        }
        let _ = write!(out, "{} ?p {}.", v.s, v.o);
        out
    }
}

fn type_token(type_predicate: &str) -> String {
    if type_predicate == RDF_TYPE {
        "a".to_string()
    } else {
        format!("<{type_predicate}>")
    }
}

impl Header {
    fn patterns(&self) -> String {
        let a = type_token(&self.type_predicate);
        let mut out = format!("?v {a} <{}>.", self.target_type);
        if let Some((p, object_type)) = &self.bridge {
            let _ = write!(out, " ?v <{p}> ?u.");
            if let Some(t) = object_type {
                let _ = write!(out, " ?u {a} <{t}>.");
            }
        }
        out
    }
}

fn projection(branch: &Branch, style: Projection) -> String {
    let v = branch.vars();
    let (open, close) = match style {
        Projection::Listing => ("", ""),
        Projection::Standard => ("(", ")"),
    };
    let s = if v.s == "?s" {
        "?s".to_string()
    } else {
        format!("{open}{} as ?s{close}", v.s)
    };
    let o = if v.o == "?o" {
        "?o".to_string()
    } else {
        format!("{open}{} as ?o{close}", v.o)
    };
    format!("{s} ?p {o}")
}

#[derive(Clone, Copy)]
enum Projection {
    Listing,
    Standard,
}

// NC: one nested select per branch joined by `union`, in the layout of the
// published d2h1 listing. LP: the bridge pattern is written once and each
// branch becomes a group binding ?s / ?o.
fn full_text(q: &BgpQuery) -> String {
    let tp = &q.header.type_predicate;
    if !q.is_link_prediction() {
        let parts: Vec<String> = q
            .branches
            .iter()
            .map(|b| {
                format!(
                    "select {}\n    where {{ {}\n            {}}}",
                    projection(b, Projection::Listing),
                    q.header.patterns(),
                    b.path_patterns(tp)
                )
            })
            .collect();
        return format!("select ?s ?p ?o {{\n    {} }}", parts.join("\n    union "));
    }
    let groups: Vec<String> = q
        .branches
        .iter()
        .map(|b| {
            let v = b.vars();
            let bind = if v.s != "?s" {
                format!("BIND({} as ?s)", v.s)
            } else {
                format!("BIND({} as ?o)", v.o)
            };
            format!("{{ {} {bind} }}", b.path_patterns(tp))
        })
        .collect();
    format!(
        "select distinct ?s ?p ?o {{\n    {}\n    {} }}",
        q.header.patterns(),
        groups.join("\n    union ")
    )
}

fn where_clause(q: &BgpQuery, branch: &Branch, graph: Option<&str>) -> String {
    let from = graph.map(|g| format!("FROM <{g}> ")).unwrap_or_default();
    format!(
        "{from}WHERE {{ {} {} }}",
        q.header.patterns(),
        branch.path_patterns(&q.header.type_predicate)
    )
}

/// Executable page of one branch: deterministic ORDER BY over the projected
/// variables, then LIMIT / OFFSET.
pub fn render_page(
    q: &BgpQuery,
    branch: usize,
    graph: Option<&str>,
    limit: u64,
    offset: u64,
) -> String {
    let b = &q.branches[branch];
    let distinct = if q.distinct() { "DISTINCT " } else { "" };
    let [s, p, o] = b.order_vars();
    format!(
        "SELECT {distinct}{} {} ORDER BY {s} {p} {o} LIMIT {limit} OFFSET {offset}",
        projection(b, Projection::Standard),
        where_clause(q, b, graph)
    )
}

pub fn render_count(q: &BgpQuery, branch: usize, graph: Option<&str>) -> String {
    let b = &q.branches[branch];
    if q.distinct() {
        let [s, p, o] = b.order_vars();
        let from = graph.map(|g| format!("FROM <{g}> ")).unwrap_or_default();
        format!(
            "SELECT (COUNT(*) AS ?c) {from}WHERE {{ SELECT DISTINCT {s} {p} {o} WHERE {{ {} {} }} }}",
            q.header.patterns(),
            b.path_patterns(&q.header.type_predicate)
        )
    } else {
        format!("SELECT (COUNT(*) AS ?c) {}", where_clause(q, b, graph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nc() -> TaskSpec {
        TaskSpec::node_classification("http://ex.org/Paper", "http://ex.org/venue")
    }

    #[test]
    fn d1h1_has_no_union() {
        let q = get_bgp(&nc(), 1, 1).unwrap();
        assert_eq!(q.branches.len(), 1);
        assert!(!q.text.contains("union"));
        assert!(q.text.contains("?v a <http://ex.org/Paper>."));
    }

    #[test]
    fn variant_branch_counts() {
        let n = |d, h| get_bgp(&nc(), d, h).unwrap().branches.len();
        assert_eq!((n(1, 1), n(2, 1), n(1, 2), n(2, 2)), (1, 2, 2, 6));
    }

    #[test]
    fn hop_limit() {
        assert!(matches!(
            get_bgp(&nc(), 1, 3),
            Err(SparqlError::UnsupportedParams(_))
        ));
        assert!(get_bgp(&nc(), 0, 1).is_err());
    }

    #[test]
    fn custom_type_predicate_is_bracketed() {
        let q = get_bgp_with(&nc(), 1, 1, "http://ex.org/type").unwrap();
        assert!(q.text.contains("?v <http://ex.org/type> <http://ex.org/Paper>."));
    }

    #[test]
    fn page_query_orders_before_slicing() {
        let q = get_bgp(&nc(), 1, 2).unwrap();
        let text = render_page(&q, 1, Some("http://g"), 10, 20);
        assert!(text.contains("FROM <http://g>"));
        assert!(text.contains("?v ?p1 ?o1. FILTER(?p1 != <"));
        assert!(text.ends_with("ORDER BY ?o1 ?p ?o LIMIT 10 OFFSET 20"));
        assert!(text.starts_with("SELECT (?o1 as ?s) ?p ?o"));
    }

    #[test]
    fn count_query() {
        let q = get_bgp(&nc(), 2, 1).unwrap();
        assert_eq!(
            render_count(&q, 1, None),
            "SELECT (COUNT(*) AS ?c) WHERE { ?v a <http://ex.org/Paper>. ?s ?p ?v. }"
        );
    }
}
