//! SPARQL 1.1 tab-separated results.

use crate::kg::ntriples::parse_term;
use crate::kg::{Term, TermKind, TermTriple};

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Parses one cell. Empty cells are unbound. Bare numbers and booleans, which
/// the format allows as abbreviations, are expanded to typed literals.
pub fn parse_cell(cell: &str) -> Result<Option<Term>, String> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    if let Some(dt) = bare_datatype(cell) {
        return Ok(Some(Term::literal_token(format!("\"{cell}\"^^<{XSD}{dt}>"))));
    }
    let (term, rest) = parse_term(cell)?;
    if !rest.trim().is_empty() {
        return Err(format!("trailing content in cell: {cell}"));
    }
    Ok(Some(term))
}

fn bare_datatype(cell: &str) -> Option<&'static str> {
    if cell == "true" || cell == "false" {
        return Some("boolean");
    }
    let body = cell.strip_prefix(['+', '-']).unwrap_or(cell);
    if body.is_empty() || !body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    if body.bytes().all(|b| b.is_ascii_digit()) {
        return Some("integer");
    }
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !frac.is_none_or(digits) || (int.is_empty() && frac.is_none_or(str::is_empty)) {
        return None;
    }
    match exponent {
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            (!e.is_empty() && digits(e)).then_some("double")
        }
        None => frac.map(|_| "decimal"),
    }
}

/// Header variables (without `?`) and rows of cells.
pub fn parse_table(body: &str) -> Result<(Vec<String>, Vec<Vec<Option<Term>>>), String> {
    let mut lines = body.lines();
    let header = lines.next().ok_or("empty response")?;
    let vars: Vec<String> = header
        .split('\t')
        .map(|v| v.trim().trim_start_matches(['?', '$']).to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != vars.len() {
            return Err(format!(
                "row {}: {} cells for {} variables",
                i + 1,
                cells.len(),
                vars.len()
            ));
        }
        rows.push(
            cells
                .into_iter()
                .map(parse_cell)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("row {}: {e}", i + 1))?,
        );
    }
    Ok((vars, rows))
}

/// Rows of an `?s ?p ?o` result.
pub fn parse_triples(body: &str) -> Result<Vec<TermTriple>, String> {
    let (vars, rows) = parse_table(body)?;
    let col = |name: &str| {
        vars.iter()
            .position(|v| v == name)
            .ok_or_else(|| format!("missing column ?{name}"))
    };
    let (s, p, o) = (col("s")?, col("p")?, col("o")?);
    rows.into_iter()
        .map(|row| {
            let get = |i: usize| row[i].clone().ok_or("unbound cell in triple row");
            let (subject, predicate, object) = (get(s)?, get(p)?, get(o)?);
            if subject.is_literal() || predicate.kind() != TermKind::Iri {
                return Err(format!("not a valid triple: {subject} {predicate} {object}"));
            }
            Ok(TermTriple::new(subject, predicate.value(), object))
        })
        .collect()
}

/// Single integer of a `COUNT(*)` result.
pub fn parse_count(body: &str) -> Result<u64, String> {
    let (_, rows) = parse_table(body)?;
    let cell = rows
        .first()
        .and_then(|r| r.first())
        .and_then(|c| c.as_ref())
        .ok_or("count result has no value")?;
    let lexical = cell.literal_lexical().ok_or("count is not a literal")?;
    lexical
        .parse()
        .map_err(|_| format!("count is not an integer: {lexical}"))
}
