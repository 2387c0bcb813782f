//! Line-oriented N-Triples reader.
//!
//! Only the subset needed for KG dumps is accepted: one statement per line,
//! IRIs, document-scoped blank nodes and literals with optional language tag
//! or datatype. Literal tokens are kept verbatim.

use super::term::{closing_quote, Term};

/// Parses a single line. Returns `Ok(None)` for blank lines and comments.
pub fn parse_line(line: &str) -> Result<Option<(Term, Term, Term)>, String> {
    let rest = line.trim_start();
    if rest.is_empty() || rest.starts_with('#') {
        return Ok(None);
    }
    let (subject, rest) = parse_term(rest)?;
    if subject.is_literal() {
        return Err("literal in subject position".into());
    }
    let (predicate, rest) = parse_term(rest.trim_start())?;
    if predicate.kind() != super::TermKind::Iri {
        return Err("predicate must be an IRI".into());
    }
    let (object, rest) = parse_term(rest.trim_start())?;
    let rest = rest.trim_start();
    let rest = rest
        .strip_prefix('.')
        .ok_or_else(|| "expected '.' at end of statement".to_string())?;
    let rest = rest.trim();
    if !rest.is_empty() && !rest.starts_with('#') {
        return Err(format!("unexpected trailing content: {rest}"));
    }
    Ok(Some((subject, predicate, object)))
}

/// Parses one term at the start of `input`, returning it and the remainder.
pub fn parse_term(input: &str) -> Result<(Term, &str), String> {
    match input.as_bytes().first() {
        Some(b'<') => {
            let end = input[1..]
                .find('>')
                .ok_or_else(|| "unterminated IRI".to_string())?
                + 1;
            let iri = &input[1..end];
            if iri.is_empty() {
                return Err("empty IRI".into());
            }
            if let Some(bad) = iri
                .chars()
                .find(|c| c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`'))
            {
                return Err(format!("invalid character {bad:?} in IRI"));
            }
            Ok((Term::iri(iri), &input[end + 1..]))
        }
        Some(b'_') => {
            let body = input
                .strip_prefix("_:")
                .ok_or_else(|| "malformed blank node".to_string())?;
            let len = body
                .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.')))
                .unwrap_or(body.len());
            let label = body[..len].trim_end_matches('.');
            if label.is_empty() {
                return Err("empty blank node label".into());
            }
            Ok((Term::blank(label), &body[label.len()..]))
        }
        Some(b'"') => {
            let close = closing_quote(input).ok_or_else(|| "unterminated literal".to_string())?;
            let mut end = close + 1;
            let tail = &input[end..];
            if let Some(lang) = tail.strip_prefix('@') {
                let len = lang
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                    .unwrap_or(lang.len());
                if len == 0 || !lang.as_bytes()[0].is_ascii_alphabetic() {
                    return Err("malformed language tag".into());
                }
                end += 1 + len;
            } else if let Some(dt) = tail.strip_prefix("^^") {
                let (datatype, _) = parse_term(dt)?;
                if datatype.kind() != super::TermKind::Iri {
                    return Err("datatype must be an IRI".into());
                }
                end += 2 + datatype.value().len() + 2;
            }
            Ok((Term::literal_token(&input[..end]), &input[end..]))
        }
        Some(c) => Err(format!("unexpected character {:?}", *c as char)),
        None => Err("unexpected end of line".into()),
    }
}
