use std::fmt;
use std::sync::Arc;

/// Default IRI of the type-assertion predicate.
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Iri,
    Blank,
    Literal,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Iri => "iri",
            TermKind::Blank => "blank",
            TermKind::Literal => "literal",
        }
    }
}

/// An RDF term as it appears in a dump.
///
/// `value` holds the IRI without angle brackets, the blank-node label without
/// the `_:` prefix, or the complete literal token (quotes, escapes, language
/// tag and datatype exactly as written).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    kind: TermKind,
    value: Arc<str>,
}

impl Term {
    pub fn iri(iri: impl Into<Arc<str>>) -> Self {
        Term {
            kind: TermKind::Iri,
            value: iri.into(),
        }
    }

    pub fn blank(label: impl Into<Arc<str>>) -> Self {
        Term {
            kind: TermKind::Blank,
            value: label.into(),
        }
    }

    /// Builds a literal from its complete N-Triples token, e.g. `"2019"^^<...#gYear>`.
    pub fn literal_token(token: impl Into<Arc<str>>) -> Self {
        Term {
            kind: TermKind::Literal,
            value: token.into(),
        }
    }

    /// Builds a plain literal from an unescaped lexical form.
    pub fn plain_literal(lexical: &str) -> Self {
        let mut token = String::with_capacity(lexical.len() + 2);
        token.push('"');
        for c in lexical.chars() {
            match c {
                '"' => token.push_str("\\\""),
                '\\' => token.push_str("\\\\"),
                '\n' => token.push_str("\\n"),
                '\r' => token.push_str("\\r"),
                _ => token.push(c),
            }
        }
        token.push('"');
        Term::literal_token(token)
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    pub(crate) fn shared_value(&self) -> &Arc<str> {
        &self.value
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }

    /// The text between the quotes of a literal, with escapes left as written.
    /// `None` for IRIs and blank nodes.
    pub fn literal_lexical(&self) -> Option<&str> {
        if self.kind != TermKind::Literal {
            return None;
        }
        let v = &*self.value;
        let end = closing_quote(v)?;
        Some(&v[1..end])
    }
}

/// Byte index of the closing quote of a literal token starting with `"`.
pub(crate) fn closing_quote(token: &str) -> Option<usize> {
    let bytes = token.as_bytes();
    if bytes.first() != Some(&b'"') {
        return None;
    }
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(i),
            _ => i += 1,
        }
    }
    None
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.value),
            TermKind::Blank => write!(f, "_:{}", self.value),
            TermKind::Literal => f.write_str(&self.value),
        }
    }
}

/// A triple spelled out with terms rather than graph-local handles. Useful to
/// compare graphs that were encoded with different dictionaries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermTriple {
    pub subject: Term,
    pub predicate: Arc<str>,
    pub object: Term,
}

impl TermTriple {
    pub fn new(subject: Term, predicate: impl Into<Arc<str>>, object: Term) -> Self {
        TermTriple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for TermTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}
