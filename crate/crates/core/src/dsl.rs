//! Line-oriented diagram text format and JSON summary documents.
//!
//! ```text
//! diagram figure1            # optional, first statement only
//! vertex A1
//! vertex A2
//! internal electron A1 A2
//! internal photon A1 A2
//! external electron in A1
//! external electron out A2
//! ```
//!
//! Identifiers match `[A-Za-z][A-Za-z0-9_]*`. Vertices must be declared
//! before they are used. `#` starts a comment that runs to the end of the
//! line.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{
    build_diagram, check_main_condition, Diagram, Direction, ExternalLeg, InternalLine,
    ParticleKind, VertexId,
};
use crate::topology::{is_irreducible, summarize, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownStatement(String),
    UnknownKind(String),
    UnknownDirection(String),
    InvalidIdentifier(String),
    MissingToken(&'static str),
    TrailingToken(String),
    UndeclaredVertex(String),
    DuplicateVertex(String),
    MisplacedHeader,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownStatement(s) => write!(f, "unknown statement `{s}`"),
            ParseErrorKind::UnknownKind(s) => write!(f, "unknown particle kind `{s}`"),
            ParseErrorKind::UnknownDirection(s) => write!(f, "unknown direction `{s}`"),
            ParseErrorKind::InvalidIdentifier(s) => write!(f, "invalid identifier `{s}`"),
            ParseErrorKind::MissingToken(what) => write!(f, "expected {what}"),
            ParseErrorKind::TrailingToken(s) => write!(f, "unexpected `{s}`"),
            ParseErrorKind::UndeclaredVertex(s) => write!(f, "undeclared vertex `{s}`"),
            ParseErrorKind::DuplicateVertex(s) => write!(f, "vertex `{s}` declared twice"),
            ParseErrorKind::MisplacedHeader => {
                f.write_str("`diagram` header must be the first statement")
            }
        }
    }
}

/// A parse failure at a 1-based line and column (columns count characters).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind} (hint: {hint})")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub hint: String,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte offset, column)
    for (column, (offset, ch)) in line.char_indices().enumerate() {
        if ch == '#' {
            if let Some((s, c)) = start.take() {
                tokens.push(Token {
                    text: &line[s..offset],
                    column: c + 1,
                });
            }
            return tokens;
        }
        match (ch.is_whitespace(), start) {
            (true, Some((s, c))) => {
                tokens.push(Token {
                    text: &line[s..offset],
                    column: c + 1,
                });
                start = None;
            }
            (false, None) => start = Some((offset, column)),
            _ => {}
        }
    }
    if let Some((s, c)) = start {
        tokens.push(Token {
            text: &line[s..],
            column: c + 1,
        });
    }
    tokens
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_column: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, column: usize, kind: ParseErrorKind, hint: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
            hint: hint.into(),
        }
    }

    fn next(&mut self, what: &'static str, hint: &str) -> Result<Token<'a>, ParseError> {
        let token = self.tokens.get(self.pos).copied();
        self.pos += 1;
        token.ok_or_else(|| self.error(self.end_column, ParseErrorKind::MissingToken(what), hint))
    }

    fn identifier(&mut self, what: &'static str) -> Result<Token<'a>, ParseError> {
        let token = self.next(what, "identifiers look like `A1` or `v_2`")?;
        if !is_identifier(token.text) {
            return Err(self.error(
                token.column,
                ParseErrorKind::InvalidIdentifier(token.text.to_owned()),
                "identifiers start with a letter followed by letters, digits or `_`",
            ));
        }
        Ok(token)
    }

    fn kind(&mut self) -> Result<ParticleKind, ParseError> {
        let token = self.next("a particle kind", "use `electron` or `photon`")?;
        ParticleKind::ALL
            .into_iter()
            .find(|k| k.keyword() == token.text)
            .ok_or_else(|| {
                self.error(
                    token.column,
                    ParseErrorKind::UnknownKind(token.text.to_owned()),
                    "use `electron` or `photon`",
                )
            })
    }

    fn direction(&mut self) -> Result<Direction, ParseError> {
        let token = self.next("a direction", "use `in` or `out`")?;
        [Direction::Incoming, Direction::Outgoing]
            .into_iter()
            .find(|d| d.keyword() == token.text)
            .ok_or_else(|| {
                self.error(
                    token.column,
                    ParseErrorKind::UnknownDirection(token.text.to_owned()),
                    "use `in` or `out`",
                )
            })
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            Some(extra) => Err(self.error(
                extra.column,
                ParseErrorKind::TrailingToken(extra.text.to_owned()),
                "remove it or start a comment with `#`",
            )),
            None => Ok(()),
        }
    }
}

/// Parses diagram source text. Internal lines get ids `i1, i2, ...` and
/// external legs `x1, x2, ...` in source order.
pub fn parse(source: &str) -> Result<Diagram, ParseError> {
    let mut name = None;
    let mut seen_statement = false;
    let mut vertices: Vec<VertexId> = Vec::new();
    let mut declared = std::collections::HashSet::new();
    let mut internal = Vec::new();
    let mut external = Vec::new();

    for (index, raw) in source.lines().enumerate() {
        let tokens = tokenize(raw);
        let Some(&head) = tokens.first() else {
            continue;
        };
        let mut p = Parser {
            line: index + 1,
            tokens,
            pos: 1,
            end_column: raw.chars().count() + 1,
        };
        let vertex_ref = |p: &mut Parser<'_>,
                          declared: &std::collections::HashSet<String>|
         -> Result<VertexId, ParseError> {
            let token = p.identifier("a vertex identifier")?;
            if !declared.contains(token.text) {
                return Err(p.error(
                    token.column,
                    ParseErrorKind::UndeclaredVertex(token.text.to_owned()),
                    format!("declare it first with `vertex {}`", token.text),
                ));
            }
            Ok(VertexId::from(token.text))
        };

        match head.text {
            "diagram" => {
                if seen_statement {
                    return Err(p.error(
                        head.column,
                        ParseErrorKind::MisplacedHeader,
                        "move the header to the top of the file",
                    ));
                }
                name = Some(p.identifier("a diagram name")?.text.to_owned());
            }
            "vertex" => {
                let token = p.identifier("a vertex identifier")?;
                if !declared.insert(token.text.to_owned()) {
                    return Err(p.error(
                        token.column,
                        ParseErrorKind::DuplicateVertex(token.text.to_owned()),
                        "vertex ids must be unique; rename one of them",
                    ));
                }
                vertices.push(VertexId::from(token.text));
            }
            "internal" => {
                let kind = p.kind()?;
                let a = vertex_ref(&mut p, &declared)?;
                let b = vertex_ref(&mut p, &declared)?;
                internal.push(InternalLine::new(
                    format!("i{}", internal.len() + 1),
                    a,
                    b,
                    kind,
                ));
            }
            "external" => {
                let kind = p.kind()?;
                let direction = p.direction()?;
                let v = vertex_ref(&mut p, &declared)?;
                external.push(ExternalLeg::new(
                    format!("x{}", external.len() + 1),
                    v,
                    kind,
                    direction,
                ));
            }
            other => {
                return Err(p.error(
                    head.column,
                    ParseErrorKind::UnknownStatement(other.to_owned()),
                    "statements are `diagram`, `vertex`, `internal` and `external`",
                ));
            }
        }
        p.finish()?;
        seen_statement = true;
    }

    Ok(build_diagram(vertices, internal, external, name)
        .expect("parser checks references and vertex uniqueness"))
}

/// Canonical text: optional header, vertices sorted by id, internal lines by
/// (kind, sorted endpoints), external legs by (kind, direction, vertex).
///
/// Round-trips through [`parse`] when the name and all vertex ids are valid
/// identifiers; a name that is not an identifier is dropped.
pub fn serialize(d: &Diagram) -> String {
    let mut out = String::new();
    if let Some(name) = d.name().filter(|n| is_identifier(n)) {
        out.push_str(&format!("diagram {name}\n"));
    }
    let mut vertices: Vec<&VertexId> = d.vertices().iter().collect();
    vertices.sort();
    for v in vertices {
        out.push_str(&format!("vertex {v}\n"));
    }
    let mut lines: Vec<_> = d
        .internal_lines()
        .iter()
        .map(|l| {
            let (a, b) = l.sorted_endpoints();
            (l.kind, a, b)
        })
        .collect();
    lines.sort();
    for (kind, a, b) in lines {
        out.push_str(&format!("internal {kind} {a} {b}\n"));
    }
    let mut legs: Vec<_> = d
        .external_legs()
        .iter()
        .map(|l| (l.kind, l.direction, &l.vertex))
        .collect();
    legs.sort();
    for (kind, direction, v) in legs {
        out.push_str(&format!("external {kind} {direction} {v}\n"));
    }
    out
}

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// JSON Schema for [`SummaryDocument`].
pub const SUMMARY_SCHEMA: &str = include_str!("../schema/summary.schema.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryDocument {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub n: usize,
    #[serde(rename = "C")]
    pub components: usize,
    #[serde(rename = "Q")]
    pub contact_points: usize,
    #[serde(rename = "Ne")]
    pub external_electrons: usize,
    #[serde(rename = "Np")]
    pub external_photons: usize,
    #[serde(rename = "Fe")]
    pub internal_electrons: usize,
    #[serde(rename = "Fp")]
    pub internal_photons: usize,
    #[serde(rename = "F")]
    pub internal_lines: usize,
    pub m: usize,
    #[serde(rename = "K")]
    pub power_counter: i64,
    #[serde(rename = "mainCondition")]
    pub main_condition: bool,
    pub irreducible: bool,
    pub physical: bool,
    #[serde(rename = "contactPoints")]
    pub contact_points_list: Vec<String>,
    pub degenerate: bool,
}

pub fn summary_document(d: &Diagram) -> Result<SummaryDocument, TopologyError> {
    let summary = summarize(d)?;
    let mut contacts: Vec<String> = d
        .external_legs()
        .iter()
        .filter(|l| l.kind == ParticleKind::Electron)
        .map(|l| l.vertex.to_string())
        .collect();
    contacts.sort();
    Ok(SummaryDocument {
        schema_version: SUMMARY_SCHEMA_VERSION,
        n: summary.n,
        components: summary.components,
        contact_points: summary.contact_points,
        external_electrons: summary.external_electrons,
        external_photons: summary.external_photons,
        internal_electrons: summary.internal_electrons,
        internal_photons: summary.internal_photons,
        internal_lines: summary.internal_lines,
        m: summary.loops,
        power_counter: summary.power_counter,
        main_condition: check_main_condition(d).main_condition,
        irreducible: is_irreducible(d).irreducible,
        physical: summary.physical,
        contact_points_list: contacts,
        degenerate: summary.degenerate,
    })
}

impl SummaryDocument {
    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}
