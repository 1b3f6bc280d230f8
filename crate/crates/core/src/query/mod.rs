//! The global query language.
//!
//! ```text
//! query  := "select" qual ("," qual)* "where" ident "from" ident ("and" filter)*
//! filter := qual op literal
//! qual   := ident "." ident
//! op     := "=" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! Keywords are case-insensitive and reserved; identifiers are
//! case-sensitive. Literals are double-quoted strings (escapes `\"`, `\\`,
//! `\n`, `\t`) or numerals `-?digits(.digits)?`.

mod lexer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::CatalogGraph;
use crate::registry::RegistryError;
use crate::value::{format_float, CompareOp, Scalar};

use lexer::{Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QualifiedName {
    pub entity: String,
    pub attribute: String,
}

impl QualifiedName {
    pub fn new(entity: impl Into<String>, attribute: impl Into<String>) -> Self {
        QualifiedName { entity: entity.into(), attribute: attribute.into() }
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.entity, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Filter {
    pub attribute: QualifiedName,
    pub op: CompareOp,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalQuery {
    pub projections: Vec<QualifiedName>,
    pub subject_entity: String,
    pub workflow: String,
    pub filters: Vec<Filter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("line {line}, column {column}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown workflow `{0}`")]
    UnknownWorkflow(String),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(token: &Token, expected: &[&str]) -> ParseError {
        ParseError {
            line: token.line,
            column: token.column,
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
            found: token.tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(Self::error_at(self.peek(), &[name]))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.advance();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => Err(Self::error_at(&t, &["identifier"])),
        }
    }

    fn qualified(&mut self) -> Result<(QualifiedName, Token), ParseError> {
        let (entity, at) = self.ident()?;
        self.expect(Tok::Dot, "`.`")?;
        let (attribute, _) = self.ident()?;
        Ok((QualifiedName { entity, attribute }, at))
    }

    fn query(&mut self) -> Result<GlobalQuery, ParseError> {
        self.expect(Tok::Select, "`select`")?;
        let mut projections = vec![self.qualified()?];
        loop {
            match self.peek().tok {
                Tok::Comma => {
                    self.advance();
                    projections.push(self.qualified()?);
                }
                Tok::Where => break,
                _ => return Err(Self::error_at(self.peek(), &["`,`", "`where`"])),
            }
        }
        self.advance();
        let (subject_entity, _) = self.ident()?;
        self.expect(Tok::From, "`from`")?;
        let (workflow, _) = self.ident()?;
        let mut filters = Vec::new();
        loop {
            match self.peek().tok {
                Tok::And => {
                    self.advance();
                    filters.push(self.filter()?);
                }
                Tok::Eof => break,
                _ => return Err(Self::error_at(self.peek(), &["`and`", "end of input"])),
            }
        }
        let subject_check = |(name, at): &(QualifiedName, Token)| {
            if name.entity == subject_entity {
                Ok(())
            } else {
                Err(ParseError {
                    line: at.line,
                    column: at.column,
                    expected: vec![format!("entity `{subject_entity}`")],
                    found: format!("entity `{}`", name.entity),
                })
            }
        };
        for p in &projections {
            subject_check(p)?;
        }
        for (f, at) in &filters {
            subject_check(&(f.attribute.clone(), at.clone()))?;
        }
        Ok(GlobalQuery {
            projections: projections.into_iter().map(|(q, _)| q).collect(),
            subject_entity,
            workflow,
            filters: filters.into_iter().map(|(f, _)| f).collect(),
        })
    }

    fn filter(&mut self) -> Result<(Filter, Token), ParseError> {
        let (attribute, at) = self.qualified()?;
        let t = self.advance();
        let Tok::Op(op) = t.tok else {
            return Err(Self::error_at(&t, &["comparison operator"]));
        };
        let t = self.advance();
        let Tok::Literal(value) = t.tok else {
            return Err(Self::error_at(&t, &["string", "number"]));
        };
        Ok((Filter { attribute, op, value }, at))
    }
}

/// Parses query text. Every projection and filter must name the subject
/// entity of the `where` clause.
pub fn parse(text: &str) -> Result<GlobalQuery, ParseError> {
    let tokens = lexer::tokenize(text)?;
    Parser { tokens, pos: 0 }.query()
}

fn render_literal(v: &Scalar, out: &mut String) {
    match v {
        Scalar::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Scalar::Float(f) => out.push_str(&format_float(*f)),
        Scalar::Int(i) => out.push_str(&i.to_string()),
        // No boolean literal exists; quote so the text still parses.
        Scalar::Bool(b) => render_literal(&Scalar::Str(b.to_string()), out),
    }
}

/// Canonical text: lowercase keywords, single spaces, `, ` between
/// projections.
pub fn render(q: &GlobalQuery) -> String {
    let mut out = String::from("select ");
    for (i, p) in q.projections.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&p.to_string());
    }
    out.push_str(&format!(" where {} from {}", q.subject_entity, q.workflow));
    for f in &q.filters {
        out.push_str(&format!(" and {} {} ", f.attribute, f.op));
        render_literal(&f.value, &mut out);
    }
    out
}

impl fmt::Display for GlobalQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// Whether `s` can appear as an identifier in query text.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(lexer::is_ident_start)
        && chars.all(lexer::is_ident_char)
        && !lexer::KEYWORDS.contains(&s.to_ascii_lowercase().as_str())
}

/// Checks the query against the global schema and captured workflows.
pub fn validate(q: &GlobalQuery, catalog: &CatalogGraph) -> Result<(), ValidationError> {
    let registry = catalog.registry();
    if !registry.has_entity(&q.subject_entity) {
        return Err(ValidationError::UnknownEntity(q.subject_entity.clone()));
    }
    let names = q.projections.iter().chain(q.filters.iter().map(|f| &f.attribute));
    for name in names {
        match registry.gcs_attribute(&name.entity, &name.attribute) {
            Ok(_) => {}
            Err(RegistryError::UnknownEntity(e)) => return Err(ValidationError::UnknownEntity(e)),
            Err(_) => return Err(ValidationError::UnknownAttribute(name.to_string())),
        }
    }
    if !catalog.provenance().has_workflow(&q.workflow) {
        return Err(ValidationError::UnknownWorkflow(q.workflow.clone()));
    }
    Ok(())
}
