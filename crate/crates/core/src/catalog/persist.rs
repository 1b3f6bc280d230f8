//! Line-oriented text persistence.
//!
//! ```text
//! N <id> <kind> <json property map>
//! L <subject> <predicate> <object>
//! C <context-id> <member>
//! ```
//!
//! A link object is either a bare node id or a JSON scalar literal
//! (`"text"`, `12`, `1.5`, `true`). A context member is a node id or `#<n>`,
//! the zero-based position of an `L` record in the file. Blank lines and
//! lines starting with `%` are ignored.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{CatalogError, CatalogGraph, LinkId, Member, Node, NodeId, NodeKind, Result, Term};
use crate::value::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseFailure {
    pub line: usize,
    pub message: String,
}

impl CatalogGraph {
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for node in self.nodes.values() {
            let props = serde_json::to_string(&node.properties).map_err(io::Error::other)?;
            writeln!(out, "N {} {} {}", node.id, node.kind, props)?;
        }
        let mut position = HashMap::with_capacity(self.links.len());
        for (i, (id, link)) in self.links.iter().enumerate() {
            position.insert(*id, i);
            let object = match &link.object {
                Term::Node(n) => n.to_string(),
                Term::Literal(v) => serde_json::to_string(v).map_err(io::Error::other)?,
            };
            writeln!(out, "L {} {} {}", link.subject, link.predicate, object)?;
        }
        for (ctx, members) in &self.contexts {
            for m in members {
                match m {
                    Member::Node(n) => writeln!(out, "C {ctx} {n}")?,
                    Member::Link(l) => writeln!(out, "C {ctx} #{}", position[l])?,
                }
            }
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |e: io::Error| CatalogError::IoFailure {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let file = File::create(path).map_err(io_err)?;
        self.write_to(BufWriter::new(file)).map_err(io_err)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CatalogGraph> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| CatalogError::IoFailure {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::read_from(BufReader::new(file)).map_err(|e| match e {
            CatalogError::IoFailure { message, .. } => CatalogError::IoFailure {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<CatalogGraph> {
        let mut graph = CatalogGraph::new();
        let mut links: Vec<LinkId> = Vec::new();
        for (index, line) in input.lines().enumerate() {
            let lineno = index + 1;
            let line = line.map_err(|e| CatalogError::IoFailure {
                path: String::new(),
                message: e.to_string(),
            })?;
            let fail = |message: String| {
                CatalogError::Parse(ParseFailure {
                    line: lineno,
                    message,
                })
            };
            if line.trim().is_empty() || line.starts_with('%') {
                continue;
            }
            let (tag, rest) = line.split_once(' ').ok_or_else(|| fail("missing fields".into()))?;
            match tag {
                "N" => {
                    let mut parts = rest.splitn(3, ' ');
                    let (Some(id), Some(kind), Some(props)) = (parts.next(), parts.next(), parts.next()) else {
                        return Err(fail("expected `N <id> <kind> <properties>`".into()));
                    };
                    let id = NodeId::new(id).map_err(|e| fail(e.to_string()))?;
                    let kind: NodeKind = kind.parse().map_err(fail)?;
                    let properties: BTreeMap<String, Scalar> =
                        serde_json::from_str(props).map_err(|e| fail(format!("bad property map: {e}")))?;
                    let node = Node { id, kind, properties };
                    graph.add_node(node, None).map_err(|e| fail(e.to_string()))?;
                }
                "L" => {
                    let mut parts = rest.splitn(3, ' ');
                    let (Some(subject), Some(predicate), Some(object)) = (parts.next(), parts.next(), parts.next())
                    else {
                        return Err(fail("expected `L <subject> <predicate> <object>`".into()));
                    };
                    let subject = NodeId::new(subject).map_err(|e| fail(e.to_string()))?;
                    let object = parse_object(object).map_err(&fail)?;
                    let id = graph
                        .add_link(&subject, predicate, object)
                        .map_err(|e| fail(e.to_string()))?;
                    links.push(id);
                }
                "C" => {
                    let (ctx, member) = rest
                        .split_once(' ')
                        .ok_or_else(|| fail("expected `C <context> <member>`".into()))?;
                    let ctx = NodeId::new(ctx).map_err(|e| fail(e.to_string()))?;
                    let member = match member.strip_prefix('#') {
                        Some(n) => {
                            let pos: usize = n.parse().map_err(|_| fail(format!("bad link reference `{member}`")))?;
                            let id = links
                                .get(pos)
                                .ok_or_else(|| fail(format!("link reference #{pos} out of range")))?;
                            Member::Link(*id)
                        }
                        None => Member::Node(NodeId::new(member).map_err(|e| fail(e.to_string()))?),
                    };
                    graph.add_to_context(&ctx, member).map_err(|e| fail(e.to_string()))?;
                }
                other => return Err(fail(format!("unknown record tag `{other}`"))),
            }
        }
        Ok(graph)
    }
}

fn parse_object(text: &str) -> std::result::Result<Term, String> {
    let starts_literal = text.starts_with(['"', '-']) || text.starts_with(|c: char| c.is_ascii_digit());
    if starts_literal || text == "true" || text == "false" {
        serde_json::from_str::<Scalar>(text)
            .map(Term::Literal)
            .map_err(|e| format!("bad literal `{text}`: {e}"))
    } else {
        NodeId::new(text).map(Term::Node).map_err(|e| e.to_string())
    }
}
