//! Typed knowledge-graph store: nodes, labeled links and contexts.
//!
//! The catalog is the single home of every schema, mapping and provenance
//! fact. Links are `(subject, predicate, object)` triples where the object is
//! either another node or a typed literal. Contexts are ordinary nodes of
//! kind [`NodeKind::Context`] whose membership groups nodes and links; they
//! scope lookups but never change triple semantics.
//!
//! Mutation goes through `&mut self`, so the usual single-writer,
//! multi-reader contract falls out of the borrow checker; callers that share
//! a catalog between threads wrap it in a lock or publish clones.

mod pattern;
mod persist;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::Scalar;

pub use pattern::{Binding, MatchOptions, Path, Pattern, PatternTerm, PredicateTerm, Step, TriplePattern};
pub use persist::ParseFailure;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("node `{0}` already exists")]
    DuplicateId(NodeId),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("triple ({subject}, {predicate}, {object}) already exists")]
    DuplicateTriple {
        subject: NodeId,
        predicate: String,
        object: Term,
    },
    #[error("invalid node id `{0}`: ids start with a letter or `_`, contain no whitespace or quotes, and are not `true`/`false`")]
    InvalidId(String),
    #[error("invalid predicate `{0}`")]
    InvalidPredicate(String),
    #[error("invalid literal: {0}")]
    InvalidLiteral(String),
    #[error("unknown link #{0}")]
    UnknownLink(u64),
    #[error("adding `{member}` to context `{context}` would create a membership cycle")]
    ContextCycle { context: NodeId, member: String },
    #[error("i/o failure on {path}: {message}")]
    IoFailure { path: String, message: String },
    #[error(transparent)]
    Parse(#[from] ParseFailure),
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if Self::is_valid(&id) {
            Ok(NodeId(id))
        } else {
            Err(CatalogError::InvalidId(id))
        }
    }

    fn is_valid(id: &str) -> bool {
        let mut chars = id.chars();
        match chars.next() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return false,
        }
        id != "true" && id != "false" && id.chars().all(|c| !c.is_whitespace() && !c.is_control() && c != '"')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for NodeId {
    type Error = CatalogError;

    fn try_from(value: &str) -> Result<Self> {
        NodeId::new(value)
    }
}

macro_rules! node_kinds {
    ($($kind:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum NodeKind {
            $($kind),*
        }

        impl NodeKind {
            pub const ALL: &'static [NodeKind] = &[$(NodeKind::$kind),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(NodeKind::$kind => stringify!($kind)),*
                }
            }
        }

        impl std::str::FromStr for NodeKind {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $(stringify!($kind) => Ok(NodeKind::$kind),)*
                    other => Err(format!("unknown node kind `{other}`")),
                }
            }
        }
    };
}

node_kinds!(
    Concept,
    DatasetSchema,
    Attribute,
    DataStore,
    Database,
    DatabaseSchema,
    Machine,
    Workflow,
    DataTransformation,
    WorkflowExecution,
    DataTransformationExecution,
    AttributeValue,
    Context,
);

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub properties: BTreeMap<String, Scalar>,
}

impl Node {
    pub fn new(id: NodeId, kind: NodeKind) -> Self {
        Node {
            id,
            kind,
            properties: BTreeMap::new(),
        }
    }

    pub fn with_property(mut self, key: impl Into<String>, value: impl Into<Scalar>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }

    pub fn property(&self, key: &str) -> Option<&Scalar> {
        self.properties.get(key)
    }
}

/// Object position of a link: another node or a typed literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Node(NodeId),
    Literal(Scalar),
}

impl Term {
    pub fn as_node(&self) -> Option<&NodeId> {
        match self {
            Term::Node(id) => Some(id),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Scalar> {
        match self {
            Term::Literal(v) => Some(v),
            Term::Node(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Node(id) => write!(f, "{id}"),
            Term::Literal(Scalar::Str(s)) => write!(f, "{s:?}"),
            Term::Literal(v) => write!(f, "{v}"),
        }
    }
}

impl From<NodeId> for Term {
    fn from(id: NodeId) -> Self {
        Term::Node(id)
    }
}

impl From<Scalar> for Term {
    fn from(v: Scalar) -> Self {
        Term::Literal(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub subject: NodeId,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkId(pub u64);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Member {
    Node(NodeId),
    Link(LinkId),
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member::Node(id) => write!(f, "{id}"),
            Member::Link(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone)]
enum Undo {
    Node(NodeId),
    Link(LinkId),
    Membership(NodeId, Member),
    Property(NodeId, String, Option<Scalar>),
}

type PredicateIndex = HashMap<NodeId, BTreeMap<String, BTreeSet<LinkId>>>;

#[derive(Debug, Clone, Default)]
pub struct CatalogGraph {
    nodes: BTreeMap<NodeId, Node>,
    by_kind: HashMap<NodeKind, BTreeSet<NodeId>>,
    links: BTreeMap<LinkId, Link>,
    triples: HashMap<Link, LinkId>,
    outgoing: PredicateIndex,
    incoming: PredicateIndex,
    by_literal: HashMap<Scalar, BTreeSet<LinkId>>,
    by_predicate: HashMap<String, BTreeSet<LinkId>>,
    contexts: BTreeMap<NodeId, BTreeSet<Member>>,
    member_of: HashMap<Member, BTreeSet<NodeId>>,
    next_link: u64,
    journal: Option<Vec<Undo>>,
}

static EMPTY_LINKS: BTreeSet<LinkId> = BTreeSet::new();

impl CatalogGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn add_node(&mut self, node: Node, context: Option<&NodeId>) -> Result<NodeId> {
        if self.nodes.contains_key(&node.id) {
            return Err(CatalogError::DuplicateId(node.id));
        }
        if let Some(ctx) = context {
            self.check_context(ctx)?;
        }
        if let Some((key, _)) = node.properties.iter().find(|(_, v)| !v.is_finite()) {
            return Err(CatalogError::InvalidLiteral(format!(
                "property `{key}` of `{}` is not finite",
                node.id
            )));
        }
        let id = node.id.clone();
        self.by_kind.entry(node.kind).or_default().insert(id.clone());
        self.nodes.insert(id.clone(), node);
        self.record(Undo::Node(id.clone()));
        if let Some(ctx) = context {
            self.insert_membership(ctx.clone(), Member::Node(id.clone()));
        }
        Ok(id)
    }

    pub fn add_link(
        &mut self,
        subject: &NodeId,
        predicate: &str,
        object: impl Into<Term>,
    ) -> Result<LinkId> {
        let object = object.into();
        if !self.nodes.contains_key(subject) {
            return Err(CatalogError::UnknownNode(subject.to_string()));
        }
        if predicate.is_empty() || predicate.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(CatalogError::InvalidPredicate(predicate.to_owned()));
        }
        match &object {
            Term::Node(id) if !self.nodes.contains_key(id) => {
                return Err(CatalogError::UnknownNode(id.to_string()));
            }
            Term::Literal(v) if !v.is_finite() => {
                return Err(CatalogError::InvalidLiteral(format!("{v} is not finite")));
            }
            _ => {}
        }
        let link = Link {
            subject: subject.clone(),
            predicate: predicate.to_owned(),
            object,
        };
        if self.triples.contains_key(&link) {
            return Err(CatalogError::DuplicateTriple {
                subject: link.subject,
                predicate: link.predicate,
                object: link.object,
            });
        }
        let id = LinkId(self.next_link);
        self.next_link += 1;
        self.index_link(id, &link);
        self.triples.insert(link.clone(), id);
        self.links.insert(id, link);
        self.record(Undo::Link(id));
        Ok(id)
    }

    /// Adds a link, or returns the existing id when the triple is already present.
    pub fn ensure_link(
        &mut self,
        subject: &NodeId,
        predicate: &str,
        object: impl Into<Term>,
    ) -> Result<LinkId> {
        match self.add_link(subject, predicate, object) {
            Err(CatalogError::DuplicateTriple {
                subject,
                predicate,
                object,
            }) => Ok(self.triples[&Link {
                subject,
                predicate,
                object,
            }]),
            other => other,
        }
    }

    pub fn add_to_context(&mut self, context: &NodeId, member: Member) -> Result<()> {
        self.check_context(context)?;
        match &member {
            Member::Node(id) => {
                let node = self
                    .nodes
                    .get(id)
                    .ok_or_else(|| CatalogError::UnknownNode(id.to_string()))?;
                if node.kind == NodeKind::Context && self.context_reaches(id, context) {
                    return Err(CatalogError::ContextCycle {
                        context: context.clone(),
                        member: id.to_string(),
                    });
                }
            }
            Member::Link(id) => {
                if !self.links.contains_key(id) {
                    return Err(CatalogError::UnknownLink(id.0));
                }
            }
        }
        self.insert_membership(context.clone(), member);
        Ok(())
    }

    pub fn set_property(&mut self, node: &NodeId, key: &str, value: Scalar) -> Result<()> {
        if !value.is_finite() {
            return Err(CatalogError::InvalidLiteral(format!("{value} is not finite")));
        }
        let entry = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| CatalogError::UnknownNode(node.to_string()))?;
        let old = entry.properties.insert(key.to_owned(), value);
        self.record(Undo::Property(node.clone(), key.to_owned(), old));
        Ok(())
    }

    pub fn remove_link(&mut self, id: LinkId) -> Result<Link> {
        let link = self.links.remove(&id).ok_or(CatalogError::UnknownLink(id.0))?;
        self.triples.remove(&link);
        self.unindex_link(id, &link);
        self.drop_member(&Member::Link(id));
        Ok(link)
    }

    /// Removes a node together with every link touching it and every
    /// membership it takes part in.
    pub fn remove_node(&mut self, id: &NodeId) -> Result<Node> {
        if !self.nodes.contains_key(id) {
            return Err(CatalogError::UnknownNode(id.to_string()));
        }
        let touching: BTreeSet<LinkId> = self
            .outgoing
            .get(id)
            .into_iter()
            .chain(self.incoming.get(id))
            .flat_map(|m| m.values().flatten().copied())
            .collect();
        for link in touching {
            self.remove_link(link)?;
        }
        if let Some(members) = self.contexts.remove(id) {
            for m in members {
                if let Some(set) = self.member_of.get_mut(&m) {
                    set.remove(id);
                    if set.is_empty() {
                        self.member_of.remove(&m);
                    }
                }
            }
        }
        self.drop_member(&Member::Node(id.clone()));
        let node = self.nodes.remove(id).expect("checked above");
        if let Some(set) = self.by_kind.get_mut(&node.kind) {
            set.remove(id);
        }
        Ok(node)
    }

    /// Runs `f` against the catalog; when it fails every addition it made is
    /// rolled back. Removals are not journaled and must not happen inside.
    pub fn atomically<T, E>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, E>) -> Result<T, E> {
        let outer = self.journal.replace(Vec::new());
        let result = f(self);
        let journal = std::mem::replace(&mut self.journal, outer).unwrap_or_default();
        match result {
            Ok(v) => {
                if let Some(outer) = self.journal.as_mut() {
                    outer.extend(journal);
                }
                Ok(v)
            }
            Err(e) => {
                for undo in journal.into_iter().rev() {
                    self.undo(undo);
                }
                Err(e)
            }
        }
    }

    fn undo(&mut self, undo: Undo) {
        let saved = self.journal.take();
        match undo {
            Undo::Node(id) => {
                let _ = self.remove_node(&id);
            }
            Undo::Link(id) => {
                let _ = self.remove_link(id);
            }
            Undo::Membership(ctx, member) => {
                if let Some(set) = self.contexts.get_mut(&ctx) {
                    set.remove(&member);
                }
                if let Some(set) = self.member_of.get_mut(&member) {
                    set.remove(&ctx);
                    if set.is_empty() {
                        self.member_of.remove(&member);
                    }
                }
            }
            Undo::Property(id, key, old) => {
                if let Some(node) = self.nodes.get_mut(&id) {
                    match old {
                        Some(v) => node.properties.insert(key, v),
                        None => node.properties.remove(&key),
                    };
                }
            }
        }
        self.journal = saved;
    }

    fn record(&mut self, undo: Undo) {
        if let Some(journal) = self.journal.as_mut() {
            journal.push(undo);
        }
    }

    // ---- reads ----

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.by_kind
            .get(&kind)
            .into_iter()
            .flatten()
            .filter_map(|id| self.nodes.get(id))
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().map(|(id, l)| (*id, l))
    }

    pub fn link_id(&self, subject: &NodeId, predicate: &str, object: &Term) -> Option<LinkId> {
        // A lookup key has to be owned; go through the index instead.
        self.outgoing_ids(subject.as_str(), predicate)
            .iter()
            .copied()
            .find(|id| self.links[id].object == *object)
    }

    pub fn contains_triple(&self, subject: &NodeId, predicate: &str, object: &Term) -> bool {
        self.link_id(subject, predicate, object).is_some()
    }

    /// Objects of `subject --predicate-->`, in insertion order.
    pub fn objects<'a>(&'a self, subject: &str, predicate: &str) -> impl Iterator<Item = &'a Term> + 'a {
        self.outgoing_ids(subject, predicate)
            .iter()
            .map(move |id| &self.links[id].object)
    }

    /// Subjects of `? --predicate--> object` for a node-valued object.
    pub fn subjects<'a>(&'a self, predicate: &str, object: &str) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.incoming_ids(object, predicate)
            .iter()
            .map(move |id| &self.links[id].subject)
    }

    pub fn first_object_node(&self, subject: &str, predicate: &str) -> Option<&NodeId> {
        self.objects(subject, predicate).find_map(Term::as_node)
    }

    pub fn first_literal(&self, subject: &str, predicate: &str) -> Option<&Scalar> {
        self.objects(subject, predicate).find_map(Term::as_literal)
    }

    pub fn context_members(&self, context: &str) -> Option<&BTreeSet<Member>> {
        self.contexts.get(context)
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&NodeId, &BTreeSet<Member>)> {
        self.contexts.iter()
    }

    pub fn contexts_of(&self, member: &Member) -> impl Iterator<Item = &NodeId> {
        self.member_of.get(member).into_iter().flatten()
    }

    /// All links that belong to `context`, directly or through nested contexts.
    pub fn links_in_context(&self, context: &str) -> BTreeSet<LinkId> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![context.to_owned()];
        while let Some(ctx) = stack.pop() {
            if !seen.insert(ctx.clone()) {
                continue;
            }
            for m in self.contexts.get(ctx.as_str()).into_iter().flatten() {
                match m {
                    Member::Link(id) => {
                        out.insert(*id);
                    }
                    Member::Node(id) => {
                        if self.contexts.contains_key(id) {
                            stack.push(id.to_string());
                        }
                    }
                }
            }
        }
        out
    }

    pub(crate) fn outgoing_ids(&self, subject: &str, predicate: &str) -> &BTreeSet<LinkId> {
        self.outgoing
            .get(subject)
            .and_then(|m| m.get(predicate))
            .unwrap_or(&EMPTY_LINKS)
    }

    pub(crate) fn incoming_ids(&self, object: &str, predicate: &str) -> &BTreeSet<LinkId> {
        self.incoming
            .get(object)
            .and_then(|m| m.get(predicate))
            .unwrap_or(&EMPTY_LINKS)
    }

    pub(crate) fn outgoing_all(&self, subject: &str) -> impl Iterator<Item = LinkId> + '_ {
        self.outgoing.get(subject).into_iter().flat_map(|m| m.values().flatten().copied())
    }

    pub(crate) fn incoming_all(&self, object: &str) -> impl Iterator<Item = LinkId> + '_ {
        self.incoming.get(object).into_iter().flat_map(|m| m.values().flatten().copied())
    }

    pub(crate) fn literal_ids(&self, value: &Scalar) -> &BTreeSet<LinkId> {
        self.by_literal.get(value).unwrap_or(&EMPTY_LINKS)
    }

    pub(crate) fn predicate_ids(&self, predicate: &str) -> &BTreeSet<LinkId> {
        self.by_predicate.get(predicate).unwrap_or(&EMPTY_LINKS)
    }

    pub(crate) fn link_unchecked(&self, id: LinkId) -> &Link {
        &self.links[&id]
    }

    // ---- internals ----

    fn check_context(&self, ctx: &NodeId) -> Result<()> {
        match self.nodes.get(ctx) {
            Some(n) if n.kind == NodeKind::Context => Ok(()),
            _ => Err(CatalogError::UnknownContext(ctx.to_string())),
        }
    }

    /// True when `to` is `from` or is nested (transitively) inside `from`.
    fn context_reaches(&self, from: &NodeId, to: &NodeId) -> bool {
        let mut stack = vec![from.clone()];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if &c == to {
                return true;
            }
            if !seen.insert(c.clone()) {
                continue;
            }
            for m in self.contexts.get(&c).into_iter().flatten() {
                if let Member::Node(n) = m {
                    if self.contexts.contains_key(n) || self.nodes.get(n).is_some_and(|x| x.kind == NodeKind::Context) {
                        stack.push(n.clone());
                    }
                }
            }
        }
        false
    }

    fn insert_membership(&mut self, ctx: NodeId, member: Member) {
        if self.contexts.entry(ctx.clone()).or_default().insert(member.clone()) {
            self.member_of.entry(member.clone()).or_default().insert(ctx.clone());
            self.record(Undo::Membership(ctx, member));
        }
    }

    fn drop_member(&mut self, member: &Member) {
        if let Some(ctxs) = self.member_of.remove(member) {
            for ctx in ctxs {
                if let Some(set) = self.contexts.get_mut(&ctx) {
                    set.remove(member);
                }
            }
        }
    }

    fn index_link(&mut self, id: LinkId, link: &Link) {
        self.outgoing
            .entry(link.subject.clone())
            .or_default()
            .entry(link.predicate.clone())
            .or_default()
            .insert(id);
        match &link.object {
            Term::Node(o) => {
                self.incoming
                    .entry(o.clone())
                    .or_default()
                    .entry(link.predicate.clone())
                    .or_default()
                    .insert(id);
            }
            Term::Literal(v) => {
                self.by_literal.entry(v.clone()).or_default().insert(id);
            }
        }
        self.by_predicate.entry(link.predicate.clone()).or_default().insert(id);
    }

    fn unindex_link(&mut self, id: LinkId, link: &Link) {
        fn drop_from(index: &mut PredicateIndex, key: &NodeId, predicate: &str, id: LinkId) {
            if let Some(m) = index.get_mut(key) {
                if let Some(set) = m.get_mut(predicate) {
                    set.remove(&id);
                    if set.is_empty() {
                        m.remove(predicate);
                    }
                }
                if m.is_empty() {
                    index.remove(key);
                }
            }
        }
        drop_from(&mut self.outgoing, &link.subject, &link.predicate, id);
        match &link.object {
            Term::Node(o) => drop_from(&mut self.incoming, o, &link.predicate, id),
            Term::Literal(v) => {
                if let Some(set) = self.by_literal.get_mut(v) {
                    set.remove(&id);
                    if set.is_empty() {
                        self.by_literal.remove(v);
                    }
                }
            }
        }
        if let Some(set) = self.by_predicate.get_mut(&link.predicate) {
            set.remove(&id);
            if set.is_empty() {
                self.by_predicate.remove(&link.predicate);
            }
        }
    }

    /// Context membership with link members replaced by their triples, so two
    /// catalogs can be compared independently of link numbering.
    fn membership_by_triple(&self) -> BTreeMap<&NodeId, BTreeSet<MemberKey<'_>>> {
        self.contexts
            .iter()
            .filter(|(_, members)| !members.is_empty())
            .map(|(ctx, members)| {
                let keys = members
                    .iter()
                    .map(|m| match m {
                        Member::Node(id) => MemberKey::Node(id),
                        Member::Link(id) => MemberKey::Link(&self.links[id]),
                    })
                    .collect();
                (ctx, keys)
            })
            .collect()
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum MemberKey<'a> {
    Node(&'a NodeId),
    Link(&'a Link),
}

/// Structural identity: same node set, same triples, same context
/// membership. Link numbering is not part of the identity.
impl PartialEq for CatalogGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.links.len() == other.links.len()
            && self.links.values().all(|l| other.triples.contains_key(l))
            && self.membership_by_triple() == other.membership_by_triple()
    }
}
