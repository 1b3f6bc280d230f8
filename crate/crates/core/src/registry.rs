//! Global and local schema registration on top of the catalog, plus the
//! alias mappings that tie local attributes to global ones.
//!
//! Global entities live in the `gcs` context; every data store gets its own
//! context. Aliases are stored as `local alias global` and resolved in the
//! inverse direction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, CatalogGraph, Member, Node, NodeId, NodeKind, Term};
use crate::value::Scalar;
use crate::vocab::{self, ids};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("entity `{0}` is already registered")]
    DuplicateEntity(String),
    #[error("referred target `{0}` does not exist")]
    UnknownReferredTarget(String),
    #[error("data store `{0}` is already registered")]
    DuplicateStore(String),
    #[error("dataset `{dataset}` appears more than once in store `{store}`")]
    DuplicateDataset { store: String, dataset: String },
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown data store `{0}`")]
    UnknownStore(String),
    #[error("unknown dataset `{dataset}` in store `{store}`")]
    UnknownDataset { store: String, dataset: String },
    #[error("dataset `{dataset}` in store `{store}` has no identifier")]
    MissingIdentifier { store: String, dataset: String },
    #[error("attribute `{attribute}` matches several datasets: {candidates:?}")]
    AmbiguousAttribute { attribute: String, candidates: Vec<String> },
    #[error("alias {lcs}@{store} -> {gcs} already exists")]
    DuplicateAlias { gcs: String, lcs: String, store: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;

/// Splits `Entity.attr` on its first dot.
pub fn split_qualified(name: &str) -> Option<(&str, &str)> {
    let (entity, attr) = name.split_once('.')?;
    if entity.is_empty() || attr.is_empty() {
        return None;
    }
    Some((entity, attr))
}

fn qualified(name: &str) -> Result<(&str, &str)> {
    split_qualified(name).ok_or_else(|| RegistryError::UnknownAttribute(name.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StoreKind {
    FileSystem,
    DocumentDB,
    RelationalDB,
    TripleStore,
}

impl StoreKind {
    pub const ALL: [StoreKind; 4] = [
        StoreKind::FileSystem,
        StoreKind::DocumentDB,
        StoreKind::RelationalDB,
        StoreKind::TripleStore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StoreKind::FileSystem => "FileSystem",
            StoreKind::DocumentDB => "DocumentDB",
            StoreKind::RelationalDB => "RelationalDB",
            StoreKind::TripleStore => "TripleStore",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for StoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An attribute declaration. In ingestion documents a plain string is
/// shorthand for a simple attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "AttributeDefRepr")]
pub struct AttributeDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub complex: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<AttributeDef>,
    /// Secondary spellings resolving to the same attribute node.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also_known_as: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AttributeDefRepr {
    Name(String),
    Full {
        name: String,
        #[serde(default)]
        complex: bool,
        #[serde(default)]
        members: Vec<AttributeDef>,
        #[serde(default)]
        also_known_as: Vec<String>,
    },
}

impl From<AttributeDefRepr> for AttributeDef {
    fn from(repr: AttributeDefRepr) -> Self {
        match repr {
            AttributeDefRepr::Name(name) => AttributeDef::simple(name),
            AttributeDefRepr::Full { name, complex, members, also_known_as } => {
                AttributeDef { name, complex, members, also_known_as }
            }
        }
    }
}

impl AttributeDef {
    pub fn simple(name: impl Into<String>) -> Self {
        AttributeDef { name: name.into(), complex: false, members: Vec::new(), also_known_as: Vec::new() }
    }

    pub fn complex(name: impl Into<String>, members: Vec<AttributeDef>) -> Self {
        AttributeDef { name: name.into(), complex: true, members, also_known_as: Vec::new() }
    }

    pub fn also_known_as(mut self, alt: impl Into<String>) -> Self {
        self.also_known_as.push(alt.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferredDef {
    pub attribute: String,
    /// `Dataset.attr`
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchemaDef {
    pub name: String,
    pub identifier: String,
    pub attributes: Vec<AttributeDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub referred: Vec<ReferredDef>,
}

impl DatasetSchemaDef {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        identifier: impl Into<String>,
        attributes: impl IntoIterator<Item = S>,
    ) -> Self {
        DatasetSchemaDef {
            name: name.into(),
            identifier: identifier.into(),
            attributes: attributes.into_iter().map(|a| AttributeDef::simple(a)).collect(),
            referred: Vec::new(),
        }
    }

    pub fn with_attribute(mut self, attr: AttributeDef) -> Self {
        self.attributes.push(attr);
        self
    }

    pub fn referring(mut self, attribute: impl Into<String>, target: impl Into<String>) -> Self {
        self.referred.push(ReferredDef { attribute: attribute.into(), target: target.into() });
        self
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes
            .iter()
            .find(|a| a.name == name || a.also_known_as.iter().any(|n| n == name))
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(RegistryError::InvalidSchema(msg));
        if !valid_name(&self.name) {
            return invalid(format!("bad dataset name `{}`", self.name));
        }
        let mut seen = BTreeSet::new();
        fn walk<'a>(
            attrs: &'a [AttributeDef],
            seen: &mut BTreeSet<&'a str>,
            dataset: &str,
        ) -> Result<()> {
            for a in attrs {
                for n in std::iter::once(&a.name).chain(&a.also_known_as) {
                    if !valid_name(n) {
                        return Err(RegistryError::InvalidSchema(format!("bad attribute name `{n}` in `{dataset}`")));
                    }
                    if !seen.insert(n.as_str()) {
                        return Err(RegistryError::InvalidSchema(format!(
                            "attribute `{n}` declared twice in `{dataset}`"
                        )));
                    }
                }
                if a.complex == a.members.is_empty() {
                    return Err(RegistryError::InvalidSchema(format!(
                        "attribute `{}` in `{dataset}`: members must be given exactly when complex",
                        a.name
                    )));
                }
                walk(&a.members, seen, dataset)?;
            }
            Ok(())
        }
        walk(&self.attributes, &mut seen, &self.name)?;
        match self.attributes.iter().find(|a| a.name == self.identifier) {
            Some(a) if !a.complex => {}
            Some(_) => return invalid(format!("identifier `{}` of `{}` is complex", self.identifier, self.name)),
            None => {
                return invalid(format!(
                    "identifier `{}` is not an attribute of `{}`",
                    self.identifier, self.name
                ))
            }
        }
        for r in &self.referred {
            if self.attribute(&r.attribute).is_none() {
                return invalid(format!("referred attribute `{}` is not in `{}`", r.attribute, self.name));
            }
        }
        Ok(())
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains('.') && !name.chars().any(char::is_control)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDef {
    pub name: String,
    #[serde(default)]
    pub datasets: Vec<DatasetSchemaDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseDef {
    pub name: String,
    #[serde(default)]
    pub schemas: Vec<SchemaDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataStoreDescriptor {
    pub name: String,
    pub store_kind: StoreKind,
    pub machine: String,
    #[serde(default)]
    pub databases: Vec<DatabaseDef>,
}

impl DataStoreDescriptor {
    /// A store holding one database with one schema.
    pub fn single(
        name: impl Into<String>,
        store_kind: StoreKind,
        machine: impl Into<String>,
        database: impl Into<String>,
        schema: impl Into<String>,
        datasets: Vec<DatasetSchemaDef>,
    ) -> Self {
        DataStoreDescriptor {
            name: name.into(),
            store_kind,
            machine: machine.into(),
            databases: vec![DatabaseDef {
                name: database.into(),
                schemas: vec![SchemaDef { name: schema.into(), datasets }],
            }],
        }
    }

    pub fn datasets(&self) -> impl Iterator<Item = &DatasetSchemaDef> {
        self.databases.iter().flat_map(|d| &d.schemas).flat_map(|s| &s.datasets)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(RegistryError::InvalidSchema(msg));
        if self.name.is_empty() || self.machine.is_empty() {
            return invalid("store and machine names must be non-empty".into());
        }
        let mut dbs = BTreeSet::new();
        for db in &self.databases {
            if !dbs.insert(&db.name) {
                return invalid(format!("database `{}` declared twice in `{}`", db.name, self.name));
            }
            let mut schemas = BTreeSet::new();
            for s in &db.schemas {
                if !schemas.insert(&s.name) {
                    return invalid(format!("schema `{}` declared twice in `{}`", s.name, db.name));
                }
            }
        }
        let mut datasets = BTreeSet::new();
        for d in self.datasets() {
            d.validate()?;
            if !datasets.insert(&d.name) {
                return Err(RegistryError::DuplicateDataset { store: self.name.clone(), dataset: d.name.clone() });
            }
        }
        Ok(())
    }
}

/// `lcs_attr` (`Dataset.attr` in `store`) means the same as `gcs_attr`
/// (`Entity.attr`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AliasMapping {
    pub gcs_attr: String,
    pub lcs_attr: String,
    pub store: String,
}

impl AliasMapping {
    pub fn new(gcs_attr: impl Into<String>, lcs_attr: impl Into<String>, store: impl Into<String>) -> Self {
        AliasMapping { gcs_attr: gcs_attr.into(), lcs_attr: lcs_attr.into(), store: store.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeRef {
    pub store: String,
    pub dataset: String,
    pub attribute: String,
    pub is_identifier: bool,
}

impl fmt::Display for AttributeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}@{}", self.dataset, self.attribute, self.store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcsAttribute {
    pub id: NodeId,
    pub entity: String,
    /// Canonical name, even when looked up by a secondary spelling.
    pub name: String,
    pub complex: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoreInfo {
    pub name: String,
    pub kind: StoreKind,
    pub machine: String,
}

pub struct SchemaRegistry<G> {
    graph: G,
}

impl CatalogGraph {
    pub fn registry(&self) -> SchemaRegistry<&CatalogGraph> {
        SchemaRegistry::new(self)
    }

    pub fn registry_mut(&mut self) -> SchemaRegistry<&mut CatalogGraph> {
        SchemaRegistry::new(self)
    }
}

fn name_of(graph: &CatalogGraph, id: &str) -> Option<String> {
    graph.first_literal(id, vocab::NAME).and_then(Scalar::as_str).map(str::to_owned)
}

impl<G: Deref<Target = CatalogGraph>> SchemaRegistry<G> {
    pub fn new(graph: G) -> Self {
        SchemaRegistry { graph }
    }

    pub fn graph(&self) -> &CatalogGraph {
        &self.graph
    }

    pub fn into_inner(self) -> G {
        self.graph
    }

    pub fn gcs_entities(&self) -> Vec<String> {
        let Some(members) = self.graph.context_members(ids::gcs_context().as_str()) else {
            return Vec::new();
        };
        members
            .iter()
            .filter_map(|m| match m {
                Member::Node(id) => self.graph.node(id.as_str()),
                Member::Link(_) => None,
            })
            .filter(|n| n.kind == NodeKind::DatasetSchema)
            .filter_map(|n| name_of(&self.graph, n.id.as_str()))
            .collect()
    }

    pub fn has_entity(&self, entity: &str) -> bool {
        self.graph.contains_node(ids::gcs_dataset(entity).as_str())
    }

    /// Looks up a global attribute by its canonical or secondary name.
    pub fn gcs_attribute(&self, entity: &str, attr: &str) -> Result<GcsAttribute> {
        let dataset = ids::gcs_dataset(entity);
        if !self.graph.contains_node(dataset.as_str()) {
            return Err(RegistryError::UnknownEntity(entity.to_owned()));
        }
        let direct = ids::gcs_attribute(entity, attr);
        let id = if self.graph.contains_node(direct.as_str()) {
            direct
        } else {
            self.graph
                .subjects(vocab::IS_ATTRIBUTE_OF, dataset.as_str())
                .find(|a| {
                    self.graph.contains_triple(a, vocab::ALT_NAME, &Term::Literal(Scalar::str(attr)))
                })
                .cloned()
                .ok_or_else(|| RegistryError::UnknownAttribute(format!("{entity}.{attr}")))?
        };
        let name = name_of(&self.graph, id.as_str()).unwrap_or_else(|| attr.to_owned());
        let complex = matches!(
            self.graph.node(id.as_str()).and_then(|n| n.property("complex")),
            Some(Scalar::Bool(true))
        );
        Ok(GcsAttribute { id, entity: entity.to_owned(), name, complex })
    }

    pub fn gcs_attribute_qualified(&self, qualified_name: &str) -> Result<GcsAttribute> {
        let (entity, attr) = qualified(qualified_name)?;
        self.gcs_attribute(entity, attr)
    }

    /// Canonical attribute names of a global entity, in id order.
    pub fn gcs_attributes(&self, entity: &str) -> Result<Vec<String>> {
        let dataset = ids::gcs_dataset(entity);
        if !self.graph.contains_node(dataset.as_str()) {
            return Err(RegistryError::UnknownEntity(entity.to_owned()));
        }
        Ok(self
            .graph
            .subjects(vocab::IS_ATTRIBUTE_OF, dataset.as_str())
            .filter_map(|a| name_of(&self.graph, a.as_str()))
            .collect())
    }

    pub fn stores(&self) -> Vec<StoreInfo> {
        self.graph
            .nodes_of_kind(NodeKind::DataStore)
            .filter_map(|n| self.store_info_at(&n.id))
            .collect()
    }

    pub fn store(&self, store: &str) -> Result<StoreInfo> {
        self.store_info_at(&ids::store(store)).ok_or_else(|| RegistryError::UnknownStore(store.to_owned()))
    }

    fn store_info_at(&self, id: &NodeId) -> Option<StoreInfo> {
        let node = self.graph.node(id.as_str())?;
        let kind = node.property("store_kind").and_then(Scalar::as_str).and_then(StoreKind::parse)?;
        let machine = self
            .graph
            .first_object_node(id.as_str(), vocab::WAS_RUN_ON)
            .and_then(|m| name_of(&self.graph, m.as_str()))
            .unwrap_or_default();
        Some(StoreInfo { name: name_of(&self.graph, id.as_str())?, kind, machine })
    }

    pub fn store_location(&self, store: &str) -> Option<String> {
        self.graph
            .node(ids::store(store).as_str())?
            .property("location")
            .and_then(Scalar::as_str)
            .map(str::to_owned)
    }

    pub fn datasets(&self, store: &str) -> Result<Vec<String>> {
        let sid = ids::store(store);
        if !self.graph.contains_node(sid.as_str()) {
            return Err(RegistryError::UnknownStore(store.to_owned()));
        }
        let mut out = Vec::new();
        for db in self.graph.subjects(vocab::IS_IN_STORE, sid.as_str()) {
            for schema in self.graph.subjects(vocab::IS_SCHEMA_OF, db.as_str()) {
                for ds in self.graph.subjects(vocab::IS_DATA_SCHEMA_OF, schema.as_str()) {
                    out.extend(name_of(&self.graph, ds.as_str()));
                }
            }
        }
        Ok(out)
    }

    fn dataset_node(&self, store: &str, dataset: &str) -> Result<NodeId> {
        let id = ids::lcs_dataset(store, dataset);
        if self.graph.contains_node(id.as_str()) {
            Ok(id)
        } else {
            Err(RegistryError::UnknownDataset { store: store.to_owned(), dataset: dataset.to_owned() })
        }
    }

    /// Top-level attribute names of a local dataset, complex ones included.
    pub fn dataset_attributes(&self, store: &str, dataset: &str) -> Result<Vec<String>> {
        let ds = self.dataset_node(store, dataset)?;
        Ok(self
            .graph
            .subjects(vocab::IS_ATTRIBUTE_OF, ds.as_str())
            .filter(|a| self.graph.first_object_node(a.as_str(), vocab::IS_MEMBER_OF_COMPLEX_ATTRIBUTE).is_none())
            .filter_map(|a| name_of(&self.graph, a.as_str()))
            .collect())
    }

    pub fn identifier_of(&self, store: &str, dataset: &str) -> Result<String> {
        let ds = self.dataset_node(store, dataset)?;
        self.graph
            .subjects(vocab::IS_IDENTIFIER_OF, ds.as_str())
            .next()
            .and_then(|a| name_of(&self.graph, a.as_str()))
            .ok_or_else(|| RegistryError::MissingIdentifier { store: store.to_owned(), dataset: dataset.to_owned() })
    }

    pub fn lcs_attribute(&self, store: &str, dataset: &str, attr: &str) -> Result<NodeId> {
        self.dataset_node(store, dataset)?;
        let id = ids::lcs_attribute(store, dataset, attr);
        if self.graph.contains_node(id.as_str()) {
            Ok(id)
        } else {
            Err(RegistryError::UnknownAttribute(format!("{dataset}.{attr}@{store}")))
        }
    }

    /// Rebuilds the reference for a local attribute node.
    pub fn attribute_ref(&self, attr: &NodeId) -> Option<AttributeRef> {
        let dataset = self.graph.first_object_node(attr.as_str(), vocab::IS_ATTRIBUTE_OF)?;
        let store = self.graph.first_object_node(attr.as_str(), vocab::IS_STORED_IN_STORE)?;
        Some(AttributeRef {
            store: name_of(&self.graph, store.as_str())?,
            dataset: name_of(&self.graph, dataset.as_str())?,
            attribute: name_of(&self.graph, attr.as_str())?,
            is_identifier: self.graph.contains_triple(attr, vocab::IS_IDENTIFIER_OF, &Term::Node(dataset.clone())),
        })
    }

    /// Finds `dataset.attr` among local schemas, optionally restricted to
    /// one store. Fails when the name is unknown or matches several stores.
    pub fn find_lcs_attribute(&self, dataset: &str, attr: &str, store: Option<&str>) -> Result<AttributeRef> {
        let candidates: Vec<AttributeRef> = match store {
            Some(s) => vec![self.lcs_attribute(s, dataset, attr)?],
            None => self
                .graph
                .nodes_of_kind(NodeKind::DataStore)
                .map(|n| ids::lcs_attribute(&name_of(&self.graph, n.id.as_str()).unwrap_or_default(), dataset, attr))
                .filter(|id| self.graph.contains_node(id.as_str()))
                .collect(),
        }
        .iter()
        .filter_map(|id| self.attribute_ref(id))
        .collect();
        match candidates.len() {
            0 => Err(RegistryError::UnknownAttribute(format!("{dataset}.{attr}"))),
            1 => Ok(candidates.into_iter().next().expect("one candidate")),
            _ => Err(RegistryError::AmbiguousAttribute {
                attribute: format!("{dataset}.{attr}"),
                candidates: candidates.iter().map(ToString::to_string).collect(),
            }),
        }
    }

    /// Every local attribute aliased to the global attribute, ordered.
    pub fn resolve_attribute(&self, gcs_attr: &str) -> Result<Vec<AttributeRef>> {
        let global = self.gcs_attribute_qualified(gcs_attr)?;
        let mut refs: Vec<AttributeRef> = self
            .graph
            .subjects(vocab::ALIAS, global.id.as_str())
            .filter_map(|l| self.attribute_ref(l))
            .collect();
        refs.sort();
        Ok(refs)
    }

    pub fn aliases(&self) -> Vec<AliasMapping> {
        let mut out: Vec<AliasMapping> = self
            .graph
            .links()
            .filter(|(_, l)| l.predicate == vocab::ALIAS)
            .filter_map(|(_, l)| {
                let local = self.attribute_ref(&l.subject)?;
                let target = l.object.as_node()?;
                let entity_id = self.graph.first_object_node(target.as_str(), vocab::IS_ATTRIBUTE_OF)?;
                Some(AliasMapping {
                    gcs_attr: format!(
                        "{}.{}",
                        name_of(&self.graph, entity_id.as_str())?,
                        name_of(&self.graph, target.as_str())?
                    ),
                    lcs_attr: format!("{}.{}", local.dataset, local.attribute),
                    store: local.store,
                })
            })
            .collect();
        out.sort();
        out
    }
}

struct Writer<'a> {
    graph: &'a mut CatalogGraph,
    context: NodeId,
}

impl Writer<'_> {
    fn node(&mut self, id: NodeId, kind: NodeKind, name: &str) -> Result<NodeId> {
        self.node_with(Node::new(id, kind), name)
    }

    fn node_with(&mut self, node: Node, name: &str) -> Result<NodeId> {
        let id = self.graph.add_node(node, Some(&self.context))?;
        self.link(&id, vocab::NAME, Scalar::str(name))?;
        Ok(id)
    }

    fn link(&mut self, s: &NodeId, p: &str, o: impl Into<Term>) -> Result<()> {
        let link = self.graph.add_link(s, p, o)?;
        self.graph.add_to_context(&self.context, Member::Link(link))?;
        Ok(())
    }

    fn ensure_context(&mut self) -> Result<()> {
        if !self.graph.contains_node(self.context.as_str()) {
            self.graph.add_node(Node::new(self.context.clone(), NodeKind::Context), None)?;
        }
        Ok(())
    }

    /// Registers attributes under `dataset`; `attr_id` maps a name to its node id.
    fn attributes(
        &mut self,
        attrs: &[AttributeDef],
        dataset: &NodeId,
        parent: Option<&NodeId>,
        store: Option<&NodeId>,
        attr_id: &dyn Fn(&str) -> NodeId,
    ) -> Result<()> {
        for a in attrs {
            let mut node = Node::new(attr_id(&a.name), NodeKind::Attribute);
            if a.complex {
                node = node.with_property("complex", true);
            }
            let id = self.node_with(node, &a.name)?;
            for alt in &a.also_known_as {
                self.link(&id, vocab::ALT_NAME, Scalar::str(alt))?;
            }
            self.link(&id, vocab::IS_ATTRIBUTE_OF, dataset.clone())?;
            if let Some(p) = parent {
                self.link(&id, vocab::IS_MEMBER_OF_COMPLEX_ATTRIBUTE, p.clone())?;
            }
            if let Some(s) = store {
                self.link(&id, vocab::IS_STORED_IN_STORE, s.clone())?;
            }
            self.attributes(&a.members, dataset, Some(&id), store, attr_id)?;
        }
        Ok(())
    }
}

fn canonical<'a>(def: &'a DatasetSchemaDef, name: &'a str) -> &'a str {
    def.attribute(name).map(|a| a.name.as_str()).unwrap_or(name)
}

impl<G: DerefMut<Target = CatalogGraph>> SchemaRegistry<G> {
    pub fn graph_mut(&mut self) -> &mut CatalogGraph {
        &mut self.graph
    }

    /// Registers global entities as one batch. Referred targets may point
    /// into the same batch or at previously registered entities.
    pub fn register_gcs(&mut self, entities: &[DatasetSchemaDef]) -> Result<()> {
        let mut fresh = BTreeSet::new();
        for e in entities {
            e.validate()?;
            if self.has_entity(&e.name) || !fresh.insert(e.name.as_str()) {
                return Err(RegistryError::DuplicateEntity(e.name.clone()));
            }
        }
        self.graph.atomically(|graph| {
            let mut w = Writer { graph, context: ids::gcs_context() };
            w.ensure_context()?;
            for e in entities {
                let ds = w.node(ids::gcs_dataset(&e.name), NodeKind::DatasetSchema, &e.name)?;
                let entity = e.name.as_str();
                w.attributes(&e.attributes, &ds, None, None, &|a| ids::gcs_attribute(entity, a))?;
                w.link(&ids::gcs_attribute(entity, &e.identifier), vocab::IS_IDENTIFIER_OF, ds)?;
            }
            for e in entities {
                for r in &e.referred {
                    let source = ids::gcs_attribute(&e.name, canonical(e, &r.attribute));
                    let target = {
                        let reg = SchemaRegistry::new(&*w.graph);
                        reg.gcs_attribute_qualified(&r.target)
                            .map_err(|_| RegistryError::UnknownReferredTarget(r.target.clone()))?
                            .id
                    };
                    w.link(&source, vocab::REFERRED, target)?;
                }
            }
            Ok(())
        })
    }

    pub fn register_lcs(&mut self, desc: &DataStoreDescriptor) -> Result<()> {
        desc.validate()?;
        let store_id = ids::store(&desc.name);
        if self.graph.contains_node(store_id.as_str()) {
            return Err(RegistryError::DuplicateStore(desc.name.clone()));
        }
        self.graph.atomically(|graph| {
            let mut w = Writer { graph, context: ids::store_context(&desc.name) };
            w.ensure_context()?;
            let store = w.node_with(
                Node::new(store_id.clone(), NodeKind::DataStore).with_property("store_kind", desc.store_kind.as_str()),
                &desc.name,
            )?;
            let machine = ids::machine(&desc.machine);
            if !w.graph.contains_node(machine.as_str()) {
                w.node(machine.clone(), NodeKind::Machine, &desc.machine)?;
            }
            w.link(&store, vocab::WAS_RUN_ON, machine)?;
            for db in &desc.databases {
                let db_id = w.node(ids::database(&desc.name, &db.name), NodeKind::Database, &db.name)?;
                w.link(&db_id, vocab::IS_IN_STORE, store.clone())?;
                for schema in &db.schemas {
                    let schema_id = w.node(
                        ids::database_schema(&desc.name, &db.name, &schema.name),
                        NodeKind::DatabaseSchema,
                        &schema.name,
                    )?;
                    w.link(&schema_id, vocab::IS_SCHEMA_OF, db_id.clone())?;
                    for ds in &schema.datasets {
                        let ds_id = w.node(ids::lcs_dataset(&desc.name, &ds.name), NodeKind::DatasetSchema, &ds.name)?;
                        w.link(&ds_id, vocab::IS_DATA_SCHEMA_OF, schema_id.clone())?;
                        let (s, d) = (desc.name.as_str(), ds.name.as_str());
                        w.attributes(&ds.attributes, &ds_id, None, Some(&store), &|a| ids::lcs_attribute(s, d, a))?;
                        w.link(&ids::lcs_attribute(s, d, &ds.identifier), vocab::IS_IDENTIFIER_OF, ds_id)?;
                    }
                }
            }
            for ds in desc.datasets() {
                for r in &ds.referred {
                    let source = ids::lcs_attribute(&desc.name, &ds.name, canonical(ds, &r.attribute));
                    let target = split_qualified(&r.target)
                        .and_then(|(d, a)| {
                            let def = desc.datasets().find(|x| x.name == d)?;
                            Some(ids::lcs_attribute(&desc.name, d, canonical(def, a)))
                        })
                        .filter(|t| w.graph.contains_node(t.as_str()))
                        .ok_or_else(|| RegistryError::UnknownReferredTarget(r.target.clone()))?;
                    w.link(&source, vocab::REFERRED, target)?;
                }
            }
            Ok(())
        })
    }

    pub fn create_alias(&mut self, m: &AliasMapping) -> Result<()> {
        let global = self.gcs_attribute_qualified(&m.gcs_attr)?;
        let (dataset, attr) = qualified(&m.lcs_attr)?;
        let local = match self.lcs_attribute(&m.store, dataset, attr) {
            Ok(id) => id,
            Err(RegistryError::UnknownStore(_) | RegistryError::UnknownDataset { .. }) => {
                return Err(RegistryError::UnknownAttribute(format!("{}@{}", m.lcs_attr, m.store)))
            }
            Err(e) => return Err(e),
        };
        let object = Term::Node(global.id);
        if self.graph.contains_triple(&local, vocab::ALIAS, &object) {
            return Err(RegistryError::DuplicateAlias {
                gcs: m.gcs_attr.clone(),
                lcs: m.lcs_attr.clone(),
                store: m.store.clone(),
            });
        }
        self.graph.atomically(|g| {
            let link = g.add_link(&local, vocab::ALIAS, object)?;
            g.add_to_context(&ids::gcs_context(), Member::Link(link))?;
            Ok(())
        })
    }

    /// Records where the store's fixture files live.
    pub fn set_store_location(&mut self, store: &str, location: &str) -> Result<()> {
        let id = ids::store(store);
        if !self.graph.contains_node(id.as_str()) {
            return Err(RegistryError::UnknownStore(store.to_owned()));
        }
        self.graph.set_property(&id, "location", Scalar::str(location))?;
        Ok(())
    }
}

/// Ingestion document for global entities (`[[entities]]` tables).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GcsDocument {
    #[serde(default, alias = "entity")]
    pub entities: Vec<DatasetSchemaDef>,
}

/// Ingestion document for alias mappings (`[[aliases]]` tables).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AliasDocument {
    #[serde(default, alias = "alias")]
    pub aliases: Vec<AliasMapping>,
}

/// Counts nodes of each kind; handy for summaries.
pub fn kind_histogram(graph: &CatalogGraph) -> BTreeMap<NodeKind, usize> {
    let mut out = BTreeMap::new();
    for n in graph.nodes() {
        *out.entry(n.kind).or_insert(0) += 1;
    }
    out
}
