//! Workflow provenance capture and data-reference retrieval.
//!
//! An execution groups transformation executions; each of those records the
//! attribute values it used or generated. Identifier values captured this
//! way are the data references that link records across stores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, CatalogGraph, Member, Node, NodeId, NodeKind, Pattern, PatternTerm, Step, Term};
use crate::registry::{split_qualified, RegistryError};
use crate::value::Scalar;
use crate::vocab::{self, ids};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProvenanceError {
    #[error("unknown workflow `{0}`")]
    UnknownWorkflow(String),
    #[error("unknown workflow execution `{0}`")]
    UnknownExecution(String),
    #[error("workflow execution `{0}` is closed")]
    ClosedExecution(String),
    #[error("cannot resolve attribute `{attribute}`: {reason}")]
    UnresolvableAttribute { attribute: String, reason: String },
    #[error("transformation `{transformation}` is declared twice in workflow `{workflow}`")]
    DuplicateTransformation { workflow: String, transformation: String },
    #[error("invalid value for `{attribute}`: {value}")]
    InvalidValue { attribute: String, value: String },
    #[error("execution `{execution}` has no data reference for store `{store}`")]
    MissingReference { store: String, execution: String },
    #[error("execution `{execution}` has several data references for store `{store}`")]
    MultipleReferences { store: String, execution: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub type Result<T, E = ProvenanceError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Used,
    Generated,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Used => "used",
            Direction::Generated => "generated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// `Dataset.attr` in a local schema.
    #[default]
    Local,
    /// `Entity.attr` in the global schema.
    Global,
}

/// One captured value. Local names are matched against registered local
/// schemas; `store` disambiguates datasets with the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeValueRecord {
    pub attribute: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store: Option<String>,
    #[serde(default, skip_serializing_if = "is_local")]
    pub scope: Scope,
    pub value: Scalar,
    pub direction: Direction,
}

fn is_local(s: &Scope) -> bool {
    *s == Scope::Local
}

impl AttributeValueRecord {
    pub fn generated(attribute: impl Into<String>, value: impl Into<Scalar>) -> Self {
        Self::local(attribute, value, Direction::Generated)
    }

    pub fn used(attribute: impl Into<String>, value: impl Into<Scalar>) -> Self {
        Self::local(attribute, value, Direction::Used)
    }

    fn local(attribute: impl Into<String>, value: impl Into<Scalar>, direction: Direction) -> Self {
        AttributeValueRecord {
            attribute: attribute.into(),
            store: None,
            scope: Scope::Local,
            value: value.into(),
            direction,
        }
    }

    pub fn in_store(mut self, store: impl Into<String>) -> Self {
        self.store = Some(store.into());
        self
    }

    pub fn global(mut self) -> Self {
        self.scope = Scope::Global;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationDef {
    pub name: String,
    #[serde(default)]
    pub used: Vec<String>,
    #[serde(default)]
    pub generated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowDef {
    pub name: String,
    #[serde(default)]
    pub transformations: Vec<TransformationDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformationExecution {
    pub id: NodeId,
    pub transformation: String,
    pub values: Vec<AttributeValueRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkflowExecution {
    pub id: NodeId,
    pub workflow: String,
    /// Milliseconds since the Unix epoch.
    pub started_at: i64,
    pub ended_at: Option<i64>,
    pub transformation_executions: Vec<TransformationExecution>,
}

impl WorkflowExecution {
    pub fn is_open(&self) -> bool {
        self.ended_at.is_none()
    }
}

/// One transformation execution as submitted by an instrumented client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformationRecord {
    #[serde(alias = "transformation")]
    pub name: String,
    #[serde(default)]
    pub values: Vec<AttributeValueRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub workflow: String,
    #[serde(default)]
    pub transformations: Vec<TransformationRecord>,
    /// Leave the execution open after replaying it.
    #[serde(default)]
    pub open: bool,
}

/// Ingestion document for provenance: workflow definitions followed by
/// executions, replayed in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProvenanceDocument {
    #[serde(default, alias = "workflow")]
    pub workflows: Vec<WorkflowDef>,
    #[serde(default, alias = "execution")]
    pub executions: Vec<ExecutionRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataReference {
    pub dataset: String,
    pub attribute: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataReferenceRow {
    pub workflow_execution: NodeId,
    pub references: BTreeMap<String, DataReference>,
}

fn now_ms() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}

/// The catalog traversal behind data references: every attribute value
/// captured by an execution of `workflow`, together with the local
/// attribute, dataset and store it belongs to.
pub fn traversal_pattern(workflow: &str) -> Pattern {
    let v = PatternTerm::var;
    Pattern::new()
        .triple(v("atv"), vocab::WAS_DERIVED_FROM_ATTRIBUTE, v("att"))
        .triple(v("att"), vocab::NAME, v("attName"))
        .alternation(
            v("atv"),
            Step::forward(vocab::WAS_GENERATED_BY),
            Step::inverse(vocab::USED),
            v("dte"),
        )
        .triple(v("atv"), vocab::VALUE, v("atvValue"))
        .triple(v("dte"), vocab::WAS_MEMBER_OF_WORKFLOW_EXECUTION, v("wfe"))
        .triple(v("wfe"), vocab::WAS_DERIVED_FROM_WORKFLOW, PatternTerm::node(&ids::workflow(workflow)))
        .triple(v("att"), vocab::IS_ATTRIBUTE_OF, v("datasetSchema"))
        .triple(v("datasetSchema"), vocab::NAME, v("datasetSchemaName"))
        .triple(v("att"), vocab::IS_STORED_IN_STORE, v("dataStore"))
        .triple(v("dataStore"), vocab::NAME, v("dataStoreName"))
}

/// The traversal restricted to identifier attributes.
pub fn reference_pattern(workflow: &str) -> Pattern {
    traversal_pattern(workflow).triple(
        PatternTerm::var("att"),
        vocab::IS_IDENTIFIER_OF,
        PatternTerm::var("datasetSchema"),
    )
}

pub struct Provenance<G> {
    graph: G,
}

impl CatalogGraph {
    pub fn provenance(&self) -> Provenance<&CatalogGraph> {
        Provenance::new(self)
    }

    pub fn provenance_mut(&mut self) -> Provenance<&mut CatalogGraph> {
        Provenance::new(self)
    }
}

fn literal_str(term: Option<&Term>) -> Option<String> {
    term?.as_literal()?.as_str().map(str::to_owned)
}

fn name_of(graph: &CatalogGraph, id: &str) -> Option<String> {
    graph.first_literal(id, vocab::NAME).and_then(Scalar::as_str).map(str::to_owned)
}

fn int_property(graph: &CatalogGraph, id: &str, key: &str) -> Option<i64> {
    match graph.node(id)?.property(key)? {
        Scalar::Int(i) => Some(*i),
        _ => None,
    }
}

/// Sequence number encoded in an execution id, if it has the standard form.
fn execution_seq(id: &NodeId) -> Option<u64> {
    id.as_str().strip_prefix(ids::PREFIX)?.strip_prefix("wfe/")?.parse().ok()
}

impl<G: Deref<Target = CatalogGraph>> Provenance<G> {
    pub fn new(graph: G) -> Self {
        Provenance { graph }
    }

    pub fn graph(&self) -> &CatalogGraph {
        &self.graph
    }

    pub fn has_workflow(&self, workflow: &str) -> bool {
        self.graph
            .node(ids::workflow(workflow).as_str())
            .is_some_and(|n| n.kind == NodeKind::Workflow)
    }

    pub fn workflows(&self) -> Vec<String> {
        self.graph
            .nodes_of_kind(NodeKind::Workflow)
            .filter_map(|n| name_of(&self.graph, n.id.as_str()))
            .collect()
    }

    /// Execution ids of `workflow` in id order.
    pub fn execution_ids(&self, workflow: &str) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .graph
            .subjects(vocab::WAS_DERIVED_FROM_WORKFLOW, ids::workflow(workflow).as_str())
            .cloned()
            .collect();
        out.sort();
        out
    }

    fn execution_node(&self, id: &str) -> Result<&Node> {
        self.graph
            .node(id)
            .filter(|n| n.kind == NodeKind::WorkflowExecution)
            .ok_or_else(|| ProvenanceError::UnknownExecution(id.to_owned()))
    }

    pub fn is_open(&self, id: &str) -> Result<bool> {
        Ok(self.execution_node(id)?.property("ended_at").is_none())
    }

    pub fn open_executions(&self) -> Vec<NodeId> {
        self.graph
            .nodes_of_kind(NodeKind::WorkflowExecution)
            .filter(|n| n.property("ended_at").is_none())
            .map(|n| n.id.clone())
            .collect()
    }

    fn transformation_executions(&self, wfe: &str) -> Vec<NodeId> {
        let mut dtes: Vec<NodeId> = self
            .graph
            .subjects(vocab::WAS_MEMBER_OF_WORKFLOW_EXECUTION, wfe)
            .cloned()
            .collect();
        dtes.sort();
        dtes
    }

    fn value_record(&self, atv: &NodeId, direction: Direction) -> Option<AttributeValueRecord> {
        let att = self.graph.first_object_node(atv.as_str(), vocab::WAS_DERIVED_FROM_ATTRIBUTE)?;
        let value = self.graph.first_literal(atv.as_str(), vocab::VALUE)?.clone();
        let dataset = self.graph.first_object_node(att.as_str(), vocab::IS_ATTRIBUTE_OF)?;
        let store = self.graph.first_object_node(att.as_str(), vocab::IS_STORED_IN_STORE);
        Some(AttributeValueRecord {
            attribute: format!("{}.{}", name_of(&self.graph, dataset.as_str())?, name_of(&self.graph, att.as_str())?),
            store: store.and_then(|s| name_of(&self.graph, s.as_str())),
            scope: if store.is_some() { Scope::Local } else { Scope::Global },
            value,
            direction,
        })
    }

    pub fn execution(&self, id: &str) -> Result<WorkflowExecution> {
        let node = self.execution_node(id)?;
        let workflow = self
            .graph
            .first_object_node(id, vocab::WAS_DERIVED_FROM_WORKFLOW)
            .and_then(|w| name_of(&self.graph, w.as_str()))
            .unwrap_or_default();
        let mut transformation_executions = Vec::new();
        for dte in self.transformation_executions(id) {
            let transformation = self
                .graph
                .first_object_node(dte.as_str(), vocab::WAS_DERIVED_FROM_TRANSFORMATION)
                .and_then(|t| name_of(&self.graph, t.as_str()))
                .unwrap_or_default();
            let mut atvs: Vec<(NodeId, Direction)> = self
                .graph
                .subjects(vocab::WAS_GENERATED_BY, dte.as_str())
                .map(|a| (a.clone(), Direction::Generated))
                .chain(
                    self.graph
                        .objects(dte.as_str(), vocab::USED)
                        .filter_map(Term::as_node)
                        .map(|a| (a.clone(), Direction::Used)),
                )
                .collect();
            atvs.sort();
            let values = atvs.iter().filter_map(|(a, d)| self.value_record(a, *d)).collect();
            transformation_executions.push(TransformationExecution { id: dte, transformation, values });
        }
        Ok(WorkflowExecution {
            id: node.id.clone(),
            workflow,
            started_at: int_property(&self.graph, id, "started_at").unwrap_or_default(),
            ended_at: int_property(&self.graph, id, "ended_at"),
            transformation_executions,
        })
    }

    /// One row per execution of `workflow`, in execution-id order, holding
    /// the identifier value captured for each requested store.
    pub fn data_references_for(&self, workflow: &str, stores: &BTreeSet<String>) -> Result<Vec<DataReferenceRow>> {
        if !self.has_workflow(workflow) {
            return Err(ProvenanceError::UnknownWorkflow(workflow.to_owned()));
        }
        let found = self.collect_references(workflow);
        let mut rows = Vec::new();
        for wfe in self.execution_ids(workflow) {
            let per_store = found.get(&wfe);
            let mut references = BTreeMap::new();
            for store in stores {
                let candidates = per_store.and_then(|m| m.get(store));
                let Some(candidates) = candidates else {
                    return Err(ProvenanceError::MissingReference {
                        store: store.clone(),
                        execution: wfe.to_string(),
                    });
                };
                let generated: BTreeSet<&DataReference> =
                    candidates.iter().filter(|(_, g)| *g).map(|(r, _)| r).collect();
                let chosen = if generated.is_empty() {
                    candidates.iter().map(|(r, _)| r).collect()
                } else {
                    generated
                };
                if chosen.len() > 1 {
                    return Err(ProvenanceError::MultipleReferences {
                        store: store.clone(),
                        execution: wfe.to_string(),
                    });
                }
                let reference = chosen.into_iter().next().expect("non-empty candidate set").clone();
                references.insert(store.clone(), reference);
            }
            rows.push(DataReferenceRow { workflow_execution: wfe, references });
        }
        Ok(rows)
    }

    /// Stores for which at least one execution of `workflow` captured an
    /// identifier value.
    pub fn reference_stores(&self, workflow: &str) -> BTreeSet<String> {
        self.collect_references(workflow)
            .into_values()
            .flat_map(BTreeMap::into_keys)
            .collect()
    }

    /// execution → store → {(reference, generated)}
    #[allow(clippy::type_complexity)]
    fn collect_references(
        &self,
        workflow: &str,
    ) -> BTreeMap<NodeId, BTreeMap<String, BTreeSet<(DataReference, bool)>>> {
        let mut out: BTreeMap<NodeId, BTreeMap<String, BTreeSet<(DataReference, bool)>>> = BTreeMap::new();
        for b in self.graph.match_pattern(&reference_pattern(workflow), true, None) {
            let (Some(wfe), Some(atv), Some(dte)) = (
                b.get("wfe").and_then(Term::as_node),
                b.get("atv").and_then(Term::as_node),
                b.get("dte").and_then(Term::as_node),
            ) else {
                continue;
            };
            let (Some(store), Some(dataset), Some(attribute), Some(value)) = (
                literal_str(b.get("dataStoreName")),
                literal_str(b.get("datasetSchemaName")),
                literal_str(b.get("attName")),
                b.get("atvValue").and_then(Term::as_literal),
            ) else {
                continue;
            };
            let generated = self
                .graph
                .contains_triple(atv, vocab::WAS_GENERATED_BY, &Term::Node(dte.clone()));
            out.entry(wfe.clone()).or_default().entry(store).or_default().insert((
                DataReference { dataset, attribute, value: value.clone() },
                generated,
            ));
        }
        out
    }
}

impl<G: DerefMut<Target = CatalogGraph>> Provenance<G> {
    fn ensure_workflow(graph: &mut CatalogGraph, workflow: &str) -> Result<NodeId> {
        let id = ids::workflow(workflow);
        match graph.node(id.as_str()) {
            Some(n) if n.kind == NodeKind::Workflow => return Ok(id),
            Some(_) => return Err(CatalogError::DuplicateId(id).into()),
            None => {}
        }
        let ctx = ids::workflow_context(workflow);
        graph.add_node(Node::new(ctx.clone(), NodeKind::Context), None)?;
        graph.add_node(Node::new(id.clone(), NodeKind::Workflow), Some(&ctx))?;
        let link = graph.add_link(&id, vocab::NAME, Scalar::str(workflow))?;
        graph.add_to_context(&ctx, Member::Link(link))?;
        Ok(id)
    }

    fn ensure_transformation(graph: &mut CatalogGraph, workflow: &str, name: &str) -> Result<(NodeId, bool)> {
        let wf = Self::ensure_workflow(graph, workflow)?;
        let id = ids::transformation(workflow, name);
        if graph.contains_node(id.as_str()) {
            return Ok((id, false));
        }
        let ctx = ids::workflow_context(workflow);
        graph.add_node(Node::new(id.clone(), NodeKind::DataTransformation), Some(&ctx))?;
        for (p, o) in [(vocab::NAME, Term::Literal(Scalar::str(name))), (vocab::IS_TRANSFORMATION_OF, Term::Node(wf))] {
            let link = graph.add_link(&id, p, o)?;
            graph.add_to_context(&ctx, Member::Link(link))?;
        }
        Ok((id, true))
    }

    /// Declares a workflow and its transformations. Attribute names are
    /// resolved like captured values.
    pub fn register_workflow(&mut self, def: &WorkflowDef) -> Result<()> {
        let mut seen = BTreeSet::new();
        for t in &def.transformations {
            if !seen.insert(&t.name) {
                return Err(ProvenanceError::DuplicateTransformation {
                    workflow: def.name.clone(),
                    transformation: t.name.clone(),
                });
            }
        }
        self.graph.atomically(|graph| {
            Self::ensure_workflow(graph, &def.name)?;
            let ctx = ids::workflow_context(&def.name);
            for t in &def.transformations {
                let (id, fresh) = Self::ensure_transformation(graph, &def.name, &t.name)?;
                if !fresh {
                    return Err(ProvenanceError::DuplicateTransformation {
                        workflow: def.name.clone(),
                        transformation: t.name.clone(),
                    });
                }
                for (pred, attrs) in [(vocab::USES_ATTRIBUTE, &t.used), (vocab::GENERATES_ATTRIBUTE, &t.generated)] {
                    for a in attrs {
                        let att = resolve(graph, a, None, Scope::Local)?;
                        let link = graph.ensure_link(&id, pred, att)?;
                        graph.add_to_context(&ctx, Member::Link(link))?;
                    }
                }
            }
            Ok(())
        })
    }

    /// Registers the document's workflows and replays its executions.
    /// Returns the new execution ids.
    pub fn ingest(&mut self, doc: &ProvenanceDocument) -> Result<Vec<NodeId>> {
        self.graph.atomically(|graph| {
            let mut prov = Provenance::new(graph);
            for w in &doc.workflows {
                prov.register_workflow(w)?;
            }
            let mut out = Vec::with_capacity(doc.executions.len());
            for e in &doc.executions {
                let id = prov.begin_workflow_execution(&e.workflow)?;
                for t in &e.transformations {
                    prov.record_transformation_execution(id.as_str(), &t.name, &t.values)?;
                }
                if !e.open {
                    prov.end_workflow_execution(id.as_str())?;
                }
                out.push(id);
            }
            Ok(out)
        })
    }

    pub fn begin_workflow_execution(&mut self, workflow: &str) -> Result<NodeId> {
        self.graph.atomically(|graph| {
            let wf = Self::ensure_workflow(graph, workflow)?;
            let seq = graph
                .nodes_of_kind(NodeKind::WorkflowExecution)
                .filter_map(|n| execution_seq(&n.id))
                .max()
                .map_or(1, |m| m + 1);
            let id = ids::execution(seq);
            let ctx = ids::workflow_context(workflow);
            graph.add_node(
                Node::new(id.clone(), NodeKind::WorkflowExecution).with_property("started_at", now_ms()),
                Some(&ctx),
            )?;
            let link = graph.add_link(&id, vocab::WAS_DERIVED_FROM_WORKFLOW, wf)?;
            graph.add_to_context(&ctx, Member::Link(link))?;
            Ok(id)
        })
    }

    pub fn record_transformation_execution(
        &mut self,
        execution: &str,
        transformation: &str,
        values: &[AttributeValueRecord],
    ) -> Result<NodeId> {
        if !self.is_open(execution)? {
            return Err(ProvenanceError::ClosedExecution(execution.to_owned()));
        }
        for v in values {
            if !v.value.is_finite() {
                return Err(ProvenanceError::InvalidValue {
                    attribute: v.attribute.clone(),
                    value: v.value.to_string(),
                });
            }
        }
        let wfe = self.execution_node(execution)?.id.clone();
        let workflow = self
            .graph
            .first_object_node(execution, vocab::WAS_DERIVED_FROM_WORKFLOW)
            .and_then(|w| name_of(&self.graph, w.as_str()))
            .ok_or_else(|| ProvenanceError::UnknownExecution(execution.to_owned()))?;
        let seq = self.transformation_executions(execution).len() + 1;
        self.graph.atomically(|graph| {
            let ctx = ids::workflow_context(&workflow);
            let link = |graph: &mut CatalogGraph, s: &NodeId, p: &str, o: Term| -> Result<()> {
                let l = graph.add_link(s, p, o)?;
                graph.add_to_context(&ctx, Member::Link(l))?;
                Ok(())
            };
            let (dt, _) = Self::ensure_transformation(graph, &workflow, transformation)?;
            let dte = ids::transformation_execution(&wfe, seq);
            graph.add_node(Node::new(dte.clone(), NodeKind::DataTransformationExecution), Some(&ctx))?;
            link(graph, &dte, vocab::WAS_MEMBER_OF_WORKFLOW_EXECUTION, Term::Node(wfe.clone()))?;
            link(graph, &dte, vocab::WAS_DERIVED_FROM_TRANSFORMATION, Term::Node(dt))?;
            for (i, v) in values.iter().enumerate() {
                let att = resolve(graph, &v.attribute, v.store.as_deref(), v.scope)?;
                let atv = ids::attribute_value(&dte, i + 1);
                graph.add_node(Node::new(atv.clone(), NodeKind::AttributeValue), Some(&ctx))?;
                link(graph, &atv, vocab::WAS_DERIVED_FROM_ATTRIBUTE, Term::Node(att))?;
                link(graph, &atv, vocab::VALUE, Term::Literal(v.value.clone()))?;
                match v.direction {
                    Direction::Generated => link(graph, &atv, vocab::WAS_GENERATED_BY, Term::Node(dte.clone()))?,
                    Direction::Used => link(graph, &dte, vocab::USED, Term::Node(atv))?,
                }
            }
            Ok(dte)
        })
    }

    pub fn end_workflow_execution(&mut self, execution: &str) -> Result<()> {
        let node = self.execution_node(execution)?;
        if node.property("ended_at").is_some() {
            return Err(ProvenanceError::ClosedExecution(execution.to_owned()));
        }
        let started = int_property(&self.graph, execution, "started_at").unwrap_or(i64::MIN);
        let id = node.id.clone();
        self.graph.set_property(&id, "ended_at", Scalar::Int(now_ms().max(started)))?;
        Ok(())
    }

    /// Removes every execution of `workflow` with its transformation
    /// executions and captured values. The workflow itself stays.
    pub fn purge_executions(&mut self, workflow: &str) -> Result<usize> {
        let executions = self.execution_ids(workflow);
        for wfe in &executions {
            for dte in self.transformation_executions(wfe.as_str()) {
                let atvs: Vec<NodeId> = self
                    .graph
                    .subjects(vocab::WAS_GENERATED_BY, dte.as_str())
                    .cloned()
                    .chain(self.graph.objects(dte.as_str(), vocab::USED).filter_map(Term::as_node).cloned())
                    .collect();
                for atv in atvs {
                    self.graph.remove_node(&atv)?;
                }
                self.graph.remove_node(&dte)?;
            }
            self.graph.remove_node(wfe)?;
        }
        Ok(executions.len())
    }
}

fn resolve(graph: &CatalogGraph, attribute: &str, store: Option<&str>, scope: Scope) -> Result<NodeId> {
    let unresolvable = |reason: String| ProvenanceError::UnresolvableAttribute {
        attribute: attribute.to_owned(),
        reason,
    };
    let (dataset, attr) =
        split_qualified(attribute).ok_or_else(|| unresolvable("expected `Dataset.attribute`".into()))?;
    let registry = graph.registry();
    match scope {
        Scope::Global => registry
            .gcs_attribute(dataset, attr)
            .map(|a| a.id)
            .map_err(|e| unresolvable(e.to_string())),
        Scope::Local => {
            let r = registry
                .find_lcs_attribute(dataset, attr, store)
                .map_err(|e: RegistryError| unresolvable(e.to_string()))?;
            Ok(ids::lcs_attribute(&r.store, &r.dataset, &r.attribute))
        }
    }
}
