//! Translation of a global query into a federated plan and its SQL text.
//!
//! Each projected global attribute resolves to exactly one local attribute.
//! Filters are copied into every local dataset that carries an alias of the
//! filtered attribute. Rows from different stores are linked through the
//! constant table: one row of captured identifier values per workflow
//! execution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogGraph, NodeId};
use crate::provenance::ProvenanceError;
use crate::query::{self, GlobalQuery, QualifiedName, ValidationError};
use crate::registry::{AttributeRef, RegistryError};
use crate::value::{format_float, CompareOp, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("`{0}` is not mapped to any local attribute")]
    UnmappedAttribute(String),
    #[error("`{attribute}` maps to several local attributes: {}", .candidates.join(", "))]
    AmbiguousMapping { attribute: String, candidates: Vec<String> },
    #[error("`{0}` is a complex attribute and cannot be projected")]
    ComplexAttribute(String),
    #[error("store `{store}` would be queried through several datasets: {}", .datasets.join(", "))]
    MultipleDatasets { store: String, datasets: Vec<String> },
    #[error("workflow `{0}` has no executions with complete data references")]
    NoExecutions(String),
    #[error("execution `{execution}` references dataset `{found}` in store `{store}`, expected `{expected}`")]
    ReferenceMismatch { execution: String, store: String, expected: String, found: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
}

pub type Result<T, E = PlanError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFilter {
    pub attribute: String,
    pub op: CompareOp,
    pub value: Scalar,
    /// Index of the global filter this one was copied from.
    pub origin: usize,
}

impl LocalFilter {
    pub fn accepts(&self, v: Option<&Scalar>) -> bool {
        v.is_some_and(|v| v.satisfies(self.op, &self.value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalQuery {
    pub store: String,
    pub dataset: String,
    /// Projected attributes followed by the identifier.
    pub projection: Vec<String>,
    pub filters: Vec<LocalFilter>,
    pub identifier: String,
    /// False for stores kept only because they hold data references.
    pub joined: bool,
}

impl LocalQuery {
    pub fn identifier_position(&self) -> usize {
        self.projection
            .iter()
            .position(|a| *a == self.identifier)
            .expect("identifier is always projected")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub execution: NodeId,
    pub values: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTable {
    /// Store per column, parallel to `columns`.
    pub stores: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<ConstantRow>,
}

impl ConstantTable {
    pub fn column_of(&self, store: &str) -> Option<usize> {
        self.stores.iter().position(|s| s == store)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinPredicate {
    /// Index into `local_queries`.
    pub local_query: usize,
    pub identifier: String,
    /// Index into the constant table columns.
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputColumn {
    /// The attribute as spelled in the query.
    pub name: String,
    pub global: QualifiedName,
    pub local_query: usize,
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FederatedPlan {
    pub workflow: String,
    pub local_queries: Vec<LocalQuery>,
    pub constant_table: ConstantTable,
    pub join_spec: Vec<JoinPredicate>,
    pub output_columns: Vec<OutputColumn>,
    pub distinct: bool,
}

impl FederatedPlan {
    pub fn stores(&self) -> impl Iterator<Item = &str> {
        self.local_queries.iter().map(|q| q.store.as_str())
    }

    /// Global filters that reached at least one local query.
    pub fn source_filter_count(&self) -> usize {
        self.local_queries
            .iter()
            .flat_map(|q| q.filters.iter().map(|f| f.origin))
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Drop stores that contribute neither a projection nor a filter.
    pub prune: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { prune: true }
    }
}

/// Sanitized `<store>_prov_id` column names, unique within the table.
fn column_names(stores: &[String]) -> Vec<String> {
    let mut used = BTreeSet::new();
    stores
        .iter()
        .map(|s| {
            let base: String = s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
            let base = if base.starts_with(|c: char| c.is_ascii_digit()) { format!("s_{base}") } else { base };
            let mut name = format!("{base}_prov_id");
            let mut n = 2;
            while !used.insert(name.clone()) {
                name = format!("{base}_{n}_prov_id");
                n += 1;
            }
            name
        })
        .collect()
}

struct Builder {
    queries: Vec<LocalQuery>,
}

impl Builder {
    fn slot(&mut self, r: &AttributeRef) -> Result<usize> {
        if let Some(i) = self.queries.iter().position(|q| q.store == r.store) {
            let q = &self.queries[i];
            if q.dataset != r.dataset {
                return Err(PlanError::MultipleDatasets {
                    store: r.store.clone(),
                    datasets: vec![q.dataset.clone(), r.dataset.clone()],
                });
            }
            return Ok(i);
        }
        self.queries.push(LocalQuery {
            store: r.store.clone(),
            dataset: r.dataset.clone(),
            projection: Vec::new(),
            filters: Vec::new(),
            identifier: String::new(),
            joined: true,
        });
        Ok(self.queries.len() - 1)
    }
}

/// Builds the federated plan for a query. The query is validated first.
pub fn plan(q: &GlobalQuery, catalog: &CatalogGraph, options: PlanOptions) -> Result<FederatedPlan> {
    query::validate(q, catalog)?;
    let registry = catalog.registry();
    let provenance = catalog.provenance();
    let mut b = Builder { queries: Vec::new() };
    let mut output_columns = Vec::new();
    for p in &q.projections {
        let global = registry.gcs_attribute(&p.entity, &p.attribute)?;
        if global.complex {
            return Err(PlanError::ComplexAttribute(p.to_string()));
        }
        let refs = registry.resolve_attribute(&p.to_string())?;
        let r = match refs.as_slice() {
            [] => return Err(PlanError::UnmappedAttribute(p.to_string())),
            [r] => r,
            many => {
                return Err(PlanError::AmbiguousMapping {
                    attribute: p.to_string(),
                    candidates: many.iter().map(ToString::to_string).collect(),
                })
            }
        };
        let i = b.slot(r)?;
        if !b.queries[i].projection.contains(&r.attribute) {
            b.queries[i].projection.push(r.attribute.clone());
        }
        output_columns.push(OutputColumn {
            name: p.attribute.clone(),
            global: p.clone(),
            local_query: i,
            attribute: r.attribute.clone(),
        });
    }
    for (origin, f) in q.filters.iter().enumerate() {
        let refs = registry.resolve_attribute(&f.attribute.to_string())?;
        if refs.is_empty() {
            return Err(PlanError::UnmappedAttribute(f.attribute.to_string()));
        }
        for r in &refs {
            let i = b.slot(r)?;
            b.queries[i].filters.push(LocalFilter {
                attribute: r.attribute.clone(),
                op: f.op,
                value: f.value.clone(),
                origin,
            });
        }
    }
    if !options.prune {
        let present: BTreeSet<String> = b.queries.iter().map(|q| q.store.clone()).collect();
        let extra = provenance.reference_stores(&q.workflow);
        let extra: Vec<&String> = extra.difference(&present).collect();
        if !extra.is_empty() {
            let stores: BTreeSet<String> = extra.iter().map(|s| (*s).clone()).collect();
            let rows = provenance.data_references_for(&q.workflow, &stores)?;
            for store in extra {
                let dataset = rows
                    .first()
                    .and_then(|r| r.references.get(store))
                    .map(|r| r.dataset.clone())
                    .ok_or_else(|| PlanError::NoExecutions(q.workflow.clone()))?;
                b.queries.push(LocalQuery {
                    store: store.clone(),
                    dataset,
                    projection: Vec::new(),
                    filters: Vec::new(),
                    identifier: String::new(),
                    joined: false,
                });
            }
        }
    }
    let mut queries = b.queries;
    for lq in &mut queries {
        lq.identifier = registry.identifier_of(&lq.store, &lq.dataset)?;
        if !lq.projection.contains(&lq.identifier) {
            lq.projection.push(lq.identifier.clone());
        }
    }

    let stores: Vec<String> = queries.iter().map(|lq| lq.store.clone()).collect();
    let wanted: BTreeSet<String> = stores.iter().cloned().collect();
    let references = provenance.data_references_for(&q.workflow, &wanted)?;
    let mut rows = Vec::with_capacity(references.len());
    for r in references {
        let mut values = Vec::with_capacity(stores.len());
        for lq in &queries {
            let reference = &r.references[&lq.store];
            if reference.dataset != lq.dataset || reference.attribute != lq.identifier {
                return Err(PlanError::ReferenceMismatch {
                    execution: r.workflow_execution.to_string(),
                    store: lq.store.clone(),
                    expected: format!("{}.{}", lq.dataset, lq.identifier),
                    found: format!("{}.{}", reference.dataset, reference.attribute),
                });
            }
            values.push(reference.value.clone());
        }
        rows.push(ConstantRow { execution: r.workflow_execution, values });
    }
    if rows.is_empty() {
        return Err(PlanError::NoExecutions(q.workflow.clone()));
    }
    let join_spec = queries
        .iter()
        .enumerate()
        .filter(|(_, lq)| lq.joined)
        .map(|(i, lq)| JoinPredicate { local_query: i, identifier: lq.identifier.clone(), column: i })
        .collect();
    Ok(FederatedPlan {
        workflow: q.workflow.clone(),
        constant_table: ConstantTable { columns: column_names(&stores), stores, rows },
        local_queries: queries,
        join_spec,
        output_columns,
        distinct: true,
    })
}

/// `SeismicHeader` → `seismic_header`, `Training File` → `training_file`.
pub fn table_name(dataset: &str) -> String {
    let mut out = String::new();
    let mut prev: Option<char> = None;
    for c in dataset.chars() {
        if c.is_ascii_uppercase() && prev.is_some_and(|p| p.is_ascii_lowercase() || p.is_ascii_digit()) {
            out.push('_');
        }
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
        prev = Some(c);
    }
    let out = out.trim_matches('_').to_owned();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        format!("t_{out}")
    } else {
        out
    }
}

fn sql_literal(v: &Scalar) -> String {
    match v {
        Scalar::Str(s) => format!("'{}'", s.replace('\'', "''")),
        Scalar::Int(i) => i.to_string(),
        Scalar::Float(f) => format_float(*f),
        Scalar::Bool(true) => "TRUE".into(),
        Scalar::Bool(false) => "FALSE".into(),
    }
}

fn quote_ident(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Foreign-table aliases per local query, `fdw_<table>` made unique.
pub fn table_aliases(p: &FederatedPlan) -> Vec<(String, String)> {
    let mut used = BTreeSet::new();
    p.local_queries
        .iter()
        .map(|lq| {
            let table = table_name(&lq.dataset);
            let mut alias = format!("fdw_{table}");
            let mut n = 2;
            while !used.insert(alias.clone()) {
                alias = format!("fdw_{table}_{n}");
                n += 1;
            }
            (table, alias)
        })
        .collect()
}

/// Renders the plan as one SQL statement over foreign tables and an inline
/// `VALUES` table of data references.
pub fn render_sql(p: &FederatedPlan) -> String {
    let aliases = table_aliases(p);
    let mut out = String::new();
    out.push_str(if p.distinct { "SELECT distinct " } else { "SELECT " });
    let cols: Vec<String> = p
        .output_columns
        .iter()
        .map(|c| format!("{}.{}", aliases[c.local_query].1, quote_ident(&c.attribute)))
        .collect();
    out.push_str(&cols.join(",\n\t"));
    out.push_str("\nFROM ");
    let mut from: Vec<String> = aliases.iter().map(|(t, a)| format!("{t} {a}")).collect();
    let rows: Vec<String> = p
        .constant_table
        .rows
        .iter()
        .map(|r| format!("({})", r.values.iter().map(sql_literal).collect::<Vec<_>>().join(", ")))
        .collect();
    from.push(format!(
        "( VALUES {} ) as p({})",
        rows.join(",\n\t\t"),
        p.constant_table.columns.join(", ")
    ));
    out.push_str(&from.join(",\n\t"));
    let mut conds: Vec<String> = p
        .join_spec
        .iter()
        .map(|j| {
            format!(
                "{}.{}=p.{}",
                aliases[j.local_query].1,
                quote_ident(&j.identifier),
                p.constant_table.columns[j.column]
            )
        })
        .collect();
    let mut filters: Vec<(usize, usize, String)> = Vec::new();
    for (i, lq) in p.local_queries.iter().enumerate() {
        for f in &lq.filters {
            filters.push((
                f.origin,
                i,
                format!("{}.{} {} {}", aliases[i].1, quote_ident(&f.attribute), f.op, sql_literal(&f.value)),
            ));
        }
    }
    filters.sort_by_key(|(origin, i, _)| (*origin, *i));
    conds.extend(filters.into_iter().map(|(_, _, s)| s));
    if !conds.is_empty() {
        let _ = write!(out, "\nWHERE {}", conds.join("\n\tAND "));
    }
    out.push('\n');
    out
}

/// Replaces every `fdw_*` alias with `t<n>` in order of first appearance.
pub fn normalize_aliases(sql: &str) -> String {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut out = String::new();
    let mut rest = sql;
    while let Some(pos) = rest.find("fdw_") {
        let boundary = pos == 0 || !rest[..pos].ends_with(|c: char| c.is_ascii_alphanumeric() || c == '_');
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let end = tail.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(tail.len());
        let word = &tail[..end];
        if boundary {
            let n = map.len();
            out.push_str(map.entry(word.to_owned()).or_insert_with(|| format!("t{n}")));
        } else {
            out.push_str(word);
        }
        rest = &tail[end..];
    }
    out.push_str(rest);
    out
}
