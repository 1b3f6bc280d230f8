//! Store adapters and the federated executor.
//!
//! Every adapter exposes its datasets through [`StoreAdapter::scan_raw`].
//! [`scan`] adds the post-filter step for adapters without pushdown, and
//! [`execute`] joins local results through the plan's constant table.

mod fixtures;
mod stores;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::planner::{FederatedPlan, LocalFilter, LocalQuery};
use crate::registry::StoreKind;
use crate::value::Scalar;

pub use fixtures::{load_documents, load_files, load_relational, load_store, load_triples};
pub use stores::{ColumnType, DocumentStore, FileMetaStore, RelationalStore, TripleStore};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FederationError {
    #[error("store `{store}` has no dataset `{dataset}`")]
    UnknownDataset { store: String, dataset: String },
    #[error("dataset `{dataset}` in store `{store}` has no attribute `{attribute}`")]
    UnknownAttribute { store: String, dataset: String, attribute: String },
    #[error("no adapter registered for store `{0}`")]
    MissingAdapter(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Fixture { path: String, line: usize, message: String },
    #[error("store `{store}`: {message}")]
    InvalidRow { store: String, message: String },
}

pub type Result<T, E = FederationError> = std::result::Result<T, E>;

/// One value per projected attribute; `None` is null and matches nothing.
pub type Row = Vec<Option<Scalar>>;

pub trait StoreAdapter: Send + Sync {
    fn name(&self) -> &str;

    fn kind(&self) -> StoreKind;

    /// Whether `scan_raw` applies filters itself.
    fn supports_pushdown(&self) -> bool;

    fn datasets(&self) -> Vec<String>;

    fn attributes(&self, dataset: &str) -> Result<Vec<String>>;

    /// Rows of `dataset` projected in order. Filters must be applied when
    /// pushdown is supported and are ignored otherwise.
    fn scan_raw(&self, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>>;

    fn row_count(&self, dataset: &str) -> Result<usize>;
}

/// Scans with filters applied, in-store or afterwards.
pub fn scan(adapter: &dyn StoreAdapter, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>> {
    if adapter.supports_pushdown() {
        return adapter.scan_raw(dataset, projection, filters);
    }
    let mut wide: Vec<String> = projection.to_vec();
    for f in filters {
        if !wide.contains(&f.attribute) {
            wide.push(f.attribute.clone());
        }
    }
    let positions: Vec<usize> = filters
        .iter()
        .map(|f| wide.iter().position(|a| *a == f.attribute).expect("filter attribute was added"))
        .collect();
    let rows = adapter.scan_raw(dataset, &wide, &[])?;
    Ok(rows
        .into_iter()
        .filter(|r| filters.iter().zip(&positions).all(|(f, &i)| f.accepts(r[i].as_ref())))
        .map(|mut r| {
            r.truncate(projection.len());
            r
        })
        .collect())
}

#[derive(Clone, Default)]
pub struct Adapters {
    stores: BTreeMap<String, Arc<dyn StoreAdapter>>,
}

impl fmt::Debug for Adapters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.stores.keys()).finish()
    }
}

impl Adapters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, adapter: impl StoreAdapter + 'static) {
        self.insert_arc(Arc::new(adapter));
    }

    pub fn insert_arc(&mut self, adapter: Arc<dyn StoreAdapter>) {
        self.stores.insert(adapter.name().to_owned(), adapter);
    }

    pub fn with(mut self, adapter: impl StoreAdapter + 'static) -> Self {
        self.insert(adapter);
        self
    }

    pub fn get(&self, store: &str) -> Result<&dyn StoreAdapter> {
        self.stores
            .get(store)
            .map(|a| a.as_ref())
            .ok_or_else(|| FederationError::MissingAdapter(store.to_owned()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.stores.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.stores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stores.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl fmt::Display for ResultTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |v: &Option<Scalar>| v.as_ref().map_or_else(|| "NULL".to_owned(), ToString::to_string);
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &self.rows {
            for (w, v) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell(v).chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: Vec<String>| -> fmt::Result {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(f, "{}", padded.join(" | ").trim_end())
        };
        line(f, self.columns.clone())?;
        writeln!(f, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"))?;
        for r in &self.rows {
            line(f, r.iter().map(cell).collect())?;
        }
        let n = self.rows.len();
        write!(f, "({n} row{})", if n == 1 { "" } else { "s" })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecOptions {
    /// Run local queries for distinct stores on separate threads.
    pub parallel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    pub stores_touched: usize,
    pub rows_scanned: usize,
    pub constant_table_rows: usize,
}

pub fn execute(plan: &FederatedPlan, adapters: &Adapters) -> Result<ResultTable> {
    execute_with(plan, adapters, ExecOptions::default()).map(|(t, _)| t)
}

fn run_local(lq: &LocalQuery, adapters: &Adapters) -> Result<Vec<Row>> {
    scan(adapters.get(&lq.store)?, &lq.dataset, &lq.projection, &lq.filters)
}

pub fn execute_with(plan: &FederatedPlan, adapters: &Adapters, options: ExecOptions) -> Result<(ResultTable, ExecStats)> {
    for lq in &plan.local_queries {
        adapters.get(&lq.store)?;
    }
    let results: Vec<Vec<Row>> = if options.parallel && plan.local_queries.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = plan
                .local_queries
                .iter()
                .map(|lq| s.spawn(move || run_local(lq, adapters)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("local query thread panicked"))
                .collect::<Result<_>>()
        })?
    } else {
        plan.local_queries.iter().map(|lq| run_local(lq, adapters)).collect::<Result<_>>()?
    };

    let mut indexes: Vec<Option<HashMap<&Scalar, Vec<usize>>>> = vec![None; plan.local_queries.len()];
    for j in &plan.join_spec {
        let pos = plan.local_queries[j.local_query].identifier_position();
        let mut index: HashMap<&Scalar, Vec<usize>> = HashMap::new();
        for (i, row) in results[j.local_query].iter().enumerate() {
            if let Some(v) = &row[pos] {
                index.entry(v).or_default().push(i);
            }
        }
        indexes[j.local_query] = Some(index);
    }
    let join_column: HashMap<usize, usize> = plan.join_spec.iter().map(|j| (j.local_query, j.column)).collect();
    let output: Vec<(usize, usize)> = plan
        .output_columns
        .iter()
        .map(|c| {
            let lq = &plan.local_queries[c.local_query];
            let pos = lq
                .projection
                .iter()
                .position(|a| *a == c.attribute)
                .expect("output attribute is projected");
            (c.local_query, pos)
        })
        .collect();

    let all: Vec<Vec<usize>> = results.iter().map(|r| (0..r.len()).collect()).collect();
    let mut rows = Vec::new();
    let mut seen: HashSet<Row> = HashSet::new();
    for crow in &plan.constant_table.rows {
        let mut candidates: Vec<&[usize]> = Vec::with_capacity(results.len());
        for (q, index) in indexes.iter().enumerate() {
            let list: &[usize] = match index {
                Some(index) => {
                    let key = &crow.values[join_column[&q]];
                    index.get(key).map_or(&[], Vec::as_slice)
                }
                None => &all[q],
            };
            candidates.push(list);
        }
        if candidates.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut odometer = vec![0usize; candidates.len()];
        'combos: loop {
            let row: Row = output
                .iter()
                .map(|&(q, pos)| results[q][candidates[q][odometer[q]]][pos].clone())
                .collect();
            if !plan.distinct || seen.insert(row.clone()) {
                rows.push(row);
            }
            let mut k = candidates.len();
            loop {
                if k == 0 {
                    break 'combos;
                }
                k -= 1;
                odometer[k] += 1;
                if odometer[k] < candidates[k].len() {
                    break;
                }
                odometer[k] = 0;
            }
        }
    }
    let stats = ExecStats {
        stores_touched: plan.local_queries.len(),
        rows_scanned: results.iter().map(Vec::len).sum(),
        constant_table_rows: plan.constant_table.rows.len(),
    };
    Ok((
        ResultTable {
            columns: plan.output_columns.iter().map(|c| c.name.clone()).collect(),
            rows,
        },
        stats,
    ))
}
