//! The query pipeline over a catalog and a set of store adapters, plus the
//! fixture directory loader.
//!
//! A fixture directory looks like:
//!
//! ```text
//! gcs.toml            [[entities]] global dataset schemas
//! lcs/<store>.toml    one data store descriptor per file
//! aliases.toml        [[aliases]] gcs_attr / lcs_attr / store
//! provenance.toml     [[workflows]] and [[executions]]
//! stores/<store>/     store contents in the adapter's format
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::catalog::{CatalogGraph, NodeId};
use crate::error::{Error, Result};
use crate::federation::{self, Adapters, ExecOptions, ExecStats, ResultTable};
use crate::planner::{self, FederatedPlan, PlanOptions};
use crate::provenance::ProvenanceDocument;
use crate::query::{self, GlobalQuery};
use crate::registry::{AliasDocument, DataStoreDescriptor, GcsDocument};

/// A query taken through parse, validate, plan and render.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub query: GlobalQuery,
    pub plan: FederatedPlan,
    pub sql: String,
    pub build_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryStats {
    pub build_ms: f64,
    pub exec_ms: f64,
    pub stores_touched: usize,
    pub constant_table_rows: usize,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub table: ResultTable,
    pub stats: QueryStats,
    pub exec: ExecStats,
    pub prepared: Prepared,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadSummary {
    pub entities: usize,
    pub stores: Vec<String>,
    pub aliases: usize,
    pub workflows: usize,
    pub executions: Vec<NodeId>,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::format(path, e))
}

fn optional_toml<T: DeserializeOwned + Default>(path: &Path) -> Result<T> {
    if path.exists() {
        read_toml(path)
    } else {
        Ok(T::default())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Mediator {
    catalog: CatalogGraph,
    adapters: Adapters,
    options: PlanOptions,
    exec_options: ExecOptions,
}

impl Mediator {
    pub fn new(catalog: CatalogGraph, adapters: Adapters) -> Self {
        Mediator { catalog, adapters, options: PlanOptions::default(), exec_options: ExecOptions::default() }
    }

    pub fn with_plan_options(mut self, options: PlanOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_exec_options(mut self, options: ExecOptions) -> Self {
        self.exec_options = options;
        self
    }

    pub fn catalog(&self) -> &CatalogGraph {
        &self.catalog
    }

    pub fn catalog_mut(&mut self) -> &mut CatalogGraph {
        &mut self.catalog
    }

    pub fn adapters(&self) -> &Adapters {
        &self.adapters
    }

    pub fn adapters_mut(&mut self) -> &mut Adapters {
        &mut self.adapters
    }

    pub fn into_parts(self) -> (CatalogGraph, Adapters) {
        (self.catalog, self.adapters)
    }

    /// A mediator over a fresh catalog ingested from a fixture directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut m = Mediator::default();
        m.ingest_dir(dir)?;
        Ok(m)
    }

    /// Ingests a fixture directory into the catalog and attaches the
    /// stores found under `stores/`. The catalog is unchanged on error.
    pub fn ingest_dir(&mut self, dir: impl AsRef<Path>) -> Result<LoadSummary> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(dir, "not a directory"));
        }
        let dir = dir.canonicalize().map_err(|e| Error::io(dir, e))?;
        let gcs: GcsDocument = optional_toml(&dir.join("gcs.toml"))?;
        let mut descriptors: Vec<(PathBuf, DataStoreDescriptor)> = Vec::new();
        let lcs_dir = dir.join("lcs");
        if lcs_dir.is_dir() {
            let mut paths: Vec<PathBuf> = fs::read_dir(&lcs_dir)
                .map_err(|e| Error::io(&lcs_dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "toml"))
                .collect();
            paths.sort();
            for p in paths {
                let d = read_toml(&p)?;
                descriptors.push((p, d));
            }
        }
        let aliases: AliasDocument = optional_toml(&dir.join("aliases.toml"))?;
        let provenance: ProvenanceDocument = optional_toml(&dir.join("provenance.toml"))?;

        let mut summary = LoadSummary {
            entities: gcs.entities.len(),
            aliases: aliases.aliases.len(),
            workflows: provenance.workflows.len(),
            ..LoadSummary::default()
        };
        let executions = self.catalog.atomically(|g| -> Result<Vec<NodeId>> {
            let mut reg = g.registry_mut();
            if !gcs.entities.is_empty() {
                reg.register_gcs(&gcs.entities)?;
            }
            for (_, d) in &descriptors {
                reg.register_lcs(d)?;
                let location = dir.join("stores").join(&d.name);
                reg.set_store_location(&d.name, &location.display().to_string())?;
            }
            for a in &aliases.aliases {
                reg.create_alias(a)?;
            }
            Ok(g.provenance_mut().ingest(&provenance)?)
        })?;
        summary.executions = executions;
        summary.stores = descriptors.iter().map(|(_, d)| d.name.clone()).collect();
        for store in &summary.stores {
            self.attach_store(store)?;
        }
        Ok(summary)
    }

    /// (Re)loads one store's adapter from its registered location.
    pub fn attach_store(&mut self, store: &str) -> Result<()> {
        let reg = self.catalog.registry();
        let info = reg.store(store)?;
        let Some(location) = reg.store_location(store) else {
            return Ok(());
        };
        let mut declared = Vec::new();
        for d in reg.datasets(store)? {
            let attrs = reg.dataset_attributes(store, &d)?;
            declared.push((d, attrs));
        }
        let adapter = federation::load_store(info.kind, store, Path::new(&location), &declared)?;
        self.adapters.insert_arc(adapter.into());
        Ok(())
    }

    /// Attaches every registered store that has a location.
    pub fn attach_stores(&mut self) -> Result<()> {
        let names: Vec<String> = self.catalog.registry().stores().into_iter().map(|s| s.name).collect();
        for s in names {
            self.attach_store(&s)?;
        }
        Ok(())
    }

    /// Opens a persisted catalog and attaches its stores.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let catalog = CatalogGraph::load(path)?;
        let mut m = Mediator::new(catalog, Adapters::new());
        m.attach_stores()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(self.catalog.save(path)?)
    }

    /// Parse, validate, plan and render.
    pub fn prepare(&self, text: &str) -> Result<Prepared> {
        let start = Instant::now();
        let query = query::parse(text)?;
        let plan = planner::plan(&query, &self.catalog, self.options)?;
        let sql = planner::render_sql(&plan);
        Ok(Prepared { query, plan, sql, build_time: start.elapsed() })
    }

    pub fn execute(&self, prepared: Prepared) -> Result<QueryOutcome> {
        let start = Instant::now();
        let (table, exec) = federation::execute_with(&prepared.plan, &self.adapters, self.exec_options)?;
        let exec_time = start.elapsed();
        Ok(QueryOutcome {
            stats: QueryStats {
                build_ms: ms(prepared.build_time),
                exec_ms: ms(exec_time),
                stores_touched: exec.stores_touched,
                constant_table_rows: exec.constant_table_rows,
            },
            table,
            exec,
            prepared,
        })
    }

    pub fn query(&self, text: &str) -> Result<QueryOutcome> {
        let prepared = self.prepare(text)?;
        self.execute(prepared)
    }
}
