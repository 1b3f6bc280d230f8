use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::planner::LocalFilter;
use crate::registry::StoreKind;
use crate::value::Scalar;

use super::{FederationError, Result, Row, StoreAdapter};

fn unknown_dataset(store: &str, dataset: &str) -> FederationError {
    FederationError::UnknownDataset { store: store.to_owned(), dataset: dataset.to_owned() }
}

fn unknown_attribute(store: &str, dataset: &str, attribute: &str) -> FederationError {
    FederationError::UnknownAttribute {
        store: store.to_owned(),
        dataset: dataset.to_owned(),
        attribute: attribute.to_owned(),
    }
}

/// Attributes to read: the projection, plus filter attributes when the
/// filters are applied here. Returns filter positions in the wide row.
fn widen(projection: &[String], filters: &[LocalFilter], apply: bool) -> (Vec<String>, Vec<usize>) {
    let mut wide = projection.to_vec();
    let mut positions = Vec::new();
    if apply {
        for f in filters {
            let pos = match wide.iter().position(|a| *a == f.attribute) {
                Some(p) => p,
                None => {
                    wide.push(f.attribute.clone());
                    wide.len() - 1
                }
            };
            positions.push(pos);
        }
    }
    (wide, positions)
}

fn keep(row: &Row, filters: &[LocalFilter], positions: &[usize]) -> bool {
    filters.iter().zip(positions).all(|(f, &i)| f.accepts(row[i].as_ref()))
}

/// Rows as attribute maps; shared by the document and file stores.
#[derive(Debug, Clone, Default)]
struct Records {
    fields: BTreeSet<String>,
    rows: Vec<BTreeMap<String, Scalar>>,
}

impl Records {
    fn push(&mut self, row: BTreeMap<String, Scalar>) {
        self.fields.extend(row.keys().cloned());
        self.rows.push(row);
    }

    fn scan(&self, store: &str, dataset: &str, projection: &[String], filters: &[LocalFilter], apply: bool) -> Result<Vec<Row>> {
        let (wide, positions) = widen(projection, filters, apply);
        if let Some(a) = wide.iter().find(|a| !self.fields.contains(*a)) {
            return Err(unknown_attribute(store, dataset, a));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| wide.iter().map(|a| r.get(a).cloned()).collect::<Row>())
            .filter(|r| keep(r, filters, &positions))
            .map(|mut r| {
                r.truncate(projection.len());
                r
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnType {
    Int,
    Float,
    Str,
    Bool,
}

impl ColumnType {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "int" => Some(ColumnType::Int),
            "float" => Some(ColumnType::Float),
            "str" => Some(ColumnType::Str),
            "bool" => Some(ColumnType::Bool),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::Str => "str",
            ColumnType::Bool => "bool",
        }
    }

    pub fn admits(self, v: &Scalar) -> bool {
        v.type_name() == self.as_str()
    }

    /// Parses a cell; the empty string is null.
    pub fn parse_cell(self, s: &str) -> Result<Option<Scalar>, String> {
        if s.is_empty() {
            return Ok(None);
        }
        let bad = || format!("`{s}` is not a valid {}", self.as_str());
        Ok(Some(match self {
            ColumnType::Int => Scalar::Int(s.parse().map_err(|_| bad())?),
            ColumnType::Float => {
                let f: f64 = s.parse().map_err(|_| bad())?;
                if !f.is_finite() {
                    return Err(bad());
                }
                Scalar::Float(f)
            }
            ColumnType::Str => Scalar::str(s),
            ColumnType::Bool => Scalar::Bool(s.parse().map_err(|_| bad())?),
        }))
    }
}

#[derive(Debug, Clone, Default)]
struct Table {
    columns: Vec<(String, ColumnType)>,
    rows: Vec<Row>,
}

/// Tables of typed columns. Filters are pushed down by default.
#[derive(Debug, Clone)]
pub struct RelationalStore {
    name: String,
    pushdown: bool,
    tables: BTreeMap<String, Table>,
}

impl RelationalStore {
    pub fn new(name: impl Into<String>) -> Self {
        RelationalStore { name: name.into(), pushdown: true, tables: BTreeMap::new() }
    }

    pub fn with_pushdown(mut self, pushdown: bool) -> Self {
        self.pushdown = pushdown;
        self
    }

    /// Creates or replaces a table.
    pub fn create_table<S: Into<String>>(&mut self, table: impl Into<String>, columns: impl IntoIterator<Item = (S, ColumnType)>) {
        let columns = columns.into_iter().map(|(n, t)| (n.into(), t)).collect();
        self.tables.insert(table.into(), Table { columns, rows: Vec::new() });
    }

    /// Creates the table with untyped (`str`) columns unless it exists.
    pub fn declare<S: Into<String>>(&mut self, table: &str, columns: impl IntoIterator<Item = S>) {
        if !self.tables.contains_key(table) {
            let cols: Vec<(String, ColumnType)> = columns.into_iter().map(|c| (c.into(), ColumnType::Str)).collect();
            self.create_table(table, cols);
        }
    }

    pub fn insert(&mut self, table: &str, row: Row) -> Result<()> {
        let t = self.tables.get_mut(table).ok_or_else(|| unknown_dataset(&self.name, table))?;
        let invalid = |message: String| FederationError::InvalidRow { store: self.name.clone(), message };
        if row.len() != t.columns.len() {
            return Err(invalid(format!("{table}: expected {} values, got {}", t.columns.len(), row.len())));
        }
        for ((col, ty), v) in t.columns.iter().zip(&row) {
            if let Some(v) = v {
                if !ty.admits(v) {
                    return Err(invalid(format!("{table}.{col}: {} value in {} column", v.type_name(), ty.as_str())));
                }
            }
        }
        t.rows.push(row);
        Ok(())
    }

    pub fn columns(&self, table: &str) -> Option<&[(String, ColumnType)]> {
        self.tables.get(table).map(|t| t.columns.as_slice())
    }
}

impl StoreAdapter for RelationalStore {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> StoreKind {
        StoreKind::RelationalDB
    }

    fn supports_pushdown(&self) -> bool {
        self.pushdown
    }

    fn datasets(&self) -> Vec<String> {
        self.tables.keys().cloned().collect()
    }

    fn attributes(&self, dataset: &str) -> Result<Vec<String>> {
        let t = self.tables.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        Ok(t.columns.iter().map(|(c, _)| c.clone()).collect())
    }

    fn scan_raw(&self, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>> {
        let t = self.tables.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        let (wide, positions) = widen(projection, filters, self.pushdown);
        let idx = wide
            .iter()
            .map(|a| {
                t.columns
                    .iter()
                    .position(|(c, _)| c == a)
                    .ok_or_else(|| unknown_attribute(&self.name, dataset, a))
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(t.rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i].clone()).collect::<Row>())
            .filter(|r| keep(r, filters, &positions))
            .map(|mut r| {
                r.truncate(projection.len());
                r
            })
            .collect())
    }

    fn row_count(&self, dataset: &str) -> Result<usize> {
        Ok(self.tables.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?.rows.len())
    }
}

/// Collections of flat documents. Filters are pushed down by default.
#[derive(Debug, Clone)]
pub struct DocumentStore {
    name: String,
    pushdown: bool,
    collections: BTreeMap<String, Records>,
}

impl DocumentStore {
    pub fn new(name: impl Into<String>) -> Self {
        DocumentStore { name: name.into(), pushdown: true, collections: BTreeMap::new() }
    }

    pub fn with_pushdown(mut self, pushdown: bool) -> Self {
        self.pushdown = pushdown;
        self
    }

    /// Makes a collection and its fields known even before any document
    /// carries them.
    pub fn declare<S: Into<String>>(&mut self, collection: &str, fields: impl IntoIterator<Item = S>) {
        let c = self.collections.entry(collection.to_owned()).or_default();
        c.fields.extend(fields.into_iter().map(Into::into));
    }

    pub fn insert<K: Into<String>>(&mut self, collection: &str, doc: impl IntoIterator<Item = (K, Scalar)>) {
        let doc = doc.into_iter().map(|(k, v)| (k.into(), v)).collect();
        self.collections.entry(collection.to_owned()).or_default().push(doc);
    }
}

impl StoreAdapter for DocumentStore {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> StoreKind {
        StoreKind::DocumentDB
    }

    fn supports_pushdown(&self) -> bool {
        self.pushdown
    }

    fn datasets(&self) -> Vec<String> {
        self.collections.keys().cloned().collect()
    }

    fn attributes(&self, dataset: &str) -> Result<Vec<String>> {
        let c = self.collections.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        Ok(c.fields.iter().cloned().collect())
    }

    fn scan_raw(&self, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>> {
        let c = self.collections.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        c.scan(&self.name, dataset, projection, filters, self.pushdown)
    }

    fn row_count(&self, dataset: &str) -> Result<usize> {
        Ok(self.collections.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?.rows.len())
    }
}

/// Subject/predicate/object triples. A dataset is a class: its rows are
/// the subjects typed with it (`a` or `rdf:type`), exposed through the
/// `URI` attribute and one attribute per predicate. Multi-valued
/// predicates yield one row per combination; absent ones yield null.
#[derive(Debug, Clone)]
pub struct TripleStore {
    name: String,
    pushdown: bool,
    triples: Vec<(String, String, Scalar)>,
    declared: BTreeMap<String, BTreeSet<String>>,
}

pub const TYPE_PREDICATES: [&str; 2] = ["a", "rdf:type"];
pub const SUBJECT_ATTRIBUTE: &str = "URI";

impl TripleStore {
    pub fn new(name: impl Into<String>) -> Self {
        TripleStore { name: name.into(), pushdown: false, triples: Vec::new(), declared: BTreeMap::new() }
    }

    pub fn with_pushdown(mut self, pushdown: bool) -> Self {
        self.pushdown = pushdown;
        self
    }

    pub fn declare<S: Into<String>>(&mut self, class: &str, predicates: impl IntoIterator<Item = S>) {
        self.declared
            .entry(class.to_owned())
            .or_default()
            .extend(predicates.into_iter().map(Into::into));
    }

    pub fn insert(&mut self, subject: impl Into<String>, predicate: impl Into<String>, object: impl Into<Scalar>) {
        self.triples.push((subject.into(), predicate.into(), object.into()));
    }

    pub fn triples(&self) -> &[(String, String, Scalar)] {
        &self.triples
    }

    fn members(&self, class: &str) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.triples
            .iter()
            .filter(|(_, p, o)| TYPE_PREDICATES.contains(&p.as_str()) && o.as_str() == Some(class))
            .map(|(s, _, _)| s.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    fn classes(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.declared.keys().cloned().collect();
        for (_, p, o) in &self.triples {
            if TYPE_PREDICATES.contains(&p.as_str()) {
                if let Some(c) = o.as_str() {
                    out.insert(c.to_owned());
                }
            }
        }
        out
    }
}

impl StoreAdapter for TripleStore {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> StoreKind {
        StoreKind::TripleStore
    }

    fn supports_pushdown(&self) -> bool {
        self.pushdown
    }

    fn datasets(&self) -> Vec<String> {
        self.classes().into_iter().collect()
    }

    fn attributes(&self, dataset: &str) -> Result<Vec<String>> {
        if !self.classes().contains(dataset) {
            return Err(unknown_dataset(&self.name, dataset));
        }
        let members: BTreeSet<&str> = self.members(dataset).into_iter().collect();
        let mut out: BTreeSet<String> = self.declared.get(dataset).cloned().unwrap_or_default();
        out.insert(SUBJECT_ATTRIBUTE.to_owned());
        for (s, p, _) in &self.triples {
            if members.contains(s.as_str()) && !TYPE_PREDICATES.contains(&p.as_str()) {
                out.insert(p.clone());
            }
        }
        Ok(out.into_iter().collect())
    }

    fn scan_raw(&self, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>> {
        let known = self.attributes(dataset)?;
        let (wide, positions) = widen(projection, filters, self.pushdown);
        if let Some(a) = wide.iter().find(|a| !known.contains(*a)) {
            return Err(unknown_attribute(&self.name, dataset, a));
        }
        let members = self.members(dataset);
        let member_set: BTreeSet<&str> = members.iter().copied().collect();
        let mut values: HashMap<(&str, &str), Vec<&Scalar>> = HashMap::new();
        for (s, p, o) in &self.triples {
            if member_set.contains(s.as_str()) {
                values.entry((s.as_str(), p.as_str())).or_default().push(o);
            }
        }
        let mut rows = Vec::new();
        for s in members {
            let subject = Scalar::str(s);
            let columns: Vec<Vec<Option<Scalar>>> = wide
                .iter()
                .map(|a| {
                    if a == SUBJECT_ATTRIBUTE {
                        vec![Some(subject.clone())]
                    } else {
                        match values.get(&(s, a.as_str())) {
                            Some(vs) => vs.iter().map(|v| Some((*v).clone())).collect(),
                            None => vec![None],
                        }
                    }
                })
                .collect();
            let mut odometer = vec![0usize; columns.len()];
            'rows: loop {
                let row: Row = columns.iter().zip(&odometer).map(|(c, &i)| c[i].clone()).collect();
                if keep(&row, filters, &positions) {
                    let mut row = row;
                    row.truncate(projection.len());
                    rows.push(row);
                }
                let mut k = columns.len();
                loop {
                    if k == 0 {
                        break 'rows;
                    }
                    k -= 1;
                    odometer[k] += 1;
                    if odometer[k] < columns[k].len() {
                        break;
                    }
                    odometer[k] = 0;
                }
            }
        }
        Ok(rows)
    }

    fn row_count(&self, dataset: &str) -> Result<usize> {
        if !self.classes().contains(dataset) {
            return Err(unknown_dataset(&self.name, dataset));
        }
        Ok(self.members(dataset).len())
    }
}

/// File metadata grouped into datasets: `path`, `size` and free-form keys.
#[derive(Debug, Clone)]
pub struct FileMetaStore {
    name: String,
    pushdown: bool,
    datasets: BTreeMap<String, Records>,
}

impl FileMetaStore {
    pub fn new(name: impl Into<String>) -> Self {
        FileMetaStore { name: name.into(), pushdown: false, datasets: BTreeMap::new() }
    }

    pub fn with_pushdown(mut self, pushdown: bool) -> Self {
        self.pushdown = pushdown;
        self
    }

    pub fn declare<S: Into<String>>(&mut self, dataset: &str, keys: impl IntoIterator<Item = S>) {
        let d = self.datasets.entry(dataset.to_owned()).or_default();
        d.fields.extend(["path".to_owned(), "size".to_owned()]);
        d.fields.extend(keys.into_iter().map(Into::into));
    }

    pub fn insert<K: Into<String>>(
        &mut self,
        dataset: &str,
        path: impl Into<String>,
        size: i64,
        metadata: impl IntoIterator<Item = (K, Scalar)>,
    ) {
        let mut row: BTreeMap<String, Scalar> = metadata.into_iter().map(|(k, v)| (k.into(), v)).collect();
        row.insert("path".into(), Scalar::Str(path.into()));
        row.insert("size".into(), Scalar::Int(size));
        let d = self.datasets.entry(dataset.to_owned()).or_default();
        d.push(row);
    }
}

impl StoreAdapter for FileMetaStore {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> StoreKind {
        StoreKind::FileSystem
    }

    fn supports_pushdown(&self) -> bool {
        self.pushdown
    }

    fn datasets(&self) -> Vec<String> {
        self.datasets.keys().cloned().collect()
    }

    fn attributes(&self, dataset: &str) -> Result<Vec<String>> {
        let d = self.datasets.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        Ok(d.fields.iter().cloned().collect())
    }

    fn scan_raw(&self, dataset: &str, projection: &[String], filters: &[LocalFilter]) -> Result<Vec<Row>> {
        let d = self.datasets.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?;
        d.scan(&self.name, dataset, projection, filters, self.pushdown)
    }

    fn row_count(&self, dataset: &str) -> Result<usize> {
        Ok(self.datasets.get(dataset).ok_or_else(|| unknown_dataset(&self.name, dataset))?.rows.len())
    }
}
