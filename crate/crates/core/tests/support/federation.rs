use std::collections::{BTreeMap, BTreeSet};

use polyfed::catalog::CatalogGraph;
use polyfed::federation::{Adapters, ColumnType, DocumentStore, FileMetaStore, RelationalStore, Row, TripleStore};
use polyfed::planner::FederatedPlan;
use polyfed::provenance::AttributeValueRecord;
use polyfed::registry::{AliasMapping, DataStoreDescriptor, DatasetSchemaDef, StoreKind};
use polyfed::value::Scalar;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{compare, OPS};

/// One store's dataset as plain records. A record maps attributes to their
/// values; an empty list is a missing value and several values (triple
/// stores only) are alternatives.
#[derive(Debug, Clone)]
pub struct RawStore {
    pub store: String,
    pub dataset: String,
    pub kind: StoreKind,
    pub identifier: String,
    pub attributes: Vec<String>,
    pub records: Vec<BTreeMap<String, Vec<Scalar>>>,
}

impl RawStore {
    /// Full-width rows: every combination of alternative values.
    pub fn rows(&self) -> Vec<BTreeMap<String, Option<Scalar>>> {
        let mut out = Vec::new();
        for r in &self.records {
            let mut partial: Vec<BTreeMap<String, Option<Scalar>>> = vec![BTreeMap::new()];
            for a in &self.attributes {
                let values: Vec<Option<Scalar>> = match r.get(a) {
                    Some(v) if !v.is_empty() => v.iter().cloned().map(Some).collect(),
                    _ => vec![None],
                };
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        values.iter().map(move |v| {
                            let mut p = p.clone();
                            p.insert(a.clone(), v.clone());
                            p
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FedInstance {
    pub catalog: CatalogGraph,
    pub raw: Vec<RawStore>,
    pub query: String,
    pub prune: bool,
}

impl FedInstance {
    pub fn adapters(&self, flip_pushdown: bool) -> Adapters {
        let mut adapters = Adapters::new();
        for r in &self.raw {
            match r.kind {
                StoreKind::RelationalDB => {
                    let mut s = RelationalStore::new(&r.store).with_pushdown(!flip_pushdown);
                    let cols: Vec<(String, ColumnType)> = r
                        .attributes
                        .iter()
                        .map(|a| {
                            let ty = r
                                .records
                                .iter()
                                .find_map(|rec| rec.get(a).and_then(|v| v.first()))
                                .map_or(ColumnType::Int, |v| match v {
                                    Scalar::Str(_) => ColumnType::Str,
                                    _ => ColumnType::Int,
                                });
                            (a.clone(), ty)
                        })
                        .collect();
                    s.create_table(&r.dataset, cols);
                    for rec in &r.records {
                        let row: Row = r.attributes.iter().map(|a| rec.get(a).and_then(|v| v.first().cloned())).collect();
                        s.insert(&r.dataset, row).unwrap();
                    }
                    adapters.insert(s);
                }
                StoreKind::DocumentDB => {
                    let mut s = DocumentStore::new(&r.store).with_pushdown(!flip_pushdown);
                    s.declare(&r.dataset, r.attributes.iter().cloned());
                    for rec in &r.records {
                        s.insert(&r.dataset, rec.iter().filter_map(|(k, v)| v.first().map(|v| (k.clone(), v.clone()))));
                    }
                    adapters.insert(s);
                }
                StoreKind::TripleStore => {
                    let mut s = TripleStore::new(&r.store).with_pushdown(flip_pushdown);
                    s.declare(&r.dataset, r.attributes.iter().filter(|a| **a != r.identifier).cloned());
                    for rec in &r.records {
                        let subject = rec[&r.identifier][0].as_str().unwrap().to_owned();
                        s.insert(&subject, "a", r.dataset.as_str());
                        for (k, vs) in rec {
                            if *k != r.identifier {
                                for v in vs {
                                    s.insert(&subject, k.as_str(), v.clone());
                                }
                            }
                        }
                    }
                    adapters.insert(s);
                }
                StoreKind::FileSystem => {
                    let mut s = FileMetaStore::new(&r.store).with_pushdown(flip_pushdown);
                    s.declare(&r.dataset, r.attributes.iter().filter(|a| !["path", "size"].contains(&a.as_str())).cloned());
                    for rec in &r.records {
                        let path = rec["path"][0].as_str().unwrap().to_owned();
                        let size = match rec["size"].first() {
                            Some(Scalar::Int(i)) => *i,
                            _ => 0,
                        };
                        let meta = rec
                            .iter()
                            .filter(|(k, _)| !["path", "size"].contains(&k.as_str()))
                            .filter_map(|(k, v)| v.first().map(|v| (k.clone(), v.clone())));
                        s.insert(&r.dataset, path, size, meta);
                    }
                    adapters.insert(s);
                }
            }
        }
        adapters
    }
}

fn identifier_for(kind: StoreKind) -> &'static str {
    match kind {
        StoreKind::RelationalDB => "id",
        StoreKind::DocumentDB => "key",
        StoreKind::TripleStore => "URI",
        StoreKind::FileSystem => "path",
    }
}

fn id_value(kind: StoreKind, i: i64) -> Scalar {
    match kind {
        StoreKind::RelationalDB | StoreKind::DocumentDB => Scalar::Int(i),
        StoreKind::TripleStore => Scalar::Str(format!("s{i}")),
        StoreKind::FileSystem => Scalar::Str(format!("/f{i}")),
    }
}

/// Attribute value domains: small so that filters and duplicates bite.
fn attr_value(rng: &mut ChaCha8Rng, string_typed: bool) -> Scalar {
    if string_typed {
        Scalar::str(*["x", "y", "z"].choose(rng).unwrap())
    } else {
        Scalar::Int(rng.random_range(0..4))
    }
}

/// A random federation: up to four stores, at most 20 records each, up to
/// five executions and a query with random projections and filters.
pub fn random_instance(rng: &mut ChaCha8Rng) -> FedInstance {
    let mut g = CatalogGraph::new();
    let gcs_attrs: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
    let mut all = vec!["id".to_owned()];
    all.extend(gcs_attrs.iter().cloned());
    g.registry_mut().register_gcs(&[DatasetSchemaDef::new("E", "id", all)]).unwrap();

    let n_stores = rng.random_range(1..=4);
    let mut raw = Vec::new();
    let mut pool: Vec<(usize, String, bool)> = Vec::new();
    for i in 0..n_stores {
        let kind = *StoreKind::ALL.choose(rng).unwrap();
        let identifier = identifier_for(kind).to_owned();
        let mut attributes = vec![identifier.clone()];
        let extra = match kind {
            StoreKind::FileSystem => vec!["size".to_owned(), "c0".to_owned(), "c1".to_owned()],
            _ => vec!["c0".to_owned(), "c1".to_owned(), "c2".to_owned()],
        };
        let typed: Vec<bool> = extra.iter().map(|a| a != "size" && rng.random_bool(0.4)).collect();
        for (a, t) in extra.iter().zip(&typed) {
            pool.push((i, a.clone(), *t));
        }
        attributes.extend(extra.iter().cloned());
        let dataset = format!("D{i}");
        let store = format!("S{i}");
        let desc = DataStoreDescriptor::single(
            store.as_str(),
            kind,
            "m",
            "db",
            "sch",
            vec![DatasetSchemaDef::new(dataset.as_str(), identifier.as_str(), attributes.iter().cloned())],
        );
        g.registry_mut().register_lcs(&desc).unwrap();

        let mut records = Vec::new();
        let mut used_ids = BTreeSet::new();
        for _ in 0..rng.random_range(0..=20) {
            let id = rng.random_range(0..8);
            let unique = matches!(kind, StoreKind::TripleStore | StoreKind::FileSystem);
            if unique && !used_ids.insert(id) {
                continue;
            }
            let mut rec = BTreeMap::new();
            rec.insert(identifier.clone(), vec![id_value(kind, id)]);
            for (a, t) in extra.iter().zip(&typed) {
                let values = match kind {
                    StoreKind::TripleStore => (0..rng.random_range(0..=2)).map(|_| attr_value(rng, *t)).collect(),
                    StoreKind::DocumentDB if rng.random_bool(0.15) => Vec::new(),
                    StoreKind::RelationalDB if rng.random_bool(0.1) => Vec::new(),
                    _ if a == "size" => vec![Scalar::Int(rng.random_range(0..4))],
                    _ => vec![attr_value(rng, *t)],
                };
                rec.insert(a.clone(), values);
            }
            if kind == StoreKind::TripleStore {
                let mut seen = BTreeSet::new();
                for v in rec.values_mut() {
                    v.retain(|x| seen.insert(x.clone()));
                    seen.clear();
                }
            }
            records.push(rec);
        }
        raw.push(RawStore { store, dataset, kind, identifier, attributes, records });
    }

    g.registry_mut()
        .create_alias(&AliasMapping::new("E.id", format!("{}.{}", raw[0].dataset, raw[0].identifier), raw[0].store.as_str()))
        .unwrap();
    pool.shuffle(rng);
    let mut mapped: BTreeMap<String, Vec<(usize, String, bool)>> = BTreeMap::new();
    for a in &gcs_attrs {
        let n = if rng.random_bool(0.25) { 2 } else { 1 };
        for _ in 0..n {
            let Some(target) = pool.pop() else { break };
            if mapped.get(a).is_some_and(|m| m.iter().any(|(s, _, _)| *s == target.0)) {
                continue;
            }
            let r = &raw[target.0];
            g.registry_mut()
                .create_alias(&AliasMapping::new(format!("E.{a}"), format!("{}.{}", r.dataset, target.1), r.store.as_str()))
                .unwrap();
            mapped.entry(a.clone()).or_default().push(target);
        }
    }

    for _ in 0..rng.random_range(1..=5) {
        let mut prov = g.provenance_mut();
        let wfe = prov.begin_workflow_execution("wf").unwrap();
        let values: Vec<AttributeValueRecord> = raw
            .iter()
            .map(|r| {
                AttributeValueRecord::generated(format!("{}.{}", r.dataset, r.identifier), id_value(r.kind, rng.random_range(0..9)))
                    .in_store(r.store.as_str())
            })
            .collect();
        prov.record_transformation_execution(wfe.as_str(), "capture", &values).unwrap();
        prov.end_workflow_execution(wfe.as_str()).unwrap();
    }

    let single: Vec<&String> = mapped.iter().filter(|(_, m)| m.len() == 1).map(|(a, _)| a).collect();
    let filterable: Vec<(&String, bool)> = mapped.iter().map(|(a, m)| (a, m[0].2)).collect();
    let mut projections: Vec<String> = Vec::new();
    if single.is_empty() {
        projections.push("E.id".into());
    } else {
        for _ in 0..rng.random_range(1..=4) {
            projections.push(format!("E.{}", single.choose(rng).unwrap()));
        }
    }
    let mut text = format!("select {} where E from wf", projections.join(", "));
    if !filterable.is_empty() {
        for _ in 0..rng.random_range(0..=2) {
            let (a, string_typed) = *filterable.choose(rng).unwrap();
            let op = *OPS.choose(rng).unwrap();
            let keep_type = rng.random_bool(0.9);
            let v = attr_value(rng, if keep_type { string_typed } else { !string_typed });
            let lit = match v {
                Scalar::Str(s) => format!("\"{s}\""),
                other => other.to_string(),
            };
            text.push_str(&format!(" and E.{a} {op} {lit}"));
        }
    }
    FedInstance { catalog: g, raw, query: text, prune: rng.random_bool(0.7) }
}

/// Nested loops over full store contents and the constant table, filtered
/// by identifier equalities and local filters, then projected and
/// de-duplicated.
pub fn nested_loop(plan: &FederatedPlan, raw: &[RawStore]) -> Vec<Row> {
    let tables: Vec<Vec<BTreeMap<String, Option<Scalar>>>> = plan
        .local_queries
        .iter()
        .map(|lq| raw.iter().find(|r| r.store == lq.store && r.dataset == lq.dataset).map(RawStore::rows).unwrap_or_default())
        .collect();
    let mut out: Vec<Row> = Vec::new();
    for crow in &plan.constant_table.rows {
        let candidates: Vec<Vec<&BTreeMap<String, Option<Scalar>>>> = plan
            .local_queries
            .iter()
            .enumerate()
            .map(|(q, lq)| {
                tables[q]
                    .iter()
                    .filter(|row| {
                        plan.join_spec.iter().filter(|j| j.local_query == q).all(|j| {
                            row[&lq.identifier]
                                .as_ref()
                                .is_some_and(|v| compare(v, polyfed::value::CompareOp::Eq, &crow.values[j.column]))
                        }) && lq.filters.iter().all(|f| row[&f.attribute].as_ref().is_some_and(|v| compare(v, f.op, &f.value)))
                    })
                    .collect()
            })
            .collect();
        let mut combos: Vec<Vec<&BTreeMap<String, Option<Scalar>>>> = vec![Vec::new()];
        for c in &candidates {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    c.iter().map(move |r| {
                        let mut p = prefix.clone();
                        p.push(*r);
                        p
                    })
                })
                .collect();
        }
        for rows in combos {
            let row: Row = plan.output_columns.iter().map(|c| rows[c.local_query][&c.attribute].clone()).collect();
            if !plan.distinct || !out.contains(&row) {
                out.push(row);
            }
        }
    }
    out
}

/// Full-width rows per table name, for the SQL evaluator.
pub fn sql_tables(raw: &[RawStore]) -> BTreeMap<String, super::sql::Table> {
    raw.iter().map(|r| (polyfed::planner::table_name(&r.dataset), r.rows())).collect()
}
