use std::collections::{BTreeMap, BTreeSet};

use polyfed::catalog::{
    Binding, CatalogGraph, Link, Member, Node, NodeId, NodeKind, Path, Pattern, PatternTerm, PredicateTerm, Step,
    Term, TriplePattern,
};
use polyfed::registry::{DataStoreDescriptor, DatasetSchemaDef, StoreKind};
use polyfed::provenance::AttributeValueRecord;
use polyfed::value::Scalar;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PREDICATES: [&str; 4] = ["p", "q", "r", "name"];

pub fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.random_range(0..4) {
        0 => Scalar::Int(rng.random_range(-3..4)),
        1 => Scalar::Str((*["a", "b", "x y", "quo\"te", "tab\there", "üñí", "new\nline", ""].choose(rng).unwrap()).into()),
        2 => Scalar::Float(*[0.5, -1.25, 3.0, 1e-7, 12345.678].choose(rng).unwrap()),
        _ => Scalar::Bool(rng.random()),
    }
}

fn node_id(i: usize) -> NodeId {
    let raw = match i % 3 {
        0 => format!("n{i}"),
        1 => format!("hk://id/n{i}"),
        _ => format!("hk://id/space%20{i}/x"),
    };
    NodeId::new(raw).unwrap()
}

/// A random graph with at most `max_links` links, a few contexts (one
/// possibly nested) and random node properties.
pub fn random_catalog(rng: &mut ChaCha8Rng, max_nodes: usize, max_links: usize) -> CatalogGraph {
    let mut g = CatalogGraph::new();
    let contexts: Vec<NodeId> = (0..rng.random_range(0..=2)).map(|i| NodeId::new(format!("ctx{i}")).unwrap()).collect();
    for c in &contexts {
        g.add_node(Node::new(c.clone(), NodeKind::Context), None).unwrap();
    }
    if contexts.len() == 2 && rng.random_bool(0.5) {
        g.add_to_context(&contexts[0], Member::Node(contexts[1].clone())).unwrap();
    }
    let kinds: Vec<NodeKind> = NodeKind::ALL.iter().copied().filter(|k| *k != NodeKind::Context).collect();
    let n = rng.random_range(1..=max_nodes);
    let mut ids = Vec::new();
    for i in 0..n {
        let mut node = Node::new(node_id(i), *kinds.choose(rng).unwrap());
        for _ in 0..rng.random_range(0..3) {
            let key = *["k", "label", "started_at"].choose(rng).unwrap();
            node = node.with_property(key, random_scalar(rng));
        }
        let ctx = if !contexts.is_empty() && rng.random_bool(0.3) { contexts.choose(rng) } else { None };
        ids.push(g.add_node(node, ctx).unwrap());
    }
    let target = rng.random_range(0..=max_links);
    let mut attempts = 0;
    while g.link_count() < target && attempts < target * 3 {
        attempts += 1;
        let s = ids.choose(rng).unwrap().clone();
        let p = *PREDICATES.choose(rng).unwrap();
        let o: Term = if rng.random_bool(0.6) {
            Term::Node(ids.choose(rng).unwrap().clone())
        } else {
            Term::Literal(random_scalar(rng))
        };
        if let Ok(l) = g.add_link(&s, p, o) {
            if !contexts.is_empty() && rng.random_bool(0.2) {
                g.add_to_context(contexts.choose(rng).unwrap(), Member::Link(l)).unwrap();
            }
        }
    }
    g
}

/// Node set, link multiset and context membership with link members
/// replaced by their triples.
#[derive(Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub nodes: BTreeMap<String, (NodeKind, BTreeMap<String, Scalar>)>,
    pub links: Vec<Link>,
    pub contexts: BTreeMap<String, BTreeSet<String>>,
}

pub fn snapshot(g: &CatalogGraph) -> Snapshot {
    let nodes = g
        .nodes()
        .map(|n| (n.id.to_string(), (n.kind, n.properties.clone())))
        .collect();
    let mut links: Vec<Link> = g.links().map(|(_, l)| l.clone()).collect();
    links.sort();
    let contexts = g
        .contexts()
        .filter(|(_, m)| !m.is_empty())
        .map(|(c, members)| {
            let set = members
                .iter()
                .map(|m| match m {
                    Member::Node(n) => format!("node {n}"),
                    Member::Link(l) => {
                        let l = g.link(*l).unwrap();
                        format!("link {} {} {:?}", l.subject, l.predicate, l.object)
                    }
                })
                .collect();
            (c.to_string(), set)
        })
        .collect();
    Snapshot { nodes, links, contexts }
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn random_term(rng: &mut ChaCha8Rng, g: &CatalogGraph, bound: &mut Vec<String>, object: bool) -> PatternTerm {
    let roll = rng.random_range(0..100);
    if roll < 65 || g.node_count() == 0 {
        let v = if !bound.is_empty() && rng.random_bool(0.5) {
            bound.choose(rng).unwrap().clone()
        } else {
            (*VARS.choose(rng).unwrap()).to_owned()
        };
        if !bound.contains(&v) {
            bound.push(v.clone());
        }
        PatternTerm::Var(v)
    } else if roll < 90 || !object {
        let ids: Vec<&Node> = g.nodes().collect();
        PatternTerm::Node(ids.choose(rng).unwrap().id.clone())
    } else {
        PatternTerm::Literal(random_scalar(rng))
    }
}

fn random_step(rng: &mut ChaCha8Rng) -> Step {
    let p = *PREDICATES.choose(rng).unwrap();
    if rng.random_bool(0.3) { Step::inverse(p) } else { Step::forward(p) }
}

/// A connected pattern of 1 to `max_templates` templates: every template
/// after the first reuses a variable bound earlier.
pub fn random_pattern(rng: &mut ChaCha8Rng, g: &CatalogGraph, max_templates: usize) -> Pattern {
    let mut bound: Vec<String> = Vec::new();
    let mut pattern = Pattern::new();
    for i in 0..rng.random_range(1..=max_templates) {
        let mut subject = random_term(rng, g, &mut bound, false);
        let object = random_term(rng, g, &mut bound, true);
        if i > 0 {
            let shares = [&subject, &object].iter().any(|t| matches!(t, PatternTerm::Var(_)));
            if !shares {
                subject = PatternTerm::Var(bound.choose(rng).cloned().unwrap_or_else(|| "a".into()));
            }
        }
        let path = match rng.random_range(0..10) {
            0 => Path::Single { predicate: PredicateTerm::Var(format!("p{i}")), inverse: rng.random_bool(0.3) },
            1 | 2 => Path::Alternation(random_step(rng), random_step(rng)),
            _ => {
                let s = random_step(rng);
                Path::Single { predicate: PredicateTerm::Fixed(s.predicate), inverse: s.inverse }
            }
        };
        pattern = pattern.push(TriplePattern { subject, path, object });
    }
    pattern
}

fn unify(b: &mut Binding, term: &PatternTerm, value: &Term) -> Option<Option<String>> {
    match term {
        PatternTerm::Var(v) => match b.get(v) {
            Some(existing) => (existing == value).then_some(None),
            None => {
                b.insert(v.clone(), value.clone());
                Some(Some(v.clone()))
            }
        },
        PatternTerm::Node(n) => (value.as_node() == Some(n)).then_some(None),
        PatternTerm::Literal(l) => (value.as_literal() == Some(l)).then_some(None),
    }
}

/// Every (subject, predicate, object) edge a template can traverse, with
/// the predicate label.
fn edges(links: &[Link], path: &Path) -> Vec<(Term, String, Term)> {
    let step = |pred: Option<&str>, inverse: bool| {
        links
            .iter()
            .filter(|l| pred.is_none_or(|p| l.predicate == p))
            .map(|l| {
                let s = Term::Node(l.subject.clone());
                if inverse {
                    (l.object.clone(), l.predicate.clone(), s)
                } else {
                    (s, l.predicate.clone(), l.object.clone())
                }
            })
            .collect::<Vec<_>>()
    };
    match path {
        Path::Single { predicate: PredicateTerm::Fixed(p), inverse } => step(Some(p), *inverse),
        Path::Single { predicate: PredicateTerm::Var(_), inverse } => step(None, *inverse),
        Path::Alternation(a, b) => {
            let mut out = step(Some(&a.predicate), a.inverse);
            out.extend(step(Some(&b.predicate), b.inverse));
            out
        }
    }
}

/// Nested-loop evaluation over the full link list. Results are sorted;
/// `distinct` removes duplicate bindings.
pub fn brute_force(g: &CatalogGraph, pattern: &Pattern, distinct: bool) -> Vec<Binding> {
    if pattern.templates.is_empty() {
        return Vec::new();
    }
    let links: Vec<Link> = g.links().map(|(_, l)| l.clone()).collect();
    let all: Vec<Vec<(Term, String, Term)>> = pattern.templates.iter().map(|t| edges(&links, &t.path)).collect();
    let mut out = Vec::new();
    fn go(
        i: usize,
        pattern: &Pattern,
        all: &[Vec<(Term, String, Term)>],
        b: &mut Binding,
        out: &mut Vec<Binding>,
    ) {
        if i == pattern.templates.len() {
            out.push(b.clone());
            return;
        }
        let t = &pattern.templates[i];
        for (s, p, o) in &all[i] {
            let mut added = Vec::new();
            let mut ok = true;
            for (term, value) in [(&t.subject, s.clone()), (&t.object, o.clone())] {
                match unify(b, term, &value) {
                    Some(Some(v)) => added.push(v),
                    Some(None) => {}
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if let Path::Single { predicate: PredicateTerm::Var(v), .. } = &t.path {
                    match unify(b, &PatternTerm::Var(v.clone()), &Term::Literal(Scalar::str(p))) {
                        Some(Some(v)) => added.push(v),
                        Some(None) => {}
                        None => ok = false,
                    }
                }
            }
            if ok {
                go(i + 1, pattern, all, b, out);
            }
            for v in added {
                b.remove(&v);
            }
        }
    }
    go(0, pattern, &all, &mut Binding::new(), &mut out);
    out.sort();
    if distinct {
        out.dedup();
    }
    out
}

/// The catalog traversal for data references, written out predicate by
/// predicate, without the foreign-table alias lines.
pub fn listing_pattern(workflow: &str) -> Pattern {
    let v = |s: &str| PatternTerm::Var(s.into());
    let wf = NodeId::new(format!("hk://id/{workflow}")).unwrap();
    Pattern::new()
        .triple(v("atv"), "wasDerivedFromAttribute", v("att"))
        .triple(v("att"), "name", v("attName"))
        .alternation(v("atv"), Step::forward("wasGeneratedBy"), Step::inverse("used"), v("dte"))
        .triple(v("atv"), "value", v("atvValue"))
        .triple(v("dte"), "wasMemberOfWorkflowExecution", v("wfe"))
        .triple(v("wfe"), "wasDerivedFromWorkflow", PatternTerm::Node(wf))
        .triple(v("att"), "isAttributeOf", v("datasetSchema"))
        .triple(v("datasetSchema"), "name", v("datasetSchemaName"))
        .triple(v("att"), "isStoredInStore", v("dataStore"))
        .triple(v("dataStore"), "name", v("dataStoreName"))
}

pub type ExpectedRow = (String, BTreeMap<String, (String, String, Scalar)>);

/// Expected data references per execution, or the first failure as
/// (kind, store, execution).
pub fn expected_references(
    g: &CatalogGraph,
    workflow: &str,
    stores: &BTreeSet<String>,
) -> Result<Vec<ExpectedRow>, (&'static str, String, String)> {
    let links: BTreeSet<Link> = g.links().map(|(_, l)| l.clone()).collect();
    let has = |s: &Term, p: &str, o: &Term| {
        s.as_node()
            .is_some_and(|s| links.contains(&Link { subject: s.clone(), predicate: p.into(), object: o.clone() }))
    };
    let wf = Term::Node(NodeId::new(format!("hk://id/{workflow}")).unwrap());
    let mut executions: Vec<String> = links
        .iter()
        .filter(|l| l.predicate == "wasDerivedFromWorkflow" && l.object == wf)
        .map(|l| l.subject.to_string())
        .collect();
    executions.sort();
    executions.dedup();

    type Candidates = BTreeMap<String, BTreeMap<String, BTreeSet<((String, String, Scalar), bool)>>>;
    let mut found: Candidates = BTreeMap::new();
    for b in brute_force(g, &listing_pattern(workflow), true) {
        if !has(&b["att"], "isIdentifierOf", &b["datasetSchema"]) {
            continue;
        }
        let text = |k: &str| b[k].as_literal().and_then(Scalar::as_str).unwrap().to_owned();
        let generated = has(&b["atv"], "wasGeneratedBy", &b["dte"]);
        let value = b["atvValue"].as_literal().unwrap().clone();
        found
            .entry(b["wfe"].to_string())
            .or_default()
            .entry(text("dataStoreName"))
            .or_default()
            .insert(((text("datasetSchemaName"), text("attName"), value), generated));
    }
    let mut rows = Vec::new();
    for wfe in executions {
        let mut refs = BTreeMap::new();
        for store in stores {
            let Some(c) = found.get(&wfe).and_then(|m| m.get(store)) else {
                return Err(("missing", store.clone(), wfe));
            };
            let generated: BTreeSet<_> = c.iter().filter(|(_, g)| *g).map(|(r, _)| r).collect();
            let chosen = if generated.is_empty() { c.iter().map(|(r, _)| r).collect() } else { generated };
            if chosen.len() > 1 {
                return Err(("multiple", store.clone(), wfe));
            }
            refs.insert(store.clone(), chosen.into_iter().next().unwrap().clone());
        }
        rows.push((wfe, refs));
    }
    Ok(rows)
}

/// A catalog with random local schemas, two workflows and random captured
/// values. With `tidy`, every execution generates one identifier per store.
pub fn random_provenance(rng: &mut ChaCha8Rng, tidy: bool) -> (CatalogGraph, Vec<String>) {
    let mut g = CatalogGraph::new();
    let mut stores = Vec::new();
    let mut datasets: Vec<(String, String, Vec<String>)> = Vec::new();
    for s in 0..rng.random_range(1..=3) {
        let store = format!("S{s}");
        let kind = *StoreKind::ALL.choose(rng).unwrap();
        let ds: Vec<DatasetSchemaDef> = (0..rng.random_range(1..=2))
            .map(|d| DatasetSchemaDef::new(format!("D{s}{d}"), "id", ["id", "a", "b"]))
            .collect();
        for d in &ds {
            datasets.push((store.clone(), d.name.clone(), vec!["id".into(), "a".into(), "b".into()]));
        }
        let desc = DataStoreDescriptor::single(store.as_str(), kind, format!("m{}", s % 2), "db", "sch", ds);
        g.registry_mut().register_lcs(&desc).unwrap();
        stores.push(store);
    }
    let value = |rng: &mut ChaCha8Rng| -> Scalar {
        if rng.random_bool(0.8) {
            Scalar::Int(rng.random_range(0..4))
        } else {
            Scalar::str(*["u", "v"].choose(rng).unwrap())
        }
    };
    for _ in 0..rng.random_range(0..=5) {
        let workflow = if rng.random_bool(0.8) { "wf" } else { "other" };
        let mut prov = g.provenance_mut();
        let wfe = prov.begin_workflow_execution(workflow).unwrap();
        if tidy {
            for s in &stores {
                let (_, d, _) = datasets.iter().filter(|(st, _, _)| st == s).collect::<Vec<_>>().choose(rng).unwrap().to_owned().clone();
                let rec = AttributeValueRecord::generated(format!("{d}.id"), value(rng)).in_store(s.as_str());
                prov.record_transformation_execution(wfe.as_str(), "load", &[rec]).unwrap();
            }
        }
        for _ in 0..rng.random_range(0..=3) {
            let t = *["t0", "t1", "t2"].choose(rng).unwrap();
            let values: Vec<AttributeValueRecord> = (0..rng.random_range(0..=3))
                .map(|_| {
                    let (s, d, attrs) = datasets.choose(rng).unwrap();
                    let a = if rng.random_bool(0.6) { "id" } else { attrs.choose(rng).unwrap() };
                    let attr = format!("{d}.{a}");
                    let v = value(rng);
                    let r = if rng.random_bool(0.5) {
                        AttributeValueRecord::generated(attr, v)
                    } else {
                        AttributeValueRecord::used(attr, v)
                    };
                    r.in_store(s.as_str())
                })
                .collect();
            prov.record_transformation_execution(wfe.as_str(), t, &values).unwrap();
        }
        if rng.random_bool(0.7) {
            prov.end_workflow_execution(wfe.as_str()).unwrap();
        }
    }
    if !g.provenance().has_workflow("wf") {
        g.provenance_mut().begin_workflow_execution("wf").unwrap();
    }
    (g, stores)
}
