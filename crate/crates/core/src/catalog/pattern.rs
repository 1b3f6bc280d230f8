//! Conjunctive triple-pattern matching over the catalog.
//!
//! A [`Pattern`] is an ordered list of triple templates; any position may be
//! a variable. Each template walks a [`Path`]: a single predicate in forward
//! or inverse direction, or a two-way alternation of such steps (the
//! `wasGeneratedBy|^used` shape used to reach attribute values from either
//! side of a transformation execution).

use std::collections::{BTreeMap, BTreeSet};

use super::{CatalogGraph, LinkId, NodeId, Term};
use crate::value::Scalar;

pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Var(String),
    Node(NodeId),
    Literal(Scalar),
}

impl PatternTerm {
    pub fn var(name: impl Into<String>) -> Self {
        PatternTerm::Var(name.into())
    }

    pub fn node(id: &NodeId) -> Self {
        PatternTerm::Node(id.clone())
    }

    pub fn literal(v: impl Into<Scalar>) -> Self {
        PatternTerm::Literal(v.into())
    }
}

/// Predicate position. Variables here bind to the predicate label as a
/// string literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateTerm {
    Fixed(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub predicate: String,
    pub inverse: bool,
}

impl Step {
    pub fn forward(predicate: impl Into<String>) -> Self {
        Step {
            predicate: predicate.into(),
            inverse: false,
        }
    }

    pub fn inverse(predicate: impl Into<String>) -> Self {
        Step {
            predicate: predicate.into(),
            inverse: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Path {
    Single { predicate: PredicateTerm, inverse: bool },
    Alternation(Step, Step),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub path: Path,
    pub object: PatternTerm,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pattern {
    pub templates: Vec<TriplePattern>,
}

impl Pattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, t: TriplePattern) -> Self {
        self.templates.push(t);
        self
    }

    pub fn triple(self, subject: PatternTerm, predicate: &str, object: PatternTerm) -> Self {
        self.push(TriplePattern {
            subject,
            path: Path::Single {
                predicate: PredicateTerm::Fixed(predicate.to_owned()),
                inverse: false,
            },
            object,
        })
    }

    pub fn inverse(self, subject: PatternTerm, predicate: &str, object: PatternTerm) -> Self {
        self.push(TriplePattern {
            subject,
            path: Path::Single {
                predicate: PredicateTerm::Fixed(predicate.to_owned()),
                inverse: true,
            },
            object,
        })
    }

    pub fn alternation(self, subject: PatternTerm, a: Step, b: Step, object: PatternTerm) -> Self {
        self.push(TriplePattern {
            subject,
            path: Path::Alternation(a, b),
            object,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for t in &self.templates {
            for term in [&t.subject, &t.object] {
                if let PatternTerm::Var(v) = term {
                    out.insert(v.as_str());
                }
            }
            if let Path::Single {
                predicate: PredicateTerm::Var(v),
                ..
            } = &t.path
            {
                out.insert(v.as_str());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatchOptions {
    pub distinct: bool,
    pub order_by: Vec<String>,
    /// Restrict candidate links to members of this context (nested contexts included).
    pub context: Option<NodeId>,
}

#[derive(Debug, Clone, Copy)]
enum Pos<'p> {
    Slot(usize),
    Node(&'p NodeId),
    Literal(&'p Scalar),
}

#[derive(Debug, Clone, Copy)]
enum PredPos<'p> {
    Slot(usize),
    Fixed(&'p str),
}

#[derive(Debug)]
struct Compiled<'p> {
    subject: Pos<'p>,
    object: Pos<'p>,
    steps: Vec<(PredPos<'p>, bool)>,
}

struct Matcher<'g, 'p> {
    graph: &'g CatalogGraph,
    templates: Vec<Compiled<'p>>,
    slots: Vec<Option<Term>>,
    allowed: Option<BTreeSet<LinkId>>,
    out: Vec<Vec<Term>>,
}

impl CatalogGraph {
    /// Evaluates a conjunctive pattern. Results are sorted by `order_by`
    /// variables first and then lexicographically by all bound values; an
    /// empty pattern matches nothing.
    pub fn match_pattern(&self, pattern: &Pattern, distinct: bool, order_by: Option<&[&str]>) -> Vec<Binding> {
        let opts = MatchOptions {
            distinct,
            order_by: order_by
                .unwrap_or_default()
                .iter()
                .map(|s| (*s).to_owned())
                .collect(),
            context: None,
        };
        self.match_with(pattern, &opts)
    }

    pub fn match_with(&self, pattern: &Pattern, opts: &MatchOptions) -> Vec<Binding> {
        if pattern.is_empty() {
            return Vec::new();
        }
        let vars: Vec<&str> = pattern.variables().into_iter().collect();
        let slot = |name: &str| vars.binary_search(&name).expect("collected above");
        let compiled: Vec<Compiled<'_>> = pattern
            .templates
            .iter()
            .map(|t| {
                fn pos<'a>(term: &'a PatternTerm, slot: &impl Fn(&str) -> usize) -> Pos<'a> {
                    match term {
                        PatternTerm::Var(v) => Pos::Slot(slot(v)),
                        PatternTerm::Node(n) => Pos::Node(n),
                        PatternTerm::Literal(l) => Pos::Literal(l),
                    }
                }
                let steps = match &t.path {
                    Path::Single { predicate, inverse } => {
                        let p = match predicate {
                            PredicateTerm::Fixed(p) => PredPos::Fixed(p.as_str()),
                            PredicateTerm::Var(v) => PredPos::Slot(slot(v)),
                        };
                        vec![(p, *inverse)]
                    }
                    Path::Alternation(a, b) => vec![
                        (PredPos::Fixed(a.predicate.as_str()), a.inverse),
                        (PredPos::Fixed(b.predicate.as_str()), b.inverse),
                    ],
                };
                Compiled {
                    subject: pos(&t.subject, &slot),
                    object: pos(&t.object, &slot),
                    steps,
                }
            })
            .collect();

        let mut matcher = Matcher {
            graph: self,
            templates: order_templates(compiled),
            slots: vec![None; vars.len()],
            allowed: opts.context.as_ref().map(|c| self.links_in_context(c.as_str())),
            out: Vec::new(),
        };
        matcher.solve(0);

        let order_slots: Vec<usize> = opts
            .order_by
            .iter()
            .filter_map(|v| vars.binary_search(&v.as_str()).ok())
            .collect();
        let mut rows = matcher.out;
        rows.sort_by(|a, b| {
            order_slots
                .iter()
                .map(|&i| a[i].cmp(&b[i]))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.cmp(b))
        });
        if opts.distinct {
            rows.dedup();
        }
        rows.into_iter()
            .map(|row| vars.iter().map(|v| (*v).to_owned()).zip(row).collect())
            .collect()
    }
}

/// Greedy static join order: repeatedly pick the template with the most
/// positions already fixed by constants or earlier templates.
fn order_templates(mut pending: Vec<Compiled<'_>>) -> Vec<Compiled<'_>> {
    let mut bound: BTreeSet<usize> = BTreeSet::new();
    let mut ordered = Vec::with_capacity(pending.len());
    let is_bound = |p: &Pos<'_>, bound: &BTreeSet<usize>| match p {
        Pos::Slot(s) => bound.contains(s),
        _ => true,
    };
    while !pending.is_empty() {
        let score = |t: &Compiled<'_>| {
            let pred_bound = t.steps.iter().all(|(p, _)| match p {
                PredPos::Slot(s) => bound.contains(s),
                PredPos::Fixed(_) => true,
            });
            2 * usize::from(is_bound(&t.subject, &bound))
                + 2 * usize::from(is_bound(&t.object, &bound))
                + usize::from(pred_bound)
        };
        let best = (0..pending.len())
            .max_by_key(|&i| (score(&pending[i]), std::cmp::Reverse(i)))
            .expect("non-empty");
        let t = pending.remove(best);
        for p in [&t.subject, &t.object] {
            if let Pos::Slot(s) = p {
                bound.insert(*s);
            }
        }
        for (p, _) in &t.steps {
            if let PredPos::Slot(s) = p {
                bound.insert(*s);
            }
        }
        ordered.push(t);
    }
    ordered
}

impl<'g, 'p> Matcher<'g, 'p> {
    fn solve(&mut self, depth: usize) {
        if depth == self.templates.len() {
            let row = self
                .slots
                .iter()
                .map(|s| s.clone().expect("every variable is bound by some template"))
                .collect();
            self.out.push(row);
            return;
        }
        let graph = self.graph;
        for step in 0..self.templates[depth].steps.len() {
            let (pred, inverse) = self.templates[depth].steps[step];
            let (link_subject, link_object) = {
                let t = &self.templates[depth];
                if inverse {
                    (t.object, t.subject)
                } else {
                    (t.subject, t.object)
                }
            };
            let subject_val = self.resolve(link_subject);
            let object_val = self.resolve(link_object);
            let pred_val: Option<String> = match pred {
                PredPos::Fixed(p) => Some(p.to_owned()),
                PredPos::Slot(s) => match &self.slots[s] {
                    Some(Term::Literal(Scalar::Str(p))) => Some(p.clone()),
                    Some(_) => continue,
                    None => None,
                },
            };
            let subject_node = match &subject_val {
                Some(Term::Node(n)) => Some(n.clone()),
                Some(Term::Literal(_)) => continue,
                None => None,
            };
            let candidates = candidate_links(graph, subject_node.as_ref(), pred_val.as_deref(), object_val.as_ref());
            for id in candidates {
                if let Some(allowed) = &self.allowed {
                    if !allowed.contains(&id) {
                        continue;
                    }
                }
                let link = graph.link_unchecked(id);
                let mut newly = Vec::new();
                let ok = self.unify(link_subject, Term::Node(link.subject.clone()), &mut newly)
                    && self.unify_pred(pred, &link.predicate, &mut newly)
                    && self.unify(link_object, link.object.clone(), &mut newly);
                if ok {
                    self.solve(depth + 1);
                }
                for s in newly {
                    self.slots[s] = None;
                }
            }
        }
    }

    fn resolve(&self, pos: Pos<'_>) -> Option<Term> {
        match pos {
            Pos::Slot(s) => self.slots[s].clone(),
            Pos::Node(n) => Some(Term::Node(n.clone())),
            Pos::Literal(l) => Some(Term::Literal(l.clone())),
        }
    }

    fn unify(&mut self, pos: Pos<'_>, value: Term, newly: &mut Vec<usize>) -> bool {
        match pos {
            Pos::Slot(s) => match &self.slots[s] {
                Some(v) => *v == value,
                None => {
                    self.slots[s] = Some(value);
                    newly.push(s);
                    true
                }
            },
            Pos::Node(n) => matches!(value, Term::Node(ref v) if v == n),
            Pos::Literal(l) => matches!(value, Term::Literal(ref v) if v == l),
        }
    }

    fn unify_pred(&mut self, pred: PredPos<'_>, label: &str, newly: &mut Vec<usize>) -> bool {
        match pred {
            PredPos::Fixed(p) => p == label,
            PredPos::Slot(s) => self.unify(Pos::Slot(s), Term::Literal(Scalar::str(label)), newly),
        }
    }
}

fn candidate_links(
    graph: &CatalogGraph,
    subject: Option<&NodeId>,
    predicate: Option<&str>,
    object: Option<&Term>,
) -> Vec<LinkId> {
    let object_node = object.and_then(Term::as_node);
    match (subject, predicate, object) {
        (Some(s), Some(p), _) => {
            let out = graph.outgoing_ids(s.as_str(), p);
            match object_node {
                Some(o) => {
                    let inc = graph.incoming_ids(o.as_str(), p);
                    if inc.len() < out.len() {
                        return inc.iter().copied().collect();
                    }
                    out.iter().copied().collect()
                }
                None => out.iter().copied().collect(),
            }
        }
        (None, Some(p), Some(Term::Node(o))) => graph.incoming_ids(o.as_str(), p).iter().copied().collect(),
        (Some(s), None, _) => graph.outgoing_all(s.as_str()).collect(),
        (None, None, Some(Term::Node(o))) => graph.incoming_all(o.as_str()).collect(),
        (None, p, Some(Term::Literal(v))) => graph
            .literal_ids(v)
            .iter()
            .copied()
            .filter(|id| p.is_none_or(|p| graph.link_unchecked(*id).predicate == p))
            .collect(),
        (None, Some(p), None) => graph.predicate_ids(p).iter().copied().collect(),
        (None, None, None) => graph.links().map(|(id, _)| id).collect(),
    }
}
