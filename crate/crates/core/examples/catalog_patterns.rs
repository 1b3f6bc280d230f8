//! Builds a small catalog by hand and matches a two-step pattern, one of
//! them an alternation over a forward and an inverse predicate.

use polyfed::catalog::{CatalogGraph, Node, NodeId, NodeKind, Pattern, PatternTerm, Step, Term};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = CatalogGraph::new();
    let id = |s: &str| NodeId::new(s);
    let dte = g.add_node(Node::new(id("hk://id/dte/1")?, NodeKind::DataTransformationExecution), None)?;
    let out = g.add_node(Node::new(id("hk://id/atv/out")?, NodeKind::AttributeValue).with_property("value", 7), None)?;
    let input = g.add_node(Node::new(id("hk://id/atv/in")?, NodeKind::AttributeValue).with_property("value", 3), None)?;
    g.add_link(&out, "wasGeneratedBy", Term::Node(dte.clone()))?;
    g.add_link(&dte, "used", Term::Node(input.clone()))?;
    g.add_link(&out, "value", Term::Literal(7.into()))?;
    g.add_link(&input, "value", Term::Literal(3.into()))?;

    let v = PatternTerm::var;
    let p = Pattern::new()
        .alternation(v("atv"), Step::forward("wasGeneratedBy"), Step::inverse("used"), v("dte"))
        .triple(v("atv"), "value", v("value"));
    for b in g.match_pattern(&p, true, Some(&["value"])) {
        println!("{} touched by {} with value {}", b["atv"], b["dte"], b["value"]);
    }
    Ok(())
}
