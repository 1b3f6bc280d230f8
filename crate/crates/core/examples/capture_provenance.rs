//! Captures one workflow execution and reads back the data references it
//! left for each store.

use std::collections::BTreeSet;

use polyfed::catalog::CatalogGraph;
use polyfed::scenario::{self, SeismicRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = CatalogGraph::new();
    scenario::register_schemas(&mut g)?;
    g.provenance_mut().register_workflow(&scenario::workflow())?;
    let wfe = scenario::capture(&mut g, &SeismicRecord::netherlands())?;

    let exec = g.provenance().execution(wfe.as_str())?;
    for t in &exec.transformation_executions {
        println!("{} -> {}", t.id, t.transformation);
    }
    let stores: BTreeSet<String> = g.provenance().reference_stores(scenario::WORKFLOW);
    for row in g.provenance().data_references_for(scenario::WORKFLOW, &stores)? {
        for (store, r) in &row.references {
            println!("{}  {store}: {}.{} = {}", row.workflow_execution, r.dataset, r.attribute, r.value);
        }
    }
    Ok(())
}
