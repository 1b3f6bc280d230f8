//! Registers a global entity, one local store and an alias, then resolves
//! the global attribute back to the local one.

use polyfed::catalog::CatalogGraph;
use polyfed::registry::{AliasMapping, DataStoreDescriptor, DatasetSchemaDef, StoreKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = CatalogGraph::new();
    let mut reg = g.registry_mut();
    reg.register_gcs(&[DatasetSchemaDef::new("Well", "URI", ["URI", "depth"])])?;
    reg.register_lcs(&DataStoreDescriptor::single(
        "WellsDB",
        StoreKind::RelationalDB,
        "db-host",
        "wells",
        "public",
        vec![DatasetSchemaDef::new("WellHeader", "id", ["id", "total_depth"])],
    ))?;
    reg.create_alias(&AliasMapping::new("Well.depth", "WellHeader.total_depth", "WellsDB"))?;
    if let Err(e) = reg.create_alias(&AliasMapping::new("Well.depth", "WellHeader.total_depth", "WellsDB")) {
        println!("second registration rejected: {e}");
    }
    for r in g.registry().resolve_attribute("Well.depth")? {
        println!("Well.depth -> {r:?}");
    }
    println!("{} nodes, {} links", g.node_count(), g.link_count());
    Ok(())
}
