//! Plans the Netherlands query and prints the equivalent SQL, with and
//! without pruning of stores that contribute no column or filter.

use polyfed::planner::{plan, render_sql, PlanOptions};
use polyfed::query::parse;
use polyfed::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (catalog, _) = scenario::netherlands();
    let q = parse(scenario::QUERY)?;
    for prune in [true, false] {
        let p = plan(&q, &catalog, PlanOptions { prune })?;
        println!("-- prune = {prune}: {} local queries", p.local_queries.len());
        println!("{}", render_sql(&p));
    }
    Ok(())
}
