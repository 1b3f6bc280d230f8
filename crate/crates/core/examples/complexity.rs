//! Counts query components of the global query and of the federated plans
//! it expands to.

use polyfed::metrics::{complexity_of_global, complexity_of_plan};
use polyfed::planner::{plan, PlanOptions};
use polyfed::query::parse;
use polyfed::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (catalog, _) = scenario::netherlands();
    let q = parse(scenario::QUERY)?;
    println!("global query:   {}", complexity_of_global(&q));
    for prune in [true, false] {
        let p = plan(&q, &catalog, PlanOptions { prune })?;
        println!("plan (prune={prune}): {}", complexity_of_plan(&p));
    }
    Ok(())
}
