//! Loads the bundled fixture directory and runs the scenario query across
//! the four stores.

use polyfed::mediator::Mediator;
use polyfed::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/netherlands").into());
    let m = Mediator::load_dir(&dir)?;
    let out = m.query(scenario::QUERY)?;
    println!("{}", out.table);
    println!(
        "build {:.3} ms, exec {:.3} ms, {} stores, {} constant rows",
        out.stats.build_ms, out.stats.exec_ms, out.stats.stores_touched, out.stats.constant_table_rows
    );
    Ok(())
}
