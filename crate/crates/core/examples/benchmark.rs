//! Runs the batch benchmark and prints the median build/execution split per
//! batch count, followed by the plot data file.

use polyfed::metrics::{run_benchmark, BenchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let config = BenchConfig { runs, ..BenchConfig::default() };
    let report = run_benchmark(&config)?;
    println!("batch_count, median_build_ms, median_exec_ms, median_total_ms, build_share");
    print!("{}", report.lines());
    println!("build spread {:.2}x, exec non-decreasing: {}", report.build_spread(), report.exec_medians_non_decreasing());
    println!();
    report.write_data_file(std::io::stdout())?;
    Ok(())
}
