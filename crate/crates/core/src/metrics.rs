//! Query complexity counts and the batch benchmark.

use std::fmt;
use std::io::{self, Write};
use std::ops::Add;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::CatalogGraph;
use crate::error::{Error, Result};
use crate::federation::Adapters;
use crate::mediator::Mediator;
use crate::planner::FederatedPlan;
use crate::query::GlobalQuery;
use crate::scenario::{self, ScenarioStores, SeismicRecord};

/// Unweighted component counts of a query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub projection: usize,
    pub filter: usize,
    pub join_clause: usize,
    pub from_clause: usize,
    pub total: usize,
}

impl ComplexityReport {
    pub fn new(projection: usize, filter: usize, join_clause: usize, from_clause: usize) -> Self {
        ComplexityReport {
            projection,
            filter,
            join_clause,
            from_clause,
            total: projection + filter + join_clause + from_clause,
        }
    }
}

impl Add for ComplexityReport {
    type Output = ComplexityReport;

    fn add(self, o: Self) -> Self {
        ComplexityReport::new(
            self.projection + o.projection,
            self.filter + o.filter,
            self.join_clause + o.join_clause,
            self.from_clause + o.from_clause,
        )
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "projection {}, filter {}, join {}, from {}, total {}",
            self.projection, self.filter, self.join_clause, self.from_clause, self.total
        )
    }
}

/// The global language has no join clause and a single `from` element.
pub fn complexity_of_global(q: &GlobalQuery) -> ComplexityReport {
    ComplexityReport::new(q.projections.len(), q.filters.len(), 0, 1)
}

/// Counts the federated query. A filter replicated into several stores
/// counts once; the constant table counts as one `from` element.
pub fn complexity_of_plan(p: &FederatedPlan) -> ComplexityReport {
    ComplexityReport::new(
        p.output_columns.len(),
        p.source_filter_count(),
        p.join_spec.len(),
        p.local_queries.len() + 1,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    pub batch_count: usize,
    /// Records written to each store per batch.
    pub rows_per_store: usize,
}

impl BatchSpec {
    pub fn new(batch_count: usize) -> Result<Self> {
        if batch_count == 0 {
            return Err(Error::Usage("batch count must be at least 1".into()));
        }
        Ok(BatchSpec { batch_count, rows_per_store: 1 })
    }
}

const SURVEYS: [&str; 8] = [
    "Netherlands", "Poseidon", "Parihaka", "Kerry", "Penobscot", "Teapot", "Volve", "Waihapa",
];

/// Synthetic scenario data: store contents and one captured execution per
/// batch.
#[derive(Debug, Clone)]
pub struct Batches {
    pub records: Vec<SeismicRecord>,
    pub catalog: CatalogGraph,
    pub stores: ScenarioStores,
}

impl Batches {
    pub fn into_mediator(self) -> Mediator {
        Mediator::new(self.catalog, self.stores.into_adapters())
    }
}

fn record(rng: &mut ChaCha8Rng, seq: usize) -> SeismicRecord {
    let name = *SURVEYS.choose(rng).expect("non-empty");
    let slug = format!("{}_{seq:05}", name.to_lowercase());
    let seq = seq as i64;
    SeismicRecord {
        name: name.into(),
        header_id: 100_000 + seq,
        uri: format!("http://oilandgas/Seismic#{slug}"),
        document_id: 500_000 + seq,
        training_path: format!("/data/{slug}.train"),
        inline: rng.random_range(100..4000),
        crossline: rng.random_range(100..4000),
        well: format!("http://oilandgas/Well#W{}", rng.random_range(1..500)),
        horizon: format!("http://oilandgas/Horizon#H{}", rng.random_range(1..50)),
        epsg: *[23031i64, 23032, 28352, 2193, 32631].choose(rng).expect("non-empty"),
        size: 16 * 1024,
    }
}

/// Generates `spec.batch_count` batches. Each batch writes
/// `rows_per_store` records to every store and captures one execution
/// referencing the first of them.
pub fn generate_batches(spec: BatchSpec, seed: u64) -> Result<Batches> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CatalogGraph::new();
    scenario::register_schemas(&mut g)?;
    g.provenance_mut().register_workflow(&scenario::workflow())?;
    let mut stores = ScenarioStores::new();
    let mut records = Vec::new();
    for b in 0..spec.batch_count {
        for r in 0..spec.rows_per_store.max(1) {
            let rec = record(&mut rng, b * spec.rows_per_store.max(1) + r);
            stores.insert(&rec);
            if r == 0 {
                scenario::capture(&mut g, &rec)?;
            }
            records.push(rec);
        }
    }
    Ok(Batches { records, catalog: g, stores })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingSample {
    pub build_ms: f64,
    pub exec_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingPoint {
    pub batch_count: usize,
    pub result_rows: usize,
    pub samples: Vec<TimingSample>,
    pub median_build_ms: f64,
    pub median_exec_ms: f64,
    pub median_total_ms: f64,
    /// Median build time over median total time.
    pub build_share: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TimingReport {
    pub points: Vec<TimingPoint>,
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl TimingPoint {
    fn from_samples(batch_count: usize, result_rows: usize, samples: Vec<TimingSample>) -> Self {
        let pick = |f: fn(&TimingSample) -> f64| median(&samples.iter().map(f).collect::<Vec<_>>());
        let median_build_ms = pick(|s| s.build_ms);
        let median_exec_ms = pick(|s| s.exec_ms);
        let median_total_ms = pick(|s| s.total_ms);
        TimingPoint {
            batch_count,
            result_rows,
            median_build_ms,
            median_exec_ms,
            median_total_ms,
            build_share: if median_total_ms > 0.0 { median_build_ms / median_total_ms } else { 0.0 },
            samples,
        }
    }
}

impl TimingReport {
    /// One `batch_count, median_build_ms, median_exec_ms, median_total_ms,
    /// build_share` record per point.
    pub fn write_lines<W: Write>(&self, mut out: W) -> io::Result<()> {
        for p in &self.points {
            writeln!(
                out,
                "{}, {:.4}, {:.4}, {:.4}, {:.4}",
                p.batch_count, p.median_build_ms, p.median_exec_ms, p.median_total_ms, p.build_share
            )?;
        }
        Ok(())
    }

    /// Whitespace-separated columns with a `#` header, for gnuplot.
    pub fn write_data_file<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# batch_count median_build_ms median_exec_ms median_total_ms build_share")?;
        for p in &self.points {
            writeln!(
                out,
                "{} {:.6} {:.6} {:.6} {:.6}",
                p.batch_count, p.median_build_ms, p.median_exec_ms, p.median_total_ms, p.build_share
            )?;
        }
        Ok(())
    }

    pub fn lines(&self) -> String {
        let mut buf = Vec::new();
        self.write_lines(&mut buf).expect("writing to a vector");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn exec_medians_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].median_exec_ms <= w[1].median_exec_ms)
    }

    /// Largest over smallest median build time.
    pub fn build_spread(&self) -> f64 {
        let v: Vec<f64> = self.points.iter().map(|p| p.median_build_ms).collect();
        let max = v.iter().copied().fold(f64::MIN, f64::max);
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        if v.is_empty() || min <= 0.0 {
            return f64::NAN;
        }
        max / min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub batch_counts: Vec<usize>,
    pub runs: usize,
    pub warmup: usize,
    /// Pause between queries.
    pub sleep: Option<Duration>,
    pub seed: u64,
    /// Query text; the scenario query when `None`.
    pub query: Option<String>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            batch_counts: vec![1, 10, 50, 100],
            runs: 50,
            warmup: 3,
            sleep: None,
            seed: 7,
            query: None,
        }
    }
}

/// For each batch count: purge previous executions and store contents,
/// load fresh batches, then time `runs` queries split into build and
/// execution.
pub fn run_benchmark(config: &BenchConfig) -> Result<TimingReport> {
    if config.runs == 0 {
        return Err(Error::Usage("runs must be at least 1".into()));
    }
    let text = config.query.as_deref().unwrap_or(scenario::QUERY);
    let mut mediator = generate_batches(BatchSpec::new(1)?, config.seed)?.into_mediator();
    let mut report = TimingReport::default();
    for &count in &config.batch_counts {
        let spec = BatchSpec::new(count)?;
        mediator.catalog_mut().provenance_mut().purge_executions(scenario::WORKFLOW)?;
        *mediator.adapters_mut() = Adapters::new();
        let batches = generate_batches(spec, config.seed)?;
        for r in batches.records.iter().step_by(spec.rows_per_store.max(1)) {
            scenario::capture(mediator.catalog_mut(), r)?;
        }
        *mediator.adapters_mut() = batches.stores.into_adapters();

        let mut result_rows = 0;
        for _ in 0..config.warmup {
            mediator.query(text)?;
        }
        let mut samples = Vec::with_capacity(config.runs);
        for _ in 0..config.runs {
            let start = Instant::now();
            let prepared = mediator.prepare(text)?;
            let built = start.elapsed();
            let out = mediator.execute(prepared)?;
            let total = start.elapsed();
            result_rows = out.table.len();
            let build_ms = built.as_secs_f64() * 1000.0;
            let total_ms = total.as_secs_f64() * 1000.0;
            samples.push(TimingSample { build_ms, exec_ms: total_ms - build_ms, total_ms });
            if let Some(d) = config.sleep {
                std::thread::sleep(d);
            }
        }
        tracing::debug!(batch_count = count, result_rows, "benchmark point done");
        report.points.push(TimingPoint::from_samples(count, result_rows, samples));
    }
    Ok(report)
}
