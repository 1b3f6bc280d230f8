//! Command-line front end. [`run`] takes its streams as arguments so it
//! can be driven from tests.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::mediator::Mediator;
use crate::metrics::{self, BenchConfig};
use crate::planner::PlanOptions;
use crate::service::{self, ServiceConfig};

pub const CATALOG_ENV: &str = "POLYFED_CATALOG";
pub const DEFAULT_CATALOG: &str = "polyfed.catalog";

#[derive(Debug, Parser)]
#[command(name = "polyfed", version, about = "Provenance-linked polystore mediator")]
pub struct Cli {
    /// Persisted catalog file.
    #[arg(long, global = true, env = CATALOG_ENV, default_value = DEFAULT_CATALOG)]
    pub catalog: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a fixture directory and save the catalog.
    Load {
        dir: PathBuf,
        /// Add to the existing catalog instead of replacing it.
        #[arg(long)]
        append: bool,
    },
    /// Run one query, read from the argument or stdin.
    Query {
        text: Option<String>,
        /// Print the federated SQL instead of executing.
        #[arg(short = 'e', long)]
        explain: bool,
        /// Keep stores that contribute neither columns nor filters.
        #[arg(long)]
        no_prune: bool,
        /// Print complexity counts of the query and its plan.
        #[arg(long)]
        complexity: bool,
    },
    /// Interactive shell. Statements end with `;` or a blank line.
    Shell,
    /// Time the scenario query over growing batch counts.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1,10,50,100")]
        batches: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Pause between queries, in milliseconds.
        #[arg(long)]
        sleep_ms: Option<u64>,
        /// Also write a plot data file.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Serve the HTTP interface.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Fixture directory ingested at startup.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value = "info")]
        log: String,
    },
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

fn write_err(e: std::io::Error) -> Error {
    Error::Io { path: "<output>".into(), message: e.to_string() }
}

/// Parses arguments and runs the command, returning the exit status.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(io.stdout, "{text}") } else { write!(io.stderr, "{text}") };
            return code;
        }
    };
    match execute(cli, io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn open(cli: &Cli) -> Result<Mediator> {
    if !cli.catalog.exists() {
        return Err(Error::Usage(format!(
            "no catalog at {}; run `polyfed load <dir>` first",
            cli.catalog.display()
        )));
    }
    Mediator::open(&cli.catalog)
}

fn read_text(text: Option<String>, io: &mut Io<'_>) -> Result<String> {
    match text {
        Some(t) if t != "-" => Ok(t),
        _ => {
            let mut s = String::new();
            io.stdin.read_to_string(&mut s).map_err(|e| Error::Io { path: "<stdin>".into(), message: e.to_string() })?;
            Ok(s)
        }
    }
}

pub fn execute(cli: Cli, io: &mut Io<'_>) -> Result<()> {
    match cli.command {
        Command::Load { ref dir, append } => {
            let mut m = if append && cli.catalog.exists() { Mediator::open(&cli.catalog)? } else { Mediator::default() };
            let summary = m.ingest_dir(dir)?;
            m.save(&cli.catalog)?;
            writeln!(
                io.stdout,
                "loaded {} entities, {} stores, {} aliases, {} workflows, {} executions into {}",
                summary.entities,
                summary.stores.len(),
                summary.aliases,
                summary.workflows,
                summary.executions.len(),
                cli.catalog.display()
            )
            .map_err(write_err)
        }
        Command::Query { ref text, explain, no_prune, complexity } => {
            let m = open(&cli)?.with_plan_options(PlanOptions { prune: !no_prune });
            let text = read_text(text.clone(), io)?;
            let prepared = m.prepare(&text)?;
            if complexity {
                writeln!(io.stdout, "-- query: {}", metrics::complexity_of_global(&prepared.query)).map_err(write_err)?;
                writeln!(io.stdout, "-- plan:  {}", metrics::complexity_of_plan(&prepared.plan)).map_err(write_err)?;
            }
            if explain {
                return write!(io.stdout, "{}", prepared.sql).map_err(write_err);
            }
            let out = m.execute(prepared)?;
            writeln!(io.stdout, "{}", out.table).map_err(write_err)
        }
        Command::Shell => {
            let m = open(&cli)?;
            shell(&m, io)
        }
        Command::Bench { batches, runs, warmup, seed, sleep_ms, ref data, ref json } => {
            let config = BenchConfig {
                batch_counts: batches,
                runs,
                warmup,
                seed,
                sleep: sleep_ms.map(Duration::from_millis),
                query: None,
            };
            let report = metrics::run_benchmark(&config)?;
            report.write_lines(&mut *io.stdout).map_err(write_err)?;
            if let Some(path) = data {
                let mut buf = Vec::new();
                report.write_data_file(&mut buf).map_err(write_err)?;
                fs::write(path, buf).map_err(|e| Error::io(path, e))?;
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).map_err(|e| Error::format(path, e))?;
                fs::write(path, text).map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        }
        Command::Serve { listen, ref fixtures, ref log } => {
            init_logging(log);
            let config = ServiceConfig {
                listen,
                catalog_path: Some(cli.catalog.clone()),
                fixtures: fixtures.clone(),
                log_filter: log.clone(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io { path: "runtime".into(), message: e.to_string() })?;
            rt.block_on(service::serve(config))
        }
    }
}

/// Installs a stderr subscriber; `RUST_LOG` wins over `filter`.
pub fn init_logging(filter: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(filter));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

/// Reads statements until end of input or `\q`. Errors are reported and
/// the shell carries on.
pub fn shell(m: &Mediator, io: &mut Io<'_>) -> Result<()> {
    let mut pending = String::new();
    let mut line = String::new();
    loop {
        let prompt = if pending.is_empty() { "polyfed> " } else { "    ...> " };
        write!(io.stdout, "{prompt}").map_err(write_err)?;
        io.stdout.flush().map_err(write_err)?;
        line.clear();
        let n = io.stdin.read_line(&mut line).map_err(|e| Error::Io { path: "<stdin>".into(), message: e.to_string() })?;
        let trimmed = line.trim();
        if pending.is_empty() && matches!(trimmed, "\\q" | "quit" | "exit") {
            break;
        }
        let eof = n == 0;
        let complete = eof || trimmed.is_empty() || trimmed.ends_with(';');
        pending.push_str(trimmed.strip_suffix(';').unwrap_or(trimmed));
        pending.push('\n');
        if complete && !pending.trim().is_empty() {
            let stmt = std::mem::take(&mut pending);
            statement(m, stmt.trim(), io)?;
        } else if complete {
            pending.clear();
        }
        if eof {
            writeln!(io.stdout).map_err(write_err)?;
            break;
        }
    }
    Ok(())
}

fn statement(m: &Mediator, stmt: &str, io: &mut Io<'_>) -> Result<()> {
    let (explain, text) = match stmt.split_once(char::is_whitespace) {
        Some((head, rest)) if head.eq_ignore_ascii_case("explain") => (true, rest),
        _ => (false, stmt),
    };
    let result = m.prepare(text).and_then(|p| {
        if explain {
            Ok(p.sql)
        } else {
            let out = m.execute(p)?;
            Ok(format!(
                "{}\n-- build {:.3} ms, exec {:.3} ms\n",
                out.table, out.stats.build_ms, out.stats.exec_ms
            ))
        }
    });
    match result {
        Ok(s) => write!(io.stdout, "{s}").map_err(write_err),
        Err(e) => writeln!(io.stdout, "error: {e}").map_err(write_err),
    }
}
