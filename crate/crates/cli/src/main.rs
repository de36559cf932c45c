//! `geoden`: validate report files, run queries to JSON or CSV, and serve
//! the HTTP API.
//!
//! Exit codes: 0 success, 1 rows rejected by `validate`, 2 bad flags or
//! fatal input errors.

mod flatten;

use std::fs::File;
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geoden_core::analytics::GlyphSizes;
use geoden_core::grid::load_suitability_grid;
use geoden_core::ingest::{parse_reports, IngestDiagnostics};
use geoden_core::query::{
    execute, resolve_query, CombinationSpec, QueryError, QueryKind, QueryRequest, RegionSpec,
    WindowSpec,
};
use geoden_core::{load_data_dir, DatasetSpan, Gazetteer, RegionSet, Source};
use geoden_service::{router, AppState, RegionStore};

#[derive(Parser)]
#[command(
    name = "geoden",
    version,
    about = "Explore dengue serotype reports across regions and years"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check report CSVs (and optionally a suitability grid) and summarize problems.
    Validate(ValidateArgs),
    /// Run one query against a data directory.
    Query(QueryArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Core reports CSV.
    #[arg(long)]
    reports: PathBuf,
    /// Supplementary reports CSV.
    #[arg(long)]
    supplement: Option<PathBuf>,
    /// ESRI ASCII suitability grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Selectable year span, `A:B`.
    #[arg(long, value_parser = parse_span)]
    span: Option<DatasetSpan>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Reports,
    Centroids,
    Trajectories,
    Cooccurrence,
    Timeline,
}

impl From<Kind> for QueryKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Reports => QueryKind::Reports,
            Kind::Centroids => QueryKind::Centroids,
            Kind::Trajectories => QueryKind::Trajectories,
            Kind::Cooccurrence => QueryKind::Cooccurrence,
            Kind::Timeline => QueryKind::Timeline,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct QueryArgs {
    kind: Kind,
    #[arg(long, env = "GEODEN_DATA_DIR")]
    data_dir: PathBuf,
    /// Window as `A:B` (current year B, interval B-A+1) or a single year.
    #[arg(long, conflicts_with = "year")]
    years: Option<String>,
    /// Current year; combine with --interval.
    #[arg(long)]
    year: Option<i64>,
    /// Interval length in years ending at --year; defaults to the whole span.
    #[arg(long, requires = "year")]
    interval: Option<i64>,
    /// Comma-separated region, subcontinent, continent or country names, or
    /// `@file` holding a JSON region list.
    #[arg(long)]
    regions: Option<String>,
    /// Stored region definitions usable by name in --regions.
    #[arg(long)]
    regions_file: Option<PathBuf>,
    /// Comma-separated serotypes, e.g. `d1,d2`; empty for none.
    #[arg(long)]
    serotypes: Option<String>,
    /// `all`, or comma-separated combinations with `+` inside one, e.g. `d1+d2,d3`.
    #[arg(long)]
    combos: Option<String>,
    /// `all` or `per_serotype`.
    #[arg(long)]
    centroid_mode: Option<String>,
    /// `all`, `per_serotype` or one serotype.
    #[arg(long)]
    trajectory_serotype: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "GEODEN_DATA_DIR")]
    data_dir: PathBuf,
    /// Directory of web assets served at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// JSON file persisting custom regions; in memory otherwise.
    #[arg(long)]
    regions_file: Option<PathBuf>,
}

/// A failure that ends the command with exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => validate(args),
        Command::Query(args) => query(args).map(|()| ExitCode::SUCCESS),
        Command::Serve(args) => serve(args).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|Fatal(message)| {
        eprintln!("error: {message}");
        ExitCode::from(2)
    })
}

fn parse_span(raw: &str) -> Result<DatasetSpan, String> {
    let (a, b) = raw.split_once(':').ok_or("expected A:B")?;
    let a = a.trim().parse().map_err(|_| format!("bad year {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad year {b:?}"))?;
    DatasetSpan::new(a, b).map_err(|e| e.to_string())
}

fn validate(args: ValidateArgs) -> Result<ExitCode, Fatal> {
    let gazetteer = Gazetteer::bundled();
    let span = args.span.unwrap_or_default();
    let mut total = IngestDiagnostics::default();
    let mut next_id = 0;
    let inputs = [
        (Some(args.reports), Source::Core),
        (args.supplement, Source::Supplement),
    ];
    for (path, source) in inputs {
        let Some(path) = path else { continue };
        let file = File::open(&path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
        let parsed = parse_reports(BufReader::new(file), source, gazetteer, span, next_id)
            .map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
        next_id += parsed.reports.len() as u32;
        let d = &parsed.diagnostics;
        println!(
            "{}: accepted {}, rejected {}, warnings {}",
            path.display(),
            d.accepted,
            d.rejected.len(),
            d.warnings.len()
        );
        for issue in &d.rejected {
            println!(
                "  reject {}:{}: {}",
                path.display(),
                issue.row,
                issue.message
            );
        }
        for issue in &d.warnings {
            println!(
                "  warning {}:{}: {}",
                path.display(),
                issue.row,
                issue.message
            );
        }
        total.merge(parsed.diagnostics);
    }
    if let Some(path) = args.grid {
        let file = File::open(&path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
        let load = load_suitability_grid(BufReader::new(file))
            .map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
        println!(
            "{}: {} x {} cells of {} degrees",
            path.display(),
            load.grid.nrows(),
            load.grid.ncols(),
            load.grid.cellsize()
        );
        for w in &load.warnings {
            println!("  warning {}: {w}", path.display());
        }
    }
    println!(
        "accepted {}, rejected {}",
        total.accepted,
        total.rejected.len()
    );
    Ok(if total.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Translates flags into the request body the API would receive.
fn build_request(args: &QueryArgs) -> Result<QueryRequest, Fatal> {
    let window = match (&args.years, args.year) {
        (Some(raw), _) => {
            let parse = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| Fatal(format!("--years: expected A:B or a year, got {raw:?}")))
            };
            Some(match raw.split_once(':') {
                Some((a, b)) => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    WindowSpec {
                        current_year: b,
                        interval_length: b - a + 1,
                    }
                }
                None => WindowSpec {
                    current_year: parse(raw)?,
                    interval_length: 1,
                },
            })
        }
        (None, Some(year)) => Some(WindowSpec {
            current_year: year,
            interval_length: args.interval.unwrap_or(i64::from(u16::MAX)),
        }),
        (None, None) => None,
    };
    let regions = match args.regions.as_deref() {
        None => None,
        Some(raw) => match raw.strip_prefix('@') {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Fatal(format!("--regions: {path}: {e}")))?;
                let specs: Vec<RegionSpec> = serde_json::from_str(&text)
                    .map_err(|e| Fatal(format!("--regions: {path}: {e}")))?;
                Some(specs)
            }
            None => Some(
                split_list(raw)
                    .into_iter()
                    .map(RegionSpec::Preset)
                    .collect(),
            ),
        },
    };
    let combinations = args.combos.as_deref().map(|raw| {
        if raw.trim().eq_ignore_ascii_case("all") {
            CombinationSpec::Keyword("all".to_string())
        } else {
            CombinationSpec::List(
                raw.split(',')
                    .map(|combo| {
                        combo
                            .split('+')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(str::to_string)
                            .collect()
                    })
                    .collect(),
            )
        }
    });
    Ok(QueryRequest {
        regions,
        window,
        serotypes: args.serotypes.as_deref().map(split_list),
        combinations,
        centroid_mode: args.centroid_mode.clone(),
        trajectory_serotype: args.trajectory_serotype.clone(),
    })
}

fn flag_for(error: &QueryError, args: &QueryArgs) -> &'static str {
    let field = error.field.as_str();
    if field.starts_with("regions") {
        "--regions"
    } else if field.starts_with("window") {
        if args.years.is_some() {
            "--years"
        } else if field == "window.interval_length" {
            "--interval"
        } else {
            "--year"
        }
    } else if field.starts_with("serotypes") {
        "--serotypes"
    } else if field.starts_with("combinations") {
        "--combos"
    } else if field == "centroid_mode" {
        "--centroid-mode"
    } else if field == "trajectory_serotype" {
        "--trajectory-serotype"
    } else {
        "query"
    }
}

fn query(args: QueryArgs) -> Result<(), Fatal> {
    let request = build_request(&args)?;
    let custom = match &args.regions_file {
        Some(path) => RegionStore::open(path)
            .map_err(|e| Fatal(format!("--regions-file: {e}")))?
            .regions(),
        None => RegionSet::default(),
    };
    let loaded = load_data_dir(&args.data_dir).map_err(|e| Fatal(format!("--data-dir: {e}")))?;
    let snapshot = loaded.snapshot;
    let resolved = resolve_query(&request, &snapshot, &custom)
        .map_err(|e| Fatal(format!("{}: {}", flag_for(&e, &args), e.message)))?;
    let payload = execute(
        args.kind.into(),
        &snapshot,
        &resolved,
        &GlyphSizes::default(),
    );
    let bytes = match args.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&payload)?;
            b.push(b'\n');
            b
        }
        Format::Csv => flatten::to_csv(&payload)?,
    };
    match &args.out {
        Some(path) => write_file(path, &bytes)
            .map_err(|e| Fatal(format!("--out: {}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()
}

fn serve(args: ServeArgs) -> Result<(), Fatal> {
    if !args.data_dir.is_dir() {
        return Err(Fatal(format!(
            "--data-dir: {} is not a directory",
            args.data_dir.display()
        )));
    }
    let loaded = load_data_dir(&args.data_dir).map_err(|e| Fatal(format!("--data-dir: {e}")))?;
    if !loaded.diagnostics.is_clean() {
        eprintln!(
            "warning: {} rows rejected while loading {}",
            loaded.diagnostics.rejected.len(),
            args.data_dir.display()
        );
    }
    let store = match &args.regions_file {
        Some(path) => RegionStore::open(path).map_err(|e| Fatal(format!("--regions-file: {e}")))?,
        None => RegionStore::in_memory(),
    };
    let state = Arc::new(AppState::new(
        Some(loaded.snapshot),
        Some(args.data_dir.clone()),
        store,
    ));
    let app = router(state, args.static_dir.clone());

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Fatal(format!("--port: cannot bind {addr}: {e}")))?;
        let bound: SocketAddr = listener.local_addr()?;
        println!("listening on http://{bound}");
        std::io::stdout().flush()?;
        geoden_service::serve(listener, app).await?;
        Ok(())
    })
}
