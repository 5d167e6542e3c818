//! `typematch` command line. Exit status 0 on success, 2 for usage errors
//! (bad flags, unreadable or malformed input), 1 for runtime failures.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{ArgAction, Args, Parser, Subcommand};
use typematch_core::labeling::{suggest_labels, LabelReport, DEFAULT_TOP_M, DEFAULT_Z};
use typematch_core::matchers::{ColumnTypeProfile, MatchConfig, Matcher, TieStrategy, DEFAULT_THRESHOLD};
use typematch_core::merge::{aggregate, merge_tables, AggregateFn, AggregationSpec, Series};
use typematch_core::reconcile::{Reconciler, DEFAULT_TOP_K};
use typematch_core::store::ProjectStore;
use typematch_core::{load_table, run_match, Error, MappingDoc, Result, Table};

use crate::{api, resolve_provider, to_json};

#[derive(Parser, Debug)]
#[command(name = "typematch", version, about = "Match table columns by header names and reconciled cell types")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ProviderArgs {
    /// `fixture:<path>` or `http:<url>`; defaults to $TYPEMATCH_PROVIDER_URL.
    #[arg(long)]
    provider: Option<String>,

    /// Candidates kept per cell.
    #[arg(short = 'k', long = "top-k", default_value_t = DEFAULT_TOP_K)]
    k: usize,

    /// Persist reconciliation results in this JSON file.
    #[arg(long)]
    cache: Option<PathBuf>,

    /// Provider request timeout in seconds.
    #[arg(long, default_value_t = 10)]
    timeout: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score column pairs of two tables and propose a one-to-one mapping.
    Match {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long, value_delimiter = ',', default_values_t = Matcher::ALL)]
        matchers: Vec<Matcher>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Tie handling for Spearman ranks: average, minimum, maximum, sequential.
        #[arg(long, default_value = "average")]
        ties: TieStrategy,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        has_header: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Suggest header labels for a column from its reconciled types.
    Label {
        source: PathBuf,
        #[arg(long)]
        column: usize,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long, default_value_t = DEFAULT_TOP_M)]
        top: usize,
        #[arg(long, default_value_t = DEFAULT_Z)]
        z: f64,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        has_header: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stack the mapped columns of two tables into one CSV.
    Merge {
        source: PathBuf,
        target: PathBuf,
        /// JSON document with a `mapping` array, e.g. the output of `match`.
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        include_unmatched: bool,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        has_header: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Group a table by one column and fold another into a series.
    Aggregate {
        table: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long = "fn")]
        func: AggregateFn,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        has_header: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory holding projects, sessions and the reconciliation cache.
        #[arg(long, default_value = "typematch-data")]
        store: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
    },
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("typematch: {e}");
            ExitCode::from(if e.is_usage() || matches!(e, Error::NotFound(_)) { 2 } else { 1 })
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_table(path: &Path, has_header: bool) -> Result<Table> {
    let name = path.file_stem().map_or_else(|| "table".into(), |s| s.to_string_lossy().into_owned());
    load_table(&read_input(path)?, has_header, &name)
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => Ok(std::fs::write(path, bytes)?),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            Ok(out.flush()?)
        }
    }
}

fn reconciler(args: &ProviderArgs) -> Result<Option<Reconciler>> {
    let Some(provider) = resolve_provider(args.provider.as_deref(), Duration::from_secs(args.timeout))? else {
        return Ok(None);
    };
    let mut r = Reconciler::new(provider).with_top_k(args.k)?;
    if let Some(path) = &args.cache {
        r = r.with_disk_cache(path)?;
    }
    Ok(Some(r))
}

fn require(reconciler: Option<Reconciler>) -> Result<Reconciler> {
    reconciler.ok_or_else(|| {
        Error::Usage(format!("no reconciliation provider: pass --provider or set {}", crate::PROVIDER_ENV))
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Match { source, target, provider, matchers, threshold, ties, has_header, output } => {
            let config = MatchConfig { matchers, threshold, ties };
            config.validate()?;
            let (source, target) = (read_table(&source, has_header)?, read_table(&target, has_header)?);
            let reconciler = if config.needs_types() { Some(require(reconciler(&provider)?)?) } else { None };
            let report = run_match(&source, &target, reconciler.as_ref(), &config)?;
            if let Some(r) = &reconciler {
                r.persist_cache()?;
            }
            log::info!("{} candidate pairs, {} mapped", report.pairs.len(), report.mapping.len());
            emit(output.as_deref(), report.to_json().as_bytes())
        }
        Command::Label { source, column, provider, top, z, has_header, output } => {
            let table = read_table(&source, has_header)?;
            let col = table.column(column).ok_or_else(|| Error::Usage(format!("column {column} does not exist")))?;
            let reconciler = require(reconciler(&provider)?)?;
            let annotation = reconciler.annotate_column(col)?;
            reconciler.persist_cache()?;
            let suggestions = suggest_labels(&ColumnTypeProfile::from_annotation(&annotation), z, top)?;
            emit(output.as_deref(), to_json(&LabelReport::new(column, &suggestions)).as_bytes())
        }
        Command::Merge { source, target, mapping, include_unmatched, has_header, output } => {
            let (source, target) = (read_table(&source, has_header)?, read_table(&target, has_header)?);
            let doc: MappingDoc = serde_json::from_slice(&read_input(&mapping)?)
                .map_err(|e| Error::Usage(format!("{}: {e}", mapping.display())))?;
            let merged = merge_tables(&source, &target, &doc.pairs(), include_unmatched)?;
            log::info!("merged {} rows into {} columns", merged.table.row_count(), merged.table.width());
            emit(output.as_deref(), &merged.table.to_csv()?)
        }
        Command::Aggregate { table, x, y, func, has_header, output } => {
            let table = read_table(&table, has_header)?;
            let series = aggregate(&table, &AggregationSpec { x_column: x, y_column: y, func })?;
            emit(output.as_deref(), to_json(&Series { series }).as_bytes())
        }
        Command::Serve { port, host, store, provider } => {
            let reconciler = match reconciler(&provider)? {
                Some(r) if provider.cache.is_none() => {
                    Some(r.with_disk_cache(store.join("reconciliation-cache.json"))?)
                }
                other => other,
            };
            let state = api::AppState::new(ProjectStore::open(&store)?, reconciler.map(Arc::new));
            api::serve(state, &host, port)
        }
    }
}
