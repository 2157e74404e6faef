//! The `vweave` command: one-shot queries, the SPARQL endpoint, benchmarks
//! and fixture tooling.

pub mod config;
pub mod server;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use vweave_bench::{
    run_s2a, run_scalability, write_webtable, BenchError, BenchReport, ScalabilityConfig,
    SyntheticTableSpec,
};
use vweave_core::results::{to_csv, to_json_string};
use vweave_core::vtable::replay_key;
use vweave_core::{parse_sparql, EngineError, QueryOptions};

pub use config::{ConfigError, EngineConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Query(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("give exactly one of --config or --mappings")]
    NoSpec,
    #[error("give exactly one of --query or -e")]
    NoQuery,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vweave",
    version,
    about = "SPARQL over Web tables and JSON APIs"
)]
pub struct Cli {
    /// Log filter, e.g. `info` or `vweave_core=debug`. Overrides the config file.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Answer one query and print the results.
    Query(QueryArgs),
    /// Run the SPARQL HTTP endpoint.
    Serve(ServeArgs),
    /// Run a benchmark and write CSV, JSON and SVG reports.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Write a synthetic opinion-poll table.
    GenerateWebtable(GenerateArgs),
    /// Manage recorded HTTP responses.
    #[command(subcommand)]
    Replay(ReplayCommand),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Mapping file; its directory serves file: URLs and `replay/` recordings.
    #[arg(long, short)]
    pub mappings: Option<PathBuf>,
}

impl SpecArgs {
    pub fn load(&self) -> Result<EngineConfig, CliError> {
        let cfg = match (&self.config, &self.mappings) {
            (Some(c), None) => EngineConfig::load(c)?,
            (None, Some(m)) => EngineConfig::for_mappings(m),
            _ => return Err(CliError::NoSpec),
        };
        Ok(cfg.with_env())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// File holding the query.
    #[arg(long, short)]
    pub query: Option<PathBuf>,
    /// Inline query text.
    #[arg(short = 'e', long = "expr")]
    pub expr: Option<String>,
    /// Bypass the operator cache: every invocation fetches.
    #[arg(long)]
    pub no_cache: bool,
    /// Print the unfolded plan instead of answering.
    #[arg(long)]
    pub dump_plan: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Answer the query this many times in one process, reporting fetches
    /// per run on stderr; results of the last run are printed.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Address to listen on; overrides config and VWEAVE_LISTEN.
    #[arg(long)]
    pub listen: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Time two poll queries over generated tables of growing size.
    Scalability {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "10,100,1000,10000,100000"
        )]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 2)]
        planted: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where generated tables are written; defaults to `<out>/tables`.
        #[arg(long)]
        work_dir: Option<PathBuf>,
        /// Run warm repetitions concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare API calls and answer quality with the SERVICE-to-API model.
    S2a {
        /// Yelp fixture directory.
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long, default_value_t = 2)]
    pub planted: usize,
    #[arg(long, default_value_t = 10)]
    pub template_rows: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReplayCommand {
    /// Print the file stem used for a URL's recording.
    Key { url: String },
    /// Record a response body for a URL.
    Add {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        url: String,
        /// File holding the body.
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 200)]
        status: u16,
    },
}

/// Installs the stderr logger. `RUST_LOG` wins over `level`.
pub fn init_logging(level: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .or_else(|_| tracing_subscriber::EnvFilter::try_new(level))
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let log = cli.log_level.clone();
    match cli.command {
        Command::Query(args) => {
            let cfg = args.spec.load()?;
            init_logging(log.as_deref().unwrap_or("warn"));
            query(&cfg, &args)
        }
        Command::Serve(args) => {
            let mut cfg = args.spec.load()?;
            if let Some(l) = args.listen {
                cfg.listen = l;
            }
            init_logging(log.as_deref().unwrap_or(&cfg.log_level));
            let engine = cfg.build_engine()?;
            let runtime = tokio::runtime::Runtime::new().map_err(io_err(Path::new("runtime")))?;
            runtime
                .block_on(server::serve(engine, &cfg.listen))
                .map_err(io_err(Path::new(&cfg.listen)))
        }
        Command::Bench(b) => {
            init_logging(log.as_deref().unwrap_or("info"));
            bench(b)
        }
        Command::GenerateWebtable(g) => {
            let spec = SyntheticTableSpec::with_template(g.template_rows, g.rows, g.planted)?;
            write_webtable(&g.out, &spec, g.seed)?;
            Ok(())
        }
        Command::Replay(ReplayCommand::Key { url }) => {
            println!("{}", replay_key(&url));
            Ok(())
        }
        Command::Replay(ReplayCommand::Add {
            dir,
            url,
            body,
            status,
        }) => {
            let bytes = std::fs::read(&body).map_err(io_err(&body))?;
            std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            let stem = dir.join(replay_key(&url));
            let body_path = stem.with_extension("body");
            std::fs::write(&body_path, bytes).map_err(io_err(&body_path))?;
            if status != 200 {
                let status_path = stem.with_extension("status");
                std::fs::write(&status_path, status.to_string()).map_err(io_err(&status_path))?;
            }
            println!("{}", body_path.display());
            Ok(())
        }
    }
}

fn query(cfg: &EngineConfig, args: &QueryArgs) -> Result<(), CliError> {
    let (text, origin) = match (&args.query, &args.expr) {
        (Some(p), None) => (
            std::fs::read_to_string(p).map_err(io_err(p))?,
            p.display().to_string(),
        ),
        (None, Some(e)) => (e.clone(), "<expr>".to_string()),
        _ => return Err(CliError::NoQuery),
    };
    let parsed = parse_sparql(&text).map_err(|e| CliError::Query(e.diagnostic(&origin)))?;
    let engine = cfg.build_engine()?;
    let mut out = std::io::stdout().lock();
    if args.dump_plan {
        let plan = engine.unfold(&parsed);
        writeln!(out, "{}", engine.render_plan(&plan)).map_err(io_err(Path::new("stdout")))?;
        return Ok(());
    }
    let opts = QueryOptions {
        no_cache: args.no_cache,
    };
    let mut last = None;
    for i in 1..=args.runs.max(1) {
        let start = Instant::now();
        let answer = engine.answer_query(&parsed, opts)?;
        eprintln!(
            "run {i}: {} fetches, {} solutions, {:.2} ms",
            answer.fetches,
            answer.solutions.len(),
            start.elapsed().as_secs_f64() * 1000.0
        );
        for w in &answer.warnings {
            eprintln!("warning: {w}");
        }
        last = Some(answer);
    }
    let answer = last.expect("at least one run");
    let body = match args.format {
        Format::Json => to_json_string(&answer.variables, &answer.solutions) + "\n",
        Format::Csv => to_csv(&answer.variables, &answer.solutions),
    };
    out.write_all(body.as_bytes())
        .map_err(io_err(Path::new("stdout")))?;
    Ok(())
}

fn write_reports(report: &BenchReport, out: &Path, name: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let csv_path = out.join(format!("{name}.csv"));
    std::fs::write(&csv_path, report.to_csv()?).map_err(io_err(&csv_path))?;
    let json_path = out.join(format!("{name}.json"));
    std::fs::write(&json_path, report.to_json()?).map_err(io_err(&json_path))?;
    report.write_svg(&out.join(format!("{name}.svg")), name)?;
    for row in report.errors() {
        tracing::warn!(
            query = %row.query,
            mode = %row.mode,
            size = row.size,
            error = row.error.as_deref().unwrap_or(""),
            "cell failed"
        );
    }
    print!("{}", report.to_csv()?);
    Ok(())
}

fn bench(cmd: BenchCommand) -> Result<(), CliError> {
    match cmd {
        BenchCommand::Scalability {
            sizes,
            repeats,
            planted,
            seed,
            work_dir,
            parallel,
            out,
        } => {
            let cfg = ScalabilityConfig {
                sizes,
                repeats,
                planted,
                seed,
                work_dir: work_dir.unwrap_or_else(|| out.join("tables")),
                parallel,
            };
            let report = run_scalability(&cfg)?;
            write_reports(&report, &out, "scalability")
        }
        BenchCommand::S2a {
            fixtures,
            repeats,
            out,
        } => {
            let report = run_s2a(&fixtures, repeats)?;
            write_reports(&report, &out, "s2a")
        }
    }
}
