//! `breakscope`: binary compatibility checks for Java libraries.
//!
//! Exit codes: 0 success, 1 breaking change or broken client found (only
//! with `--fail-on-breaking`), 2 usage error, 3 unreadable or invalid input.

/// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use breakscope_core::analysis::{analyze, narrative, read_level_counts, write_report};
use breakscope_core::benchmark::{load_manifest, run_benchmark};
use breakscope_core::corpus::{derive_upgrades, load_graph, run_pipeline, JarStore, PipelineOptions, SampleSpec};
use breakscope_core::semver::SemverError;
use breakscope_core::{
    build_model, classify_impact, classify_upgrade, compute_delta, compute_detections, extract_usage, fixtures,
    is_breaking, open_jar, parse_version, JarContent, Scope, StabilityConfig,
};

use output::Format;

/// Default stability configuration file when `--stability-config` is absent.
pub const CONFIG_ENV: &str = "BREAKSCOPE_STABILITY_CONFIG";

pub const EXIT_BREAKING: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "breakscope",
    version,
    about = "Binary breaking changes in Java libraries and their impact on clients"
)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Breaking changes between two versions of a library.
    Delta {
        old: PathBuf,
        new: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Client declarations broken by upgrading a library.
    Detect {
        old: PathBuf,
        new: PathBuf,
        client: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Semantic-versioning level of an upgrade.
    Classify {
        v1: String,
        v2: String,
        #[arg(long)]
        json: bool,
    },
    /// Upgrade datasets from a dependency graph.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Statistics over a corpus run.
    Analyze {
        /// Output directory of `corpus run`.
        results: PathBuf,
        /// Where the report files go; defaults to `<results>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV with level,population,sample,broken replacing the per-level
        /// client counts.
        #[arg(long)]
        counts: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Detector accuracy against cases with known linker errors.
    Bench {
        manifest: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, env = CONFIG_ENV)]
        stability_config: Option<PathBuf>,
    },
    /// Writes the bundled example JARs, corpus and benchmark suite.
    Fixtures { out: PathBuf },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Candidate upgrades and the reason each excluded one was dropped.
    Derive {
        #[command(flatten)]
        input: CorpusInput,
        #[arg(long)]
        json: bool,
    },
    /// Deltas, client detections and per-upgrade tables.
    Run {
        #[command(flatten)]
        input: CorpusInput,
        /// `level:confidence:margin` (level may be `all`); repeatable.
        #[arg(long)]
        sample: Vec<SampleSpec>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, env = CONFIG_ENV)]
        stability_config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CorpusInput {
    /// Directory holding artifacts.csv and edges.csv.
    #[arg(long)]
    graph: PathBuf,
    /// Root that artifact JAR paths are relative to.
    #[arg(long)]
    jars: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    #[arg(long, env = CONFIG_ENV)]
    stability_config: Option<PathBuf>,
    /// Exit with status 1 when something breaks within `--scope`.
    #[arg(long)]
    fail_on_breaking: bool,
    #[arg(long, value_enum, default_value_t = ScopeArg::All)]
    scope: ScopeArg,
}

impl CheckArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Text
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Stable,
    All,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Scope {
        match s {
            ScopeArg::Stable => Scope::StableOnly,
            ScopeArg::All => Scope::All,
        }
    }
}

/// A failed command and the status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_INPUT, message: message.to_string() }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn stability(path: Option<&Path>) -> Result<StabilityConfig, Failure> {
    match path {
        Some(p) => {
            info!("stability configuration from {}", p.display());
            StabilityConfig::load(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
        }
        None => Ok(StabilityConfig::default()),
    }
}

fn jar(path: &Path) -> Result<JarContent, Failure> {
    let content = open_jar(path).map_err(Failure::input)?;
    for f in &content.failures {
        warn!("{}: skipped {}: {}", path.display(), f.path, f.error);
    }
    Ok(content)
}

fn thread_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure::usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(Failure::input)?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_delta(old: &Path, new: &Path, check: &CheckArgs) -> Outcome {
    let config = stability(check.stability_config.as_deref())?;
    let (v1, v2) = (jar(old)?, jar(new)?);
    let delta = compute_delta(&build_model(&v1, &config), &build_model(&v2, &config));
    output::delta(&delta, check.format());
    let breaking = is_breaking(&delta, check.scope.into());
    Ok(if check.fail_on_breaking && breaking { EXIT_BREAKING } else { 0 })
}

fn cmd_detect(old: &Path, new: &Path, client: &Path, check: &CheckArgs) -> Outcome {
    let config = stability(check.stability_config.as_deref())?;
    let (v1, v2, c) = (jar(old)?, jar(new)?, jar(client)?);
    let old_model = build_model(&v1, &config);
    let delta = compute_delta(&old_model, &build_model(&v2, &config));
    let usage = extract_usage(&c, &old_model);
    let detections = compute_detections(&delta, &usage).map_err(Failure::input)?;
    let summary = classify_impact(&delta, &usage, &detections);
    let broken = match Scope::from(check.scope) {
        Scope::All => summary.broken,
        Scope::StableOnly => summary.broken_stable,
    };
    output::detections(&delta, &c.id, &detections, &summary, broken, check.format());
    Ok(if check.fail_on_breaking && broken { EXIT_BREAKING } else { 0 })
}

fn cmd_classify(v1: &str, v2: &str, json: bool) -> Outcome {
    let a = parse_version(v1).map_err(Failure::usage)?;
    let b = parse_version(v2).map_err(Failure::usage)?;
    match classify_upgrade(&a, &b) {
        Ok(level) => {
            output::classification(&a, &b, Some(level), None, json);
            Ok(0)
        }
        Err(e @ (SemverError::NotCompliant(_) | SemverError::NotAnUpgrade { .. })) => {
            output::classification(&a, &b, None, Some(&e.to_string()), json);
            Err(Failure::usage(e))
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

fn cmd_corpus(command: &CorpusCommand) -> Outcome {
    match command {
        CorpusCommand::Derive { input, json } => {
            let graph = load_graph(&input.graph).map_err(Failure::input)?;
            for d in &graph.diagnostics {
                warn!("{d}");
            }
            let derivation = derive_upgrades(&graph, &JarStore::new(&input.jars));
            output::derivation(&derivation, &input.out, *json).map_err(Failure::input)?;
            Ok(0)
        }
        CorpusCommand::Run { input, sample, seed, jobs, stability_config, json } => {
            if *jobs == Some(0) {
                return Err(Failure::usage("--jobs must be at least 1"));
            }
            let graph = load_graph(&input.graph).map_err(Failure::input)?;
            let mut options = PipelineOptions::new(&input.out);
            options.jobs = *jobs;
            options.sample = sample.clone();
            options.seed = *seed;
            options.stability = stability(stability_config.as_deref())?;
            let report = run_pipeline(&graph, &JarStore::new(&input.jars), &options).map_err(Failure::input)?;
            info!("{} deltas computed, {} reused", report.deltas_computed, report.deltas_reused);
            output::summary(&report.summary, *json);
            Ok(0)
        }
    }
}

fn cmd_analyze(results: &Path, out: Option<&Path>, counts: Option<&Path>, json: bool) -> Outcome {
    if !results.is_dir() {
        return Err(Failure::input(format!("{}: not a directory", results.display())));
    }
    let counts = counts.map(read_level_counts).transpose().map_err(Failure::input)?;
    let report = analyze(results, counts).map_err(Failure::input)?;
    let out = out.map_or_else(|| results.join("report"), Path::to_path_buf);
    write_report(&report, &out).map_err(Failure::input)?;
    if json {
        output::json(&report);
    } else {
        out!("{}", narrative(&report));
    }
    Ok(0)
}

fn cmd_bench(manifest: &Path, json: bool, jobs: Option<usize>, config: Option<&Path>) -> Outcome {
    let config = stability(config)?;
    let cases = load_manifest(manifest).map_err(Failure::input)?;
    let report = thread_pool(jobs, || run_benchmark(&cases, &config))?;
    output::bench(&report, json);
    // an FP no pessimistic rule accounts for is a detector defect
    Ok(if report.unattributed_fp > 0 { EXIT_BREAKING } else { 0 })
}

fn cmd_fixtures(out: &Path) -> Outcome {
    let write = || -> std::io::Result<()> {
        let servlet = out.join("servlet");
        fixtures::servlet_3_0_1().write(&servlet.join("servlet-api-3.0.1.jar"))?;
        fixtures::servlet_3_1_0().write(&servlet.join("servlet-api-3.1.0.jar"))?;
        fixtures::mock_request_client().write(&servlet.join("spring-test-mock.jar"))?;
        fixtures::unrelated_client().write(&servlet.join("unrelated-client.jar"))?;
        fixtures::write_filter_corpus(&out.join("corpus"))?;
        fixtures::write_bench_suite(&out.join("bench"))?;
        Ok(())
    };
    write().map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
    outln!("{}", out.display());
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Delta { old, new, check } => cmd_delta(old, new, check),
        Command::Detect { old, new, client, check } => cmd_detect(old, new, client, check),
        Command::Classify { v1, v2, json } => cmd_classify(v1, v2, *json),
        Command::Corpus(c) => cmd_corpus(c),
        Command::Analyze { results, out, counts, json } => {
            cmd_analyze(results, out.as_deref(), counts.as_deref(), *json)
        }
        Command::Bench { manifest, json, jobs, stability_config } => {
            cmd_bench(manifest, *json, *jobs, stability_config.as_deref())
        }
        Command::Fixtures { out } => cmd_fixtures(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
