//! `eqgram` — sample, analyze, and search probabilistic expression
//! grammars from the command line.
//!
//! Every subcommand is deterministic for a fixed set of flags: the same
//! invocation produces byte-identical output. Exit codes: 0 success,
//! 1 usage error, 2 data or grammar error, 3 internal invariant
//! violation.

mod commands;
mod config;
mod error;
mod grammars;
mod manifest;
mod output;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{load_settings, Settings};
use error::CliError;
use output::OutputFormat;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "eqgram",
    version,
    about = "Probabilistic grammar sampling and equation discovery",
    propagate_version = true
)]
struct Cli {
    /// Master random seed (overrides config file and environment).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Configuration file (flat key=value lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every grammar-consuming subcommand.
#[derive(Args)]
struct GrammarArg {
    /// Grammar: a file path, or a builtin — uniform_universal, biased_universal,
    /// linear — with optional colon parameters, e.g. uniform_universal:a,b
    /// or linear:2:0.5.
    #[arg(long, default_value = "uniform_universal")]
    grammar: String,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random expressions; one record per line.
    Sample {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Number of samples to draw.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Per-sample expansion budget before the attempt is redrawn.
        #[arg(long)]
        max_expansions: Option<u64>,
        /// Write output here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Count parse trees of a given height, exactly.
    Count {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Nonterminal to count from (default: the start symbol).
        #[arg(long)]
        symbol: Option<String>,
        /// Tree height (edges on the longest root-to-leaf path).
        #[arg(long)]
        height: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Probability mass of trees up to a given height.
    Coverage {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Nonterminal to measure from (default: the start symbol).
        #[arg(long)]
        symbol: Option<String>,
        /// Maximum tree height included in the mass.
        #[arg(long)]
        height: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Probability and parse height of an expression under a grammar.
    ParseProb {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Expression text, written in the grammar's own tokens.
        expression: String,
        /// How many of the highest-probability parses to retain.
        #[arg(long, default_value_t = 4)]
        top_k: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Expected number of samples (or enumerated trees) to reach a target.
    Expected {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Target expression in ordinary infix notation.
        expression: String,
        /// Report the exhaustive-enumeration count instead of the
        /// random-sampling expectation.
        #[arg(long)]
        deterministic: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Search for an equation fitting a CSV dataset.
    Discover {
        #[command(flatten)]
        grammar: GrammarArg,
        /// CSV file with a header row of column names.
        #[arg(long, value_name = "CSV")]
        data: PathBuf,
        /// Name of the column to model; all others are inputs.
        #[arg(long, default_value = "v")]
        target: String,
        /// Number of candidate expressions to sample.
        #[arg(long)]
        n: Option<usize>,
        /// Write the full scored candidate list here as JSON.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run a task manifest end to end and write a report directory.
    Benchmark {
        /// Manifest: a builtin name (easy, feynman, extended) or a JSON file.
        #[arg(long, default_value = "easy")]
        manifest: String,
        #[command(flatten)]
        grammar: GrammarArg,
        /// Independent runs per task.
        #[arg(long)]
        runs: Option<usize>,
        /// Candidate samples per run.
        #[arg(long)]
        n: Option<usize>,
        /// Size each task's sample budget as ⌈HITS / p̃⌉ from its own
        /// target probability, instead of a fixed --n.
        #[arg(long, value_name = "HITS")]
        auto_samples: Option<f64>,
        /// Only compute the per-task analysis and curves; skip discovery runs.
        #[arg(long)]
        expected_only: bool,
        /// Directory for report.json and the curve CSVs.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Turn prior discovery results into a success-rate curve CSV.
    Resample {
        /// One or more JSON files written by `discover --out`.
        #[arg(long, value_name = "FILE", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Error below which a candidate counts as a success.
        #[arg(long, default_value_t = 1e-9)]
        threshold: f64,
        /// Random permutations averaged per curve point.
        #[arg(long, default_value_t = 1000)]
        repeats: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; everything else is
            // a usage error.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = load_settings(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        settings.discovery.seed = seed;
        settings.discovery.fit.seed = seed;
    }
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            pool.install(|| dispatch(&cli, &settings))
        }
        None => dispatch(&cli, &settings),
    }
}

fn dispatch(cli: &Cli, settings: &Settings) -> Result<(), CliError> {
    let format = cli.format;
    match &cli.command {
        Command::Sample {
            grammar,
            n,
            max_expansions,
            out,
        } => commands::sample(
            &grammar.grammar,
            *n,
            settings.discovery.seed,
            max_expansions.unwrap_or(settings.discovery.max_expansions),
            format,
            out.as_deref(),
        ),
        Command::Count {
            grammar,
            symbol,
            height,
            out,
        } => commands::count(
            &grammar.grammar,
            symbol.as_deref(),
            *height,
            format,
            out.as_deref(),
        ),
        Command::Coverage {
            grammar,
            symbol,
            height,
            out,
        } => commands::coverage_cmd(
            &grammar.grammar,
            symbol.as_deref(),
            *height,
            format,
            out.as_deref(),
        ),
        Command::ParseProb {
            grammar,
            expression,
            top_k,
            out,
        } => commands::parse_prob(&grammar.grammar, expression, *top_k, format, out.as_deref()),
        Command::Expected {
            grammar,
            expression,
            deterministic,
            out,
        } => commands::expected(
            &grammar.grammar,
            expression,
            *deterministic,
            format,
            out.as_deref(),
        ),
        Command::Discover {
            grammar,
            data,
            target,
            n,
            out,
        } => {
            let mut settings = settings.clone();
            if let Some(n) = n {
                settings.discovery.n_samples = *n;
            }
            commands::discover(
                &grammar.grammar,
                data,
                target,
                &settings,
                format,
                out.as_deref(),
            )
        }
        Command::Benchmark {
            manifest,
            grammar,
            runs,
            n,
            auto_samples,
            expected_only,
            out_dir,
        } => {
            let mut settings = settings.clone();
            if let Some(runs) = runs {
                settings.runs = *runs;
            }
            commands::benchmark(
                manifest,
                &grammar.grammar,
                &settings,
                *n,
                *auto_samples,
                *expected_only,
                out_dir,
            )
        }
        Command::Resample {
            input,
            threshold,
            repeats,
            out,
        } => commands::resample(
            input,
            *threshold,
            *repeats,
            settings.discovery.seed,
            out.as_deref(),
        ),
    }
}
