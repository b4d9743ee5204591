//! One function per subcommand. Each takes its parsed arguments plus the
//! merged settings, performs the work through the library crate, and
//! renders results through [`crate::output`].

use crate::config::Settings;
use crate::error::{io_error, CliError};
use crate::grammars::load_grammar;
use crate::manifest::load_manifest;
use crate::output::{deliver, number, render_delimited, OutputFormat, Table};
use crate::report::{run_benchmark, validate_report, SampleBudget};
use eqgram::analytics::{
    count_trees, coverage, expected_samples_cfg, expected_samples_pcfg,
};
use eqgram::chart::{parse, target_probability, tokenize};
use eqgram::discover::{
    mc_gbed, resample_success_curve, run_report, ResampleCandidate,
};
use eqgram::expr::{canonicalize, mask_constants, parse_expression, to_grammar_text};
use eqgram::fit::Dataset;
use eqgram::sample::sample_many;
use serde::Deserialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

fn default_variables() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

/// `sample`: draw expressions from a grammar, one record per line.
pub fn sample(
    grammar_source: &str,
    n: usize,
    seed: u64,
    max_expansions: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let grammar = load_grammar(grammar_source, &default_variables())?;
    let batch = sample_many(&grammar, n, seed, max_expansions)?;
    let columns: Vec<String> = ["sentence", "log_probability", "height", "expansions"]
        .into_iter()
        .map(String::from)
        .collect();
    let rows: Vec<Vec<Value>> = batch
        .outcomes
        .iter()
        .map(|o| {
            vec![
                Value::String(o.sentence.join(" ")),
                number(o.log_probability),
                Value::from(o.tree.height() as u64),
                Value::from(o.expansions_used),
            ]
        })
        .collect();
    // One record per line in both renderings: JSON-lines, or
    // tab-separated when a delimited format is asked for.
    let content = match format {
        OutputFormat::Csv => render_delimited(&columns, &rows, b'\t')?,
        OutputFormat::Json | OutputFormat::Jsonl => {
            let mut table = Table::new(columns);
            for row in rows {
                table.push(row);
            }
            table.render(OutputFormat::Jsonl)?
        }
    };
    deliver(&content, out)
}

/// Resolves `--symbol`, defaulting to the grammar's start symbol, and
/// returns both the id and the name actually used.
fn resolve_symbol(
    grammar: &eqgram::Pcfg,
    name: Option<&str>,
) -> Result<(eqgram::grammar::SymbolId, String), CliError> {
    match name {
        None => {
            let start = grammar.start();
            Ok((start, grammar.symbol_name(start).to_string()))
        }
        Some(name) => grammar
            .symbol_id(name)
            .filter(|&id| grammar.is_nonterminal(id))
            .map(|id| (id, name.to_string()))
            .ok_or_else(|| CliError::Data(format!("grammar has no nonterminal named '{name}'"))),
    }
}

/// `count`: parse trees of exactly and at most a height, exact decimals.
pub fn count(
    grammar_source: &str,
    symbol: Option<&str>,
    height: usize,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let grammar = load_grammar(grammar_source, &default_variables())?;
    let (id, name) = resolve_symbol(&grammar, symbol)?;
    let (exact, cumulative) = count_trees(&grammar, id, height);
    let mut table = Table::new(vec!["symbol", "height", "exact", "cumulative"]);
    table.push(vec![
        Value::String(name),
        Value::from(height as u64),
        Value::String(exact.to_string()),
        Value::String(cumulative.to_string()),
    ]);
    deliver(&table.render(format)?, out)
}

/// `coverage`: total probability of parse trees up to a height.
pub fn coverage_cmd(
    grammar_source: &str,
    symbol: Option<&str>,
    height: usize,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let grammar = load_grammar(grammar_source, &default_variables())?;
    let (id, name) = resolve_symbol(&grammar, symbol)?;
    let value = coverage(&grammar, id, height);
    let mut table = Table::new(vec!["symbol", "height", "coverage"]);
    table.push(vec![
        Value::String(name),
        Value::from(height as u64),
        number(value),
    ]);
    deliver(&table.render(format)?, out)
}

/// `parse-prob`: best-parse probability, height, and inside probability of
/// an expression text under a grammar.
pub fn parse_prob(
    grammar_source: &str,
    expression: &str,
    top_k: usize,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let grammar = load_grammar(grammar_source, &default_variables())?;
    let tokens = tokenize(expression, &grammar)?;
    let result = parse(&grammar, &tokens, top_k)?;
    let mut table = Table::new(vec![
        "expression",
        "in_language",
        "probability",
        "log_probability",
        "height",
        "n_parses",
        "inside_probability",
    ]);
    let best = result.trees.first();
    table.push(vec![
        Value::String(expression.to_string()),
        Value::Bool(best.is_some()),
        best.map_or(Value::Null, |b| number(b.probability)),
        best.map_or(Value::Null, |b| number(b.probability.ln())),
        best.map_or(Value::Null, |b| Value::from(b.tree.height() as u64)),
        Value::from(result.trees.len() as u64),
        number(result.inside_probability),
    ]);
    deliver(&table.render(format)?, out)
}

/// `expected`: expected samples to hit a target, by random sampling or by
/// exhaustive height-ordered enumeration (`--deterministic`).
pub fn expected(
    grammar_source: &str,
    expression: &str,
    deterministic: bool,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let grammar = load_grammar(grammar_source, &default_variables())?;
    let expr = parse_expression(expression)?;
    let form = canonicalize(&mask_constants(&expr));
    let text = to_grammar_text(&form)?;
    let (p, height) = target_probability(&grammar, &text)?;

    let mut table = Table::new(if deterministic {
        vec![
            "expression",
            "grammar_text",
            "probability",
            "height",
            "e_cfg_log10",
            "e_cfg_decimal",
        ]
    } else {
        vec!["expression", "grammar_text", "probability", "height", "e_pcfg"]
    });
    if deterministic {
        let cfg = expected_samples_cfg(&grammar, height)?;
        table.push(vec![
            Value::String(expression.to_string()),
            Value::String(text),
            number(p),
            Value::from(height as u64),
            number(cfg.log10),
            Value::String(cfg.decimal),
        ]);
    } else {
        table.push(vec![
            Value::String(expression.to_string()),
            Value::String(text),
            number(p),
            Value::from(height as u64),
            number(expected_samples_pcfg(p)?),
        ]);
    }
    deliver(&table.render(format)?, out)
}

fn read_csv_dataset(path: &Path, target: &str) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let row: Result<Vec<f64>, CliError> = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::Data(format!(
                        "{}: row {}: '{cell}' is not a number",
                        path.display(),
                        index + 2
                    ))
                })
            })
            .collect();
        rows.push(row?);
    }
    Dataset::new(columns, rows, target).map_err(Into::into)
}

/// `discover`: run the sampling + fitting loop on a CSV dataset.
///
/// The full result (all scored candidates) goes to `--out` when given;
/// the summary row always goes to stdout.
pub fn discover(
    grammar_source: &str,
    data: &Path,
    target: &str,
    settings: &Settings,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dataset = read_csv_dataset(data, target)?;
    let input_columns: Vec<String> = dataset
        .column_names()
        .iter()
        .filter(|c| c.as_str() != target)
        .cloned()
        .collect();
    let grammar = load_grammar(grammar_source, &input_columns)?;
    let result = mc_gbed(&grammar, &dataset, &settings.discovery)?;

    if let Some(path) = out {
        let mut text = serde_json::to_string_pretty(&result)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    }

    let summary = run_report(&result);
    let mut table = Table::new(vec![
        "success",
        "n_raw_samples",
        "n_unique",
        "coverage_achieved",
        "n_discarded",
        "best_error",
        "best_key",
    ]);
    table.push(vec![
        Value::Bool(summary.success),
        Value::from(summary.n_raw_samples as u64),
        Value::from(summary.n_unique as u64),
        number(summary.coverage_achieved),
        Value::from(summary.n_discarded),
        summary.best_error.map_or(Value::Null, number),
        summary.best_key.clone().map_or(Value::Null, Value::String),
    ]);
    print!("{}", table.render(format)?);
    Ok(())
}

/// `benchmark`: run a manifest end to end and write the report plus the
/// curve tables into a directory.
#[allow(clippy::too_many_arguments)]
pub fn benchmark(
    manifest_source: &str,
    grammar_source: &str,
    settings: &Settings,
    n_override: Option<usize>,
    auto_samples: Option<f64>,
    expected_only: bool,
    out_dir: &Path,
) -> Result<(), CliError> {
    if let Some(hits) = auto_samples {
        if !(hits > 0.0 && hits.is_finite()) {
            return Err(CliError::Usage(format!(
                "--auto-samples must be positive and finite, got {hits}"
            )));
        }
    }
    let manifest = load_manifest(manifest_source)?;
    let budget = match (auto_samples, n_override) {
        (Some(hits), _) => SampleBudget::AutoHits(hits),
        (None, Some(n)) => SampleBudget::Fixed(n),
        (None, None) => SampleBudget::Fixed(settings.discovery.n_samples),
    };
    let outcome = run_benchmark(&manifest, grammar_source, settings, budget, expected_only);

    let report_value =
        serde_json::to_value(&outcome.report).map_err(|e| CliError::Internal(e.to_string()))?;
    validate_report(&report_value).map_err(CliError::Internal)?;

    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let write = |name: &str, content: &str| -> Result<(), CliError> {
        let path = out_dir.join(name);
        std::fs::write(&path, content).map_err(|e| io_error(&path, e))
    };
    let mut report_text = serde_json::to_string_pretty(&report_value)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    report_text.push('\n');
    write("report.json", &report_text)?;
    write("expected.csv", &outcome.expected.render(OutputFormat::Csv)?)?;
    write("ratio.csv", &outcome.ratio.render(OutputFormat::Csv)?)?;
    write(
        "success_rate.csv",
        &outcome.success_rate.render(OutputFormat::Csv)?,
    )?;
    Ok(())
}

/// The slice of a prior `discover --out` document the resampler needs.
#[derive(Deserialize)]
struct PriorRun {
    candidates: Vec<PriorCandidate>,
}

#[derive(Deserialize)]
struct PriorCandidate {
    generation_probability: f64,
    /// Null in the document when the candidate was inadmissible.
    error: Option<f64>,
}

/// `resample`: estimate success probability as a function of candidate
/// budget from one or more prior discovery results.
pub fn resample(
    inputs: &[PathBuf],
    threshold: f64,
    repeats: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(CliError::Usage(format!(
            "--threshold must be finite and nonnegative, got {threshold}"
        )));
    }
    let mut tasks: Vec<Vec<ResampleCandidate>> = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let run: PriorRun = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        tasks.push(
            run.candidates
                .iter()
                .map(|c| ResampleCandidate {
                    probability: c.generation_probability,
                    success: c.error.is_some_and(|e| e < threshold),
                })
                .collect(),
        );
    }
    let curve = resample_success_curve(&tasks, repeats, seed)?;
    let columns: Vec<String> = ["sample_size", "avg_success_rate"]
        .into_iter()
        .map(String::from)
        .collect();
    let rows: Vec<Vec<Value>> = curve
        .iter()
        .enumerate()
        .map(|(i, rate)| vec![Value::from((i + 1) as u64), number(*rate)])
        .collect();
    deliver(&render_delimited(&columns, &rows, b',')?, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_defaults_to_the_start_symbol() {
        let grammar = load_grammar("linear", &[]).unwrap();
        let (id, name) = resolve_symbol(&grammar, None).unwrap();
        assert_eq!(id, grammar.start());
        assert_eq!(name, "E");

        let err = resolve_symbol(&grammar, Some("x")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        resolve_symbol(&grammar, Some("V")).unwrap();
    }
}
