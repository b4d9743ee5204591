//! Benchmark execution and reporting: per-task analytic figures, discovery
//! runs over a manifest, the versioned report document, its schema
//! validator, and the plot-ready curve tables.

use crate::config::Settings;
use crate::error::CliError;
use crate::grammars::load_grammar;
use crate::manifest::{generate_dataset, parse_target, task_variables, BenchmarkTask, Manifest};
use crate::output::{number, Table};
use eqgram::analytics::{
    ambiguity_corrected_rate, expected_samples_cfg, expected_samples_pcfg, expected_success_rate,
    reconstruction_ratio,
};
use eqgram::chart::target_probability;
use eqgram::discover::{mc_gbed, run_report};
use eqgram::expr::{canonicalize, mask_constants, to_grammar_text};
use eqgram::grammar::{universal_grammar, BiasRatios, Pcfg, StructuralProbs};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

/// Version of the report document layout; must match the bundled schema.
pub const SCHEMA_VERSION: u64 = 1;

const SCHEMA: &str = include_str!("../data/report-schema-v1.json");

// ---------------------------------------------------------------------------
// Per-task analytic figures
// ---------------------------------------------------------------------------

/// Everything knowable about a task without running discovery: its masked
/// grammar-language rendering, generation probability and parse height
/// under the uniform and biased grammars, and the derived expected sample
/// counts.
#[derive(Clone, Debug)]
pub struct TaskAnalysis {
    pub task_id: String,
    pub grammar_text: Option<String>,
    pub p_uniform: Option<f64>,
    pub height_uniform: Option<usize>,
    pub p_biased: Option<f64>,
    pub height_biased: Option<usize>,
    pub e_pcfg_uniform: Option<f64>,
    pub e_pcfg_biased: Option<f64>,
    pub e_cfg_log10: Option<f64>,
    pub e_cfg_decimal: Option<String>,
    pub reduction_factor: Option<f64>,
    pub error: Option<String>,
}

fn empty_analysis(task_id: &str) -> TaskAnalysis {
    TaskAnalysis {
        task_id: task_id.to_string(),
        grammar_text: None,
        p_uniform: None,
        height_uniform: None,
        p_biased: None,
        height_biased: None,
        e_pcfg_uniform: None,
        e_pcfg_biased: None,
        e_cfg_log10: None,
        e_cfg_decimal: None,
        reduction_factor: None,
        error: None,
    }
}

/// Computes a task's analytic figures: the target is parsed, its constants
/// masked, and the canonical rendering scored under uniform and biased
/// grammars built over the task's own variables. Failures land in the
/// `error` field instead of aborting the batch.
pub fn analyze_task(task: &BenchmarkTask) -> TaskAnalysis {
    let mut analysis = empty_analysis(&task.id);
    let mut attempt = || -> Result<(), CliError> {
        let expr = parse_target(task)?;
        let form = canonicalize(&mask_constants(&expr));
        let text = to_grammar_text(&form)?;
        analysis.grammar_text = Some(text.clone());

        let variables = task_variables(task);
        let uniform =
            universal_grammar(&variables, BiasRatios::uniform(), StructuralProbs::default())?;
        let biased =
            universal_grammar(&variables, BiasRatios::biased(), StructuralProbs::default())?;

        let (p_u, h_u) = target_probability(&uniform, &text)?;
        let (p_b, h_b) = target_probability(&biased, &text)?;
        analysis.p_uniform = Some(p_u);
        analysis.height_uniform = Some(h_u);
        analysis.p_biased = Some(p_b);
        analysis.height_biased = Some(h_b);

        let e_u = expected_samples_pcfg(p_u)?;
        let e_b = expected_samples_pcfg(p_b)?;
        analysis.e_pcfg_uniform = Some(e_u);
        analysis.e_pcfg_biased = Some(e_b);
        analysis.reduction_factor = Some(e_u / e_b);

        let cfg = expected_samples_cfg(&uniform, h_u)?;
        analysis.e_cfg_log10 = Some(cfg.log10);
        analysis.e_cfg_decimal = Some(cfg.decimal);
        Ok(())
    };
    if let Err(e) = attempt() {
        analysis.error = Some(e.to_string());
    }
    analysis
}

// ---------------------------------------------------------------------------
// Report document
// ---------------------------------------------------------------------------

/// One discovery run of one task. Analytic columns repeat per row so each
/// row reads standalone; `error` carries any per-run failure.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRow {
    pub task_id: String,
    pub run_index: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub p_uniform: Option<f64>,
    pub height_uniform: Option<usize>,
    pub p_biased: Option<f64>,
    pub height_biased: Option<usize>,
    pub success: Option<bool>,
    pub n_raw_samples: Option<usize>,
    pub n_unique: Option<usize>,
    pub coverage_achieved: Option<f64>,
    pub best_error: Option<f64>,
    pub best_key: Option<String>,
    pub error: Option<String>,
}

/// Per-task summary over its runs.
#[derive(Clone, Debug, Serialize)]
pub struct TaskAggregate {
    pub task_id: String,
    pub n_runs: usize,
    /// Runs whose best error beat the success threshold.
    pub n_success: usize,
    pub mean_coverage: Option<f64>,
    /// Mean distinct-candidates-per-sample fraction over the runs.
    pub uniqueness_ratio: Option<f64>,
    /// Set only when every run of the task failed.
    pub error: Option<String>,
}

/// The versioned benchmark report document.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub schema_version: u64,
    /// Grammar source string the runs used.
    pub grammar: String,
    /// Runs per task.
    pub runs: usize,
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Vec<TaskAggregate>,
}

// ---------------------------------------------------------------------------
// Benchmark execution
// ---------------------------------------------------------------------------

/// How the per-task sample count is chosen.
#[derive(Clone, Copy, Debug)]
pub enum SampleBudget {
    /// The configured `discovery.n_samples`, same for every task.
    Fixed(usize),
    /// `ceil(target_hits / p)` with `p` the target's generation
    /// probability under the run grammar — the budget at which the target
    /// is expected `target_hits` times.
    AutoHits(f64),
}

/// Full benchmark output: the report plus the three curve tables.
pub struct BenchmarkOutcome {
    pub report: BenchmarkReport,
    pub expected: Table,
    pub ratio: Table,
    pub success_rate: Table,
}

fn is_builtin_kind(source: &str) -> &str {
    source.split(':').next().unwrap_or(source)
}

/// Generation probability and height of the task's target under the
/// grammar the runs will actually use.
fn run_grammar_probability(
    grammar_source: &str,
    task: &BenchmarkTask,
    analysis: &TaskAnalysis,
) -> Option<(f64, usize)> {
    match is_builtin_kind(grammar_source) {
        "uniform_universal" => analysis.p_uniform.zip(analysis.height_uniform),
        "biased_universal" => analysis.p_biased.zip(analysis.height_biased),
        _ => {
            let text = analysis.grammar_text.as_deref()?;
            let grammar = load_grammar(grammar_source, &task_variables(task)).ok()?;
            target_probability(&grammar, text).ok()
        }
    }
}

fn failed_row(
    task: &BenchmarkTask,
    run_index: usize,
    seed: u64,
    n_samples: usize,
    analysis: &TaskAnalysis,
    message: String,
) -> BenchmarkRow {
    BenchmarkRow {
        task_id: task.id.clone(),
        run_index,
        seed,
        n_samples,
        p_uniform: analysis.p_uniform,
        height_uniform: analysis.height_uniform,
        p_biased: analysis.p_biased,
        height_biased: analysis.height_biased,
        success: None,
        n_raw_samples: None,
        n_unique: None,
        coverage_achieved: None,
        best_error: None,
        best_key: None,
        error: Some(message),
    }
}

fn execute_run(
    task: &BenchmarkTask,
    run_index: usize,
    grammar_source: &str,
    settings: &Settings,
    budget: SampleBudget,
    analysis: &TaskAnalysis,
) -> BenchmarkRow {
    let seed = settings.discovery.seed.wrapping_add(run_index as u64);
    let n_samples = match budget {
        SampleBudget::Fixed(n) => n,
        SampleBudget::AutoHits(hits) => {
            match run_grammar_probability(grammar_source, task, analysis) {
                Some((p, _)) if p > 0.0 => (hits / p).ceil() as usize,
                _ => {
                    return failed_row(
                        task,
                        run_index,
                        seed,
                        0,
                        analysis,
                        "cannot size the sample budget: target has no parse under the run grammar"
                            .into(),
                    )
                }
            }
        }
    };

    let attempt = || -> Result<BenchmarkRow, CliError> {
        let dataset = generate_dataset(task)?;
        let grammar: Pcfg = load_grammar(grammar_source, &task_variables(task))?;
        let mut cfg = settings.discovery.clone();
        cfg.n_samples = n_samples;
        cfg.seed = seed;
        let result = mc_gbed(&grammar, &dataset, &cfg)?;
        let summary = run_report(&result);
        Ok(BenchmarkRow {
            task_id: task.id.clone(),
            run_index,
            seed,
            n_samples,
            p_uniform: analysis.p_uniform,
            height_uniform: analysis.height_uniform,
            p_biased: analysis.p_biased,
            height_biased: analysis.height_biased,
            success: Some(summary.success),
            n_raw_samples: Some(summary.n_raw_samples),
            n_unique: Some(summary.n_unique),
            coverage_achieved: Some(summary.coverage_achieved),
            best_error: summary.best_error,
            best_key: summary.best_key,
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| failed_row(task, run_index, seed, n_samples, analysis, e.to_string()))
}

fn aggregate(task: &BenchmarkTask, rows: &[BenchmarkRow]) -> TaskAggregate {
    let task_rows: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.task_id == task.id).collect();
    let ok: Vec<&&BenchmarkRow> = task_rows.iter().filter(|r| r.error.is_none()).collect();
    let n_success = ok.iter().filter(|r| r.success == Some(true)).count();
    let mean = |values: Vec<f64>| {
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let mean_coverage = mean(ok.iter().filter_map(|r| r.coverage_achieved).collect());
    let uniqueness_ratio = mean(
        ok.iter()
            .filter_map(|r| match (r.n_unique, r.n_raw_samples) {
                (Some(u), Some(n)) if n > 0 => Some(u as f64 / n as f64),
                _ => None,
            })
            .collect(),
    );
    let error = if !task_rows.is_empty() && ok.is_empty() {
        task_rows[0].error.clone()
    } else {
        None
    };
    TaskAggregate {
        task_id: task.id.clone(),
        n_runs: task_rows.len(),
        n_success,
        mean_coverage,
        uniqueness_ratio,
        error,
    }
}

/// Runs the whole benchmark: analytic figures for every task, then (unless
/// `expected_only`) `runs` discovery runs per task, in parallel, assembled
/// in manifest × run order.
pub fn run_benchmark(
    manifest: &Manifest,
    grammar_source: &str,
    settings: &Settings,
    budget: SampleBudget,
    expected_only: bool,
) -> BenchmarkOutcome {
    let analyses: Vec<TaskAnalysis> = manifest.tasks.par_iter().map(analyze_task).collect();

    let rows: Vec<BenchmarkRow> = if expected_only {
        Vec::new()
    } else {
        let specs: Vec<(usize, usize)> = (0..manifest.tasks.len())
            .flat_map(|t| (0..settings.runs).map(move |r| (t, r)))
            .collect();
        specs
            .par_iter()
            .map(|&(t, r)| {
                execute_run(
                    &manifest.tasks[t],
                    r,
                    grammar_source,
                    settings,
                    budget,
                    &analyses[t],
                )
            })
            .collect()
    };

    let aggregates: Vec<TaskAggregate> = manifest
        .tasks
        .iter()
        .map(|task| aggregate(task, &rows))
        .collect();

    // Uniqueness correction applies to whichever universal grammar the
    // runs used; with a file grammar or no runs, both stay uncorrected.
    let global_uniqueness = {
        let ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r.error.is_none())
            .filter_map(|r| match (r.n_unique, r.n_raw_samples) {
                (Some(u), Some(n)) if n > 0 => Some(u as f64 / n as f64),
                _ => None,
            })
            .collect();
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    };
    let (uniq_uniform, uniq_biased) = match is_builtin_kind(grammar_source) {
        "uniform_universal" => (global_uniqueness, None),
        "biased_universal" => (None, global_uniqueness),
        _ => (None, None),
    };

    BenchmarkOutcome {
        report: BenchmarkReport {
            schema_version: SCHEMA_VERSION,
            grammar: grammar_source.to_string(),
            runs: if expected_only { 0 } else { settings.runs },
            rows,
            aggregates,
        },
        expected: expected_table(&analyses),
        ratio: ratio_table(&analyses),
        success_rate: success_rate_table(&analyses, uniq_uniform, uniq_biased),
    }
}

// ---------------------------------------------------------------------------
// Curve tables
// ---------------------------------------------------------------------------

/// Log-spaced sample-count grid shared by the curve tables: 1, 2, 5 per
/// decade up to 10^8.
pub fn sample_grid() -> Vec<u64> {
    let mut grid = Vec::new();
    let mut decade = 1u64;
    for _ in 0..8 {
        for multiplier in [1, 2, 5] {
            grid.push(decade * multiplier);
        }
        decade *= 10;
    }
    grid.push(100_000_000);
    grid
}

fn opt_number(x: Option<f64>) -> Value {
    x.map_or(Value::Null, number)
}

/// The per-task expected-samples comparison table.
pub fn expected_table(analyses: &[TaskAnalysis]) -> Table {
    let mut table = Table::new(vec![
        "task_id",
        "grammar_text",
        "p_uniform",
        "height_uniform",
        "p_biased",
        "height_biased",
        "e_pcfg_uniform",
        "e_pcfg_biased",
        "e_cfg_log10",
        "e_cfg_decimal",
        "reduction_factor",
        "error",
    ]);
    for a in analyses {
        table.push(vec![
            Value::String(a.task_id.clone()),
            a.grammar_text.clone().map_or(Value::Null, Value::String),
            opt_number(a.p_uniform),
            a.height_uniform.map_or(Value::Null, |h| Value::from(h as u64)),
            opt_number(a.p_biased),
            a.height_biased.map_or(Value::Null, |h| Value::from(h as u64)),
            opt_number(a.e_pcfg_uniform),
            opt_number(a.e_pcfg_biased),
            opt_number(a.e_cfg_log10),
            a.e_cfg_decimal.clone().map_or(Value::Null, Value::String),
            opt_number(a.reduction_factor),
            a.error.clone().map_or(Value::Null, Value::String),
        ]);
    }
    table
}

/// Fraction of tasks whose expected sample count fits inside each budget
/// on the grid, per grammar.
pub fn ratio_table(analyses: &[TaskAnalysis]) -> Table {
    let expected_uniform: Vec<f64> = analyses.iter().filter_map(|a| a.e_pcfg_uniform).collect();
    let expected_biased: Vec<f64> = analyses.iter().filter_map(|a| a.e_pcfg_biased).collect();
    let mut table = Table::new(vec!["n", "ratio_uniform", "ratio_biased"]);
    for n in sample_grid() {
        let ru = reconstruction_ratio(&expected_uniform, n as f64).ok();
        let rb = reconstruction_ratio(&expected_biased, n as f64).ok();
        table.push(vec![Value::from(n), opt_number(ru), opt_number(rb)]);
    }
    table
}

/// Theoretical success-rate curves over the budget grid: the plain
/// at-least-one-hit rate per grammar, plus the ambiguity-corrected rate
/// where an observed uniqueness ratio is available.
pub fn success_rate_table(
    analyses: &[TaskAnalysis],
    uniqueness_uniform: Option<f64>,
    uniqueness_biased: Option<f64>,
) -> Table {
    let probs_uniform: Vec<f64> = analyses.iter().filter_map(|a| a.p_uniform).collect();
    let probs_biased: Vec<f64> = analyses.iter().filter_map(|a| a.p_biased).collect();
    let mut table = Table::new(vec![
        "n",
        "expected_uniform",
        "corrected_uniform",
        "expected_biased",
        "corrected_biased",
    ]);
    for n in sample_grid() {
        let expected_u = expected_success_rate(&probs_uniform, n).ok();
        let expected_b = expected_success_rate(&probs_biased, n).ok();
        let corrected_u = uniqueness_uniform
            .and_then(|u| ambiguity_corrected_rate(&probs_uniform, n, u).ok());
        let corrected_b = uniqueness_biased
            .and_then(|u| ambiguity_corrected_rate(&probs_biased, n, u).ok());
        table.push(vec![
            Value::from(n),
            opt_number(expected_u),
            opt_number(corrected_u),
            opt_number(expected_b),
            opt_number(corrected_b),
        ]);
    }
    table
}

// ---------------------------------------------------------------------------
// Schema validation
// ---------------------------------------------------------------------------

fn type_matches(expected: &str, value: &Value) -> bool {
    expected.split('|').any(|t| match t {
        "null" => value.is_null(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "integer" => value.is_i64() || value.is_u64(),
        "number" => value.is_number(),
        "array" => value.is_array(),
        "object" => value.is_object(),
        _ => false,
    })
}

fn check_fields(
    object: &Value,
    fields: &serde_json::Map<String, Value>,
    context: &str,
) -> Result<(), String> {
    let map = object
        .as_object()
        .ok_or_else(|| format!("{context}: expected an object"))?;
    for (name, expected) in fields {
        let expected = expected
            .as_str()
            .ok_or_else(|| format!("schema field '{name}' is not a type string"))?;
        let value = map
            .get(name)
            .ok_or_else(|| format!("{context}: missing field '{name}'"))?;
        if !type_matches(expected, value) {
            return Err(format!(
                "{context}: field '{name}' should be {expected}, got {value}"
            ));
        }
    }
    Ok(())
}

/// Validates a serialized report against the bundled versioned schema.
///
/// A failure here means the tool produced a document it promised not to,
/// so callers treat it as an internal error (exit 3).
pub fn validate_report(report: &Value) -> Result<(), String> {
    let schema: Value =
        serde_json::from_str(SCHEMA).map_err(|e| format!("bundled schema unreadable: {e}"))?;
    let schema_fields = |key: &str| -> Result<serde_json::Map<String, Value>, String> {
        schema
            .get(key)
            .and_then(Value::as_object)
            .cloned()
            .ok_or_else(|| format!("bundled schema lacks '{key}'"))
    };

    let declared_version = schema
        .get("version")
        .and_then(Value::as_u64)
        .ok_or("bundled schema lacks a version")?;
    if declared_version != SCHEMA_VERSION {
        return Err(format!(
            "schema version mismatch: bundled {declared_version}, expected {SCHEMA_VERSION}"
        ));
    }

    check_fields(report, &schema_fields("fields")?, "report")?;
    if report.get("schema_version").and_then(Value::as_u64) != Some(SCHEMA_VERSION) {
        return Err("report: schema_version disagrees with the bundled schema".into());
    }

    let row_fields = schema_fields("row_fields")?;
    for (index, row) in report
        .get("rows")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .enumerate()
    {
        check_fields(row, &row_fields, &format!("rows[{index}]"))?;
    }
    let aggregate_fields = schema_fields("aggregate_fields")?;
    for (index, row) in report
        .get("aggregates")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .enumerate()
    {
        check_fields(row, &aggregate_fields, &format!("aggregates[{index}]"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::load_manifest;

    #[test]
    fn easy_manifest_analyses_are_complete() {
        let manifest = load_manifest("easy").unwrap();
        for task in &manifest.tasks {
            let a = analyze_task(task);
            assert!(a.error.is_none(), "task {}: {:?}", a.task_id, a.error);
            assert!(a.p_uniform.unwrap() > 0.0);
            assert!(a.reduction_factor.unwrap() > 0.0);
        }
    }

    #[test]
    fn masked_affine_target_renders_into_the_grammar_language() {
        let manifest = load_manifest("easy").unwrap();
        let affine = manifest.tasks.iter().find(|t| t.id == "affine").unwrap();
        let a = analyze_task(affine);
        assert_eq!(a.grammar_text.as_deref(), Some("c+c*x"));
    }

    #[test]
    fn schema_accepts_real_reports_and_rejects_mutants() {
        let manifest = Manifest {
            tasks: load_manifest("easy").unwrap().tasks[..2].to_vec(),
        };
        let settings = Settings {
            runs: 1,
            ..Settings::default()
        };
        let outcome = run_benchmark(
            &manifest,
            "uniform_universal",
            &settings,
            SampleBudget::Fixed(50),
            false,
        );
        let value = serde_json::to_value(&outcome.report).unwrap();
        validate_report(&value).unwrap();

        let mut missing = value.clone();
        missing.as_object_mut().unwrap().remove("rows");
        assert!(validate_report(&missing).is_err());

        let mut wrong_type = value.clone();
        wrong_type["rows"][0]["task_id"] = Value::from(7);
        assert!(validate_report(&wrong_type).is_err());

        let mut wrong_version = value;
        wrong_version["schema_version"] = Value::from(99);
        assert!(validate_report(&wrong_version).is_err());
    }

    #[test]
    fn sample_grid_is_increasing() {
        let grid = sample_grid();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(grid.first(), Some(&1));
        assert_eq!(grid.last(), Some(&100_000_000));
    }
}
