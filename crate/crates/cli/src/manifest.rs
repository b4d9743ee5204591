//! Benchmark manifests: named regression targets with sampling ranges,
//! and deterministic synthetic dataset generation from them.
//!
//! A manifest is a JSON document:
//!
//! ```json
//! {
//!   "tasks": [
//!     {
//!       "id": "add",
//!       "target": "x+y",
//!       "variables": [
//!         { "name": "x", "low": 1.0, "high": 5.0 },
//!         { "name": "y", "low": 1.0, "high": 5.0 }
//!       ],
//!       "n_rows": 50,
//!       "data_seed": 1
//!     }
//!   ]
//! }
//! ```
//!
//! Three manifests ship inside the binary and can be named instead of a
//! path: `easy` (core reconstruction targets), `feynman` (a curated set of
//! physics equations expressible with the default operator set), and
//! `extended` (targets needing `tanh`/`arcsin`/`log`, for use with an
//! extended grammar such as the bundled `extended_grammar.txt`).

use crate::error::{io_error, CliError};
use eqgram::expr::{evaluate, parse_expression, Expression};
use eqgram::fit::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

/// The target column synthesized datasets use.
pub const TARGET_COLUMN: &str = "v";

/// How many times `n_rows` draws may be attempted before a target whose
/// domain keeps producing non-finite values is declared infeasible.
pub const MAX_OVERSAMPLING: usize = 100;

/// One input variable and the interval its values are drawn from.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct VariableSpec {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

/// One benchmark task: a ground-truth expression plus everything needed
/// to synthesize a dataset for it.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct BenchmarkTask {
    /// Unique short name; report rows reference it.
    pub id: String,
    /// Ground-truth infix expression over the declared variables.
    pub target: String,
    /// Input variables in dataset column order.
    pub variables: Vec<VariableSpec>,
    /// Rows to synthesize.
    pub n_rows: usize,
    /// Seed of the task's private data-generation stream.
    pub data_seed: u64,
}

/// A parsed and validated collection of tasks.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Manifest {
    pub tasks: Vec<BenchmarkTask>,
}

const EASY: &str = include_str!("../data/easy.json");
const FEYNMAN: &str = include_str!("../data/feynman.json");
const EXTENDED: &str = include_str!("../data/extended.json");

/// Loads a manifest from a built-in name (`easy`, `feynman`, `extended`)
/// or a file path, then validates it.
pub fn load_manifest(source: &str) -> Result<Manifest, CliError> {
    let (text, origin) = match source {
        "easy" => (EASY.to_string(), "built-in manifest 'easy'".to_string()),
        "feynman" => (FEYNMAN.to_string(), "built-in manifest 'feynman'".to_string()),
        "extended" => (EXTENDED.to_string(), "built-in manifest 'extended'".to_string()),
        path => {
            let p = Path::new(path);
            (
                std::fs::read_to_string(p).map_err(|e| io_error(p, e))?,
                path.to_string(),
            )
        }
    };
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
    validate(&manifest, &origin)?;
    Ok(manifest)
}

fn validate(manifest: &Manifest, origin: &str) -> Result<(), CliError> {
    if manifest.tasks.is_empty() {
        return Err(CliError::Data(format!("{origin}: manifest has no tasks")));
    }
    let mut seen_ids = std::collections::BTreeSet::new();
    for task in &manifest.tasks {
        let fail = |msg: String| CliError::Data(format!("{origin}: task '{}': {msg}", task.id));
        if task.id.is_empty() {
            return Err(CliError::Data(format!("{origin}: a task has an empty id")));
        }
        if !seen_ids.insert(task.id.clone()) {
            return Err(fail("duplicate id".into()));
        }
        if task.n_rows == 0 {
            return Err(fail("n_rows must be positive".into()));
        }
        if task.variables.is_empty() {
            return Err(fail("needs at least one variable".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for var in &task.variables {
            if var.name == TARGET_COLUMN {
                return Err(fail(format!(
                    "variable name '{TARGET_COLUMN}' is reserved for the target column"
                )));
            }
            if !names.insert(var.name.clone()) {
                return Err(fail(format!("duplicate variable '{}'", var.name)));
            }
            if !(var.low.is_finite() && var.high.is_finite() && var.low < var.high) {
                return Err(fail(format!(
                    "variable '{}' has a degenerate range [{}, {}]",
                    var.name, var.low, var.high
                )));
            }
        }
        let expr = parse_target(task).map_err(|e| fail(e.to_string()))?;
        for used in expr.variable_names() {
            if !names.contains(&used) {
                return Err(fail(format!("target uses undeclared variable '{used}'")));
            }
        }
    }
    Ok(())
}

/// Parses a task's ground-truth expression.
pub fn parse_target(task: &BenchmarkTask) -> Result<Expression, CliError> {
    parse_expression(&task.target)
        .map_err(|e| CliError::Data(format!("task '{}': target '{}': {e}", task.id, task.target)))
}

/// Synthesizes the task's dataset: `n_rows` independent uniform draws per
/// variable, target evaluated exactly, no noise added.
///
/// Rows where the target comes out non-finite (outside the expression's
/// domain) are rejected and redrawn; after [`MAX_OVERSAMPLING`]` * n_rows`
/// attempts the task is declared domain-infeasible. Generation is a pure
/// function of the task, byte for byte.
pub fn generate_dataset(task: &BenchmarkTask) -> Result<Dataset, CliError> {
    let expr = parse_target(task)?;
    let mut rng = ChaCha8Rng::seed_from_u64(task.data_seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(task.n_rows);
    let mut bindings: HashMap<String, f64> = HashMap::new();
    let mut attempts = 0usize;
    let budget = MAX_OVERSAMPLING * task.n_rows;
    while rows.len() < task.n_rows {
        if attempts >= budget {
            return Err(CliError::Data(format!(
                "task '{}': target '{}' produced non-finite values for {budget} straight draws; \
                 the declared ranges lie outside its domain",
                task.id, task.target
            )));
        }
        attempts += 1;
        let mut row: Vec<f64> = Vec::with_capacity(task.variables.len() + 1);
        for var in &task.variables {
            let value = rng.gen_range(var.low..var.high);
            bindings.insert(var.name.clone(), value);
            row.push(value);
        }
        let target = evaluate(&expr, &bindings, &[]).unwrap_or(f64::NAN);
        if !target.is_finite() {
            continue;
        }
        row.push(target);
        rows.push(row);
    }
    let mut columns: Vec<String> = task.variables.iter().map(|v| v.name.clone()).collect();
    columns.push(TARGET_COLUMN.to_string());
    Dataset::new(columns, rows, TARGET_COLUMN).map_err(Into::into)
}

/// Input column names of a task's dataset, in order.
pub fn task_variables(task: &BenchmarkTask) -> Vec<String> {
    task.variables.iter().map(|v| v.name.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(target: &str, low: f64, high: f64) -> BenchmarkTask {
        BenchmarkTask {
            id: "toy".into(),
            target: target.into(),
            variables: vec![VariableSpec {
                name: "x".into(),
                low,
                high,
            }],
            n_rows: 25,
            data_seed: 9,
        }
    }

    #[test]
    fn generation_is_exact_and_deterministic() {
        let task = BenchmarkTask {
            id: "add".into(),
            target: "x+y".into(),
            variables: vec![
                VariableSpec { name: "x".into(), low: 1.0, high: 5.0 },
                VariableSpec { name: "y".into(), low: 1.0, high: 5.0 },
            ],
            n_rows: 100,
            data_seed: 1,
        };
        let a = generate_dataset(&task).unwrap();
        let b = generate_dataset(&task).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a.column_names(), ["x", "y", "v"]);
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            assert_eq!(ra[0].to_bits(), rb[0].to_bits());
            assert_eq!(ra[2].to_bits(), rb[2].to_bits());
            assert_eq!(ra[2], ra[0] + ra[1]);
        }
    }

    #[test]
    fn always_negative_radicand_is_infeasible() {
        let err = generate_dataset(&toy("sqrt(x-10)", 1.0, 5.0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("domain"));
    }

    #[test]
    fn reciprocal_stays_finite_on_a_positive_range() {
        let d = generate_dataset(&toy("1/x", 1.0, 5.0)).unwrap();
        assert_eq!(d.len(), 25);
        assert!(d.rows().iter().all(|r| r[1].is_finite()));
    }

    #[test]
    fn partial_domains_reject_and_redraw() {
        // log(x - 2) is finite only for x > 2, about half the range; the
        // generator must still assemble a full dataset.
        let d = generate_dataset(&toy("log(x-2)", 1.0, 5.0)).unwrap();
        assert_eq!(d.len(), 25);
        assert!(d.rows().iter().all(|r| r[0] > 2.0));
    }

    #[test]
    fn built_in_manifests_validate() {
        assert!(load_manifest("easy").unwrap().tasks.len() >= 10);
        assert!(load_manifest("feynman").unwrap().tasks.len() >= 20);
        assert!(!load_manifest("extended").unwrap().tasks.is_empty());
    }

    #[test]
    fn bad_manifests_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let write = |body: &str| std::fs::write(&path, body).unwrap();

        write(r#"{"tasks": []}"#);
        assert_eq!(
            load_manifest(path.to_str().unwrap()).unwrap_err().exit_code(),
            2
        );

        write(
            r#"{"tasks": [{"id": "t", "target": "x+", "variables":
               [{"name": "x", "low": 1, "high": 5}], "n_rows": 10, "data_seed": 1}]}"#,
        );
        assert_eq!(
            load_manifest(path.to_str().unwrap()).unwrap_err().exit_code(),
            2
        );

        write(
            r#"{"tasks": [{"id": "t", "target": "x", "variables":
               [{"name": "x", "low": 5, "high": 5}], "n_rows": 10, "data_seed": 1}]}"#,
        );
        assert_eq!(
            load_manifest(path.to_str().unwrap()).unwrap_err().exit_code(),
            2
        );

        write(
            r#"{"tasks": [{"id": "t", "target": "x+q", "variables":
               [{"name": "x", "low": 1, "high": 5}], "n_rows": 10, "data_seed": 1}]}"#,
        );
        assert_eq!(
            load_manifest(path.to_str().unwrap()).unwrap_err().exit_code(),
            2
        );
    }
}
