//! Scoring candidate equations against data and fitting their constants.
//!
//! A candidate equation is judged by its *relative root-mean-square
//! error* (ReRMSE): the RMS of its residuals divided by the population
//! standard deviation of the target column. The normalization makes
//! scores comparable across targets of different scales and gives a
//! natural baseline — predicting the target's mean everywhere scores
//! exactly 1, so anything below 1 has learned structure.
//!
//! Candidates usually contain free constants. Because canonicalization
//! reduces every constant-only subtree to a single parameter, the
//! fitted expressions are small, but the objective is still non-convex in
//! general (constants can sit inside `sin`, `exp`, divisions, …), so
//! constants are estimated with differential evolution — the classic
//! `DE/rand/1/bin` scheme with greedy selection — rather than a local
//! least-squares step. Runs are fully deterministic given the seed in
//! [`FitConfig`]; non-finite objective values (domain violations during
//! search) are treated as infinitely bad rather than as errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{compile, CanonicalForm, CompiledExpression, Expression};

/// Errors constructing datasets or validating fit inputs.
#[derive(Debug, Error)]
pub enum FitError {
    /// A dataset needs at least one column.
    #[error("dataset has no columns")]
    NoColumns,
    /// Two columns share a name, making variable binding ambiguous.
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    /// The declared target column does not exist.
    #[error("target column '{0}' not found")]
    UnknownTarget(String),
    /// Fewer than two observations.
    #[error("dataset has {0} rows; at least 2 are required")]
    TooFewRows(usize),
    /// A row's length disagrees with the column count.
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow {
        /// Index of the offending row.
        row: usize,
        /// Number of columns declared.
        expected: usize,
        /// Number of values found.
        got: usize,
    },
    /// A NaN or infinite value in the data.
    #[error("non-finite value at row {row}, column '{column}'")]
    NonFiniteValue {
        /// Index of the offending row.
        row: usize,
        /// Name of the offending column.
        column: String,
    },
    /// The target column is constant, so relative error is undefined.
    #[error("target column '{0}' has zero variance")]
    ConstantTarget(String),
    /// Parameter vector length differs from the expression's count.
    #[error("expression takes {expected} parameters, got {got}")]
    ArityMismatch {
        /// Parameters the expression expects.
        expected: usize,
        /// Parameters supplied.
        got: usize,
    },
    /// The expression mentions a variable the dataset lacks, or the
    /// target itself.
    #[error("expression variable '{0}' is not an input column")]
    VariableMismatch(String),
    /// A [`FitConfig`] field is out of its legal range.
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
}

/// An observation table: named columns, rows of floats, and one column
/// designated as the target to be explained by the others.
///
/// Construction validates shape and content: at least two rows, no
/// missing or non-finite values, and a non-constant target (the relative
/// error normalizes by the target's spread, so a constant target would
/// make every score infinite).
#[derive(Clone, Debug)]
pub struct Dataset {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    target_index: usize,
    target_mean: f64,
    target_std: f64,
}

impl Dataset {
    /// Builds and validates a dataset. `names` orders the columns of each
    /// row; `target` names the column to be predicted.
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        target: impl Into<String>,
    ) -> Result<Dataset, FitError> {
        if names.is_empty() {
            return Err(FitError::NoColumns);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(FitError::DuplicateColumn(name.clone()));
            }
        }
        let target = target.into();
        let target_index = names
            .iter()
            .position(|n| *n == target)
            .ok_or(FitError::UnknownTarget(target.clone()))?;
        if rows.len() < 2 {
            return Err(FitError::TooFewRows(rows.len()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(FitError::RaggedRow {
                    row: i,
                    expected: names.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(FitError::NonFiniteValue {
                    row: i,
                    column: names[j].clone(),
                });
            }
        }
        let len = rows.len() as f64;
        let target_mean = rows.iter().map(|r| r[target_index]).sum::<f64>() / len;
        let variance = rows
            .iter()
            .map(|r| {
                let d = r[target_index] - target_mean;
                d * d
            })
            .sum::<f64>()
            / len;
        let target_std = variance.sqrt();
        if target_std <= 0.0 {
            return Err(FitError::ConstantTarget(target));
        }
        Ok(Dataset {
            names,
            rows,
            target_index,
            target_mean,
            target_std,
        })
    }

    /// All column names, in row order (including the target).
    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    /// Name of the target column.
    pub fn target_name(&self) -> &str {
        &self.names[self.target_index]
    }

    /// Position of the target column within each row.
    pub fn target_index(&self) -> usize {
        self.target_index
    }

    /// The observation rows, in column order.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Always false: construction requires at least two rows.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Mean of the target column.
    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    /// Population standard deviation of the target column (divisor n).
    pub fn target_std(&self) -> f64 {
        self.target_std
    }
}

/// Differential-evolution settings. All fields have conventional
/// defaults and every one can be overridden from a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Population size per parameter dimension; the population is
    /// `max(population_factor × dimension, 15)`.
    pub population_factor: usize,
    /// Differential weight F applied to the difference vector; in (0, 2).
    pub mutation_factor: f64,
    /// Binomial crossover rate CR; in (0, 1).
    pub crossover_rate: f64,
    /// Hard cap on generations.
    pub max_generations: usize,
    /// Search interval applied to every parameter.
    pub bounds: (f64, f64),
    /// Stop after this many generations without an improvement greater
    /// than 1e-12.
    pub stagnation_window: usize,
    /// Stop as soon as the best error reaches this value.
    pub target_error: f64,
    /// Seed for the run's private random stream; identical settings and
    /// seed reproduce the result bit for bit.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> FitConfig {
        FitConfig {
            population_factor: 10,
            mutation_factor: 0.6,
            crossover_rate: 0.9,
            max_generations: 1000,
            bounds: (-10.0, 10.0),
            stagnation_window: 100,
            target_error: 1e-12,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<(), FitError> {
        if self.population_factor == 0 {
            return Err(FitError::InvalidConfig(
                "population_factor must be positive".into(),
            ));
        }
        if !(self.mutation_factor > 0.0 && self.mutation_factor < 2.0) {
            return Err(FitError::InvalidConfig(
                "mutation_factor must lie in (0, 2)".into(),
            ));
        }
        if !(self.crossover_rate > 0.0 && self.crossover_rate < 1.0) {
            return Err(FitError::InvalidConfig(
                "crossover_rate must lie in (0, 1)".into(),
            ));
        }
        if self.max_generations == 0 {
            return Err(FitError::InvalidConfig(
                "max_generations must be positive".into(),
            ));
        }
        if self.stagnation_window == 0 {
            return Err(FitError::InvalidConfig(
                "stagnation_window must be positive".into(),
            ));
        }
        let (low, high) = self.bounds;
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(FitError::InvalidConfig(
                "bounds must be a finite interval with low < high".into(),
            ));
        }
        if !(self.target_error >= 0.0 && self.target_error.is_finite()) {
            return Err(FitError::InvalidConfig(
                "target_error must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one constant-fitting run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    /// Best parameter vector found (empty for parameter-free candidates).
    pub params: Vec<f64>,
    /// ReRMSE of `params`; `+∞` when every evaluation was non-finite.
    pub error: f64,
    /// Number of objective evaluations performed.
    pub evaluations: u64,
    /// True when the run stopped because the target error was reached or
    /// the search stagnated at an optimum; false when the generation cap
    /// ran out while the search was still improving.
    pub converged: bool,
}

/// Relative root-mean-square error of `e` with the given constants on
/// `d`: RMS residual (population mean) divided by the target column's
/// population standard deviation.
///
/// Non-finite predictions make the result `+∞`. The parameter vector
/// length must equal the expression's parameter count, and every
/// variable of `e` must be a non-target column of `d`.
pub fn rermse(e: &Expression, params: &[f64], d: &Dataset) -> Result<f64, FitError> {
    let objective = Objective::build(e, d)?;
    let expected = objective.n_parameters;
    if params.len() != expected {
        return Err(FitError::ArityMismatch {
            expected,
            got: params.len(),
        });
    }
    let mut stack = Vec::new();
    Ok(objective.score(params, &mut stack))
}

/// Fits a canonicalized candidate's constants to `d` by minimizing
/// ReRMSE with `DE/rand/1/bin`.
///
/// Parameter-free candidates are scored directly without optimization.
/// Greedy selection guarantees the reported error is never worse than
/// the best initial population member; identical inputs and seed
/// reproduce the result exactly.
pub fn fit_parameters(
    c: &CanonicalForm,
    d: &Dataset,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    cfg.validate()?;
    let objective = Objective::build(&c.expr, d)?;
    let dim = objective.n_parameters;
    let mut stack = Vec::new();

    if dim == 0 {
        let error = objective.score(&[], &mut stack);
        return Ok(FitResult {
            params: Vec::new(),
            error,
            evaluations: 1,
            converged: error <= cfg.target_error,
        });
    }

    let np = (cfg.population_factor * dim).max(15);
    let (low, high) = cfg.bounds;
    let span = high - low;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut population: Vec<Vec<f64>> = (0..np)
        .map(|_| (0..dim).map(|_| low + rng.gen::<f64>() * span).collect())
        .collect();
    let mut scores: Vec<f64> = population
        .iter()
        .map(|p| objective.score(p, &mut stack))
        .collect();
    let mut evaluations = np as u64;

    let mut best = 0;
    for i in 1..np {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    let mut best_error = scores[best];
    let mut best_params = population[best].clone();

    let mut converged = best_error <= cfg.target_error;
    let mut last_improvement = 0usize;
    let mut trial = vec![0.0; dim];

    if !converged {
        for generation in 0..cfg.max_generations {
            for i in 0..np {
                let r1 = pick_index(&mut rng, np, &[i]);
                let r2 = pick_index(&mut rng, np, &[i, r1]);
                let r3 = pick_index(&mut rng, np, &[i, r1, r2]);
                let forced = rng.gen_range(0..dim);
                for j in 0..dim {
                    let mutated = population[r1][j]
                        + cfg.mutation_factor * (population[r2][j] - population[r3][j]);
                    let crossed = rng.gen::<f64>() < cfg.crossover_rate || j == forced;
                    trial[j] = if crossed {
                        mutated.clamp(low, high)
                    } else {
                        population[i][j]
                    };
                }
                let trial_score = objective.score(&trial, &mut stack);
                evaluations += 1;
                if trial_score <= scores[i] {
                    population[i].copy_from_slice(&trial);
                    scores[i] = trial_score;
                    if trial_score < best_error {
                        if best_error - trial_score > 1e-12 {
                            last_improvement = generation;
                        }
                        best_error = trial_score;
                        best_params.copy_from_slice(&trial);
                    }
                }
            }
            if best_error <= cfg.target_error {
                converged = true;
                break;
            }
            if generation - last_improvement >= cfg.stagnation_window {
                converged = true;
                break;
            }
        }
    }

    Ok(FitResult {
        params: best_params,
        error: best_error,
        evaluations,
        converged,
    })
}

fn pick_index(rng: &mut ChaCha8Rng, np: usize, exclude: &[usize]) -> usize {
    loop {
        let k = rng.gen_range(0..np);
        if !exclude.contains(&k) {
            return k;
        }
    }
}

/// A compiled scoring context: expression, rows, and normalization,
/// reused across the many evaluations of one fit.
struct Objective<'d> {
    compiled: CompiledExpression,
    rows: &'d [Vec<f64>],
    target_index: usize,
    target_std: f64,
    n_parameters: usize,
}

impl<'d> Objective<'d> {
    fn build(e: &Expression, d: &'d Dataset) -> Result<Objective<'d>, FitError> {
        let target = d.target_name();
        for name in e.variable_names() {
            if name == target {
                return Err(FitError::VariableMismatch(name.to_string()));
            }
        }
        let compiled = compile(e, d.column_names()).map_err(|_| {
            let missing = e
                .variable_names()
                .into_iter()
                .find(|n| !d.column_names().iter().any(|c| c == n))
                .unwrap_or_default();
            FitError::VariableMismatch(missing.to_string())
        })?;
        let n_parameters = e.max_parameter_index().map_or(0, |i| i + 1);
        Ok(Objective {
            compiled,
            rows: d.rows(),
            target_index: d.target_index(),
            target_std: d.target_std(),
            n_parameters,
        })
    }

    fn score(&self, params: &[f64], stack: &mut Vec<f64>) -> f64 {
        let mut acc = 0.0;
        for row in self.rows {
            let predicted = self.compiled.eval_with(row, params, stack);
            if !predicted.is_finite() {
                return f64::INFINITY;
            }
            let residual = row[self.target_index] - predicted;
            acc += residual * residual;
        }
        let value = (acc / self.rows.len() as f64).sqrt() / self.target_std;
        if value.is_finite() {
            value
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canonicalize, mask_constants, parse_expression};

    fn xy_dataset(f: impl Fn(f64) -> f64, n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (1..=n)
            .map(|i| {
                let x = i as f64;
                vec![x, f(x)]
            })
            .collect();
        Dataset::new(vec!["x".into(), "v".into()], rows, "v").unwrap()
    }

    fn masked(text: &str) -> CanonicalForm {
        let e = parse_expression(text).unwrap();
        canonicalize(&mask_constants(&e))
    }

    #[test]
    fn dataset_validation() {
        let names = vec!["x".to_string(), "v".to_string()];
        assert!(matches!(
            Dataset::new(vec![], vec![], "v"),
            Err(FitError::NoColumns)
        ));
        assert!(matches!(
            Dataset::new(names.clone(), vec![vec![1.0, 2.0]], "v"),
            Err(FitError::TooFewRows(1))
        ));
        assert!(matches!(
            Dataset::new(names.clone(), vec![vec![1.0, 2.0], vec![1.0]], "v"),
            Err(FitError::RaggedRow { row: 1, .. })
        ));
        assert!(matches!(
            Dataset::new(
                names.clone(),
                vec![vec![1.0, 2.0], vec![1.0, f64::NAN]],
                "v"
            ),
            Err(FitError::NonFiniteValue { row: 1, .. })
        ));
        assert!(matches!(
            Dataset::new(names.clone(), vec![vec![1.0, 2.0], vec![2.0, 2.0]], "v"),
            Err(FitError::ConstantTarget(_))
        ));
        assert!(matches!(
            Dataset::new(names.clone(), vec![vec![1.0, 2.0], vec![2.0, 3.0]], "w"),
            Err(FitError::UnknownTarget(_))
        ));
        assert!(matches!(
            Dataset::new(
                vec!["x".into(), "x".into()],
                vec![vec![1.0, 2.0], vec![2.0, 3.0]],
                "x"
            ),
            Err(FitError::DuplicateColumn(_))
        ));
    }

    #[test]
    fn rermse_reference_values() {
        let d = Dataset::new(
            vec!["x".into(), "v".into()],
            vec![vec![1.0, 0.0], vec![2.0, 2.0]],
            "v",
        )
        .unwrap();
        // Predicting the constant 1 (the mean): RMSE 1, σ_v 1 → exactly 1.
        let one = parse_expression("1").unwrap();
        assert_eq!(rermse(&one, &[], &d).unwrap(), 1.0);
        // A perfect model scores zero.
        let perfect = parse_expression("2*x - 2").unwrap();
        assert_eq!(rermse(&perfect, &[], &d).unwrap(), 0.0);
    }

    #[test]
    fn constant_mean_predictor_scores_exactly_one() {
        let d = xy_dataset(|x| 3.0 * x * x - 7.0, 13);
        let mean = Expression::Literal(crate::expr::Number::Float(d.target_mean()));
        assert_eq!(rermse(&mean, &[], &d).unwrap(), 1.0);
    }

    #[test]
    fn non_finite_predictions_score_infinite() {
        let d = Dataset::new(
            vec!["x".into(), "v".into()],
            vec![vec![-1.0, 1.0], vec![4.0, 2.0]],
            "v",
        )
        .unwrap();
        let e = parse_expression("sqrt(x)").unwrap();
        assert_eq!(rermse(&e, &[], &d).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rermse_validates_arity_and_variables() {
        let d = xy_dataset(|x| x + 1.0, 5);
        let e = masked("2*x").expr;
        assert!(matches!(
            rermse(&e, &[], &d),
            Err(FitError::ArityMismatch {
                expected: 1,
                got: 0
            })
        ));
        let unknown = parse_expression("z + x").unwrap();
        assert!(matches!(
            rermse(&unknown, &[], &d),
            Err(FitError::VariableMismatch(name)) if name == "z"
        ));
        let target = parse_expression("v").unwrap();
        assert!(matches!(
            rermse(&target, &[], &d),
            Err(FitError::VariableMismatch(name)) if name == "v"
        ));
    }

    #[test]
    fn normalization_is_scale_invariant_for_linear_models() {
        let noise = [0.3, -0.2, 0.5, -0.4, 0.1, 0.2, -0.3, 0.4];
        let base: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let x = (i + 1) as f64;
                vec![x, 0.5 * x + noise[i]]
            })
            .collect();
        let scaled: Vec<Vec<f64>> = base
            .iter()
            .map(|r| vec![r[0], 10.0 * r[1]])
            .collect();
        let d1 = Dataset::new(vec!["x".into(), "v".into()], base, "v").unwrap();
        let d2 = Dataset::new(vec!["x".into(), "v".into()], scaled, "v").unwrap();
        let model = masked("0.9*x").expr;
        for theta in [-2.0, -0.5, 0.0, 0.5, 0.7, 3.0] {
            let a = rermse(&model, &[theta], &d1).unwrap();
            let b = rermse(&model, &[10.0 * theta], &d2).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn fitting_a_lone_constant_finds_the_mean() {
        let d = Dataset::new(
            vec!["x".into(), "v".into()],
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 6.0]],
            "v",
        )
        .unwrap();
        let form = masked("0.5");
        assert_eq!(form.n_parameters, 1);
        let result = fit_parameters(&form, &d, &FitConfig::default()).unwrap();
        assert!((result.params[0] - 3.0).abs() < 1e-6, "{:?}", result.params);
    }

    #[test]
    fn fitting_recovers_linear_coefficients() {
        let d = xy_dataset(|x| 2.0 * x, 10);
        let form = masked("0.9*x");
        let result = fit_parameters(&form, &d, &FitConfig::default()).unwrap();
        assert!((result.params[0] - 2.0).abs() < 1e-6);
        assert!(result.error < 1e-9);
        assert!(result.converged);

        let d = xy_dataset(|x| 2.0 * x + 5.0, 10);
        let form = masked("0.9*x + 0.1");
        assert_eq!(form.key, "C0+C1*x");
        let result = fit_parameters(&form, &d, &FitConfig::default()).unwrap();
        assert!((result.params[0] - 5.0).abs() < 1e-5, "{:?}", result.params);
        assert!((result.params[1] - 2.0).abs() < 1e-5, "{:?}", result.params);
    }

    #[test]
    fn parameter_free_candidates_bypass_optimization() {
        let d = xy_dataset(|x| x, 6);
        let form = canonicalize(&parse_expression("x").unwrap());
        let result = fit_parameters(&form, &d, &FitConfig::default()).unwrap();
        assert_eq!(result.evaluations, 1);
        assert_eq!(result.error, 0.0);
        assert!(result.converged);
        assert!(result.params.is_empty());
    }

    #[test]
    fn fits_are_deterministic_by_seed() {
        let d = xy_dataset(|x| (0.7 * x).sin() * 3.0, 24);
        let form = masked("0.9*sin(0.8*x)");
        let cfg = FitConfig {
            max_generations: 120,
            ..FitConfig::default()
        };
        let a = fit_parameters(&form, &d, &cfg).unwrap();
        let b = fit_parameters(&form, &d, &cfg).unwrap();
        assert_eq!(a.error.to_bits(), b.error.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
        let bits =
            |params: &[f64]| params.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.params), bits(&b.params));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let d = xy_dataset(|x| x, 4);
        let form = masked("0.5*x");
        for bad in [
            FitConfig {
                mutation_factor: 2.5,
                ..FitConfig::default()
            },
            FitConfig {
                crossover_rate: 0.0,
                ..FitConfig::default()
            },
            FitConfig {
                bounds: (3.0, 3.0),
                ..FitConfig::default()
            },
            FitConfig {
                population_factor: 0,
                ..FitConfig::default()
            },
        ] {
            assert!(matches!(
                fit_parameters(&form, &d, &bad),
                Err(FitError::InvalidConfig(_))
            ));
        }
    }
}
