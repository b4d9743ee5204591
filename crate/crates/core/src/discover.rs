//! The Monte-Carlo discovery loop: sample, canonicalize, deduplicate,
//! fit, rank.
//!
//! Equation discovery here is rejection-free guess-and-check: draw N
//! parse trees from the grammar, turn each into an expression, and score
//! it against the data. Two layers of deduplication make this efficient
//! and measurable. Trees are deduplicated by *derivation identity* (the
//! sequence of rules used), and the probability mass of the distinct
//! trees seen is the achieved coverage — how much of the grammar's
//! distribution the run actually explored. Expressions are deduplicated
//! by *canonical key*, and each distinct key is fitted only once, no
//! matter how many sampled trees spelled it differently.
//!
//! A candidate whose canonical form needs more than a configured number
//! of fitted constants is kept in the result but marked inadmissible
//! with infinite error instead of being fitted. The run succeeds when
//! any candidate's fitted error falls below the success threshold.
//!
//! Everything is deterministic: sampling uses per-index random streams,
//! each candidate's fit is seeded from a hash of its key, and the final
//! ordering is a strict total order, so identical inputs give
//! byte-identical serialized results. Wall time is recorded for display
//! but excluded from serialization for that reason.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{canonicalize, tree_to_expression, CanonicalForm, Expression, ExprError, FuncKind};
use crate::fit::{fit_parameters, Dataset, FitConfig, FitError};
use crate::grammar::Pcfg;
use crate::sample::{sample_many, ParseTree, SampleError, DEFAULT_MAX_EXPANSIONS};

/// Errors from discovery runs and resampling.
#[derive(Debug, Error)]
pub enum DiscoverError {
    /// The grammar can generate the target variable itself, which would
    /// let candidates trivially "explain" the target with the target.
    #[error("grammar terminal '{0}' names the dataset's target variable")]
    TargetInGrammar(String),
    /// A grammar variable has no matching dataset column, so candidates
    /// using it could never be evaluated.
    #[error("grammar variable '{0}' is not a dataset column")]
    VariableNotInData(String),
    /// A configuration field is out of range.
    #[error("invalid discovery configuration: {0}")]
    InvalidConfig(String),
    /// Invalid resampling input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Sampling failed (unproductive grammar, budget too small, …).
    #[error(transparent)]
    Sample(#[from] SampleError),
    /// A sampled tree could not be read as an expression.
    #[error(transparent)]
    Expr(#[from] ExprError),
    /// Constant fitting failed a precondition.
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Settings for one discovery run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    /// Number of raw samples to draw. Zero is allowed and produces an
    /// empty (unsuccessful) result.
    pub n_samples: usize,
    /// Master seed for the sampling streams.
    pub seed: u64,
    /// Candidates with more fitted constants than this are marked
    /// inadmissible (infinite error) instead of being fitted.
    pub max_parameters: usize,
    /// A run succeeds when some candidate's error is strictly below this.
    pub success_threshold: f64,
    /// Per-sample budget of nonterminal expansions.
    pub max_expansions: u64,
    /// Constant-fitting settings; each candidate's fit derives its own
    /// seed from this seed and the candidate's key.
    pub fit: FitConfig,
}

impl Default for DiscoveryConfig {
    fn default() -> DiscoveryConfig {
        DiscoveryConfig {
            n_samples: 10_000,
            seed: 0,
            max_parameters: 5,
            success_threshold: 1e-9,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            fit: FitConfig::default(),
        }
    }
}

impl DiscoveryConfig {
    fn validate(&self) -> Result<(), DiscoverError> {
        if self.max_parameters == 0 {
            return Err(DiscoverError::InvalidConfig(
                "max_parameters must be positive".into(),
            ));
        }
        if !(self.success_threshold >= 0.0 && self.success_threshold.is_finite()) {
            return Err(DiscoverError::InvalidConfig(
                "success_threshold must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// One distinct candidate equation discovered in a run.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateEquation {
    /// Canonical key — the deduplication identity.
    pub key: String,
    /// Canonical expression, with `C{i}` placeholders for constants.
    #[serde(skip)]
    pub expression: Expression,
    /// Number of free constants in the canonical form.
    pub n_parameters: usize,
    /// Fitted constants (empty for parameter-free or inadmissible
    /// candidates).
    pub params: Vec<f64>,
    /// ReRMSE with the fitted constants; `+∞` for inadmissible
    /// candidates and for candidates that never evaluate finitely.
    pub error: f64,
    /// Summed probability of the distinct sampled trees that mapped to
    /// this key.
    pub generation_probability: f64,
    /// How many of the raw samples mapped to this key.
    pub sample_multiplicity: u64,
}

/// Full outcome of one discovery run.
#[derive(Clone, Debug, Serialize)]
pub struct DiscoveryResult {
    /// Candidates sorted by (error ascending, generation probability
    /// descending, key ascending).
    pub candidates: Vec<CandidateEquation>,
    /// Raw samples drawn.
    pub n_raw_samples: usize,
    /// Distinct canonical keys among them.
    pub n_unique: usize,
    /// Total probability of the distinct sampled trees.
    pub coverage_achieved: f64,
    /// Over-budget attempts discarded and redrawn during sampling.
    pub n_discarded: u64,
    /// Whether any candidate scored strictly below the success threshold.
    pub success: bool,
    /// Wall-clock duration of the run; excluded from serialization so
    /// identical runs serialize identically.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Runs the full discovery loop on one dataset.
///
/// Grammar and dataset must be compatible: every variable the grammar
/// can generate must be a dataset column, and the grammar must not
/// contain the target variable (extra dataset columns the grammar never
/// uses are fine).
pub fn mc_gbed(
    g: &Pcfg,
    d: &Dataset,
    cfg: &DiscoveryConfig,
) -> Result<DiscoveryResult, DiscoverError> {
    let started = Instant::now();
    cfg.validate()?;
    check_compatibility(g, d)?;

    let (accums, coverage, n_discarded, n_raw) =
        collect_candidates(g, cfg.n_samples, cfg.seed, cfg.max_expansions)?;
    let n_unique = accums.len();

    let mut candidates = accums
        .into_par_iter()
        .map(|(key, accum)| {
            let n_parameters = accum.form.n_parameters;
            let (params, error) = if n_parameters > cfg.max_parameters {
                (Vec::new(), f64::INFINITY)
            } else {
                let fit_cfg = FitConfig {
                    seed: fnv1a_64(key.as_bytes()) ^ cfg.fit.seed,
                    ..cfg.fit.clone()
                };
                let fit = fit_parameters(&accum.form, d, &fit_cfg)?;
                (fit.params, fit.error)
            };
            Ok(CandidateEquation {
                key,
                expression: accum.form.expr,
                n_parameters,
                params,
                error,
                generation_probability: accum.generation_probability,
                sample_multiplicity: accum.multiplicity,
            })
        })
        .collect::<Result<Vec<_>, DiscoverError>>()?;

    candidates.sort_by(|a, b| {
        a.error
            .total_cmp(&b.error)
            .then_with(|| b.generation_probability.total_cmp(&a.generation_probability))
            .then_with(|| a.key.cmp(&b.key))
    });
    let success = candidates
        .first()
        .is_some_and(|c| c.error < cfg.success_threshold);

    Ok(DiscoveryResult {
        candidates,
        n_raw_samples: n_raw,
        n_unique,
        coverage_achieved: coverage,
        n_discarded,
        success,
        wall_time: started.elapsed(),
    })
}

/// Key statistics of a sampling run without any data fitting: what was
/// sampled, how much of it was distinct, and how much probability mass
/// the distinct trees carried.
#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    /// Raw samples drawn.
    pub n_raw_samples: usize,
    /// Distinct canonical keys among them.
    pub n_unique: usize,
    /// Total probability of the distinct sampled trees.
    pub coverage_achieved: f64,
    /// Over-budget attempts discarded and redrawn.
    pub n_discarded: u64,
    /// Per-key statistics, sorted by key.
    pub keys: Vec<KeyStats>,
}

/// Per-canonical-key sampling statistics.
#[derive(Clone, Debug, Serialize)]
pub struct KeyStats {
    /// Canonical key.
    pub key: String,
    /// Raw samples that mapped to this key.
    pub sample_multiplicity: u64,
    /// Summed probability of the distinct trees behind this key.
    pub generation_probability: f64,
}

/// Samples `n` trees and reports deduplication statistics without
/// fitting anything — the sampling half of the discovery loop.
pub fn sample_and_canonicalize(
    g: &Pcfg,
    n: usize,
    seed: u64,
    max_expansions: u64,
) -> Result<SampleSummary, DiscoverError> {
    let (accums, coverage, n_discarded, n_raw) = collect_candidates(g, n, seed, max_expansions)?;
    let n_unique = accums.len();
    let keys = accums
        .into_iter()
        .map(|(key, accum)| KeyStats {
            key,
            sample_multiplicity: accum.multiplicity,
            generation_probability: accum.generation_probability,
        })
        .collect();
    Ok(SampleSummary {
        n_raw_samples: n_raw,
        n_unique,
        coverage_achieved: coverage,
        n_discarded,
        keys,
    })
}

/// Accumulated statistics for one canonical key during deduplication.
struct Accum {
    form: CanonicalForm,
    multiplicity: u64,
    generation_probability: f64,
}

fn collect_candidates(
    g: &Pcfg,
    n: usize,
    seed: u64,
    max_expansions: u64,
) -> Result<(Vec<(String, Accum)>, f64, u64, usize), DiscoverError> {
    let batch = sample_many(g, n, seed, max_expansions)?;
    let n_raw = batch.outcomes.len();

    let converted = batch
        .outcomes
        .par_iter()
        .map(|outcome| {
            let expression = tree_to_expression(&outcome.tree, g)?;
            Ok((
                tree_signature(&outcome.tree),
                outcome.log_probability.exp(),
                canonicalize(&expression),
            ))
        })
        .collect::<Result<Vec<_>, ExprError>>()?;

    let mut seen_trees: HashSet<Vec<u32>> = HashSet::new();
    let mut accums: BTreeMap<String, Accum> = BTreeMap::new();
    let mut coverage = 0.0;
    for (signature, probability, form) in converted {
        let entry = accums.entry(form.key.clone()).or_insert_with(|| Accum {
            form,
            multiplicity: 0,
            generation_probability: 0.0,
        });
        entry.multiplicity += 1;
        if seen_trees.insert(signature) {
            coverage += probability;
            entry.generation_probability += probability;
        }
    }
    Ok((accums.into_iter().collect(), coverage, batch.discarded, n_raw))
}

fn check_compatibility(g: &Pcfg, d: &Dataset) -> Result<(), DiscoverError> {
    let target = d.target_name();
    for index in 0..g.symbols().len() {
        let id = crate::grammar::SymbolId::from_index(index);
        if !g.is_terminal(id) {
            continue;
        }
        let name = g.symbol_name(id).as_ref();
        if name == target {
            return Err(DiscoverError::TargetInGrammar(name.to_string()));
        }
        if is_variable_terminal(name) && !d.column_names().iter().any(|c| c == name) {
            return Err(DiscoverError::VariableNotInData(name.to_string()));
        }
    }
    Ok(())
}

/// A terminal stands for a dataset variable when it looks like an
/// identifier and is neither the constant placeholder `c` nor a known
/// function name.
fn is_variable_terminal(name: &str) -> bool {
    let starts_like_identifier = name
        .chars()
        .next()
        .is_some_and(|ch| ch.is_alphabetic() || ch == '_');
    starts_like_identifier && name != "c" && FuncKind::from_name(name).is_none()
}

/// Preorder sequence of rule indices — the derivation identity of a
/// tree under its grammar.
fn tree_signature(t: &ParseTree) -> Vec<u32> {
    let mut signature = Vec::new();
    let mut stack = vec![t];
    while let Some(node) = stack.pop() {
        if let Some(rule) = node.rule_index() {
            signature.push(rule as u32);
        }
        for child in node.children().iter().rev() {
            stack.push(child);
        }
    }
    signature
}

fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

// ---------------------------------------------------------------------------
// Resampling post-processor
// ---------------------------------------------------------------------------

/// One candidate as seen by the resampler: its generation probability
/// and whether it solved its task.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResampleCandidate {
    /// Positive sampling weight (the candidate's generation probability).
    pub probability: f64,
    /// Whether this candidate's fitted error beat the success threshold.
    pub success: bool,
}

/// Estimates how success probability grows with sample budget, by
/// repeatedly drawing probability-weighted orderings of each task's
/// distinct candidates.
///
/// For every repeat and task, the candidates are permuted by sequential
/// weighted sampling without replacement; entry `s` of the returned
/// curve is the fraction of (repeat, task) pairs whose first `s+1`
/// candidates contained a success. Tasks with fewer candidates than the
/// longest keep contributing their final success state to larger
/// prefixes, so the curve's last value is the plain success ratio.
pub fn resample_success_curve(
    tasks: &[Vec<ResampleCandidate>],
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>, DiscoverError> {
    if repeats == 0 {
        return Err(DiscoverError::InvalidInput(
            "repeats must be positive".into(),
        ));
    }
    for task in tasks {
        for candidate in task {
            if !(candidate.probability > 0.0 && candidate.probability.is_finite()) {
                return Err(DiscoverError::InvalidInput(format!(
                    "candidate probability {} is not positive and finite",
                    candidate.probability
                )));
            }
        }
    }
    let longest = tasks.iter().map(Vec::len).max().unwrap_or(0);
    if longest == 0 {
        return Ok(Vec::new());
    }

    let mut sums = vec![0.0f64; longest];
    for (task_index, task) in tasks.iter().enumerate() {
        for repeat in 0..repeats {
            let mut rng = resample_stream(seed, repeat as u64, task_index as u64);
            // Weighted permutation: order by -ln(u)/w ascending; the
            // smallest key is the draw a probability-proportional
            // selection would make first.
            let mut order: Vec<(f64, usize)> = task
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    (-u.ln() / c.probability, i)
                })
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

            let mut hit = 0.0;
            for (prefix, &(_, i)) in order.iter().enumerate() {
                if task[i].success {
                    hit = 1.0;
                }
                sums[prefix] += hit;
            }
            for slot in &mut sums[task.len()..] {
                *slot += hit;
            }
        }
    }
    let denominator = (repeats * tasks.len()) as f64;
    Ok(sums.into_iter().map(|s| s / denominator).collect())
}

fn resample_stream(seed: u64, repeat: u64, task: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&repeat.to_le_bytes());
    key[16..24].copy_from_slice(&task.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

/// Flat, serialization-friendly summary of one discovery run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Generation probability of the known target under the grammar,
    /// when a target was supplied (filled in by the caller from the
    /// chart parser).
    pub target_probability: Option<f64>,
    /// Parse height of the known target, when available.
    pub target_height: Option<usize>,
    /// Whether the run beat the success threshold.
    pub success: bool,
    /// Raw samples drawn.
    pub n_raw_samples: usize,
    /// Distinct canonical keys.
    pub n_unique: usize,
    /// Probability mass of the distinct sampled trees.
    pub coverage_achieved: f64,
    /// Discarded over-budget attempts.
    pub n_discarded: u64,
    /// Best (smallest) fitted error, omitted when infinite.
    pub best_error: Option<f64>,
    /// Canonical key of the best candidate, when any candidate exists.
    pub best_key: Option<String>,
}

/// Summarizes a result into a flat report row. Target-related fields
/// start empty; callers that know the target fill them in from the
/// chart parser.
pub fn run_report(result: &DiscoveryResult) -> RunReport {
    let best = result.candidates.first();
    RunReport {
        target_probability: None,
        target_height: None,
        success: result.success,
        n_raw_samples: result.n_raw_samples,
        n_unique: result.n_unique,
        coverage_achieved: result.coverage_achieved,
        n_discarded: result.n_discarded,
        best_error: best.and_then(|c| c.error.is_finite().then_some(c.error)),
        best_key: best.map(|c| c.key.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{universal_grammar, BiasRatios, StructuralProbs};

    fn sum_dataset() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let (x, y) = (1.0 + i as f64 * 0.1, 2.0 + (i % 7) as f64 * 0.3);
                vec![x, y, x + y]
            })
            .collect();
        Dataset::new(vec!["x".into(), "y".into(), "v".into()], rows, "v").unwrap()
    }

    fn uniform_xy() -> Pcfg {
        universal_grammar(&["x", "y"], BiasRatios::uniform(), StructuralProbs::default())
            .unwrap()
    }

    #[test]
    fn recovers_a_simple_sum() {
        let g = uniform_xy();
        let data = sum_dataset();
        let cfg = DiscoveryConfig {
            n_samples: 4000,
            seed: 7,
            ..DiscoveryConfig::default()
        };
        let result = mc_gbed(&g, &data, &cfg).unwrap();
        assert!(result.success);
        assert_eq!(result.candidates[0].key, "x+y");
        assert_eq!(result.candidates[0].error, 0.0);
        assert!(result.candidates[0].generation_probability >= 2.0 * 0.001728 - 1e-12);
        assert!(result.candidates[0].sample_multiplicity >= 1);
    }

    #[test]
    fn zero_samples_allowed() {
        let g = uniform_xy();
        let data = sum_dataset();
        let cfg = DiscoveryConfig {
            n_samples: 0,
            ..DiscoveryConfig::default()
        };
        let result = mc_gbed(&g, &data, &cfg).unwrap();
        assert!(!result.success);
        assert!(result.candidates.is_empty());
        assert_eq!(result.coverage_achieved, 0.0);
        assert_eq!(result.n_unique, 0);
    }

    #[test]
    fn grammar_containing_target_is_rejected() {
        let g = universal_grammar(
            &["x", "v"],
            BiasRatios::uniform(),
            StructuralProbs::default(),
        )
        .unwrap();
        let data = sum_dataset();
        assert!(matches!(
            mc_gbed(&g, &data, &DiscoveryConfig::default()),
            Err(DiscoverError::TargetInGrammar(name)) if name == "v"
        ));
    }

    #[test]
    fn grammar_variable_missing_from_data_is_rejected() {
        let g = universal_grammar(
            &["x", "q"],
            BiasRatios::uniform(),
            StructuralProbs::default(),
        )
        .unwrap();
        let data = sum_dataset();
        assert!(matches!(
            mc_gbed(&g, &data, &DiscoveryConfig::default()),
            Err(DiscoverError::VariableNotInData(name)) if name == "q"
        ));
    }

    #[test]
    fn unused_dataset_columns_are_fine() {
        let g = universal_grammar(&["x"], BiasRatios::uniform(), StructuralProbs::default())
            .unwrap();
        let rows: Vec<Vec<f64>> = (1..=20)
            .map(|i| {
                let x = i as f64 * 0.25;
                vec![x, 99.0, x * x]
            })
            .collect();
        let data = Dataset::new(vec!["x".into(), "z".into(), "v".into()], rows, "v").unwrap();
        let cfg = DiscoveryConfig {
            n_samples: 1500,
            seed: 3,
            ..DiscoveryConfig::default()
        };
        let result = mc_gbed(&g, &data, &cfg).unwrap();
        assert!(result.success);
        assert_eq!(result.candidates[0].key, "x^2");
    }

    #[test]
    fn multiplicities_partition_raw_samples() {
        let g = uniform_xy();
        let summary = sample_and_canonicalize(&g, 800, 11, DEFAULT_MAX_EXPANSIONS).unwrap();
        assert_eq!(summary.n_raw_samples, 800);
        let total: u64 = summary.keys.iter().map(|k| k.sample_multiplicity).sum();
        assert_eq!(total, 800);
        assert_eq!(summary.n_unique, summary.keys.len());
        assert!(summary.n_unique <= summary.n_raw_samples);
        assert!(summary.coverage_achieved > 0.0);
        assert!(summary.coverage_achieved <= 1.0 + 1e-9);
        let prob_total: f64 = summary
            .keys
            .iter()
            .map(|k| k.generation_probability)
            .sum();
        assert!((prob_total - summary.coverage_achieved).abs() < 1e-12);
    }

    #[test]
    fn results_serialize_identically_across_runs() {
        let g = uniform_xy();
        let data = sum_dataset();
        let cfg = DiscoveryConfig {
            n_samples: 600,
            seed: 5,
            ..DiscoveryConfig::default()
        };
        let a = serde_json::to_string(&mc_gbed(&g, &data, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&mc_gbed(&g, &data, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn candidate_order_is_strict() {
        let g = uniform_xy();
        let data = sum_dataset();
        let cfg = DiscoveryConfig {
            n_samples: 400,
            seed: 2,
            ..DiscoveryConfig::default()
        };
        let result = mc_gbed(&g, &data, &cfg).unwrap();
        for pair in result.candidates.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let ordered = a.error < b.error
                || (a.error == b.error
                    && (a.generation_probability > b.generation_probability
                        || (a.generation_probability == b.generation_probability
                            && a.key < b.key)));
            assert!(ordered, "{} vs {} not strictly ordered", a.key, b.key);
        }
    }

    #[test]
    fn resample_full_prefix_equals_plain_ratio() {
        let solved = vec![
            ResampleCandidate {
                probability: 0.4,
                success: false,
            },
            ResampleCandidate {
                probability: 0.1,
                success: true,
            },
        ];
        let unsolved = vec![ResampleCandidate {
            probability: 0.2,
            success: false,
        }];
        let curve = resample_success_curve(&[solved, unsolved], 50, 123).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(*curve.last().unwrap(), 0.5);
    }

    #[test]
    fn resample_dominant_success_is_found_first() {
        let task = vec![
            ResampleCandidate {
                probability: 1.0,
                success: true,
            },
            ResampleCandidate {
                probability: 1e-9,
                success: false,
            },
        ];
        let curve = resample_success_curve(&[task], 400, 9).unwrap();
        assert!(curve[0] > 0.99, "curve[0] = {}", curve[0]);
    }

    #[test]
    fn resample_equal_weights_split_evenly() {
        let task = vec![
            ResampleCandidate {
                probability: 0.25,
                success: true,
            },
            ResampleCandidate {
                probability: 0.25,
                success: false,
            },
        ];
        let repeats = 10_000;
        let curve = resample_success_curve(&[task], repeats, 77).unwrap();
        let sigma = 0.5 / (repeats as f64).sqrt();
        assert!(
            (curve[0] - 0.5).abs() < 3.0 * sigma,
            "curve[0] = {}",
            curve[0]
        );
        assert_eq!(curve[1], 1.0);
    }

    #[test]
    fn resample_validates_input() {
        let bad = vec![ResampleCandidate {
            probability: 0.0,
            success: true,
        }];
        assert!(matches!(
            resample_success_curve(&[bad], 10, 0),
            Err(DiscoverError::InvalidInput(_))
        ));
        assert!(matches!(
            resample_success_curve(&[], 0, 0),
            Err(DiscoverError::InvalidInput(_))
        ));
        assert!(resample_success_curve(&[], 5, 0).unwrap().is_empty());
    }

    #[test]
    fn report_renders_infinite_best_error_as_absent() {
        let inadmissible = DiscoveryResult {
            candidates: vec![CandidateEquation {
                key: "C0+C1*x".into(),
                expression: Expression::variable("x"),
                n_parameters: 6,
                params: Vec::new(),
                error: f64::INFINITY,
                generation_probability: 0.1,
                sample_multiplicity: 3,
            }],
            n_raw_samples: 3,
            n_unique: 1,
            coverage_achieved: 0.1,
            n_discarded: 0,
            success: false,
            wall_time: Duration::from_millis(5),
        };
        let report = run_report(&inadmissible);
        assert!(!report.success);
        assert_eq!(report.best_error, None);
        assert_eq!(report.best_key.as_deref(), Some("C0+C1*x"));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"best_error\":null"));
    }
}
