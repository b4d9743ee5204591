//! Exact combinatorics and probability analytics for grammars.
//!
//! Two recursions drive everything here. Tree *counting* asks how many parse
//! trees of each exact height a symbol roots, ignoring probabilities; counts
//! for recursive grammars explode double-exponentially, so they are kept as
//! arbitrary-precision integers. *Coverage* asks how much probability mass a
//! PCFG places on trees up to a height; for proper grammars it approaches 1,
//! and the gap at a finite horizon measures how much mass leaks into deep
//! (or never-terminating) derivations.
//!
//! On top of the tables sit the search-effort estimators: the expected
//! number of samples until a target of probability `p` first appears under
//! probabilistic sampling (the geometric law, `1/p`), its counterpart under
//! uniform exhaustive enumeration by height, the fraction of a task
//! collection solvable within a sample budget, the expected success rate of
//! repeated sampling runs, and Spearman rank correlation for relating those
//! quantities to expression complexity.

use num::rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::grammar::{Pcfg, SymbolId};

// Re-exported so callers can name the arbitrary-precision types appearing
// in this module's signatures without depending on the num crates directly.
pub use num::BigRational;
pub use num_bigint::{BigInt, BigUint};

/// Errors from analytics computations (all are precondition violations;
/// the recursions themselves cannot fail).
#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("input lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

// ---------------------------------------------------------------------------
// Tree counting
// ---------------------------------------------------------------------------

/// Exact per-(symbol, height) tree counts.
///
/// `exact(A, h)` is the number of parse trees rooted at `A` with height
/// exactly `h`; `cumulative(A, h)` sums the exact counts for heights `0..=h`.
/// A terminal roots exactly one tree, of height 0.
#[derive(Clone, Debug)]
pub struct CountTable {
    max_height: usize,
    exact: Vec<Vec<BigUint>>,
    cumulative: Vec<Vec<BigUint>>,
}

impl CountTable {
    /// Fills the table for every symbol of `g` up to `max_height`.
    pub fn build(g: &Pcfg, max_height: usize) -> CountTable {
        let n_symbols = g.symbols().len();
        let mut exact = vec![Vec::with_capacity(max_height + 1); n_symbols];
        let mut cumulative = vec![Vec::with_capacity(max_height + 1); n_symbols];

        // The cumulative count of a sequence of siblings at a height bound is
        // the product of their cumulative counts; a tree of exact height h
        // needs at least one child of exact height h-1, hence the inclusion-
        // exclusion difference of the two products below. Cumulative counts
        // at negative heights are zero, which also yields the all-terminal
        // count at h = 1 without a special case.
        for h in 0..=max_height {
            for sym in 0..n_symbols {
                let id = SymbolId::from_index(sym);
                let count = if g.is_terminal(id) {
                    if h == 0 {
                        BigUint::one()
                    } else {
                        BigUint::zero()
                    }
                } else if h == 0 {
                    BigUint::zero()
                } else {
                    let mut total = BigUint::zero();
                    for &ri in g.rules_for(id) {
                        let rhs = &g.rule(ri).rhs;
                        let upper = product_of_cumulative(&cumulative, rhs, h as isize - 1);
                        let lower = product_of_cumulative(&cumulative, rhs, h as isize - 2);
                        total += upper
                            .checked_sub(&lower)
                            .expect("cumulative counts are nondecreasing in height");
                    }
                    total
                };
                let prev = if h == 0 {
                    BigUint::zero()
                } else {
                    cumulative[sym][h - 1].clone()
                };
                cumulative[sym].push(prev + &count);
                exact[sym].push(count);
            }
        }
        CountTable {
            max_height,
            exact,
            cumulative,
        }
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    /// Number of parse trees rooted at `symbol` with height exactly `h`.
    pub fn exact(&self, symbol: SymbolId, h: usize) -> &BigUint {
        &self.exact[symbol.index()][h]
    }

    /// Number of parse trees rooted at `symbol` with height at most `h`.
    pub fn cumulative(&self, symbol: SymbolId, h: usize) -> &BigUint {
        &self.cumulative[symbol.index()][h]
    }
}

fn product_of_cumulative(cumulative: &[Vec<BigUint>], rhs: &[SymbolId], h: isize) -> BigUint {
    if h < 0 {
        return BigUint::zero();
    }
    let mut product = BigUint::one();
    for sym in rhs {
        let factor = &cumulative[sym.index()][h as usize];
        if factor.is_zero() {
            return BigUint::zero();
        }
        product *= factor;
    }
    product
}

trait CheckedSubExt {
    fn checked_sub(&self, other: &Self) -> Option<Self>
    where
        Self: Sized;
}

impl CheckedSubExt for BigUint {
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        if self >= other {
            Some(self - other)
        } else {
            None
        }
    }
}

/// Exact and cumulative tree counts for one (symbol, height) pair.
///
/// Builds a call-local table; use [`CountTable::build`] directly when many
/// heights or symbols are needed.
pub fn count_trees(g: &Pcfg, symbol: SymbolId, h: usize) -> (BigUint, BigUint) {
    let table = CountTable::build(g, h);
    (table.exact(symbol, h).clone(), table.cumulative(symbol, h).clone())
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

/// Per-(symbol, height) coverage: the total probability of parse trees
/// rooted at a symbol with height at most `h`. Nondecreasing in `h` and
/// bounded by 1; the height-`h` value of the start symbol bounds how much of
/// the grammar's distribution a height-limited search can ever see.
#[derive(Clone, Debug)]
pub struct CoverageTable {
    max_height: usize,
    values: Vec<Vec<f64>>,
}

impl CoverageTable {
    /// Fills the table for every symbol of `g` up to `max_height`.
    pub fn build(g: &Pcfg, max_height: usize) -> CoverageTable {
        let n_symbols = g.symbols().len();
        let mut values = vec![Vec::with_capacity(max_height + 1); n_symbols];
        for h in 0..=max_height {
            for sym in 0..n_symbols {
                let id = SymbolId::from_index(sym);
                let value = if g.is_terminal(id) {
                    1.0
                } else if h == 0 {
                    0.0
                } else {
                    let mut total = 0.0;
                    for &ri in g.rules_for(id) {
                        let rule = g.rule(ri);
                        let mut product = rule.probability;
                        for child in &rule.rhs {
                            product *= values[child.index()][h - 1];
                            if product == 0.0 {
                                break;
                            }
                        }
                        total += product;
                    }
                    total
                };
                values[sym].push(value);
            }
        }
        CoverageTable { max_height, values }
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    pub fn coverage(&self, symbol: SymbolId, h: usize) -> f64 {
        self.values[symbol.index()][h]
    }
}

/// Coverage of one (symbol, height) pair; builds a call-local table.
pub fn coverage(g: &Pcfg, symbol: SymbolId, h: usize) -> f64 {
    CoverageTable::build(g, h).coverage(symbol, h)
}

// ---------------------------------------------------------------------------
// Closed forms for the linear grammar
// ---------------------------------------------------------------------------

/// Closed-form values for the linear grammar, used as an independent oracle
/// against the counting and coverage recursions.
#[derive(Clone, Debug)]
pub struct LinearClosedForms {
    /// Trees of the start symbol with height exactly `h`: `n_vars^(h-1)`.
    pub exact: BigUint,
    /// Trees with height at most `h`.
    pub cumulative: BigUint,
    /// Probability mass of trees with height at most `h`: `1 - p^(h-1)`.
    pub coverage: f64,
    /// Probability that a generated tree has height exactly `h`:
    /// `p^(h-2) * (1-p)`.
    pub height_pmf: f64,
}

/// Closed forms for the linear grammar with `n_vars` variables and
/// recursion probability `p`, at height `h >= 2` (the minimum height of any
/// complete derivation).
pub fn linear_closed_forms(
    n_vars: usize,
    p: f64,
    h: usize,
) -> Result<LinearClosedForms, AnalyticsError> {
    if n_vars < 1 {
        return Err(AnalyticsError::ParameterOutOfRange(
            "n_vars must be at least 1".into(),
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(AnalyticsError::ParameterOutOfRange(format!(
            "p must lie strictly inside (0, 1), got {p}"
        )));
    }
    if h < 2 {
        return Err(AnalyticsError::ParameterOutOfRange(format!(
            "closed forms hold for h >= 2, got {h}"
        )));
    }
    let base = BigUint::from(n_vars);
    let exact = base.pow(h as u32 - 1);
    // Sum of n_vars^k for k in 1..=h-1.
    let cumulative = if n_vars == 1 {
        BigUint::from(h - 1)
    } else {
        (base.pow(h as u32) - &base) / (base.clone() - BigUint::one())
    };
    Ok(LinearClosedForms {
        exact,
        cumulative,
        coverage: 1.0 - p.powi(h as i32 - 1),
        height_pmf: p.powi(h as i32 - 2) * (1.0 - p),
    })
}

// ---------------------------------------------------------------------------
// Expected samples
// ---------------------------------------------------------------------------

/// Expected number of independent samples until an outcome of probability
/// `p` first appears: the geometric mean `1/p`.
pub fn expected_samples_pcfg(p: f64) -> Result<f64, AnalyticsError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(AnalyticsError::ParameterOutOfRange(format!(
            "probability must lie in (0, 1], got {p}"
        )));
    }
    Ok(1.0 / p)
}

/// Expected enumeration effort to reach a target of parse height `h` when
/// trees are enumerated exhaustively in height order: everything strictly
/// shorter, plus on average half of the height-`h` layer.
///
/// The value is exact (a rational with denominator 1 or 2) and can be
/// astronomically large, so it is carried as a big rational alongside a
/// `log10` approximation and a decimal rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct CfgExpectation {
    pub exact: BigRational,
    pub log10: f64,
    pub decimal: String,
}

/// Expected samples under exhaustive height-ordered enumeration:
/// `N(start, h-1) + n(start, h) / 2`.
pub fn expected_samples_cfg(g: &Pcfg, h: usize) -> Result<CfgExpectation, AnalyticsError> {
    if h < 1 {
        return Err(AnalyticsError::ParameterOutOfRange(
            "target parse height must be at least 1".into(),
        ));
    }
    let table = CountTable::build(g, h);
    let start = g.start();
    let below = table.cumulative(start, h - 1);
    let at = table.exact(start, h);
    // below + at/2, kept exact.
    let twice = BigInt::from(below * 2u32 + at);
    let exact = Ratio::new(twice.clone(), BigInt::from(2));
    let decimal = if (&twice % 2u32).is_zero() {
        (twice.clone() / 2u32).to_string()
    } else {
        format!("{}.5", twice.clone() / 2u32)
    };
    Ok(CfgExpectation {
        log10: log10_big_rational(&exact),
        exact,
        decimal,
    })
}

fn log10_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 900 {
        // Comfortably within f64 range.
        x.to_f64().expect("value fits in f64 range").log10()
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().expect("64-bit prefix fits in f64");
        top.log10() + shift as f64 * std::f64::consts::LOG10_2
    }
}

fn log10_big_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let numer = x.numer().abs().to_biguint().expect("absolute value is nonnegative");
    let denom = x.denom().abs().to_biguint().expect("absolute value is nonnegative");
    log10_biguint(&numer) - log10_biguint(&denom)
}

/// Fraction of targets whose expected sample count is within a budget of
/// `n` samples.
pub fn reconstruction_ratio(expected: &[f64], n: f64) -> Result<f64, AnalyticsError> {
    if expected.is_empty() {
        return Err(AnalyticsError::InvalidInput(
            "expected-sample list is empty".into(),
        ));
    }
    let hits = expected.iter().filter(|&&e| n >= e).count();
    Ok(hits as f64 / expected.len() as f64)
}

/// Mean probability that `n_samples` independent draws contain at least one
/// success, over a list of per-target success probabilities:
/// `mean_i(1 - (1 - p_i)^N)`, accumulated stably through `ln_1p`/`exp_m1`.
pub fn expected_success_rate(probs: &[f64], n_samples: u64) -> Result<f64, AnalyticsError> {
    if probs.is_empty() {
        return Err(AnalyticsError::InvalidInput("probability list is empty".into()));
    }
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(AnalyticsError::ParameterOutOfRange(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
    }
    if n_samples == 0 {
        return Ok(0.0);
    }
    let n = n_samples as f64;
    let total: f64 = probs
        .iter()
        .map(|&p| {
            if p >= 1.0 {
                1.0
            } else {
                -f64::exp_m1(n * f64::ln_1p(-p))
            }
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// [`expected_success_rate`] with every probability divided by the observed
/// uniqueness ratio (distinct canonical forms per raw sample) and clamped to
/// 1 — a correction for targets reachable through several equivalent
/// surface forms.
pub fn ambiguity_corrected_rate(
    probs: &[f64],
    n_samples: u64,
    uniqueness_ratio: f64,
) -> Result<f64, AnalyticsError> {
    if !(uniqueness_ratio > 0.0 && uniqueness_ratio <= 1.0) {
        return Err(AnalyticsError::ParameterOutOfRange(format!(
            "uniqueness ratio must lie in (0, 1], got {uniqueness_ratio}"
        )));
    }
    let corrected: Vec<f64> = probs
        .iter()
        .map(|&p| (p / uniqueness_ratio).min(1.0))
        .collect();
    expected_success_rate(&corrected, n_samples)
}

// ---------------------------------------------------------------------------
// Rank correlation
// ---------------------------------------------------------------------------

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, AnalyticsError> {
    if xs.len() != ys.len() {
        return Err(AnalyticsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalyticsError::InvalidInput(
            "rank correlation needs at least 2 observations".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(AnalyticsError::InvalidInput("input contains NaN".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in rx.iter().zip(&ry) {
        let dx = x - mx;
        let dy = y - my;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(AnalyticsError::InvalidInput(
            "rank correlation is undefined for a constant input".into(),
        ));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("NaN was rejected"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let average = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = average;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{linear_grammar, parse_grammar, universal_grammar, BiasRatios, StructuralProbs};

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn linear_grammar_counts() {
        let g = linear_grammar(2, 0.5).unwrap();
        let e = g.start();
        let (n2, _) = count_trees(&g, e, 2);
        assert_eq!(n2, big(2));
        let (_, cum5) = count_trees(&g, e, 5);
        assert_eq!(cum5, big(30));
    }

    #[test]
    fn terminal_counting_base_cases() {
        let g = linear_grammar(2, 0.5).unwrap();
        let x = g.symbol_id("x").unwrap();
        let table = CountTable::build(&g, 1);
        assert_eq!(table.exact(x, 0), &big(1));
        assert_eq!(table.exact(x, 1), &big(0));
        assert_eq!(table.cumulative(x, 1), &big(1));
    }

    #[test]
    fn linear_grammar_coverage_values() {
        let g = linear_grammar(2, 0.3).unwrap();
        let e = g.start();
        let v = g.symbol_id("V").unwrap();
        assert!((coverage(&g, e, 2) - 0.7).abs() < 1e-15);
        assert_eq!(coverage(&g, v, 1), 1.0);
        assert_eq!(coverage(&g, e, 0), 0.0);
    }

    #[test]
    fn universal_grammar_hand_computed_table() {
        let g =
            universal_grammar(&["x", "y"], BiasRatios::uniform(), StructuralProbs::default())
                .unwrap();
        let e = g.start();
        let counts = CountTable::build(&g, 4);
        let expected_exact = [0u64, 0, 0, 1, 26];
        for (h, want) in expected_exact.iter().enumerate() {
            assert_eq!(counts.exact(e, h), &big(*want), "n(E, {h})");
        }
        assert_eq!(counts.cumulative(e, 4), &big(27));

        let cov = CoverageTable::build(&g, 4);
        let t = g.symbol_id("T").unwrap();
        let f = g.symbol_id("F").unwrap();
        assert!((cov.coverage(t, 1) - 0.4).abs() < 1e-15);
        assert!((cov.coverage(t, 2) - 0.8).abs() < 1e-15);
        assert!((cov.coverage(f, 2) - 0.24).abs() < 1e-15);
        assert!((cov.coverage(f, 3) - 0.5568).abs() < 1e-14);
        assert!((cov.coverage(e, 3) - 0.144).abs() < 1e-15);
        assert!((cov.coverage(e, 4) - 0.36615168).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_reference_values() {
        let forms = linear_closed_forms(2, 0.5, 5).unwrap();
        assert_eq!(forms.cumulative, big(30));
        assert_eq!(forms.exact, big(16));
        let forms = linear_closed_forms(2, 0.5, 3).unwrap();
        assert!((forms.coverage - 0.75).abs() < 1e-15);
        let forms = linear_closed_forms(2, 0.5, 4).unwrap();
        assert!((forms.height_pmf - 0.125).abs() < 1e-15);
        assert!(linear_closed_forms(0, 0.5, 3).is_err());
        assert!(linear_closed_forms(2, 1.0, 3).is_err());
        assert!(linear_closed_forms(2, 0.5, 1).is_err());
    }

    #[test]
    fn closed_forms_single_variable() {
        let forms = linear_closed_forms(1, 0.5, 7).unwrap();
        assert_eq!(forms.exact, big(1));
        assert_eq!(forms.cumulative, big(6));
    }

    #[test]
    fn geometric_expectation() {
        assert_eq!(expected_samples_pcfg(0.01).unwrap(), 100.0);
        assert_eq!(expected_samples_pcfg(1.0).unwrap(), 1.0);
        assert!(expected_samples_pcfg(0.0).is_err());
        assert!(expected_samples_pcfg(1.5).is_err());
    }

    #[test]
    fn enumeration_expectation_linear_grammar() {
        let g = linear_grammar(2, 0.5).unwrap();
        let e3 = expected_samples_cfg(&g, 3).unwrap();
        assert_eq!(e3.decimal, "4");
        assert_eq!(e3.exact, Ratio::from(BigInt::from(4)));
        let e2 = expected_samples_cfg(&g, 2).unwrap();
        assert_eq!(e2.decimal, "1");
        let e1 = expected_samples_cfg(&g, 1).unwrap();
        assert_eq!(e1.decimal, "0");
        assert_eq!(e1.log10, f64::NEG_INFINITY);
        assert!(expected_samples_cfg(&g, 0).is_err());
    }

    #[test]
    fn enumeration_expectation_half_sample() {
        let g = linear_grammar(1, 0.5).unwrap();
        let e2 = expected_samples_cfg(&g, 2).unwrap();
        assert_eq!(e2.decimal, "0.5");
        assert!((e2.log10 - 0.5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn log10_handles_huge_counts() {
        let x = BigUint::from(10u32).pow(4000);
        assert!((log10_biguint(&x) - 4000.0).abs() < 1e-6);
    }

    #[test]
    fn reconstruction_ratio_indicator() {
        assert_eq!(reconstruction_ratio(&[10.0, 100.0], 50.0).unwrap(), 0.5);
        assert_eq!(reconstruction_ratio(&[10.0, 100.0], 0.0).unwrap(), 0.0);
        assert_eq!(reconstruction_ratio(&[10.0, 100.0], 100.0).unwrap(), 1.0);
        assert!(reconstruction_ratio(&[], 1.0).is_err());
    }

    #[test]
    fn success_rate_formula() {
        assert_eq!(expected_success_rate(&[1.0], 3).unwrap(), 1.0);
        assert!((expected_success_rate(&[0.5], 1).unwrap() - 0.5).abs() < 1e-15);
        let rate = expected_success_rate(&[0.1, 0.1], 10).unwrap();
        assert!((rate - (1.0 - 0.9f64.powi(10))).abs() < 1e-12);
        assert_eq!(expected_success_rate(&[0.2, 0.4], 0).unwrap(), 0.0);
        assert!(expected_success_rate(&[1.2], 1).is_err());
        assert!(expected_success_rate(&[], 1).is_err());
    }

    #[test]
    fn ambiguity_correction() {
        let plain = expected_success_rate(&[0.3, 0.01], 20).unwrap();
        let same = ambiguity_corrected_rate(&[0.3, 0.01], 20, 1.0).unwrap();
        assert_eq!(plain, same);
        let corrected = ambiguity_corrected_rate(&[0.001], 1000, 0.299).unwrap();
        let expected = 1.0 - (1.0 - 0.001 / 0.299f64).powi(1000);
        assert!((corrected - expected).abs() < 1e-12);
        // Clamped probability saturates immediately.
        let clamped = ambiguity_corrected_rate(&[0.9], 1, 0.5).unwrap();
        assert_eq!(clamped, 1.0);
        assert!(ambiguity_corrected_rate(&[0.5], 1, 0.0).is_err());
        assert!(ambiguity_corrected_rate(&[0.5], 1, 1.5).is_err());
    }

    #[test]
    fn spearman_reference_values() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 4.0, 3.0]).unwrap(), -1.0);
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((rho - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_average_ranks_for_ties() {
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((rho - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_rejects_degenerate_input() {
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[2.0, 2.0], &[1.0, 3.0]).is_err());
        assert!(spearman(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn coverage_of_improper_grammar_stalls_below_one() {
        let g = parse_grammar("start: E\nE -> E E [0.6] | 'x' [0.4]\n").unwrap();
        let table = CoverageTable::build(&g, 60);
        let c = table.coverage(g.start(), 60);
        // Extinction probability of this supercritical branching process:
        // the smaller root of q = 0.4 + 0.6 q^2.
        assert!((c - 2.0 / 3.0).abs() < 1e-3);
        assert!(c < 0.999);
    }
}
