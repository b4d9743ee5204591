//! Arithmetic expression ASTs: construction from parse trees or text,
//! canonicalization for deduplication, numeric evaluation, and complexity
//! measures.
//!
//! An [`Expression`] separates the three ingredients of a candidate
//! equation: variables, free parameters (the grammar's `c` terminal —
//! constants whose values are fitted later), and fixed numeric literals.
//! Subtraction and division are not node kinds of their own: a difference
//! is a [`Sum`](Expression::Sum) child with a negative sign, a quotient a
//! [`Product`](Expression::Product) child with a negative exponent. That
//! uniformity is what makes flattening and reordering straightforward.
//!
//! The canonicalizer ([`canonicalize`]) rewrites an expression into a normal
//! form whose string rendering (the *key*) serves as the deduplication
//! identity for generated equations: `y+x` and `x+y` share a key, as do
//! `c*c*x` and `c*x`. Evaluation is plain IEEE double arithmetic in which
//! domain violations produce non-finite values instead of errors, so that
//! a fitter can score bad parameter vectors cheaply; [`compile`] flattens
//! an expression into a small stack program for the fitter's hot loop.

mod canonical;
mod parse;

pub use canonical::{canonicalize, to_grammar_text, CanonicalForm};
pub use parse::{parse_expression, tree_to_expression};

use std::collections::HashMap;

use num::rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Errors from expression construction, parsing, and evaluation.
#[derive(Debug, Error)]
pub enum ExprError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("exponent at byte {position} is not an integer")]
    NonIntegerExponent { position: usize },
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("terminal '{0}' has no arithmetic meaning")]
    UnknownTerminal(String),
    #[error("variable '{0}' is not bound")]
    UnboundVariable(String),
    #[error("parameter {index} referenced but only {available} values supplied")]
    ParameterIndexOutOfRange { index: usize, available: usize },
    #[error("expression cannot be written in the grammar's vocabulary: {0}")]
    NotExpressible(String),
}

/// A fixed numeric constant: exact rational while arithmetic stays within
/// 64-bit range, IEEE double afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Rational(Ratio<i64>),
    Float(f64),
}

impl Number {
    pub fn integer(n: i64) -> Number {
        Number::Rational(Ratio::from_integer(n))
    }

    /// Exact fraction; `denominator` must be nonzero.
    pub fn rational(numerator: i64, denominator: i64) -> Number {
        Number::Rational(Ratio::new(numerator, denominator))
    }

    pub fn float(value: f64) -> Number {
        Number::Float(value)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(q) => q.is_zero(),
            Number::Float(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(q) => q == Ratio::from_integer(1),
            Number::Float(f) => f == 1.0,
        }
    }

    pub fn is_minus_one(self) -> bool {
        match self {
            Number::Rational(q) => q == Ratio::from_integer(-1),
            Number::Float(f) => f == -1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(q) => q.is_negative(),
            // NaN is not negative; -0.0 is treated as zero.
            Number::Float(f) => f < 0.0,
        }
    }

    pub fn negate(self) -> Number {
        match self {
            Number::Rational(q) => Number::Rational(-q),
            Number::Float(f) => Number::Float(-f),
        }
    }

    pub fn abs(self) -> Number {
        if self.is_negative() {
            self.negate()
        } else {
            self
        }
    }

    /// Exact addition where possible, falling back to floats on overflow.
    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_add(&b) {
                Some(sum) => Number::Rational(sum),
                None => Number::Float(self.to_f64() + other.to_f64()),
            },
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    /// Exact multiplication where possible, falling back to floats.
    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_mul(&b) {
                Some(product) => Number::Rational(product),
                None => Number::Float(self.to_f64() * other.to_f64()),
            },
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// Integer power, exact where possible. A zero base with a negative
    /// exponent folds to infinity, mirroring IEEE division by zero.
    pub fn pow(self, exponent: i64) -> Number {
        if exponent == 0 {
            return Number::integer(1);
        }
        match self {
            Number::Rational(q) => {
                if q.is_zero() && exponent < 0 {
                    return Number::Float(f64::INFINITY);
                }
                let positive = exponent.unsigned_abs();
                let mut result = Ratio::from_integer(1);
                let mut ok = true;
                for _ in 0..positive.min(128) {
                    match result.checked_mul(&q) {
                        Some(next) => result = next,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && positive <= 128 {
                    if exponent < 0 {
                        Number::Rational(result.recip())
                    } else {
                        Number::Rational(result)
                    }
                } else {
                    Number::Float(self.to_f64().powf(exponent as f64))
                }
            }
            Number::Float(f) => {
                if let Ok(small) = i32::try_from(exponent) {
                    Number::Float(f.powi(small))
                } else {
                    Number::Float(f.powf(exponent as f64))
                }
            }
        }
    }

    /// Deterministic text rendering: `p/q` for rationals, shortest
    /// round-trip decimal for floats.
    pub fn render(self) -> String {
        match self {
            Number::Rational(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Number::Float(f) => format!("{f}"),
        }
    }
}

/// Sign of a summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn combine(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// The unary functions an expression may apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FuncKind {
    Sin,
    Cos,
    Sqrt,
    Exp,
    Tanh,
    Arcsin,
    Log,
}

impl FuncKind {
    pub const ALL: [FuncKind; 7] = [
        FuncKind::Sin,
        FuncKind::Cos,
        FuncKind::Sqrt,
        FuncKind::Exp,
        FuncKind::Tanh,
        FuncKind::Arcsin,
        FuncKind::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Sqrt => "sqrt",
            FuncKind::Exp => "exp",
            FuncKind::Tanh => "tanh",
            FuncKind::Arcsin => "arcsin",
            FuncKind::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncKind> {
        FuncKind::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            FuncKind::Sin => x.sin(),
            FuncKind::Cos => x.cos(),
            FuncKind::Sqrt => x.sqrt(),
            FuncKind::Exp => x.exp(),
            FuncKind::Tanh => x.tanh(),
            FuncKind::Arcsin => x.asin(),
            // Natural logarithm; nonpositive arguments give -inf or NaN.
            FuncKind::Log => x.ln(),
        }
    }
}

/// An arithmetic expression over variables, free parameters, and fixed
/// numeric literals.
///
/// `Sum` children carry signs, `Product` children integer exponents; a
/// single-child `Product` with exponent 2 is how `x^2` is spelled. After
/// canonicalization, parameter indices are contiguous from 0 in
/// left-to-right order of first occurrence.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Variable(String),
    Parameter(usize),
    Literal(Number),
    Sum(Vec<(Sign, Expression)>),
    Product(Vec<(i64, Expression)>),
    Function(FuncKind, Box<Expression>),
}

impl Expression {
    pub fn variable(name: impl Into<String>) -> Expression {
        Expression::Variable(name.into())
    }

    pub fn parameter(index: usize) -> Expression {
        Expression::Parameter(index)
    }

    pub fn integer(n: i64) -> Expression {
        Expression::Literal(Number::integer(n))
    }

    /// Largest parameter index referenced, if any parameter occurs.
    pub fn max_parameter_index(&self) -> Option<usize> {
        let mut max: Option<usize> = None;
        self.visit(&mut |node| {
            if let Expression::Parameter(i) = node {
                max = Some(max.map_or(*i, |m| m.max(*i)));
            }
        });
        max
    }

    /// Distinct variable names, sorted.
    pub fn variable_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        self.visit(&mut |node| {
            if let Expression::Variable(name) = node {
                if !names.contains(name) {
                    names.push(name.clone());
                }
            }
        });
        names.sort();
        names
    }

    /// Calls `f` on this node and every descendant. Traversal order is
    /// unspecified beyond starting at the root; use it for queries that
    /// do not depend on order, like collecting names or counting nodes.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expression)) {
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            f(node);
            match node {
                Expression::Sum(children) => stack.extend(children.iter().map(|(_, c)| c)),
                Expression::Product(children) => stack.extend(children.iter().map(|(_, c)| c)),
                Expression::Function(_, arg) => stack.push(arg),
                _ => {}
            }
        }
    }
}

/// Replaces every numeric literal with a fresh parameter, in depth-first
/// left-to-right order, continuing after the largest parameter index
/// already present.
///
/// This is how a benchmark target with concrete constants (`2.5*x`) is
/// turned into the parameterized shape a grammar generates (`c*x`). Apply
/// it *before* canonicalization — afterwards, identity constants like a
/// factor of 1 have already been folded away and can no longer be masked.
pub fn mask_constants(e: &Expression) -> Expression {
    fn walk(e: &Expression, next: &mut usize) -> Expression {
        match e {
            Expression::Literal(_) => {
                let index = *next;
                *next += 1;
                Expression::Parameter(index)
            }
            Expression::Variable(_) | Expression::Parameter(_) => e.clone(),
            Expression::Sum(children) => Expression::Sum(
                children.iter().map(|(s, c)| (*s, walk(c, next))).collect(),
            ),
            Expression::Product(children) => Expression::Product(
                children.iter().map(|(k, c)| (*k, walk(c, next))).collect(),
            ),
            Expression::Function(f, arg) => {
                Expression::Function(*f, Box::new(walk(arg, next)))
            }
        }
    }
    let mut next = e.max_parameter_index().map_or(0, |m| m + 1);
    walk(e, &mut next)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates `e` with the given variable bindings and parameter values.
///
/// Domain violations (square root of a negative, log of a nonpositive,
/// division by zero) propagate as non-finite values rather than errors.
/// Parameter slots beyond those referenced are permitted.
pub fn evaluate(
    e: &Expression,
    bindings: &HashMap<String, f64>,
    params: &[f64],
) -> Result<f64, ExprError> {
    match e {
        Expression::Variable(name) => bindings
            .get(name)
            .copied()
            .ok_or_else(|| ExprError::UnboundVariable(name.clone())),
        Expression::Parameter(index) => {
            params
                .get(*index)
                .copied()
                .ok_or(ExprError::ParameterIndexOutOfRange {
                    index: *index,
                    available: params.len(),
                })
        }
        Expression::Literal(n) => Ok(n.to_f64()),
        Expression::Sum(children) => {
            let mut total = 0.0;
            for (sign, child) in children {
                total += sign.factor() * evaluate(child, bindings, params)?;
            }
            Ok(total)
        }
        Expression::Product(children) => {
            let mut total = 1.0;
            for (exponent, child) in children {
                total *= int_pow(evaluate(child, bindings, params)?, *exponent);
            }
            Ok(total)
        }
        Expression::Function(f, arg) => Ok(f.apply(evaluate(arg, bindings, params)?)),
    }
}

fn int_pow(base: f64, exponent: i64) -> f64 {
    match i32::try_from(exponent) {
        Ok(small) => base.powi(small),
        Err(_) => base.powf(exponent as f64),
    }
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum Op {
    Var(usize),
    Param(usize),
    Lit(f64),
    AddN(usize),
    Negate,
    MulN(usize),
    Pow(i64),
    Call(FuncKind),
}

/// An expression flattened into a stack program over a fixed variable
/// order, for tight evaluation loops (one indexed load per leaf, no
/// hashing, no tree walk).
#[derive(Clone, Debug)]
pub struct CompiledExpression {
    code: Vec<Op>,
    n_parameters: usize,
    max_stack: usize,
}

/// Compiles `e` against a variable order; `row` slices passed to
/// [`CompiledExpression::eval`] must use the same order. Fails when the
/// expression mentions a variable missing from `variables`.
pub fn compile(e: &Expression, variables: &[String]) -> Result<CompiledExpression, ExprError> {
    fn emit(
        e: &Expression,
        variables: &[String],
        code: &mut Vec<Op>,
        n_parameters: &mut usize,
    ) -> Result<(), ExprError> {
        match e {
            Expression::Variable(name) => {
                let slot = variables
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| ExprError::UnboundVariable(name.clone()))?;
                code.push(Op::Var(slot));
            }
            Expression::Parameter(index) => {
                *n_parameters = (*n_parameters).max(index + 1);
                code.push(Op::Param(*index));
            }
            Expression::Literal(n) => code.push(Op::Lit(n.to_f64())),
            Expression::Sum(children) => {
                for (sign, child) in children {
                    emit(child, variables, code, n_parameters)?;
                    if *sign == Sign::Minus {
                        code.push(Op::Negate);
                    }
                }
                code.push(Op::AddN(children.len()));
            }
            Expression::Product(children) => {
                for (exponent, child) in children {
                    emit(child, variables, code, n_parameters)?;
                    if *exponent != 1 {
                        code.push(Op::Pow(*exponent));
                    }
                }
                code.push(Op::MulN(children.len()));
            }
            Expression::Function(f, arg) => {
                emit(arg, variables, code, n_parameters)?;
                code.push(Op::Call(*f));
            }
        }
        Ok(())
    }

    let mut code = Vec::new();
    let mut n_parameters = 0;
    emit(e, variables, &mut code, &mut n_parameters)?;
    let mut depth: usize = 0;
    let mut max_stack: usize = 1;
    for op in &code {
        match op {
            Op::Var(_) | Op::Param(_) | Op::Lit(_) => depth += 1,
            Op::AddN(k) | Op::MulN(k) => depth = depth - k + 1,
            Op::Negate | Op::Pow(_) | Op::Call(_) => {}
        }
        max_stack = max_stack.max(depth);
    }
    Ok(CompiledExpression {
        code,
        n_parameters,
        max_stack,
    })
}

impl CompiledExpression {
    /// Number of parameter slots the program reads (largest index + 1).
    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    /// Evaluates against one data row; `row[i]` must hold the variable at
    /// position `i` of the order given to [`compile`].
    pub fn eval(&self, row: &[f64], params: &[f64]) -> f64 {
        let mut stack = Vec::with_capacity(self.max_stack);
        self.eval_with(row, params, &mut stack)
    }

    /// [`eval`](Self::eval) with a caller-owned scratch stack, for loops
    /// that want to avoid per-call allocation.
    pub fn eval_with(&self, row: &[f64], params: &[f64], stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        for op in &self.code {
            match *op {
                Op::Var(slot) => stack.push(row[slot]),
                Op::Param(index) => stack.push(params[index]),
                Op::Lit(value) => stack.push(value),
                Op::Negate => {
                    let top = stack.last_mut().expect("stack program is well formed");
                    *top = -*top;
                }
                Op::AddN(k) => {
                    let from = stack.len() - k;
                    let mut total = 0.0;
                    for value in &stack[from..] {
                        total += value;
                    }
                    stack.truncate(from);
                    stack.push(total);
                }
                Op::MulN(k) => {
                    let from = stack.len() - k;
                    let mut total = 1.0;
                    for value in &stack[from..] {
                        total *= value;
                    }
                    stack.truncate(from);
                    stack.push(total);
                }
                Op::Pow(exponent) => {
                    let top = stack.last_mut().expect("stack program is well formed");
                    *top = int_pow(*top, exponent);
                }
                Op::Call(f) => {
                    let top = stack.last_mut().expect("stack program is well formed");
                    *top = f.apply(*top);
                }
            }
        }
        stack.pop().expect("stack program leaves exactly one value")
    }
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

/// The complexity measures reported for discovered equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexityMeasure {
    /// Alphanumeric characters in the canonical key.
    StringLength,
    /// Distinct variable names.
    UniqueVariables,
    /// Sum/product arcs (a k-ary node contributes k-1) plus function
    /// applications.
    OperatorCount,
}

/// Measures the complexity of an expression's canonical form.
///
/// The expression is canonicalized first, so structurally different
/// spellings of the same key always measure alike.
pub fn complexity(e: &Expression, measure: ComplexityMeasure) -> usize {
    let form = canonicalize(e);
    match measure {
        ComplexityMeasure::StringLength => {
            form.key.chars().filter(|c| c.is_alphanumeric()).count()
        }
        ComplexityMeasure::UniqueVariables => form.expr.variable_names().len(),
        ComplexityMeasure::OperatorCount => {
            let mut count = 0;
            form.expr.visit(&mut |node| match node {
                Expression::Sum(children) => count += children.len() - 1,
                Expression::Product(children) => count += children.len() - 1,
                Expression::Function(..) => count += 1,
                _ => {}
            });
            count
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn evaluate_reference_cases() {
        let sum = Expression::Sum(vec![
            (Sign::Plus, Expression::variable("x")),
            (Sign::Plus, Expression::variable("y")),
        ]);
        let v = evaluate(&sum, &bind(&[("x", 1.0), ("y", 2.0)]), &[]).unwrap();
        assert_eq!(v, 3.0);

        let scaled = Expression::Product(vec![
            (1, Expression::parameter(0)),
            (1, Expression::variable("x")),
        ]);
        let v = evaluate(&scaled, &bind(&[("x", 4.0)]), &[2.5]).unwrap();
        assert_eq!(v, 10.0);

        let bad = Expression::Function(FuncKind::Sqrt, Box::new(Expression::integer(-1)));
        assert!(evaluate(&bad, &bind(&[]), &[]).unwrap().is_nan());
    }

    #[test]
    fn evaluate_signs_and_exponents() {
        let e = Expression::Sum(vec![
            (Sign::Plus, Expression::variable("x")),
            (Sign::Minus, Expression::variable("y")),
        ]);
        assert_eq!(evaluate(&e, &bind(&[("x", 5.0), ("y", 2.0)]), &[]).unwrap(), 3.0);

        let square = Expression::Product(vec![(2, Expression::variable("x"))]);
        assert_eq!(evaluate(&square, &bind(&[("x", 3.0)]), &[]).unwrap(), 9.0);

        let recip = Expression::Product(vec![(-1, Expression::variable("x"))]);
        assert_eq!(evaluate(&recip, &bind(&[("x", 4.0)]), &[]).unwrap(), 0.25);
        assert!(evaluate(&recip, &bind(&[("x", 0.0)]), &[])
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn evaluate_reports_missing_inputs() {
        let e = Expression::variable("x");
        assert!(matches!(
            evaluate(&e, &bind(&[]), &[]),
            Err(ExprError::UnboundVariable(_))
        ));
        let p = Expression::parameter(1);
        assert!(matches!(
            evaluate(&p, &bind(&[]), &[0.5]),
            Err(ExprError::ParameterIndexOutOfRange { index: 1, available: 1 })
        ));
    }

    #[test]
    fn mask_constants_numbers_left_to_right() {
        let e = parse_expression("2*x + y/3").unwrap();
        let masked = mask_constants(&e);
        assert_eq!(masked.max_parameter_index(), Some(1));
        let form = canonicalize(&masked);
        assert_eq!(form.n_parameters, 2);
        assert!(!form.key.contains('2'));
        assert!(!form.key.contains('3'));
    }

    #[test]
    fn compiled_matches_interpreted() {
        let cases = [
            "x + y*y",
            "2.5*x - y/4",
            "sin(x)*cos(y) + sqrt(x)",
            "exp(-x^2/2)",
            "x^3 - 1/x",
        ];
        let variables = vec!["x".to_string(), "y".to_string()];
        for text in cases {
            let canonical = canonicalize(&parse_expression(text).unwrap());
            let compiled = compile(&canonical.expr, &variables).unwrap();
            for (x, y) in [(0.7, 1.3), (2.0, -0.5), (5.5, 0.25)] {
                let by_tree =
                    evaluate(&canonical.expr, &bind(&[("x", x), ("y", y)]), &[]).unwrap();
                let by_program = compiled.eval(&[x, y], &[]);
                let scale = by_tree.abs().max(1.0);
                assert!(
                    (by_tree - by_program).abs() / scale < 1e-12,
                    "{text} at ({x}, {y}): {by_tree} vs {by_program}"
                );
            }
        }
    }

    #[test]
    fn compile_rejects_unknown_variables() {
        let e = Expression::variable("z");
        assert!(matches!(
            compile(&e, &["x".to_string()]),
            Err(ExprError::UnboundVariable(_))
        ));
    }

    #[test]
    fn complexity_reference_cases() {
        let xy = parse_expression("x+y").unwrap();
        assert_eq!(complexity(&xy, ComplexityMeasure::StringLength), 2);
        assert_eq!(complexity(&xy, ComplexityMeasure::UniqueVariables), 2);
        assert_eq!(complexity(&xy, ComplexityMeasure::OperatorCount), 1);

        let x = parse_expression("x").unwrap();
        assert_eq!(complexity(&x, ComplexityMeasure::StringLength), 1);
        assert_eq!(complexity(&x, ComplexityMeasure::UniqueVariables), 1);
        assert_eq!(complexity(&x, ComplexityMeasure::OperatorCount), 0);

        // One multiplication, one addition, one function application.
        let e = Expression::Sum(vec![
            (
                Sign::Plus,
                Expression::Function(
                    FuncKind::Sin,
                    Box::new(Expression::Product(vec![
                        (1, Expression::variable("x")),
                        (1, Expression::variable("y")),
                    ])),
                ),
            ),
            (Sign::Plus, Expression::parameter(0)),
        ]);
        assert_eq!(complexity(&e, ComplexityMeasure::UniqueVariables), 2);
        assert_eq!(complexity(&e, ComplexityMeasure::OperatorCount), 3);
    }

    #[test]
    fn number_arithmetic_stays_exact_until_overflow() {
        let half = Number::rational(1, 2);
        assert_eq!(half.add(half), Number::integer(1));
        assert_eq!(half.mul(Number::integer(4)), Number::integer(2));
        assert_eq!(Number::integer(10).pow(-1), Number::rational(1, 10));
        assert_eq!(Number::integer(0).pow(-1), Number::Float(f64::INFINITY));

        let huge = Number::integer(i64::MAX);
        match huge.mul(huge) {
            Number::Float(f) => assert!((f - (i64::MAX as f64).powi(2)).abs() / f < 1e-12),
            Number::Rational(_) => panic!("expected float fallback"),
        }
    }
}
