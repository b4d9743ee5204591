//! Normal forms and deduplication keys for expressions.
//!
//! Canonicalization rewrites an expression to a fixpoint of a small,
//! deterministic rule set: nested sums and products are flattened, numeric
//! literals folded (exactly, while they fit in 64-bit rationals), negations
//! normalized into signs and coefficients, constant-only subtrees collapsed
//! into single parameters, identity elements removed, and operands sorted
//! by a total order. The rendered string of the result — the *key* — is
//! the identity under which generated equations are deduplicated: two
//! expressions are considered the same candidate exactly when their keys
//! are byte-equal.
//!
//! Deliberately *not* rules: products are never distributed over sums, no
//! trigonometric or other function identities apply, and like terms are
//! not merged (`x-x` keeps both summands). The key identifies spellings of
//! the same construction, not mathematically equivalent functions.

use std::collections::{HashMap, VecDeque};

use super::{Expression, ExprError, Number, Sign};

/// A canonicalized expression, its deduplication key, and bookkeeping
/// about the free parameters that survived normalization.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    /// The expression in normal form, parameters renumbered from 0.
    pub expr: Expression,
    /// Deterministic rendering of `expr`; the deduplication identity.
    pub key: String,
    /// Number of distinct parameters in `expr`.
    pub n_parameters: usize,
    /// True when a rewrite changed what the parameters mean — e.g. `c+c`
    /// merged into one parameter, or `2*c` absorbed its coefficient.
    /// When set, evaluating `expr` with the original parameter vector is
    /// not expected to reproduce the input expression's values; the two
    /// are equivalent as *fittable model classes*, not pointwise.
    pub collapsed: bool,
    /// For each parameter of `expr` (by final index), the original
    /// parameter indices that were merged into it.
    pub parameter_sources: Vec<Vec<usize>>,
}

impl PartialEq for CanonicalForm {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

/// Rewrites an expression into canonical form.
pub fn canonicalize(e: &Expression) -> CanonicalForm {
    let mut cx = Canonicalizer::begin(e);
    let rewritten = cx.rewrite(e.clone());
    cx.finish(rewritten)
}

struct Canonicalizer {
    /// Provisional parameter id -> original input indices merged into it.
    sources: Vec<Vec<usize>>,
    collapsed: bool,
}

impl Canonicalizer {
    fn begin(e: &Expression) -> Canonicalizer {
        let slots = e.max_parameter_index().map_or(0, |m| m + 1);
        Canonicalizer {
            sources: (0..slots).map(|i| vec![i]).collect(),
            collapsed: false,
        }
    }

    fn fresh(&mut self, merged: Vec<usize>) -> usize {
        self.sources.push(merged);
        self.sources.len() - 1
    }

    fn merged_sources(&self, params: impl IntoIterator<Item = usize>) -> Vec<usize> {
        params
            .into_iter()
            .flat_map(|p| self.sources[p].iter().copied())
            .collect()
    }

    fn rewrite(&mut self, e: Expression) -> Expression {
        match e {
            Expression::Variable(_) | Expression::Parameter(_) | Expression::Literal(_) => e,
            Expression::Function(f, arg) => {
                let arg = self.rewrite(*arg);
                if let Expression::Parameter(p) = arg {
                    // A function of a constant is itself one constant.
                    self.collapsed = true;
                    let merged = self.sources[p].clone();
                    Expression::Parameter(self.fresh(merged))
                } else {
                    Expression::Function(f, Box::new(arg))
                }
            }
            Expression::Sum(children) => {
                let children = children
                    .into_iter()
                    .map(|(sign, child)| (sign, self.rewrite(child)))
                    .collect();
                self.simplify_sum(children)
            }
            Expression::Product(children) => {
                let children = children
                    .into_iter()
                    .map(|(exp, child)| (exp, self.rewrite(child)))
                    .collect();
                self.simplify_product(children)
            }
        }
    }

    /// Normalizes a sum whose children are already canonical.
    fn simplify_sum(&mut self, children: Vec<(Sign, Expression)>) -> Expression {
        let mut queue: VecDeque<(Sign, Expression)> = children.into();
        let mut literal = Number::integer(0);
        let mut params: Vec<usize> = Vec::new();
        let mut param_sign_flipped = false;
        let mut rest: Vec<(Sign, Expression)> = Vec::new();

        while let Some((sign, child)) = queue.pop_front() {
            match child {
                Expression::Sum(inner) => {
                    for (inner_sign, inner_child) in inner {
                        queue.push_back((inner_sign.combine(sign), inner_child));
                    }
                }
                Expression::Literal(n) => {
                    let signed = if sign == Sign::Minus { n.negate() } else { n };
                    literal = literal.add(signed);
                }
                Expression::Parameter(p) => {
                    if sign == Sign::Minus {
                        param_sign_flipped = true;
                    }
                    params.push(p);
                }
                Expression::Product(mut factors) => {
                    // A negative leading coefficient moves into the sign,
                    // so x-2*y and x+(-2)*y become the same summands.
                    let negative_coef = matches!(
                        factors.first(),
                        Some((1, Expression::Literal(n))) if n.is_negative()
                    );
                    if negative_coef {
                        let (_, first) = factors.remove(0);
                        let n = match first {
                            Expression::Literal(n) => n,
                            _ => unreachable!("matched a literal above"),
                        };
                        let magnitude = n.abs();
                        if !magnitude.is_one() {
                            factors.insert(0, (1, Expression::Literal(magnitude)));
                        }
                        let rebuilt = self.simplify_product(factors);
                        queue.push_back((sign.flip(), rebuilt));
                    } else {
                        rest.push((sign, Expression::Product(factors)));
                    }
                }
                other => rest.push((sign, other)),
            }
        }

        if params.is_empty() && rest.is_empty() {
            return Expression::Literal(literal);
        }

        if !params.is_empty() {
            let untouched = params.len() == 1 && literal.is_zero() && !param_sign_flipped;
            if untouched {
                rest.push((Sign::Plus, Expression::Parameter(params[0])));
            } else {
                // Any combination of constants is one degree of freedom.
                self.collapsed = true;
                let merged = self.merged_sources(params);
                rest.push((Sign::Plus, Expression::Parameter(self.fresh(merged))));
            }
        } else if !literal.is_zero() {
            let (sign, magnitude) = if literal.is_negative() {
                (Sign::Minus, literal.abs())
            } else {
                (Sign::Plus, literal)
            };
            rest.push((sign, Expression::Literal(magnitude)));
        }

        let mut keyed: Vec<((u8, String, u8), Sign, Expression)> = rest
            .into_iter()
            .map(|(sign, child)| {
                let order = (
                    rank(&child),
                    render(&child, &ParamNaming::Placeholder),
                    (sign == Sign::Minus) as u8,
                );
                (order, sign, child)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sorted: Vec<(Sign, Expression)> =
            keyed.into_iter().map(|(_, sign, child)| (sign, child)).collect();

        match sorted.len() {
            0 => Expression::Literal(Number::integer(0)),
            1 => {
                let (sign, child) = sorted.pop().expect("length checked");
                if sign == Sign::Plus {
                    child
                } else if let Expression::Product(mut factors) = child {
                    // -(q * rest) folds the sign into the coefficient, so a
                    // standalone negated product has a single spelling.
                    if matches!(factors.first(), Some((1, Expression::Literal(_)))) {
                        if let Some((1, Expression::Literal(n))) = factors.first_mut() {
                            *n = n.negate();
                        }
                        Expression::Product(factors)
                    } else {
                        Expression::Sum(vec![(Sign::Minus, Expression::Product(factors))])
                    }
                } else {
                    Expression::Sum(vec![(Sign::Minus, child)])
                }
            }
            _ => Expression::Sum(sorted),
        }
    }

    /// Normalizes a product whose children are already canonical.
    fn simplify_product(&mut self, children: Vec<(i64, Expression)>) -> Expression {
        let mut queue: VecDeque<(i64, Expression)> = children.into();
        let mut coef = Number::integer(1);
        let mut params: Vec<(usize, i64)> = Vec::new();
        // Bases in first-seen order, keyed by their provisional rendering
        // (parameter identities included, so c0*x and c1*x never merge).
        let mut bases: Vec<(i64, Expression)> = Vec::new();
        let mut base_index: HashMap<String, usize> = HashMap::new();

        while let Some((exp, child)) = queue.pop_front() {
            if exp == 0 {
                continue; // u^0 contributes a factor of 1
            }
            match child {
                Expression::Product(inner) => {
                    for (inner_exp, inner_child) in inner {
                        queue.push_back((inner_exp.saturating_mul(exp), inner_child));
                    }
                }
                Expression::Literal(n) => {
                    coef = coef.mul(n.pow(exp));
                }
                Expression::Parameter(p) => {
                    params.push((p, exp));
                }
                Expression::Sum(inner)
                    if inner.len() == 1 && inner[0].0 == Sign::Minus =>
                {
                    // (-u)^k = (-1)^k * u^k
                    if exp.rem_euclid(2) == 1 {
                        coef = coef.mul(Number::integer(-1));
                    }
                    let (_, inner_child) =
                        inner.into_iter().next().expect("length checked");
                    queue.push_back((exp, inner_child));
                }
                other => {
                    let key = render(&other, &ParamNaming::Provisional);
                    match base_index.get(&key) {
                        Some(&i) => bases[i].0 = bases[i].0.saturating_add(exp),
                        None => {
                            base_index.insert(key, bases.len());
                            bases.push((exp, other));
                        }
                    }
                }
            }
        }

        let mut rest: Vec<(i64, Expression)> =
            bases.into_iter().filter(|(exp, _)| *exp != 0).collect();

        if coef.is_zero() {
            if !params.is_empty() {
                self.collapsed = true;
            }
            return Expression::Literal(coef);
        }

        if !params.is_empty() {
            let untouched = params.len() == 1 && params[0].1 == 1 && coef.is_one();
            if untouched {
                rest.push((1, Expression::Parameter(params[0].0)));
            } else {
                // c^k, products of parameters, and scaled parameters are
                // all a single degree of freedom.
                self.collapsed = true;
                let merged = self.merged_sources(params.iter().map(|(p, _)| *p));
                rest.push((1, Expression::Parameter(self.fresh(merged))));
                coef = Number::integer(1);
            }
        }

        let mut keyed: Vec<((u8, String, i64), i64, Expression)> = rest
            .into_iter()
            .map(|(exp, child)| {
                let order = (rank(&child), render(&child, &ParamNaming::Placeholder), exp);
                (order, exp, child)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sorted: Vec<(i64, Expression)> =
            keyed.into_iter().map(|(_, exp, child)| (exp, child)).collect();

        if sorted.is_empty() {
            return Expression::Literal(coef);
        }
        if coef.is_minus_one() {
            let inner = finish_product(sorted);
            return Expression::Sum(vec![(Sign::Minus, inner)]);
        }
        if !coef.is_one() {
            sorted.insert(0, (1, Expression::Literal(coef)));
        }
        finish_product(sorted)
    }

    fn finish(self, e: Expression) -> CanonicalForm {
        let mut mapping: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<usize> = Vec::new();
        assign_final_indices(&e, &mut mapping, &mut order);
        let expr = remap_parameters(e, &mapping);
        let key = render(&expr, &ParamNaming::Indexed);
        let parameter_sources = order
            .iter()
            .map(|&provisional| {
                let mut originals = self.sources[provisional].clone();
                originals.sort_unstable();
                originals.dedup();
                originals
            })
            .collect();
        CanonicalForm {
            expr,
            key,
            n_parameters: order.len(),
            collapsed: self.collapsed,
            parameter_sources,
        }
    }
}

fn finish_product(mut children: Vec<(i64, Expression)>) -> Expression {
    if children.len() == 1 && children[0].0 == 1 {
        children.pop().expect("length checked").1
    } else {
        Expression::Product(children)
    }
}

fn assign_final_indices(
    e: &Expression,
    mapping: &mut HashMap<usize, usize>,
    order: &mut Vec<usize>,
) {
    match e {
        Expression::Parameter(p) => {
            if !mapping.contains_key(p) {
                mapping.insert(*p, order.len());
                order.push(*p);
            }
        }
        Expression::Sum(children) => {
            for (_, child) in children {
                assign_final_indices(child, mapping, order);
            }
        }
        Expression::Product(children) => {
            for (_, child) in children {
                assign_final_indices(child, mapping, order);
            }
        }
        Expression::Function(_, arg) => assign_final_indices(arg, mapping, order),
        Expression::Variable(_) | Expression::Literal(_) => {}
    }
}

fn remap_parameters(e: Expression, mapping: &HashMap<usize, usize>) -> Expression {
    match e {
        Expression::Parameter(p) => Expression::Parameter(mapping[&p]),
        Expression::Sum(children) => Expression::Sum(
            children
                .into_iter()
                .map(|(sign, child)| (sign, remap_parameters(child, mapping)))
                .collect(),
        ),
        Expression::Product(children) => Expression::Product(
            children
                .into_iter()
                .map(|(exp, child)| (exp, remap_parameters(child, mapping)))
                .collect(),
        ),
        Expression::Function(f, arg) => {
            Expression::Function(f, Box::new(remap_parameters(*arg, mapping)))
        }
        Expression::Variable(_) | Expression::Literal(_) => e,
    }
}

// ---------------------------------------------------------------------------
// Ordering and rendering
// ---------------------------------------------------------------------------

fn rank(e: &Expression) -> u8 {
    match e {
        Expression::Literal(_) => 0,
        Expression::Parameter(_) => 1,
        Expression::Variable(_) => 2,
        Expression::Function(..) => 3,
        Expression::Product(_) => 4,
        Expression::Sum(_) => 5,
    }
}

enum ParamNaming {
    /// Every parameter renders as bare `C`: identity-blind, used for
    /// ordering so that the final numbering cannot influence the order
    /// that produces it.
    Placeholder,
    /// `C` with the internal provisional id: used when merging product
    /// bases, where parameter identity must distinguish subtrees.
    Provisional,
    /// `C` with the final contiguous index: the public key rendering.
    Indexed,
}

fn render(e: &Expression, naming: &ParamNaming) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, naming);
    out
}

fn write_expr(out: &mut String, e: &Expression, naming: &ParamNaming) {
    match e {
        Expression::Variable(name) => out.push_str(name),
        Expression::Parameter(index) => match naming {
            ParamNaming::Placeholder => out.push('C'),
            ParamNaming::Provisional | ParamNaming::Indexed => {
                out.push('C');
                out.push_str(&index.to_string());
            }
        },
        Expression::Literal(n) => out.push_str(&n.render()),
        Expression::Function(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, arg, naming);
            out.push(')');
        }
        Expression::Sum(children) => {
            for (i, (sign, child)) in children.iter().enumerate() {
                if i == 0 {
                    if *sign == Sign::Minus {
                        out.push('-');
                    }
                } else {
                    out.push(if *sign == Sign::Plus { '+' } else { '-' });
                }
                let parens = matches!(child, Expression::Sum(_));
                if parens {
                    out.push('(');
                }
                write_expr(out, child, naming);
                if parens {
                    out.push(')');
                }
            }
        }
        Expression::Product(children) => {
            for (i, (exp, child)) in children.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                let parens = factor_needs_parens(child, *exp);
                if parens {
                    out.push('(');
                }
                write_expr(out, child, naming);
                if parens {
                    out.push(')');
                }
                if *exp != 1 {
                    out.push('^');
                    out.push_str(&exp.to_string());
                }
            }
        }
    }
}

fn factor_needs_parens(child: &Expression, exp: i64) -> bool {
    match child {
        Expression::Sum(_) | Expression::Product(_) => true,
        Expression::Literal(n) if exp != 1 => {
            n.is_negative() || matches!(n, Number::Rational(q) if !q.is_integer())
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Grammar vocabulary rendering
// ---------------------------------------------------------------------------

const MAX_GRAMMAR_EXPONENT: i64 = 64;

/// Renders a canonical expression using only the tokens an equation
/// grammar can emit: variables, the constant terminal `c`, the four
/// arithmetic operators, parentheses, and function names. Exponents become
/// repeated multiplication or division.
///
/// Fails for shapes outside that vocabulary: leftover numeric literals, a
/// sum with no positive summand (no leading negation exists), or a product
/// with no positive-exponent factor (no bare reciprocal exists).
pub fn to_grammar_text(form: &CanonicalForm) -> Result<String, ExprError> {
    grammar_text(&form.expr)
}

fn grammar_text(e: &Expression) -> Result<String, ExprError> {
    match e {
        Expression::Variable(name) => Ok(name.clone()),
        Expression::Parameter(_) => Ok("c".to_string()),
        Expression::Literal(n) => Err(ExprError::NotExpressible(format!(
            "literal {} has no grammar terminal; mask constants first",
            n.render()
        ))),
        Expression::Function(f, arg) => Ok(format!("{}({})", f.name(), grammar_text(arg)?)),
        Expression::Sum(children) => {
            let positives: Vec<&Expression> = children
                .iter()
                .filter(|(sign, _)| *sign == Sign::Plus)
                .map(|(_, child)| child)
                .collect();
            let negatives: Vec<&Expression> = children
                .iter()
                .filter(|(sign, _)| *sign == Sign::Minus)
                .map(|(_, child)| child)
                .collect();
            if positives.is_empty() {
                return Err(ExprError::NotExpressible(
                    "sum has no positive summand to lead with".into(),
                ));
            }
            let mut out = String::new();
            for (i, child) in positives.iter().enumerate() {
                if i > 0 {
                    out.push('+');
                }
                out.push_str(&grammar_text(child)?);
            }
            for child in negatives {
                out.push('-');
                out.push_str(&grammar_text(child)?);
            }
            Ok(out)
        }
        Expression::Product(children) => {
            let mut numerator: Vec<String> = Vec::new();
            let mut denominator: Vec<String> = Vec::new();
            for (exp, child) in children {
                let magnitude = exp.unsigned_abs();
                if magnitude as i64 > MAX_GRAMMAR_EXPONENT {
                    return Err(ExprError::NotExpressible(format!(
                        "exponent {exp} is too large to spell as repeated factors"
                    )));
                }
                let factor = grammar_factor(child)?;
                let side = if *exp > 0 { &mut numerator } else { &mut denominator };
                for _ in 0..magnitude {
                    side.push(factor.clone());
                }
            }
            if numerator.is_empty() {
                return Err(ExprError::NotExpressible(
                    "product has no positive-exponent factor to lead with".into(),
                ));
            }
            let mut out = numerator.join("*");
            for factor in denominator {
                out.push('/');
                out.push_str(&factor);
            }
            Ok(out)
        }
    }
}

fn grammar_factor(e: &Expression) -> Result<String, ExprError> {
    let text = grammar_text(e)?;
    if matches!(e, Expression::Sum(_)) {
        Ok(format!("({text})"))
    } else {
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{mask_constants, parse_expression, FuncKind};
    use super::*;

    fn key(text: &str) -> String {
        canonicalize(&parse_expression(text).unwrap()).key
    }

    #[test]
    fn commutativity_and_associativity() {
        assert_eq!(key("y+x"), key("x+y"));
        assert_eq!(key("(x+y)+z"), key("x+(y+z)"));
        assert_eq!(key("x*y"), key("y*x"));
        assert_eq!(key("(x*y)*z"), key("x*(y*z)"));
        assert_eq!(key("x+y"), "x+y");
    }

    #[test]
    fn powers_and_divisions_normalize() {
        assert_eq!(key("x + y*y"), "x+y^2");
        assert_eq!(key("x*x*x"), "x^3");
        assert_eq!(key("x/x"), "1");
        assert_eq!(key("x*1"), "x");
        assert_eq!(key("x+0"), "x");
        assert_eq!(key("x*0*y"), "0");
        assert_eq!(key("x/2"), "1/2*x");
        assert_eq!(key("2.5*x"), "5/2*x");
        assert_eq!(key("x/y/y"), "x*y^-2");
    }

    #[test]
    fn negation_has_one_spelling() {
        assert_eq!(key("-x"), "-x");
        assert_eq!(key("0-x"), "-x");
        assert_eq!(key("-1*x"), "-x");
        assert_eq!(key("-2*x"), "-2*x");
        assert_eq!(key("0-2*x"), "-2*x");
        assert_eq!(key("-(x*y)"), "-x*y");
        assert_eq!(key("x*(-y)"), "-x*y");
        assert_eq!(key("z+x*(-y)"), "z-x*y");
        assert_eq!(key("-(-x)"), "x");
    }

    #[test]
    fn like_terms_are_kept_and_products_not_distributed() {
        assert_eq!(key("x-x"), "x-x");
        assert_eq!(key("x+x"), "x+x");
        let expanded = key("x*x + x*y");
        let factored = key("x*(x+y)");
        assert_eq!(expanded, "x*y+x^2");
        assert_eq!(factored, "x*(x+y)");
        assert_ne!(expanded, factored);
    }

    #[test]
    fn exp_of_scaled_square_reference_shape() {
        let form = canonicalize(&parse_expression("exp(-x^2/2)").unwrap());
        assert_eq!(form.key, "exp(-1/2*x^2)");
        match &form.expr {
            Expression::Function(FuncKind::Exp, arg) => match arg.as_ref() {
                Expression::Product(children) => {
                    assert_eq!(children.len(), 2);
                    assert_eq!(
                        children[0],
                        (1, Expression::Literal(Number::rational(-1, 2)))
                    );
                    assert_eq!(children[1], (2, Expression::variable("x")));
                }
                other => panic!("expected scaled square argument, got {other:?}"),
            },
            other => panic!("expected exp node, got {other:?}"),
        }
    }

    #[test]
    fn constant_subtrees_collapse_to_one_parameter() {
        let two_params = Expression::Sum(vec![
            (Sign::Plus, Expression::parameter(0)),
            (Sign::Plus, Expression::parameter(1)),
        ]);
        let form = canonicalize(&two_params);
        assert_eq!(form.key, "C0");
        assert_eq!(form.n_parameters, 1);
        assert!(form.collapsed);
        assert_eq!(form.parameter_sources, vec![vec![0, 1]]);

        let scaled = Expression::Product(vec![
            (1, Expression::integer(2)),
            (1, Expression::parameter(0)),
            (1, Expression::variable("x")),
        ]);
        let form = canonicalize(&scaled);
        assert_eq!(form.key, "C0*x");
        assert!(form.collapsed);

        let wrapped = Expression::Function(FuncKind::Sin, Box::new(Expression::parameter(0)));
        let form = canonicalize(&wrapped);
        assert_eq!(form.key, "C0");
        assert!(form.collapsed);

        let shifted = Expression::Sum(vec![
            (Sign::Plus, Expression::variable("x")),
            (Sign::Minus, Expression::parameter(0)),
        ]);
        let form = canonicalize(&shifted);
        assert_eq!(form.key, "C0+x");
        assert!(form.collapsed, "a sign flip on a free constant is a reparameterization");
    }

    #[test]
    fn untouched_parameters_do_not_flag_collapse() {
        let plain = Expression::Sum(vec![
            (Sign::Plus, Expression::variable("x")),
            (Sign::Plus, Expression::parameter(0)),
        ]);
        let form = canonicalize(&plain);
        assert_eq!(form.key, "C0+x");
        assert!(!form.collapsed);
        assert_eq!(form.parameter_sources, vec![vec![0]]);
    }

    #[test]
    fn distinct_parameters_do_not_merge_across_structure() {
        // sin(c*x) * sin(c*x) with two distinct constants keeps two
        // degrees of freedom and does not become a square.
        let factor = |p: usize| {
            Expression::Function(
                FuncKind::Sin,
                Box::new(Expression::Product(vec![
                    (1, Expression::parameter(p)),
                    (1, Expression::variable("x")),
                ])),
            )
        };
        let product = Expression::Product(vec![(1, factor(0)), (1, factor(1))]);
        let form = canonicalize(&product);
        assert_eq!(form.key, "sin(C0*x)*sin(C1*x)");
        assert_eq!(form.n_parameters, 2);

        // The same structure with the *same* constant merges into a square.
        let product = Expression::Product(vec![(1, factor(0)), (1, factor(0))]);
        let form = canonicalize(&product);
        assert_eq!(form.key, "sin(C0*x)^2");
        assert_eq!(form.n_parameters, 1);
    }

    #[test]
    fn parameters_renumber_in_reading_order() {
        // Parameters arrive in one order, sort into another; numbering
        // follows the final left-to-right reading order.
        let e = Expression::Sum(vec![
            (
                Sign::Plus,
                Expression::Product(vec![
                    (1, Expression::parameter(1)),
                    (1, Expression::variable("y")),
                ]),
            ),
            (
                Sign::Plus,
                Expression::Product(vec![
                    (1, Expression::parameter(0)),
                    (1, Expression::variable("x")),
                ]),
            ),
        ]);
        let form = canonicalize(&e);
        assert_eq!(form.key, "C0*x+C1*y");
        assert_eq!(form.parameter_sources, vec![vec![0], vec![1]]);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let cases = [
            "x+y",
            "y-x",
            "-x",
            "x*y/z",
            "exp(-x^2/2)",
            "sin(x)*sin(x)",
            "1/2 + x + 0.5",
            "sqrt(x*x)",
            "x - (y - z)",
            "(x+y)*(x+y)",
            "2*x - 3*y + 4",
        ];
        for text in cases {
            let once = canonicalize(&parse_expression(text).unwrap());
            let twice = canonicalize(&once.expr);
            assert_eq!(once.key, twice.key, "idempotence broke for {text}");
        }
    }

    #[test]
    fn literal_folding_is_exact() {
        assert_eq!(key("1/2 + x + 0.5"), "1+x");
        assert_eq!(key("1/3 + 1/6"), "1/2");
        assert_eq!(key("0.1+0.2"), "3/10");
        assert_eq!(key("2^10"), "1024");
    }

    #[test]
    fn subtraction_of_sums_flattens() {
        assert_eq!(key("x - (y - z)"), "x-y+z");
        assert_eq!(key("x - (x+y)"), "x-x-y");
    }

    #[test]
    fn grammar_rendering_round_trips_into_vocabulary() {
        let grammar = |text: &str| {
            let masked = mask_constants(&parse_expression(text).unwrap());
            to_grammar_text(&canonicalize(&masked)).unwrap()
        };
        assert_eq!(grammar("2.5*x"), "c*x");
        assert_eq!(grammar("1/x"), "c/x");
        assert_eq!(grammar("x+2.5"), "c+x");
        assert_eq!(grammar("exp(-x^2/2)"), "exp(c*x*x)");
        assert_eq!(grammar("x-y"), "x-y");
        assert_eq!(grammar("q1*q2/(4*r^2)"), "c*q1*q2/r/r");
        assert_eq!(grammar("x/(y+z)"), "x/(y+z)");
    }

    #[test]
    fn grammar_rendering_rejects_out_of_vocabulary_shapes() {
        let form = canonicalize(&parse_expression("2*x").unwrap());
        assert!(matches!(
            to_grammar_text(&form),
            Err(ExprError::NotExpressible(_))
        ));
        let form = canonicalize(&parse_expression("0-x").unwrap());
        assert!(matches!(
            to_grammar_text(&form),
            Err(ExprError::NotExpressible(_))
        ));
        let form = canonicalize(&parse_expression("x/y").unwrap());
        assert_eq!(to_grammar_text(&form).unwrap(), "x/y");
    }
}
