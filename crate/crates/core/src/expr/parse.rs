//! Construction of expressions from infix text and from parse trees.
//!
//! Both paths share one precedence-climbing parser over a token stream.
//! For text, the stream comes from a tokenizer; for a parse tree, each
//! node's children become the stream directly — already-converted
//! subexpressions are injected as atoms between the node's operator
//! terminals, so grammars whose productions spell out precedence (the
//! usual expression-grammar layering) convert without re-parsing their
//! flattened yield.
//!
//! Conventions: `^` binds tightest and associates right, and its exponent
//! must fold to an integer; unary minus sits between `*` and `^`, so
//! `-x^2` reads as `-(x^2)`; an identifier is a function application
//! exactly when it is immediately followed by `(`, and must then be one of
//! the known function names. In text, every identifier — including `c` and
//! `pi` — is a variable; the constant terminal `c` is special only when
//! converting parse trees, where each occurrence becomes a fresh
//! parameter.

use num::rational::Ratio;

use super::{canonicalize, Expression, ExprError, FuncKind, Number, Sign};
use crate::grammar::Pcfg;
use crate::sample::ParseTree;

#[derive(Clone, Debug)]
enum Tok {
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Ident(String),
    Num(Number),
    /// An already-built subexpression (from a nonterminal child of a
    /// parse-tree node); behaves like a parenthesized operand.
    Atom(Expression),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    /// Byte offset in text parsing; child index in tree conversion.
    pos: usize,
}

// Binding powers: additive < multiplicative < unary minus < exponent.
const ADD_LEFT: u8 = 10;
const ADD_RIGHT: u8 = 11;
const MUL_LEFT: u8 = 20;
const MUL_RIGHT: u8 = 21;
const UNARY: u8 = 25;
const POW_LEFT: u8 = 40;
const POW_RIGHT: u8 = 39;

/// Parses infix arithmetic into a raw (uncanonicalized) expression.
pub fn parse_expression(text: &str) -> Result<Expression, ExprError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        i: 0,
        end: text.len(),
    };
    let e = parser.parse_expr(0)?;
    parser.expect_end()?;
    Ok(e)
}

/// Converts a parse tree over an equation grammar into an expression.
///
/// Leaf labels are interpreted as arithmetic tokens: operators and
/// parentheses structurally, `c` as a fresh parameter (numbered left to
/// right across the whole tree), numbers as literals, and other
/// identifiers as variables — or function applications when immediately
/// followed by `(`. Leaves must be terminals of `g`.
pub fn tree_to_expression(t: &ParseTree, g: &Pcfg) -> Result<Expression, ExprError> {
    let mut next_param = 0usize;
    node_to_expression(t, g, &mut next_param)
}

fn node_to_expression(
    t: &ParseTree,
    g: &Pcfg,
    next_param: &mut usize,
) -> Result<Expression, ExprError> {
    if t.is_terminal() {
        return match terminal_token(t.label(), g, next_param)? {
            Tok::Atom(e) => Ok(e),
            Tok::Ident(name) => Ok(Expression::Variable(name)),
            Tok::Num(n) => Ok(Expression::Literal(n)),
            _ => Err(ExprError::Syntax {
                position: 0,
                message: format!("terminal '{}' is not an expression", t.label()),
            }),
        };
    }
    let mut toks = Vec::with_capacity(t.children().len());
    for (index, child) in t.children().iter().enumerate() {
        let tok = if child.is_terminal() {
            terminal_token(child.label(), g, next_param)?
        } else {
            Tok::Atom(node_to_expression(child, g, next_param)?)
        };
        toks.push(Spanned { tok, pos: index });
    }
    let end = toks.len();
    let mut parser = Parser { toks, i: 0, end };
    let e = parser.parse_expr(0)?;
    parser.expect_end()?;
    Ok(e)
}

fn terminal_token(
    label: &str,
    g: &Pcfg,
    next_param: &mut usize,
) -> Result<Tok, ExprError> {
    match g.symbol_id(label) {
        Some(id) if g.is_terminal(id) => {}
        _ => return Err(ExprError::UnknownTerminal(label.to_string())),
    }
    Ok(match label {
        "+" => Tok::Plus,
        "-" => Tok::Minus,
        "*" => Tok::Star,
        "/" => Tok::Slash,
        "^" => Tok::Caret,
        "(" => Tok::LParen,
        ")" => Tok::RParen,
        "c" => {
            let index = *next_param;
            *next_param += 1;
            Tok::Atom(Expression::Parameter(index))
        }
        _ => {
            let first = label.chars().next();
            match first {
                Some(ch) if ch.is_ascii_digit() || ch == '.' => {
                    Tok::Num(parse_number(label).ok_or_else(|| {
                        ExprError::UnknownTerminal(label.to_string())
                    })?)
                }
                Some(ch) if ch.is_alphabetic() || ch == '_' => {
                    Tok::Ident(label.to_string())
                }
                _ => return Err(ExprError::UnknownTerminal(label.to_string())),
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

fn tokenize(text: &str) -> Result<Vec<Spanned>, ExprError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let pos = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' => {
                toks.push(Spanned { tok: Tok::Plus, pos });
                i += 1;
            }
            b'-' => {
                toks.push(Spanned { tok: Tok::Minus, pos });
                i += 1;
            }
            b'*' => {
                toks.push(Spanned { tok: Tok::Star, pos });
                i += 1;
            }
            b'/' => {
                toks.push(Spanned { tok: Tok::Slash, pos });
                i += 1;
            }
            b'^' => {
                toks.push(Spanned { tok: Tok::Caret, pos });
                i += 1;
            }
            b'(' => {
                toks.push(Spanned { tok: Tok::LParen, pos });
                i += 1;
            }
            b')' => {
                toks.push(Spanned { tok: Tok::RParen, pos });
                i += 1;
            }
            b'0'..=b'9' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    let frac_start = j + 1;
                    let mut k = frac_start;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == frac_start {
                        return Err(ExprError::Syntax {
                            position: j,
                            message: "decimal point must be followed by digits".into(),
                        });
                    }
                    j = k;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    let exp_start = k;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k > exp_start {
                        j = k;
                    }
                }
                let slice = &text[i..j];
                let n = parse_number(slice).ok_or_else(|| ExprError::Syntax {
                    position: pos,
                    message: format!("malformed number '{slice}'"),
                })?;
                toks.push(Spanned { tok: Tok::Num(n), pos });
                i = j;
            }
            _ if (b as char).is_alphabetic() || b == b'_' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && ((bytes[j] as char).is_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                toks.push(Spanned {
                    tok: Tok::Ident(text[i..j].to_string()),
                    pos,
                });
                i = j;
            }
            _ => {
                return Err(ExprError::Syntax {
                    position: pos,
                    message: format!("unexpected character '{}'", &text[pos..pos + 1]),
                });
            }
        }
    }
    Ok(toks)
}

/// Parses a number token: exact 64-bit rational for plain integers and
/// decimals when they fit, IEEE double otherwise (and always for
/// scientific notation).
fn parse_number(text: &str) -> Option<Number> {
    if text.contains(['e', 'E']) {
        return text.parse::<f64>().ok().map(Number::Float);
    }
    match text.split_once('.') {
        None => match text.parse::<i64>() {
            Ok(n) => Some(Number::integer(n)),
            Err(_) => text.parse::<f64>().ok().map(Number::Float),
        },
        Some((whole, frac)) => {
            let digits: String = format!("{whole}{frac}");
            let denom = 10i64.checked_pow(u32::try_from(frac.len()).ok()?);
            match (digits.parse::<i64>(), denom) {
                (Ok(numer), Some(denom)) => Some(Number::Rational(Ratio::new(numer, denom))),
                _ => text.parse::<f64>().ok().map(Number::Float),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Precedence climbing
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.i)
    }

    fn advance(&mut self) -> Option<Spanned> {
        let tok = self.toks.get(self.i).cloned();
        if tok.is_some() {
            self.i += 1;
        }
        tok
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |s| s.pos)
    }

    fn expect_end(&self) -> Result<(), ExprError> {
        match self.peek() {
            None => Ok(()),
            Some(s) => Err(ExprError::Syntax {
                position: s.pos,
                message: "unexpected trailing input".into(),
            }),
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Expression, ExprError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (left_bp, right_bp) = match self.peek().map(|s| &s.tok) {
                Some(Tok::Plus) | Some(Tok::Minus) => (ADD_LEFT, ADD_RIGHT),
                Some(Tok::Star) | Some(Tok::Slash) => (MUL_LEFT, MUL_RIGHT),
                Some(Tok::Caret) => (POW_LEFT, POW_RIGHT),
                _ => break,
            };
            if left_bp < min_bp {
                break;
            }
            let op = self.advance().expect("operator was peeked");
            if matches!(op.tok, Tok::Caret) {
                let exponent_pos = self.here();
                let rhs = self.parse_expr(right_bp)?;
                let exponent = integer_exponent(&rhs)
                    .ok_or(ExprError::NonIntegerExponent { position: exponent_pos })?;
                lhs = Expression::Product(vec![(exponent, lhs)]);
            } else {
                let rhs = self.parse_expr(right_bp)?;
                lhs = match op.tok {
                    Tok::Plus => {
                        Expression::Sum(vec![(Sign::Plus, lhs), (Sign::Plus, rhs)])
                    }
                    Tok::Minus => {
                        Expression::Sum(vec![(Sign::Plus, lhs), (Sign::Minus, rhs)])
                    }
                    Tok::Star => Expression::Product(vec![(1, lhs), (1, rhs)]),
                    Tok::Slash => Expression::Product(vec![(1, lhs), (-1, rhs)]),
                    _ => unreachable!("only infix operators reach here"),
                };
            }
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expression, ExprError> {
        let next = self.advance().ok_or(ExprError::Syntax {
            position: self.end,
            message: "unexpected end of input".into(),
        })?;
        match next.tok {
            Tok::Num(n) => Ok(Expression::Literal(n)),
            Tok::Atom(e) => Ok(e),
            Tok::Minus => {
                let operand = self.parse_expr(UNARY)?;
                Ok(negate(operand))
            }
            Tok::Plus => self.parse_expr(UNARY),
            Tok::LParen => {
                let e = self.parse_expr(0)?;
                match self.advance() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(e),
                    other => Err(ExprError::Syntax {
                        position: other.map_or(self.end, |s| s.pos),
                        message: "expected ')'".into(),
                    }),
                }
            }
            Tok::Ident(name) => {
                if matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
                    let f = FuncKind::from_name(&name)
                        .ok_or_else(|| ExprError::UnknownFunction(name.clone()))?;
                    self.advance();
                    let arg = self.parse_expr(0)?;
                    match self.advance() {
                        Some(Spanned { tok: Tok::RParen, .. }) => {
                            Ok(Expression::Function(f, Box::new(arg)))
                        }
                        other => Err(ExprError::Syntax {
                            position: other.map_or(self.end, |s| s.pos),
                            message: "expected ')' after function argument".into(),
                        }),
                    }
                } else {
                    Ok(Expression::Variable(name))
                }
            }
            tok => Err(ExprError::Syntax {
                position: next.pos,
                message: format!("unexpected token {tok:?}"),
            }),
        }
    }
}

fn negate(e: Expression) -> Expression {
    Expression::Product(vec![
        (1, Expression::Literal(Number::integer(-1))),
        (1, e),
    ])
}

/// Folds a parsed exponent down to an integer if it is one.
fn integer_exponent(e: &Expression) -> Option<i64> {
    match canonicalize(e).expr {
        Expression::Literal(Number::Rational(q)) if q.is_integer() => Some(q.to_integer()),
        Expression::Literal(Number::Float(f))
            if f.is_finite() && f.fract() == 0.0 && f.abs() <= 2f64.powi(53) =>
        {
            Some(f as i64)
        }
        _ => None,
    }
}
