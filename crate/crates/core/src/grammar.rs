//! Grammar and PCFG definitions, the grammar text format, validation, and the
//! built-in grammar families.
//!
//! A [`Pcfg`] is an immutable context-free grammar whose productions carry
//! probabilities: for every nonterminal with at least one rule, the
//! probabilities of its alternatives sum to one (within
//! [`PROBABILITY_SUM_TOLERANCE`]). Grammars are loaded from a small text
//! format (see [`parse_grammar`]) or built programmatically via
//! [`linear_grammar`] and [`universal_grammar`].
//!
//! Checked constructors reject grammars that violate the structural
//! invariants (probability sums, reachability, productivity). For diagnostic
//! work, [`parse_grammar_unchecked`] loads a grammar without those checks so
//! that [`validate`] can report the violations as data.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Absolute tolerance for per-nonterminal probability sums.
///
/// Decimal probability literals written to grammar files round-trip well
/// within this bound.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// Whether a symbol can expand further (`Nonterminal`) or is a literal token
/// of the generated language (`Terminal`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

/// A named grammar symbol. Names are unique within a grammar: no name may be
/// both a terminal and a nonterminal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrammarSymbol {
    pub name: Arc<str>,
    pub kind: SymbolKind,
}

/// Index of a symbol within its grammar's symbol table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(index: usize) -> SymbolId {
        SymbolId(u32::try_from(index).expect("symbol tables hold fewer than 2^32 entries"))
    }
}

/// A production rule `lhs -> rhs` with an attached probability.
///
/// The right-hand side is never empty: epsilon productions are rejected at
/// load time because they complicate counting and parsing for no benefit
/// here.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductionRule {
    pub lhs: SymbolId,
    pub rhs: Vec<SymbolId>,
    pub probability: f64,
}

/// An immutable probabilistic context-free grammar.
///
/// Construction validates the structural invariants; afterwards a `Pcfg` is
/// safe to share across threads freely.
#[derive(Clone, Debug, PartialEq)]
pub struct Pcfg {
    symbols: Vec<GrammarSymbol>,
    by_name: HashMap<Arc<str>, SymbolId>,
    rules: Vec<ProductionRule>,
    rules_by_lhs: Vec<Vec<usize>>,
    start: SymbolId,
}

/// Errors from grammar parsing and construction.
#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no start symbol declared (expected a `start: <NT>` directive)")]
    NoStart,
    #[error("probabilities for `{nonterminal}` sum to {sum} (expected 1 within {PROBABILITY_SUM_TOLERANCE:e})")]
    ProbabilitySum { nonterminal: String, sum: f64 },
    #[error("probability {probability} for a rule of `{nonterminal}` is outside (0, 1]")]
    ProbabilityRange {
        nonterminal: String,
        probability: f64,
    },
    #[error("symbol `{0}` is undeclared (bare names must appear as a rule left-hand side)")]
    UndeclaredSymbol(String),
    #[error("name `{0}` is used both as a terminal and a nonterminal")]
    DualKind(String),
    #[error("nonterminal `{0}` is unreachable from the start symbol")]
    Unreachable(String),
    #[error("nonterminal `{0}` cannot derive any finite sentence")]
    Unproductive(String),
    #[error("invalid symbol name `{0:?}`")]
    BadSymbolName(String),
    #[error("name `{0}` is reserved by the universal grammar")]
    ReservedName(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("infeasible probability configuration: {0}")]
    InfeasibleProbabilities(String),
}

impl Pcfg {
    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn symbols(&self) -> &[GrammarSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &GrammarSymbol {
        &self.symbols[id.index()]
    }

    /// The symbol's name as a cheaply clonable shared string.
    pub fn symbol_name(&self, id: SymbolId) -> &Arc<str> {
        &self.symbols[id.index()].name
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        self.symbols[id.index()].kind == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.symbols[id.index()].kind == SymbolKind::Nonterminal
    }

    pub fn rules(&self) -> &[ProductionRule] {
        &self.rules
    }

    pub fn rule(&self, index: usize) -> &ProductionRule {
        &self.rules[index]
    }

    /// Indices into [`Pcfg::rules`] of the productions of `lhs`, in
    /// declaration order. Empty for terminals.
    pub fn rules_for(&self, lhs: SymbolId) -> &[usize] {
        &self.rules_by_lhs[lhs.index()]
    }

    pub fn nonterminal_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols.iter().enumerate().filter_map(|(i, s)| {
            (s.kind == SymbolKind::Nonterminal).then_some(SymbolId(i as u32))
        })
    }

    pub fn terminal_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| (s.kind == SymbolKind::Terminal).then_some(SymbolId(i as u32)))
    }

    /// Renders the grammar in the text format accepted by [`parse_grammar`].
    ///
    /// Probabilities use the shortest decimal that round-trips exactly, so
    /// `parse_grammar(g.render())` reconstructs `g` bit-for-bit.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("start: {}\n", self.symbol_name(self.start)));
        for lhs in self.nonterminal_ids() {
            let rule_ids = self.rules_for(lhs);
            if rule_ids.is_empty() {
                continue;
            }
            let alts: Vec<String> = rule_ids
                .iter()
                .map(|&ri| {
                    let rule = &self.rules[ri];
                    let rhs: Vec<String> = rule
                        .rhs
                        .iter()
                        .map(|&sym| {
                            let s = self.symbol(sym);
                            match s.kind {
                                SymbolKind::Terminal => format!("'{}'", s.name),
                                SymbolKind::Nonterminal => s.name.to_string(),
                            }
                        })
                        .collect();
                    format!("{} [{}]", rhs.join(" "), rule.probability)
                })
                .collect();
            out.push_str(&format!(
                "{} -> {}\n",
                self.symbol_name(lhs),
                alts.join(" | ")
            ));
        }
        out
    }

    /// Structural equality with a per-rule probability tolerance, for
    /// comparisons across lossy serialization boundaries.
    pub fn approx_eq(&self, other: &Pcfg, tolerance: f64) -> bool {
        if self.symbols != other.symbols || self.start != other.start {
            return false;
        }
        self.rules.len() == other.rules.len()
            && self.rules.iter().zip(&other.rules).all(|(a, b)| {
                a.lhs == b.lhs && a.rhs == b.rhs && (a.probability - b.probability).abs() <= tolerance
            })
    }
}

impl fmt::Display for Pcfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

// ---------------------------------------------------------------------------
// Assembly from parsed or programmatic parts
// ---------------------------------------------------------------------------

/// One right-hand-side atom before symbol interning.
#[derive(Clone, Debug, PartialEq, Eq)]
enum RhsAtom {
    /// A quoted literal token.
    Terminal(String),
    /// A bare name that must refer to some rule's left-hand side.
    Reference(String),
}

/// Rule groups in declaration order: `(lhs, [(rhs, probability)])`.
type RuleGroups = Vec<(String, Vec<(Vec<RhsAtom>, f64)>)>;

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn valid_terminal_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(char::is_whitespace) && !name.contains('\'')
}

struct Assembly {
    start: String,
    groups: RuleGroups,
    normalize: bool,
    checked: bool,
}

fn assemble(parts: Assembly) -> Result<Pcfg, GrammarError> {
    let Assembly {
        start,
        groups,
        normalize,
        checked,
    } = parts;

    let mut symbols: Vec<GrammarSymbol> = Vec::new();
    let mut by_name: HashMap<Arc<str>, SymbolId> = HashMap::new();
    let intern = |symbols: &mut Vec<GrammarSymbol>,
                      by_name: &mut HashMap<Arc<str>, SymbolId>,
                      name: &str,
                      kind: SymbolKind|
     -> Result<SymbolId, GrammarError> {
        if let Some(&id) = by_name.get(name) {
            if symbols[id.index()].kind != kind {
                return Err(GrammarError::DualKind(name.to_string()));
            }
            return Ok(id);
        }
        let arc: Arc<str> = Arc::from(name);
        let id = SymbolId(symbols.len() as u32);
        symbols.push(GrammarSymbol {
            name: arc.clone(),
            kind,
        });
        by_name.insert(arc, id);
        Ok(id)
    };

    // Left-hand sides first, in declaration order.
    for (lhs, _) in &groups {
        if !is_identifier(lhs) {
            return Err(GrammarError::BadSymbolName(lhs.clone()));
        }
        intern(&mut symbols, &mut by_name, lhs, SymbolKind::Nonterminal)?;
    }

    // Right-hand sides: terminals are declared by use; bare references must
    // name an existing nonterminal (in unchecked mode they create a dead one
    // so `validate` can report it).
    let mut rules: Vec<ProductionRule> = Vec::new();
    for (lhs, alts) in &groups {
        let lhs_id = by_name[lhs.as_str()];
        for (rhs, probability) in alts {
            let mut rhs_ids = Vec::with_capacity(rhs.len());
            for atom in rhs {
                let id = match atom {
                    RhsAtom::Terminal(name) => {
                        if !valid_terminal_name(name) {
                            return Err(GrammarError::BadSymbolName(name.clone()));
                        }
                        intern(&mut symbols, &mut by_name, name, SymbolKind::Terminal)?
                    }
                    RhsAtom::Reference(name) => match by_name.get(name.as_str()) {
                        Some(&id) => id,
                        None if checked => {
                            return Err(GrammarError::UndeclaredSymbol(name.clone()))
                        }
                        None => {
                            intern(&mut symbols, &mut by_name, name, SymbolKind::Nonterminal)?
                        }
                    },
                };
                rhs_ids.push(id);
            }
            rules.push(ProductionRule {
                lhs: lhs_id,
                rhs: rhs_ids,
                probability: *probability,
            });
        }
    }

    let start_id = match by_name.get(start.as_str()) {
        Some(&id) if symbols[id.index()].kind == SymbolKind::Nonterminal => id,
        _ => return Err(GrammarError::UndeclaredSymbol(start)),
    };

    let mut rules_by_lhs: Vec<Vec<usize>> = vec![Vec::new(); symbols.len()];
    for (i, rule) in rules.iter().enumerate() {
        rules_by_lhs[rule.lhs.index()].push(i);
    }

    if normalize {
        for group in &rules_by_lhs {
            let sum: f64 = group.iter().map(|&ri| rules[ri].probability).sum();
            if sum.is_finite() && sum > 0.0 {
                for &ri in group {
                    rules[ri].probability /= sum;
                }
            }
        }
    }

    let grammar = Pcfg {
        symbols,
        by_name,
        rules,
        rules_by_lhs,
        start: start_id,
    };

    if checked {
        check_invariants(&grammar)?;
    }
    Ok(grammar)
}

fn check_invariants(g: &Pcfg) -> Result<(), GrammarError> {
    for nt in g.nonterminal_ids() {
        let group = g.rules_for(nt);
        if group.is_empty() {
            // Only possible via programmatic construction; the text parser
            // cannot produce a ruleless nonterminal in checked mode.
            return Err(GrammarError::Unproductive(g.symbol_name(nt).to_string()));
        }
        let mut sum = 0.0;
        for &ri in group {
            let p = g.rule(ri).probability;
            if !(p > 0.0 && p <= 1.0) {
                return Err(GrammarError::ProbabilityRange {
                    nonterminal: g.symbol_name(nt).to_string(),
                    probability: p,
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(GrammarError::ProbabilitySum {
                nonterminal: g.symbol_name(nt).to_string(),
                sum,
            });
        }
    }

    for nt in unreachable_nonterminals(g) {
        return Err(GrammarError::Unreachable(g.symbol_name(nt).to_string()));
    }
    for nt in unproductive_nonterminals(g) {
        return Err(GrammarError::Unproductive(g.symbol_name(nt).to_string()));
    }
    Ok(())
}

fn unreachable_nonterminals(g: &Pcfg) -> Vec<SymbolId> {
    let mut reached = vec![false; g.symbols().len()];
    let mut queue = vec![g.start()];
    reached[g.start().index()] = true;
    while let Some(sym) = queue.pop() {
        for &ri in g.rules_for(sym) {
            for &child in &g.rule(ri).rhs {
                if !reached[child.index()] {
                    reached[child.index()] = true;
                    if g.is_nonterminal(child) {
                        queue.push(child);
                    }
                }
            }
        }
    }
    g.nonterminal_ids()
        .filter(|id| !reached[id.index()])
        .collect()
}

fn unproductive_nonterminals(g: &Pcfg) -> Vec<SymbolId> {
    let mut productive = vec![false; g.symbols().len()];
    for t in g.terminal_ids() {
        productive[t.index()] = true;
    }
    loop {
        let mut changed = false;
        for nt in g.nonterminal_ids() {
            if productive[nt.index()] {
                continue;
            }
            let derives = g
                .rules_for(nt)
                .iter()
                .any(|&ri| g.rule(ri).rhs.iter().all(|s| productive[s.index()]));
            if derives {
                productive[nt.index()] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    g.nonterminal_ids()
        .filter(|id| !productive[id.index()])
        .collect()
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Parses the grammar text format and validates the result.
///
/// Format, one rule group per line:
///
/// ```text
/// # comment
/// start: E
/// E -> E '+' V [0.4] | V [0.6]
/// V -> 'x' [0.5] | 'y' [0.5]
/// ```
///
/// Bare names are nonterminals and must appear as some rule's left-hand
/// side; quoted names are terminals. Each alternative carries a decimal
/// probability in brackets. The `start:` directive is required. With
/// `normalize: true`, bracket values are treated as positive weights and
/// normalized per nonterminal; otherwise each group must sum to 1 within
/// [`PROBABILITY_SUM_TOLERANCE`]. Repeated left-hand sides merge their
/// alternatives in file order.
pub fn parse_grammar(text: &str) -> Result<Pcfg, GrammarError> {
    parse_grammar_inner(text, true)
}

/// Parses the grammar text format without semantic validation.
///
/// Syntax errors are still reported, but probability sums, reachability, and
/// productivity are not enforced, so the result may violate the [`Pcfg`]
/// invariants. Intended for diagnostics: load a suspect grammar, then run
/// [`validate`] to get the violation list.
pub fn parse_grammar_unchecked(text: &str) -> Result<Pcfg, GrammarError> {
    parse_grammar_inner(text, false)
}

fn parse_grammar_inner(text: &str, checked: bool) -> Result<Pcfg, GrammarError> {
    let mut start: Option<String> = None;
    let mut normalize = false;
    let mut groups: RuleGroups = Vec::new();
    let mut group_index: HashMap<String, usize> = HashMap::new();

    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let tokens = scan_line(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        match classify_line(&tokens, line_no)? {
            Line::Directive { name, value, column } => match name.as_str() {
                "start" => start = Some(value),
                "normalize" => match value.as_str() {
                    "true" => normalize = true,
                    "false" => normalize = false,
                    other => {
                        return Err(GrammarError::Syntax {
                            line: line_no,
                            column,
                            message: format!(
                                "directive `normalize` expects true or false, got `{other}`"
                            ),
                        })
                    }
                },
                other => {
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column,
                        message: format!("unknown directive `{other}`"),
                    })
                }
            },
            Line::Rule { lhs, alts } => match group_index.get(&lhs) {
                Some(&i) => groups[i].1.extend(alts),
                None => {
                    group_index.insert(lhs.clone(), groups.len());
                    groups.push((lhs, alts));
                }
            },
        }
    }

    let start = start.ok_or(GrammarError::NoStart)?;
    assemble(Assembly {
        start,
        groups,
        normalize,
        checked,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Bare(String),
    Quoted(String),
    Arrow,
    Pipe,
    Colon,
    Probability(f64),
}

/// A token plus the 1-based column where it starts.
type Spanned = (Token, usize);

fn scan_line(line: &str, line_no: usize) -> Result<Vec<Spanned>, GrammarError> {
    let bytes: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let err = |column: usize, message: String| GrammarError::Syntax {
        line: line_no,
        column,
        message,
    };
    while i < bytes.len() {
        let c = bytes[i];
        let column = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '\'' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != '\'' {
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(err(column, "unterminated quoted terminal".into()));
                }
                let name: String = bytes[i + 1..j].iter().collect();
                if name.is_empty() {
                    return Err(err(column, "empty quoted terminal".into()));
                }
                tokens.push((Token::Quoted(name), column));
                i = j + 1;
            }
            '-' if bytes.get(i + 1) == Some(&'>') => {
                tokens.push((Token::Arrow, column));
                i += 2;
            }
            '|' => {
                tokens.push((Token::Pipe, column));
                i += 1;
            }
            ':' => {
                tokens.push((Token::Colon, column));
                i += 1;
            }
            '[' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != ']' {
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(err(column, "unterminated probability bracket".into()));
                }
                let literal: String = bytes[i + 1..j].iter().collect();
                let value: f64 = literal
                    .trim()
                    .parse()
                    .map_err(|_| err(column, format!("invalid probability literal `{literal}`")))?;
                if !value.is_finite() {
                    return Err(err(column, "probability must be finite".into()));
                }
                tokens.push((Token::Probability(value), column));
                i = j + 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == '_') {
                    j += 1;
                }
                let name: String = bytes[i..j].iter().collect();
                tokens.push((Token::Bare(name), column));
                i = j;
            }
            other => return Err(err(column, format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

enum Line {
    Directive {
        name: String,
        value: String,
        column: usize,
    },
    Rule {
        lhs: String,
        alts: Vec<(Vec<RhsAtom>, f64)>,
    },
}

fn classify_line(tokens: &[Spanned], line_no: usize) -> Result<Line, GrammarError> {
    let err = |column: usize, message: String| GrammarError::Syntax {
        line: line_no,
        column,
        message,
    };
    // Directive: `name: value`.
    if let [(Token::Bare(name), col), (Token::Colon, _), (Token::Bare(value), _)] = tokens {
        return Ok(Line::Directive {
            name: name.clone(),
            value: value.clone(),
            column: *col,
        });
    }
    // Rule: `LHS -> atom... [p] | atom... [p] | ...`.
    let (lhs, lhs_col) = match tokens.first() {
        Some((Token::Bare(name), col)) => (name.clone(), *col),
        Some((_, col)) => return Err(err(*col, "expected a nonterminal name".into())),
        None => unreachable!("empty lines are filtered before classification"),
    };
    match tokens.get(1) {
        Some((Token::Arrow, _)) => {}
        Some((_, col)) => return Err(err(*col, "expected `->`".into())),
        None => return Err(err(lhs_col, "expected `->` after nonterminal".into())),
    }

    let mut alts = Vec::new();
    let mut rhs: Vec<RhsAtom> = Vec::new();
    let mut probability: Option<f64> = None;
    let mut last_col = lhs_col;
    for (token, col) in &tokens[2..] {
        last_col = *col;
        match token {
            Token::Bare(name) => {
                if probability.is_some() {
                    return Err(err(*col, "expected `|` before next alternative".into()));
                }
                rhs.push(RhsAtom::Reference(name.clone()));
            }
            Token::Quoted(name) => {
                if probability.is_some() {
                    return Err(err(*col, "expected `|` before next alternative".into()));
                }
                rhs.push(RhsAtom::Terminal(name.clone()));
            }
            Token::Probability(p) => {
                if probability.is_some() {
                    return Err(err(*col, "duplicate probability bracket".into()));
                }
                if rhs.is_empty() {
                    return Err(err(*col, "empty right-hand side".into()));
                }
                probability = Some(*p);
            }
            Token::Pipe => {
                let p = probability
                    .take()
                    .ok_or_else(|| err(*col, "alternative is missing its [probability]".into()))?;
                alts.push((std::mem::take(&mut rhs), p));
            }
            Token::Arrow => return Err(err(*col, "unexpected `->`".into())),
            Token::Colon => return Err(err(*col, "unexpected `:`".into())),
        }
    }
    match probability {
        Some(p) => alts.push((rhs, p)),
        None => {
            return Err(err(
                last_col,
                "alternative is missing its [probability]".into(),
            ))
        }
    }
    Ok(Line::Rule { lhs, alts })
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

/// A structural violation found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    ProbabilitySum { nonterminal: String, sum: f64 },
    ProbabilityRange { nonterminal: String, probability: f64 },
    RulelessNonterminal { nonterminal: String },
    Unreachable { nonterminal: String },
    Unproductive { nonterminal: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProbabilitySum { nonterminal, sum } => {
                write!(f, "probabilities for `{nonterminal}` sum to {sum}")
            }
            Violation::ProbabilityRange {
                nonterminal,
                probability,
            } => write!(
                f,
                "rule of `{nonterminal}` has probability {probability} outside (0, 1]"
            ),
            Violation::RulelessNonterminal { nonterminal } => {
                write!(f, "nonterminal `{nonterminal}` has no rules")
            }
            Violation::Unreachable { nonterminal } => {
                write!(f, "nonterminal `{nonterminal}` is unreachable from the start symbol")
            }
            Violation::Unproductive { nonterminal } => {
                write!(f, "nonterminal `{nonterminal}` cannot derive any finite sentence")
            }
        }
    }
}

/// Result of [`validate`]: structural violations plus a coverage probe that
/// flags improper (leaky) grammars.
///
/// A grammar can satisfy every structural invariant yet still assign
/// positive probability to non-terminating derivations; such grammars show
/// `start_coverage` well below 1 at the probe horizon.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Height horizon used for the coverage probe.
    pub coverage_horizon: usize,
    /// Total probability of start-symbol parse trees with height up to the
    /// horizon.
    pub start_coverage: f64,
    /// Whether coverage was nondecreasing in height over the probe range
    /// (it always should be; `false` indicates a numeric anomaly).
    pub coverage_nondecreasing: bool,
}

impl ValidationReport {
    /// True when no structural violations were found.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default probe horizon for [`validate`].
pub const DEFAULT_VALIDATION_HORIZON: usize = 40;

/// Reports every structural violation in `g` (empty list iff valid) and
/// probes coverage at the default horizon of 40.
pub fn validate(g: &Pcfg) -> ValidationReport {
    validate_with_horizon(g, DEFAULT_VALIDATION_HORIZON)
}

/// [`validate`] with an explicit coverage probe horizon.
pub fn validate_with_horizon(g: &Pcfg, horizon: usize) -> ValidationReport {
    let mut violations = Vec::new();
    for nt in g.nonterminal_ids() {
        let group = g.rules_for(nt);
        let name = || g.symbol_name(nt).to_string();
        if group.is_empty() {
            violations.push(Violation::RulelessNonterminal { nonterminal: name() });
            continue;
        }
        let mut sum = 0.0;
        for &ri in group {
            let p = g.rule(ri).probability;
            if !(p > 0.0 && p <= 1.0) {
                violations.push(Violation::ProbabilityRange {
                    nonterminal: name(),
                    probability: p,
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            violations.push(Violation::ProbabilitySum {
                nonterminal: name(),
                sum,
            });
        }
    }
    for nt in unreachable_nonterminals(g) {
        violations.push(Violation::Unreachable {
            nonterminal: g.symbol_name(nt).to_string(),
        });
    }
    for nt in unproductive_nonterminals(g) {
        violations.push(Violation::Unproductive {
            nonterminal: g.symbol_name(nt).to_string(),
        });
    }

    let table = crate::analytics::CoverageTable::build(g, horizon);
    let series: Vec<f64> = (0..=horizon).map(|h| table.coverage(g.start(), h)).collect();
    let coverage_nondecreasing = series.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    ValidationReport {
        violations,
        coverage_horizon: horizon,
        start_coverage: *series.last().unwrap_or(&0.0),
        coverage_nondecreasing,
    }
}

// ---------------------------------------------------------------------------
// Built-in grammar families
// ---------------------------------------------------------------------------

/// Multiplicative biases between paired rule groups of the universal
/// grammar. A ratio of 1 leaves the group's baseline split untouched.
///
/// * `r_sum` — addition : subtraction within the E recursion mass.
/// * `r_mul` — multiplication : division within the F recursion mass.
/// * `r_const` — constant : variable within T's non-recursive mass.
/// * `r_funct` — function block : parenthesized expression within R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasRatios {
    pub r_sum: f64,
    pub r_mul: f64,
    pub r_const: f64,
    pub r_funct: f64,
}

impl BiasRatios {
    /// All ratios 1: the unbiased universal grammar.
    pub fn uniform() -> Self {
        BiasRatios {
            r_sum: 1.0,
            r_mul: 1.0,
            r_const: 1.0,
            r_funct: 1.0,
        }
    }

    /// The preset favoring subtraction, multiplication, and variables over
    /// bare constants, matching the distribution of operators observed in
    /// physics equations. A constant-to-variable ratio of 0.25 means a
    /// variable leaf is four times as likely as a constant leaf.
    pub fn biased() -> Self {
        BiasRatios {
            r_sum: 0.4,
            r_mul: 1.5,
            r_const: 0.25,
            r_funct: 0.67,
        }
    }

    fn check(&self) -> Result<(), GrammarError> {
        for (name, v) in [
            ("r_sum", self.r_sum),
            ("r_mul", self.r_mul),
            ("r_const", self.r_const),
            ("r_funct", self.r_funct),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GrammarError::ParameterOutOfRange(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Structural probabilities of the universal grammar: the recursion masses
/// of E and F, and T's split among the recursive branch (R), variables, and
/// the constant terminal. `p_r + p_v + p_c` must equal 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuralProbs {
    /// Mass of E's two recursive alternatives (+, −) combined.
    pub p_recurse_e: f64,
    /// Mass of F's two recursive alternatives (*, /) combined.
    pub p_recurse_f: f64,
    /// P(T → R).
    pub p_r: f64,
    /// P(T → V) before the `r_const` bias is applied.
    pub p_v: f64,
    /// P(T → 'c') before the `r_const` bias is applied.
    pub p_c: f64,
}

impl Default for StructuralProbs {
    fn default() -> Self {
        StructuralProbs {
            p_recurse_e: 0.4,
            p_recurse_f: 0.4,
            p_r: 0.2,
            p_v: 0.4,
            p_c: 0.4,
        }
    }
}

/// Baseline split of R's mass between the parenthesized alternative and the
/// four-function block. Fixed constants of the grammar family; the
/// `r_funct` ratio biases the block odds around this baseline.
const R_PAREN_BASELINE: f64 = 0.6;
const R_FUNCTION_BASELINE: f64 = 0.4;

const UNIVERSAL_FUNCTIONS: [&str; 4] = ["sin", "cos", "sqrt", "exp"];

/// Names that cannot be used as variables of the universal grammar.
const UNIVERSAL_RESERVED: [&str; 10] =
    ["c", "sin", "cos", "sqrt", "exp", "E", "F", "T", "R", "V"];

/// Splits `mass` between two alternatives whose odds are `r : 1`.
fn split_mass(mass: f64, r: f64) -> (f64, f64) {
    let denom = 1.0 + r;
    (mass * (r / denom), mass * (1.0 / denom))
}

/// Builds the sum-of-variables grammar `E -> E '+' V [p] | V [1-p]` with
/// `n_vars` uniformly weighted variables named x, y, z, a, b, ….
pub fn linear_grammar(n_vars: usize, p: f64) -> Result<Pcfg, GrammarError> {
    if !(1..=26).contains(&n_vars) {
        return Err(GrammarError::ParameterOutOfRange(format!(
            "n_vars must be in 1..=26, got {n_vars}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(GrammarError::ParameterOutOfRange(format!(
            "recursion probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    let names = linear_variable_names(n_vars);
    let uniform = 1.0 / n_vars as f64;
    let groups: RuleGroups = vec![
        (
            "E".into(),
            vec![
                (
                    vec![
                        RhsAtom::Reference("E".into()),
                        RhsAtom::Terminal("+".into()),
                        RhsAtom::Reference("V".into()),
                    ],
                    p,
                ),
                (vec![RhsAtom::Reference("V".into())], 1.0 - p),
            ],
        ),
        (
            "V".into(),
            names
                .iter()
                .map(|name| (vec![RhsAtom::Terminal(name.clone())], uniform))
                .collect(),
        ),
    ];
    assemble(Assembly {
        start: "E".into(),
        groups,
        normalize: false,
        checked: true,
    })
}

/// Variable names used by [`linear_grammar`]: x, y, z, then a, b, c, ….
pub fn linear_variable_names(n_vars: usize) -> Vec<String> {
    let order = "xyzabcdefghijklmnopqrstuvw";
    order.chars().take(n_vars).map(String::from).collect()
}

/// Builds the five-nonterminal universal expression grammar
///
/// ```text
/// E -> E '+' F | E '-' F | F
/// F -> F '*' T | F '/' T | T
/// T -> R | V | 'c'
/// R -> '(' E ')' | 'sin' '(' E ')' | 'cos' '(' E ')' | 'sqrt' '(' E ')' | 'exp' '(' E ')'
/// V -> one rule per variable, uniform
/// ```
///
/// with probabilities determined by `structural` and biased by `ratios`.
/// With all ratios 1 and default structural probabilities the distribution
/// is exactly (bit-for-bit) the reference one: E and F recurse with 0.2 per
/// operator and fall through with 0.6; T picks R/V/'c' with 0.2/0.4/0.4; R
/// parenthesizes with 0.6 and picks each function with 0.1.
pub fn universal_grammar<S: AsRef<str>>(
    variables: &[S],
    ratios: BiasRatios,
    structural: StructuralProbs,
) -> Result<Pcfg, GrammarError> {
    if variables.is_empty() {
        return Err(GrammarError::ParameterOutOfRange(
            "at least one variable is required".into(),
        ));
    }
    let mut names: Vec<String> = Vec::with_capacity(variables.len());
    for v in variables {
        let name = v.as_ref();
        if !is_identifier(name) {
            return Err(GrammarError::BadSymbolName(name.to_string()));
        }
        if UNIVERSAL_RESERVED.contains(&name) {
            return Err(GrammarError::ReservedName(name.to_string()));
        }
        if names.iter().any(|n| n == name) {
            return Err(GrammarError::ParameterOutOfRange(format!(
                "duplicate variable `{name}`"
            )));
        }
        names.push(name.to_string());
    }
    ratios.check()?;

    let StructuralProbs {
        p_recurse_e,
        p_recurse_f,
        p_r,
        p_v,
        p_c,
    } = structural;
    for (name, v) in [
        ("p_recurse_e", p_recurse_e),
        ("p_recurse_f", p_recurse_f),
        ("p_r", p_r),
        ("p_v", p_v),
        ("p_c", p_c),
    ] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(GrammarError::ParameterOutOfRange(format!(
                "{name} must lie strictly inside (0, 1), got {v}"
            )));
        }
    }
    if (p_r + p_v + p_c - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(GrammarError::InfeasibleProbabilities(format!(
            "p_r + p_v + p_c must equal 1, got {}",
            p_r + p_v + p_c
        )));
    }

    let (p_add, p_sub) = split_mass(p_recurse_e, ratios.r_sum);
    let (p_mul, p_div) = split_mass(p_recurse_f, ratios.r_mul);
    let (p_const, p_var) = split_mass(p_v + p_c, ratios.r_const);
    let function_weight = R_FUNCTION_BASELINE * ratios.r_funct;
    let r_total = R_PAREN_BASELINE + function_weight;
    let p_paren = R_PAREN_BASELINE / r_total;
    let p_function = (function_weight / r_total) / UNIVERSAL_FUNCTIONS.len() as f64;

    let feasible = [
        p_add,
        p_sub,
        1.0 - p_recurse_e,
        p_mul,
        p_div,
        1.0 - p_recurse_f,
        p_r,
        p_var,
        p_const,
        p_paren,
        p_function,
    ];
    if let Some(bad) = feasible.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(GrammarError::InfeasibleProbabilities(format!(
            "derived rule probability {bad} falls outside (0, 1)"
        )));
    }

    let term = |s: &str| RhsAtom::Terminal(s.into());
    let nt = |s: &str| RhsAtom::Reference(s.into());
    let call = |f: &str| vec![term(f), term("("), nt("E"), term(")")];

    let mut r_alts = vec![(vec![term("("), nt("E"), term(")")], p_paren)];
    for f in UNIVERSAL_FUNCTIONS {
        r_alts.push((call(f), p_function));
    }

    let uniform = 1.0 / names.len() as f64;
    let groups: RuleGroups = vec![
        (
            "E".into(),
            vec![
                (vec![nt("E"), term("+"), nt("F")], p_add),
                (vec![nt("E"), term("-"), nt("F")], p_sub),
                (vec![nt("F")], 1.0 - p_recurse_e),
            ],
        ),
        (
            "F".into(),
            vec![
                (vec![nt("F"), term("*"), nt("T")], p_mul),
                (vec![nt("F"), term("/"), nt("T")], p_div),
                (vec![nt("T")], 1.0 - p_recurse_f),
            ],
        ),
        (
            "T".into(),
            vec![
                (vec![nt("R")], p_r),
                (vec![nt("V")], p_var),
                (vec![term("c")], p_const),
            ],
        ),
        ("R".into(), r_alts),
        (
            "V".into(),
            names
                .iter()
                .map(|name| (vec![RhsAtom::Terminal(name.clone())], uniform))
                .collect(),
        ),
    ];
    assemble(Assembly {
        start: "E".into(),
        groups,
        normalize: false,
        checked: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs_for(g: &Pcfg, lhs: &str) -> Vec<f64> {
        let id = g.symbol_id(lhs).unwrap();
        g.rules_for(id).iter().map(|&ri| g.rule(ri).probability).collect()
    }

    #[test]
    fn minimal_single_rule_grammar() {
        let g = parse_grammar("start: E\nE -> 'x' [1.0]\n").unwrap();
        assert_eq!(g.rules().len(), 1);
        assert_eq!(g.symbol_name(g.start()).as_ref(), "E");
        let x = g.symbol_id("x").unwrap();
        assert!(g.is_terminal(x));
        assert_eq!(g.rule(0).probability, 1.0);
    }

    #[test]
    fn linear_grammar_text_matches_builder() {
        let text = "start: E\nE -> E '+' V [0.5] | V [0.5]\nV -> 'x' [0.5] | 'y' [0.5]\n";
        let parsed = parse_grammar(text).unwrap();
        assert_eq!(probs_for(&parsed, "E"), vec![0.5, 0.5]);
        let built = linear_grammar(2, 0.5).unwrap();
        assert_eq!(parsed, built);
    }

    #[test]
    fn probability_sum_violation_names_nonterminal() {
        let text = "start: E\nE -> E '+' V [0.5] | V [0.4]\nV -> 'x' [1.0]\n";
        match parse_grammar(text) {
            Err(GrammarError::ProbabilitySum { nonterminal, sum }) => {
                assert_eq!(nonterminal, "E");
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("expected probability-sum error, got {other:?}"),
        }
    }

    #[test]
    fn normalize_directive_rescales_weights() {
        let text = "start: E\nnormalize: true\nE -> E '+' V [3] | V [1]\nV -> 'x' [7]\n";
        let g = parse_grammar(text).unwrap();
        assert_eq!(probs_for(&g, "E"), vec![0.75, 0.25]);
        assert_eq!(probs_for(&g, "V"), vec![1.0]);
    }

    #[test]
    fn repeated_lhs_lines_merge_in_order() {
        let text = "start: V\nV -> 'x' [0.25]\nV -> 'y' [0.25] | 'z' [0.5]\n";
        let g = parse_grammar(text).unwrap();
        assert_eq!(probs_for(&g, "V"), vec![0.25, 0.25, 0.5]);
        let rhs_names: Vec<&str> = g
            .rules_for(g.start())
            .iter()
            .map(|&ri| g.symbol_name(g.rule(ri).rhs[0]).as_ref())
            .collect();
        assert_eq!(rhs_names, vec!["x", "y", "z"]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# heading\n\nstart: E # trailing\nE -> 'x' [1.0] # rule\n";
        let g = parse_grammar(text).unwrap();
        assert_eq!(g.rules().len(), 1);
    }

    #[test]
    fn undeclared_bare_symbol_is_an_error() {
        let text = "start: E\nE -> V [1.0]\n";
        match parse_grammar(text) {
            Err(GrammarError::UndeclaredSymbol(name)) => assert_eq!(name, "V"),
            other => panic!("expected undeclared-symbol error, got {other:?}"),
        }
    }

    #[test]
    fn dual_kind_name_is_an_error() {
        let text = "start: E\nE -> 'E' [1.0]\n";
        match parse_grammar(text) {
            Err(GrammarError::DualKind(name)) => assert_eq!(name, "E"),
            other => panic!("expected dual-kind error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_grammar("start: E\nE -> 'x\n") {
            Err(GrammarError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 6);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_grammar("start: E\nE -> 'x'\n"),
            Err(GrammarError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_grammar("speed: E\nE -> 'x' [1]\n"),
            Err(GrammarError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_grammar("E -> 'x' [1.0]\n"),
            Err(GrammarError::NoStart)
        ));
        assert!(matches!(
            parse_grammar("start: Q\nE -> 'x' [1.0]\n"),
            Err(GrammarError::UndeclaredSymbol(_))
        ));
    }

    #[test]
    fn unreachable_nonterminal_is_an_error() {
        let text = "start: E\nE -> 'x' [1.0]\nW -> 'y' [1.0]\n";
        match parse_grammar(text) {
            Err(GrammarError::Unreachable(name)) => assert_eq!(name, "W"),
            other => panic!("expected unreachable error, got {other:?}"),
        }
    }

    #[test]
    fn unproductive_nonterminal_is_an_error() {
        let text = "start: E\nE -> E E [1.0]\n";
        match parse_grammar(text) {
            Err(GrammarError::Unproductive(name)) => assert_eq!(name, "E"),
            other => panic!("expected unproductive error, got {other:?}"),
        }
    }

    #[test]
    fn unchecked_parse_defers_violations_to_validate() {
        let g = parse_grammar_unchecked("start: E\nE -> E E [1.0]\n").unwrap();
        let report = validate(&g);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Unproductive { nonterminal } if nonterminal == "E")));
        assert_eq!(report.start_coverage, 0.0);
        assert!(report.coverage_nondecreasing);
    }

    #[test]
    fn validate_reports_probability_leak_via_coverage() {
        let g = linear_grammar(1, 0.5).unwrap();
        let report = validate(&g);
        assert!(report.is_valid());
        assert!(report.coverage_nondecreasing);
        let expected = 1.0 - 0.5f64.powi(39);
        assert!((report.start_coverage - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_grammar_shapes() {
        let g = linear_grammar(2, 0.5).unwrap();
        assert_eq!(g.rules().len(), 4);
        let g1 = linear_grammar(1, 0.3).unwrap();
        assert_eq!(probs_for(&g1, "V"), vec![1.0]);
        let g3 = linear_grammar(3, 0.5).unwrap();
        for p in probs_for(&g3, "V") {
            assert_eq!(p, 1.0 / 3.0);
        }
        assert!(linear_grammar(0, 0.5).is_err());
        assert!(linear_grammar(27, 0.5).is_err());
        assert!(linear_grammar(2, 0.0).is_err());
        assert!(linear_grammar(2, 1.0).is_err());
    }

    #[test]
    fn universal_grammar_uniform_is_bit_exact() {
        let g =
            universal_grammar(&["x", "y"], BiasRatios::uniform(), StructuralProbs::default())
                .unwrap();
        assert_eq!(probs_for(&g, "E"), vec![0.2, 0.2, 0.6]);
        assert_eq!(probs_for(&g, "F"), vec![0.2, 0.2, 0.6]);
        assert_eq!(probs_for(&g, "T"), vec![0.2, 0.4, 0.4]);
        assert_eq!(probs_for(&g, "R"), vec![0.6, 0.1, 0.1, 0.1, 0.1]);
        assert_eq!(probs_for(&g, "V"), vec![0.5, 0.5]);
    }

    #[test]
    fn universal_grammar_single_variable() {
        let g = universal_grammar(&["x"], BiasRatios::uniform(), StructuralProbs::default())
            .unwrap();
        assert_eq!(probs_for(&g, "V"), vec![1.0]);
    }

    #[test]
    fn universal_grammar_biased_distributions() {
        let g = universal_grammar(&["x", "y"], BiasRatios::biased(), StructuralProbs::default())
            .unwrap();
        let e = probs_for(&g, "E");
        assert!((e[0] - 0.4 * 0.4 / 1.4).abs() < 1e-15);
        assert!((e[1] - 0.4 / 1.4).abs() < 1e-15);
        assert_eq!(e[2], 0.6);
        let f = probs_for(&g, "F");
        assert!((f[0] - 0.24).abs() < 1e-15);
        assert!((f[1] - 0.16).abs() < 1e-15);
        let t = probs_for(&g, "T");
        assert_eq!(t[0], 0.2);
        assert!((t[1] - 0.64).abs() < 1e-15);
        assert!((t[2] - 0.16).abs() < 1e-15);
        let r = probs_for(&g, "R");
        assert!((r[0] - 0.6 / 0.868).abs() < 1e-15);
        assert!((r[1] - 0.268 / 0.868 / 4.0).abs() < 1e-15);
        for lhs in ["E", "F", "T", "R", "V"] {
            let sum: f64 = probs_for(&g, lhs).iter().sum();
            assert!((sum - 1.0).abs() < PROBABILITY_SUM_TOLERANCE);
        }
    }

    #[test]
    fn universal_grammar_rejects_bad_variables() {
        let uniform = BiasRatios::uniform();
        let sp = StructuralProbs::default();
        assert!(matches!(
            universal_grammar(&["c"], uniform, sp),
            Err(GrammarError::ReservedName(_))
        ));
        assert!(matches!(
            universal_grammar(&["sin"], uniform, sp),
            Err(GrammarError::ReservedName(_))
        ));
        assert!(matches!(
            universal_grammar(&["x", "x"], uniform, sp),
            Err(GrammarError::ParameterOutOfRange(_))
        ));
        let w: &[&str] = &[];
        assert!(universal_grammar(w, uniform, sp).is_err());
        assert!(universal_grammar(&["2x"], uniform, sp).is_err());
        let bad_ratio = BiasRatios {
            r_sum: 0.0,
            ..uniform
        };
        assert!(universal_grammar(&["x"], bad_ratio, sp).is_err());
        let bad_structural = StructuralProbs {
            p_r: 0.5,
            ..StructuralProbs::default()
        };
        assert!(matches!(
            universal_grammar(&["x"], uniform, bad_structural),
            Err(GrammarError::InfeasibleProbabilities(_))
        ));
    }

    #[test]
    fn render_round_trips_exactly() {
        for g in [
            linear_grammar(3, 0.37).unwrap(),
            universal_grammar(&["x", "y"], BiasRatios::biased(), StructuralProbs::default())
                .unwrap(),
        ] {
            let reparsed = parse_grammar(&g.render()).unwrap();
            assert_eq!(g, reparsed);
        }
    }
}
