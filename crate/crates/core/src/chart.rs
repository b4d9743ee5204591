//! Probabilistic chart parsing: recovering parse trees and their
//! probabilities for a given token sequence.
//!
//! Sampling answers "what does the grammar generate?"; parsing answers the
//! inverse question, "how would the grammar have generated *this*?". For a
//! token sequence the parser computes the *inside probability* — the total
//! probability mass of all complete parse trees yielding the sequence —
//! and extracts the most probable trees themselves. The probability of the
//! single best parse is the standard estimate of how likely a known target
//! equation is to be produced by sampling, and the best parse's height
//! tells which generation horizon is needed to reach it.
//!
//! Internally the grammar is binarized with dotted-rule prefix symbols so
//! the chart runs in cubic time, and unary rule chains are closed by
//! relaxation within each cell; the binarization is dismantled before
//! trees are returned, so callers only ever see trees over the original
//! grammar. Probabilities are accumulated as ordinary floating-point
//! products in fixed evaluation order, which keeps results bit-for-bit
//! reproducible and exact for dyadic rule probabilities.

use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use crate::grammar::Pcfg;
use crate::sample::ParseTree;

/// Default number of most-probable parses retained per query.
///
/// A handful is enough: the best parse supplies the probability estimate,
/// and the runners-up are only diagnostics for ambiguous targets.
pub const DEFAULT_TOP_K: usize = 4;

/// Cap on unary-closure relaxation passes per chart cell. Acyclic unary
/// chains settle exactly in as many passes as the chain is deep; a cycle
/// of unary rules (legal but pathological) is truncated at this depth.
const MAX_UNARY_PASSES: usize = 64;

/// Errors from tokenization and parsing queries.
#[derive(Debug, Error)]
pub enum ChartError {
    /// The input text contains a span matching no terminal of the grammar.
    #[error("cannot tokenize input at byte {position}: '{residue}'")]
    Tokenize {
        /// Byte offset of the first unmatchable character.
        position: usize,
        /// The remaining text starting at that offset.
        residue: String,
    },
    /// An empty token sequence was passed to the parser.
    #[error("cannot parse an empty token sequence")]
    EmptyInput,
    /// `top_k` must be at least 1.
    #[error("top_k must be positive")]
    InvalidTopK,
    /// The text tokenized but has no parse, so it has no probability.
    #[error("'{text}' is not in the grammar's language")]
    NotInLanguage {
        /// The text that failed to parse.
        text: String,
    },
}

/// One recovered parse: a tree over the original grammar and its
/// probability (the product of the probabilities of the rules it uses).
#[derive(Clone, Debug)]
pub struct ScoredParse {
    /// The parse tree; its yield equals the queried token sequence.
    pub tree: ParseTree,
    /// Probability of this tree alone.
    pub probability: f64,
}

/// Result of parsing one token sequence.
#[derive(Clone, Debug)]
pub struct ParseResult {
    /// Most probable parses, sorted by descending probability (ties broken
    /// by the preorder rule sequence), truncated to the requested count.
    pub trees: Vec<ScoredParse>,
    /// Total probability of *all* parses of the sequence, including any
    /// beyond the truncated list; `0.0` when the sequence is not in the
    /// grammar's language.
    pub inside_probability: f64,
}

/// Splits `text` into grammar terminals by longest match, skipping
/// whitespace. Fails on the first span that matches no terminal.
pub fn tokenize(text: &str, g: &Pcfg) -> Result<Vec<String>, ChartError> {
    let mut vocabulary: Vec<&str> = (0..g.symbols().len())
        .map(crate::grammar::SymbolId::from_index)
        .filter(|&id| g.is_terminal(id))
        .map(|id| g.symbol_name(id).as_ref())
        .collect();
    // Longest first so e.g. "sin" wins over a hypothetical "s" terminal.
    vocabulary.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));

    let mut tokens = Vec::new();
    let mut pos = 0;
    let bytes = text.as_bytes();
    while pos < text.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let rest = &text[pos..];
        match vocabulary.iter().find(|t| rest.starts_with(**t)) {
            Some(t) => {
                tokens.push((*t).to_string());
                pos += t.len();
            }
            None => {
                return Err(ChartError::Tokenize {
                    position: pos,
                    residue: rest.to_string(),
                });
            }
        }
    }
    Ok(tokens)
}

/// Parses a token sequence, returning the top `top_k` trees and the total
/// inside probability. A sequence outside the language is not an error:
/// it parses to an empty tree list with probability zero.
pub fn parse(g: &Pcfg, tokens: &[String], top_k: usize) -> Result<ParseResult, ChartError> {
    if tokens.is_empty() {
        return Err(ChartError::EmptyInput);
    }
    if top_k == 0 {
        return Err(ChartError::InvalidTopK);
    }
    let bin = Binarized::build(g);
    let n = tokens.len();

    // chart[span_index(i, j)] holds the cell for tokens[i..j].
    let index = |i: usize, j: usize| i * (n + 1) + j;
    let mut chart: Vec<Cell> = vec![Cell::new(); (n + 1) * (n + 1)];

    for (i, token) in tokens.iter().enumerate() {
        let mut cell = Cell::new();
        if let Some(id) = g.symbol_id(token) {
            if g.is_terminal(id) {
                let sym = id.index() as u32;
                let cand = Rc::new(Cand {
                    sym,
                    prob: 1.0,
                    sig: Vec::new(),
                    build: Build::Token,
                });
                cell.entry(sym).add(1.0, cand, top_k);
            }
        }
        bin.close_unary(&mut cell, top_k);
        chart[index(i, i + 1)] = cell;
    }

    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut cell = Cell::new();
            for split in i + 1..j {
                let (left, right) = (&chart[index(i, split)], &chart[index(split, j)]);
                for rule in &bin.binary {
                    let (Some(l), Some(r)) = (left.get(rule.left), right.get(rule.right))
                    else {
                        continue;
                    };
                    let entry = cell.entry(rule.parent);
                    let inside = rule.weight * l.inside * r.inside;
                    for lc in &l.cands {
                        for rc in &r.cands {
                            let cand = combine(rule, lc, rc);
                            entry.push_candidate(cand, top_k);
                        }
                    }
                    entry.inside += inside;
                }
            }
            bin.close_unary(&mut cell, top_k);
            chart[index(i, j)] = cell;
        }
    }

    let start = g.start().index() as u32;
    let result = match chart[index(0, n)].get(start) {
        None => ParseResult {
            trees: Vec::new(),
            inside_probability: 0.0,
        },
        Some(entry) => ParseResult {
            trees: entry
                .cands
                .iter()
                .map(|c| ScoredParse {
                    tree: to_tree(c, g),
                    probability: c.prob,
                })
                .collect(),
            inside_probability: entry.inside,
        },
    };
    Ok(result)
}

/// Tokenizes and parses an equation text, returning the probability of
/// its most probable parse and that parse's height.
///
/// This is the generation-probability estimate for a known target: how
/// likely one sampling draw is to produce exactly this sentence, taking
/// the best parse when the sentence has several.
pub fn target_probability(g: &Pcfg, expression_text: &str) -> Result<(f64, usize), ChartError> {
    let tokens = tokenize(expression_text, g)?;
    let result = parse(g, &tokens, 1)?;
    match result.trees.first() {
        Some(best) => Ok((best.probability, best.tree.height())),
        None => Err(ChartError::NotInLanguage {
            text: expression_text.to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Internal machinery
// ---------------------------------------------------------------------------

/// How a chart candidate was built; enough to reconstruct the tree.
enum Build {
    /// A terminal matched one input token.
    Token,
    /// A fully recognized production of the original grammar.
    Complete { rule: usize, parts: Vec<Rc<Cand>> },
    /// A dotted-rule prefix (binarization artifact): the first few symbols
    /// of some production's right-hand side, not yet a tree node.
    Prefix { parts: Vec<Rc<Cand>> },
}

/// One candidate derivation of a symbol over a span.
struct Cand {
    sym: u32,
    prob: f64,
    /// Preorder sequence of original rule indices — a total, deterministic
    /// identity for the derivation, used to break probability ties.
    sig: Vec<u32>,
    build: Build,
}

/// Per-symbol cell entry: exact inside mass plus the best candidates.
#[derive(Clone)]
struct Entry {
    inside: f64,
    /// Sorted by descending probability, then ascending signature.
    cands: Vec<Rc<Cand>>,
}

impl Entry {
    fn new() -> Entry {
        Entry {
            inside: 0.0,
            cands: Vec::new(),
        }
    }

    fn add(&mut self, inside: f64, cand: Rc<Cand>, top_k: usize) {
        self.inside += inside;
        self.push_candidate(cand, top_k);
    }

    /// Inserts in sorted position and truncates; returns whether the
    /// candidate survived.
    fn push_candidate(&mut self, cand: Rc<Cand>, top_k: usize) -> bool {
        let pos = self
            .cands
            .partition_point(|c| c.prob > cand.prob || (c.prob == cand.prob && c.sig < cand.sig));
        if pos >= top_k {
            return false;
        }
        self.cands.insert(pos, cand);
        self.cands.truncate(top_k);
        true
    }
}

#[derive(Clone)]
struct Cell {
    entries: BTreeMap<u32, Entry>,
}

impl Cell {
    fn new() -> Cell {
        Cell {
            entries: BTreeMap::new(),
        }
    }

    fn get(&self, sym: u32) -> Option<&Entry> {
        self.entries.get(&sym)
    }

    fn entry(&mut self, sym: u32) -> &mut Entry {
        self.entries.entry(sym).or_insert_with(Entry::new)
    }
}

struct BinaryProd {
    parent: u32,
    left: u32,
    right: u32,
    weight: f64,
    /// `Some(rule)` when recognizing this production completes original
    /// rule `rule`; `None` for internal prefix steps.
    completes: Option<usize>,
}

struct UnaryProd {
    parent: u32,
    child: u32,
    weight: f64,
    rule: usize,
}

/// The grammar with every rule of arity ≥ 3 split into a left-nested
/// chain of binary steps through fresh prefix symbols.
struct Binarized {
    binary: Vec<BinaryProd>,
    unary: Vec<UnaryProd>,
}

impl Binarized {
    fn build(g: &Pcfg) -> Binarized {
        let mut next_virtual = g.symbols().len() as u32;
        let mut binary = Vec::new();
        let mut unary = Vec::new();
        for (rule_index, rule) in g.rules().iter().enumerate() {
            let rhs: Vec<u32> = rule.rhs.iter().map(|id| id.index() as u32).collect();
            let parent = rule.lhs.index() as u32;
            match rhs.len() {
                0 => unreachable!("the grammar format forbids empty right-hand sides"),
                1 => unary.push(UnaryProd {
                    parent,
                    child: rhs[0],
                    weight: rule.probability,
                    rule: rule_index,
                }),
                2 => binary.push(BinaryProd {
                    parent,
                    left: rhs[0],
                    right: rhs[1],
                    weight: rule.probability,
                    completes: Some(rule_index),
                }),
                n => {
                    let mut prefix = next_virtual;
                    next_virtual += 1;
                    binary.push(BinaryProd {
                        parent: prefix,
                        left: rhs[0],
                        right: rhs[1],
                        weight: 1.0,
                        completes: None,
                    });
                    for &sym in &rhs[2..n - 1] {
                        let wider = next_virtual;
                        next_virtual += 1;
                        binary.push(BinaryProd {
                            parent: wider,
                            left: prefix,
                            right: sym,
                            weight: 1.0,
                            completes: None,
                        });
                        prefix = wider;
                    }
                    binary.push(BinaryProd {
                        parent,
                        left: prefix,
                        right: rhs[n - 1],
                        weight: rule.probability,
                        completes: Some(rule_index),
                    });
                }
            }
        }
        Binarized { binary, unary }
    }

    /// Closes a cell under unary rules.
    ///
    /// Inside masses are relaxed Jacobi-style from the cell's pre-closure
    /// values, which converges exactly (in as many passes as the deepest
    /// chain) when the unary rules are acyclic. Candidates are wrapped
    /// breadth-first from a frontier of newly inserted ones; wrapping only
    /// ever shrinks probability, so per-symbol truncation loses nothing.
    fn close_unary(&self, cell: &mut Cell, top_k: usize) {
        if self.unary.is_empty() || cell.entries.is_empty() {
            return;
        }

        let base: BTreeMap<u32, f64> =
            cell.entries.iter().map(|(&s, e)| (s, e.inside)).collect();
        let mut current: BTreeMap<u32, f64> = base.clone();
        for _ in 0..MAX_UNARY_PASSES {
            let mut next = base.clone();
            for prod in &self.unary {
                if let Some(&child_inside) = current.get(&prod.child) {
                    if child_inside > 0.0 {
                        *next.entry(prod.parent).or_insert(0.0) += prod.weight * child_inside;
                    }
                }
            }
            if next == current {
                break;
            }
            current = next;
        }
        for (sym, inside) in current {
            cell.entry(sym).inside = inside;
        }

        let mut frontier: Vec<Rc<Cand>> = cell
            .entries
            .values()
            .flat_map(|e| e.cands.iter().cloned())
            .collect();
        for _ in 0..MAX_UNARY_PASSES {
            if frontier.is_empty() {
                break;
            }
            let mut inserted = Vec::new();
            for prod in &self.unary {
                for cand in frontier.iter().filter(|c| c.sym == prod.child) {
                    let mut sig = Vec::with_capacity(cand.sig.len() + 1);
                    sig.push(prod.rule as u32);
                    sig.extend_from_slice(&cand.sig);
                    let wrapped = Rc::new(Cand {
                        sym: prod.parent,
                        prob: prod.weight * cand.prob,
                        sig,
                        build: Build::Complete {
                            rule: prod.rule,
                            parts: vec![Rc::clone(cand)],
                        },
                    });
                    if cell.entry(prod.parent).push_candidate(Rc::clone(&wrapped), top_k) {
                        inserted.push(wrapped);
                    }
                }
            }
            frontier = inserted;
        }
    }
}

/// Joins a left and right candidate under one binary step. A left prefix
/// contributes its accumulated parts; completing a rule seals them into a
/// node of the original grammar.
fn combine(rule: &BinaryProd, left: &Rc<Cand>, right: &Rc<Cand>) -> Rc<Cand> {
    let mut parts = match &left.build {
        Build::Prefix { parts } => parts.clone(),
        _ => vec![Rc::clone(left)],
    };
    parts.push(Rc::clone(right));
    let prob = rule.weight * left.prob * right.prob;
    let (sig, build) = match rule.completes {
        Some(rule_index) => {
            let mut sig = Vec::with_capacity(left.sig.len() + right.sig.len() + 1);
            sig.push(rule_index as u32);
            sig.extend_from_slice(&left.sig);
            sig.extend_from_slice(&right.sig);
            (
                sig,
                Build::Complete {
                    rule: rule_index,
                    parts,
                },
            )
        }
        None => {
            let mut sig = Vec::with_capacity(left.sig.len() + right.sig.len());
            sig.extend_from_slice(&left.sig);
            sig.extend_from_slice(&right.sig);
            (sig, Build::Prefix { parts })
        }
    };
    Rc::new(Cand {
        sym: rule.parent,
        prob,
        sig,
        build,
    })
}

fn to_tree(cand: &Cand, g: &Pcfg) -> ParseTree {
    match &cand.build {
        Build::Token => ParseTree::leaf(symbol_label(cand.sym, g)),
        Build::Complete { rule, parts } => ParseTree::internal(
            symbol_label(cand.sym, g),
            *rule,
            parts.iter().map(|p| to_tree(p, g)).collect(),
        ),
        Build::Prefix { .. } => {
            unreachable!("prefix candidates never escape the chart")
        }
    }
}

fn symbol_label(sym: u32, g: &Pcfg) -> std::sync::Arc<str> {
    let id = crate::grammar::SymbolId::from_index(sym as usize);
    std::sync::Arc::clone(g.symbol_name(id))
}
