//! Stochastic generation of parse trees from a grammar.
//!
//! A sampler walks a grammar top-down: starting from a nonterminal it draws
//! one production per expansion from that nonterminal's rule distribution,
//! recursing into the right-hand side left to right until every open branch
//! ends in a terminal. The resulting [`ParseTree`] records which rule fired
//! at each internal node, so its probability — the product of the applied
//! rule probabilities — can be recomputed exactly from the tree alone.
//!
//! Generation from a recursive grammar can run arbitrarily deep with
//! positive probability, so every sample carries an expansion budget;
//! attempts that exhaust it are discarded and retried on a fresh random
//! substream. Batch sampling derives one independent, counter-keyed stream
//! per sample index, which makes output identical no matter how many
//! threads participate or in which order indices complete.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::grammar::{Pcfg, SymbolId, SymbolKind};

/// Default cap on nonterminal expansions per generation attempt.
pub const DEFAULT_MAX_EXPANSIONS: u64 = 1000;

/// Cap on discarded attempts per sample index before batch sampling gives
/// up. Only reachable when the per-attempt success probability is
/// vanishingly small; the up-front feasibility check already rejects
/// budgets no derivation can fit.
pub const MAX_RETRIES_PER_SAMPLE: u64 = 1_000_000;

/// Errors from sampling and tree-probability computation.
#[derive(Debug, Error)]
pub enum SampleError {
    /// A generation attempt used more nonterminal expansions than allowed.
    #[error("expansion budget of {0} exceeded")]
    BudgetExceeded(u64),
    /// The requested root symbol cannot be expanded.
    #[error("symbol '{0}' is not a nonterminal of this grammar")]
    NotNonterminal(String),
    /// No finite derivation from the root exists at all.
    #[error("nonterminal '{root}' admits no finite derivation")]
    Unproductive { root: String },
    /// Every derivation from the root needs more expansions than the budget.
    #[error(
        "every derivation from '{root}' needs at least {required} expansions, \
         but the budget is {budget}"
    )]
    BudgetTooSmall {
        root: String,
        required: u64,
        budget: u64,
    },
    /// A sample index kept exceeding its budget after many retries.
    #[error("sample {index} still exceeded its budget after {attempts} attempts")]
    RetriesExhausted { index: usize, attempts: u64 },
    /// A tree does not describe a derivation of the given grammar.
    #[error("tree does not match grammar: {0}")]
    TreeMismatch(String),
}

// ---------------------------------------------------------------------------
// Parse trees
// ---------------------------------------------------------------------------

/// A derivation tree: internal nodes are nonterminals annotated with the
/// production applied there, leaves are terminals.
///
/// Construction goes through [`ParseTree::leaf`] and
/// [`ParseTree::internal`], which keep the shape invariant — children are
/// present exactly on internal nodes — true by construction. Whether the
/// recorded rules actually belong to a particular grammar is checked by
/// [`tree_probability`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParseTree {
    label: Arc<str>,
    kind: SymbolKind,
    rule: Option<usize>,
    children: Vec<ParseTree>,
}

impl ParseTree {
    /// A terminal leaf.
    pub fn leaf(label: impl Into<Arc<str>>) -> ParseTree {
        ParseTree {
            label: label.into(),
            kind: SymbolKind::Terminal,
            rule: None,
            children: Vec::new(),
        }
    }

    /// An internal node labeled with a nonterminal, recording the index of
    /// the production applied and the subtrees for its right-hand side.
    ///
    /// # Panics
    ///
    /// Panics when `children` is empty; productions never have empty
    /// right-hand sides.
    pub fn internal(
        label: impl Into<Arc<str>>,
        rule_index: usize,
        children: Vec<ParseTree>,
    ) -> ParseTree {
        assert!(
            !children.is_empty(),
            "internal parse-tree nodes carry at least one child"
        );
        ParseTree {
            label: label.into(),
            kind: SymbolKind::Nonterminal,
            rule: Some(rule_index),
            children,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == SymbolKind::Terminal
    }

    /// Index (into the grammar's rule list) of the production applied at
    /// this node; `None` for leaves.
    pub fn rule_index(&self) -> Option<usize> {
        self.rule
    }

    pub fn children(&self) -> &[ParseTree] {
        &self.children
    }

    /// Number of edges on the longest root-to-leaf path; 0 for a bare leaf.
    pub fn height(&self) -> usize {
        let mut depth = 0;
        let mut level: Vec<&ParseTree> = vec![self];
        loop {
            let next: Vec<&ParseTree> =
                level.iter().flat_map(|node| node.children.iter()).collect();
            if next.is_empty() {
                return depth;
            }
            depth += 1;
            level = next;
        }
    }

    /// The leaves of the tree, left to right.
    pub fn sentence(&self) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if node.is_terminal() {
                tokens.push(node.label.to_string());
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        tokens
    }

    /// The sentence with its tokens concatenated, e.g. `x+y`.
    pub fn sentence_text(&self) -> String {
        self.sentence().concat()
    }

    /// Total number of nodes, internal and leaf.
    pub fn node_count(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            count += 1;
            stack.extend(node.children.iter());
        }
        count
    }
}

/// The product of rule probabilities over a tree's internal nodes, carried
/// in both linear and log form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeProbability {
    pub probability: f64,
    pub log_probability: f64,
}

/// Recomputes a tree's probability against `g`, verifying on the way that
/// every recorded rule exists and matches the node's label and children.
pub fn tree_probability(t: &ParseTree, g: &Pcfg) -> Result<TreeProbability, SampleError> {
    let mut log_probability = 0.0;
    let mut stack = vec![t];
    while let Some(node) = stack.pop() {
        match node.rule {
            None => {
                if !node.children.is_empty() || node.kind != SymbolKind::Terminal {
                    return Err(SampleError::TreeMismatch(format!(
                        "node '{}' has no rule but is not a terminal leaf",
                        node.label
                    )));
                }
            }
            Some(rule_index) => {
                let rule = g.rules().get(rule_index).ok_or_else(|| {
                    SampleError::TreeMismatch(format!(
                        "rule index {rule_index} is out of range"
                    ))
                })?;
                if g.symbol_name(rule.lhs).as_ref() != node.label.as_ref() {
                    return Err(SampleError::TreeMismatch(format!(
                        "node '{}' records a rule for '{}'",
                        node.label,
                        g.symbol_name(rule.lhs)
                    )));
                }
                if rule.rhs.len() != node.children.len() {
                    return Err(SampleError::TreeMismatch(format!(
                        "node '{}' has {} children but its rule expects {}",
                        node.label,
                        node.children.len(),
                        rule.rhs.len()
                    )));
                }
                for (symbol, child) in rule.rhs.iter().zip(&node.children) {
                    let expected = g.symbol(*symbol);
                    if expected.name.as_ref() != child.label.as_ref()
                        || expected.kind != child.kind
                    {
                        return Err(SampleError::TreeMismatch(format!(
                            "child '{}' of '{}' does not match rule symbol '{}'",
                            child.label, node.label, expected.name
                        )));
                    }
                }
                log_probability += rule.probability.ln();
                stack.extend(node.children.iter());
            }
        }
    }
    Ok(TreeProbability {
        probability: log_probability.exp(),
        log_probability,
    })
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// One successful generation: the tree, its yield, its log probability, and
/// how many nonterminal expansions it consumed.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub tree: ParseTree,
    pub sentence: Vec<String>,
    pub log_probability: f64,
    pub expansions_used: u64,
}

/// Draws one parse tree from `g` starting at `root`.
///
/// Rule choices consume one uniform draw each, walking the cumulative
/// distribution of the nonterminal's rules in declaration order. The
/// attempt fails with [`SampleError::BudgetExceeded`] as soon as it would
/// expand more than `max_expansions` nonterminals; no partial tree is
/// returned.
pub fn generate_sample<R: Rng>(
    g: &Pcfg,
    root: SymbolId,
    rng: &mut R,
    max_expansions: u64,
) -> Result<SampleOutcome, SampleError> {
    if !g.is_nonterminal(root) {
        return Err(SampleError::NotNonterminal(g.symbol_name(root).to_string()));
    }

    struct Frame {
        label: Arc<str>,
        rule_index: usize,
        built: Vec<ParseTree>,
    }

    let mut expansions: u64 = 0;
    let mut log_probability = 0.0;
    let mut stack: Vec<Frame> = Vec::new();

    let open = |sym: SymbolId,
                    rng: &mut R,
                    expansions: &mut u64,
                    log_probability: &mut f64|
     -> Result<Frame, SampleError> {
        if *expansions >= max_expansions {
            return Err(SampleError::BudgetExceeded(max_expansions));
        }
        *expansions += 1;
        let rule_index = choose_rule(g, sym, rng);
        *log_probability += g.rule(rule_index).probability.ln();
        Ok(Frame {
            label: g.symbol_name(sym).clone(),
            rule_index,
            built: Vec::new(),
        })
    };

    stack.push(open(root, rng, &mut expansions, &mut log_probability)?);
    loop {
        let frame = stack.last_mut().expect("loop exits when the root closes");
        let rhs = &g.rule(frame.rule_index).rhs;
        if frame.built.len() == rhs.len() {
            let done = stack.pop().expect("frame was just observed");
            let node = ParseTree::internal(done.label, done.rule_index, done.built);
            match stack.last_mut() {
                Some(parent) => parent.built.push(node),
                None => {
                    let sentence = node.sentence();
                    return Ok(SampleOutcome {
                        tree: node,
                        sentence,
                        log_probability,
                        expansions_used: expansions,
                    });
                }
            }
        } else {
            let next = rhs[frame.built.len()];
            if g.is_terminal(next) {
                frame.built.push(ParseTree::leaf(g.symbol_name(next).clone()));
            } else {
                let child = open(next, rng, &mut expansions, &mut log_probability)?;
                stack.push(child);
            }
        }
    }
}

fn choose_rule<R: Rng>(g: &Pcfg, lhs: SymbolId, rng: &mut R) -> usize {
    let draw: f64 = rng.gen();
    let rules = g.rules_for(lhs);
    let mut cumulative = 0.0;
    for &rule_index in rules {
        cumulative += g.rule(rule_index).probability;
        if draw < cumulative {
            return rule_index;
        }
    }
    // Rounding can leave a sliver above the accumulated sum; attribute it
    // to the final alternative.
    *rules.last().expect("nonterminals carry at least one rule")
}

// ---------------------------------------------------------------------------
// Batch sampling
// ---------------------------------------------------------------------------

/// The result of drawing a batch of samples: outcomes in index order, plus
/// how many over-budget attempts were discarded along the way.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub outcomes: Vec<SampleOutcome>,
    pub discarded: u64,
}

/// Draws `n` samples from the start symbol of `g`.
///
/// Sample `i` uses a private random stream keyed by `(master_seed, i,
/// retry)`, so the batch is reproducible bit for bit regardless of thread
/// count or completion order. Attempts that exceed `max_expansions` are
/// discarded, counted, and retried on the next retry stream without
/// consuming the index.
pub fn sample_many(
    g: &Pcfg,
    n: usize,
    master_seed: u64,
    max_expansions: u64,
) -> Result<SampleBatch, SampleError> {
    if n == 0 {
        return Ok(SampleBatch {
            outcomes: Vec::new(),
            discarded: 0,
        });
    }
    let root = g.start();
    match minimal_expansions(g)[root.index()] {
        None => {
            return Err(SampleError::Unproductive {
                root: g.symbol_name(root).to_string(),
            })
        }
        Some(required) if required > max_expansions => {
            return Err(SampleError::BudgetTooSmall {
                root: g.symbol_name(root).to_string(),
                required,
                budget: max_expansions,
            })
        }
        Some(_) => {}
    }

    let drawn: Result<Vec<(SampleOutcome, u64)>, SampleError> = (0..n)
        .into_par_iter()
        .map(|index| {
            for retry in 0..MAX_RETRIES_PER_SAMPLE {
                let mut rng = sample_stream(master_seed, index as u64, retry);
                match generate_sample(g, root, &mut rng, max_expansions) {
                    Ok(outcome) => return Ok((outcome, retry)),
                    Err(SampleError::BudgetExceeded(_)) => continue,
                    Err(other) => return Err(other),
                }
            }
            Err(SampleError::RetriesExhausted {
                index,
                attempts: MAX_RETRIES_PER_SAMPLE,
            })
        })
        .collect();
    let drawn = drawn?;
    let discarded = drawn.iter().map(|(_, retries)| retries).sum();
    Ok(SampleBatch {
        outcomes: drawn.into_iter().map(|(outcome, _)| outcome).collect(),
        discarded,
    })
}

/// The independent random stream for one generation attempt.
pub fn sample_stream(master_seed: u64, index: u64, retry: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&index.to_le_bytes());
    seed[16..24].copy_from_slice(&retry.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Fewest nonterminal expansions in any complete derivation, per symbol;
/// `None` where no finite derivation exists.
fn minimal_expansions(g: &Pcfg) -> Vec<Option<u64>> {
    let mut best: Vec<Option<u64>> = g
        .symbols()
        .iter()
        .map(|s| (s.kind == SymbolKind::Terminal).then_some(0))
        .collect();
    loop {
        let mut changed = false;
        for (index, slot) in best.clone().iter().enumerate() {
            let id = SymbolId::from_index(index);
            if g.is_terminal(id) {
                continue;
            }
            for &rule_index in g.rules_for(id) {
                let mut total: u64 = 1;
                let mut complete = true;
                for child in &g.rule(rule_index).rhs {
                    match best[child.index()] {
                        Some(cost) => total = total.saturating_add(cost),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                if complete && slot.map_or(true, |current| total < current) {
                    best[index] = Some(total);
                    changed = true;
                }
            }
        }
        if !changed {
            return best;
        }
    }
}
