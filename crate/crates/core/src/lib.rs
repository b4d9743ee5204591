//! Equation discovery with probabilistic context-free grammars.
//!
//! A probabilistic context-free grammar (PCFG) over arithmetic expressions is
//! both a language model and a search-space prior: every parse tree denotes a
//! candidate equation, and the product of the probabilities of the productions
//! used to derive it says how strongly the grammar believes in that candidate.
//! This crate implements the full toolchain built on that idea:
//!
//! * [`grammar`] — grammar and PCFG definitions, a text format for loading
//!   them from files, validation, and constructors for two reference
//!   families: a linear grammar (sums of variables, with a single recursion
//!   probability) and a five-nonterminal universal expression grammar with
//!   configurable bias ratios between rule groups.
//! * [`sample`] — stochastic top-down generation of parse trees, with
//!   deterministic per-index random streams so batches are reproducible and
//!   order-independent.
//! * [`expr`] — conversion of parse trees into arithmetic ASTs,
//!   rewrite-based canonicalization that serves as the deduplication
//!   identity, numeric and compiled evaluation, an infix parser for target
//!   equations, and complexity measures.
//! * [`chart`] — a probabilistic chart parser recovering the parse trees of
//!   a token sequence together with its total (inside) probability; used to
//!   compute the generation probability of a known target equation.
//! * [`analytics`] — exact parse-tree counting with arbitrary-precision
//!   integers, coverage (total probability of trees up to a height),
//!   closed-form oracles for the linear grammar, expected sample counts for
//!   probabilistic and exhaustive search, and rank correlation.
//! * [`fit`] — relative root-mean-square error (ReRMSE) scoring and
//!   differential-evolution estimation of an expression's constants against
//!   a dataset.
//! * [`discover`] — the Monte-Carlo discovery loop: sample N candidates,
//!   canonicalize and deduplicate them, fit each distinct candidate once,
//!   and rank by error; plus a weighted-resampling post-processor for
//!   success-rate curves.
//!
//! # Example
//!
//! Discover `v = x + y` from noise-free data with the universal grammar:
//!
//! ```
//! use eqgram::discover::{mc_gbed, DiscoveryConfig};
//! use eqgram::fit::Dataset;
//! use eqgram::grammar::{universal_grammar, BiasRatios, StructuralProbs};
//!
//! let g = universal_grammar(&["x", "y"], BiasRatios::uniform(), StructuralProbs::default())
//!     .unwrap();
//! let rows: Vec<Vec<f64>> = (0..40)
//!     .map(|i| {
//!         let (x, y) = (1.0 + i as f64 * 0.1, 2.0 + (i % 7) as f64 * 0.3);
//!         vec![x, y, x + y]
//!     })
//!     .collect();
//! let data = Dataset::new(vec!["x".into(), "y".into(), "v".into()], rows, "v").unwrap();
//! let cfg = DiscoveryConfig {
//!     n_samples: 4000,
//!     seed: 7,
//!     ..DiscoveryConfig::default()
//! };
//! let result = mc_gbed(&g, &data, &cfg).unwrap();
//! assert!(result.success);
//! assert_eq!(result.candidates[0].key, "x+y");
//! ```

pub mod analytics;
pub mod chart;
pub mod discover;
pub mod expr;
pub mod fit;
pub mod grammar;
pub mod sample;

pub use grammar::Pcfg;
