//! Grammar source resolution: a `--grammar` argument is either the name of
//! a built-in family — optionally parameterized after a colon — or a path
//! to a grammar file.
//!
//! Built-ins:
//!
//! * `uniform_universal[:x,y,…]` — the five-nonterminal expression grammar
//!   with all bias ratios 1 over the listed variables (default `x,y`).
//! * `biased_universal[:x,y,…]` — the same grammar with the
//!   multiplication-leaning bias ratios used throughout the bundled
//!   benchmarks.
//! * `linear[:n_vars[:p]]` — the right-recursive sum-of-variables grammar
//!   with `n_vars` variables (default 2) and recursion probability `p`
//!   (default 0.5).
//!
//! Anything else is read from disk in the grammar file format.

use crate::error::CliError;
use eqgram::grammar::{
    linear_grammar, parse_grammar, universal_grammar, BiasRatios, Pcfg, StructuralProbs,
};
use std::path::Path;

/// Names accepted without a file on disk.
pub const BUILTIN_NAMES: [&str; 3] = ["uniform_universal", "biased_universal", "linear"];

/// Resolves a grammar source string.
///
/// `default_variables` supplies the variable set for universal built-ins
/// when the source does not name one — commands with a dataset in hand
/// pass its input columns, others pass `x,y`.
pub fn load_grammar(source: &str, default_variables: &[String]) -> Result<Pcfg, CliError> {
    let (head, tail) = match source.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (source, None),
    };
    match head {
        "uniform_universal" => {
            universal(tail, default_variables, BiasRatios::uniform()).map_err(Into::into)
        }
        "biased_universal" => {
            universal(tail, default_variables, BiasRatios::biased()).map_err(Into::into)
        }
        "linear" => linear(tail),
        _ => {
            let path = Path::new(source);
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Data(format!(
                    "{}: {e} (not a file; builtins are {})",
                    path.display(),
                    BUILTIN_NAMES.join(", ")
                ))
            })?;
            parse_grammar(&text).map_err(Into::into)
        }
    }
}

fn split_variables(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn universal(
    tail: Option<&str>,
    default_variables: &[String],
    ratios: BiasRatios,
) -> Result<Pcfg, CliError> {
    let variables: Vec<String> = match tail {
        Some(list) => split_variables(list),
        None => default_variables.to_vec(),
    };
    if variables.is_empty() {
        return Err(CliError::Usage(
            "universal grammar needs at least one variable".into(),
        ));
    }
    universal_grammar(&variables, ratios, StructuralProbs::default()).map_err(Into::into)
}

fn linear(tail: Option<&str>) -> Result<Pcfg, CliError> {
    let mut n_vars = 2usize;
    let mut p = 0.5f64;
    if let Some(t) = tail {
        let mut parts = t.split(':');
        if let Some(n) = parts.next().filter(|s| !s.is_empty()) {
            n_vars = n
                .parse()
                .map_err(|_| CliError::Usage(format!("bad variable count '{n}'")))?;
        }
        if let Some(prob) = parts.next() {
            p = prob
                .parse()
                .map_err(|_| CliError::Usage(format!("bad probability '{prob}'")))?;
        }
        if parts.next().is_some() {
            return Err(CliError::Usage(format!(
                "linear grammar source takes at most two parameters, got '{t}'"
            )));
        }
    }
    linear_grammar(n_vars, p).map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sources_resolve() {
        let g = load_grammar("uniform_universal", &["x".into(), "y".into()]).unwrap();
        assert!(g.symbol_id("x").is_some());
        let g = load_grammar("uniform_universal:a,b,q", &[]).unwrap();
        assert!(g.symbol_id("q").is_some());
        let g = load_grammar("linear:3:0.7", &[]).unwrap();
        assert!(g.symbol_id("z").is_some());
        load_grammar("linear:3:0.7:9", &[]).unwrap_err();
    }

    #[test]
    fn missing_file_is_a_data_error() {
        let err = load_grammar("/no/such/grammar.txt", &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_file_error_mentions_builtins() {
        let err = load_grammar("uniform_universa", &[]).unwrap_err();
        assert!(err.to_string().contains("uniform_universal"));
    }
}
