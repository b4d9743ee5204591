//! Layered run configuration.
//!
//! Settings come from four layers, weakest first: built-in defaults, a
//! flat `key = value` configuration file, `EQGRAM_`-prefixed environment
//! variables, and command-line flags. Each layer overrides the ones
//! before it; flags are applied by the individual commands after
//! [`load_settings`] has merged the first three.
//!
//! The file format is one `key = value` pair per line, `#` starting a
//! comment, keys dotted by section:
//!
//! ```text
//! # discovery settings
//! discovery.n_samples = 20000
//! discovery.success_threshold = 1e-9
//! fit.max_generations = 500
//! fit.bounds_low = -10
//! fit.bounds_high = 10
//! runs = 3
//! ```
//!
//! The environment spelling of a key uppercases it and replaces dots with
//! underscores: `discovery.n_samples` becomes `EQGRAM_DISCOVERY_N_SAMPLES`.

use crate::error::{io_error, CliError};
use eqgram::discover::DiscoveryConfig;
use std::path::Path;

/// Merged tool settings before command-line flag overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    /// Discovery-loop settings, including the nested constant-fitting ones.
    pub discovery: DiscoveryConfig,
    /// Independent repetitions per benchmark task.
    pub runs: usize,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings {
            discovery: DiscoveryConfig::default(),
            runs: 3,
        }
    }
}

/// Every key the configuration accepts, in documentation order.
pub const CONFIG_KEYS: [&str; 15] = [
    "discovery.n_samples",
    "discovery.seed",
    "discovery.max_parameters",
    "discovery.success_threshold",
    "discovery.max_expansions",
    "fit.population_factor",
    "fit.mutation_factor",
    "fit.crossover_rate",
    "fit.max_generations",
    "fit.bounds_low",
    "fit.bounds_high",
    "fit.stagnation_window",
    "fit.target_error",
    "fit.seed",
    "runs",
];

fn apply(settings: &mut Settings, key: &str, value: &str, origin: &str) -> Result<(), CliError> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str, origin: &str) -> Result<T, CliError> {
        value.trim().parse().map_err(|_| {
            CliError::Usage(format!("{origin}: bad value '{value}' for key '{key}'"))
        })
    }
    let d = &mut settings.discovery;
    match key {
        "discovery.n_samples" => d.n_samples = parse(key, value, origin)?,
        "discovery.seed" => d.seed = parse(key, value, origin)?,
        "discovery.max_parameters" => d.max_parameters = parse(key, value, origin)?,
        "discovery.success_threshold" => d.success_threshold = parse(key, value, origin)?,
        "discovery.max_expansions" => d.max_expansions = parse(key, value, origin)?,
        "fit.population_factor" => d.fit.population_factor = parse(key, value, origin)?,
        "fit.mutation_factor" => d.fit.mutation_factor = parse(key, value, origin)?,
        "fit.crossover_rate" => d.fit.crossover_rate = parse(key, value, origin)?,
        "fit.max_generations" => d.fit.max_generations = parse(key, value, origin)?,
        "fit.bounds_low" => d.fit.bounds.0 = parse(key, value, origin)?,
        "fit.bounds_high" => d.fit.bounds.1 = parse(key, value, origin)?,
        "fit.stagnation_window" => d.fit.stagnation_window = parse(key, value, origin)?,
        "fit.target_error" => d.fit.target_error = parse(key, value, origin)?,
        "fit.seed" => d.fit.seed = parse(key, value, origin)?,
        "runs" => settings.runs = parse(key, value, origin)?,
        _ => {
            return Err(CliError::Usage(format!(
                "{origin}: unknown configuration key '{key}'"
            )))
        }
    }
    Ok(())
}

fn env_name(key: &str) -> String {
    let mut name = String::from("EQGRAM_");
    for ch in key.chars() {
        name.push(match ch {
            '.' => '_',
            other => other.to_ascii_uppercase(),
        });
    }
    name
}

/// Builds [`Settings`] from defaults, then the optional configuration
/// file, then any `EQGRAM_*` environment variables.
pub fn load_settings(config_path: Option<&Path>) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let origin = path.display().to_string();
        for (line_number, raw_line) in text.lines().enumerate() {
            let line = match raw_line.split_once('#') {
                Some((before, _)) => before,
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{origin}:{}: expected 'key = value', got '{line}'",
                    line_number + 1
                ))
            })?;
            apply(&mut settings, key.trim(), value, &origin)?;
        }
    }
    for key in CONFIG_KEYS {
        if let Ok(value) = std::env::var(env_name(key)) {
            apply(&mut settings, key, &value, "environment")?;
        }
    }
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_match_library_defaults() {
        let settings = load_settings(None).unwrap();
        assert_eq!(settings.discovery, DiscoveryConfig::default());
        assert_eq!(settings.runs, 3);
    }

    #[test]
    fn file_values_override_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "# comment\ndiscovery.n_samples = 777  # trailing comment\nfit.max_generations=42\nruns = 5\n"
        )
        .unwrap();
        let settings = load_settings(Some(file.path())).unwrap();
        assert_eq!(settings.discovery.n_samples, 777);
        assert_eq!(settings.discovery.fit.max_generations, 42);
        assert_eq!(settings.runs, 5);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_usage_errors() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "discovery.n_sample = 10").unwrap();
        assert_eq!(load_settings(Some(file.path())).unwrap_err().exit_code(), 1);

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "discovery.n_samples = many").unwrap();
        assert_eq!(load_settings(Some(file.path())).unwrap_err().exit_code(), 1);

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "just a line").unwrap();
        assert_eq!(load_settings(Some(file.path())).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn environment_spelling() {
        assert_eq!(env_name("discovery.n_samples"), "EQGRAM_DISCOVERY_N_SAMPLES");
        assert_eq!(env_name("runs"), "EQGRAM_RUNS");
    }
}
