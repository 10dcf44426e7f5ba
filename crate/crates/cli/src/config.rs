//! Run configuration: a JSON file whose fields are overridden by flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub max_n: Option<usize>,
    pub family: Option<String>,
    /// Interior sample count for closed-form checks.
    pub points: Option<usize>,
    pub margin: Option<f64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    pub threads: Option<usize>,
    pub epsilon: Option<f64>,
    pub epsilon_check: Option<bool>,
    #[serde(default)]
    pub seed: SeedConfig,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    /// `closed-form`, `axial`, `commuting` or `file`.
    pub kind: Option<String>,
    pub family: Option<String>,
    pub t: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub k1: Option<f64>,
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// `flag`, else `config`, else `default`.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Sweep threads: flag, config, then `NAHM_FORGE_THREADS`.
pub fn threads(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag.or(config) {
        return Ok(Some(n));
    }
    match std::env::var("NAHM_FORGE_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("NAHM_FORGE_THREADS must be a positive integer, got {v:?}"))),
        _ => Ok(None),
    }
}
