//! Run configuration: flat `key = value` files overridden by command-line
//! flags.

use std::path::PathBuf;

use netsig_core::evaluation::{ExperimentConfig, GridSpec, Method};
use netsig_core::logistic::SolverOptions;
use netsig_core::preprocess::{
    OutlierRule, PreprocessConfig, DEFAULT_N_G, DEFAULT_OUTLIER_THRESHOLD,
};
use netsig_core::stability::{ScoreRule, DEFAULT_NDRAW};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub n_g: usize,
    pub outlier_threshold: f64,
    pub grid_count: usize,
    pub grid_min_ratio: f64,
    pub ndraw: usize,
    pub seed: u64,
    pub score_rule: ScoreRule,
    pub sizes: Vec<usize>,
    pub folds: usize,
    pub stratified: bool,
    pub expression: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::GraphLassoStability,
            n_g: DEFAULT_N_G,
            outlier_threshold: DEFAULT_OUTLIER_THRESHOLD,
            grid_count: GridSpec::default().count,
            grid_min_ratio: GridSpec::default().min_ratio,
            ndraw: DEFAULT_NDRAW,
            seed: 0,
            score_rule: ScoreRule::Sg,
            sizes: (1..=10).map(|k| 10 * k).collect(),
            folds: 5,
            stratified: true,
            expression: None,
            network: None,
            output: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!(
            "bad boolean `{value}` for `{key}`"
        ))),
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 14] = [
        "method",
        "n_g",
        "outlier_threshold",
        "grid_count",
        "grid_min_ratio",
        "ndraw",
        "seed",
        "score_rule",
        "sizes",
        "folds",
        "stratified",
        "expression",
        "network",
        "output",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "method" => {
                self.method = value
                    .parse()
                    .map_err(|e: netsig_core::Error| CliError::Config(e.to_string()))?
            }
            "n_g" => self.n_g = parse(key, value)?,
            "outlier_threshold" => self.outlier_threshold = parse(key, value)?,
            "grid_count" => self.grid_count = parse(key, value)?,
            "grid_min_ratio" => self.grid_min_ratio = parse(key, value)?,
            "ndraw" => self.ndraw = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "score_rule" => {
                self.score_rule = value
                    .parse()
                    .map_err(|e: netsig_core::Error| CliError::Config(e.to_string()))?
            }
            "sizes" => {
                self.sizes = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<Vec<usize>>>()?
            }
            "folds" => self.folds = parse(key, value)?,
            "stratified" => self.stratified = parse_bool(key, value)?,
            "expression" => self.expression = Some(PathBuf::from(value)),
            "network" => self.network = Some(PathBuf::from(value)),
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.n_g == 0 {
            return bad("n_g must be at least 1".into());
        }
        if !(self.outlier_threshold.is_finite() && self.outlier_threshold > 0.0) {
            return bad("outlier_threshold must be positive".into());
        }
        if self.grid_count == 0 {
            return bad("grid_count must be at least 1".into());
        }
        if !(self.grid_min_ratio > 0.0 && self.grid_min_ratio < 1.0) {
            return bad("grid_min_ratio must be in (0, 1)".into());
        }
        if self.ndraw < 2 {
            return bad("ndraw must be at least 2".into());
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a non-empty list of positive integers".into());
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        let paths: Vec<&PathBuf> = [&self.expression, &self.network, &self.output]
            .into_iter()
            .flatten()
            .collect();
        for (i, a) in paths.iter().enumerate() {
            if paths[i + 1..].contains(a) {
                return bad(format!("path {} is used twice", a.display()));
            }
        }
        Ok(())
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            preprocess: PreprocessConfig {
                n_g: self.n_g,
                outlier: OutlierRule::new(self.outlier_threshold)?,
            },
            grid: GridSpec {
                count: self.grid_count,
                min_ratio: self.grid_min_ratio,
            },
            ndraw: self.ndraw,
            stratified: self.stratified,
            score_rule: self.score_rule,
            sizes: self.sizes.clone(),
            folds: self.folds,
            seed: self.seed,
            solver: SolverOptions::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_file("# run\nmethod = lasso+ss\nsizes = 5, 10\nndraw=20\nstratified = false\n")
            .unwrap();
        assert_eq!(c.method, Method::LassoStability);
        assert_eq!(c.sizes, vec![5, 10]);
        assert!(!c.stratified);
        c.set("ndraw", "30").unwrap();
        assert_eq!(c.ndraw, 30);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = RunConfig::default();
        assert!(c.apply_file("colour = blue").is_err());
        assert!(c.apply_file("just words").is_err());
        assert!(c.set("ndraw", "many").is_err());
        c.set("sizes", "0").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("expression", "a.tsv").unwrap();
        c.set("output", "a.tsv").unwrap();
        assert!(c.validate().is_err());
    }
}
