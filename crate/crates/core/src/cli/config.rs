//! Flat `key = value` configuration with command-line overrides.

use std::path::{Path, PathBuf};

use super::CliError;
use crate::features::{FeatureOptions, NormalizationScope};
use crate::gbdt::{GossParams, Preset, TrainParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub manifest: Option<PathBuf>,
    pub features: FeatureOptions,
    pub preset: Preset,
    pub train: TrainParams,
    pub out: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Sampling rate assumed for CSV recordings, which carry none.
    pub csv_sample_rate: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            features: FeatureOptions::default(),
            preset: Preset::CatboostLike,
            train: Preset::CatboostLike.params(),
            out: PathBuf::from("out"),
            workers: 1,
            seed: 0,
            threshold: crate::eval::DEFAULT_THRESHOLD,
            csv_sample_rate: 250.0,
        }
    }
}

/// Parses `key = value` lines. Blank lines, `#`/`;` comments and
/// `[section]` headers are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        pairs.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: cannot parse {value:?}: {e}")))
}

impl PipelineConfig {
    /// Switches to `preset`, resetting every training parameter to its
    /// values while keeping the configured seed.
    pub fn set_preset(&mut self, preset: Preset) {
        self.preset = preset;
        self.train = TrainParams {
            seed: self.seed,
            ..preset.params()
        };
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let t = &mut self.train;
        match key {
            "manifest" => self.manifest = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = parse(key, value)?,
            "seed" => self.set_seed(parse(key, value)?),
            "threshold" => self.threshold = parse(key, value)?,
            "csv_sample_rate" => self.csv_sample_rate = parse(key, value)?,
            "extension" => self.features.extension = parse(key, value)?,
            "normalization" => {
                self.features.normalization = parse::<NormalizationScope>(key, value)?
            }
            "preset" => self.set_preset(parse(key, value)?),
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "max_depth" => t.max_depth = parse(key, value)?,
            "n_estimators" => t.n_estimators = parse(key, value)?,
            "lambda_l2" => t.lambda_l2 = parse(key, value)?,
            "max_bins" => t.max_bins = parse(key, value)?,
            "min_samples_leaf" => t.min_samples_leaf = parse(key, value)?,
            "growth" => t.growth = parse(key, value)?,
            "max_leaves" => t.max_leaves = parse(key, value)?,
            "goss" => match value.to_ascii_lowercase().as_str() {
                "off" | "none" | "false" => t.goss = None,
                other => {
                    let (a, b) = other.split_once(',').ok_or_else(|| {
                        CliError::Usage(format!("goss: expected \"off\" or \"a,b\", got {value:?}"))
                    })?;
                    t.goss = Some(GossParams {
                        top_rate: parse(key, a.trim())?,
                        other_rate: parse(key, b.trim())?,
                    });
                }
            },
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a config file. A `preset` line is honored first so that
    /// individual parameters in the same file refine it.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let pairs = parse_pairs(&text)?;
        if let Some((k, v)) = pairs.iter().rev().find(|(k, _)| k == "preset") {
            self.apply(k, v)?;
        }
        if let Some((k, v)) = pairs.iter().rev().find(|(k, _)| k == "seed") {
            self.apply(k, v)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| k != "preset" && k != "seed") {
            self.apply(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::Usage(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if !(self.csv_sample_rate > 0.0 && self.csv_sample_rate.is_finite()) {
            return Err(CliError::Usage("csv_sample_rate must be positive".into()));
        }
        self.train
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}
