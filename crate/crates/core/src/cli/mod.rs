//! The `eegwpd` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_evaluate, cmd_featurize, cmd_pipeline, cmd_synth, cmd_train, cmd_venn, load_recording,
    EvalSummary, FeaturizeReport, SplitReport, TrainSummary, FEATURIZE_REPORT, FEATURES_EVAL,
    FEATURES_TRAIN, MODEL_FILE,
};
pub use config::{parse_pairs, PipelineConfig};
pub use manifest::{DatasetManifest, ManifestEntry, Split};

use crate::gbdt::Preset;
use crate::wavelet::Extension;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Pipeline(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Pipeline(_) => 2,
            CliError::Io { .. } | CliError::Internal(_) => 3,
        }
    }
}

macro_rules! pipeline_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Pipeline(e.into())
            }
        }
    )*};
}

pipeline_from!(
    crate::signal_io::SignalError,
    crate::features::FeatureError,
    crate::gbdt::GbdtError,
    crate::eval::EvalError
);

#[derive(Debug, Parser)]
#[command(name = "eegwpd", version, about = "Wavelet-packet EEG features and gradient-boosted trees")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Key = value configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// catboost-like, xgboost-like or lightgbm-like.
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for featurization and synthesis (default 1).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for synthesis and GOSS sampling (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Probability at or above which a recording is called abnormal.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true, value_parser = ["periodic", "symmetric"])]
    pub extension: Option<String>,
    /// Extra `key=value` setting, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract 4032-value feature rows for every recording in a manifest.
    Featurize {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Train a model on a feature file.
    Train {
        /// Defaults to `<out>/features_train.wpdf`.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Score a model on a feature file.
    Evaluate {
        /// Defaults to `<out>/<preset>/model.wpdm`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Defaults to `<out>/features_eval.wpdf`.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Overlap of three misclassified-id lists.
    Venn {
        #[arg(num_args = 3, required = true)]
        lists: Vec<PathBuf>,
    },
    /// Write a synthetic labeled dataset with a manifest.
    Synth {
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 800.0)]
        duration: f64,
    },
    /// Featurize, train and evaluate in one go.
    Pipeline {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Train and evaluate all three presets, then compare their errors.
        #[arg(long)]
        all_presets: bool,
    },
}

impl Cli {
    /// Layers defaults, config file, `--set` pairs and flags, in that order.
    pub fn resolve_config(&self) -> Result<PipelineConfig, CliError> {
        let g = &self.global;
        let mut c = PipelineConfig::default();
        if let Some(path) = &g.config {
            c.apply_file(path)?;
        }
        if let Some(seed) = g.seed {
            c.set_seed(seed);
        }
        if let Some(p) = g.preset {
            c.set_preset(p);
        }
        for kv in &g.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            c.apply(&k.trim().to_ascii_lowercase(), v.trim())?;
        }
        if let Some(out) = &g.out {
            c.out = out.clone();
        }
        if let Some(w) = g.workers {
            c.workers = w;
        }
        if let Some(t) = g.threshold {
            c.threshold = t;
        }
        if let Some(e) = &g.extension {
            c.features.extension = e.parse::<Extension>().map_err(CliError::Usage)?;
        }
        match &self.command {
            Command::Featurize { manifest: Some(m) } | Command::Pipeline { manifest: Some(m), .. } => {
                c.manifest = Some(m.clone());
            }
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs a parsed command line, printing summaries to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.resolve_config()?;
    let model_dir = config.out.join(config.preset.name());
    match &cli.command {
        Command::Featurize { .. } => {
            let manifest = load_manifest(&config)?;
            let report = cmd_featurize(&manifest, &config)?;
            for s in &report.splits {
                println!(
                    "{}: {} rows ({} computed, {} reused, {} skipped)",
                    s.split,
                    s.rows,
                    s.computed,
                    s.reused,
                    s.skipped.len()
                );
            }
        }
        Command::Train { features } => {
            let features = features.clone().unwrap_or_else(|| config.out.join(FEATURES_TRAIN));
            let s = cmd_train(&features, &config, &model_dir)?;
            println!(
                "trained {} trees, final training log-loss {:.6}; model at {}",
                s.iterations,
                s.final_loss,
                s.model_path.display()
            );
        }
        Command::Evaluate { model, features } => {
            let model = model.clone().unwrap_or_else(|| model_dir.join(MODEL_FILE));
            let features = features.clone().unwrap_or_else(|| config.out.join(FEATURES_EVAL));
            let out_dir = model.parent().map(PathBuf::from).unwrap_or_default();
            let s = cmd_evaluate(&model, &features, config.threshold, &out_dir, config.preset.name())?;
            print!("{}", crate::eval::text_report(config.preset.name(), &s.confusion, &s.metrics));
        }
        Command::Venn { lists } => {
            let v = cmd_venn([&lists[0], &lists[1], &lists[2]])?;
            println!("{}", commands::venn_text(&v, ["A", "B", "C"]));
        }
        Command::Synth { per_class, duration } => {
            let manifest = cmd_synth(*per_class, *duration, config.seed, &config.out, config.workers)?;
            println!("wrote {}", manifest.display());
        }
        Command::Pipeline { all_presets, .. } => {
            let manifest = load_manifest(&config)?;
            for (name, s) in cmd_pipeline(&manifest, &config, *all_presets)? {
                println!("{name}: {}", s.metrics);
            }
        }
    }
    Ok(())
}

fn load_manifest(config: &PipelineConfig) -> Result<DatasetManifest, CliError> {
    let path = config
        .manifest
        .as_ref()
        .ok_or_else(|| CliError::Usage("a manifest is required (--manifest or config key)".into()))?;
    DatasetManifest::read(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.ini");
        std::fs::write(&cfg, "preset = xgboost-like\nworkers = 3\nthreshold = 0.4\n").unwrap();
        let cli = Cli::try_parse_from([
            "eegwpd",
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            "2",
            "--set",
            "n_estimators=0",
            "--extension",
            "symmetric",
        ])
        .unwrap();
        let c = cli.resolve_config().unwrap();
        assert_eq!(c.workers, 2);
        assert_eq!(c.threshold, 0.4);
        assert_eq!(c.preset, Preset::XgboostLike);
        assert_eq!(c.train.n_estimators, 0);
        assert_eq!(c.features.extension, Extension::Symmetric);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        assert_eq!(CliError::Data(String::new()).exit_code(), 2);
        assert_eq!(CliError::Internal(String::new()).exit_code(), 3);
        let cli = Cli::try_parse_from(["eegwpd", "train", "--workers", "0"]).unwrap();
        assert_eq!(cli.resolve_config().unwrap_err().exit_code(), 1);
    }
}
