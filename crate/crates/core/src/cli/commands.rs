use std::collections::HashMap;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CliError, DatasetManifest, ManifestEntry, PipelineConfig, Split};
use crate::eval::{self, ConfusionMatrix, MetricsReport, VennCounts};
use crate::features::{
    extract_recording, FeatureMatrix, FeatureOptions, FeatureScaler, NormalizationScope,
    AGGREGATED_FEATURES,
};
use crate::gbdt::{self, GbdtModel, MatrixView, Preset};
use crate::signal_io::{self, ClassLabel, Recording};

pub const FEATURES_TRAIN: &str = "features_train.wpdf";
pub const FEATURES_EVAL: &str = "features_eval.wpdf";
pub const FEATURIZE_REPORT: &str = "featurize_report.json";
pub const MODEL_FILE: &str = "model.wpdm";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(io_err(path))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}

/// Reads an `.edf` or `.csv` recording; CSV files get `csv_rate`.
pub fn load_recording(path: &Path, csv_rate: f64) -> Result<Recording, CliError> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "edf" => Ok(signal_io::read_edf(path)?),
        "csv" => Ok(signal_io::read_csv(path, csv_rate)?),
        other => Err(CliError::Data(format!(
            "{}: unsupported recording format {other:?}",
            path.display()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: String,
    pub total: usize,
    pub rows: usize,
    pub computed: usize,
    pub reused: usize,
    pub skipped: Vec<Skip>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizeReport {
    pub extension: String,
    pub normalization: String,
    pub splits: Vec<SplitReport>,
}

fn previous_rows(out: &Path, file: &str, opts: &FeatureOptions) -> HashMap<String, Vec<f64>> {
    let report: Option<FeaturizeReport> = std::fs::read(out.join(FEATURIZE_REPORT))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok());
    let same_options = report.is_some_and(|r| {
        r.extension == opts.extension.to_string() && r.normalization == opts.normalization.to_string()
    });
    if !same_options {
        return HashMap::new();
    }
    match FeatureMatrix::read(out.join(file)) {
        Ok(m) if m.cols == AGGREGATED_FEATURES => (0..m.rows())
            .map(|i| (m.ids[i].clone(), m.row(i).to_vec()))
            .collect(),
        _ => HashMap::new(),
    }
}

/// Writes `features_train.wpdf`, `features_eval.wpdf` and a JSON run report
/// into `config.out`. Ids already present in an earlier output made with the
/// same feature options are reused rather than recomputed.
pub fn cmd_featurize(
    manifest: &DatasetManifest,
    config: &PipelineConfig,
) -> Result<FeaturizeReport, CliError> {
    manifest.validate()?;
    create_dir(&config.out)?;
    let opts = config.features;
    let workers = pool(config.workers)?;
    let mut report = FeaturizeReport {
        extension: opts.extension.to_string(),
        normalization: opts.normalization.to_string(),
        splits: Vec::new(),
    };
    let mut fatal = None;
    for (split, file) in [(Split::Train, FEATURES_TRAIN), (Split::Eval, FEATURES_EVAL)] {
        let entries: Vec<&ManifestEntry> = manifest.split(split).collect();
        let previous = previous_rows(&config.out, file, &opts);
        let results: Vec<Result<(Vec<f64>, bool), String>> = workers.install(|| {
            entries
                .par_iter()
                .map(|e| match previous.get(&e.id) {
                    Some(row) => Ok((row.clone(), false)),
                    None => featurize_one(e, config.csv_sample_rate, &opts).map(|r| (r, true)),
                })
                .collect()
        });
        let mut matrix = FeatureMatrix::new(AGGREGATED_FEATURES);
        let mut sr = SplitReport {
            split: split.as_str().into(),
            total: entries.len(),
            rows: 0,
            computed: 0,
            reused: 0,
            skipped: Vec::new(),
        };
        for (e, r) in entries.iter().zip(results) {
            match r {
                Ok((row, fresh)) => {
                    matrix.push_row(e.id.clone(), Some(e.label), &row)?;
                    if fresh {
                        sr.computed += 1;
                    } else {
                        sr.reused += 1;
                    }
                }
                Err(reason) => {
                    log::warn!("skipping {}: {reason}", e.id);
                    sr.skipped.push(Skip {
                        id: e.id.clone(),
                        reason,
                    });
                }
            }
        }
        sr.rows = matrix.rows();
        matrix.write(config.out.join(file))?;
        if 2 * sr.skipped.len() > sr.total && fatal.is_none() {
            fatal = Some(format!(
                "{} of {} {} recordings failed",
                sr.skipped.len(),
                sr.total,
                sr.split
            ));
        }
        report.splits.push(sr);
    }
    let path = config.out.join(FEATURIZE_REPORT);
    let json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(&path, json).map_err(io_err(&path))?;
    match fatal {
        Some(msg) => Err(CliError::Data(msg)),
        None => Ok(report),
    }
}

fn featurize_one(e: &ManifestEntry, csv_rate: f64, opts: &FeatureOptions) -> Result<Vec<f64>, String> {
    let rec = load_recording(&e.path, csv_rate).map_err(|err| err.to_string())?;
    extract_recording(&rec, opts)
        .map(|v| v.values)
        .map_err(|err| err.to_string())
}

fn labels_of(m: &FeatureMatrix, what: &Path) -> Result<Vec<ClassLabel>, CliError> {
    m.labels
        .iter()
        .zip(&m.ids)
        .map(|(l, id)| {
            l.ok_or_else(|| CliError::Data(format!("{}: row {id:?} has no label", what.display())))
        })
        .collect()
}

fn scaler_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("scaler.json")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub iterations: usize,
    pub final_loss: f64,
    pub losses: Vec<f64>,
}

/// Trains on a feature file and writes `model.wpdm` plus `train_log.csv`
/// (per-iteration training log-loss) into `out_dir`.
pub fn cmd_train(
    features: &Path,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<TrainSummary, CliError> {
    let mut m = FeatureMatrix::read(features)?;
    let labels = labels_of(&m, features)?;
    if m.rows() == 0 {
        return Err(CliError::Data(format!("{}: no rows to train on", features.display())));
    }
    create_dir(out_dir)?;
    let model_path = out_dir.join(MODEL_FILE);
    let sidecar = scaler_path(&model_path);
    if config.features.normalization == NormalizationScope::Feature {
        let scaler = FeatureScaler::fit(&m)?;
        scaler.transform(&mut m)?;
        let json = serde_json::to_vec(&scaler).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&sidecar, json).map_err(io_err(&sidecar))?;
    } else if sidecar.exists() {
        std::fs::remove_file(&sidecar).map_err(io_err(&sidecar))?;
    }
    let y: Vec<f64> = labels.iter().map(|l| l.as_u8() as f64).collect();
    let view = MatrixView::new(&m.data, m.cols).map_err(crate::Error::from)?;
    let mut losses = Vec::with_capacity(config.train.n_estimators);
    let model = gbdt::train_with_callback(view, &y, &config.train, |t, loss| {
        log::debug!("iteration {t}: log-loss {loss}");
        losses.push(loss);
        ControlFlow::Continue(())
    })?;
    gbdt::save_model(&model, &model_path)?;
    let log_path = out_dir.join("train_log.csv");
    let mut log = String::from("iteration,log_loss\n");
    for (i, l) in losses.iter().enumerate() {
        log.push_str(&format!("{},{l}\n", i + 1));
    }
    std::fs::write(&log_path, log).map_err(io_err(&log_path))?;
    Ok(TrainSummary {
        model_path,
        iterations: model.trees.len(),
        final_loss: losses.last().copied().unwrap_or_else(|| {
            let base = vec![model.base_margin; y.len()];
            gbdt::log_loss(&y, &base)
        }),
        losses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    pub misclassified: Vec<String>,
    pub probabilities: Vec<f64>,
}

fn load_with_scaler(model_path: &Path) -> Result<(GbdtModel, Option<FeatureScaler>), CliError> {
    let model = gbdt::load_model(model_path)?;
    let sidecar = scaler_path(model_path);
    let scaler = match std::fs::read(&sidecar) {
        Ok(b) => Some(
            serde_json::from_slice(&b)
                .map_err(|e| CliError::Data(format!("{}: {e}", sidecar.display())))?,
        ),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(&sidecar)(e)),
    };
    Ok((model, scaler))
}

/// Scores `features` with the model and writes `report.txt`, `report.csv`,
/// `predictions.csv` and `misclassified.txt` into `out_dir`.
pub fn cmd_evaluate(
    model_path: &Path,
    features: &Path,
    threshold: f64,
    out_dir: &Path,
    name: &str,
) -> Result<EvalSummary, CliError> {
    let (model, scaler) = load_with_scaler(model_path)?;
    let mut m = FeatureMatrix::read(features)?;
    if m.cols != model.feature_count {
        return Err(crate::gbdt::GbdtError::ShapeMismatch {
            expected: model.feature_count,
            found: m.cols,
        }
        .into());
    }
    if let Some(s) = scaler {
        s.transform(&mut m)?;
    }
    let labels = labels_of(&m, features)?;
    let probs: Vec<f64> = (0..m.rows())
        .map(|i| model.predict_proba(m.row(i)))
        .collect::<Result<_, _>>()?;
    let cm = eval::confusion(&labels, &probs, threshold)?;
    let metrics = eval::metrics(&cm)?;
    let wrong = eval::misclassified(&m.ids, &labels, &probs, threshold);

    create_dir(out_dir)?;
    eval::write_text_report(out_dir.join("report.txt"), name, &cm, &metrics)?;
    eval::write_csv_report(out_dir.join("report.csv"), &[(name.to_string(), cm, metrics)])?;
    eval::write_id_list(out_dir.join("misclassified.txt"), &wrong)?;
    let pred_path = out_dir.join("predictions.csv");
    let mut pred = String::from("id,label,probability\n");
    for ((id, l), p) in m.ids.iter().zip(&labels).zip(&probs) {
        pred.push_str(&format!("{id},{l},{p}\n"));
    }
    std::fs::write(&pred_path, pred).map_err(io_err(&pred_path))?;
    Ok(EvalSummary {
        confusion: cm,
        metrics,
        misclassified: wrong,
        probabilities: probs,
    })
}

pub fn cmd_venn(lists: [&Path; 3]) -> Result<VennCounts, CliError> {
    let [a, b, c] = lists.map(eval::read_id_list);
    Ok(eval::overlap(&a?, &b?, &c?))
}

pub(crate) fn venn_text(v: &VennCounts, names: [&str; 3]) -> String {
    let [a, b, c] = names;
    format!(
        "only {a}: {}\nonly {b}: {}\nonly {c}: {}\n{a} & {b} only: {}\n{a} & {c} only: {}\n{b} & {c} only: {}\nall three: {}",
        v.only_a, v.only_b, v.only_c, v.a_b, v.a_c, v.b_c, v.all
    )
}

/// Writes `2 × n_per_class` synthetic CSV recordings under
/// `out_dir/recordings` and a manifest with a per-class 80/20 split.
/// Returns the manifest path.
pub fn cmd_synth(
    n_per_class: usize,
    duration_s: f64,
    seed: u64,
    out_dir: &Path,
    workers: usize,
) -> Result<PathBuf, CliError> {
    if n_per_class < 2 {
        return Err(CliError::Usage("synth needs at least 2 recordings per class".into()));
    }
    let rec_dir = out_dir.join("recordings");
    create_dir(&rec_dir)?;
    let n_train = ((n_per_class as f64 * 0.8).floor() as usize).clamp(1, n_per_class - 1);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(2 * n_per_class);
    for class in [ClassLabel::Normal, ClassLabel::Abnormal] {
        for i in 0..n_per_class {
            let split = if i < n_train { Split::Train } else { Split::Eval };
            let path = rec_dir.join(format!("{class}_{i:04}.csv"));
            jobs.push((class, split, path, seeds.next_u64()));
        }
    }
    pool(workers)?.install(|| {
        jobs.par_iter().try_for_each(|(class, _, path, s)| {
            let rec = signal_io::synth_recording(*class, duration_s, *s)?;
            signal_io::write_csv(path, &rec, Some(3))?;
            Ok::<_, CliError>(())
        })
    })?;
    let manifest = DatasetManifest {
        entries: jobs
            .into_iter()
            .map(|(label, split, path, _)| ManifestEntry {
                id: signal_io::id_from_path(&path),
                path,
                label,
                split,
            })
            .collect(),
    };
    let manifest_path = out_dir.join("manifest.csv");
    manifest.write(&manifest_path)?;
    Ok(manifest_path)
}

/// Featurize, train and evaluate. With `all_presets` every preset is run in
/// its own subdirectory and a `venn.txt` comparison of their errors is
/// written; otherwise only the configured training parameters are used.
pub fn cmd_pipeline(
    manifest: &DatasetManifest,
    config: &PipelineConfig,
    all_presets: bool,
) -> Result<Vec<(String, EvalSummary)>, CliError> {
    cmd_featurize(manifest, config)?;
    let runs: Vec<(String, PipelineConfig)> = if all_presets {
        Preset::ALL
            .iter()
            .map(|&p| {
                let mut c = config.clone();
                c.set_preset(p);
                (p.name().to_string(), c)
            })
            .collect()
    } else {
        vec![(config.preset.name().to_string(), config.clone())]
    };
    let mut results = Vec::new();
    let mut table = Vec::new();
    for (name, c) in &runs {
        let dir = config.out.join(name);
        let t = cmd_train(&config.out.join(FEATURES_TRAIN), c, &dir)?;
        let s = cmd_evaluate(&t.model_path, &config.out.join(FEATURES_EVAL), c.threshold, &dir, name)?;
        table.push((name.clone(), s.confusion, s.metrics));
        results.push((name.clone(), s));
    }
    eval::write_csv_report(config.out.join("summary.csv"), &table)?;
    if all_presets {
        let lists: Vec<PathBuf> = runs
            .iter()
            .map(|(n, _)| config.out.join(n).join("misclassified.txt"))
            .collect();
        let v = cmd_venn([&lists[0], &lists[1], &lists[2]])?;
        let names = [Preset::ALL[0].name(), Preset::ALL[1].name(), Preset::ALL[2].name()];
        let path = config.out.join("venn.txt");
        let mut f = std::fs::File::create(&path).map_err(io_err(&path))?;
        writeln!(f, "{}", venn_text(&v, names)).map_err(io_err(&path))?;
    }
    Ok(results)
}
