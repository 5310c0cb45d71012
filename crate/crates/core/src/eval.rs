//! Confusion matrices, accuracy/sensitivity/specificity and the overlap of
//! misclassified recordings across three models.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::signal_io::ClassLabel;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{labels} labels but {probs} probabilities")]
    LengthMismatch { labels: usize, probs: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("{0} is undefined: no rows of that class")]
    UndefinedMetric(&'static str),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Counts with abnormal as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

/// Percentages in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accuracy {:.2}%  sensitivity {:.2}%  specificity {:.2}%",
            self.accuracy, self.sensitivity, self.specificity
        )
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Probabilities at or above `threshold` count as abnormal predictions.
pub fn confusion(
    y_true: &[ClassLabel],
    y_prob: &[f64],
    threshold: f64,
) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_prob.len() {
        return Err(EvalError::LengthMismatch {
            labels: y_true.len(),
            probs: y_prob.len(),
        });
    }
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(EvalError::InvalidThreshold(threshold));
    }
    let mut cm = ConfusionMatrix::default();
    for (&label, &p) in y_true.iter().zip(y_prob) {
        let predicted_abnormal = p >= threshold;
        match (label, predicted_abnormal) {
            (ClassLabel::Abnormal, true) => cm.tp += 1,
            (ClassLabel::Abnormal, false) => cm.fn_ += 1,
            (ClassLabel::Normal, false) => cm.tn += 1,
            (ClassLabel::Normal, true) => cm.fp += 1,
        }
    }
    Ok(cm)
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyInput);
    }
    if cm.positives() == 0 {
        return Err(EvalError::UndefinedMetric("sensitivity"));
    }
    if cm.negatives() == 0 {
        return Err(EvalError::UndefinedMetric("specificity"));
    }
    let pct = |num: u64, den: u64| 100.0 * num as f64 / den as f64;
    Ok(MetricsReport {
        accuracy: pct(cm.tp + cm.tn, cm.total()),
        sensitivity: pct(cm.tp, cm.positives()),
        specificity: pct(cm.tn, cm.negatives()),
    })
}

/// Sizes of the seven non-empty regions of a three-set Venn diagram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VennCounts {
    pub only_a: usize,
    pub only_b: usize,
    pub only_c: usize,
    pub a_b: usize,
    pub a_c: usize,
    pub b_c: usize,
    pub all: usize,
}

impl VennCounts {
    pub fn total(&self) -> usize {
        self.only_a + self.only_b + self.only_c + self.a_b + self.a_c + self.b_c + self.all
    }
}

/// Regions are exclusive: `a_b` counts ids in A and B but not C.
pub fn overlap(a: &BTreeSet<String>, b: &BTreeSet<String>, c: &BTreeSet<String>) -> VennCounts {
    let mut v = VennCounts::default();
    for id in a.union(b).cloned().collect::<BTreeSet<_>>().union(c) {
        match (a.contains(id), b.contains(id), c.contains(id)) {
            (true, false, false) => v.only_a += 1,
            (false, true, false) => v.only_b += 1,
            (false, false, true) => v.only_c += 1,
            (true, true, false) => v.a_b += 1,
            (true, false, true) => v.a_c += 1,
            (false, true, true) => v.b_c += 1,
            (true, true, true) => v.all += 1,
            (false, false, false) => unreachable!(),
        }
    }
    v
}

/// Ids whose predicted class disagrees with the label.
pub fn misclassified(
    ids: &[String],
    y_true: &[ClassLabel],
    y_prob: &[f64],
    threshold: f64,
) -> Vec<String> {
    ids.iter()
        .zip(y_true.iter().zip(y_prob))
        .filter(|(_, (label, p))| (**p >= threshold) != (**label == ClassLabel::Abnormal))
        .map(|(id, _)| id.clone())
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn text_report(model: &str, cm: &ConfusionMatrix, m: &MetricsReport) -> String {
    format!(
        "model: {model}\n\
         rows: {}\n\
         tp: {}  fn: {}  tn: {}  fp: {}\n\
         accuracy: {:.2}%\n\
         sensitivity: {:.2}%\n\
         specificity: {:.2}%\n",
        cm.total(),
        cm.tp,
        cm.fn_,
        cm.tn,
        cm.fp,
        m.accuracy,
        m.sensitivity,
        m.specificity
    )
}

pub fn write_text_report(
    path: impl AsRef<Path>,
    model: &str,
    cm: &ConfusionMatrix,
    m: &MetricsReport,
) -> Result<(), EvalError> {
    let path = path.as_ref();
    std::fs::write(path, text_report(model, cm, m)).map_err(io_err(path))
}

pub fn write_csv_report(
    path: impl AsRef<Path>,
    rows: &[(String, ConfusionMatrix, MetricsReport)],
) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut out = String::from("model,tp,fn,tn,fp,accuracy,sensitivity,specificity\n");
    for (name, cm, m) in rows {
        out.push_str(&format!(
            "{name},{},{},{},{},{:.2},{:.2},{:.2}\n",
            cm.tp, cm.fn_, cm.tn, cm.fp, m.accuracy, m.sensitivity, m.specificity
        ));
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// One id per line.
pub fn write_id_list(path: impl AsRef<Path>, ids: &[String]) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    for id in ids {
        writeln!(f, "{id}").map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))
}

pub fn read_id_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}
