//! Histogram-based gradient-boosted decision trees for binary
//! classification with logistic loss.
//!
//! Each boosting round computes first and second derivatives of the
//! log-loss at the current margins, optionally subsamples rows with GOSS,
//! grows one tree on quantile-binned features and adds
//! `learning_rate × tree` to the margins. Leaves take the Newton value
//! `−G / (H + λ)`.

mod binning;
mod goss;
mod io;
mod params;
mod train;
mod tree;

pub use binning::{build_bin_map, BinMap, BinnedMatrix};
pub use goss::goss_sample;
pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, MODEL_VERSION};
pub use params::{GossParams, Growth, Preset, TrainParams};
pub use train::{log_loss, train, train_with_callback, GbdtModel};
pub use tree::{find_best_split, grow_tree, leaf_weight, Node, SplitDecision, Tree};

#[derive(Debug, thiserror::Error)]
pub enum GbdtError {
    #[error("feature matrix is empty")]
    EmptyMatrix,
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("training labels contain a single class")]
    SingleClassData,
    #[error("label {value} at row {row} is not 0 or 1")]
    InvalidLabel { row: usize, value: f64 },
    #[error("infinite feature value at row {row}, column {col}")]
    InfiniteValue { row: usize, col: usize },
    #[error("invalid GOSS fractions a={a}, b={b}")]
    InvalidFractions { a: f64, b: f64 },
    #[error("invalid training parameter: {0}")]
    InvalidParams(String),
    #[error("corrupt model file: {0}")]
    CorruptModelFile(String),
    #[error("unsupported model file version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Borrowed row-major feature matrix.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
}

impl<'a> MatrixView<'a> {
    pub fn new(data: &'a [f64], cols: usize) -> Result<Self, GbdtError> {
        if cols == 0 || data.is_empty() {
            return Err(GbdtError::EmptyMatrix);
        }
        if data.len() % cols != 0 {
            return Err(GbdtError::ShapeMismatch {
                expected: (data.len() / cols + 1) * cols,
                found: data.len(),
            });
        }
        Ok(Self {
            data,
            rows: data.len() / cols,
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

pub(crate) fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// Gradient and Hessian of the log-loss with respect to the margin:
/// `g = p − y`, `h = p(1 − p)` with `p = sigmoid(margin)`.
pub fn logistic_grad_hess(label: f64, margin: f64) -> (f64, f64) {
    let p = sigmoid(margin);
    (p - label, p * (1.0 - p))
}
