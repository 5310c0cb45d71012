use std::ops::ControlFlow;

use super::{
    build_bin_map, goss_sample, grow_tree, logistic_grad_hess, sigmoid, BinMap, GbdtError,
    MatrixView, Tree, TrainParams,
};

/// Trained ensemble. Immutable; prediction is safe from many threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub base_margin: f64,
    pub trees: Vec<Tree>,
    pub params: TrainParams,
    pub bin_map: BinMap,
    pub feature_count: usize,
}

impl GbdtModel {
    pub fn predict_margin(&self, row: &[f64]) -> Result<f64, GbdtError> {
        if row.len() != self.feature_count {
            return Err(GbdtError::ShapeMismatch {
                expected: self.feature_count,
                found: row.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        Ok(self.base_margin + self.params.learning_rate * sum)
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, GbdtError> {
        self.predict_margin(row).map(sigmoid)
    }

    pub fn predict_proba_matrix(&self, x: MatrixView<'_>) -> Result<Vec<f64>, GbdtError> {
        (0..x.rows()).map(|r| self.predict_proba(x.row(r))).collect()
    }
}

/// Mean logistic loss `softplus(m) − y·m`.
pub fn log_loss(labels: &[f64], margins: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(margins)
        .map(|(&y, &m)| m.max(0.0) + (-m.abs()).exp().ln_1p() - y * m)
        .sum();
    total / labels.len().max(1) as f64
}

pub fn train(x: MatrixView<'_>, labels: &[f64], params: &TrainParams) -> Result<GbdtModel, GbdtError> {
    train_with_callback(x, labels, params, |_, _| ControlFlow::Continue(()))
}

/// Like [`train`], calling `on_iteration(t, loss)` after tree `t` (1-based)
/// with the training log-loss. Returning `Break` stops boosting early.
pub fn train_with_callback<F>(
    x: MatrixView<'_>,
    labels: &[f64],
    params: &TrainParams,
    mut on_iteration: F,
) -> Result<GbdtModel, GbdtError>
where
    F: FnMut(usize, f64) -> ControlFlow<()>,
{
    params.validate()?;
    let n = x.rows();
    if labels.len() != n {
        return Err(GbdtError::ShapeMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if let Some((row, &value)) = labels.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
        return Err(GbdtError::InvalidLabel { row, value });
    }
    for r in 0..n {
        if let Some(col) = x.row(r).iter().position(|v| v.is_infinite()) {
            return Err(GbdtError::InfiniteValue { row: r, col });
        }
    }
    let positives: f64 = labels.iter().sum();
    if n < 2 || positives == 0.0 || positives == n as f64 {
        return Err(GbdtError::SingleClassData);
    }
    let prior = positives / n as f64;
    let base_margin = (prior / (1.0 - prior)).ln();

    let bin_map = build_bin_map(x, params.max_bins)?;
    let binned = bin_map.apply(x)?;
    let mut margins = vec![base_margin; n];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let all_rows: Vec<usize> = (0..n).collect();
    let mut trees = Vec::with_capacity(params.n_estimators);

    for t in 0..params.n_estimators {
        for r in 0..n {
            (g[r], h[r]) = logistic_grad_hess(labels[r], margins[r]);
        }
        let tree = match params.goss {
            None => grow_tree(&all_rows, &g, &h, &binned, &bin_map, params),
            Some(goss) => {
                let seed = params.seed.wrapping_add(t as u64);
                let (rows, weights) = goss_sample(&g, goss.top_rate, goss.other_rate, seed)?;
                for (&r, &w) in rows.iter().zip(&weights) {
                    g[r] *= w;
                    h[r] *= w;
                }
                grow_tree(&rows, &g, &h, &binned, &bin_map, params)
            }
        };
        for (r, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict_binned(&binned, r);
        }
        trees.push(tree);
        if on_iteration(t + 1, log_loss(labels, &margins)).is_break() {
            break;
        }
    }

    Ok(GbdtModel {
        base_margin,
        trees,
        params: params.clone(),
        bin_map,
        feature_count: x.cols(),
    })
}
