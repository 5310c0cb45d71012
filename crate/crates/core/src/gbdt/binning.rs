//! Quantile binning of training features.
//!
//! Thresholds sit strictly between consecutive distinct training values, so
//! the bin of a training value depends only on its rank. A value `x` falls
//! in bin `b` when exactly `b` thresholds are below it; splitting "at bin
//! b" sends `x <= thresholds[b]` left. NaN lands in bin 0.

use serde::{Deserialize, Serialize};

use super::{GbdtError, MatrixView};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMap {
    /// Per feature, strictly increasing cut points (at most `max_bins − 1`).
    pub thresholds: Vec<Vec<f64>>,
}

impl BinMap {
    pub fn n_features(&self) -> usize {
        self.thresholds.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.thresholds[feature].len() + 1
    }

    pub fn bin(&self, feature: usize, x: f64) -> u8 {
        if x.is_nan() {
            return 0;
        }
        self.thresholds[feature].partition_point(|&t| t < x) as u8
    }

    pub fn apply(&self, x: MatrixView<'_>) -> Result<BinnedMatrix, GbdtError> {
        if x.cols() != self.n_features() {
            return Err(GbdtError::ShapeMismatch {
                expected: self.n_features(),
                found: x.cols(),
            });
        }
        let rows = x.rows();
        let mut bins = vec![0u8; rows * x.cols()];
        for f in 0..x.cols() {
            let col = &mut bins[f * rows..(f + 1) * rows];
            for (r, slot) in col.iter_mut().enumerate() {
                *slot = self.bin(f, x.get(r, f));
            }
        }
        Ok(BinnedMatrix {
            rows,
            cols: x.cols(),
            n_bins: (0..x.cols()).map(|f| self.n_bins(f)).collect(),
            bins,
        })
    }
}

/// Column-major bin indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMatrix {
    pub rows: usize,
    pub cols: usize,
    pub n_bins: Vec<usize>,
    bins: Vec<u8>,
}

impl BinnedMatrix {
    pub fn column(&self, feature: usize) -> &[u8] {
        &self.bins[feature * self.rows..(feature + 1) * self.rows]
    }

    pub fn get(&self, row: usize, feature: usize) -> u8 {
        self.bins[feature * self.rows + row]
    }
}

/// A point strictly between `a < b` when one exists, else `a`.
fn cut_between(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid > a && mid < b {
        mid
    } else {
        a
    }
}

fn feature_thresholds(mut values: Vec<f64>, max_bins: usize) -> Vec<f64> {
    values.retain(|v| !v.is_nan());
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n < 2 {
        return Vec::new();
    }
    let mut distinct = values.clone();
    distinct.dedup();
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| cut_between(w[0], w[1])).collect();
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(max_bins - 1);
    for k in 1..max_bins {
        let idx = ((k * n) as f64 / max_bins as f64).round() as usize;
        let idx = idx.clamp(1, n - 1);
        // first position whose value exceeds values[idx - 1]
        let lower = values[idx - 1];
        let j = idx + values[idx..].partition_point(|&v| v <= lower);
        if j >= n {
            continue;
        }
        let cut = cut_between(values[j - 1], values[j]);
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

/// Quantile cut points for every feature of `x`.
pub fn build_bin_map(x: MatrixView<'_>, max_bins: usize) -> Result<BinMap, GbdtError> {
    if x.rows() == 0 {
        return Err(GbdtError::EmptyMatrix);
    }
    if !(2..=255).contains(&max_bins) {
        return Err(GbdtError::InvalidParams(format!(
            "max_bins {max_bins} outside [2, 255]"
        )));
    }
    let thresholds = (0..x.cols())
        .map(|f| feature_thresholds((0..x.rows()).map(|r| x.get(r, f)).collect(), max_bins))
        .collect();
    Ok(BinMap { thresholds })
}
