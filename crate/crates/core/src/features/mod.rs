//! Sub-band statistics, segment normalization and recording aggregation.
//!
//! Each 8 s segment yields 16 sub-bands × 6 statistics = 96 values, laid
//! out node-major in the order MAV, AVP, SD, RMAV, SKEW, KURT. A recording
//! of S segments per channel becomes a `[21 × S × 96]` tensor, which is
//! reduced to `21 × 2 × 96 = 4032` values by taking per-feature medians of
//! the first and second half of the segments.

mod matrix;

pub use matrix::{FeatureMatrix, FeatureScaler, WPDF_VERSION};

use crate::preprocess::{self, SegmentArray};
use crate::signal_io::{ClassLabel, Recording};
use crate::wavelet::{self, Extension, FilterBank, SelectedCoefficients};

pub const DEPTH: usize = 8;
pub const SELECTED_NODES: usize = 2 * DEPTH;
pub const STATS_PER_NODE: usize = 6;
pub const SEGMENT_FEATURES: usize = SELECTED_NODES * STATS_PER_NODE;
pub const CHANNELS: usize = preprocess::STANDARD_CHANNELS.len();
pub const AGGREGATED_FEATURES: usize = CHANNELS * 2 * SEGMENT_FEATURES;

/// Lower bound on the RMAV denominator.
pub const RMAV_EPS: f64 = 1e-12;
/// Vectors with a smaller standard deviation normalize to all zeros.
pub const NORMALIZE_EPS: f64 = 1e-12;

pub const STAT_NAMES: [&str; STATS_PER_NODE] = ["MAV", "AVP", "SD", "RMAV", "SKEW", "KURT"];

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("empty input")]
    EmptyInput,
    #[error("expected {expected} values, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("need at least 2 segments, got {0}")]
    TooFewSegments(usize),
    #[error("non-finite feature value at index {0}")]
    NonFinite(usize),
    #[error("feature file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Wavelet(#[from] wavelet::WaveletError),
    #[error(transparent)]
    Preprocess(#[from] preprocess::PreprocessError),
}

/// Where the zero-mean / unit-variance scaling is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationScope {
    /// Each 96-value segment vector is standardized across its own entries.
    #[default]
    Segment,
    /// Segment vectors stay raw; a per-column [`FeatureScaler`] is fitted on
    /// the training matrix instead.
    Feature,
}

impl std::str::FromStr for NormalizationScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "segment" => Ok(Self::Segment),
            "feature" => Ok(Self::Feature),
            other => Err(format!("unknown normalization scope {other:?}")),
        }
    }
}

impl std::fmt::Display for NormalizationScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Segment => "segment",
            Self::Feature => "feature",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureOptions {
    pub extension: Extension,
    pub normalization: NormalizationScope,
}

/// MAV, AVP, SD, SKEW and KURT of one sub-band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandStats {
    pub mav: f64,
    pub avp: f64,
    pub sd: f64,
    pub skew: f64,
    pub kurt: f64,
}

/// Population moments of `coeffs`. Skewness is `m3 / m2^1.5`, kurtosis is
/// the excess `m4 / m2² − 3`; both are 0 for constant input.
pub fn subband_stats(coeffs: &[f64]) -> Result<SubbandStats, FeatureError> {
    if coeffs.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let n = coeffs.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut sum = 0.0;
    let mut max_abs: f64 = 0.0;
    for &c in coeffs {
        abs_sum += c.abs();
        sq_sum += c * c;
        sum += c;
        max_abs = max_abs.max(c.abs());
    }
    let mean = sum / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &c in coeffs {
        let d = c - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    let constant = m2 <= 0.0 || m2.sqrt() <= 1e-12 * max_abs;
    let (sd, skew, kurt) = if constant {
        (0.0, 0.0, 0.0)
    } else {
        (m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    Ok(SubbandStats {
        mav: abs_sum / n,
        avp: sq_sum / n,
        sd,
        skew,
        kurt,
    })
}

/// Ratio of each node's MAV to the next node's, wrapping from the last
/// node back to the first. Denominators are floored at [`RMAV_EPS`].
pub fn rmav_chain(mavs: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if mavs.len() != SELECTED_NODES {
        return Err(FeatureError::WrongLength {
            expected: SELECTED_NODES,
            found: mavs.len(),
        });
    }
    let n = mavs.len();
    Ok((0..n)
        .map(|i| mavs[i] / mavs[(i + 1) % n].max(RMAV_EPS))
        .collect())
}

/// The 96 features of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatureVector {
    pub values: Vec<f64>,
}

pub fn segment_features(sel: &SelectedCoefficients) -> Result<SegmentFeatureVector, FeatureError> {
    if sel.nodes.len() != SELECTED_NODES {
        return Err(FeatureError::WrongLength {
            expected: SELECTED_NODES,
            found: sel.nodes.len(),
        });
    }
    let stats = sel
        .nodes
        .iter()
        .map(|n| subband_stats(&n.coeffs))
        .collect::<Result<Vec<_>, _>>()?;
    let mavs: Vec<f64> = stats.iter().map(|s| s.mav).collect();
    let rmav = rmav_chain(&mavs)?;
    let mut values = Vec::with_capacity(SEGMENT_FEATURES);
    for (s, r) in stats.iter().zip(rmav) {
        values.extend_from_slice(&[s.mav, s.avp, s.sd, r, s.skew, s.kurt]);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite(i));
    }
    Ok(SegmentFeatureVector { values })
}

/// Standardizes `v` to zero mean and unit population standard deviation.
/// Near-constant vectors map to all zeros.
pub fn normalize_vector(v: &[f64]) -> Result<Vec<f64>, FeatureError> {
    if v.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    if sd < NORMALIZE_EPS {
        return Ok(vec![0.0; v.len()]);
    }
    Ok(v.iter().map(|x| (x - mean) / sd).collect())
}

/// Per-recording feature tensor, stored `[channel][segment][feature]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub recording_id: String,
    pub label: Option<ClassLabel>,
    pub n_channels: usize,
    pub n_segments: usize,
    pub data: Vec<f64>,
}

impl FeatureTensor {
    pub fn vector(&self, channel: usize, segment: usize) -> &[f64] {
        let start = (channel * self.n_segments + segment) * SEGMENT_FEATURES;
        &self.data[start..start + SEGMENT_FEATURES]
    }
}

/// 4032 values: for each channel, the first-half medians then the
/// second-half medians of its 96 features.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedFeatureVector {
    pub values: Vec<f64>,
}

/// Median with the even-count convention of averaging the two middle values.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Splits the segments at `floor(S/2)` and takes per-channel, per-feature
/// medians of each half.
pub fn aggregate(t: &FeatureTensor) -> Result<AggregatedFeatureVector, FeatureError> {
    let s = t.n_segments;
    if s < 2 {
        return Err(FeatureError::TooFewSegments(s));
    }
    if t.data.len() != t.n_channels * s * SEGMENT_FEATURES {
        return Err(FeatureError::WrongLength {
            expected: t.n_channels * s * SEGMENT_FEATURES,
            found: t.data.len(),
        });
    }
    let h = s / 2;
    let mut values = Vec::with_capacity(t.n_channels * 2 * SEGMENT_FEATURES);
    let mut buf = Vec::with_capacity(s);
    for c in 0..t.n_channels {
        for range in [0..h, h..s] {
            for f in 0..SEGMENT_FEATURES {
                buf.clear();
                buf.extend(range.clone().map(|seg| t.vector(c, seg)[f]));
                values.push(median(&mut buf));
            }
        }
    }
    Ok(AggregatedFeatureVector { values })
}

/// Decomposes and featurizes every segment of every channel.
pub fn featurize_segments(
    seg: &SegmentArray,
    opts: &FeatureOptions,
    fb: &FilterBank,
) -> Result<FeatureTensor, FeatureError> {
    let mut data = Vec::with_capacity(seg.n_channels * seg.n_segments * SEGMENT_FEATURES);
    for c in 0..seg.n_channels {
        for s in 0..seg.n_segments {
            let sel = wavelet::decompose_paths(seg.segment(c, s), DEPTH, fb, opts.extension)?;
            let v = segment_features(&sel)?.values;
            match opts.normalization {
                NormalizationScope::Segment => data.extend(normalize_vector(&v)?),
                NormalizationScope::Feature => data.extend(v),
            }
        }
    }
    Ok(FeatureTensor {
        recording_id: seg.recording_id.clone(),
        label: seg.label,
        n_channels: seg.n_channels,
        n_segments: seg.n_segments,
        data,
    })
}

/// Full per-recording path: preprocess, featurize, aggregate.
pub fn extract_recording(
    rec: &Recording,
    opts: &FeatureOptions,
) -> Result<AggregatedFeatureVector, FeatureError> {
    let seg = preprocess::preprocess(rec)?;
    let tensor = featurize_segments(&seg, opts, &wavelet::db4_filter_bank())?;
    aggregate(&tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::WpdNode;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stats_alternating() {
        let s = subband_stats(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!(close(s.mav, 1.0, 1e-15));
        assert!(close(s.avp, 1.0, 1e-15));
        assert!(close(s.sd, 1.0, 1e-15));
        assert!(close(s.skew, 0.0, 1e-15));
        assert!(close(s.kurt, -2.0, 1e-15));
    }

    #[test]
    fn stats_constant() {
        for c in [2.5, -7.0, 0.0, 0.1] {
            let s = subband_stats(&[c; 4]).unwrap();
            assert!(close(s.mav, c.abs(), 1e-15));
            assert!(close(s.avp, c * c, 1e-15));
            assert_eq!((s.sd, s.skew, s.kurt), (0.0, 0.0, 0.0));
        }
        // constant that does not sum exactly
        let s = subband_stats(&[0.1; 7]).unwrap();
        assert_eq!((s.sd, s.skew, s.kurt), (0.0, 0.0, 0.0));
        assert!(matches!(subband_stats(&[]), Err(FeatureError::EmptyInput)));
    }

    #[test]
    fn rmav_cases() {
        assert!(rmav_chain(&[3.0; 16]).unwrap().iter().all(|&r| r == 1.0));
        let mut m = [1.0; 16];
        m[0] = 2.0;
        let r = rmav_chain(&m).unwrap();
        assert_eq!(r[0], 2.0);
        assert_eq!(r[15], 0.5);
        let mut m = [1.0; 16];
        m[4] = 0.0;
        let r = rmav_chain(&m).unwrap();
        assert_eq!(r[3], 1.0 / RMAV_EPS);
        assert!(r[3].is_finite());
        assert!(matches!(
            rmav_chain(&[1.0; 15]),
            Err(FeatureError::WrongLength { expected: 16, found: 15 })
        ));
    }

    fn selected(coeffs: Vec<f64>) -> SelectedCoefficients {
        SelectedCoefficients {
            nodes: SelectedCoefficients::canonical_paths(8)
                .into_iter()
                .map(|path| WpdNode {
                    path,
                    coeffs: coeffs.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn segment_vector_layout() {
        let v = segment_features(&selected(vec![0.5, -1.5, 2.0, 0.25])).unwrap();
        assert_eq!(v.values.len(), 96);
        let first = &v.values[..6];
        for node in 1..16 {
            assert_eq!(&v.values[node * 6..node * 6 + 6], first);
        }
        assert_eq!(first[3], 1.0);
    }

    #[test]
    fn segment_vector_all_zero() {
        let v = segment_features(&selected(vec![0.0; 8])).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn normalize_cases() {
        let out = normalize_vector(&[1.0, 2.0, 3.0]).unwrap();
        let z = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!(close(out[0], -z, 1e-12) && close(out[1], 0.0, 1e-12) && close(out[2], z, 1e-12));
        assert!(close(out[2], 1.22474, 1e-5));
        assert_eq!(normalize_vector(&[4.0; 5]).unwrap(), vec![0.0; 5]);
        assert!(matches!(normalize_vector(&[]), Err(FeatureError::EmptyInput)));
    }

    fn tensor(n_segments: usize, fill: impl Fn(usize, usize, usize) -> f64) -> FeatureTensor {
        let mut data = Vec::new();
        for c in 0..CHANNELS {
            for s in 0..n_segments {
                for f in 0..SEGMENT_FEATURES {
                    data.push(fill(c, s, f));
                }
            }
        }
        FeatureTensor {
            recording_id: "r".into(),
            label: None,
            n_channels: CHANNELS,
            n_segments,
            data,
        }
    }

    #[test]
    fn aggregate_identical_segments() {
        let t = tensor(100, |c, _, f| (c * 1000 + f) as f64);
        let agg = aggregate(&t).unwrap();
        assert_eq!(agg.values.len(), AGGREGATED_FEATURES);
        assert_eq!(agg.values.len(), 4032);
        for c in 0..CHANNELS {
            let block = &agg.values[c * 192..(c + 1) * 192];
            for f in 0..96 {
                assert_eq!(block[f], (c * 1000 + f) as f64);
                assert_eq!(block[96 + f], (c * 1000 + f) as f64);
            }
        }
    }

    #[test]
    fn aggregate_even_count_medians() {
        let vals = [1.0, 3.0, 5.0, 9.0];
        let t = tensor(4, |_, s, _| vals[s]);
        let agg = aggregate(&t).unwrap();
        assert_eq!(agg.values[0], 2.0);
        assert_eq!(agg.values[96], 7.0);
    }

    #[test]
    fn aggregate_odd_segment_count_splits_at_floor() {
        // S = 5: halves are segments {0,1} and {2,3,4}
        let t = tensor(5, |_, s, _| s as f64);
        let agg = aggregate(&t).unwrap();
        assert_eq!(agg.values[0], 0.5);
        assert_eq!(agg.values[96], 3.0);
        assert!(matches!(
            aggregate(&tensor(1, |_, _, _| 0.0)),
            Err(FeatureError::TooFewSegments(1))
        ));
    }
}
