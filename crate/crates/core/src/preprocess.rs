//! Channel selection, resampling and fixed-length segmentation.

use crate::signal_io::{ChannelSignal, ClassLabel, Recording};

/// The 21 electrodes kept from every recording, in output order.
pub const STANDARD_CHANNELS: [&str; 21] = [
    "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8", "T3", "C3", "CZ", "C4", "T4", "T5", "P3", "PZ",
    "P4", "T6", "O1", "O2", "A1", "A2",
];

pub const TARGET_RATE: f64 = 250.0;
pub const SEGMENT_SECONDS: f64 = 8.0;
pub const MAX_SEGMENTS: usize = 100;
pub const MIN_SEGMENTS: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("recording lacks channel {0}")]
    MissingChannel(String),
    #[error("cannot upsample from {source_rate} Hz to {target_rate} Hz")]
    UpsamplingRequested { source_rate: f64, target_rate: f64 },
    #[error("recording has {samples} samples per channel, need at least {needed}")]
    RecordingTooShort { samples: usize, needed: usize },
    #[error("segmentation needs the 21 standard channels in canonical order: {0}")]
    NotCanonical(String),
    #[error("channels have differing sample rates; resample first")]
    NonUniformRate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Maps a vendor channel label onto its bare electrode name:
/// `"EEG Fp1-REF"` becomes `"FP1"`.
pub fn normalize_channel_label(label: &str) -> String {
    let mut s = label.trim().to_ascii_uppercase();
    if let Some(rest) = s.strip_prefix("EEG ") {
        s = rest.trim_start().to_string();
    }
    for suffix in ["-REF", "-LE"] {
        if let Some(rest) = s.strip_suffix(suffix) {
            s = rest.trim_end().to_string();
            break;
        }
    }
    s
}

/// Keeps exactly the 21 standard electrodes, renamed and reordered to
/// [`STANDARD_CHANNELS`]. Extra channels are dropped.
pub fn select_standard_channels(rec: &Recording) -> Result<Recording, PreprocessError> {
    let normalized: Vec<String> = rec
        .channels
        .iter()
        .map(|c| normalize_channel_label(&c.label))
        .collect();
    let mut channels = Vec::with_capacity(STANDARD_CHANNELS.len());
    for &target in STANDARD_CHANNELS.iter() {
        let idx = normalized
            .iter()
            .position(|n| n == target)
            .ok_or_else(|| PreprocessError::MissingChannel(target.to_string()))?;
        let src = &rec.channels[idx];
        channels.push(ChannelSignal::new(target, src.samples.clone(), src.sample_rate));
    }
    let first = channels[0].sample_rate;
    let sample_rate = if channels.iter().all(|c| c.sample_rate == first) {
        first
    } else {
        channels.iter().map(|c| c.sample_rate).fold(0.0, f64::max)
    };
    Ok(Recording {
        id: rec.id.clone(),
        label: rec.label,
        sample_rate,
        channels,
    })
}

/// Resamples every channel to `target_rate`.
///
/// Channels already at the target pass through bit-for-bit. Others go
/// through a Kaiser-windowed sinc low-pass with cutoff at the target Nyquist
/// frequency, evaluated only at the output instants (polyphase rational
/// decimation). Output length is `floor(n * target / source)`.
pub fn resample(rec: &Recording, target_rate: f64) -> Result<Recording, PreprocessError> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(PreprocessError::InvalidParameter(format!(
            "target rate {target_rate}"
        )));
    }
    let mut channels = Vec::with_capacity(rec.channels.len());
    for ch in &rec.channels {
        if ch.sample_rate < target_rate {
            return Err(PreprocessError::UpsamplingRequested {
                source_rate: ch.sample_rate,
                target_rate,
            });
        }
        let samples = if ch.sample_rate == target_rate {
            ch.samples.clone()
        } else {
            Resampler::new(ch.sample_rate, target_rate).apply(&ch.samples)
        };
        channels.push(ChannelSignal::new(ch.label.clone(), samples, target_rate));
    }
    // mixed-rate sources can disagree by a sample after rounding
    if let Some(min_len) = channels.iter().map(|c| c.samples.len()).min() {
        for c in &mut channels {
            c.samples.truncate(min_len);
        }
    }
    Ok(Recording {
        id: rec.id.clone(),
        label: rec.label,
        sample_rate: target_rate,
        channels,
    })
}

/// Kernel half-width, in output samples.
const HALF_TAPS: f64 = 16.0;
const KAISER_BETA: f64 = 8.0;
const MAX_PHASES: u64 = 4096;
const LP_ORDER: usize = 8;
const LP_WINDOW: usize = 256;

/// Windowed-sinc decimator for one (source, target) rate pair.
struct Resampler {
    /// target / source
    ratio: f64,
    /// Source samples per output sample as the reduced fraction `step_num / step_den`.
    step_num: u64,
    step_den: u64,
    half: usize,
    /// One kernel per output phase when the phase count is small.
    table: Option<Vec<Vec<f64>>>,
}

impl Resampler {
    fn new(source: f64, target: f64) -> Self {
        let ratio = target / source;
        let half = (HALF_TAPS / ratio).ceil() as usize;
        let a = (source * 1000.0).round() as u64;
        let b = (target * 1000.0).round() as u64;
        let g = gcd(a, b);
        let (step_num, step_den) = (a / g, b / g);
        let mut r = Resampler {
            ratio,
            step_num,
            step_den,
            half,
            table: None,
        };
        if step_den <= MAX_PHASES {
            let table = (0..step_den)
                .map(|p| r.kernel(p as f64 / step_den as f64))
                .collect();
            r.table = Some(table);
        }
        r
    }

    /// Taps for source offsets `-half ..= half + 1` around an output instant
    /// lying `frac` samples past an integer source index.
    fn kernel(&self, frac: f64) -> Vec<f64> {
        let h = self.half as isize;
        let span = (self.half + 1) as f64;
        let mut taps: Vec<f64> = (-h..=h + 1)
            .map(|k| {
                let u = k as f64 - frac;
                let v = u / span;
                if v.abs() >= 1.0 {
                    return 0.0;
                }
                let w = bessel_i0(KAISER_BETA * (1.0 - v * v).sqrt()) / bessel_i0(KAISER_BETA);
                self.ratio * sinc(self.ratio * u) * w
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= sum;
        }
        taps
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let out_len = ((n as u128 * self.step_den as u128) / self.step_num as u128) as usize;
        if out_len == 0 {
            return Vec::new();
        }
        let pad = self.half + 2;
        let padded = lp_pad(x, pad);
        let mut out = Vec::with_capacity(out_len);
        let mut scratch;
        for j in 0..out_len as u64 {
            let pos = j as u128 * self.step_num as u128;
            let base = (pos / self.step_den as u128) as usize;
            let phase = (pos % self.step_den as u128) as u64;
            let taps: &[f64] = match &self.table {
                Some(t) => &t[phase as usize],
                None => {
                    scratch = self.kernel(phase as f64 / self.step_den as f64);
                    &scratch
                }
            };
            // padded[pad + i] == x[i]; taps start at offset -half
            let start = pad + base - self.half;
            let acc: f64 = taps
                .iter()
                .zip(&padded[start..start + taps.len()])
                .map(|(t, v)| t * v)
                .sum();
            out.push(acc);
        }
        out
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Extends `x` by `pad` samples on each side using Burg linear prediction
/// fitted to the nearest `LP_WINDOW` samples at each end.
fn lp_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    if n <= 2 * LP_ORDER {
        let first = x.first().copied().unwrap_or(0.0);
        let last = x.last().copied().unwrap_or(0.0);
        out.extend(std::iter::repeat_n(first, pad));
        out.extend_from_slice(x);
        out.extend(std::iter::repeat_n(last, pad));
        return out;
    }
    let w = n.min(LP_WINDOW);
    let head: Vec<f64> = x[..w].iter().rev().copied().collect();
    let mut left = extrapolate(&head, pad);
    left.reverse();
    let right = extrapolate(&x[n - w..], pad);
    out.extend_from_slice(&left);
    out.extend_from_slice(x);
    out.extend_from_slice(&right);
    out
}

/// Continues `seg` forward by `count` samples with an AR model.
fn extrapolate(seg: &[f64], count: usize) -> Vec<f64> {
    let mean = seg.iter().sum::<f64>() / seg.len() as f64;
    let centered: Vec<f64> = seg.iter().map(|v| v - mean).collect();
    let a = burg(&centered, LP_ORDER);
    let p = a.len() - 1;
    let mut hist: Vec<f64> = centered[centered.len() - p..].to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let m = hist.len();
        let next: f64 = -(1..=p).map(|j| a[j] * hist[m - j]).sum::<f64>();
        hist.push(next);
        out.push(next + mean);
    }
    out
}

/// Burg's method: AR coefficients `a[0] = 1, a[1..=order]` minimizing the
/// summed forward and backward prediction error.
fn burg(x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut a = vec![1.0];
    for m in 0..order.min(n.saturating_sub(1)) {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in (m + 1)..n {
            num += f[i] * b[i - 1];
            den += f[i] * f[i] + b[i - 1] * b[i - 1];
        }
        let k = if den > 1e-300 { -2.0 * num / den } else { 0.0 };
        a.push(0.0);
        let prev = a.clone();
        for j in 0..a.len() {
            a[j] = prev[j] + k * prev[prev.len() - 1 - j];
        }
        for i in ((m + 1)..n).rev() {
            let fi = f[i];
            let bi = b[i - 1];
            f[i] = fi + k * bi;
            b[i] = bi + k * fi;
        }
    }
    a
}

/// Non-overlapping fixed-length windows of a 21-channel recording.
///
/// Samples are stored channel-major: `[channel][segment][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentArray {
    pub recording_id: String,
    pub label: Option<ClassLabel>,
    pub sample_rate: f64,
    pub n_channels: usize,
    pub n_segments: usize,
    pub segment_len: usize,
    data: Vec<f64>,
}

impl SegmentArray {
    pub fn segment(&self, channel: usize, segment: usize) -> &[f64] {
        let start = (channel * self.n_segments + segment) * self.segment_len;
        &self.data[start..start + self.segment_len]
    }

    /// All segments of one channel, back to back.
    pub fn channel(&self, channel: usize) -> &[f64] {
        let len = self.n_segments * self.segment_len;
        &self.data[channel * len..(channel + 1) * len]
    }
}

/// Cuts each channel into `seg_seconds` windows from the start of the
/// recording, keeping at most `max_segments`. The trailing partial window
/// is discarded.
pub fn segment(
    rec: &Recording,
    seg_seconds: f64,
    max_segments: usize,
) -> Result<SegmentArray, PreprocessError> {
    if !rec.is_uniform() {
        return Err(PreprocessError::NonUniformRate);
    }
    let labels: Vec<&str> = rec.channels.iter().map(|c| c.label.as_str()).collect();
    if labels != STANDARD_CHANNELS {
        return Err(PreprocessError::NotCanonical(labels.join(",")));
    }
    let seg_len_f = seg_seconds * rec.sample_rate;
    if !(seg_len_f >= 1.0) || (seg_len_f - seg_len_f.round()).abs() > 1e-9 {
        return Err(PreprocessError::InvalidParameter(format!(
            "{seg_seconds} s at {} Hz is not a whole number of samples",
            rec.sample_rate
        )));
    }
    if max_segments < MIN_SEGMENTS {
        return Err(PreprocessError::InvalidParameter(format!(
            "max_segments {max_segments} below {MIN_SEGMENTS}"
        )));
    }
    let seg_len = seg_len_f.round() as usize;
    let available = rec.len() / seg_len;
    if available < MIN_SEGMENTS {
        return Err(PreprocessError::RecordingTooShort {
            samples: rec.len(),
            needed: MIN_SEGMENTS * seg_len,
        });
    }
    let n_segments = available.min(max_segments);
    let used = n_segments * seg_len;
    let mut data = Vec::with_capacity(rec.channels.len() * used);
    for ch in &rec.channels {
        data.extend_from_slice(&ch.samples[..used]);
    }
    Ok(SegmentArray {
        recording_id: rec.id.clone(),
        label: rec.label,
        sample_rate: rec.sample_rate,
        n_channels: rec.channels.len(),
        n_segments,
        segment_len: seg_len,
        data,
    })
}

/// select → resample → segment with the standard parameters.
pub fn preprocess(rec: &Recording) -> Result<SegmentArray, PreprocessError> {
    let selected = select_standard_channels(rec)?;
    let resampled = resample(&selected, TARGET_RATE)?;
    segment(&resampled, SEGMENT_SECONDS, MAX_SEGMENTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn standard_recording(rate: f64, n: usize) -> Recording {
        Recording::new(
            "r",
            rate,
            STANDARD_CHANNELS
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    (
                        name.to_string(),
                        (0..n).map(|i| (c * 1_000_000 + i) as f64).collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn label_normalization() {
        assert_eq!(normalize_channel_label("EEG FP1-REF"), "FP1");
        assert_eq!(normalize_channel_label("EEG Cz-LE"), "CZ");
        assert_eq!(normalize_channel_label("o2"), "O2");
        assert_eq!(normalize_channel_label("EEG EKG1-REF"), "EKG1");
    }

    #[test]
    fn selects_from_tuh_style_montage() {
        let mut chans: Vec<(String, Vec<f64>)> = Vec::new();
        // reverse order plus 15 extras, 36 in total
        for name in STANDARD_CHANNELS.iter().rev() {
            chans.push((format!("EEG {name}-REF"), vec![name.len() as f64; 8]));
        }
        for k in 0..15 {
            chans.push((format!("EEG EXTRA{k}-REF"), vec![0.0; 8]));
        }
        let rec = Recording::new("t", 250.0, chans).unwrap();
        assert_eq!(rec.channels.len(), 36);
        let out = select_standard_channels(&rec).unwrap();
        let names: Vec<&str> = out.channels.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(names, STANDARD_CHANNELS);
        assert_eq!(out.channels[0].samples, vec![3.0; 8]);
        // idempotent
        assert_eq!(select_standard_channels(&out).unwrap(), out);
    }

    #[test]
    fn canonical_input_unchanged() {
        let rec = standard_recording(250.0, 16);
        assert_eq!(select_standard_channels(&rec).unwrap(), rec);
    }

    #[test]
    fn missing_o2() {
        let chans = STANDARD_CHANNELS
            .iter()
            .filter(|n| **n != "O2")
            .map(|n| (n.to_string(), vec![0.0; 4]))
            .collect();
        let rec = Recording::new("t", 250.0, chans).unwrap();
        match select_standard_channels(&rec) {
            Err(PreprocessError::MissingChannel(c)) => assert_eq!(c, "O2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn resample_500_to_250_length() {
        let rec = Recording::new("r", 500.0, vec![("A".into(), vec![1.0; 4000])]).unwrap();
        let out = resample(&rec, 250.0).unwrap();
        assert_eq!(out.channels[0].samples.len(), 2000);
        assert_eq!(out.sample_rate, 250.0);
        // DC is preserved exactly up to rounding
        assert!(out.channels[0].samples.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn resample_identity_at_target() {
        let rec = standard_recording(250.0, 100);
        assert_eq!(resample(&rec, 250.0).unwrap(), rec);
    }

    #[test]
    fn resample_refuses_upsampling() {
        let rec = Recording::new("r", 200.0, vec![("A".into(), vec![0.0; 10])]).unwrap();
        assert!(matches!(
            resample(&rec, 250.0),
            Err(PreprocessError::UpsamplingRequested { .. })
        ));
    }

    #[test]
    fn resample_sine_matches_analytic() {
        for phase in [0.0, 0.7, 1.9, 3.3, 5.0] {
            let x: Vec<f64> = (0..4000)
                .map(|i| (2.0 * PI * 10.0 * i as f64 / 500.0 + phase).sin())
                .collect();
            let rec = Recording::new("r", 500.0, vec![("A".into(), x)]).unwrap();
            let out = resample(&rec, 250.0).unwrap();
            let worst = out.channels[0]
                .samples
                .iter()
                .enumerate()
                .map(|(j, v)| (v - (2.0 * PI * 10.0 * j as f64 / 250.0 + phase).sin()).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "phase {phase}: worst error {worst}");
        }
    }

    #[test]
    fn resample_non_integer_ratio() {
        // 256 Hz -> 250 Hz, a 5 Hz tone survives
        let x: Vec<f64> = (0..2560)
            .map(|i| (2.0 * PI * 5.0 * i as f64 / 256.0).sin())
            .collect();
        let rec = Recording::new("r", 256.0, vec![("A".into(), x)]).unwrap();
        let out = resample(&rec, 250.0).unwrap();
        assert_eq!(out.channels[0].samples.len(), 2500);
        let worst = out.channels[0]
            .samples
            .iter()
            .enumerate()
            .map(|(j, v)| (v - (2.0 * PI * 5.0 * j as f64 / 250.0).sin()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn resample_suppresses_aliasing_tone() {
        // 200 Hz at 500 Hz would alias to 50 Hz after plain decimation
        let x: Vec<f64> = (0..8000)
            .map(|i| (2.0 * PI * 200.0 * i as f64 / 500.0).sin())
            .collect();
        let rec = Recording::new("r", 500.0, vec![("A".into(), x)]).unwrap();
        let out = resample(&rec, 250.0).unwrap();
        let y = &out.channels[0].samples;
        let rms = (y[100..y.len() - 100].iter().map(|v| v * v).sum::<f64>()
            / (y.len() - 200) as f64)
            .sqrt();
        assert!(rms < 1e-3, "{rms}");
    }

    #[test]
    fn segment_caps_at_100() {
        let rec = standard_recording(250.0, 225_000);
        let seg = segment(&rec, 8.0, 100).unwrap();
        assert_eq!(seg.n_segments, 100);
        assert_eq!(seg.segment_len, 2000);
        assert_eq!(seg.n_channels, 21);
        assert_eq!(seg.segment(3, 7)[0], (3 * 1_000_000 + 7 * 2000) as f64);
    }

    #[test]
    fn segment_boundaries() {
        let seg = segment(&standard_recording(250.0, 4000), 8.0, 100).unwrap();
        assert_eq!(seg.n_segments, 2);
        assert!(matches!(
            segment(&standard_recording(250.0, 3975), 8.0, 100),
            Err(PreprocessError::RecordingTooShort { .. })
        ));
    }

    #[test]
    fn segment_concatenation_reproduces_prefix() {
        let rec = standard_recording(250.0, 13_500);
        let seg = segment(&rec, 8.0, 100).unwrap();
        assert_eq!(seg.n_segments, 6);
        for c in 0..21 {
            assert_eq!(seg.channel(c), &rec.channels[c].samples[..12_000]);
        }
    }

    #[test]
    fn segment_requires_canonical_channels() {
        let rec = Recording::new("r", 250.0, vec![("CZ".into(), vec![0.0; 4000])]).unwrap();
        assert!(matches!(
            segment(&rec, 8.0, 100),
            Err(PreprocessError::NotCanonical(_))
        ));
    }

    #[test]
    fn burg_recovers_sine_recursion() {
        let x: Vec<f64> = (0..200).map(|i| (0.3 * i as f64).sin()).collect();
        let ext = extrapolate(&x, 20);
        for (k, v) in ext.iter().enumerate() {
            let err = (v - (0.3 * (200 + k) as f64).sin()).abs();
            assert!(err < 1e-4, "step {k}: error {err}");
        }
    }
}
