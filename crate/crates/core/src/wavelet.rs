//! Orthogonal two-channel filter banks and wavelet packet decomposition.
//!
//! Analysis correlates the (extended) signal with the time-reversed
//! analysis filters and keeps every second output, so output `i` of a step
//! is computed from input samples `2i ..= 2i + L - 1`:
//!
//! ```text
//! approx[i] = Σ_k lo[L-1-k] · x[2i + k]
//! detail[i] = Σ_k hi[L-1-k] · x[2i + k]
//! ```
//!
//! Odd-length inputs are made even by repeating the last sample, so every
//! step halves the length rounding up.

use std::sync::OnceLock;

pub const MAX_LEVEL: usize = 8;

/// Daubechies-4 scaling (low-pass analysis) filter, 8 taps.
const DB4_LO: [f64; 8] = [
    -0.010597401784997278,
    0.032883011666982945,
    0.030841381835986965,
    -0.18703481171888114,
    -0.02798376941698385,
    0.6308807679295904,
    0.7148465705525415,
    0.23037781330885523,
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WaveletError {
    #[error("signal of length {len} is too short (need at least {needed})")]
    SignalTooShort { len: usize, needed: usize },
    #[error("approximation has {approx} coefficients but detail has {detail}")]
    LengthMismatch { approx: usize, detail: usize },
    #[error("decomposition depth {0} outside 1..=8")]
    InvalidDepth(usize),
    #[error("filter bank violates {0}")]
    InvalidFilterBank(String),
}

/// Boundary handling for the analysis step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extension {
    /// Circular wrap-around. Orthogonal on even lengths.
    #[default]
    Periodic,
    /// Half-sample mirror at the right edge.
    Symmetric,
}

impl std::str::FromStr for Extension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "periodization" => Ok(Extension::Periodic),
            "symmetric" => Ok(Extension::Symmetric),
            other => Err(format!("unknown extension mode {other:?}")),
        }
    }
}

impl std::fmt::Display for Extension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Extension::Periodic => "periodic",
            Extension::Symmetric => "symmetric",
        })
    }
}

/// Analysis and synthesis filters of an orthogonal wavelet.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub lo_analysis: Vec<f64>,
    pub hi_analysis: Vec<f64>,
    pub lo_synthesis: Vec<f64>,
    pub hi_synthesis: Vec<f64>,
}

impl FilterBank {
    /// Builds the full bank from an orthonormal scaling filter via the
    /// quadrature-mirror relation `hi[k] = (-1)^k lo[L-1-k]`.
    pub fn from_scaling_filter(lo: &[f64]) -> Self {
        let l = lo.len();
        let hi: Vec<f64> = (0..l)
            .map(|k| if k % 2 == 0 { lo[l - 1 - k] } else { -lo[l - 1 - k] })
            .collect();
        FilterBank {
            lo_synthesis: lo.iter().rev().copied().collect(),
            hi_synthesis: hi.iter().rev().copied().collect(),
            lo_analysis: lo.to_vec(),
            hi_analysis: hi,
        }
    }

    pub fn len(&self) -> usize {
        self.lo_analysis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo_analysis.is_empty()
    }

    /// Checks normalization, unit energy, double-shift orthogonality, the
    /// QMF relation and the synthesis time reversal, all to `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), WaveletError> {
        let lo = &self.lo_analysis;
        let l = lo.len();
        let bad = |what: &str| Err(WaveletError::InvalidFilterBank(what.to_string()));
        if l < 2 || l % 2 != 0 {
            return bad("even filter length");
        }
        if [&self.hi_analysis, &self.lo_synthesis, &self.hi_synthesis]
            .iter()
            .any(|f| f.len() != l)
        {
            return bad("equal filter lengths");
        }
        if (lo.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() > tol {
            return bad("sum(lo) = sqrt(2)");
        }
        for m in 0..l / 2 {
            let dot: f64 = (0..l - 2 * m).map(|k| lo[k] * lo[k + 2 * m]).sum();
            let want = if m == 0 { 1.0 } else { 0.0 };
            if (dot - want).abs() > tol {
                return bad("double-shift orthonormality of lo");
            }
        }
        for k in 0..l {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if (self.hi_analysis[k] - sign * lo[l - 1 - k]).abs() > tol {
                return bad("quadrature-mirror relation");
            }
            if self.lo_synthesis[k] != lo[l - 1 - k]
                || self.hi_synthesis[k] != self.hi_analysis[l - 1 - k]
            {
                return bad("synthesis = time-reversed analysis");
            }
        }
        Ok(())
    }
}

/// The Daubechies-4 bank. Validated on first use.
pub fn db4_filter_bank() -> FilterBank {
    static BANK: OnceLock<FilterBank> = OnceLock::new();
    BANK.get_or_init(|| {
        let fb = FilterBank::from_scaling_filter(&DB4_LO);
        fb.validate(1e-12).expect("embedded db4 coefficients");
        fb
    })
    .clone()
}

/// One level of analysis: `(approx, detail)`, each `ceil(n/2)` long.
pub fn analysis_step(
    signal: &[f64],
    fb: &FilterBank,
    ext: Extension,
) -> Result<(Vec<f64>, Vec<f64>), WaveletError> {
    let n = signal.len();
    if n < 2 {
        return Err(WaveletError::SignalTooShort { len: n, needed: 2 });
    }
    let out_len = n.div_ceil(2);
    let m = 2 * out_len;
    let l = fb.len();
    // lo_synthesis / hi_synthesis are the time-reversed analysis filters
    let (g, gh) = (&fb.lo_synthesis, &fb.hi_synthesis);
    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);

    let sample = |j: usize| -> f64 {
        match ext {
            Extension::Periodic => {
                let j = j % m;
                // odd lengths: position n repeats the final sample
                signal[j.min(n - 1)]
            }
            Extension::Symmetric => signal[reflect(j, n)],
        }
    };

    for i in 0..out_len {
        let base = 2 * i;
        let (mut a, mut d) = (0.0, 0.0);
        if base + l <= n {
            let window = &signal[base..base + l];
            for k in 0..l {
                a += g[k] * window[k];
                d += gh[k] * window[k];
            }
        } else {
            for k in 0..l {
                let v = sample(base + k);
                a += g[k] * v;
                d += gh[k] * v;
            }
        }
        approx.push(a);
        detail.push(d);
    }
    Ok((approx, detail))
}

/// Half-sample symmetric index for `j >= 0` on a length-`n` signal.
fn reflect(j: usize, n: usize) -> usize {
    let period = 2 * n;
    let r = j % period;
    if r < n {
        r
    } else {
        period - 1 - r
    }
}

/// Inverse of a periodic [`analysis_step`] on an even-length signal.
pub fn synthesis_step(
    approx: &[f64],
    detail: &[f64],
    fb: &FilterBank,
) -> Result<Vec<f64>, WaveletError> {
    if approx.len() != detail.len() {
        return Err(WaveletError::LengthMismatch {
            approx: approx.len(),
            detail: detail.len(),
        });
    }
    let m = 2 * approx.len();
    let mut out = vec![0.0; m];
    if m == 0 {
        return Ok(out);
    }
    let (g, gh) = (&fb.lo_synthesis, &fb.hi_synthesis);
    for (i, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        for k in 0..fb.len() {
            out[(2 * i + k) % m] += a * g[k] + d * gh[k];
        }
    }
    Ok(out)
}

/// A node of the packet tree, addressed by its path from the root.
#[derive(Debug, Clone, PartialEq)]
pub struct WpdNode {
    /// `A` = low-pass child, `D` = high-pass child, root first.
    pub path: String,
    pub coeffs: Vec<f64>,
}

impl WpdNode {
    pub fn level(&self) -> usize {
        self.path.len()
    }
}

/// The 16 sub-bands used for features: the pure-detail chain
/// `D, DD, …, DDDDDDDD` followed by the pure-approximation chain
/// `A, AA, …, AAAAAAAA`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedCoefficients {
    pub nodes: Vec<WpdNode>,
}

impl SelectedCoefficients {
    /// Canonical node paths for a given depth.
    pub fn canonical_paths(depth: usize) -> Vec<String> {
        (1..=depth)
            .map(|k| "D".repeat(k))
            .chain((1..=depth).map(|k| "A".repeat(k)))
            .collect()
    }
}

fn check_depth(len: usize, depth: usize) -> Result<(), WaveletError> {
    if depth == 0 || depth > MAX_LEVEL {
        return Err(WaveletError::InvalidDepth(depth));
    }
    let needed = 1usize << depth;
    if len < needed {
        return Err(WaveletError::SignalTooShort { len, needed });
    }
    Ok(())
}

/// Follows the all-detail and all-approximation chains down `depth`
/// levels and returns their nodes in canonical order.
pub fn decompose_paths(
    segment: &[f64],
    depth: usize,
    fb: &FilterBank,
    ext: Extension,
) -> Result<SelectedCoefficients, WaveletError> {
    check_depth(segment.len(), depth)?;
    let mut nodes = Vec::with_capacity(2 * depth);
    for (take_detail, letter) in [(true, "D"), (false, "A")] {
        let mut current = segment.to_vec();
        for level in 1..=depth {
            let (a, d) = analysis_step(&current, fb, ext)?;
            current = if take_detail { d } else { a };
            nodes.push(WpdNode {
                path: letter.repeat(level),
                coeffs: current.clone(),
            });
        }
    }
    Ok(SelectedCoefficients { nodes })
}

/// Full packet tree to `depth`; returns the `2^depth` leaves in natural
/// binary-path order (`A…A` first, `D…D` last).
pub fn decompose_full(
    signal: &[f64],
    depth: usize,
    fb: &FilterBank,
    ext: Extension,
) -> Result<Vec<WpdNode>, WaveletError> {
    check_depth(signal.len(), depth)?;
    let mut level = vec![WpdNode {
        path: String::new(),
        coeffs: signal.to_vec(),
    }];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for node in level {
            let (a, d) = analysis_step(&node.coeffs, fb, ext)?;
            next.push(WpdNode {
                path: format!("{}A", node.path),
                coeffs: a,
            });
            next.push(WpdNode {
                path: format!("{}D", node.path),
                coeffs: d,
            });
        }
        level = next;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn random_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn db4_invariants() {
        let fb = db4_filter_bank();
        assert_eq!(fb.len(), 8);
        assert!((fb.lo_analysis.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12);
        assert!((energy(&fb.lo_analysis) - 1.0).abs() < 1e-12);
        for k in 0..8 {
            let qmf = (-1f64).powi(k as i32) * fb.lo_analysis[7 - k];
            assert!((fb.hi_analysis[k] - qmf).abs() < 1e-15);
        }
        fb.validate(1e-12).unwrap();
    }

    #[test]
    fn validate_rejects_broken_bank() {
        let mut fb = db4_filter_bank();
        fb.lo_analysis[0] += 1e-6;
        assert!(fb.validate(1e-12).is_err());
    }

    #[test]
    fn constant_signal() {
        let fb = db4_filter_bank();
        let c = 3.5;
        let (a, d) = analysis_step(&vec![c; 64], &fb, Extension::Periodic).unwrap();
        for (av, dv) in a.iter().zip(&d) {
            assert!(dv.abs() < 1e-12 * c);
            assert!((av - c * 2f64.sqrt()).abs() < 1e-12 * c);
        }
    }

    #[test]
    fn lengths_and_short_input() {
        let fb = db4_filter_bank();
        let (a, d) = analysis_step(&vec![0.0; 2000], &fb, Extension::Periodic).unwrap();
        assert_eq!((a.len(), d.len()), (1000, 1000));
        let (a, _) = analysis_step(&[1.0, 2.0, 3.0], &fb, Extension::Symmetric).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(
            analysis_step(&[1.0], &fb, Extension::Periodic),
            Err(WaveletError::SignalTooShort { len: 1, needed: 2 })
        );
    }

    #[test]
    fn energy_preserved_one_level() {
        let fb = db4_filter_bank();
        let x = random_signal(2048, 1);
        let (a, d) = analysis_step(&x, &fb, Extension::Periodic).unwrap();
        let rel = (energy(&a) + energy(&d) - energy(&x)).abs() / energy(&x);
        assert!(rel < 1e-10);
    }

    #[test]
    fn perfect_reconstruction_and_errors() {
        let fb = db4_filter_bank();
        let x = random_signal(2048, 2);
        let (a, d) = analysis_step(&x, &fb, Extension::Periodic).unwrap();
        let y = synthesis_step(&a, &d, &fb).unwrap();
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert_eq!(synthesis_step(&[0.0; 4], &[0.0; 4], &fb).unwrap(), vec![0.0; 8]);
        assert_eq!(
            synthesis_step(&[0.0; 4], &[0.0; 5], &fb),
            Err(WaveletError::LengthMismatch { approx: 4, detail: 5 })
        );
    }

    #[test]
    fn path_lengths_from_2000() {
        let fb = db4_filter_bank();
        let sel = decompose_paths(&random_signal(2000, 3), 8, &fb, Extension::Periodic).unwrap();
        let lens: Vec<usize> = sel.nodes.iter().map(|n| n.coeffs.len()).collect();
        let chain = [1000, 500, 250, 125, 63, 32, 16, 8];
        assert_eq!(&lens[..8], &chain);
        assert_eq!(&lens[8..], &chain);
        let paths: Vec<&str> = sel.nodes.iter().map(|n| n.path.as_str()).collect();
        assert_eq!(paths, SelectedCoefficients::canonical_paths(8));
        assert_eq!(paths[7], "DDDDDDDD");
        assert_eq!(paths[8], "A");
    }

    #[test]
    fn zero_segment_gives_zero_nodes() {
        let fb = db4_filter_bank();
        let sel = decompose_paths(&[0.0; 2000], 8, &fb, Extension::Periodic).unwrap();
        assert_eq!(sel.nodes.len(), 16);
        assert!(sel.nodes.iter().all(|n| n.coeffs.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn depth_limits() {
        let fb = db4_filter_bank();
        assert_eq!(
            decompose_paths(&[0.0; 2000], 9, &fb, Extension::Periodic),
            Err(WaveletError::InvalidDepth(9))
        );
        assert_eq!(
            decompose_full(&[0.0; 100], 7, &fb, Extension::Periodic),
            Err(WaveletError::SignalTooShort { len: 100, needed: 128 })
        );
    }

    #[test]
    fn full_tree_depth_one_matches_step() {
        let fb = db4_filter_bank();
        let x = random_signal(300, 4);
        let leaves = decompose_full(&x, 1, &fb, Extension::Periodic).unwrap();
        let (a, d) = analysis_step(&x, &fb, Extension::Periodic).unwrap();
        assert_eq!(leaves[0].coeffs, a);
        assert_eq!(leaves[1].coeffs, d);
        assert_eq!((leaves[0].path.as_str(), leaves[1].path.as_str()), ("A", "D"));
    }

    #[test]
    fn full_tree_depth_three_has_eight_leaves() {
        let fb = db4_filter_bank();
        let leaves = decompose_full(&random_signal(512, 5), 3, &fb, Extension::Periodic).unwrap();
        let paths: Vec<&str> = leaves.iter().map(|l| l.path.as_str()).collect();
        assert_eq!(paths, ["AAA", "AAD", "ADA", "ADD", "DAA", "DAD", "DDA", "DDD"]);
        assert!(leaves.iter().all(|l| l.coeffs.len() == 64));
    }

    #[test]
    fn symmetric_extension_is_mirror_at_edge() {
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(10, 5), 0);
    }
}
