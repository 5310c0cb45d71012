//! Test-side reference implementations, kept independent of the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub struct EdfSignal<'a> {
    pub label: &'a str,
    pub physical: (f64, f64),
    pub digital: (i16, i16),
    pub samples_per_record: usize,
    /// Digital values, `samples_per_record × records` long.
    pub data: &'a [i16],
}

/// Minimal EDF writer: fixed ASCII header, field-major signal headers and
/// interleaved 16-bit records.
pub fn edf_bytes(signals: &[EdfSignal], records: i64, record_seconds: f64) -> Vec<u8> {
    fn field(out: &mut Vec<u8>, s: &str, width: usize) {
        let mut b = s.as_bytes().to_vec();
        assert!(b.len() <= width, "{s:?} wider than {width}");
        b.resize(width, b' ');
        out.extend_from_slice(&b);
    }
    let ns = signals.len();
    let mut out = Vec::new();
    field(&mut out, "0", 8);
    field(&mut out, "patient", 80);
    field(&mut out, "recording", 80);
    field(&mut out, "01.01.20", 8);
    field(&mut out, "00.00.00", 8);
    field(&mut out, &(256 + 256 * ns).to_string(), 8);
    field(&mut out, "", 44);
    field(&mut out, &records.to_string(), 8);
    field(&mut out, &record_seconds.to_string(), 8);
    field(&mut out, &ns.to_string(), 4);
    for s in signals {
        field(&mut out, s.label, 16);
    }
    for _ in signals {
        field(&mut out, "AgAgCl electrode", 80);
    }
    for _ in signals {
        field(&mut out, "uV", 8);
    }
    for s in signals {
        field(&mut out, &s.physical.0.to_string(), 8);
    }
    for s in signals {
        field(&mut out, &s.physical.1.to_string(), 8);
    }
    for s in signals {
        field(&mut out, &s.digital.0.to_string(), 8);
    }
    for s in signals {
        field(&mut out, &s.digital.1.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, "HP:0.1Hz", 80);
    }
    for s in signals {
        field(&mut out, &s.samples_per_record.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, "", 32);
    }
    for r in 0..records.max(0) as usize {
        for s in signals {
            let chunk = &s.data[r * s.samples_per_record..(r + 1) * s.samples_per_record];
            for v in chunk {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// Two-pass population moments: (mav, avp, sd, skew, excess kurtosis).
pub fn naive_stats(x: &[f64]) -> [f64; 5] {
    let n = x.len() as f64;
    let mav = x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let avp = x.iter().map(|v| v * v).sum::<f64>() / n;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    [mav, avp, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0]
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
