//! Seeded synthetic EEG for desk-scale runs.
//!
//! Every recording starts from the same kind of background: per-channel
//! pink noise, a posterior-dominant alpha rhythm near 10 Hz and a little
//! white noise. Abnormal recordings add, on top of the identical background
//! for the same seed, intermittent high-amplitude ~3 Hz bursts and a weak
//! continuous slow rhythm on a random subset of channels.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ClassLabel, Recording, SignalError};
use crate::preprocess::STANDARD_CHANNELS;

pub const SYNTH_SAMPLE_RATE: f64 = 250.0;

const BACKGROUND_STREAM: u64 = 0x6261_636b_6772_6e64;
const ABNORMAL_STREAM: u64 = 0x6162_6e6f_726d_616c;

const POSTERIOR: [&str; 7] = ["O1", "O2", "P3", "P4", "PZ", "T5", "T6"];

/// Paul Kellet's economy pink filter, fed with unit white noise.
struct PinkFilter {
    b: [f64; 7],
}

impl PinkFilter {
    fn new() -> Self {
        Self { b: [0.0; 7] }
    }

    fn next(&mut self, white: f64) -> f64 {
        let b = &mut self.b;
        b[0] = 0.99886 * b[0] + white * 0.0555179;
        b[1] = 0.99332 * b[1] + white * 0.0750759;
        b[2] = 0.96900 * b[2] + white * 0.1538520;
        b[3] = 0.86650 * b[3] + white * 0.3104856;
        b[4] = 0.55000 * b[4] + white * 0.5329522;
        b[5] = -0.7616 * b[5] - white * 0.0168980;
        let out = b.iter().sum::<f64>() + white * 0.5362;
        b[6] = white * 0.115926;
        out * 0.11
    }
}

/// Generates a 21-channel, 250 Hz recording of `duration_s` seconds.
///
/// The output is a pure function of `(class, duration_s, seed)`.
pub fn synth_recording(
    class: ClassLabel,
    duration_s: f64,
    seed: u64,
) -> Result<Recording, SignalError> {
    if !(duration_s >= 16.0) || !duration_s.is_finite() {
        return Err(SignalError::DurationTooShort(duration_s));
    }
    let n = (duration_s * SYNTH_SAMPLE_RATE).round() as usize;
    let fs = SYNTH_SAMPLE_RATE;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BACKGROUND_STREAM);
    let alpha_freq = rng.random_range(9.0..11.0);
    let alpha_amp = rng.random_range(6.0..14.0);
    let noise_amp = rng.random_range(18.0..30.0);
    let mod_freq = rng.random_range(0.05..0.3);

    let mut channels: Vec<(String, Vec<f64>)> = Vec::with_capacity(STANDARD_CHANNELS.len());
    for &name in STANDARD_CHANNELS.iter() {
        let gain = if POSTERIOR.contains(&name) { 1.5 } else { 0.7 };
        let phase = rng.random_range(0.0..2.0 * PI);
        let mod_phase = rng.random_range(0.0..2.0 * PI);
        let mut pink = PinkFilter::new();
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let w: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(StandardNormal);
                let envelope = 1.0 + 0.4 * (2.0 * PI * mod_freq * t + mod_phase).sin();
                noise_amp * pink.next(w)
                    + gain * alpha_amp * envelope * (2.0 * PI * alpha_freq * t + phase).sin()
                    + e
            })
            .collect();
        channels.push((name.to_string(), samples));
    }

    if class == ClassLabel::Abnormal {
        add_abnormal_activity(&mut channels, n, fs, seed);
    }

    Ok(Recording::new(format!("synth-{class}-{seed}"), fs, channels)?.with_label(Some(class)))
}

fn add_abnormal_activity(channels: &mut [(String, Vec<f64>)], n: usize, fs: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ABNORMAL_STREAM);
    let mut order: Vec<usize> = (0..channels.len()).collect();
    order.shuffle(&mut rng);
    let affected_count = rng.random_range(6..=15);
    let affected = &order[..affected_count];
    let gains: Vec<f64> = affected.iter().map(|_| rng.random_range(0.6..1.0)).collect();

    // continuous slowing
    let slow_freq = rng.random_range(2.0..4.0);
    let slow_amp = rng.random_range(3.0..6.0);
    for (&c, &g) in affected.iter().zip(&gains) {
        let phase = rng.random_range(0.0..2.0 * PI);
        for (i, v) in channels[c].1.iter_mut().enumerate() {
            *v += g * slow_amp * (2.0 * PI * slow_freq * i as f64 / fs + phase).sin();
        }
    }

    // intermittent bursts
    let mut t = rng.random_range(0.0..4.0);
    let total = n as f64 / fs;
    while t < total {
        let dur = rng.random_range(1.5..4.0);
        let freq = rng.random_range(2.5..3.5);
        let amp = rng.random_range(25.0..50.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let start = (t * fs) as usize;
        let len = (dur * fs) as usize;
        for (&c, &g) in affected.iter().zip(&gains) {
            let samples = &mut channels[c].1;
            for k in 0..len.min(n.saturating_sub(start)) {
                let env = 0.5 - 0.5 * (2.0 * PI * k as f64 / len as f64).cos();
                let s = k as f64 / fs;
                samples[start + k] += g * amp * env * (2.0 * PI * freq * s + phase).sin();
            }
        }
        t += dur + rng.random_range(1.0..7.0);
    }
}
