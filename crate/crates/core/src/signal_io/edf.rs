//! EDF reader (16-bit little-endian data records).
//!
//! Format reference: <https://www.edfplus.info/specs/edf.html>. Annotation
//! signals ("EDF Annotations") are dropped.

use std::path::Path;

use super::{id_from_path, ChannelSignal, Recording, SignalError};

const FIXED_HEADER: usize = 256;
const SIGNAL_HEADER: usize = 256;
// label, transducer, physical dimension, physical min, physical max,
// digital min, digital max, prefiltering, samples per record, reserved
const SIGNAL_FIELD_WIDTHS: [usize; 10] = [16, 80, 8, 8, 8, 8, 8, 80, 8, 32];

struct SignalHeader {
    label: String,
    physical_min: f64,
    physical_max: f64,
    digital_min: f64,
    digital_max: f64,
    samples_per_record: usize,
}

impl SignalHeader {
    fn scale(&self, digital: i16) -> f64 {
        (f64::from(digital) - self.digital_min) * (self.physical_max - self.physical_min)
            / (self.digital_max - self.digital_min)
            + self.physical_min
    }
}

pub fn read_edf(path: impl AsRef<Path>) -> Result<Recording, SignalError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_edf_bytes(&bytes, id_from_path(path))
}

fn ascii_field(bytes: &[u8], start: usize, width: usize) -> Result<&str, SignalError> {
    let raw = bytes
        .get(start..start + width)
        .ok_or_else(|| SignalError::MalformedHeader("header shorter than declared".into()))?;
    std::str::from_utf8(raw)
        .map(str::trim)
        .map_err(|_| SignalError::MalformedHeader(format!("non-ASCII header field at byte {start}")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, SignalError> {
    s.parse::<T>()
        .map_err(|_| SignalError::MalformedHeader(format!("{what}: cannot parse {s:?}")))
}

/// Parses an in-memory EDF file.
pub fn read_edf_bytes(bytes: &[u8], id: impl Into<String>) -> Result<Recording, SignalError> {
    if bytes.len() < FIXED_HEADER {
        return Err(SignalError::MalformedHeader(format!(
            "file is {} bytes, shorter than the {FIXED_HEADER}-byte fixed header",
            bytes.len()
        )));
    }
    if ascii_field(bytes, 0, 8)? != "0" {
        return Err(SignalError::MalformedHeader("version field is not \"0\"".into()));
    }
    let header_bytes: usize = parse_num(ascii_field(bytes, 184, 8)?, "header byte count")?;
    let declared_records: i64 = parse_num(ascii_field(bytes, 236, 8)?, "number of data records")?;
    let record_duration: f64 = parse_num(ascii_field(bytes, 244, 8)?, "data record duration")?;
    let ns: usize = parse_num(ascii_field(bytes, 252, 4)?, "number of signals")?;

    if ns == 0 {
        return Err(SignalError::MalformedHeader("zero signals".into()));
    }
    if header_bytes != FIXED_HEADER + ns * SIGNAL_HEADER {
        return Err(SignalError::MalformedHeader(format!(
            "header byte count {header_bytes} does not match {ns} signals"
        )));
    }
    if bytes.len() < header_bytes {
        return Err(SignalError::MalformedHeader("signal headers truncated".into()));
    }
    if !(record_duration > 0.0 && record_duration.is_finite()) {
        return Err(SignalError::MalformedHeader(format!(
            "data record duration {record_duration} is not positive"
        )));
    }

    // Field-major layout: all labels, then all transducers, and so on.
    let mut offsets = [0usize; SIGNAL_FIELD_WIDTHS.len()];
    let mut acc = FIXED_HEADER;
    for (slot, w) in offsets.iter_mut().zip(SIGNAL_FIELD_WIDTHS) {
        *slot = acc;
        acc += w * ns;
    }
    let field = |f: usize, i: usize| {
        let w = SIGNAL_FIELD_WIDTHS[f];
        ascii_field(bytes, offsets[f] + i * w, w)
    };

    let mut signals = Vec::with_capacity(ns);
    for i in 0..ns {
        let sig = SignalHeader {
            label: field(0, i)?.to_string(),
            physical_min: parse_num(field(3, i)?, "physical minimum")?,
            physical_max: parse_num(field(4, i)?, "physical maximum")?,
            digital_min: parse_num(field(5, i)?, "digital minimum")?,
            digital_max: parse_num(field(6, i)?, "digital maximum")?,
            samples_per_record: parse_num(field(8, i)?, "samples per record")?,
        };
        if sig.digital_max <= sig.digital_min {
            return Err(SignalError::MalformedHeader(format!(
                "signal {}: digital max {} not above digital min {}",
                sig.label, sig.digital_max, sig.digital_min
            )));
        }
        signals.push(sig);
    }

    let record_samples: usize = signals.iter().map(|s| s.samples_per_record).sum();
    let record_bytes = record_samples * 2;
    let payload = &bytes[header_bytes..];
    let available = payload.len().checked_div(record_bytes).unwrap_or(0);
    let n_records = if declared_records < 0 {
        available
    } else {
        let declared = declared_records as usize;
        if available < declared {
            return Err(SignalError::TruncatedData {
                declared,
                found: available,
            });
        }
        declared
    };

    let mut channels: Vec<ChannelSignal> = signals
        .iter()
        .map(|s| {
            ChannelSignal::new(
                s.label.clone(),
                Vec::with_capacity(s.samples_per_record * n_records),
                s.samples_per_record as f64 / record_duration,
            )
        })
        .collect();

    for rec in 0..n_records {
        let mut pos = rec * record_bytes;
        for (sig, ch) in signals.iter().zip(channels.iter_mut()) {
            let chunk = &payload[pos..pos + sig.samples_per_record * 2];
            ch.samples.extend(
                chunk
                    .chunks_exact(2)
                    .map(|b| sig.scale(i16::from_le_bytes([b[0], b[1]]))),
            );
            pos += sig.samples_per_record * 2;
        }
    }

    channels.retain(|c| !c.label.contains("EDF Annotations"));
    for ch in &channels {
        if let Some(index) = ch.samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFiniteSample {
                channel: ch.label.clone(),
                index,
            });
        }
        if !(ch.sample_rate > 0.0) {
            return Err(SignalError::MalformedHeader(format!(
                "signal {} has zero samples per record",
                ch.label
            )));
        }
    }
    let sample_rate = channels
        .iter()
        .map(|c| c.sample_rate)
        .fold(f64::NAN, f64::max);
    if !sample_rate.is_finite() {
        return Err(SignalError::MalformedHeader("no signal channels".into()));
    }

    let rec = Recording {
        id: id.into(),
        label: None,
        sample_rate,
        channels,
    };
    rec.validate()?;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_wrong_magic() {
        assert!(matches!(
            read_edf_bytes(&[b' '; 100], "x"),
            Err(SignalError::MalformedHeader(_))
        ));
        let mut hdr = vec![b' '; 256];
        hdr[..7].copy_from_slice(b"BIOSEMI");
        assert!(matches!(
            read_edf_bytes(&hdr, "x"),
            Err(SignalError::MalformedHeader(_))
        ));
    }

    #[test]
    fn scaling_maps_digital_extremes_to_physical_extremes() {
        let s = SignalHeader {
            label: "X".into(),
            physical_min: -200.0,
            physical_max: 200.0,
            digital_min: -32768.0,
            digital_max: 32767.0,
            samples_per_record: 1,
        };
        assert_eq!(s.scale(-32768), -200.0);
        assert!((s.scale(32767) - 200.0).abs() < 1e-12);
    }
}
