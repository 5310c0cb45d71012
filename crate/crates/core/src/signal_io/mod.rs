//! Recording types and ingestion from EDF, CSV or the synthetic generator.

mod csv;
mod edf;
mod synth;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use self::csv::{read_csv, write_csv};
pub use self::edf::{read_edf, read_edf_bytes};
pub use self::synth::{synth_recording, SYNTH_SAMPLE_RATE};

/// Ground-truth class of a recording. `Abnormal` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Normal,
    Abnormal,
}

impl ClassLabel {
    /// 0 for normal, 1 for abnormal.
    pub fn as_u8(self) -> u8 {
        match self {
            ClassLabel::Normal => 0,
            ClassLabel::Abnormal => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(ClassLabel::Normal),
            1 => Some(ClassLabel::Abnormal),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Abnormal => "abnormal",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "0" => Ok(ClassLabel::Normal),
            "abnormal" | "1" => Ok(ClassLabel::Abnormal),
            other => Err(format!("unknown class label {other:?}")),
        }
    }
}

/// One electrode's samples in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSignal {
    pub label: String,
    pub samples: Vec<f64>,
    /// Samples per second for this channel. Equal to the owning
    /// recording's rate unless the source file mixed rates.
    pub sample_rate: f64,
}

impl ChannelSignal {
    pub fn new(label: impl Into<String>, samples: Vec<f64>, sample_rate: f64) -> Self {
        Self {
            label: label.into(),
            samples,
            sample_rate,
        }
    }
}

/// A multi-channel EEG recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub label: Option<ClassLabel>,
    /// Common sampling rate. For mixed-rate EDF input this is the highest
    /// channel rate and [`Recording::is_uniform`] is false until resampling.
    pub sample_rate: f64,
    pub channels: Vec<ChannelSignal>,
}

impl Recording {
    /// Builds a uniform-rate recording, checking the type invariants.
    pub fn new(
        id: impl Into<String>,
        sample_rate: f64,
        channels: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, SignalError> {
        let rec = Recording {
            id: id.into(),
            label: None,
            sample_rate,
            channels: channels
                .into_iter()
                .map(|(label, samples)| ChannelSignal::new(label, samples, sample_rate))
                .collect(),
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn with_label(mut self, label: Option<ClassLabel>) -> Self {
        self.label = label;
        self
    }

    /// True when every channel shares the recording's sample rate.
    pub fn is_uniform(&self) -> bool {
        self.channels.iter().all(|c| c.sample_rate == self.sample_rate)
    }

    /// Samples per channel; zero for an empty recording.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, label: &str) -> Option<&ChannelSignal> {
        self.channels.iter().find(|c| c.label == label)
    }

    /// Checks positive rates, unique labels, finite samples and, for
    /// uniform recordings, equal channel lengths.
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(SignalError::InvalidSampleRate(self.sample_rate));
        }
        let mut seen = std::collections::HashSet::new();
        for ch in &self.channels {
            if !(ch.sample_rate > 0.0 && ch.sample_rate.is_finite()) {
                return Err(SignalError::InvalidSampleRate(ch.sample_rate));
            }
            if !seen.insert(ch.label.as_str()) {
                return Err(SignalError::DuplicateChannel(ch.label.clone()));
            }
            if let Some(i) = ch.samples.iter().position(|v| !v.is_finite()) {
                return Err(SignalError::NonFiniteSample {
                    channel: ch.label.clone(),
                    index: i,
                });
            }
        }
        if self.is_uniform() {
            let n = self.len();
            if let Some(ch) = self.channels.iter().find(|c| c.samples.len() != n) {
                return Err(SignalError::UnequalLengths {
                    channel: ch.label.clone(),
                    expected: n,
                    found: ch.samples.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SignalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed EDF header: {0}")]
    MalformedHeader(String),
    #[error("truncated EDF data: header declares {declared} records, file holds {found}")]
    TruncatedData { declared: usize, found: usize },
    #[error("non-finite sample in channel {channel} at index {index}")]
    NonFiniteSample { channel: String, index: usize },
    #[error("CSV row {row} has {found} cells, header has {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("CSV row {row}, column {column}: cannot parse {cell:?} as a number")]
    NonNumericCell {
        row: usize,
        column: usize,
        cell: String,
    },
    #[error("CSV: {0}")]
    Csv(String),
    #[error("synthetic recordings need at least 16 s, got {0} s")]
    DurationTooShort(f64),
    #[error("invalid sample rate {0}")]
    InvalidSampleRate(f64),
    #[error("duplicate channel label {0}")]
    DuplicateChannel(String),
    #[error("channel {channel} has {found} samples, expected {expected}")]
    UnequalLengths {
        channel: String,
        expected: usize,
        found: usize,
    },
}

/// Recording id derived from a file path: the file stem.
pub(crate) fn id_from_path(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_duplicate_labels() {
        let err = Recording::new(
            "r",
            250.0,
            vec![("CZ".into(), vec![0.0; 4]), ("CZ".into(), vec![0.0; 4])],
        )
        .unwrap_err();
        assert!(matches!(err, SignalError::DuplicateChannel(_)));
    }

    #[test]
    fn new_rejects_unequal_lengths_and_bad_rate() {
        let err = Recording::new(
            "r",
            250.0,
            vec![("A".into(), vec![0.0; 4]), ("B".into(), vec![0.0; 3])],
        )
        .unwrap_err();
        assert!(matches!(err, SignalError::UnequalLengths { .. }));
        let err = Recording::new("r", 0.0, vec![]).unwrap_err();
        assert!(matches!(err, SignalError::InvalidSampleRate(_)));
    }

    #[test]
    fn new_rejects_nan() {
        let err = Recording::new("r", 250.0, vec![("A".into(), vec![0.0, f64::NAN])]).unwrap_err();
        assert!(matches!(err, SignalError::NonFiniteSample { index: 1, .. }));
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Abnormal".parse::<ClassLabel>().unwrap(), ClassLabel::Abnormal);
        assert_eq!(" normal ".parse::<ClassLabel>().unwrap(), ClassLabel::Normal);
        assert!("maybe".parse::<ClassLabel>().is_err());
        assert_eq!(ClassLabel::from_u8(ClassLabel::Abnormal.as_u8()), Some(ClassLabel::Abnormal));
    }
}
