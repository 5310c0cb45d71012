//! Normal/abnormal classification of multi-channel EEG recordings.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`signal_io`] reads EDF or CSV recordings (or synthesizes them),
//! 2. [`preprocess`] picks the 21 standard 10/20 electrodes, resamples to
//!    250 Hz and cuts 8 s windows,
//! 3. [`wavelet`] runs an 8-level db4 wavelet packet decomposition along the
//!    pure-approximation and pure-detail chains,
//! 4. [`features`] turns the 16 selected sub-bands into six statistics each,
//!    normalizes every segment vector and reduces a recording to one
//!    4032-value vector through half-wise medians,
//! 5. [`gbdt`] trains and applies a histogram gradient-boosted tree ensemble,
//!    and [`eval`] scores its predictions.
//!
//! [`cli`] wires these together behind the `eegwpd` binary.

pub mod cli;
pub mod eval;
pub mod features;
pub mod gbdt;
pub mod preprocess;
pub mod signal_io;
pub mod wavelet;

pub use eval::{ConfusionMatrix, MetricsReport};
pub use features::{AggregatedFeatureVector, FeatureTensor, SegmentFeatureVector};
pub use gbdt::{GbdtModel, TrainParams};
pub use preprocess::SegmentArray;
pub use signal_io::{ChannelSignal, ClassLabel, Recording};
pub use wavelet::{FilterBank, SelectedCoefficients, WpdNode};

/// Errors from any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Signal(#[from] signal_io::SignalError),
    #[error(transparent)]
    Preprocess(#[from] preprocess::PreprocessError),
    #[error(transparent)]
    Wavelet(#[from] wavelet::WaveletError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Gbdt(#[from] gbdt::GbdtError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
