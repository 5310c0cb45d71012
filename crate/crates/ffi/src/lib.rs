//! C interface to `eegwpd`.
//!
//! Every fallible function returns an [`EegwpdStatus`]. On failure a
//! description is kept per thread and can be read with
//! [`eegwpd_last_error_message`]. Models are opaque handles created by
//! [`eegwpd_model_load`] and released with [`eegwpd_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eegwpd::features::{
    self, FeatureOptions, NormalizationScope, AGGREGATED_FEATURES, DEPTH, SEGMENT_FEATURES,
};
use eegwpd::gbdt::{self, GbdtError, GbdtModel};
use eegwpd::wavelet::{self, Extension};
use eegwpd::{eval, Recording};

// Literals so the generated header carries plain numbers.
pub const EEGWPD_SEGMENT_FEATURES: usize = 96;
pub const EEGWPD_AGGREGATED_FEATURES: usize = 4032;
const _: () = assert!(EEGWPD_SEGMENT_FEATURES == SEGMENT_FEATURES);
const _: () = assert!(EEGWPD_AGGREGATED_FEATURES == AGGREGATED_FEATURES);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EegwpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    CorruptModel = 4,
    UnsupportedVersion = 5,
    ShapeMismatch = 6,
    SignalError = 7,
    FeatureError = 8,
    UndefinedMetric = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EegwpdExtension {
    Periodic = 0,
    Symmetric = 1,
}

impl From<EegwpdExtension> for Extension {
    fn from(e: EegwpdExtension) -> Self {
        match e {
            EegwpdExtension::Periodic => Extension::Periodic,
            EegwpdExtension::Symmetric => Extension::Symmetric,
        }
    }
}

/// Percentages in `[0, 100]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EegwpdMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Opaque trained model.
pub struct EegwpdModel {
    inner: GbdtModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: EegwpdStatus, msg: impl Into<String>) -> EegwpdStatus {
    set_error(msg);
    status
}

fn from_pipeline(e: eegwpd::Error) -> EegwpdStatus {
    let status = match &e {
        eegwpd::Error::Gbdt(g) => match g {
            GbdtError::CorruptModelFile(_) => EegwpdStatus::CorruptModel,
            GbdtError::UnsupportedVersion { .. } => EegwpdStatus::UnsupportedVersion,
            GbdtError::ShapeMismatch { .. } => EegwpdStatus::ShapeMismatch,
            GbdtError::Io { .. } => EegwpdStatus::Io,
            _ => EegwpdStatus::InvalidArgument,
        },
        eegwpd::Error::Signal(_) => EegwpdStatus::SignalError,
        eegwpd::Error::Eval(_) => EegwpdStatus::UndefinedMetric,
        _ => EegwpdStatus::FeatureError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> EegwpdStatus) -> EegwpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(EegwpdStatus::Ok) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EegwpdStatus::Ok
        }
        Ok(s) => s,
        Err(_) => fail(EegwpdStatus::Panic, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn eegwpd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a `WPDM` model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_model_load(
    path: *const c_char,
    out: *mut *mut EegwpdModel,
) -> EegwpdStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(EegwpdStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(EegwpdStatus::InvalidArgument, "path is not UTF-8");
        };
        match gbdt::load_model(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(EegwpdModel { inner }));
                EegwpdStatus::Ok
            }
            Err(e) => from_pipeline(e.into()),
        }
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from [`eegwpd_model_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_model_free(model: *mut EegwpdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features a row must have, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_model_feature_count(model: *const EegwpdModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.feature_count)
}

/// Probability of the abnormal class for one feature row.
///
/// # Safety
/// `row` must point to `len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_model_predict_proba(
    model: *const EegwpdModel,
    row: *const f64,
    len: usize,
    out: *mut f64,
) -> EegwpdStatus {
    eegwpd_model_predict_batch(model, row, 1, len, out)
}

/// Probabilities for `rows` row-major feature rows of `cols` values.
///
/// # Safety
/// `data` must point to `rows * cols` doubles and `out` to `rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_model_predict_batch(
    model: *const EegwpdModel,
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> EegwpdStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(EegwpdStatus::NullPointer, "null model");
        };
        if data.is_null() || out.is_null() {
            return fail(EegwpdStatus::NullPointer, "null buffer");
        }
        if cols != model.inner.feature_count {
            return from_pipeline(
                GbdtError::ShapeMismatch {
                    expected: model.inner.feature_count,
                    found: cols,
                }
                .into(),
            );
        }
        let Some(n) = rows.checked_mul(cols) else {
            return fail(EegwpdStatus::InvalidArgument, "rows * cols overflows");
        };
        let data = std::slice::from_raw_parts(data, n);
        let out = std::slice::from_raw_parts_mut(out, rows);
        for (slot, row) in out.iter_mut().zip(data.chunks_exact(cols.max(1))) {
            match model.inner.predict_proba(row) {
                Ok(p) => *slot = p,
                Err(e) => return from_pipeline(e.into()),
            }
        }
        EegwpdStatus::Ok
    })
}

/// The 96 features of one segment (16 sub-bands × MAV, AVP, SD, RMAV,
/// SKEW, KURT), standardized across the vector when `normalize` is nonzero.
///
/// # Safety
/// `segment` must point to `len` doubles and `out` to 96 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_segment_features(
    segment: *const f64,
    len: usize,
    extension: EegwpdExtension,
    normalize: i32,
    out: *mut f64,
) -> EegwpdStatus {
    guard(|| {
        if segment.is_null() || out.is_null() {
            return fail(EegwpdStatus::NullPointer, "null buffer");
        }
        let x = std::slice::from_raw_parts(segment, len);
        let fb = wavelet::db4_filter_bank();
        let result = wavelet::decompose_paths(x, DEPTH, &fb, extension.into())
            .map_err(features::FeatureError::from)
            .and_then(|sel| features::segment_features(&sel))
            .and_then(|v| {
                if normalize != 0 {
                    features::normalize_vector(&v.values)
                } else {
                    Ok(v.values)
                }
            });
        match result {
            Ok(v) => {
                std::slice::from_raw_parts_mut(out, SEGMENT_FEATURES).copy_from_slice(&v);
                EegwpdStatus::Ok
            }
            Err(e) => from_pipeline(e.into()),
        }
    })
}

/// The 4032-value aggregated vector of a recording given as `n_channels`
/// rows of `n_samples` values with their electrode labels.
///
/// # Safety
/// `data` must point to `n_channels * n_samples` doubles, `labels` to
/// `n_channels` NUL-terminated strings and `out` to 4032 doubles.
#[no_mangle]
pub unsafe extern "C" fn eegwpd_recording_features(
    data: *const f64,
    labels: *const *const c_char,
    n_channels: usize,
    n_samples: usize,
    sample_rate: f64,
    extension: EegwpdExtension,
    out: *mut f64,
) -> EegwpdStatus {
    guard(|| {
        if data.is_null() || labels.is_null() || out.is_null() {
            return fail(EegwpdStatus::NullPointer, "null buffer");
        }
        let Some(n) = n_channels.checked_mul(n_samples) else {
            return fail(EegwpdStatus::InvalidArgument, "size overflows");
        };
        let samples = std::slice::from_raw_parts(data, n);
        let labels = std::slice::from_raw_parts(labels, n_channels);
        let mut channels = Vec::with_capacity(n_channels);
        for (c, &l) in labels.iter().enumerate() {
            if l.is_null() {
                return fail(EegwpdStatus::NullPointer, format!("label {c} is null"));
            }
            let Ok(name) = CStr::from_ptr(l).to_str() else {
                return fail(EegwpdStatus::InvalidArgument, format!("label {c} is not UTF-8"));
            };
            channels.push((name.to_string(), samples[c * n_samples..(c + 1) * n_samples].to_vec()));
        }
        let opts = FeatureOptions {
            extension: extension.into(),
            normalization: NormalizationScope::Segment,
        };
        let result = Recording::new("ffi", sample_rate, channels)
            .map_err(eegwpd::Error::from)
            .and_then(|rec| features::extract_recording(&rec, &opts).map_err(Into::into));
        match result {
            Ok(v) => {
                std::slice::from_raw_parts_mut(out, AGGREGATED_FEATURES).copy_from_slice(&v.values);
                EegwpdStatus::Ok
            }
            Err(e) => from_pipeline(e),
        }
    })
}

/// Accuracy, sensitivity and specificity from confusion counts.
///
/// # Safety
/// `out` must point to a writable [`EegwpdMetrics`].
#[no_mangle]
pub unsafe extern "C" fn eegwpd_metrics(
    tp: u64,
    fn_: u64,
    tn: u64,
    fp: u64,
    out: *mut EegwpdMetrics,
) -> EegwpdStatus {
    guard(|| {
        if out.is_null() {
            return fail(EegwpdStatus::NullPointer, "null output");
        }
        let cm = eval::ConfusionMatrix { tp, tn, fp, fn_ };
        match eval::metrics(&cm) {
            Ok(m) => {
                *out = EegwpdMetrics {
                    accuracy: m.accuracy,
                    sensitivity: m.sensitivity,
                    specificity: m.specificity,
                };
                EegwpdStatus::Ok
            }
            Err(e) => from_pipeline(e.into()),
        }
    })
}
