//! C ABI for the streamad library: opaque detector handles, integer error
//! codes and a thread-local last-error message. The matching declarations
//! live in `include/streamad.h`, which is maintained by hand and checked
//! against this file by a test.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use streamad::{DataStream, DetectorKind, EnsembleConfig, EnsembleDetector, NumericMode, Sample};

/// Success.
pub const STREAMAD_OK: c_int = 0;
/// A required pointer argument was null.
pub const STREAMAD_ERR_NULL: c_int = -1;
/// An argument was out of range or inconsistent.
pub const STREAMAD_ERR_INVALID: c_int = -2;
/// The operation itself failed; see streamad_last_error().
pub const STREAMAD_ERR_RUNTIME: c_int = -3;
/// A panic was caught at the boundary.
pub const STREAMAD_ERR_PANIC: c_int = -4;

pub const STREAMAD_KIND_LODA: c_int = 0;
pub const STREAMAD_KIND_RSHASH: c_int = 1;
pub const STREAMAD_KIND_XSTREAM: c_int = 2;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior NUL");
    });
}

fn runtime_error(e: impl std::fmt::Display) -> c_int {
    set_last_error(&e.to_string());
    STREAMAD_ERR_RUNTIME
}

fn guard(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_last_error("panic crossed the FFI boundary");
            STREAMAD_ERR_PANIC
        }
    }
}

/// Opaque detector handle.
pub struct StreamadDetector {
    inner: EnsembleDetector,
}

fn kind_from_int(kind: c_int) -> Option<DetectorKind> {
    match kind {
        STREAMAD_KIND_LODA => Some(DetectorKind::Loda),
        STREAMAD_KIND_RSHASH => Some(DetectorKind::RsHash),
        STREAMAD_KIND_XSTREAM => Some(DetectorKind::XStream),
        _ => None,
    }
}

/// Create a detector. `r = 0` selects the kind's default ensemble size;
/// `fixed_point != 0` selects Q16.16 arithmetic. Returns null on error (see
/// streamad_last_error()).
#[no_mangle]
pub extern "C" fn streamad_detector_new(
    kind: c_int,
    dimension: usize,
    r: usize,
    seed: u64,
    fixed_point: c_int,
) -> *mut StreamadDetector {
    let Some(kind) = kind_from_int(kind) else {
        set_last_error("unknown detector kind");
        return ptr::null_mut();
    };
    let mut cfg = EnsembleConfig::new(kind, dimension);
    if r > 0 {
        cfg.r = r;
    }
    cfg.seed = seed;
    if fixed_point != 0 {
        cfg.mode = NumericMode::Fixed;
    }
    match EnsembleDetector::new(cfg) {
        Ok(inner) => Box::into_raw(Box::new(StreamadDetector { inner })),
        Err(e) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Destroy a detector handle. Passing null is a no-op.
#[no_mangle]
pub extern "C" fn streamad_detector_free(det: *mut StreamadDetector) {
    if !det.is_null() {
        // SAFETY: the pointer came from streamad_detector_new and is
        // released exactly once by contract.
        drop(unsafe { Box::from_raw(det) });
    }
}

unsafe fn samples_from_raw(
    data: *const f64,
    n_samples: usize,
    dimension: usize,
) -> Vec<Sample> {
    let flat = std::slice::from_raw_parts(data, n_samples * dimension);
    flat.chunks_exact(dimension)
        .map(|row| Sample::unlabeled(row.to_vec()))
        .collect()
}

/// Calibrate on `n_samples` rows of `dimension` doubles each (row-major).
///
/// # Safety
/// `data` must point to `n_samples * dimension` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn streamad_detector_calibrate(
    det: *mut StreamadDetector,
    data: *const f64,
    n_samples: usize,
) -> c_int {
    if det.is_null() || data.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| {
        let det = &mut (*det).inner;
        let samples = samples_from_raw(data, n_samples, det.config().dimension);
        match det.calibrate(&samples) {
            Ok(()) => STREAMAD_OK,
            Err(e) => runtime_error(e),
        }
    })
}

/// Score one sample of `len` doubles; writes the score to `score_out`.
///
/// # Safety
/// `features` must point to `len` readable doubles and `score_out` to one
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn streamad_detector_process(
    det: *mut StreamadDetector,
    features: *const f64,
    len: usize,
    score_out: *mut f64,
) -> c_int {
    if det.is_null() || features.is_null() || score_out.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| {
        let slice = std::slice::from_raw_parts(features, len);
        match (*det).inner.process(slice) {
            Ok(score) => {
                *score_out = score;
                STREAMAD_OK
            }
            Err(e) => runtime_error(e),
        }
    })
}

/// Score `n_samples` row-major samples into `scores_out`.
///
/// # Safety
/// `data` must hold `n_samples * dimension` readable doubles and
/// `scores_out` `n_samples` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn streamad_detector_process_stream(
    det: *mut StreamadDetector,
    data: *const f64,
    n_samples: usize,
    scores_out: *mut f64,
) -> c_int {
    if det.is_null() || data.is_null() || scores_out.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| {
        let det = &mut (*det).inner;
        let samples = samples_from_raw(data, n_samples, det.config().dimension);
        match det.process_stream(&samples) {
            Ok(scores) => {
                std::ptr::copy_nonoverlapping(scores.as_ptr(), scores_out, n_samples);
                STREAMAD_OK
            }
            Err(e) => runtime_error(e),
        }
    })
}

/// Clear window state and op counters; calibration is kept.
#[no_mangle]
pub extern "C" fn streamad_detector_reset(det: *mut StreamadDetector) -> c_int {
    if det.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| {
        // SAFETY: non-null handle from streamad_detector_new.
        unsafe { (*det).inner.reset() };
        STREAMAD_OK
    })
}

/// Operations executed so far under the documented counting policy.
///
/// # Safety
/// `ops_out` must point to one writable u64.
#[no_mangle]
pub unsafe extern "C" fn streamad_detector_ops(
    det: *const StreamadDetector,
    ops_out: *mut u64,
) -> c_int {
    if det.is_null() || ops_out.is_null() {
        return STREAMAD_ERR_NULL;
    }
    *ops_out = (*det).inner.ops_executed();
    STREAMAD_OK
}

/// Rank-based ROC-AUC of `scores` against binary `labels` (1 = anomaly).
///
/// # Safety
/// `scores` and `labels` must each point to `n` readable elements;
/// `auc_out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn streamad_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    auc_out: *mut f64,
) -> c_int {
    if scores.is_null() || labels.is_null() || auc_out.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| {
        let scores = std::slice::from_raw_parts(scores, n);
        let labels = std::slice::from_raw_parts(labels, n);
        match streamad::auc_roc(scores, labels) {
            Ok(auc) => {
                *auc_out = auc;
                STREAMAD_OK
            }
            Err(e) => runtime_error(e),
        }
    })
}

/// Generate a deterministic synthetic labeled stream: row-major features
/// into `features_out` (n * d doubles) and labels into `labels_out`.
///
/// # Safety
/// `features_out` must hold `n * d` writable doubles and `labels_out` `n`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn streamad_gen_synthetic(
    n: usize,
    d: usize,
    contamination: f64,
    seed: u64,
    features_out: *mut f64,
    labels_out: *mut u8,
) -> c_int {
    if features_out.is_null() || labels_out.is_null() {
        return STREAMAD_ERR_NULL;
    }
    guard(|| match streamad::gen_synthetic(n, d, contamination, seed) {
        Ok(stream) => {
            write_stream(&stream, features_out, labels_out);
            STREAMAD_OK
        }
        Err(e) => runtime_error(e),
    })
}

unsafe fn write_stream(stream: &DataStream, features_out: *mut f64, labels_out: *mut u8) {
    let d = stream.dimension;
    for (i, s) in stream.samples.iter().enumerate() {
        std::ptr::copy_nonoverlapping(s.features.as_ptr(), features_out.add(i * d), d);
        *labels_out.add(i) = s.label.unwrap_or(0);
    }
}

/// The message of the most recent error on this thread, as a NUL-terminated
/// string. The pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn streamad_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn lifecycle_and_scoring() {
        let n = 400;
        let d = 3;
        let mut features = vec![0.0f64; n * d];
        let mut labels = vec![0u8; n];
        let rc = unsafe {
            streamad_gen_synthetic(n, d, 0.1, 7, features.as_mut_ptr(), labels.as_mut_ptr())
        };
        assert_eq!(rc, STREAMAD_OK);

        let det = streamad_detector_new(STREAMAD_KIND_LODA, d, 10, 3, 0);
        assert!(!det.is_null());
        unsafe {
            assert_eq!(
                streamad_detector_calibrate(det, features.as_ptr(), 128),
                STREAMAD_OK
            );
            let mut scores = vec![0.0f64; n];
            assert_eq!(
                streamad_detector_process_stream(det, features.as_ptr(), n, scores.as_mut_ptr()),
                STREAMAD_OK
            );
            let mut auc = 0.0;
            assert_eq!(
                streamad_auc(scores.as_ptr(), labels.as_ptr(), n, &mut auc),
                STREAMAD_OK
            );
            assert!(auc > 0.85, "auc {auc}");

            let mut ops = 0u64;
            assert_eq!(streamad_detector_ops(det, &mut ops), STREAMAD_OK);
            assert!(ops > 0);
            assert_eq!(streamad_detector_reset(det), STREAMAD_OK);
            assert_eq!(streamad_detector_ops(det, &mut ops), STREAMAD_OK);
            assert_eq!(ops, 0);
        }
        streamad_detector_free(det);
    }

    #[test]
    fn ffi_matches_native() {
        let d = 2;
        let stream = streamad::gen_synthetic(200, d, 0.1, 11).unwrap();
        let flat: Vec<f64> = stream
            .samples
            .iter()
            .flat_map(|s| s.features.clone())
            .collect();

        let mut cfg = EnsembleConfig::new(DetectorKind::RsHash, d);
        cfg.r = 5;
        cfg.seed = 9;
        let mut native = EnsembleDetector::new(cfg).unwrap();
        native.calibrate(&stream.samples[..128]).unwrap();
        let expected = native.process_stream(&stream.samples).unwrap();

        let det = streamad_detector_new(STREAMAD_KIND_RSHASH, d, 5, 9, 0);
        let mut got = vec![0.0f64; 200];
        unsafe {
            assert_eq!(
                streamad_detector_calibrate(det, flat.as_ptr(), 128),
                STREAMAD_OK
            );
            assert_eq!(
                streamad_detector_process_stream(det, flat.as_ptr(), 200, got.as_mut_ptr()),
                STREAMAD_OK
            );
        }
        streamad_detector_free(det);
        assert_eq!(got, expected);
    }

    #[test]
    fn error_paths() {
        assert!(streamad_detector_new(99, 2, 5, 0, 0).is_null());
        let msg = unsafe { CStr::from_ptr(streamad_last_error()) };
        assert!(!msg.to_bytes().is_empty());

        assert!(streamad_detector_new(STREAMAD_KIND_LODA, 0, 5, 0, 0).is_null());

        let det = streamad_detector_new(STREAMAD_KIND_LODA, 2, 3, 0, 0);
        unsafe {
            // Uncalibrated process fails with a runtime code.
            let mut score = 0.0;
            let features = [0.0f64, 1.0];
            assert_eq!(
                streamad_detector_process(det, features.as_ptr(), 2, &mut score),
                STREAMAD_ERR_RUNTIME
            );
            assert_eq!(
                streamad_detector_process(det, std::ptr::null(), 2, &mut score),
                STREAMAD_ERR_NULL
            );
            // AUC with one class is a runtime error.
            let scores = [0.5f64, 0.7];
            let labels = [1u8, 1];
            let mut auc = 0.0;
            assert_eq!(
                streamad_auc(scores.as_ptr(), labels.as_ptr(), 2, &mut auc),
                STREAMAD_ERR_RUNTIME
            );
        }
        streamad_detector_free(det);
        streamad_detector_free(std::ptr::null_mut());
    }

    #[test]
    fn header_declares_every_export() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/streamad.h"
        ))
        .expect("header present");
        for symbol in [
            "streamad_detector_new",
            "streamad_detector_free",
            "streamad_detector_calibrate",
            "streamad_detector_process",
            "streamad_detector_process_stream",
            "streamad_detector_reset",
            "streamad_detector_ops",
            "streamad_auc",
            "streamad_gen_synthetic",
            "streamad_last_error",
        ] {
            assert!(header.contains(symbol), "header is missing {symbol}");
        }
    }
}
