//! C ABI over the `harmgap` estimator.
//!
//! Signals and results are opaque handles created and destroyed through this
//! API. Every fallible call returns an [`HgStatus`]; the message of the most
//! recent failure on the calling thread is available from
//! [`hg_last_error_message`]. Array getters copy into caller buffers and
//! fail with `HG_STATUS_BUFFER_TOO_SMALL` when `capacity` is short.
//!
//! The header `include/harmgap.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use harmgap::{
    gmpa_estimate, Error, EstimationResult, OrderSelection, PencilConfig, Segment, SegmentedSignal,
    SubspaceSource,
};
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PencilBound = 3,
    SegmentTooShort = 4,
    RankDeficient = 5,
    ZeroSignal = 6,
    DegeneratePole = 7,
    Format = 8,
    Io = 9,
    BufferTooSmall = 10,
    OutOfRange = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgSubspace {
    Hankel = 0,
    StackedPair = 1,
}

/// Estimator settings. `order == 0` selects the order automatically with
/// `auto_order_ratio`; `pencil == 0` uses floor(K_min / 2).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HgConfig {
    pub order: usize,
    pub pencil: usize,
    pub auto_order_ratio: f64,
    pub tol_rank: f64,
    pub subspace: HgSubspace,
}

/// Segmented signal under construction.
pub struct HgSignal {
    dt: f64,
    segments: Vec<Segment>,
}

/// Estimation output.
pub struct HgResult {
    inner: EstimationResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> HgStatus {
    match err {
        Error::InvalidArgument(_) => HgStatus::InvalidArgument,
        Error::DegeneratePole => HgStatus::DegeneratePole,
        Error::SegmentTooShort { .. } => HgStatus::SegmentTooShort,
        Error::PencilBound { .. } => HgStatus::PencilBound,
        Error::RankDeficient { .. } => HgStatus::RankDeficient,
        Error::ZeroSignal => HgStatus::ZeroSignal,
        Error::Format(_) | Error::Csv(_) | Error::Json(_) => HgStatus::Format,
        Error::Io(_) => HgStatus::Io,
    }
}

fn fail(status: HgStatus, msg: impl Into<String>) -> HgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HgStatus) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HgStatus::Panic, "internal panic"),
    }
}

fn from_core(err: Error) -> HgStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Copies `src` into `(out, capacity)`.
unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> HgStatus {
    if out.is_null() {
        return fail(HgStatus::NullPointer, "output buffer is NULL");
    }
    if capacity < src.len() {
        return fail(
            HgStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {capacity}", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    HgStatus::Ok
}

unsafe fn copy_complex_out(
    src: &[Complex64],
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> HgStatus {
    let r: Vec<f64> = src.iter().map(|z| z.re).collect();
    let i: Vec<f64> = src.iter().map(|z| z.im).collect();
    match copy_out(&r, re, capacity) {
        HgStatus::Ok => copy_out(&i, im, capacity),
        s => s,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread. Valid until the next failing
/// call on the same thread; never NULL.
#[no_mangle]
pub extern "C" fn hg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn hg_config_default() -> HgConfig {
    HgConfig {
        order: 0,
        pencil: 0,
        auto_order_ratio: harmgap::pencil::DEFAULT_ORDER_RATIO,
        tol_rank: harmgap::pencil::DEFAULT_TOL_RANK,
        subspace: HgSubspace::Hankel,
    }
}

/// Creates an empty signal with sampling interval `dt` seconds.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hg_signal_new(dt: f64, out: *mut *mut HgSignal) -> HgStatus {
    guard(|| {
        if out.is_null() {
            return fail(HgStatus::NullPointer, "out is NULL");
        }
        if !(dt.is_finite() && dt > 0.0) {
            return fail(
                HgStatus::InvalidArgument,
                format!("dt must be positive, got {dt}"),
            );
        }
        *out = Box::into_raw(Box::new(HgSignal {
            dt,
            segments: Vec::new(),
        }));
        HgStatus::Ok
    })
}

/// Appends a segment of `len` samples starting at `start_time` seconds.
/// `im` may be NULL for real-valued data.
///
/// # Safety
/// `signal` must come from [`hg_signal_new`] or [`hg_signal_load_csv`];
/// `re` (and `im` when not NULL) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_signal_add_segment(
    signal: *mut HgSignal,
    start_time: f64,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> HgStatus {
    guard(|| {
        let Some(sig) = signal.as_mut() else {
            return fail(HgStatus::NullPointer, "signal is NULL");
        };
        if re.is_null() {
            return fail(HgStatus::NullPointer, "re is NULL");
        }
        if len == 0 {
            return fail(
                HgStatus::InvalidArgument,
                "segment length must be at least 1",
            );
        }
        let re = std::slice::from_raw_parts(re, len);
        let samples: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect()
        };
        match Segment::new(start_time, samples) {
            Ok(seg) => {
                sig.segments.push(seg);
                HgStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Loads a signal CSV (`segment_index,sample_index,time_s,re,im`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_signal_load_csv(
    path: *const c_char,
    out: *mut *mut HgSignal,
) -> HgStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(HgStatus::NullPointer, "path or out is NULL");
        }
        let Ok(p) = CStr::from_ptr(path).to_str() else {
            return fail(HgStatus::InvalidArgument, "path is not UTF-8");
        };
        match harmgap::io::load_segments(Path::new(p)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(HgSignal {
                    dt: s.dt(),
                    segments: s.segments().to_vec(),
                }));
                HgStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `signal` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hg_signal_num_segments(signal: *const HgSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.segments.len())
}

/// # Safety
/// `signal` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hg_signal_free(signal: *mut HgSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

fn core_config(cfg: &HgConfig) -> PencilConfig {
    PencilConfig {
        pencil: (cfg.pencil != 0).then_some(cfg.pencil),
        order: if cfg.order == 0 {
            OrderSelection::Auto {
                ratio: cfg.auto_order_ratio,
            }
        } else {
            OrderSelection::Fixed(cfg.order)
        },
        tol_rank: cfg.tol_rank,
        subspace: match cfg.subspace {
            HgSubspace::Hankel => SubspaceSource::Hankel,
            HgSubspace::StackedPair => SubspaceSource::StackedPair,
        },
    }
}

/// Joint estimation over all segments of `signal`. `config` may be NULL for
/// [`hg_config_default`].
///
/// # Safety
/// `signal` must be a live handle, `config` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_estimate(
    signal: *const HgSignal,
    config: *const HgConfig,
    out: *mut *mut HgResult,
) -> HgStatus {
    guard(|| {
        let Some(sig) = signal.as_ref() else {
            return fail(HgStatus::NullPointer, "signal is NULL");
        };
        if out.is_null() {
            return fail(HgStatus::NullPointer, "out is NULL");
        }
        let cfg = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| hg_config_default());
        let signal = match SegmentedSignal::new(sig.dt, sig.segments.clone()) {
            Ok(s) => s,
            Err(e) => return from_core(e),
        };
        match gmpa_estimate(&signal, &core_config(&cfg)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(HgResult { inner }));
                HgStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Number of estimated poles, 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hg_result_order(result: *const HgResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.order())
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hg_result_num_segments(result: *const HgResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.amplitudes.len())
}

/// Pencil parameter used, 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hg_result_pencil(result: *const HgResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.diagnostics.pencil)
}

/// # Safety
/// `result` must be a live handle; `re`/`im` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_result_poles(
    result: *const HgResult,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> HgStatus {
    guard(|| match result.as_ref() {
        None => fail(HgStatus::NullPointer, "result is NULL"),
        Some(r) => {
            let poles: Vec<Complex64> = r.inner.poles.iter().map(|p| p.0).collect();
            copy_complex_out(&poles, re, im, capacity)
        }
    })
}

/// Frequencies in Hz.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_result_frequencies(
    result: *const HgResult,
    out: *mut f64,
    capacity: usize,
) -> HgStatus {
    guard(|| match result.as_ref() {
        None => fail(HgStatus::NullPointer, "result is NULL"),
        Some(r) => copy_out(&r.inner.frequencies, out, capacity),
    })
}

/// Damping factors in 1/s.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_result_dampings(
    result: *const HgResult,
    out: *mut f64,
    capacity: usize,
) -> HgStatus {
    guard(|| match result.as_ref() {
        None => fail(HgStatus::NullPointer, "result is NULL"),
        Some(r) => copy_out(&r.inner.dampings, out, capacity),
    })
}

/// Relative least-squares residual per segment.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_result_residuals(
    result: *const HgResult,
    out: *mut f64,
    capacity: usize,
) -> HgStatus {
    guard(|| match result.as_ref() {
        None => fail(HgStatus::NullPointer, "result is NULL"),
        Some(r) => copy_out(&r.inner.residuals, out, capacity),
    })
}

/// Complex amplitudes of `segment`, one per pole, referred to the
/// segment's first sample.
///
/// # Safety
/// `result` must be a live handle; `re`/`im` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hg_result_amplitudes(
    result: *const HgResult,
    segment: usize,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> HgStatus {
    guard(|| match result.as_ref() {
        None => fail(HgStatus::NullPointer, "result is NULL"),
        Some(r) => match r.inner.amplitudes.get(segment) {
            None => fail(
                HgStatus::OutOfRange,
                format!("segment {segment} of {}", r.inner.amplitudes.len()),
            ),
            Some(row) => copy_complex_out(row, re, im, capacity),
        },
    })
}

/// # Safety
/// `result` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hg_result_free(result: *mut HgResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
