//! C interface for the serpbias audit library.
//!
//! Conventions:
//! - Every function that can fail returns a [`SerpbiasStatus`]; `OK` is 0.
//! - Output parameters are written only on `OK`.
//! - Handles (`SerpbiasDataset`, `SerpbiasLabels`, `SerpbiasReport`) are
//!   opaque; free them with their `_free` function. `_free(NULL)` is a
//!   no-op.
//! - Strings returned as `char*` are owned by the caller; release them
//!   with `serpbias_string_free`.
//! - After a non-OK status, `serpbias_last_error_message` returns a
//!   description of the failure for the current thread.
//! - Panics never unwind across the boundary; they surface as
//!   `SERPBIAS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use serpbias::annotations::LabelStore;
use serpbias::audit::{default_plan, run_audit, AuditReport};
use serpbias::config::PValueStyle;
use serpbias::corpus::{load_dataset, Dataset, Location};
use serpbias::metrics::MetricConfig;
use serpbias::report::{render_all, render_summary, EngineNames};
use serpbias::Error;

/// Result of a serpbias call. `OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerpbiasStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A file could not be read or written.
    Io = 3,
    /// An input file exists but its contents are malformed.
    Malformed = 4,
    /// Arguments or data violate an invariant.
    Invalid = 5,
    /// A statistic is undefined for the given sample.
    Degenerate = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// Loaded, validated dataset handle.
pub struct SerpbiasDataset(Dataset);
/// Aggregated stance labels handle.
pub struct SerpbiasLabels(LabelStore);
/// Completed audit handle.
pub struct SerpbiasReport(AuditReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SerpbiasStatus {
    match e {
        Error::Io { .. } => SerpbiasStatus::Io,
        Error::Malformed { .. } => SerpbiasStatus::Malformed,
        Error::Invalid(_) => SerpbiasStatus::Invalid,
        Error::Degenerate(_) => SerpbiasStatus::Degenerate,
    }
}

fn fail(e: Error) -> SerpbiasStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

/// Runs `body` with panics converted to `Panic` status.
fn guarded(body: impl FnOnce() -> SerpbiasStatus) -> SerpbiasStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {message}"));
            SerpbiasStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, SerpbiasStatus> {
    if ptr.is_null() {
        set_error("null string argument".to_string());
        return Err(SerpbiasStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".to_string());
        SerpbiasStatus::InvalidUtf8
    })
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), SerpbiasStatus> {
    if out.is_null() {
        set_error("null output pointer".to_string());
        return Err(SerpbiasStatus::NullArgument);
    }
    Ok(())
}

macro_rules! try_c {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Returns the error message of the most recent failing call on this
/// thread, or NULL if none. Free with `serpbias_string_free`.
#[no_mangle]
pub extern "C" fn serpbias_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn serpbias_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a dataset from a TOML manifest path.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn serpbias_dataset_load(
    manifest_path: *const c_char,
    out: *mut *mut SerpbiasDataset,
) -> SerpbiasStatus {
    guarded(|| {
        try_c!(out_ptr(out));
        let path = try_c!(utf8_arg(manifest_path));
        match load_dataset(Path::new(path)) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(SerpbiasDataset(d)));
                SerpbiasStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Returns a short human-readable description of a dataset, e.g.
/// "8 SERPs, 2 topics". Free with `serpbias_string_free`.
///
/// # Safety
/// `dataset` must be a live handle from `serpbias_dataset_load`.
#[no_mangle]
pub unsafe extern "C" fn serpbias_dataset_summary(dataset: *const SerpbiasDataset) -> *mut c_char {
    if dataset.is_null() {
        return std::ptr::null_mut();
    }
    match CString::new((*dataset).0.summary()) {
        Ok(c) => c.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Frees a dataset handle. NULL is a no-op.
///
/// # Safety
/// `dataset` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn serpbias_dataset_free(dataset: *mut SerpbiasDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Creates an empty label store.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn serpbias_labels_new(out: *mut *mut SerpbiasLabels) -> SerpbiasStatus {
    guarded(|| {
        try_c!(out_ptr(out));
        *out = Box::into_raw(Box::new(SerpbiasLabels(LabelStore::new())));
        SerpbiasStatus::Ok
    })
}

/// Loads a judgments CSV ("doc_id,worker_id,stance") into the store
/// under the given location ("UK" or "US"). May be called repeatedly.
///
/// # Safety
/// `labels` must be a live handle; `location` and `path` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn serpbias_labels_load(
    labels: *mut SerpbiasLabels,
    location: *const c_char,
    path: *const c_char,
) -> SerpbiasStatus {
    guarded(|| {
        if labels.is_null() {
            set_error("null labels handle".to_string());
            return SerpbiasStatus::NullArgument;
        }
        let location_str = try_c!(utf8_arg(location));
        let path_str = try_c!(utf8_arg(path));
        let location: Location = match location_str.parse() {
            Ok(l) => l,
            Err(message) => return fail(Error::Invalid(message)),
        };
        let judgments = match serpbias::annotations::load_judgments(Path::new(path_str)) {
            Ok(j) => j,
            Err(e) => return fail(e),
        };
        match (*labels).0.add_judgments(location, judgments) {
            Ok(()) => SerpbiasStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Frees a label store handle. NULL is a no-op.
///
/// # Safety
/// `labels` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn serpbias_labels_free(labels: *mut SerpbiasLabels) {
    if !labels.is_null() {
        drop(Box::from_raw(labels));
    }
}

/// Runs the default audit plan: existence tests on mean bias, paired
/// engine and location comparisons, and retrieval-performance tests,
/// with Bonferroni correction over the bias-test family.
///
/// `k` is the rank cutoff (10 in the standard protocol);
/// `rbp_persistence` is the RBP parameter in (0, 1).
///
/// # Safety
/// `dataset` and `labels` must be live handles; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn serpbias_audit_run(
    dataset: *const SerpbiasDataset,
    labels: *const SerpbiasLabels,
    alpha: f64,
    k: usize,
    rbp_persistence: f64,
    out: *mut *mut SerpbiasReport,
) -> SerpbiasStatus {
    guarded(|| {
        try_c!(out_ptr(out));
        if dataset.is_null() || labels.is_null() {
            set_error("null dataset or labels handle".to_string());
            return SerpbiasStatus::NullArgument;
        }
        let cfg = MetricConfig { k, rbp_persistence };
        if let Err(e) = cfg.validate() {
            return fail(e);
        }
        let plan = match default_plan(&(*dataset).0, alpha) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match run_audit(&(*dataset).0, &(*labels).0, &plan, &cfg) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(SerpbiasReport(report)));
                SerpbiasStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Returns the full audit result as a JSON document. Free with
/// `serpbias_string_free`.
///
/// # Safety
/// `report` must be a live handle from `serpbias_audit_run`.
#[no_mangle]
pub unsafe extern "C" fn serpbias_report_summary_json(
    report: *const SerpbiasReport,
) -> *mut c_char {
    if report.is_null() {
        return std::ptr::null_mut();
    }
    match CString::new(render_summary(&(*report).0)) {
        Ok(c) => c.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Writes every rendered output (tables, figure data, summary.json)
/// under `out_dir`, using default engine names and numeric p-values.
///
/// # Safety
/// `report` must be a live handle; `out_dir` must be a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn serpbias_report_write(
    report: *const SerpbiasReport,
    out_dir: *const c_char,
) -> SerpbiasStatus {
    guarded(|| {
        if report.is_null() {
            set_error("null report handle".to_string());
            return SerpbiasStatus::NullArgument;
        }
        let dir = try_c!(utf8_arg(out_dir));
        match render_all(
            &(*report).0,
            Path::new(dir),
            &EngineNames::default(),
            PValueStyle::Raw,
        ) {
            Ok(_) => SerpbiasStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Frees a report handle. NULL is a no-op.
///
/// # Safety
/// `report` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn serpbias_report_free(report: *mut SerpbiasReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Two-tailed p-value of a t statistic with `df` degrees of freedom.
/// Returns NaN if `df` is zero.
#[no_mangle]
pub extern "C" fn serpbias_t_two_tailed_p(t: f64, df: u32) -> f64 {
    if df == 0 {
        return f64::NAN;
    }
    serpbias::stats::t_two_tailed_p(t, df)
}

/// Bonferroni correction: writes `alpha / m` and the uncorrected
/// family-wise error rate `1 - (1 - alpha)^m` to the output pointers.
///
/// # Safety
/// `adjusted_alpha_out` and `fwer_out` must each be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn serpbias_bonferroni(
    alpha: f64,
    m: u32,
    adjusted_alpha_out: *mut f64,
    fwer_out: *mut f64,
) -> SerpbiasStatus {
    guarded(|| match serpbias::stats::bonferroni(alpha, m) {
        Ok(plan) => {
            if !adjusted_alpha_out.is_null() {
                *adjusted_alpha_out = plan.adjusted_alpha;
            }
            if !fwer_out.is_null() {
                *fwer_out = plan.fwer_uncorrected;
            }
            SerpbiasStatus::Ok
        }
        Err(e) => fail(e),
    })
}
