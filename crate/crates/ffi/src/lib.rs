//! C ABI over `rabi-core`.
//!
//! Configs and run outputs are opaque handles created and destroyed through
//! this API. Every entry point returns a [`RabiStatus`]; on failure the
//! message is available from [`rabi_last_error_message`] on the same thread.
//! Strings handed out by the library are freed with [`rabi_string_free`].
//! Panics never cross the boundary; they surface as `RABI_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rabi_core::cli::{self, Config, RunOutput, Table};
use rabi_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RabiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Config text, preset name or model parameters rejected.
    InvalidConfig = 3,
    /// Table/column index, summary key or buffer length out of range.
    OutOfRange = 4,
    /// Integration or linear-algebra failure.
    Numerical = 5,
    /// A validity or leakage monitor escalated to an error.
    Validity = 6,
    Io = 7,
    Panic = 8,
}

/// A parsed, validated run configuration.
pub struct RabiConfig {
    inner: Config,
}

/// Tables and summary values of one run.
pub struct RabiOutput {
    inner: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RabiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => RabiStatus::Io,
            Error::ValidityBreach(_) | Error::Leakage { .. } => RabiStatus::Validity,
            Error::NotHermitian(_)
            | Error::NotPeriodic { .. }
            | Error::NormDrift { .. }
            | Error::BadTimeGrid(_)
            | Error::NoConvergence { .. }
            | Error::MemoryGuard(_)
            | Error::DimensionMismatch { .. } => RabiStatus::Numerical,
            _ => RabiStatus::InvalidConfig,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: Option<String>) {
    let message = message.map(|m| CString::new(m.replace('\0', " ")).unwrap_or_default());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RabiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            RabiStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(Some(message));
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(Some(format!("internal panic: {message}")));
            RabiStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(RabiStatus::NullPointer, "null pointer argument".into())
}

fn out_of_range(what: String) -> Failure {
    Failure(RabiStatus::OutOfRange, what)
}

unsafe fn utf8<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(RabiStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn reference<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn store<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn store_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn store_string(out: *mut *mut c_char, s: &str) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(RabiStatus::InvalidUtf8, "string contains NUL".into()))?;
    store(out, c.into_raw())
}

fn table(output: &RabiOutput, index: usize) -> Result<&Table, Failure> {
    output
        .inner
        .tables
        .get(index)
        .ok_or_else(|| out_of_range(format!("table {index} of {}", output.inner.tables.len())))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rabi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn rabi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn rabi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses config text (`key = value` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_config_parse(text: *const c_char, out: *mut *mut RabiConfig) -> RabiStatus {
    guard(|| {
        let cfg = Config::parse(utf8(text)?)?;
        store_handle(out, RabiConfig { inner: cfg })
    })
}

/// A named preset; `physical_omega` selects the physical qubit splitting.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_config_from_preset(
    name: *const c_char,
    physical_omega: bool,
    out: *mut *mut RabiConfig,
) -> RabiStatus {
    guard(|| {
        let cfg = cli::preset(utf8(name)?, physical_omega)?;
        store_handle(out, RabiConfig { inner: cfg })
    })
}

/// Canonical text of a config; free with `rabi_string_free`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_config_to_text(config: *const RabiConfig, out: *mut *mut c_char) -> RabiStatus {
    guard(|| store_string(out, &reference(config)?.inner.to_text()))
}

/// # Safety
/// `config` must come from this library or be NULL, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn rabi_config_free(config: *mut RabiConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the task named in the config. A breached validity monitor is not a
/// failure; query it with `rabi_output_flagged`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_run(config: *const RabiConfig, out: *mut *mut RabiOutput) -> RabiStatus {
    guard(|| {
        let output = cli::execute(&reference(config)?.inner)?;
        store_handle(out, RabiOutput { inner: output })
    })
}

/// # Safety
/// `output` must come from this library or be NULL, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_free(output: *mut RabiOutput) {
    if !output.is_null() {
        drop(Box::from_raw(output));
    }
}

/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_flagged(output: *const RabiOutput, out: *mut bool) -> RabiStatus {
    guard(|| store(out, reference(output)?.inner.flagged))
}

/// Looks up a scalar from the run summary (e.g. `max_infidelity`).
///
/// # Safety
/// `output` must be a live handle, `key` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_summary(
    output: *const RabiOutput,
    key: *const c_char,
    out: *mut f64,
) -> RabiStatus {
    guard(|| {
        let key = utf8(key)?;
        let value = reference(output)?
            .inner
            .summary_value(key)
            .ok_or_else(|| out_of_range(format!("no summary value `{key}`")))?;
        store(out, value)
    })
}

/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_table_count(output: *const RabiOutput, out: *mut usize) -> RabiStatus {
    guard(|| store(out, reference(output)?.inner.tables.len()))
}

/// File name of a table (e.g. `equivalence.csv`); free with `rabi_string_free`.
///
/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_table_name(
    output: *const RabiOutput,
    table_index: usize,
    out: *mut *mut c_char,
) -> RabiStatus {
    guard(|| store_string(out, &table(reference(output)?, table_index)?.file))
}

/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_table_rows(
    output: *const RabiOutput,
    table_index: usize,
    out: *mut usize,
) -> RabiStatus {
    guard(|| store(out, table(reference(output)?, table_index)?.rows()))
}

/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_column_count(
    output: *const RabiOutput,
    table_index: usize,
    out: *mut usize,
) -> RabiStatus {
    guard(|| store(out, table(reference(output)?, table_index)?.columns.len()))
}

/// # Safety
/// `output` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_column_name(
    output: *const RabiOutput,
    table_index: usize,
    column_index: usize,
    out: *mut *mut c_char,
) -> RabiStatus {
    guard(|| {
        let t = table(reference(output)?, table_index)?;
        let column = t.columns.get(column_index).ok_or_else(|| out_of_range(format!("column {column_index}")))?;
        store_string(out, &column.name)
    })
}

/// Copies a column into `buffer`, which must hold at least the table's row
/// count. Flag columns come out as 0.0/1.0.
///
/// # Safety
/// `output` must be a live handle and `buffer` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_copy_column(
    output: *const RabiOutput,
    table_index: usize,
    column_index: usize,
    buffer: *mut f64,
    len: usize,
) -> RabiStatus {
    guard(|| {
        let t = table(reference(output)?, table_index)?;
        let column = t.columns.get(column_index).ok_or_else(|| out_of_range(format!("column {column_index}")))?;
        if buffer.is_null() {
            return Err(null());
        }
        if len < column.values.len() {
            return Err(out_of_range(format!("buffer holds {len} values, column has {}", column.values.len())));
        }
        ptr::copy_nonoverlapping(column.values.as_ptr(), buffer, column.values.len());
        Ok(())
    })
}

/// Writes every table as CSV (with config metadata) into `dir`.
///
/// # Safety
/// `output` must be a live handle; `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rabi_output_write(output: *const RabiOutput, dir: *const c_char) -> RabiStatus {
    guard(|| {
        reference(output)?.inner.write(Path::new(utf8(dir)?))?;
        Ok(())
    })
}
