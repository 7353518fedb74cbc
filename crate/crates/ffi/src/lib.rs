//! C interface to the flowmap workbench.
//!
//! A [`FlowmapSession`] is an opaque, in-memory session: it is built from a
//! JSON request naming the corpus and model files, and never touches a
//! session store. Every function returns a [`FlowmapStatus`]; on failure the
//! message is available from [`flowmap_last_error`] on the same thread.
//! Strings handed out by the library must be released with
//! [`flowmap_string_free`].

use flowmap::mapping::{load_ground_truth, Decision};
use flowmap::workbench::{CheckKind, CreateSession, ServiceError, Session};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowmapStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidUtf8 = -2,
    /// A model, corpus, list or JSON input failed to parse.
    Parse = -3,
    /// The input parsed but was rejected (illegal pair, bad decision, ...).
    Validation = -4,
    NotFound = -5,
    Io = -6,
    /// The operation needs state the session does not have yet.
    Precondition = -7,
    Internal = -255,
}

/// Opaque session handle.
pub struct FlowmapSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FlowmapStatus, String);

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::NotFound(_) => FlowmapStatus::NotFound,
            ServiceError::BadRequest { .. } => FlowmapStatus::Validation,
            ServiceError::Parse(_) => FlowmapStatus::Parse,
            ServiceError::Precondition(_) => FlowmapStatus::Precondition,
            ServiceError::Io { .. } | ServiceError::Corrupt { .. } => FlowmapStatus::Io,
        };
        let message = match &e {
            ServiceError::Parse(files) => {
                let mut m = e.to_string();
                for f in files {
                    m.push_str(&format!("\n  {}: {}", f.file, f.message));
                }
                m
            }
            _ => e.to_string(),
        };
        Failure(status, message)
    }
}

fn fail(status: FlowmapStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure, and never lets a panic cross the boundary.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlowmapStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlowmapStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            FlowmapStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(FlowmapStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(FlowmapStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn session<'a>(h: *mut FlowmapSession) -> Result<&'a mut Session, Failure> {
    h.as_mut()
        .map(|s| &mut s.inner)
        .ok_or_else(|| fail(FlowmapStatus::NullPointer, "session is null"))
}

unsafe fn write_out<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(FlowmapStatus::NullPointer, "out is null"));
    }
    let text = serde_json::to_string(value).map_err(|e| fail(FlowmapStatus::Internal, e.to_string()))?;
    let c = CString::new(text).map_err(|e| fail(FlowmapStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(FlowmapStatus::NullPointer, "out is null"));
    }
    *out = ptr::null_mut();
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn flowmap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn flowmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn flowmap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a session from a JSON request:
/// `{"corpus": dir, "models": [files], "crypto"?, "sources"?, "sinks"?}`.
/// Runs the first mapping iteration.
///
/// # Safety
/// `request_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_new(request_json: *const c_char, out: *mut *mut FlowmapSession) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let text = str_arg(request_json, "request_json")?;
        let req: CreateSession =
            serde_json::from_str(text).map_err(|e| fail(FlowmapStatus::Parse, format!("request: {e}")))?;
        let inner = Session::build("ffi", &req, 0)?;
        *out = Box::into_raw(Box::new(FlowmapSession { inner }));
        Ok(())
    })
}

/// Releases a session. NULL is ignored.
///
/// # Safety
/// `session` must come from [`flowmap_session_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_free(session: *mut FlowmapSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Current suggestions as a JSON array.
///
/// # Safety
/// `session` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_suggestions(session: *mut FlowmapSession, out: *mut *mut c_char) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        write_out(out, &s.suggestions())
    })
}

/// Accepts, rejects or tolerates an entry (`decision` is accept, reject or tolerate).
///
/// # Safety
/// `session` must be a live handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_decide(
    session: *mut FlowmapSession,
    entry: *const c_char,
    decision: *const c_char,
) -> FlowmapStatus {
    guard(|| {
        let s = self::session(session)?;
        let entry = str_arg(entry, "entry")?;
        let d: Decision = str_arg(decision, "decision")?
            .parse()
            .map_err(|e: String| fail(FlowmapStatus::Validation, e))?;
        s.decide(entry, d)?;
        Ok(())
    })
}

/// Maps `dfd` (`model/element`) to a program element id; writes the entry id.
///
/// # Safety
/// `session` must be a live handle; strings must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_map(
    session: *mut FlowmapSession,
    dfd: *const c_char,
    pm: *const c_char,
    out: *mut *mut c_char,
) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let id = s.map(str_arg(dfd, "dfd")?, str_arg(pm, "pm")?)?;
        *out = CString::new(id).map_err(|e| fail(FlowmapStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Runs one mapping iteration; writes the new suggestions as JSON.
///
/// # Safety
/// `session` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_iterate(session: *mut FlowmapSession, out: *mut *mut c_char) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let v = s.iterate();
        write_out(out, &v)
    })
}

/// Runs a check (contracts, crypto, design or taint; `mode` is plain,
/// partly or fully and may be NULL for the others); writes the report.
///
/// # Safety
/// `session` must be a live handle; `kind` NUL-terminated; `mode` NULL or
/// NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_check(
    session: *mut FlowmapSession,
    kind: *const c_char,
    mode: *const c_char,
    out: *mut *mut c_char,
) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let kind = CheckKind::parse(str_arg(kind, "kind")?, opt_str_arg(mode, "mode")?)
            .map_err(|e| fail(FlowmapStatus::Validation, e))?;
        let report = s.check(kind)?;
        write_out(out, &report)
    })
}

/// Scores the active mapping against a ground truth JSON document.
///
/// # Safety
/// `session` must be a live handle; `ground_truth_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flowmap_session_evaluate(
    session: *mut FlowmapSession,
    ground_truth_json: *const c_char,
    out: *mut *mut c_char,
) -> FlowmapStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let gt = load_ground_truth(str_arg(ground_truth_json, "ground_truth_json")?.as_bytes())
            .map_err(|e| fail(FlowmapStatus::Parse, e.to_string()))?;
        write_out(out, &s.evaluate(&gt))
    })
}
