//! C ABI over the simulation pipeline.
//!
//! Objects cross the boundary as opaque handles that the caller owns and
//! releases with the matching `*_free` function. Every fallible function
//! returns a [`MosimStatus`]; on failure, [`mosim_last_error`] describes
//! what went wrong on the calling thread. Strings handed out by the library
//! are NUL-terminated UTF-8 and must be released with [`mosim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mosim_core::cli::tracefile::{Format, TraceFile};
use mosim_core::lexicon::{builtin_lexicon, load_lexicon, Lexicon};
use mosim_core::parser::parse_text;
use mosim_core::pipeline::{simulate, Simulation};
use mosim_core::scene::SceneConfig;
use mosim_core::Error;

/// Result of a library call. The first four values match the exit codes of
/// the `mosim` command.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MosimStatus {
    Ok = 0,
    /// The trace was produced but does not verify.
    VerifyFailed = 1,
    /// Malformed sentence, lexicon, configuration or program.
    InvalidInput = 2,
    /// No run of the compiled program succeeds within its bounds.
    SearchFailed = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    /// A bug inside the library; the handle arguments are still valid.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MosimFormat {
    Jsonl = 0,
    Csv = 1,
}

/// A lexicon: the builtin entries plus anything loaded on top.
pub struct MosimLexicon(Lexicon);

/// A finished simulation together with the lexicon it was built from.
pub struct MosimSimulation {
    sim: Simulation,
    lexicon: Lexicon,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: MosimStatus, msg: impl Into<String>) -> MosimStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> MosimStatus {
    let status = if e.is_search_failure() {
        MosimStatus::SearchFailed
    } else {
        MosimStatus::InvalidInput
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into `Internal`.
fn guard(f: impl FnOnce() -> MosimStatus) -> MosimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(MosimStatus::Internal, "internal error"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, MosimStatus> {
    if p.is_null() {
        return Err(fail(MosimStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MosimStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> MosimStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            MosimStatus::Ok
        }
        Err(_) => fail(MosimStatus::Internal, "output contains a NUL byte"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(MosimStatus::NullArgument, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mosim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mosim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mosim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The builtin lexicon. Never null.
#[no_mangle]
pub extern "C" fn mosim_lexicon_builtin() -> *mut MosimLexicon {
    Box::into_raw(Box::new(MosimLexicon(builtin_lexicon())))
}

/// Loads a JSON lexicon document on top of the builtin entries.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_lexicon_load(json: *const c_char, out: *mut *mut MosimLexicon) -> MosimStatus {
    guard(|| {
        non_null!(out);
        let src = match read_str(json, "json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_lexicon(src) {
            Ok(lex) => {
                *out = Box::into_raw(Box::new(MosimLexicon(lex)));
                MosimStatus::Ok
            }
            Err(e) => from_error(&e.into()),
        }
    })
}

/// # Safety
/// `lex` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mosim_lexicon_free(lex: *mut MosimLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Parses a sentence and writes its event frame as JSON to `out_json`.
///
/// # Safety
/// `lex` must be a live handle, `sentence` a NUL-terminated string and
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_parse(
    lex: *const MosimLexicon,
    sentence: *const c_char,
    out_json: *mut *mut c_char,
) -> MosimStatus {
    guard(|| {
        non_null!(lex, out_json);
        let sentence = match read_str(sentence, "sentence") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_text(sentence, &(*lex).0) {
            Ok(frame) => give_string(out_json, serde_json::to_string(&frame).expect("frame serializes")),
            Err(e) => from_error(&e.into()),
        }
    })
}

/// Simulates `sentence`. `config_json` may be null for the defaults; `seed`
/// always overrides the configuration's seed.
///
/// # Safety
/// `lex` must be a live handle, the strings NUL-terminated (or
/// `config_json` null) and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulate(
    lex: *const MosimLexicon,
    sentence: *const c_char,
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut MosimSimulation,
) -> MosimStatus {
    guard(|| {
        non_null!(lex, out);
        let sentence = match read_str(sentence, "sentence") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut cfg = if config_json.is_null() {
            SceneConfig::default()
        } else {
            let src = match read_str(config_json, "config_json") {
                Ok(s) => s,
                Err(status) => return status,
            };
            match SceneConfig::from_json(src) {
                Ok(c) => c,
                Err(e) => return from_error(&e.into()),
            }
        };
        cfg.seed = seed;
        let lexicon = (*lex).0.clone();
        match simulate(sentence, &lexicon, &cfg) {
            Ok(sim) => {
                *out = Box::into_raw(Box::new(MosimSimulation { sim, lexicon }));
                MosimStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `sim` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulation_free(sim: *mut MosimSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of states in the trace, initial state included; 0 for null.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulation_frame_count(sim: *const MosimSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.trace.len())
}

/// Serializes the trace file into a new string.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulation_trace(
    sim: *const MosimSimulation,
    format: MosimFormat,
    out: *mut *mut c_char,
) -> MosimStatus {
    guard(|| {
        non_null!(sim, out);
        let file = match TraceFile::from_simulation(&(*sim).sim) {
            Ok(f) => f,
            Err(e) => return from_error(&e),
        };
        let format = match format {
            MosimFormat::Jsonl => Format::Jsonl,
            MosimFormat::Csv => Format::Csv,
        };
        let text = String::from_utf8(file.to_bytes(format)).expect("trace files are UTF-8");
        give_string(out, text)
    })
}

/// Verifies the trace. Returns `Ok` if every check passes and
/// `VerifyFailed` otherwise; the report JSON goes to `out_report` unless
/// it is null.
///
/// # Safety
/// `sim` must be a live handle; `out_report` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulation_verify(sim: *const MosimSimulation, out_report: *mut *mut c_char) -> MosimStatus {
    guard(|| {
        non_null!(sim);
        let s = &*sim;
        let report = match s.sim.verify(&s.lexicon) {
            Ok(r) => r,
            Err(e) => return from_error(&e),
        };
        if !out_report.is_null() {
            let status = give_string(out_report, serde_json::to_string(&report).expect("report serializes"));
            if status != MosimStatus::Ok {
                return status;
            }
        }
        if report.overall {
            MosimStatus::Ok
        } else {
            let failed: Vec<_> = report.failed().map(|c| c.name).collect();
            fail(MosimStatus::VerifyFailed, format!("failed checks: {}", failed.join(", ")))
        }
    })
}
