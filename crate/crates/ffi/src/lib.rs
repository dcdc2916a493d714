//! C ABI over the analyzer.
//!
//! Every entry point returns an [`LfStatus`]. Strings handed out through
//! `char **out` parameters are owned by the caller and released with
//! [`lf_string_free`]. On failure, [`lf_last_error_message`] describes the
//! most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use loopfinder::confirm::{ConfirmConfig, DEFAULT_DEPTH, DEFAULT_SAMPLES, DEFAULT_SEED};
use loopfinder::error::Error;
use loopfinder::loops::{InferenceConfig, DEFAULT_PAIR_CAP, DEFAULT_PASSES};
use loopfinder::modes::parse_modes;
use loopfinder::parser::parse_program;
use loopfinder::report::{analyze, AnalyzeOptions};
use loopfinder::term::Program;
use loopfinder::unfold::{tp_beta_upto, UnfoldConfig, DEFAULT_POOL_CAP};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ModesError = 4,
    ResourceError = 5,
    /// An internal error; the message names the panic.
    Internal = 6,
}

/// A parsed program. Opaque to C.
pub struct LfProgram {
    program: Program,
}

/// Analysis settings; fill with [`lf_options_default`] before changing fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LfOptions {
    pub max: usize,
    pub pool_cap: usize,
    pub pair_cap: usize,
    pub passes: usize,
    /// Nonzero runs the oracle on every condition.
    pub oracle: c_int,
    pub oracle_depth: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for LfOptions {
    fn default() -> Self {
        LfOptions {
            max: 2,
            pool_cap: DEFAULT_POOL_CAP,
            pair_cap: DEFAULT_PAIR_CAP,
            passes: DEFAULT_PASSES,
            oracle: 1,
            oracle_depth: DEFAULT_DEPTH,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

impl LfOptions {
    fn to_analyze(self) -> AnalyzeOptions {
        AnalyzeOptions {
            max: self.max,
            inference: InferenceConfig {
                unfold: UnfoldConfig {
                    pool_cap: self.pool_cap,
                },
                pair_cap: self.pair_cap,
                passes: self.passes,
            },
            oracle: (self.oracle != 0).then(|| ConfirmConfig {
                depth: self.oracle_depth,
                samples: self.samples,
                seed: self.seed,
                ..ConfirmConfig::default()
            }),
            terminating: Default::default(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => LfStatus::ParseError,
            Error::Modes(_) => LfStatus::ModesError,
            Error::Resource(_) => LfStatus::ResourceError,
            Error::Io(_) => LfStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LfStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, records any failure or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal error: {msg}"));
            LfStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(LfStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn program_ref<'a>(p: *const LfProgram) -> Result<&'a Program, Failure> {
    p.as_ref().map(|p| &p.program).ok_or_else(|| null("program"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(LfStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Writes default settings into `opts`.
///
/// # Safety
/// `opts` must be null or point to writable memory for one `LfOptions`.
#[no_mangle]
pub unsafe extern "C" fn lf_options_default(opts: *mut LfOptions) -> LfStatus {
    guard(|| {
        let opts = opts.as_mut().ok_or_else(|| null("opts"))?;
        *opts = LfOptions::default();
        Ok(())
    })
}

/// Parses program text. On success `*out` receives a handle to release with
/// [`lf_program_free`].
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_program_parse(source: *const c_char, out: *mut *mut LfProgram) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let src = read_str(source, "source")?;
        let program = parse_program(src).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(LfProgram { program }));
        Ok(())
    })
}

/// Releases a program handle. Null is ignored.
///
/// # Safety
/// `program` must come from [`lf_program_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_program_free(program: *mut LfProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Number of clauses in the program.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_program_clause_count(program: *const LfProgram, out: *mut usize) -> LfStatus {
    guard(|| {
        let p = program_ref(program)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = p.clauses().len();
        Ok(())
    })
}

/// Stamped binary-clause pool after `max` iterations, one `<stamp> <clause>`
/// line per entry.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_unfold_dump(
    program: *const LfProgram,
    max: usize,
    pool_cap: usize,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| {
        let p = program_ref(program)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pool = tp_beta_upto(p, max, &UnfoldConfig { pool_cap }).map_err(Error::from)?;
        write_string(out, pool.dump())
    })
}

unsafe fn analyze_json(
    program: *const LfProgram,
    opts: *const LfOptions,
    modes_json: *const c_char,
    optimal: *mut c_int,
    out: *mut *mut c_char,
) -> Result<(), Failure> {
    let p = program_ref(program)?;
    if out.is_null() {
        return Err(null("out"));
    }
    let mut options = opts.as_ref().copied().unwrap_or_default().to_analyze();
    if !modes_json.is_null() {
        let text = read_str(modes_json, "modes")?;
        options.terminating = parse_modes(text, p).map_err(Error::from)?;
    }
    let analysis = analyze(p, &options)?;
    if let Some(optimal) = optimal.as_mut() {
        *optimal = analysis.result.is_optimal() as c_int;
    }
    write_string(out, analysis.render_json("<ffi>"))
}

/// Full analysis as a JSON document. `opts` may be null for defaults.
///
/// # Safety
/// `program` must be a live handle, `opts` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lf_analyze_json(
    program: *const LfProgram,
    opts: *const LfOptions,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| analyze_json(program, opts, ptr::null(), ptr::null_mut(), out))
}

/// Analysis against terminating modes given as JSON (`{"name/arity": [[1], ...]}`).
/// `*optimal` is set to 1 when no undecided mode remains, 0 otherwise.
///
/// # Safety
/// `program` must be a live handle, `modes_json` a NUL-terminated string,
/// `opts` null or valid, `optimal` and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lf_optimal_json(
    program: *const LfProgram,
    opts: *const LfOptions,
    modes_json: *const c_char,
    optimal: *mut c_int,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| {
        if modes_json.is_null() {
            return Err(null("modes_json"));
        }
        if optimal.is_null() {
            return Err(null("optimal"));
        }
        analyze_json(program, opts, modes_json, optimal, out)
    })
}

/// Releases a string produced by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn lf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
