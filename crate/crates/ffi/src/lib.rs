//! C ABI over `qcbkit`.
//!
//! Points and witness chains cross the boundary as opaque handles. Every
//! fallible call returns a [`QkStatus`]; the message of the last failure on
//! the calling thread is available from [`qk_last_error`]. Strings handed
//! out by this library must be released with [`qk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qcbkit::adversary::{adversary_run, witness_verify, AdversaryError, WitnessChain};
use qcbkit::cli::oracle::OracleSpec;
use qcbkit::retract_chain::{full_pair, stream_matches};
use qcbkit::retract_core::{e_m, r_m};
use qcbkit::spaces::{dist_m, Coords};
use qcbkit::MPoint;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkStatus {
    Ok = 0,
    NullPointer = 1,
    ParseError = 2,
    InvalidArgument = 3,
    /// The oracle broke its claims (`0^ω` outside, or a member of norm >= 1).
    OracleViolation = 4,
    /// A check ran and failed.
    CheckFailed = 5,
    Panic = 6,
}

/// Opaque point of `M` with finite support.
pub struct QkPoint(MPoint);

/// Opaque witness chain produced by the adversary.
pub struct QkChain {
    chain: WitnessChain,
    oracle: OracleSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, turning panics into [`QkStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (QkStatus, String)>) -> QkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QkStatus::Panic
        }
    }
}

type Res<T> = Result<T, (QkStatus, String)>;

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Res<&'a str> {
    if s.is_null() {
        return Err((QkStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (QkStatus::ParseError, format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| (QkStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Res<()> {
    if out.is_null() {
        return Err((QkStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Res<()> {
    let c = CString::new(s).map_err(|_| (QkStatus::InvalidArgument, "string contains nul".to_string()))?;
    write_out(out, c.into_raw())
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a point such as `[0:1, 2:1/2^2]`.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qk_point_parse(text: *const c_char, out: *mut *mut QkPoint) -> QkStatus {
    guard(|| {
        let s = read_str(text, "text")?;
        let x: MPoint = s.parse().map_err(|e| (QkStatus::ParseError, format!("{e}")))?;
        write_out(out, Box::into_raw(Box::new(QkPoint(x))))
    })
}

/// # Safety
/// `p` must come from [`qk_point_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn qk_point_free(p: *mut QkPoint) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Canonical text form of the point.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_point_to_string(p: *const QkPoint, out: *mut *mut c_char) -> QkStatus {
    guard(|| write_string(out, deref(p, "point")?.0.to_string()))
}

/// Exact norm as `j/2^e`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_point_norm(p: *const QkPoint, out: *mut *mut c_char) -> QkStatus {
    guard(|| write_string(out, deref(p, "point")?.0.norm().to_string()))
}

/// Exact distance as `j/2^e`.
///
/// # Safety
/// `p`, `q` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_point_dist(p: *const QkPoint, q: *const QkPoint, out: *mut *mut c_char) -> QkStatus {
    guard(|| write_string(out, dist_m(&deref(p, "point")?.0, &deref(q, "point")?.0).to_string()))
}

/// Checks `r_M(e_M(x)) = x` on `0..depth` and, when `full` is set, the
/// full chain as well. `CheckFailed` on a mismatch.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qk_roundtrip(p: *const QkPoint, depth: usize, full: bool) -> QkStatus {
    guard(|| {
        let x = &deref(p, "point")?.0;
        if depth > 64 {
            return Err((QkStatus::InvalidArgument, format!("depth {depth} exceeds 64")));
        }
        let (x2, g) = e_m(x);
        let z = r_m(x2, g);
        if !(0..depth).all(|i| z.coord(i) == x.coord(i)) || !z.check_tail(depth.min(12), depth).is_pass() {
            return Err((QkStatus::CheckFailed, format!("r_M(e_M(x)) differs from {x}")));
        }
        if full && !stream_matches(&full_pair().round_trip(x), x, depth, depth.min(12)) {
            return Err((QkStatus::CheckFailed, format!("full chain round trip differs from {x}")));
        }
        Ok(())
    })
}

/// Runs the adversary against an oracle spec (`ball`, `ball & x[0]=0`, ...).
///
/// # Safety
/// `oracle` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_adversary_run(oracle: *const c_char, depth: usize, out: *mut *mut QkChain) -> QkStatus {
    guard(|| {
        let spec = OracleSpec::parse(read_str(oracle, "oracle")?).map_err(|e| (QkStatus::ParseError, e.to_string()))?;
        if depth > 64 {
            return Err((QkStatus::InvalidArgument, format!("depth {depth} exceeds 64")));
        }
        let violation = |e: AdversaryError| (QkStatus::OracleViolation, e.to_string());
        let v = spec.build().map_err(violation)?;
        let chain = adversary_run(&v, depth).map_err(violation)?;
        write_out(out, Box::into_raw(Box::new(QkChain { chain, oracle: spec })))
    })
}

/// # Safety
/// `c` must come from [`qk_adversary_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn qk_chain_free(c: *mut QkChain) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of levels, `K + 1`. Zero for a null handle.
///
/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qk_chain_len(c: *const QkChain) -> usize {
    c.as_ref().map_or(0, |c| c.chain.steps.len())
}

/// Serialized record of level `k`.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qk_chain_record(c: *const QkChain, k: usize, out: *mut *mut c_char) -> QkStatus {
    guard(|| {
        let c = deref(c, "chain")?;
        let rec = c.chain.to_records().into_iter().nth(k);
        let rec = rec.ok_or_else(|| (QkStatus::InvalidArgument, format!("level {k} out of range")))?;
        write_string(out, rec)
    })
}

/// Re-checks the chain against the oracle it was built from.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qk_chain_verify(c: *const QkChain) -> QkStatus {
    guard(|| {
        let c = deref(c, "chain")?;
        let v = c.oracle.build().map_err(|e| (QkStatus::OracleViolation, e.to_string()))?;
        let report = witness_verify(&c.chain, &v);
        if report.passed() {
            Ok(())
        } else {
            Err((QkStatus::CheckFailed, report.summary))
        }
    })
}
