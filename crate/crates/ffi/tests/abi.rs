use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qcbkit_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let v = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { qk_string_free(s) };
    v
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qk_last_error()) }.to_str().unwrap().to_string()
}

fn point(text: &str) -> *mut QkPoint {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { qk_point_parse(c.as_ptr(), &mut p) }, QkStatus::Ok);
    p
}

#[test]
fn points_round_trip_through_handles() {
    let p = point("[2:1/2^2, 0:1]");
    let q = point("[0:1/2^0]");
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(qk_point_to_string(p, &mut s), QkStatus::Ok);
        assert_eq!(take(s), "[0:1/2^0, 2:1/2^2]");
        assert_eq!(qk_point_norm(p, &mut s), QkStatus::Ok);
        assert_eq!(take(s), "5/2^2");
        assert_eq!(qk_point_dist(p, q, &mut s), QkStatus::Ok);
        assert_eq!(take(s), "1/2^2");
        assert_eq!(qk_roundtrip(p, 30, true), QkStatus::Ok);
        assert_eq!(qk_roundtrip(p, 65, false), QkStatus::InvalidArgument);
        qk_point_free(p);
        qk_point_free(q);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    let bad = CString::new("[0:1/2^1]").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(qk_point_parse(bad.as_ptr(), &mut p), QkStatus::ParseError);
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(qk_point_parse(ptr::null(), &mut p), QkStatus::NullPointer);
        assert_eq!(last_error(), "text is null");
        let ok = CString::new("[]").unwrap();
        assert_eq!(qk_point_parse(ok.as_ptr(), ptr::null_mut()), QkStatus::NullPointer);
        let mut s = ptr::null_mut();
        assert_eq!(qk_point_norm(ptr::null(), &mut s), QkStatus::NullPointer);
        qk_string_free(ptr::null_mut());
        qk_point_free(ptr::null_mut());
        assert!(!CStr::from_ptr(qk_version()).to_bytes().is_empty());
    }
}

#[test]
fn adversary_chain_handles() {
    let spec = CString::new("ball").unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(qk_adversary_run(spec.as_ptr(), 4, &mut c), QkStatus::Ok);
        assert_eq!(qk_chain_len(c), 5);
        let mut s = ptr::null_mut();
        assert_eq!(qk_chain_record(c, 2, &mut s), QkStatus::Ok);
        assert!(take(s).starts_with("k=2 a_k=1/2^2 "));
        assert_eq!(qk_chain_record(c, 5, &mut s), QkStatus::InvalidArgument);
        assert_eq!(qk_chain_verify(c), QkStatus::Ok);
        qk_chain_free(c);
        assert_eq!(qk_chain_len(ptr::null()), 0);

        let all = CString::new("all").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(qk_adversary_run(all.as_ptr(), 3, &mut c), QkStatus::OracleViolation);
        assert!(last_error().starts_with("not a separator"));
        let junk = CString::new("cube").unwrap();
        assert_eq!(qk_adversary_run(junk.as_ptr(), 3, &mut c), QkStatus::ParseError);
    }
}

#[test]
fn header_declares_the_surface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qcbkit.h")).unwrap();
    for decl in [
        "typedef struct QkPoint QkPoint;",
        "typedef struct QkChain QkChain;",
        "QK_STATUS_ORACLE_VIOLATION = 4,",
        "enum QkStatus qk_point_parse(const char *text, struct QkPoint **out);",
        "enum QkStatus qk_adversary_run(const char *oracle, size_t depth, struct QkChain **out);",
        "void qk_string_free(char *s);",
        "const char *qk_last_error(void);",
    ] {
        assert!(h.contains(decl), "missing {decl}");
    }
}
