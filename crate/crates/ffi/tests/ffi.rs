use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use chebotarev_ffi::*;

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { chb_string_free(p) };
    s
}

fn last_error() -> String {
    let p = chb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const TWIN_SMALL: &str = r#"{
  "fields": ["trivial", "trivial"],
  "a": [1, -1],
  "X": 2000,
  "N": [2, 4, 6, 30],
  "sieve": {"A": 1}
}"#;

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(chb_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn prime_table_counts_primes() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { chb_prime_table_new(100, &mut t) }, ChbStatus::Ok);
    let mut pi = 0;
    assert_eq!(unsafe { chb_prime_table_pi(t, 100, &mut pi) }, ChbStatus::Ok);
    assert_eq!(pi, 25);
    unsafe { chb_prime_table_free(t) };
}

#[test]
fn counts_match_direct_enumeration() {
    let json = CString::new(TWIN_SMALL).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { chb_instance_from_json(json.as_ptr(), &mut inst) }, ChbStatus::Ok);
    let mut x = 0;
    unsafe { chb_instance_x(inst, &mut x) };
    assert_eq!(x, 2000);

    let mut t = ptr::null_mut();
    unsafe { chb_prime_table_new(x, &mut t) };
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { chb_representation_counts(t, inst, &mut c) }, ChbStatus::Ok);

    let (mut lo, mut hi) = (0, 0);
    unsafe { chb_counts_range(c, &mut lo, &mut hi) };
    assert!(lo < 0 && hi > 0);

    // Pairs of primes p, p + 2 below 2000.
    let primes: Vec<u64> = (2..=2000u64).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect();
    let twins = primes.iter().filter(|&&p| p + 2 <= 2000 && primes.binary_search(&(p + 2)).is_ok()).count();
    let (mut w, mut u) = (0.0, 0);
    unsafe { chb_counts_get(c, -2, &mut w, &mut u) };
    assert_eq!(u as usize, twins);
    assert!(w > 0.0);

    let mut main = 0.0;
    assert_eq!(unsafe { chb_main_term(inst, 2, 10_000, &mut main) }, ChbStatus::Ok);
    assert!(main > 0.0);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chb_verify_json(t, inst, &mut out) }, ChbStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chb_local_factors_json(inst, 30, 1000, &mut out) }, ChbStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["N"], 30);

    unsafe {
        chb_counts_free(c);
        chb_prime_table_free(t);
        chb_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { chb_instance_from_json(ptr::null(), &mut inst) }, ChbStatus::NullPointer);
    assert!(last_error().contains("null"));

    let bad = CString::new(r#"{"fields":["trivial","trivial"],"a":[2,4],"X":100,"N":0}"#).unwrap();
    assert_eq!(unsafe { chb_instance_from_json(bad.as_ptr(), &mut inst) }, ChbStatus::InvalidArgument);
    assert!(last_error().contains("common divisor"));

    let name = CString::new("no-such-instance").unwrap();
    assert_ne!(unsafe { chb_instance_builtin(name.as_ptr(), &mut inst) }, ChbStatus::Ok);

    let (mut a, mut q) = (0, 0);
    assert_eq!(unsafe { chb_best_approx(0.5, 0, &mut a, &mut q) }, ChbStatus::InvalidArgument);

    let field = CString::new("gaussian").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chb_construct_curve_json(field.as_ptr(), 10, &mut out) }, ChbStatus::NotFound);
    assert!(out.is_null());
}

#[test]
fn builtin_instance_loads() {
    let name = CString::new("twin-average").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { chb_instance_builtin(name.as_ptr(), &mut inst) }, ChbStatus::Ok);
    unsafe { chb_instance_free(inst) };
}

#[test]
fn best_approx_and_smooth_count() {
    let (mut a, mut q) = (0, 0);
    assert_eq!(unsafe { chb_best_approx(std::f64::consts::PI, 10, &mut a, &mut q) }, ChbStatus::Ok);
    assert_eq!((a, q), (22, 7));
    // Squarefree 3-smooth numbers: 1, 2, 3, 6.
    assert_eq!(chb_smooth_count(3.0, 10.0), 4);
}

#[test]
fn certificate_round_trip() {
    let field = CString::new("gaussian").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chb_construct_curve_json(field.as_ptr(), 2000, &mut out) }, ChbStatus::Ok);
    let cert = take_string(out);

    let c = CString::new(cert.clone()).unwrap();
    let (mut valid, mut reasons) = (0, ptr::null_mut());
    assert_eq!(
        unsafe { chb_check_certificate_json(c.as_ptr(), field.as_ptr(), &mut valid, &mut reasons) },
        ChbStatus::Ok
    );
    assert_eq!(valid, 1, "{}", take_string(reasons));

    let mut v: serde_json::Value = serde_json::from_str(&cert).unwrap();
    v["r"] = serde_json::json!(v["r"].as_u64().unwrap() + 2);
    let c = CString::new(v.to_string()).unwrap();
    unsafe { chb_check_certificate_json(c.as_ptr(), field.as_ptr(), &mut valid, &mut reasons) };
    assert_eq!(valid, 0);
    assert!(take_string(reasons).len() > 2);
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/chebotarev.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build script");
    for sym in ["chb_verify_json", "chb_last_error_message", "CHB_STATUS_NOT_FOUND", "typedef struct ChbCounts"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(&src, "#include \"chebotarev.h\"\nint main(void) { return chb_version() == 0; }\n").unwrap();
    match Command::new("cc")
        .arg("-std=c99")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler available; skipped syntax check"),
    }
}
