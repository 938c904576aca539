use std::ffi::{c_char, CStr};
use std::ptr;

use cklh_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { cklh_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn i4_handle_round_trip() {
    let mut sys: *mut CklhSystem = ptr::null_mut();
    assert_eq!(unsafe { cklh_i4_new(0.0, &mut sys) }, CklhStatus::Ok);
    let mut f = [0.0; 6];
    assert_eq!(unsafe { cklh_system_fields(sys, 0.3, -0.2, f.as_mut_ptr()) }, CklhStatus::Ok);
    assert_eq!(f, [1.0, 1.0, 0.3, -0.2, 0.09, 0.04000000000000001]);
    let mut h = [0.0; 3];
    assert_eq!(unsafe { cklh_system_hamiltonians(sys, 0.3, -0.2, h.as_mut_ptr()) }, CklhStatus::Ok);
    let mut c = 0.0;
    assert_eq!(unsafe { cklh_system_casimir(sys, 0.3, -0.2, &mut c) }, CklhStatus::Ok);
    assert!((c + 0.25).abs() < 1e-12);
    let mut w = 0.0;
    assert_eq!(unsafe { cklh_system_weight(sys, 0.3, -0.2, &mut w) }, CklhStatus::Ok);
    assert!((w - 4.0).abs() < 1e-12);
    let b = [1.0, 0.0, 0.0];
    let mut r = [0.0; 2];
    assert_eq!(unsafe { cklh_system_rhs(sys, b.as_ptr(), 0.3, -0.2, r.as_mut_ptr()) }, CklhStatus::Ok);
    assert_eq!(r, [1.0, 1.0]);
    unsafe { cklh_system_free(sys) };
}

#[test]
fn domain_errors_carry_messages() {
    let mut sys: *mut CklhSystem = ptr::null_mut();
    assert_eq!(unsafe { cklh_p2_new(1.0, 1.0, &mut sys) }, CklhStatus::Ok);
    let mut w = 0.0;
    let s = unsafe { cklh_system_weight(sys, 0.3, 0.0, &mut w) };
    assert_ne!(s, CklhStatus::Ok);
    assert!(!last_error().is_empty());
    unsafe { cklh_system_free(sys) };
}

#[test]
fn null_and_invalid_arguments() {
    let mut out = 0.0;
    assert_eq!(unsafe { cklh_system_weight(ptr::null(), 0.0, 1.0, &mut out) }, CklhStatus::NullPointer);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { cklh_i4_new(f64::NAN, &mut ptr::null_mut()) }, CklhStatus::InvalidArgument);
    let mut sys: *mut CklhSystem = ptr::null_mut();
    assert_eq!(unsafe { cklh_app_new(CklhApplication::ErmakovNeg, 0.5, 0.0, 0.0, &mut sys) }, CklhStatus::InvalidArgument);
    assert!(sys.is_null());
    unsafe { cklh_system_free(ptr::null_mut()) };
}

#[test]
fn small_buffers_truncate() {
    unsafe { cklh_i4_new(f64::INFINITY, &mut ptr::null_mut()) };
    let mut buf = [0 as c_char; 4];
    let n = unsafe { cklh_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 3);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 3);
}

#[test]
fn app_casimir_matches_scaled_value() {
    let mut sys: *mut CklhSystem = ptr::null_mut();
    assert_eq!(unsafe { cklh_app_new(CklhApplication::KummerSchwarzPos, 1.0, 1.0, 1.0, &mut sys) }, CklhStatus::Ok);
    let mut c = 0.0;
    assert_eq!(unsafe { cklh_system_casimir(sys, 0.7, 0.2, &mut c) }, CklhStatus::Ok);
    assert!((c - 1.0).abs() < 1e-9, "{c}");
    unsafe { cklh_system_free(sys) };
}

#[test]
fn superposition_through_the_abi() {
    let (k, s1, s2, s3) = (0.5, [0.35, -0.45], [-0.25, 0.55], [0.15, -0.7]);
    let (mut f12, mut f13) = (0.0, 0.0);
    unsafe {
        assert_eq!(cklh_i4_f2(k, s1[0], s1[1], s2[0], s2[1], &mut f12), CklhStatus::Ok);
        assert_eq!(cklh_i4_f2(k, s1[0], s1[1], s3[0], s3[1], &mut f13), CklhStatus::Ok);
    }
    let best = [1, -1]
        .iter()
        .filter_map(|&b| {
            let mut r = [0.0; 2];
            let st = unsafe { cklh_i4_superpose(k, s2.as_ptr(), s3.as_ptr(), -f12, -f13, b, r.as_mut_ptr()) };
            (st == CklhStatus::Ok).then(|| (r[0] - s1[0]).abs().max((r[1] - s1[1]).abs()))
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-10, "{best}");
    let mut r = [0.0; 2];
    assert_eq!(unsafe { cklh_i4_superpose(k, s2.as_ptr(), s3.as_ptr(), 0.1, 0.2, 0, r.as_mut_ptr()) }, CklhStatus::InvalidArgument);
    let mut p = 0.0;
    assert_eq!(unsafe { cklh_p2_f2(0.0, 1.0, 0.3, 0.6, -0.2, 0.9, &mut p) }, CklhStatus::Ok);
    assert!(p.is_finite());
    let mut x = 0.0;
    assert_eq!(unsafe { cklh_riccati_superpose(0.0, 0.4, -0.3, 0.2, 0.7, &mut x) }, CklhStatus::Ok);
}

#[test]
fn verify_suite_by_name() {
    let (mut pass, mut failed) = (0, 99usize);
    let s = unsafe { cklh_verify_suite(c"identities".as_ptr(), 42, 10, &mut pass, &mut failed) };
    assert_eq!(s, CklhStatus::Ok);
    assert_eq!((pass, failed), (1, 0));
    let s = unsafe { cklh_verify_suite(c"nope".as_ptr(), 42, 10, &mut pass, &mut failed) };
    assert_eq!(s, CklhStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cklh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cklh.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["cklh_i4_new", "cklh_system_free", "cklh_verify_suite", "typedef struct CklhSystem CklhSystem"] {
        assert!(text.contains(f), "{f} missing from the header");
    }
    let Ok(o) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        eprintln!("cc not found; header only checked textually");
        return;
    };
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile.join("libcklh_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping the C link check", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("demo");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let Ok(o) = std::process::Command::new("cc")
        .arg(format!("-I{manifest}/include"))
        .arg(format!("{manifest}/examples/c/demo.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("cc not found; skipping the C link check");
        return;
    };
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("casimir = -0.250000000000"));
}
