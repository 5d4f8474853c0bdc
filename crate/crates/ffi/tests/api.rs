use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hausdim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        hd_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn residue_set(q: usize, members: &[usize]) -> *mut HdResidueSet {
    let mut out = ptr::null_mut();
    let st = unsafe { hd_residue_set_new(q, members.as_ptr(), members.len(), &mut out) };
    assert_eq!(st, HdStatus::Ok, "{}", last_error());
    out
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn dimension_bound_round_trip() {
    for members in [&[2usize][..], &[1, 3][..]] {
        let set = residue_set(4, members);
        let mut db = ptr::null_mut();
        assert_eq!(unsafe { hd_dimension_bound_new(set, &mut db) }, HdStatus::Ok);
        let mut s = HdBoundSummary::default();
        assert_eq!(unsafe { hd_dimension_bound_summary(db, &mut s) }, HdStatus::Ok);
        assert!((s.bound - 0.5).abs() < 1e-12);
        assert!((s.kappa_prime_1 + 2f64.ln()).abs() < 1e-12);

        let mut len = 0;
        let st = unsafe { hd_dimension_bound_witness(db, ptr::null_mut(), 0, &mut len) };
        assert_eq!((st, len), (HdStatus::Resource, 4));
        let mut w = [0.0; 4];
        assert_eq!(unsafe { hd_dimension_bound_witness(db, w.as_mut_ptr(), 4, &mut len) }, HdStatus::Ok);
        assert_eq!(w.iter().filter(|&&x| (x + 1.0).abs() < 1e-12).count(), 2);
        unsafe {
            hd_dimension_bound_free(db);
            hd_residue_set_free(set);
        }
    }
}

#[test]
fn kappa_and_membership() {
    let set = residue_set(4, &[1, 3]);
    let mut k = f64::NAN;
    assert_eq!(unsafe { hd_kappa(set, 0.5, &mut k) }, HdStatus::Ok);
    assert!(k > 0.0);
    assert_eq!(unsafe { hd_kappa(set, 1.5, &mut k) }, HdStatus::InvalidInput);

    let mut inside = false;
    assert_eq!(unsafe { hd_in_cb(7 * 16, set, &mut inside) }, HdStatus::Ok);
    assert!(inside);
    assert_eq!(unsafe { hd_in_cb(2, set, &mut inside) }, HdStatus::Ok);
    assert!(!inside);

    let asym = residue_set(4, &[1]);
    assert_eq!(unsafe { hd_kappa(asym, 0.5, &mut k) }, HdStatus::InvalidInput);
    unsafe {
        hd_residue_set_free(set);
        hd_residue_set_free(asym);
    }
}

#[test]
fn riesz_scalars() {
    let mut x = f64::NAN;
    assert_eq!(unsafe { hd_bound_theorem3(4, &mut x) }, HdStatus::Ok);
    assert!((x - 0.5).abs() < 1e-12);
    assert_eq!(unsafe { hd_kappa_prime_riesz(4, &mut x) }, HdStatus::Ok);
    assert!((x + 2f64.ln()).abs() < 1e-12);
    assert_eq!(unsafe { hd_bound_prop5(3, &mut x) }, HdStatus::Ok);
    assert!(x < 0.0);
    assert_eq!(unsafe { hd_fan_main_term(0.0, 5, &mut x) }, HdStatus::Ok);
    assert_eq!(x, 1.0);
    assert_eq!(unsafe { hd_fan_main_term(2.0, 5, &mut x) }, HdStatus::InvalidInput);
    assert_eq!(unsafe { hd_bound_theorem3(4, ptr::null_mut()) }, HdStatus::NullPointer);
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let list = CString::new("1,x").unwrap();
    assert_eq!(unsafe { hd_residue_set_parse(5, list.as_ptr(), &mut out) }, HdStatus::InvalidInput);
    assert!(out.is_null());
    assert!(last_error().contains("\"x\""));
    assert_eq!(unsafe { hd_residue_set_new(2, ptr::null(), 0, &mut out) }, HdStatus::InvalidInput);
    assert_eq!(unsafe { hd_residue_set_new(5, ptr::null(), 1, &mut out) }, HdStatus::NullPointer);
    assert_eq!(unsafe { hd_kappa(ptr::null(), 0.5, ptr::null_mut()) }, HdStatus::NullPointer);

    let mut short = [0 as c_char; 4];
    let full = unsafe { hd_last_error_message(short.as_mut_ptr(), short.len()) };
    assert!(full > 3);
    assert_eq!(unsafe { CStr::from_ptr(short.as_ptr()) }.to_bytes().len(), 3);
    unsafe {
        hd_residue_set_free(ptr::null_mut());
        hd_dimension_bound_free(ptr::null_mut());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// The profile directory holding the library artifacts.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_lists_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/hausdim.h")).unwrap();
    for name in [
        "hd_last_error_message",
        "hd_version",
        "hd_residue_set_new",
        "hd_residue_set_parse",
        "hd_residue_set_free",
        "hd_in_cb",
        "hd_kappa",
        "hd_dimension_bound_new",
        "hd_dimension_bound_free",
        "hd_dimension_bound_summary",
        "hd_dimension_bound_witness",
        "hd_kappa_prime_riesz",
        "hd_bound_theorem3",
        "hd_bound_prop5",
        "hd_fan_main_term",
        "HD_STATUS_NULL_POINTER",
        "HD_STATUS_PANIC",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let lib = artifact_dir().join("libhausdim_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("hausdim_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
