use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use epd_ffi::*;

fn spec(json: &str) -> *mut EpdSpec {
    let json = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { epd_spec_from_json(json.as_ptr(), &mut out) }, EpdStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> Option<String> {
    let p = epd_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn critical_point_and_velocity() {
    let s = spec(r#"{"variant":"monomial","x":[1,1],"y":[1]}"#);
    let mut cp = EpdCritical::default();
    let st = unsafe { epd_find_critical(s, EpdComplex { re: 0.0, im: 1.0 }, &mut cp) };
    assert_eq!(st, EpdStatus::Ok);
    assert!((cp.beta.re + 0.5).abs() < 1e-12 && (cp.beta.im - 1.0).abs() < 1e-12);
    assert_eq!(cp.order, 1);
    assert!(last_error().is_none());

    // y0 relative to x1 is 2/(β - β̄) = -i at β = -1/2 + i.
    let (k, l) = (CString::new("y0").unwrap(), CString::new("x1").unwrap());
    let mut v = EpdComplex::default();
    let st = unsafe { epd_velocity(s, cp.beta, k.as_ptr(), l.as_ptr(), &mut v) };
    assert_eq!(st, EpdStatus::Ok);
    assert!(v.re.abs() < 1e-12 && (v.im + 1.0).abs() < 1e-12, "{v:?}");
    unsafe { epd_spec_free(s) };
}

#[test]
fn jet_residual_and_dual() {
    let s = spec(r#"{"variant":"monomial","x":[1]}"#);
    let z = EpdComplex { re: 0.7, im: 1.6 };
    let mut j = EpdJet::default();
    assert_eq!(unsafe { epd_spec_eval(s, z, 1, &mut j) }, EpdStatus::Ok);
    // W₁ = (z + z̄)/2
    assert!((j.w.re - 0.7).abs() < 1e-12 && j.w.im.abs() < 1e-12);
    let mut r = 1.0;
    assert_eq!(unsafe { epd_spec_residual(s, z, &mut r) }, EpdStatus::Ok);
    assert!(r < 1e-12);
    // W* = ((z - z̄)² + 4)/4 for W₁
    let mut d = EpdComplex::default();
    assert_eq!(unsafe { epd_dual_value(s, z, &mut d) }, EpdStatus::Ok);
    assert!((d.re - (4.0 - 3.2 * 3.2) / 4.0).abs() < 1e-10 && d.im.abs() < 1e-10, "{d:?}");
    unsafe { epd_spec_free(s) };
}

#[test]
fn errors_are_reported() {
    let json = CString::new(r#"{"variant":"bogus"}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { epd_spec_from_json(json.as_ptr(), &mut out) }, EpdStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().unwrap().contains("variant"));

    assert_eq!(unsafe { epd_spec_from_json(ptr::null(), &mut out) }, EpdStatus::NullPointer);

    let s = spec(r#"{"variant":"delta","phi":[[1,0]]}"#);
    let mut j = EpdJet::default();
    assert_eq!(unsafe { epd_spec_eval(s, EpdComplex::default(), 1, &mut j) }, EpdStatus::Singular);
    assert_eq!(unsafe { epd_spec_eval(s, EpdComplex { re: 0.0, im: 1.0 }, 1, ptr::null_mut()) }, EpdStatus::NullPointer);
    unsafe { epd_spec_free(s) };
    unsafe { epd_spec_free(ptr::null_mut()) };
}

#[test]
fn last_error_is_per_thread() {
    let json = CString::new("{").unwrap();
    let mut out = ptr::null_mut();
    unsafe { epd_spec_from_json(json.as_ptr(), &mut out) };
    assert!(last_error().is_some());
    std::thread::spawn(|| assert!(last_error().is_none())).join().unwrap();
}

#[test]
fn field_state_skew() {
    let n = 64;
    let l = 2.0 * std::f64::consts::PI;
    let xs: Vec<f64> = (0..n).map(|j| j as f64 * l / n as f64).collect();
    let rho: Vec<f64> = xs.iter().map(|x| 2.0 + x.sin()).collect();
    let u: Vec<f64> = xs.iter().map(|x| (2.0 * x).cos()).collect();
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { epd_field_new(rho.as_ptr(), u.as_ptr(), n, l, &mut st) }, EpdStatus::Ok);
    for op in [EpdOperator::J0, EpdOperator::J1, EpdOperator::J1Eps] {
        let mut a = 1.0;
        assert_eq!(unsafe { epd_field_skew_check(st, op, 0.1, 4, 7, &mut a) }, EpdStatus::Ok);
        assert!(a < 1e-10, "{op:?}: {a}");
    }
    unsafe { epd_field_free(st) };

    let bad = vec![-1.0; n];
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { epd_field_new(bad.as_ptr(), u.as_ptr(), n, l, &mut st) }, EpdStatus::Domain);
    assert!(st.is_null());
}

#[test]
fn darios_initial_root() {
    let phi = CString::new(
        r#"{"kind":"sum","terms":[{"kind":"gaussian","amplitude":1,"center":1,"width":1},{"kind":"gaussian","amplitude":-1,"center":-1,"width":1}]}"#,
    )
    .unwrap();
    let (mut tau, mut k) = (f64::NAN, f64::NAN);
    let st = unsafe { epd_darios_initial_root(phi.as_ptr(), ptr::null(), -0.5, 0.0, 1.0, &mut tau, &mut k) };
    assert_eq!(st, EpdStatus::Ok, "{:?}", last_error());
    // φ odd about 0 and ψ = 0 put the root on τ₀ = 0.
    assert!(tau.abs() < 1e-10 && k > 0.0, "{tau} {k}");
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/epd.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["epd_spec_from_json", "epd_find_critical", "epd_last_error", "EPD_STATUS_OK"] {
        assert!(text.contains(name), "{name}");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping the link check");
        return;
    };
    let lib = target_dir().join("libepd_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
