use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use glu_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(glu_last_error_message()) }.to_str().unwrap().to_owned()
}

fn matrix(rows: usize, cols: usize, data: &[f64]) -> *mut GluMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { glu_matrix_new(rows, cols, data.as_ptr(), &mut m) }, GluStatus::Ok);
    m
}

fn data(m: *const GluMatrix) -> Vec<f64> {
    let len = unsafe { glu_matrix_rows(m) * glu_matrix_cols(m) };
    let mut v = vec![0.0; len];
    assert_eq!(unsafe { glu_matrix_copy_data(m, v.as_mut_ptr(), len) }, GluStatus::Ok);
    v
}

fn generated(spec: &str, m: usize, n: usize, seed: u64) -> *mut GluMatrix {
    let s = CString::new(spec).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { glu_gen_matrix(s.as_ptr(), m, n, seed, &mut a) }, GluStatus::Ok, "{}", last_error());
    a
}

#[test]
fn matrix_round_trip() {
    let vals: Vec<f64> = (0..6).map(f64::from).collect();
    let m = matrix(2, 3, &vals);
    unsafe {
        assert_eq!(glu_matrix_rows(m), 2);
        assert_eq!(glu_matrix_cols(m), 3);
    }
    assert_eq!(data(m), vals);
    let mut short = [0.0; 5];
    assert_eq!(unsafe { glu_matrix_copy_data(m, short.as_mut_ptr(), 5) }, GluStatus::Dimension);
    unsafe { glu_matrix_free(m) };
}

#[test]
fn null_and_bad_arguments() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(glu_matrix_new(2, 2, ptr::null(), &mut m), GluStatus::NullPointer);
        assert!(m.is_null());
        assert_eq!(glu_matrix_new(2, 2, [0.0; 4].as_ptr(), ptr::null_mut()), GluStatus::NullPointer);
        assert_eq!(glu_matrix_rows(ptr::null()), 0);
        glu_matrix_free(ptr::null_mut());
        glu_factorization_free(ptr::null_mut());
    }
    assert_eq!(unsafe { glu_matrix_new(1, 2, [1.0, f64::NAN].as_ptr(), &mut m) }, GluStatus::NonFinite);
    assert!(last_error().contains("non-finite"));
    let mut f = ptr::null_mut();

    let a = generated("exp:0.5", 8, 6, 1);
    unsafe {
        assert_eq!(glu_factorize(a, 7, 2, 2, 3, 0, 0, 0, &mut f), GluStatus::InvalidArgument);
        assert_eq!(glu_factorize(a, 0, 2, 2, 3, 9, 0, 0, &mut f), GluStatus::InvalidArgument);
        assert_eq!(glu_factorize(a, 0, 3, 2, 3, 0, 0, 0, &mut f), GluStatus::InvalidArgument);
        assert_eq!(glu_factorize(a, 0, 2, 7, 8, 0, 0, 0, &mut f), GluStatus::Dimension);
        assert!(f.is_null());
        let bad = CString::new("wavy:1").unwrap();
        let mut g = ptr::null_mut();
        assert_ne!(glu_gen_matrix(bad.as_ptr(), 4, 4, 0, &mut g), GluStatus::Ok);
        let mut ru = 0.0;
        let mut rl = 0.0;
        assert_eq!(glu_growth_factors(a, &mut ru, &mut rl), GluStatus::Dimension);
        glu_matrix_free(a);
    }
}

#[test]
fn factorize_every_algorithm() {
    let a = generated("step:3:1000", 24, 18, 3);
    let x: Vec<f64> = (0..18).map(|i| (i as f64).sin()).collect();
    for algo in 0..5u32 {
        let mut f = ptr::null_mut();
        let st = unsafe { glu_factorize(a, algo, 3, 4, 7, 1, 1, 11, &mut f) };
        assert_eq!(st, GluStatus::Ok, "algo {algo}: {}", last_error());
        assert!(last_error().is_empty());
        let mut d = GluDims::default();
        assert_eq!(unsafe { glu_factorization_dims(f, &mut d) }, GluStatus::Ok);
        assert_eq!((d.m, d.n, d.k), (24, 18, 3));
        assert_eq!(d.lp, if algo == 0 || algo == 4 { 7 } else { 4 });

        let mut ak = ptr::null_mut();
        let mut t = ptr::null_mut();
        let mut s = ptr::null_mut();
        unsafe {
            assert_eq!(glu_factorization_reconstruct(f, &mut ak), GluStatus::Ok);
            assert_eq!(glu_factorization_t(f, &mut t), GluStatus::Ok);
            assert_eq!(glu_factorization_s(f, &mut s), GluStatus::Ok);
            assert_eq!(glu_matrix_rows(t), 24);
            assert_eq!(glu_matrix_cols(s), 18);
        }
        let dense = data(ak);
        let mut y = vec![0.0; 24];
        assert_eq!(unsafe { glu_factorization_apply(f, x.as_ptr(), 18, y.as_mut_ptr(), 24) }, GluStatus::Ok);
        for (r, yr) in y.iter().enumerate() {
            let want: f64 = (0..18).map(|c| dense[c * 24 + r] * x[c]).sum();
            assert!((want - yr).abs() <= 1e-9 * (1.0 + want.abs()));
        }
        assert_eq!(
            unsafe { glu_factorization_apply(f, x.as_ptr(), 17, y.as_mut_ptr(), 24) },
            GluStatus::Dimension
        );

        let mut g = f64::NAN;
        assert_eq!(unsafe { glu_gamma_lowrank(a, ak, 3, &mut g) }, GluStatus::Ok);
        assert!(g.is_finite() && (1.0 - 1e-8..50.0).contains(&g), "algo {algo}: gamma {g}");
        unsafe {
            glu_matrix_free(ak);
            glu_matrix_free(t);
            glu_matrix_free(s);
            glu_factorization_free(f);
        }
    }
    unsafe { glu_matrix_free(a) };
}

#[test]
fn exact_recovery_gives_nan_gamma() {
    let u: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
    let v: Vec<f64> = (0..8).map(|j| 2.0 - j as f64 * 0.3).collect();
    let vals: Vec<f64> = (0..8).flat_map(|c| { let vc = v[c]; u.iter().map(move |ui| ui * vc) }).collect();
    let a = matrix(10, 8, &vals);
    let mut f = ptr::null_mut();
    let mut ak = ptr::null_mut();
    let mut g = 0.0;
    unsafe {
        assert_eq!(glu_factorize(a, 1, 1, 1, 1, 1, 1, 5, &mut f), GluStatus::Ok);
        assert_eq!(glu_factorization_reconstruct(f, &mut ak), GluStatus::Ok);
        assert_eq!(glu_gamma_lowrank(a, ak, 1, &mut g), GluStatus::Ok);
    }
    assert!(g.is_nan());
    let rec = data(ak);
    let scale = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(vals.iter().zip(&rec).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
    unsafe {
        glu_matrix_free(ak);
        glu_factorization_free(f);
        glu_matrix_free(a);
    }
}

#[test]
fn growth_of_identity_is_one() {
    let mut id = vec![0.0; 16];
    for i in 0..4 {
        id[i * 5] = 1.0;
    }
    let a = matrix(4, 4, &id);
    let (mut ru, mut rl) = (0.0, 0.0);
    assert_eq!(unsafe { glu_growth_factors(a, &mut ru, &mut rl) }, GluStatus::Ok);
    assert_eq!((ru, rl), (1.0, 0.0));
    unsafe { glu_matrix_free(a) };
}

#[test]
fn files_round_trip() {
    let dir = std::env::temp_dir().join(format!("glu-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = generated("poly:1", 5, 4, 2);
    for name in ["a.mtx", "a.glum"] {
        let path = CString::new(dir.join(name).to_str().unwrap()).unwrap();
        let mut b = ptr::null_mut();
        unsafe {
            assert_eq!(glu_matrix_write(a, path.as_ptr()), GluStatus::Ok);
            assert_eq!(glu_matrix_read(path.as_ptr(), &mut b), GluStatus::Ok);
        }
        assert_eq!(data(a), data(b));
        unsafe { glu_matrix_free(b) };
    }
    let missing = CString::new(dir.join("none.mtx").to_str().unwrap()).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { glu_matrix_read(missing.as_ptr(), &mut b) }, GluStatus::Io);
    unsafe { glu_matrix_free(a) };
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(glu_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn find_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

#[test]
fn c_smoke_test() {
    let Some(cc) = find_cc() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let target: PathBuf = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libglu_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let exe = target.join(format!("glu_smoke_{}", std::process::id()));
    let out = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
