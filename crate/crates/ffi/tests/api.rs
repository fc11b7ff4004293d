use std::ffi::{CStr, CString};
use std::ptr;

use psdcomp::lexicon::MatrixStore;
use psdcomp::linalg::{PsdMatrix, Tolerance};
use psdcomp_ffi::*;
use tempfile::TempDir;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = psdcomp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn matrix(rows: &[f64], dim: usize) -> *mut PsdcompMatrix {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { psdcomp_matrix_new(rows.as_ptr(), dim, &mut out) }, PsdcompStatus::Ok);
    out
}

fn entries(m: *const PsdcompMatrix) -> Vec<f64> {
    let dim = unsafe { psdcomp_matrix_dim(m) };
    let mut buf = vec![0.0; dim * dim];
    assert_eq!(unsafe { psdcomp_matrix_data(m, buf.as_mut_ptr(), buf.len()) }, PsdcompStatus::Ok);
    buf
}

#[test]
fn compose_and_score() {
    let n = matrix(&[1.0, 0.5, 0.5, 1.0], 2);
    let v = matrix(&[2.0, 0.0, 0.0, 1.0], 2);
    let mut out = ptr::null_mut();
    let rule = c("mult");
    assert_eq!(unsafe { psdcomp_compose(rule.as_ptr(), n, v, &mut out) }, PsdcompStatus::Ok);
    assert_eq!(entries(out), vec![2.0, 0.0, 0.0, 1.0]);

    let mut score = f64::NAN;
    let ke = c("ke");
    assert_eq!(unsafe { psdcomp_score(ke.as_ptr(), out, out, &mut score) }, PsdcompStatus::Ok);
    assert_eq!(score, 1.0);
    unsafe {
        psdcomp_matrix_free(out);
        psdcomp_matrix_free(n);
        psdcomp_matrix_free(v);
    }
}

#[test]
fn error_codes_and_messages() {
    let n = matrix(&[1.0, 0.0, 0.0, 1.0], 2);
    let mut out = ptr::null_mut();
    let bad = c("no-such-rule");
    assert_eq!(unsafe { psdcomp_compose(bad.as_ptr(), n, n, &mut out) }, PsdcompStatus::UnknownRule);
    assert!(last_error().contains("traced-noun"));
    assert!(out.is_null());

    let rule = c("mult");
    assert_eq!(unsafe { psdcomp_compose(rule.as_ptr(), n, ptr::null(), &mut out) }, PsdcompStatus::NullPointer);
    assert!(last_error().contains("verb"));

    let not_psd = [1.0, 2.0, 2.0, 1.0];
    assert_eq!(unsafe { psdcomp_matrix_new(not_psd.as_ptr(), 2, &mut out) }, PsdcompStatus::NotPsd);

    let mut small = [0.0; 3];
    assert_eq!(
        unsafe { psdcomp_matrix_data(n, small.as_mut_ptr(), small.len()) },
        PsdcompStatus::DimensionMismatch
    );

    let mut score = 0.0;
    let measure = c("kl");
    assert_eq!(unsafe { psdcomp_score(measure.as_ptr(), n, n, &mut score) }, PsdcompStatus::UnknownMeasure);

    assert_eq!(unsafe { psdcomp_compose(rule.as_ptr(), n, n, &mut out) }, PsdcompStatus::Ok);
    assert!(psdcomp_last_error().is_null());
    unsafe {
        psdcomp_matrix_free(out);
        psdcomp_matrix_free(n);
    }
}

#[test]
fn store_round_trip() {
    let t = Tolerance::default();
    let mut store = MatrixStore::new(2);
    store.insert("dog", PsdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.25]], &t).unwrap()).unwrap();
    store.insert("run", PsdMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 1.0]], &t).unwrap()).unwrap();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("w.store");
    store.persist(&path).unwrap();

    let mut handle = ptr::null_mut();
    let p = c(path.to_str().unwrap());
    assert_eq!(unsafe { psdcomp_store_load(p.as_ptr(), &mut handle) }, PsdcompStatus::Ok);
    assert_eq!(unsafe { psdcomp_store_dim(handle) }, 2);
    assert_eq!(unsafe { psdcomp_store_len(handle) }, 2);

    let mut dog = ptr::null_mut();
    let word = c("dog");
    assert_eq!(unsafe { psdcomp_store_get(handle, word.as_ptr(), &mut dog) }, PsdcompStatus::Ok);
    assert_eq!(entries(dog), vec![1.0, 0.0, 0.0, 0.25]);

    let (ty, rule, phrase) = (c("sv"), c("mult"), c("dog run"));
    let mut out = ptr::null_mut();
    let status = unsafe { psdcomp_compose_phrase(handle, ty.as_ptr(), rule.as_ptr(), phrase.as_ptr(), &mut out) };
    assert_eq!(status, PsdcompStatus::Ok);
    assert_eq!(entries(out), vec![0.5, 0.0, 0.0, 0.25]);

    let missing = c("cat run");
    let status = unsafe { psdcomp_compose_phrase(handle, ty.as_ptr(), rule.as_ptr(), missing.as_ptr(), &mut out) };
    assert_eq!(status, PsdcompStatus::MissingWord);
    assert!(last_error().contains("cat"));

    let nowhere = c("/nonexistent/w.store");
    let mut other = ptr::null_mut();
    assert_eq!(unsafe { psdcomp_store_load(nowhere.as_ptr(), &mut other) }, PsdcompStatus::Io);
    unsafe {
        psdcomp_matrix_free(out);
        psdcomp_matrix_free(dog);
        psdcomp_store_free(handle);
        psdcomp_store_free(ptr::null_mut());
    }
}

#[test]
fn auc() {
    let scores = [0.9, 0.1, 0.5, 0.5];
    let labels = [1u8, 0, 1, 0];
    let mut out = 0.0;
    assert_eq!(unsafe { psdcomp_roc_auc(scores.as_ptr(), labels.as_ptr(), 4, &mut out) }, PsdcompStatus::Ok);
    assert_eq!(out, 0.875);
    let same = [1u8; 4];
    assert_eq!(unsafe { psdcomp_roc_auc(scores.as_ptr(), same.as_ptr(), 4, &mut out) }, PsdcompStatus::Numerical);
}

#[test]
fn header_is_current() {
    let header = include_str!("../include/psdcomp.h");
    for name in [
        "psdcomp_store_load",
        "psdcomp_store_free",
        "psdcomp_matrix_new",
        "psdcomp_matrix_data",
        "psdcomp_compose",
        "psdcomp_compose_phrase",
        "psdcomp_score",
        "psdcomp_roc_auc",
        "psdcomp_last_error",
        "typedef struct PsdcompStore PsdcompStore;",
        "PSDCOMP_STATUS_MISSING_WORD = 5",
    ] {
        assert!(header.contains(name), "{name}");
    }
    let version = unsafe { CStr::from_ptr(psdcomp_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
