//! C interface to psdcomp.
//!
//! Every fallible function returns a [`PsdcompStatus`]; on failure the
//! message is available from [`psdcomp_last_error`] on the same thread.
//! Objects are opaque handles that must be released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use psdcomp::compose::CompositionRule;
use psdcomp::eval::{compose_phrase, roc_auc, PhraseType};
use psdcomp::hyponymy::{measure, Measure};
use psdcomp::lexicon::MatrixStore;
use psdcomp::linalg::{PsdMatrix, Tolerance};
use psdcomp::{compose, Error};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdcompStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    MissingWord = 5,
    UnknownRule = 6,
    UnknownMeasure = 7,
    DimensionMismatch = 8,
    NotPsd = 9,
    Numerical = 10,
    Panic = 11,
}

/// A loaded word matrix store.
pub struct PsdcompStore {
    inner: MatrixStore,
}

/// A square psd matrix.
pub struct PsdcompMatrix {
    inner: PsdMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PsdcompStatus {
    match err {
        Error::InvalidArgument(_) | Error::NotLinearRule(_) | Error::NotStructural(_) => PsdcompStatus::InvalidArgument,
        Error::Io { .. } => PsdcompStatus::Io,
        Error::Format { .. } => PsdcompStatus::Format,
        Error::MissingWord(_) | Error::MissingVector(_) => PsdcompStatus::MissingWord,
        Error::UnknownRule { .. } => PsdcompStatus::UnknownRule,
        Error::UnknownMeasure { .. } => PsdcompStatus::UnknownMeasure,
        Error::DimensionMismatch { .. } => PsdcompStatus::DimensionMismatch,
        Error::NotPsd { .. } | Error::InvalidMatrix(_) => PsdcompStatus::NotPsd,
        Error::ZeroMatrix { .. } | Error::DegenerateLabels { .. } => PsdcompStatus::Numerical,
    }
}

struct Failure(PsdcompStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PsdcompStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsdcompStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsdcompStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PsdcompStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PsdcompStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_matrix(inner: PsdMatrix) -> *mut PsdcompMatrix {
    Box::into_raw(Box::new(PsdcompMatrix { inner }))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn psdcomp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn psdcomp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a store written by `psdcomp build-matrices`.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_store_load(path: *const c_char, out: *mut *mut PsdcompStore) -> PsdcompStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let inner = MatrixStore::load(path, &Tolerance::default())?;
        put(out, Box::into_raw(Box::new(PsdcompStore { inner })), "out")
    })
}

/// # Safety
/// `store` must come from [`psdcomp_store_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_store_free(store: *mut PsdcompStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Matrix dimension of the store, 0 for null.
///
/// # Safety
/// `store` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_store_dim(store: *const PsdcompStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.dim())
}

/// Number of words in the store, 0 for null.
///
/// # Safety
/// `store` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_store_len(store: *const PsdcompStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies the matrix of `word` into a new handle.
///
/// # Safety
/// Pointers must be valid; `word` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_store_get(
    store: *const PsdcompStore,
    word: *const c_char,
    out: *mut *mut PsdcompMatrix,
) -> PsdcompStatus {
    guard(|| {
        let store = ref_arg(store, "store")?;
        let word = str_arg(word, "word")?;
        let m = store.inner.lookup(word)?.clone();
        put(out, boxed_matrix(m), "out")
    })
}

/// Builds a matrix from `dim * dim` row-major entries. The entries must be
/// symmetric and psd.
///
/// # Safety
/// `data` must point to `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_matrix_new(data: *const f64, dim: usize, out: *mut *mut PsdcompMatrix) -> PsdcompStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if dim == 0 {
            return Err(Failure(PsdcompStatus::InvalidArgument, "dimension must be positive".into()));
        }
        let len = dim.checked_mul(dim).ok_or_else(|| Failure(PsdcompStatus::InvalidArgument, "dimension too large".into()))?;
        let entries = std::slice::from_raw_parts(data, len);
        let rows: Vec<Vec<f64>> = entries.chunks(dim).map(<[f64]>::to_vec).collect();
        let m = PsdMatrix::from_rows(&rows, &Tolerance::default())?;
        put(out, boxed_matrix(m), "out")
    })
}

/// # Safety
/// `matrix` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_matrix_free(matrix: *mut PsdcompMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Dimension of the matrix, 0 for null.
///
/// # Safety
/// `matrix` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_matrix_dim(matrix: *const PsdcompMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.dim())
}

/// Copies the entries row-major into `buffer`, which holds `len` doubles.
///
/// # Safety
/// `buffer` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_matrix_data(matrix: *const PsdcompMatrix, buffer: *mut f64, len: usize) -> PsdcompStatus {
    guard(|| {
        let m = ref_arg(matrix, "matrix")?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let dim = m.inner.dim();
        if len < dim * dim {
            return Err(Failure(
                PsdcompStatus::DimensionMismatch,
                format!("buffer holds {len} values, need {}", dim * dim),
            ));
        }
        let a = m.inner.as_matrix();
        let out = std::slice::from_raw_parts_mut(buffer, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = a[(i, j)];
            }
        }
        Ok(())
    })
}

/// Composes a noun and a verb matrix with the rule named `rule`
/// (for example `"traced-noun"`).
///
/// # Safety
/// Pointers must be valid; `rule` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_compose(
    rule: *const c_char,
    noun: *const PsdcompMatrix,
    verb: *const PsdcompMatrix,
    out: *mut *mut PsdcompMatrix,
) -> PsdcompStatus {
    guard(|| {
        let rule: CompositionRule = str_arg(rule, "rule")?.parse()?;
        let (n, v) = (ref_arg(noun, "noun")?, ref_arg(verb, "verb")?);
        let m = compose(rule, &n.inner, &v.inner, &Tolerance::default())?;
        put(out, boxed_matrix(m), "out")
    })
}

/// Composes a whitespace-separated phrase of type `"sv"`, `"vo"` or `"svo"`
/// from words in `store`.
///
/// # Safety
/// Pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_compose_phrase(
    store: *const PsdcompStore,
    phrase_type: *const c_char,
    rule: *const c_char,
    phrase: *const c_char,
    out: *mut *mut PsdcompMatrix,
) -> PsdcompStatus {
    guard(|| {
        let store = ref_arg(store, "store")?;
        let phrase_type: PhraseType = str_arg(phrase_type, "phrase_type")?.parse()?;
        let rule: CompositionRule = str_arg(rule, "rule")?.parse()?;
        let tokens: Vec<&str> = str_arg(phrase, "phrase")?.split_whitespace().collect();
        let m = compose_phrase(&tokens, phrase_type, rule, &store.inner, &Tolerance::default())?;
        put(out, boxed_matrix(m), "out")
    })
}

/// Graded hyponymy of `a` under `b` with measure `"ke"`, `"kba"` or `"crisp"`.
///
/// # Safety
/// Pointers must be valid; `measure_id` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_score(
    measure_id: *const c_char,
    a: *const PsdcompMatrix,
    b: *const PsdcompMatrix,
    out: *mut f64,
) -> PsdcompStatus {
    guard(|| {
        let which: Measure = str_arg(measure_id, "measure")?.parse()?;
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        let score = measure(which, &a.inner, &b.inner, &Tolerance::default())?;
        put(out, score.value, "out")
    })
}

/// ROC AUC of `scores` against `labels` (nonzero is positive).
///
/// # Safety
/// `scores` and `labels` must each hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn psdcomp_roc_auc(scores: *const f64, labels: *const u8, len: usize, out: *mut f64) -> PsdcompStatus {
    guard(|| {
        if scores.is_null() {
            return Err(null("scores"));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        let scores = std::slice::from_raw_parts(scores, len);
        let labels: Vec<bool> = std::slice::from_raw_parts(labels, len).iter().map(|&l| l != 0).collect();
        put(out, roc_auc(scores, &labels)?, "out")
    })
}
