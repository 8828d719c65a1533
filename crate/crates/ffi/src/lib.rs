//! C ABI for the csecoc toolkit.
//!
//! Objects cross the boundary as opaque handles (`CsecocDataset`,
//! `CsecocMatrix`, `CsecocModel`); every function returns a `CsecocStatus`
//! code and writes results through out-pointers. The last error message for
//! the calling thread is available via [`csecoc_last_error_message`].
//!
//! The matching header lives at `include/csecoc.h` and is kept in sync by
//! the `header_matches_exports` test.
//!
//! # Safety
//! Pointer arguments must be valid for the duration of each call; handles
//! must be freed exactly once with their `_free` function and never used
//! afterwards.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

use csecoc::coding::{build_matrix, validate_matrix, CodingMatrix, MatrixKind};
use csecoc::data::{CsvSchema, Dataset, LabelColumn, MissingPolicy};
use csecoc::eval::LearnerBase;
use csecoc::pipeline::{fit_pipeline, load_model, save_model, EcocModel, PipelineOptions};

/// Status codes returned by every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsecocStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Io = 3,
    InvalidArgument = 4,
    TrainingFailed = 5,
    PredictionFailed = 6,
    Internal = 7,
}

/// Opaque dataset handle.
pub struct CsecocDataset(Dataset);
/// Opaque coding-matrix handle.
pub struct CsecocMatrix(CodingMatrix);
/// Opaque trained-model handle.
pub struct CsecocModel(EcocModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: CsecocStatus, message: impl AsRef<str>) -> CsecocStatus {
    set_error(message.as_ref());
    status
}

fn status_of(e: &csecoc::Error) -> CsecocStatus {
    match e {
        csecoc::Error::Io { .. } => CsecocStatus::Io,
        csecoc::Error::InvalidArgument(_)
        | csecoc::Error::LengthMismatch { .. }
        | csecoc::Error::TooFewClasses
        | csecoc::Error::EmptyGroup => CsecocStatus::InvalidArgument,
        _ => CsecocStatus::TrainingFailed,
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or the call fails.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, CsecocStatus> {
    if ptr.is_null() {
        return Err(CsecocStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| CsecocStatus::Utf8)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn csecoc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message for the calling thread; owned by the library, valid
/// until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn csecoc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Loads a CSV dataset.
///
/// `label_column`: -1 = last, -2 = first, otherwise a zero-based index.
/// `mean_impute`: 0 drops rows with missing features, nonzero imputes the
/// column mean.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csecoc_dataset_load_csv(
    path: *const c_char,
    label_column: c_int,
    has_header: c_int,
    mean_impute: c_int,
    out: *mut *mut CsecocDataset,
) -> CsecocStatus {
    if out.is_null() {
        return fail(CsecocStatus::NullPointer, "out pointer is null");
    }
    let path = match read_str(path) {
        Ok(s) => s,
        Err(status) => return fail(status, "invalid path argument"),
    };
    let schema = CsvSchema {
        label_column: match label_column {
            -1 => LabelColumn::Last,
            -2 => LabelColumn::First,
            i if i >= 0 => LabelColumn::Index(i as usize),
            _ => return fail(CsecocStatus::InvalidArgument, "bad label_column"),
        },
        has_header: has_header != 0,
        missing_policy: if mean_impute != 0 {
            MissingPolicy::MeanImpute
        } else {
            MissingPolicy::DropRow
        },
    };
    match csecoc::data::load_csv(path, &schema) {
        Ok(ds) => {
            *out = Box::into_raw(Box::new(CsecocDataset(ds)));
            CsecocStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `ds` must come from `csecoc_dataset_load_csv` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn csecoc_dataset_free(ds: *mut CsecocDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_dataset_num_samples(ds: *const CsecocDataset) -> c_int {
    ds.as_ref().map_or(-1, |d| d.0.n_samples() as c_int)
}

/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_dataset_num_features(ds: *const CsecocDataset) -> c_int {
    ds.as_ref().map_or(-1, |d| d.0.n_features() as c_int)
}

/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_dataset_num_classes(ds: *const CsecocDataset) -> c_int {
    ds.as_ref().map_or(-1, |d| d.0.n_classes() as c_int)
}

fn kind_from_code(kind: c_int) -> Option<MatrixKind> {
    match kind {
        0 => Some(MatrixKind::Csecoc),
        1 => Some(MatrixKind::DecocLike),
        2 => Some(MatrixKind::Ova),
        3 => Some(MatrixKind::Ovo),
        4 => Some(MatrixKind::DenseRandom),
        5 => Some(MatrixKind::SparseRandom),
        _ => None,
    }
}

/// Builds a coding matrix from a dataset.
///
/// `kind`: 0 csecoc, 1 decoc_like, 2 ova, 3 ovo, 4 dense_random,
/// 5 sparse_random. `eps <= 0` uses the default denominator clamp and
/// `candidates <= 0` the default candidate budget.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_build(
    ds: *const CsecocDataset,
    kind: c_int,
    seed: u64,
    eps: c_double,
    candidates: c_int,
    out: *mut *mut CsecocMatrix,
) -> CsecocStatus {
    if out.is_null() {
        return fail(CsecocStatus::NullPointer, "out pointer is null");
    }
    let Some(ds) = ds.as_ref() else {
        return fail(CsecocStatus::NullPointer, "dataset handle is null");
    };
    let Some(kind) = kind_from_code(kind) else {
        return fail(CsecocStatus::InvalidArgument, "unknown matrix kind code");
    };
    let eps = if eps > 0.0 { eps } else { csecoc::DEFAULT_EPS };
    let candidates = if candidates > 0 { candidates as usize } else { 1000 };
    match build_matrix(&ds.0, kind, eps, seed, candidates) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(CsecocMatrix(matrix)));
            CsecocStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `matrix` must come from `csecoc_matrix_build` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_free(matrix: *mut CsecocMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// `matrix` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_num_classes(matrix: *const CsecocMatrix) -> c_int {
    matrix.as_ref().map_or(-1, |m| m.0.n_classes() as c_int)
}

/// # Safety
/// `matrix` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_num_columns(matrix: *const CsecocMatrix) -> c_int {
    matrix.as_ref().map_or(-1, |m| m.0.n_columns() as c_int)
}

/// Reads one matrix entry into `*out`.
///
/// # Safety
/// `matrix` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_get(
    matrix: *const CsecocMatrix,
    class_index: c_int,
    column: c_int,
    out: *mut c_double,
) -> CsecocStatus {
    let Some(m) = matrix.as_ref() else {
        return fail(CsecocStatus::NullPointer, "matrix handle is null");
    };
    if out.is_null() {
        return fail(CsecocStatus::NullPointer, "out pointer is null");
    }
    if class_index < 0
        || column < 0
        || class_index as usize >= m.0.n_classes()
        || column as usize >= m.0.n_columns()
    {
        return fail(CsecocStatus::InvalidArgument, "matrix index out of range");
    }
    *out = m.0.value(class_index as usize, column as usize);
    CsecocStatus::Ok
}

///0 when every matrix invariant holds, 1 otherwise, negative on bad input.
///
/// # Safety
/// `matrix` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_is_valid(matrix: *const CsecocMatrix) -> c_int {
    match matrix.as_ref() {
        Some(m) => {
            if validate_matrix(&m.0).is_valid() {
                0
            } else {
                1
            }
        }
        None => -1,
    }
}

/// Writes the matrix CSV (class names + six-digit entries).
///
/// # Safety
/// `matrix` must be a live handle, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn csecoc_matrix_write_csv(
    matrix: *const CsecocMatrix,
    path: *const c_char,
) -> CsecocStatus {
    let Some(m) = matrix.as_ref() else {
        return fail(CsecocStatus::NullPointer, "matrix handle is null");
    };
    let path = match read_str(path) {
        Ok(s) => s,
        Err(status) => return fail(status, "invalid path argument"),
    };
    match m.0.write_csv(path) {
        Ok(()) => CsecocStatus::Ok,
        Err(e) => fail(CsecocStatus::Io, e.to_string()),
    }
}

/// Trains an ensemble on a dataset.
///
/// `learner`: 0 pairs KNN with the matrix kind (regressor on soft,
/// classifier on hard), 1 forces the RBF kernel-ridge regressor.
/// `gamma <= 0` means the `1 / n_features` default.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_train(
    ds: *const CsecocDataset,
    kind: c_int,
    learner: c_int,
    knn_k: c_int,
    gamma: c_double,
    ridge_lambda: c_double,
    standardize: c_int,
    seed: u64,
    out: *mut *mut CsecocModel,
) -> CsecocStatus {
    if out.is_null() {
        return fail(CsecocStatus::NullPointer, "out pointer is null");
    }
    let Some(ds) = ds.as_ref() else {
        return fail(CsecocStatus::NullPointer, "dataset handle is null");
    };
    let Some(kind) = kind_from_code(kind) else {
        return fail(CsecocStatus::InvalidArgument, "unknown matrix kind code");
    };
    if knn_k < 1 {
        return fail(CsecocStatus::InvalidArgument, "knn_k must be >= 1");
    }
    let base = match learner {
        0 => LearnerBase::Knn { k: knn_k as usize },
        1 => LearnerBase::KernelRidge {
            gamma: (gamma > 0.0).then_some(gamma),
            lambda: ridge_lambda.max(0.0),
        },
        _ => return fail(CsecocStatus::InvalidArgument, "unknown learner code"),
    };
    let (spec, decoding) = base.paired_spec(kind);
    let options = PipelineOptions {
        standardize: standardize != 0,
        hard_targets: false,
    };
    match fit_pipeline(
        &ds.0,
        kind,
        &spec,
        decoding,
        &options,
        csecoc::DEFAULT_EPS,
        seed,
        1000,
    ) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(CsecocModel(model)));
            CsecocStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `model` must come from a train/load call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_free(model: *mut CsecocModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicts the class index of one feature row.
///
/// # Safety
/// `model` must be a live handle; `features` must point at `n_features`
/// doubles; `out_class` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_predict(
    model: *const CsecocModel,
    features: *const c_double,
    n_features: c_int,
    out_class: *mut c_int,
) -> CsecocStatus {
    let Some(m) = model.as_ref() else {
        return fail(CsecocStatus::NullPointer, "model handle is null");
    };
    if features.is_null() || out_class.is_null() {
        return fail(CsecocStatus::NullPointer, "features/out pointer is null");
    }
    if n_features < 0 {
        return fail(CsecocStatus::InvalidArgument, "negative feature count");
    }
    let slice = std::slice::from_raw_parts(features, n_features as usize);
    match m.0.predict_slice(slice) {
        Ok(class) => {
            *out_class = class as c_int;
            CsecocStatus::Ok
        }
        Err(e) => fail(CsecocStatus::PredictionFailed, e.to_string()),
    }
}

/// Class name for an index, written into `buffer` (NUL-terminated,
/// truncated to `buffer_len`).
///
/// # Safety
/// `model` must be a live handle; `buffer` must hold `buffer_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_class_name(
    model: *const CsecocModel,
    class_index: c_int,
    buffer: *mut c_char,
    buffer_len: c_int,
) -> CsecocStatus {
    let Some(m) = model.as_ref() else {
        return fail(CsecocStatus::NullPointer, "model handle is null");
    };
    if buffer.is_null() || buffer_len < 1 {
        return fail(CsecocStatus::InvalidArgument, "bad buffer");
    }
    let names = m.0.matrix().class_names();
    if class_index < 0 || class_index as usize >= names.len() {
        return fail(CsecocStatus::InvalidArgument, "class index out of range");
    }
    let name = names[class_index as usize].as_bytes();
    let n = name.len().min(buffer_len as usize - 1);
    ptr::copy_nonoverlapping(name.as_ptr() as *const c_char, buffer, n);
    *buffer.add(n) = 0;
    CsecocStatus::Ok
}

/// Persists a model as version-tagged JSON.
///
/// # Safety
/// `model` must be a live handle, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_save(
    model: *const CsecocModel,
    path: *const c_char,
) -> CsecocStatus {
    let Some(m) = model.as_ref() else {
        return fail(CsecocStatus::NullPointer, "model handle is null");
    };
    let path = match read_str(path) {
        Ok(s) => s,
        Err(status) => return fail(status, "invalid path argument"),
    };
    match save_model(&m.0, Path::new(path)) {
        Ok(()) => CsecocStatus::Ok,
        Err(e) => fail(CsecocStatus::Io, e.to_string()),
    }
}

/// Loads a model persisted by `csecoc_model_save`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn csecoc_model_load(
    path: *const c_char,
    out: *mut *mut CsecocModel,
) -> CsecocStatus {
    if out.is_null() {
        return fail(CsecocStatus::NullPointer, "out pointer is null");
    }
    let path = match read_str(path) {
        Ok(s) => s,
        Err(status) => return fail(status, "invalid path argument"),
    };
    match load_model(Path::new(path)) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(CsecocModel(model)));
            CsecocStatus::Ok
        }
        Err(e) => fail(CsecocStatus::Io, e.to_string()),
    }
}
