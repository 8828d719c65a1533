//! Behavioral tests through the C ABI plus header consistency checks.

use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::os::raw::c_int;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use csecoc_ffi::*;

fn iris_path() -> CString {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/iris.csv");
    CString::new(path).unwrap()
}

fn load_iris() -> *mut CsecocDataset {
    let mut ds: *mut CsecocDataset = ptr::null_mut();
    let status = unsafe { csecoc_dataset_load_csv(iris_path().as_ptr(), -1, 1, 0, &mut ds) };
    assert_eq!(status, CsecocStatus::Ok);
    assert!(!ds.is_null());
    ds
}

#[test]
fn version_is_a_cstring() {
    let v = unsafe { CStr::from_ptr(csecoc_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn dataset_load_and_introspect() {
    let ds = load_iris();
    unsafe {
        assert_eq!(csecoc_dataset_num_samples(ds), 150);
        assert_eq!(csecoc_dataset_num_features(ds), 4);
        assert_eq!(csecoc_dataset_num_classes(ds), 3);
        csecoc_dataset_free(ds);
    }
}

#[test]
fn load_failure_sets_error_message() {
    let path = CString::new("/nonexistent/nope.csv").unwrap();
    let mut ds: *mut CsecocDataset = ptr::null_mut();
    let status = unsafe { csecoc_dataset_load_csv(path.as_ptr(), -1, 1, 0, &mut ds) };
    assert_ne!(status, CsecocStatus::Ok);
    let message = unsafe { CStr::from_ptr(csecoc_last_error_message()) };
    assert!(message.to_str().unwrap().contains("nope.csv"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut ds: *mut CsecocDataset = ptr::null_mut();
    let status = unsafe { csecoc_dataset_load_csv(ptr::null(), -1, 1, 0, &mut ds) };
    assert_eq!(status, CsecocStatus::NullPointer);
    let status = unsafe { csecoc_matrix_build(ptr::null(), 0, 1, 0.0, 0, ptr::null_mut()) };
    assert_eq!(status, CsecocStatus::NullPointer);
    unsafe {
        assert_eq!(csecoc_dataset_num_samples(ptr::null()), -1);
    }
}

#[test]
fn matrix_build_and_read_back() {
    let ds = load_iris();
    let mut matrix: *mut CsecocMatrix = ptr::null_mut();
    let status = unsafe { csecoc_matrix_build(ds, 0, 42, 0.0, 0, &mut matrix) };
    assert_eq!(status, CsecocStatus::Ok);
    unsafe {
        assert_eq!(csecoc_matrix_num_classes(matrix), 3);
        assert_eq!(csecoc_matrix_num_columns(matrix), 2);
        assert_eq!(csecoc_matrix_is_valid(matrix), 0);
        let mut v = 0.0f64;
        for r in 0..3 {
            for c in 0..2 {
                assert_eq!(csecoc_matrix_get(matrix, r, c, &mut v), CsecocStatus::Ok);
                assert!((-1.0..=1.0).contains(&v));
            }
        }
        assert_eq!(
            csecoc_matrix_get(matrix, 5, 0, &mut v),
            CsecocStatus::InvalidArgument
        );
        let dir = std::env::temp_dir().join("csecoc_ffi_matrix.csv");
        let path = CString::new(dir.to_str().unwrap()).unwrap();
        assert_eq!(
            csecoc_matrix_write_csv(matrix, path.as_ptr()),
            CsecocStatus::Ok
        );
        assert!(dir.exists());
        let _ = std::fs::remove_file(dir);
        csecoc_matrix_free(matrix);
        csecoc_dataset_free(ds);
    }
}

#[test]
fn train_predict_save_load_round_trip() {
    let ds = load_iris();
    let mut model: *mut CsecocModel = ptr::null_mut();
    let status = unsafe { csecoc_model_train(ds, 0, 0, 5, 0.0, 1.0, 1, 42, &mut model) };
    assert_eq!(status, CsecocStatus::Ok);
    // a setosa-looking flower
    let query = [5.1f64, 3.5, 1.4, 0.2];
    let mut class: c_int = -1;
    unsafe {
        assert_eq!(
            csecoc_model_predict(model, query.as_ptr(), 4, &mut class),
            CsecocStatus::Ok
        );
        let mut name = [0i8; 64];
        assert_eq!(
            csecoc_model_class_name(model, class, name.as_mut_ptr(), 64),
            CsecocStatus::Ok
        );
        let name = CStr::from_ptr(name.as_ptr()).to_str().unwrap();
        assert_eq!(name, "Iris-setosa");

        let file = std::env::temp_dir().join("csecoc_ffi_model.json");
        let path = CString::new(file.to_str().unwrap()).unwrap();
        assert_eq!(csecoc_model_save(model, path.as_ptr()), CsecocStatus::Ok);
        let mut loaded: *mut CsecocModel = ptr::null_mut();
        assert_eq!(
            csecoc_model_load(path.as_ptr(), &mut loaded),
            CsecocStatus::Ok
        );
        let mut class2: c_int = -1;
        assert_eq!(
            csecoc_model_predict(loaded, query.as_ptr(), 4, &mut class2),
            CsecocStatus::Ok
        );
        assert_eq!(class, class2);
        let _ = std::fs::remove_file(file);
        csecoc_model_free(loaded);
        csecoc_model_free(model);
        csecoc_dataset_free(ds);
    }
}

#[test]
fn wrong_feature_count_fails_prediction() {
    let ds = load_iris();
    let mut model: *mut CsecocModel = ptr::null_mut();
    unsafe {
        assert_eq!(
            csecoc_model_train(ds, 2, 0, 5, 0.0, 1.0, 0, 1, &mut model),
            CsecocStatus::Ok
        );
        let query = [1.0f64, 2.0];
        let mut class: c_int = -1;
        assert_eq!(
            csecoc_model_predict(model, query.as_ptr(), 2, &mut class),
            CsecocStatus::PredictionFailed
        );
        csecoc_model_free(model);
        csecoc_dataset_free(ds);
    }
}

/// Every `pub extern "C" fn` in the source appears in the header and vice
/// versa, standing in for a generated binding.
#[test]
fn header_matches_exports() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let source = std::fs::read_to_string(root.join("src/lib.rs")).unwrap();
    let header = std::fs::read_to_string(root.join("include/csecoc.h")).unwrap();

    let mut exported = BTreeSet::new();
    for line in source.lines() {
        if let Some(rest) = line
            .trim()
            .strip_prefix("pub extern \"C\" fn ")
            .or_else(|| line.trim().strip_prefix("pub unsafe extern \"C\" fn "))
        {
            let name: String = rest
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            exported.insert(name);
        }
    }
    assert!(!exported.is_empty());

    let mut declared = BTreeSet::new();
    for token in header.split(|c: char| !(c.is_alphanumeric() || c == '_')) {
        if token.starts_with("csecoc_") {
            declared.insert(token.to_string());
        }
    }
    for name in &exported {
        assert!(declared.contains(name), "header misses `{name}`");
    }
    for name in declared {
        if name.ends_with("_t") {
            continue;
        }
        assert!(
            exported.contains(&name) || !name.contains('('),
            "header declares unknown symbol `{name}`"
        );
    }
}

/// The header must be valid C (gcc parses it standalone).
#[test]
fn header_compiles_as_c() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/csecoc.h");
    let probe = std::env::temp_dir().join("csecoc_header_probe.c");
    std::fs::write(&probe, format!("#include \"{}\"\nint main(void) {{ return 0; }}\n", header.display())).unwrap();
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror"])
        .arg(&probe)
        .status();
    let _ = std::fs::remove_file(&probe);
    match status {
        Ok(s) => assert!(s.success(), "header failed to parse as C"),
        Err(_) => eprintln!("cc not available; header syntax check skipped"),
    }
}
