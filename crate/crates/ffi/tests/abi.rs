use std::ffi::{CStr, CString};
use std::ptr;

use utpc_ffi::*;

fn field(q: &str) -> *mut UtpcField {
    let s = CString::new(q).unwrap();
    let mut f = ptr::null_mut();
    unsafe { assert_eq!(utpc_field_from_order(s.as_ptr(), &mut f), UtpcStatus::Ok) };
    f
}

fn element(f: *const UtpcField, n: usize, entries: &[u8]) -> *mut UtpcElement {
    let mut e = ptr::null_mut();
    unsafe { assert_eq!(utpc_element_new(f, n, entries.as_ptr(), entries.len(), &mut e), UtpcStatus::Ok) };
    e
}

fn entries(e: *const UtpcElement) -> Vec<u8> {
    let mut n = 0;
    unsafe {
        assert_eq!(utpc_element_dim(e, &mut n), UtpcStatus::Ok);
        let mut buf = vec![0u8; n * (n - 1) / 2];
        assert_eq!(utpc_element_entries(e, buf.as_mut_ptr(), buf.len()), UtpcStatus::Ok);
        buf
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(utpc_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn arithmetic_and_factoring() {
    let f = field("3");
    let a = element(f, 4, &[1, 2, 0, 1, 2, 1]);
    let b = element(f, 4, &[2, 0, 1, 1, 0, 2]);
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(utpc_element_commutator(a, b, &mut c), UtpcStatus::Ok);
        let mut derived = false;
        assert_eq!(utpc_element_in_derived(c, &mut derived), UtpcStatus::Ok);
        assert!(derived);

        let (mut x, mut y) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(utpc_factor_commutator(c, &mut x, &mut y), UtpcStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(utpc_element_commutator(x, y, &mut back), UtpcStatus::Ok);
        let mut same = false;
        assert_eq!(utpc_element_equal(back, c, &mut same), UtpcStatus::Ok);
        assert!(same);

        let mut inv = ptr::null_mut();
        let mut prod = ptr::null_mut();
        assert_eq!(utpc_element_inverse(a, &mut inv), UtpcStatus::Ok);
        assert_eq!(utpc_element_mul(a, inv, &mut prod), UtpcStatus::Ok);
        assert_eq!(entries(prod), vec![0; 6]);

        for e in [a, b, c, x, y, back, inv, prod] {
            utpc_element_free(e);
        }
        utpc_field_free(f);
    }
}

#[test]
fn transvections_and_identity() {
    let f = field("4");
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(utpc_transvection(f, 3, 1, 3, 2, &mut t), UtpcStatus::Ok);
        assert_eq!(entries(t), vec![0, 2, 0]);
        let mut e = ptr::null_mut();
        assert_eq!(utpc_element_identity(f, 3, &mut e), UtpcStatus::Ok);
        assert_eq!(entries(e), vec![0, 0, 0]);
        let mut q = 0;
        assert_eq!(utpc_field_order(f, &mut q), UtpcStatus::Ok);
        assert_eq!(q, 4);
        utpc_element_free(t);
        utpc_element_free(e);
        utpc_field_free(f);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(utpc_field_new(6, 1, &mut f), UtpcStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert!(f.is_null());

        let f2 = field("2");
        let f3 = field("3");
        let a = element(f2, 3, &[1, 0, 1]);
        let b = element(f3, 3, &[1, 0, 1]);
        let c = element(f2, 4, &[0; 6]);
        let mut out = ptr::null_mut();
        assert_eq!(utpc_element_mul(a, b, &mut out), UtpcStatus::FieldMismatch);
        assert_eq!(utpc_element_mul(a, c, &mut out), UtpcStatus::DimensionMismatch);
        let (mut x, mut y) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(utpc_factor_commutator(a, &mut x, &mut y), UtpcStatus::Precondition);
        assert_eq!(utpc_element_inverse(ptr::null(), &mut out), UtpcStatus::NullPointer);
        assert_eq!(utpc_element_inverse(a, ptr::null_mut()), UtpcStatus::NullPointer);

        let mut small = [0u8; 2];
        assert_eq!(utpc_element_entries(a, small.as_mut_ptr(), 2), UtpcStatus::InvalidArgument);

        let mut bad = ptr::null_mut();
        assert_eq!(utpc_element_new(f2, 3, [1u8, 2, 0].as_ptr(), 3, &mut bad), UtpcStatus::InvalidArgument);

        let mut id = ptr::null_mut();
        assert_eq!(utpc_element_identity(f2, 2, &mut id), UtpcStatus::Ok);
        assert!(last_error().is_empty());

        for e in [a, b, c, id] {
            utpc_element_free(e);
        }
        utpc_field_free(f2);
        utpc_field_free(f3);
    }
}

#[test]
fn identities_and_enumeration() {
    let f = field("2");
    unsafe {
        let mut passed = false;
        assert_eq!(utpc_verify_identities(f, 4, true, 0, 0, &mut passed), UtpcStatus::Ok);
        assert!(passed);

        let mut s = ptr::null_mut();
        assert_eq!(utpc_enumerate_count(f, 3, false, 100_000_000, &mut s), UtpcStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "48");
        utpc_string_free(s);

        assert_eq!(utpc_enumerate_count(f, 3, false, 1, &mut s), UtpcStatus::BudgetExceeded);
        utpc_field_free(f);
    }
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/utpc.h")).unwrap();
    for name in ["utpc_element_commutator", "utpc_factor_commutator", "UTPC_STATUS_BUDGET_EXCEEDED", "typedef struct UtpcElement"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles `tests/c/smoke.c` against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libutpc_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let exe = std::env::temp_dir().join(format!("utpc_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim().split(' ').count(), 3);
}
