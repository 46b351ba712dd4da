//! C ABI for `utpc`: opaque field and element handles, status codes and a
//! thread-local error message.
//!
//! Every function returns a [`UtpcStatus`]; results come back through out
//! pointers. Handles returned through out pointers are owned by the caller and
//! released with the matching `_free` function. Strings returned by the library
//! are released with [`utpc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use utpc::enumerate::{enumerate_pc_maps, Constraint, GroupTable, DEFAULT_BOUND};
use utpc::factor::factor_commutator;
use utpc::identities::{sweep, SweepMode};
use utpc::{Error, Field, UTElement};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UtpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FieldMismatch = 3,
    DimensionMismatch = 4,
    Precondition = 5,
    BudgetExceeded = 6,
    Panic = 7,
}

/// A finite field `F_q`.
pub struct UtpcField(Field);

/// An element of `UT(n, F_q)`.
pub struct UtpcElement(UTElement);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> UtpcStatus {
    match e {
        Error::FieldMismatch { .. } => UtpcStatus::FieldMismatch,
        Error::DimensionMismatch { .. } => UtpcStatus::DimensionMismatch,
        Error::Precondition(_) | Error::NoDecomposition(_) => UtpcStatus::Precondition,
        Error::BudgetExceeded { .. } => UtpcStatus::BudgetExceeded,
        _ => UtpcStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into [`UtpcStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), UtpcStatus>) -> UtpcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            UtpcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            UtpcStatus::Panic
        }
    }
}

fn lift<T>(r: utpc::Result<T>) -> Result<T, UtpcStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, UtpcStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument");
        UtpcStatus::NullPointer
    })
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), UtpcStatus> {
    if out.is_null() {
        set_error("null out pointer");
        return Err(UtpcStatus::NullPointer);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), UtpcStatus> {
    if out.is_null() {
        set_error("null out pointer");
        return Err(UtpcStatus::NullPointer);
    }
    *out = value;
    Ok(())
}

/// Message for the last failing call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn utpc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates `F_{p^k}`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn utpc_field_new(p: u32, k: u32, out: *mut *mut UtpcField) -> UtpcStatus {
    guard(|| put(out, UtpcField(lift(Field::new(p, k))?)))
}

/// # Safety
/// `field` must come from [`utpc_field_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn utpc_field_free(field: *mut UtpcField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn utpc_field_order(field: *const UtpcField, out: *mut u32) -> UtpcStatus {
    guard(|| write(out, get(field)?.0.order() as u32))
}

/// Builds an element of `UT(n, F)` from `n(n-1)/2` row-major strictly-upper entries.
///
/// # Safety
/// `entries` must point to `len` bytes; `field` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_new(
    field: *const UtpcField,
    n: usize,
    entries: *const u8,
    len: usize,
    out: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| {
        let f = &get(field)?.0;
        let data = if len == 0 { &[][..] } else { std::slice::from_raw_parts(get(entries)?, len) };
        put(out, UtpcElement(lift(UTElement::from_entries(n, f, data.to_vec()))?))
    })
}

/// The identity of `UT(n, F)`.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_identity(
    field: *const UtpcField,
    n: usize,
    out: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| {
        if n < 1 {
            set_error("dimension must be at least 1");
            return Err(UtpcStatus::InvalidArgument);
        }
        put(out, UtpcElement(UTElement::identity(n, &get(field)?.0)))
    })
}

/// `t_{ij}(alpha)` in `UT(n, F)`, 1-based indices.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn utpc_transvection(
    field: *const UtpcField,
    n: usize,
    i: usize,
    j: usize,
    alpha: u8,
    out: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| put(out, UtpcElement(lift(UTElement::transvection_raw(n, &get(field)?.0, i, j, alpha))?)))
}

/// # Safety
/// `element` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_free(element: *mut UtpcElement) {
    if !element.is_null() {
        drop(Box::from_raw(element));
    }
}

/// # Safety
/// `element` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_dim(element: *const UtpcElement, out: *mut usize) -> UtpcStatus {
    guard(|| write(out, get(element)?.0.n()))
}

/// Copies the strictly-upper entries into `buf`, which must hold `n(n-1)/2` bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_entries(element: *const UtpcElement, buf: *mut u8, len: usize) -> UtpcStatus {
    guard(|| {
        let e = get(element)?.0.entries();
        if len < e.len() {
            set_error(format!("buffer holds {len} entries, need {}", e.len()));
            return Err(UtpcStatus::InvalidArgument);
        }
        if buf.is_null() && !e.is_empty() {
            set_error("null buffer");
            return Err(UtpcStatus::NullPointer);
        }
        ptr::copy_nonoverlapping(e.as_ptr(), buf, e.len());
        Ok(())
    })
}

/// `out = a b`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_mul(
    a: *const UtpcElement,
    b: *const UtpcElement,
    out: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| put(out, UtpcElement(lift(get(a)?.0.multiply(&get(b)?.0))?)))
}

/// `out = a^{-1}`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_inverse(a: *const UtpcElement, out: *mut *mut UtpcElement) -> UtpcStatus {
    guard(|| put(out, UtpcElement(get(a)?.0.inverse())))
}

/// `out = [a, b] = a b a^{-1} b^{-1}`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_commutator(
    a: *const UtpcElement,
    b: *const UtpcElement,
    out: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| put(out, UtpcElement(lift(get(a)?.0.commutator(&get(b)?.0))?)))
}

/// Whether every first-superdiagonal entry of `a` is zero.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_in_derived(a: *const UtpcElement, out: *mut bool) -> UtpcStatus {
    guard(|| write(out, get(a)?.0.in_derived()))
}

/// Whether `a` and `b` are equal.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_element_equal(a: *const UtpcElement, b: *const UtpcElement, out: *mut bool) -> UtpcStatus {
    guard(|| write(out, get(a)?.0 == get(b)?.0))
}

/// `b`, `c` with `[b, c] = a`; fails with `UTPC_STATUS_PRECONDITION` outside the
/// derived subgroup.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn utpc_factor_commutator(
    a: *const UtpcElement,
    out_b: *mut *mut UtpcElement,
    out_c: *mut *mut UtpcElement,
) -> UtpcStatus {
    guard(|| {
        if out_b.is_null() || out_c.is_null() {
            set_error("null out pointer");
            return Err(UtpcStatus::NullPointer);
        }
        let (b, c) = lift(factor_commutator(&get(a)?.0))?;
        put(out_b, UtpcElement(b))?;
        put(out_c, UtpcElement(c))
    })
}

/// Runs every identity check on `UT(n, F)`: exhaustively when `exhaustive`,
/// else on `count` random instances per identity drawn from `seed`.
/// Writes whether all of them held.
///
/// # Safety
/// `field` and `passed` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn utpc_verify_identities(
    field: *const UtpcField,
    n: usize,
    exhaustive: bool,
    count: usize,
    seed: u64,
    passed: *mut bool,
) -> UtpcStatus {
    guard(|| {
        let mode = if exhaustive { SweepMode::Exhaustive } else { SweepMode::Random { count, seed } };
        let reports = lift(sweep(n, &get(field)?.0, mode))?;
        write(passed, reports.iter().all(|r| r.passed()))
    })
}

/// Counts the PC-maps of `UT(n, F)` (only those fixing every transvection when
/// `almost_identity`) and writes the decimal count as a new string.
///
/// # Safety
/// `field` and `out` must be valid pointers; release the string with [`utpc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn utpc_enumerate_count(
    field: *const UtpcField,
    n: usize,
    almost_identity: bool,
    budget: u64,
    out: *mut *mut c_char,
) -> UtpcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return Err(UtpcStatus::NullPointer);
        }
        let t = Arc::new(lift(GroupTable::build_bounded(n, &get(field)?.0, DEFAULT_BOUND))?);
        let c = if almost_identity { Constraint::AlmostIdentity } else { Constraint::None };
        let count = lift(enumerate_pc_maps(t, c, budget))?.set.count().to_string();
        *out = CString::new(count).expect("digits contain no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn utpc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a NUL-terminated order string such as `"9"` or `"3^2"`.
///
/// # Safety
/// `q` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn utpc_field_from_order(q: *const c_char, out: *mut *mut UtpcField) -> UtpcStatus {
    guard(|| {
        let s = CStr::from_ptr(get(q)?).to_str().map_err(|e| {
            set_error(e.to_string());
            UtpcStatus::InvalidArgument
        })?;
        put(out, UtpcField(lift(Field::from_order_str(s))?))
    })
}
