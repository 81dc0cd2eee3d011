//! C ABI for the majority index.
//!
//! The index is exposed as an opaque handle; every fallible call returns a
//! status code and writes results through out-pointers. The matching header
//! lives in `include/rmaj.h` and is kept in sync by the layout test below.

use std::ptr;
use std::slice;

use rmaj::encoding::MajorityEncoding;
use rmaj::Error;

/// Opaque index handle.
pub struct RmajIndex {
    enc: MajorityEncoding,
}

pub const RMAJ_OK: i32 = 0;
/// Invalid build parameters (empty array, threshold outside (0, 1), ...).
pub const RMAJ_ERR_INVALID: i32 = 1;
/// Query endpoints outside `1 <= i <= j <= n`.
pub const RMAJ_ERR_RANGE: i32 = 2;
/// Malformed container bytes.
pub const RMAJ_ERR_FORMAT: i32 = 3;
/// A required pointer argument was null.
pub const RMAJ_ERR_NULL: i32 = 4;
/// The positions buffer was too small; `count` holds the required size.
pub const RMAJ_ERR_BUFFER: i32 = 5;

fn status_of(e: &Error) -> i32 {
    match e {
        Error::OutOfRange { .. } => RMAJ_ERR_RANGE,
        Error::Format(_) => RMAJ_ERR_FORMAT,
        Error::Invalid(_) | Error::Addressing(_) => RMAJ_ERR_INVALID,
    }
}

/// Build an index over `values[0..n]` with threshold `p/q`; on success
/// writes a handle to `out`. The values are not retained.
///
/// # Safety
/// `values` must point to `n` readable elements and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_build(
    values: *const u64,
    n: u64,
    p: u64,
    q: u64,
    out: *mut *mut RmajIndex,
) -> i32 {
    if values.is_null() || out.is_null() {
        return RMAJ_ERR_NULL;
    }
    let a = slice::from_raw_parts(values, n as usize);
    match MajorityEncoding::build(a, p, q) {
        Ok(enc) => {
            *out = Box::into_raw(Box::new(RmajIndex { enc }));
            RMAJ_OK
        }
        Err(e) => {
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// Deserialize an index container.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_from_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut RmajIndex,
) -> i32 {
    if bytes.is_null() || out.is_null() {
        return RMAJ_ERR_NULL;
    }
    match MajorityEncoding::from_bytes(slice::from_raw_parts(bytes, len)) {
        Ok(enc) => {
            *out = Box::into_raw(Box::new(RmajIndex { enc }));
            RMAJ_OK
        }
        Err(e) => {
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// Serialize the index; writes a heap buffer to `out`/`len`. Release it
/// with `rmaj_bytes_free`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_to_bytes(
    idx: *const RmajIndex,
    out: *mut *mut u8,
    len: *mut usize,
) -> i32 {
    if idx.is_null() || out.is_null() || len.is_null() {
        return RMAJ_ERR_NULL;
    }
    let bytes = (*idx).enc.to_bytes().into_boxed_slice();
    *len = bytes.len();
    *out = Box::into_raw(bytes) as *mut u8;
    RMAJ_OK
}

/// Release a buffer returned by `rmaj_to_bytes`.
///
/// # Safety
/// `bytes`/`len` must come from `rmaj_to_bytes` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rmaj_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// Number of elements the index was built over; 0 for a null handle.
///
/// # Safety
/// `idx` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn rmaj_len(idx: *const RmajIndex) -> u64 {
    if idx.is_null() {
        0
    } else {
        (*idx).enc.n()
    }
}

/// First in-range position of every majority of `[i, j]`, ascending, into
/// `out[0..cap]`; `count` receives the number of majorities. Returns
/// `RMAJ_ERR_BUFFER` (with `count` set) if `cap` is too small.
///
/// # Safety
/// `out` must hold `cap` writable elements; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_query_positions(
    idx: *const RmajIndex,
    i: u64,
    j: u64,
    out: *mut u64,
    cap: u64,
    count: *mut u64,
) -> i32 {
    if idx.is_null() || count.is_null() || (out.is_null() && cap > 0) {
        return RMAJ_ERR_NULL;
    }
    match (*idx).enc.query_positions(i, j) {
        Ok(pos) => {
            *count = pos.len() as u64;
            if pos.len() as u64 > cap {
                return RMAJ_ERR_BUFFER;
            }
            for (k, p) in pos.iter().enumerate() {
                *out.add(k) = *p;
            }
            RMAJ_OK
        }
        Err(e) => status_of(&e),
    }
}

/// Whether `[i, j]` has any majority; writes 0 or 1.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_query_decision(
    idx: *const RmajIndex,
    i: u64,
    j: u64,
    out: *mut i32,
) -> i32 {
    if idx.is_null() || out.is_null() {
        return RMAJ_ERR_NULL;
    }
    match (*idx).enc.query_decision(i, j) {
        Ok(b) => {
            *out = b as i32;
            RMAJ_OK
        }
        Err(e) => status_of(&e),
    }
}

/// Number of distinct majorities of `[i, j]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmaj_query_count(
    idx: *const RmajIndex,
    i: u64,
    j: u64,
    out: *mut u64,
) -> i32 {
    if idx.is_null() || out.is_null() {
        return RMAJ_ERR_NULL;
    }
    match (*idx).enc.query_count(i, j) {
        Ok(c) => {
            *out = c;
            RMAJ_OK
        }
        Err(e) => status_of(&e),
    }
}

/// Release an index handle.
///
/// # Safety
/// `idx` must come from `rmaj_build`/`rmaj_from_bytes` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rmaj_free(idx: *mut RmajIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}
