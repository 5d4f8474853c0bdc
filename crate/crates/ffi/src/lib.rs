//! C ABI for `hausdim`.
//!
//! Objects are opaque handles created by `hd_*_new` functions and released
//! by the matching `hd_*_free`. Every fallible call returns an [`HdStatus`];
//! the message of the most recent failure on the calling thread is available
//! through [`hd_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hausdim::kappa::KappaProblem;
use hausdim::riesz::{bound_prop5, bound_theorem3, fan_main_term, kappa_prime_riesz, RieszParams};
use hausdim::zq::in_cb;
use hausdim::{dimension_bound, DimensionBound, Error, ResidueSet};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    InvalidInput = 1,
    Resource = 2,
    Numeric = 3,
    Precondition = 4,
    NullPointer = 5,
    Panic = 6,
}

/// A residue set `B ⊂ {1, …, q-1}`.
pub struct HdResidueSet(ResidueSet);

/// The dimension bound of a residue set.
pub struct HdDimensionBound(DimensionBound);

/// Scalar fields of a dimension bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HdBoundSummary {
    pub q: usize,
    pub kappa_prime_1: f64,
    pub raw_bound: f64,
    pub bound: f64,
    pub subgroup_bound: f64,
    pub subgroup_order: usize,
    pub delta: f64,
    pub vertex_count: usize,
    pub proper_inclusion: bool,
    pub symmetrized: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> HdStatus {
    match err {
        Error::InvalidInput(_) => HdStatus::InvalidInput,
        Error::Resource(_) => HdStatus::Resource,
        Error::Numeric(_) => HdStatus::Numeric,
        Error::Precondition(_) => HdStatus::Precondition,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HdStatus>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HdStatus::Panic
        }
    }
}

fn lib<T>(r: hausdim::Result<T>) -> Result<T, HdStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), HdStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(HdStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message (NUL-terminated, truncated to `cap`) into
/// `buf` and returns the full message length excluding the terminator.
/// Passing a null `buf` only queries the length.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn hd_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates the residue set `{members[0], …, members[len-1]}` modulo `q`.
///
/// # Safety
/// `members` must be valid for `len` reads (or null when `len == 0`);
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_residue_set_new(
    q: usize,
    members: *const usize,
    len: usize,
    out: *mut *mut HdResidueSet,
) -> HdStatus {
    guard(|| {
        non_null(out, "out")?;
        let slice = if len == 0 {
            &[][..]
        } else {
            non_null(members, "members")?;
            std::slice::from_raw_parts(members, len)
        };
        let set = lib(ResidueSet::new(q, slice.iter().copied()))?;
        *out = Box::into_raw(Box::new(HdResidueSet(set)));
        Ok(())
    })
}

/// Creates a residue set from a comma-separated list such as `"1,3"`.
///
/// # Safety
/// `list` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_residue_set_parse(q: usize, list: *const c_char, out: *mut *mut HdResidueSet) -> HdStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(list, "list")?;
        let text = CStr::from_ptr(list).to_str().map_err(|_| {
            set_error("list is not valid UTF-8");
            HdStatus::InvalidInput
        })?;
        let set = lib(ResidueSet::parse(q, text))?;
        *out = Box::into_raw(Box::new(HdResidueSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle from `hd_residue_set_new`/`hd_residue_set_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_residue_set_free(set: *mut HdResidueSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Whether `n` lies in `C_B`.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_in_cb(n: i64, set: *const HdResidueSet, out: *mut bool) -> HdStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        *out = in_cb(n, &(*set).0);
        Ok(())
    })
}

/// `κ(θ)` for a symmetric residue set, `θ ∈ (0, 1]`.
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_kappa(set: *const HdResidueSet, theta: f64, out: *mut f64) -> HdStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let problem = lib(KappaProblem::new(&(*set).0))?;
        *out = lib(problem.kappa(theta))?;
        Ok(())
    })
}

/// Computes the dimension bound of `set` (symmetrized if needed).
///
/// # Safety
/// `set` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_dimension_bound_new(set: *const HdResidueSet, out: *mut *mut HdDimensionBound) -> HdStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let db = lib(dimension_bound(&(*set).0))?;
        *out = Box::into_raw(Box::new(HdDimensionBound(db)));
        Ok(())
    })
}

/// # Safety
/// `bound` must be null or a handle from `hd_dimension_bound_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_dimension_bound_free(bound: *mut HdDimensionBound) {
    if !bound.is_null() {
        drop(Box::from_raw(bound));
    }
}

/// # Safety
/// `bound` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_dimension_bound_summary(bound: *const HdDimensionBound, out: *mut HdBoundSummary) -> HdStatus {
    guard(|| {
        non_null(bound, "bound")?;
        non_null(out, "out")?;
        let d = &(*bound).0;
        *out = HdBoundSummary {
            q: d.q,
            kappa_prime_1: d.kappa_prime_1,
            raw_bound: d.raw_bound,
            bound: d.bound,
            subgroup_bound: d.subgroup_bound,
            subgroup_order: d.subgroup_order,
            delta: d.delta,
            vertex_count: d.vertex_count,
            proper_inclusion: d.proper_inclusion,
            symmetrized: d.symmetrized,
        };
        Ok(())
    })
}

/// Copies the witness vertex (length `q`) into `buf`. `len` receives `q`
/// in any case; if `cap < q` nothing is copied and `RESOURCE` is returned.
///
/// # Safety
/// `bound` must be a live handle, `buf` valid for `cap` writes (or null
/// when `cap == 0`), `len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_dimension_bound_witness(
    bound: *const HdDimensionBound,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HdStatus {
    guard(|| {
        non_null(bound, "bound")?;
        non_null(len, "len")?;
        let w = &(*bound).0.witness_vertex;
        *len = w.len();
        if cap < w.len() {
            set_error(format!("buffer holds {cap} values, witness has {}", w.len()));
            return Err(HdStatus::Resource);
        }
        non_null(buf, "buf")?;
        ptr::copy_nonoverlapping(w.as_ptr(), buf, w.len());
        Ok(())
    })
}

fn scalar(out: *mut f64, f: impl FnOnce() -> hausdim::Result<f64>) -> HdStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = lib(f())?;
        // SAFETY: checked non-null; the caller guarantees validity
        unsafe { *out = v };
        Ok(())
    })
}

/// Closed-form `κ'(1)` for Riesz products with base `q`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_kappa_prime_riesz(q: usize, out: *mut f64) -> HdStatus {
    scalar(out, || kappa_prime_riesz(q))
}

/// Certified Riesz-product bound `1 + κ'(1)/log q`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_theorem3(q: usize, out: *mut f64) -> HdStatus {
    scalar(out, || bound_theorem3(q))
}

/// Explicit elementary Riesz-product estimate.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_bound_prop5(q: usize, out: *mut f64) -> HdStatus {
    scalar(out, || bound_prop5(q))
}

/// Fan's main term `1 - h(a)/log q`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hd_fan_main_term(a: f64, q: usize, out: *mut f64) -> HdStatus {
    scalar(out, || Ok(fan_main_term(RieszParams::new(a, q)?)))
}
