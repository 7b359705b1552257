//! C interface to envlab.
//!
//! Spaces and subspaces cross the boundary as opaque handles that the
//! caller frees with the matching `_free` function. Every fallible call
//! returns an [`EnvlabStatus`]; on failure [`envlab_last_error`] holds a
//! message for the calling thread. Vectors are `double` arrays of the
//! ambient dimension, and collections of vectors are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use envlab::complement::{c2_formula, c2n_l1, min_projection_norm, SearchConfig};
use envlab::isometry::algebraic_envelope;
use envlab::partition::{conditional_envelope, LEVEL_TOL};
use envlab::subspace::DEFAULT_TOL;
use envlab::{Error, Space, Subspace};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    BufferTooSmall = 4,
    NoConvergence = 5,
    Failed = 6,
    Panic = 7,
}

/// A weighted ℓ_p space on finitely many atoms.
pub struct EnvlabSpace {
    inner: Space,
}

/// A linear subspace of an [`EnvlabSpace`]. Holds its own copy of the space.
pub struct EnvlabSubspace {
    inner: Subspace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EnvlabStatus {
    match e {
        Error::Dimension { .. } => EnvlabStatus::Dimension,
        Error::Domain(_) | Error::Usage(_) | Error::Parse(_) => EnvlabStatus::InvalidArgument,
        Error::Convergence(_) => EnvlabStatus::NoConvergence,
        _ => EnvlabStatus::Failed,
    }
}

fn fail(status: EnvlabStatus, msg: impl Into<String>) -> EnvlabStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), EnvlabStatus>) -> EnvlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EnvlabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(EnvlabStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: envlab::Result<T>) -> Result<T, EnvlabStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], EnvlabStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(EnvlabStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, EnvlabStatus> {
    p.as_ref().ok_or_else(|| fail(EnvlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, EnvlabStatus> {
    p.as_mut().ok_or_else(|| fail(EnvlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_vec(v: &[f64], dst: *mut f64, capacity: usize) -> Result<(), EnvlabStatus> {
    if capacity < v.len() {
        return Err(fail(EnvlabStatus::BufferTooSmall, format!("need room for {} values, got {capacity}", v.len())));
    }
    if v.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(fail(EnvlabStatus::NullPointer, "output buffer is null"));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), dst, v.len());
    Ok(())
}

fn check_len(space: &Space, len: usize) -> Result<(), EnvlabStatus> {
    lift(Error::check_dim(space.n(), len))
}

unsafe fn boxed_subspace(s: Subspace, dst: *mut *mut EnvlabSubspace) -> Result<(), EnvlabStatus> {
    let slot = out(dst, "output handle")?;
    *slot = Box::into_raw(Box::new(EnvlabSubspace { inner: s }));
    Ok(())
}

/// Message for the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn envlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn envlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a space with exponent `p` (`INFINITY` allowed) and `n` positive weights.
///
/// # Safety
/// `weights` must point to `n` readable doubles and `out_space` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn envlab_space_new(p: f64, weights: *const f64, n: usize, out_space: *mut *mut EnvlabSpace) -> EnvlabStatus {
    guard(|| {
        let w = slice(weights, n, "weights")?;
        let space = lift(Space::new(p, w.to_vec()))?;
        *out(out_space, "output handle")? = Box::into_raw(Box::new(EnvlabSpace { inner: space }));
        Ok(())
    })
}

/// # Safety
/// `space` must be null or a handle from [`envlab_space_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn envlab_space_free(space: *mut EnvlabSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn envlab_space_atoms(space: *const EnvlabSpace) -> usize {
    space.as_ref().map_or(0, |s| s.inner.n())
}

/// Weighted p-norm of `f`.
///
/// # Safety
/// `space` must be a live handle, `f` must hold `n` doubles, `norm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_space_norm(space: *const EnvlabSpace, f: *const f64, n: usize, norm: *mut f64) -> EnvlabStatus {
    guard(|| {
        let s = &handle(space, "space")?.inner;
        check_len(s, n)?;
        let v = lift(s.norm(slice(f, n, "f")?))?;
        *out(norm, "norm")? = v;
        Ok(())
    })
}

/// Duality map of `f` (‖Jf‖ = ‖f‖, ⟨Jf, f⟩ = ‖f‖²), written to `result` (room for `n` doubles).
///
/// # Safety
/// `space` must be a live handle, `f` and `result` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn envlab_space_duality_map(space: *const EnvlabSpace, f: *const f64, n: usize, result: *mut f64) -> EnvlabStatus {
    guard(|| {
        let s = &handle(space, "space")?.inner;
        check_len(s, n)?;
        let v = lift(s.duality_map(slice(f, n, "f")?))?;
        write_vec(&v, result, n)
    })
}

/// Span of `count` vectors stored row-major in `vectors` (`count × n` doubles).
///
/// # Safety
/// `space` must be a live handle, `vectors` must hold `count * n` doubles and
/// `out_subspace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_subspace_new(
    space: *const EnvlabSpace,
    vectors: *const f64,
    count: usize,
    n: usize,
    out_subspace: *mut *mut EnvlabSubspace,
) -> EnvlabStatus {
    guard(|| {
        let s = &handle(space, "space")?.inner;
        check_len(s, n)?;
        let total = count.checked_mul(n).ok_or_else(|| fail(EnvlabStatus::InvalidArgument, "count * n overflows"))?;
        let data = slice(vectors, total, "vectors")?;
        let gens: Vec<Vec<f64>> = data.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let sub = if count == 0 { Subspace::zero(s) } else { lift(Subspace::from_vectors(s, &gens, DEFAULT_TOL))? };
        boxed_subspace(sub, out_subspace)
    })
}

/// # Safety
/// `sub` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn envlab_subspace_free(sub: *mut EnvlabSubspace) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// Dimension of the subspace, or 0 for a null handle.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn envlab_subspace_dim(sub: *const EnvlabSubspace) -> usize {
    sub.as_ref().map_or(0, |s| s.inner.dim())
}

/// Reference-orthonormal basis, row-major `dim × n`, into a buffer of `capacity` doubles.
///
/// # Safety
/// `sub` must be a live handle and `basis` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn envlab_subspace_basis(sub: *const EnvlabSubspace, basis: *mut f64, capacity: usize) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        let flat: Vec<f64> = y.basis().concat();
        write_vec(&flat, basis, capacity)
    })
}

/// Whether `f` lies in the subspace up to relative tolerance `tol`.
///
/// # Safety
/// `sub` must be a live handle, `f` must hold `n` doubles, `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_subspace_contains(
    sub: *const EnvlabSubspace,
    f: *const f64,
    n: usize,
    tol: f64,
    result: *mut bool,
) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        check_len(y.space(), n)?;
        let v = lift(y.contains(slice(f, n, "f")?, tol))?;
        *out(result, "result")? = v;
        Ok(())
    })
}

/// Range of the conditional expectation onto the partition generated by the subspace.
///
/// # Safety
/// `sub` must be a live handle and `envelope` writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_conditional_envelope(sub: *const EnvlabSubspace, envelope: *mut *mut EnvlabSubspace) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        boxed_subspace(lift(conditional_envelope(y, LEVEL_TOL))?, envelope)
    })
}

/// Smallest subspace containing the argument that is invariant under its
/// stabilizer in the isometry group.
///
/// # Safety
/// `sub` must be a live handle and `envelope` writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_algebraic_envelope(sub: *const EnvlabSubspace, envelope: *mut *mut EnvlabSubspace) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        boxed_subspace(lift(algebraic_envelope(y.space(), y, DEFAULT_TOL))?, envelope)
    })
}

/// Vector sublattice generated by the subspace.
///
/// # Safety
/// `sub` must be a live handle and `closure` writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_lattice_closure(sub: *const EnvlabSubspace, closure: *mut *mut EnvlabSubspace) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        boxed_subspace(lift(y.lattice_closure())?, closure)
    })
}

/// Closed-form constant c₂(p) built from Γ((p+1)/2) and Γ((p′+1)/2); +∞ at p ∈ {1, ∞}.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_c2(p: f64, value: *mut f64) -> EnvlabStatus {
    guard(|| {
        let v = lift(c2_formula(p))?;
        *out(value, "value")? = v;
        Ok(())
    })
}

/// Projection constant of ℓ₂ⁿ inside L₁.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_c2n_l1(n: usize, value: *mut f64) -> EnvlabStatus {
    guard(|| {
        let v = lift(c2n_l1(n))?;
        *out(value, "value")? = v;
        Ok(())
    })
}

/// Bounds on the minimal norm of a projection onto the subspace.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EnvlabProjectionBounds {
    /// Norm of the best projection found.
    pub upper: f64,
    /// Proven lower bound on the minimum.
    pub lower: f64,
    /// Rigorous upper bound on the norm of the best projection.
    pub certified_upper: f64,
    /// True when `lower == upper` is an exact optimum.
    pub exact: bool,
}

/// Minimal projection norm search with the default budget and the given seed.
///
/// # Safety
/// `sub` must be a live handle and `bounds` writable.
#[no_mangle]
pub unsafe extern "C" fn envlab_min_projection_norm(sub: *const EnvlabSubspace, seed: u64, bounds: *mut EnvlabProjectionBounds) -> EnvlabStatus {
    guard(|| {
        let y = &handle(sub, "subspace")?.inner;
        let cfg = SearchConfig { seed, ..SearchConfig::default() };
        let r = lift(min_projection_norm(y, &cfg))?;
        *out(bounds, "bounds")? = EnvlabProjectionBounds {
            upper: r.upper_bound,
            lower: r.lower_bound,
            certified_upper: r.certified_upper,
            exact: r.exact,
        };
        Ok(())
    })
}
