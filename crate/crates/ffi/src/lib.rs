//! C ABI over `ccx-core`.
//!
//! Grids and masks cross the boundary as opaque handles owned by the caller
//! and released with the matching `_free`. Every function returns a
//! [`CcxStatus`]; on failure the message is available from
//! [`ccx_last_error_message`] on the same thread until the next call.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ccx_core::approx::{
    lower_approx_with, mixed_average_approx_with, upper_approx_with, validation_threshold,
    weighted_average_approx_with, Exterior,
};
use ccx_core::cli::{exit_code, EXIT_INPUT, EXIT_INVARIANT, EXIT_PARAMETER};
use ccx_core::error::CcxError;
use ccx_core::geometry::{convex_density_radius, hausdorff_distance};
use ccx_core::grid::{Bound, GridDomain, GridFunction, SampleMask, TransformParams};
use ccx_core::io;
use ccx_core::moreau::locality_radius;
use ccx_core::transforms::{lower_transform, mixed_transform, upper_transform, MixedKind};

/// Status codes; the nonzero ones match the command line's exit codes
/// where they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcxStatus {
    Ok = 0,
    NullPointer = 1,
    Input = 2,
    Invariant = 3,
    Parameter = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcxTransformKind {
    Lower = 0,
    Upper = 1,
    /// `C^u_τ(C^l_λ f)`
    MixedUpperOfLower = 2,
    /// `C^l_τ(C^u_λ f)`
    MixedLowerOfUpper = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcxApproxKind {
    Lower = 0,
    Upper = 1,
    /// `s L + (1 − s) U`
    Weighted = 2,
    Mixed = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcxExterior {
    Unsampled = 0,
    Clipped = 1,
    /// In K with the constant value passed alongside.
    Sampled = 2,
}

/// Opaque grid of values.
pub struct CcxGrid(GridFunction);

/// Opaque sample mask.
pub struct CcxMask(SampleMask);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &CcxError) -> CcxStatus {
    match exit_code(e) {
        EXIT_INPUT => CcxStatus::Input,
        EXIT_INVARIANT => CcxStatus::Invariant,
        EXIT_PARAMETER => CcxStatus::Parameter,
        _ => CcxStatus::Input,
    }
}

struct Fail(CcxStatus, String);

impl From<CcxError> for Fail {
    fn from(e: CcxError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CcxStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, clearing the last error on success and recording it on failure.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CcxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CcxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CcxStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn grid_ref<'a>(g: *const CcxGrid) -> Result<&'a GridFunction, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("grid"))
}

unsafe fn mask_ref<'a>(m: *const CcxMask) -> Result<&'a SampleMask, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("mask"))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(CcxStatus::Input, "path is not UTF-8".into()))
}

unsafe fn domain_arg(
    dim: usize,
    shape: *const usize,
    spacing: *const f64,
    origin: *const f64,
) -> Result<GridDomain, Fail> {
    let shape = slice(shape, dim, "shape")?.to_vec();
    let spacing = slice(spacing, dim, "spacing")?.to_vec();
    let origin = slice(origin, dim, "origin")?.to_vec();
    Ok(GridDomain::new(shape, spacing, origin)?)
}

fn emit_grid(out: &mut *mut CcxGrid, g: GridFunction) {
    *out = Box::into_raw(Box::new(CcxGrid(g)));
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ccx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ccx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New grid from row-major `values` of length `prod(shape)`.
///
/// # Safety
/// Array arguments must hold `dim` (or `prod(shape)`) readable elements;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_new(
    dim: usize,
    shape: *const usize,
    spacing: *const f64,
    origin: *const f64,
    values: *const f64,
    out: *mut *mut CcxGrid,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let d = domain_arg(dim, shape, spacing, origin)?;
        let values = slice(values, d.len(), "values")?.to_vec();
        emit_grid(out, GridFunction::new(d, values)?);
        Ok(())
    })
}

/// Releases a grid; null is ignored.
///
/// # Safety
/// `grid` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_free(grid: *mut CcxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes; 0 for null.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_len(grid: *const CcxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Number of axes; 0 for null.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_dim(grid: *const CcxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.domain().dim())
}

/// Copies the shape into `shape_out`, which holds `dim` entries.
///
/// # Safety
/// `grid` must be live; `shape_out` must hold `ccx_grid_dim(grid)` entries.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_shape(grid: *const CcxGrid, shape_out: *mut usize) -> CcxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        if shape_out.is_null() {
            return Err(null("shape_out"));
        }
        let s = g.domain().shape();
        ptr::copy_nonoverlapping(s.as_ptr(), shape_out, s.len());
        Ok(())
    })
}

/// Copies the values into `values_out`, which holds `len` entries.
///
/// # Safety
/// `grid` must be live; `values_out` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_values(
    grid: *const CcxGrid,
    values_out: *mut f64,
    len: usize,
) -> CcxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        if len != g.len() {
            return Err(Fail(
                CcxStatus::Parameter,
                format!("buffer holds {len} values, grid has {}", g.len()),
            ));
        }
        if values_out.is_null() {
            return Err(null("values_out"));
        }
        ptr::copy_nonoverlapping(g.values().as_ptr(), values_out, len);
        Ok(())
    })
}

/// Reads a CCXGRID or PGM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_read(path: *const c_char, out: *mut *mut CcxGrid) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        emit_grid(out, io::read_grid(path_arg(path)?)?);
        Ok(())
    })
}

/// Writes a CCXGRID file atomically.
///
/// # Safety
/// `grid` must be live; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ccx_grid_write(grid: *const CcxGrid, path: *const c_char) -> CcxStatus {
    guard(|| {
        io::write_grid(path_arg(path)?, grid_ref(grid)?)?;
        Ok(())
    })
}

/// Mask of the nonzero nodes of `grid`.
///
/// # Safety
/// `grid` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_mask_from_grid(grid: *const CcxGrid, out: *mut *mut CcxMask) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let m = io::mask_from_grid(grid_ref(grid)?)?;
        *out = Box::into_raw(Box::new(CcxMask(m)));
        Ok(())
    })
}

/// New mask from row-major `member` flags (nonzero = member).
///
/// # Safety
/// As [`ccx_grid_new`].
#[no_mangle]
pub unsafe extern "C" fn ccx_mask_new(
    dim: usize,
    shape: *const usize,
    spacing: *const f64,
    origin: *const f64,
    member: *const u8,
    out: *mut *mut CcxMask,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let d = domain_arg(dim, shape, spacing, origin)?;
        let member = slice(member, d.len(), "member")?.iter().map(|&b| b != 0).collect();
        *out = Box::into_raw(Box::new(CcxMask(SampleMask::new(d, member)?)));
        Ok(())
    })
}

/// Releases a mask; null is ignored.
///
/// # Safety
/// `mask` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccx_mask_free(mask: *mut CcxMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Number of member nodes; 0 for null.
///
/// # Safety
/// `mask` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccx_mask_count(mask: *const CcxMask) -> usize {
    mask.as_ref().map_or(0, |m| m.0.count())
}

/// Lower, upper or mixed transform; `tau` is read by the mixed kinds only.
///
/// # Safety
/// `grid` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_transform(
    grid: *const CcxGrid,
    kind: CcxTransformKind,
    lambda: f64,
    tau: f64,
    out: *mut *mut CcxGrid,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let f = grid_ref(grid)?;
        TransformParams::new(lambda, Bound::Infinite)?;
        let g = match kind {
            CcxTransformKind::Lower => lower_transform(f, lambda)?,
            CcxTransformKind::Upper => upper_transform(f, lambda)?,
            CcxTransformKind::MixedUpperOfLower | CcxTransformKind::MixedLowerOfUpper => {
                TransformParams::new(lambda, Bound::Infinite)?.with_tau(tau)?;
                let k = if kind == CcxTransformKind::MixedUpperOfLower {
                    MixedKind::UpperOfLower
                } else {
                    MixedKind::LowerOfUpper
                };
                mixed_transform(f, lambda, tau, k)?
            }
        };
        emit_grid(out, g);
        Ok(())
    })
}

/// Approximant of `grid` sampled on `mask`. `tau` is read by the mixed
/// kind, `s` by the weighted one, `c0` by the sampled exterior.
///
/// # Safety
/// `grid` and `mask` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_approximate(
    grid: *const CcxGrid,
    mask: *const CcxMask,
    kind: CcxApproxKind,
    lambda: f64,
    m: f64,
    s: f64,
    tau: f64,
    exterior: CcxExterior,
    c0: f64,
    out: *mut *mut CcxGrid,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let f = grid_ref(grid)?;
        let k = mask_ref(mask)?;
        let exterior = match exterior {
            CcxExterior::Unsampled => Exterior::Unsampled,
            CcxExterior::Clipped => Exterior::Clipped,
            CcxExterior::Sampled => Exterior::Sampled(c0),
        };
        let mut p = TransformParams::new(lambda, Bound::Finite(m))?;
        let g = match kind {
            CcxApproxKind::Lower => lower_approx_with(f, k, &p, exterior)?,
            CcxApproxKind::Upper => upper_approx_with(f, k, &p, exterior)?,
            CcxApproxKind::Weighted => {
                p = p.with_s(s)?;
                weighted_average_approx_with(f, k, &p, exterior)?
            }
            CcxApproxKind::Mixed => {
                p = p.with_tau(tau)?;
                mixed_average_approx_with(f, k, &p, exterior)?
            }
        };
        emit_grid(out, g);
        Ok(())
    })
}

/// Hausdorff distance between two masks on one domain.
///
/// # Safety
/// Masks must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_hausdorff_distance(
    a: *const CcxMask,
    b: *const CcxMask,
    out: *mut f64,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = hausdorff_distance(mask_ref(a)?, mask_ref(b)?)?;
        Ok(())
    })
}

/// Convex density radius of K at a node of co[K]; `Invariant` outside.
///
/// # Safety
/// `mask` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccx_convex_density_radius(
    mask: *const CcxMask,
    node: usize,
    out: *mut f64,
) -> CcxStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let k = mask_ref(mask)?;
        if node >= k.domain().len() {
            return Err(Fail(CcxStatus::Parameter, format!("node {node} out of range")));
        }
        *out = convex_density_radius(node, k)?;
        Ok(())
    })
}

/// `2√2 √(M/λ)`: transforms of data bounded by M depend on this ball only.
#[no_mangle]
pub extern "C" fn ccx_locality_radius(m: f64, lambda: f64) -> f64 {
    locality_radius(m, lambda)
}

/// `2 A0 + λ d²`; M must exceed it for the finite-M error bounds.
#[no_mangle]
pub extern "C" fn ccx_validation_threshold(a0: f64, lambda: f64, d: f64) -> f64 {
    validation_threshold(a0, lambda, d)
}
