//! C ABI over the laboratory's kernels: opaque handles, integer status
//! codes, a thread-local error message, and a text-config experiment runner
//! that mirrors the CLI contract (same keys, same exit semantics).
//!
//! The committed header `include/liouville_lab.h` is generated by cbindgen;
//! rebuild it with `cargo build -p liouville-lab-ffi --features regen-header`.
//!
//! Conventions: every constructor writes through an out-pointer and returns
//! a status; every handle has a matching `_free`; passing NULL where a
//! handle is expected yields `NLL_STATUS_NULL_POINTER`. Handles are not
//! thread-safe individually, but distinct handles may be used from distinct
//! threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use liouville_lab::analysis::{entire_mass, region_mass, Coefficient};
use liouville_lab::cli::{config_from_text, execute};
use liouville_lab::closed_form::{
    bubble_local, bubble_nonlocal, kelvin, rescale, rigged_family, BubbleParams, ClosedFormField,
};
use liouville_lab::error::Error;
use liouville_lab::grid::{
    fd_laplacian, integrate, Grid2D, Point, PowerTail, RegionMask, ScalarField,
};
use liouville_lab::potential::{
    dirichlet_disk_solve, log_potential, riesz_direct, riesz_fft, RieszConfig,
};
use liouville_lab::report::{to_csv, to_json, OutputFormat};

/// Status codes returned by every fallible entry point. The first four match
/// the CLI exit statuses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NllStatus {
    NllStatusOk = 0,
    NllStatusToleranceFailure = 1,
    NllStatusConfigError = 2,
    NllStatusNumericFailure = 3,
    NllStatusInvalidArgument = 4,
    NllStatusNullPointer = 5,
    NllStatusPanic = 6,
}

use NllStatus::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> NllStatus {
    match err {
        Error::Config(_) => NllStatusConfigError,
        Error::NonFinite(_) => NllStatusNumericFailure,
        _ => NllStatusInvalidArgument,
    }
}

/// Opaque grid handle.
pub struct NllGrid(Grid2D);
/// Opaque sampled-field handle.
pub struct NllField(ScalarField);
/// Opaque region-mask handle.
pub struct NllMask(RegionMask);
/// Opaque closed-form profile handle.
pub struct NllForm(ClosedFormField);

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null handle");
                return NllStatusNullPointer;
            }
        }
    };
}

macro_rules! out_ptr {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null out-pointer");
                return NllStatusNullPointer;
            }
        }
    };
}

fn guarded(f: impl FnOnce() -> NllStatus) -> NllStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NllStatusPanic
        }
    }
}

fn emit<T>(result: Result<T, Error>, out: &mut *mut T) -> NllStatus {
    match result {
        Ok(v) => {
            *out = Box::into_raw(Box::new(v));
            NllStatusOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nll_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Copy the last error message on this thread into `buf` (truncating) and
/// return its full length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to `len` writable bytes (or be NULL with `len` 0).
#[no_mangle]
pub unsafe extern "C" fn nll_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() - 1
    })
}

/// Create a cell-centered grid covering the square of the given half-width.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn nll_grid_new(
    center_x: f64,
    center_y: f64,
    half_width: f64,
    n: usize,
    out: *mut *mut NllGrid,
) -> NllStatus {
    guarded(|| {
        let out = out_ptr!(out);
        emit(
            Grid2D::new(Point::new(center_x, center_y), half_width, n).map(NllGrid),
            out,
        )
    })
}

/// # Safety
/// `grid` must be a live handle from this library (or NULL, a no-op).
#[no_mangle]
pub unsafe extern "C" fn nll_grid_free(grid: *mut NllGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Cell spacing h = 2 half_width / n.
///
/// # Safety
/// `grid` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nll_grid_spacing(grid: *const NllGrid, out: *mut f64) -> NllStatus {
    guarded(|| {
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        *out = grid.0.spacing();
        NllStatusOk
    })
}

/// Disk mask with exact-area boundary weights.
///
/// # Safety
/// `grid` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_mask_disk(
    grid: *const NllGrid,
    center_x: f64,
    center_y: f64,
    radius: f64,
    out: *mut *mut NllMask,
) -> NllStatus {
    guarded(|| {
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        emit(
            RegionMask::disk(&grid.0, Point::new(center_x, center_y), radius).map(NllMask),
            out,
        )
    })
}

/// Annulus mask with exact-area boundary weights.
///
/// # Safety
/// `grid` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_mask_annulus(
    grid: *const NllGrid,
    center_x: f64,
    center_y: f64,
    r_in: f64,
    r_out: f64,
    out: *mut *mut NllMask,
) -> NllStatus {
    guarded(|| {
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        emit(
            RegionMask::annulus(&grid.0, Point::new(center_x, center_y), r_in, r_out).map(NllMask),
            out,
        )
    })
}

/// Covered area of the mask (honoring fractional boundary weights).
///
/// # Safety
/// `mask` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nll_mask_area(mask: *const NllMask, out: *mut f64) -> NllStatus {
    guarded(|| {
        let mask = nonnull!(mask);
        let out = out_ptr!(out);
        *out = mask.0.area();
        NllStatusOk
    })
}

/// # Safety
/// `mask` must be a live handle (or NULL, a no-op).
#[no_mangle]
pub unsafe extern "C" fn nll_mask_free(mask: *mut NllMask) {
    if !mask.is_null() {
        drop(unsafe { Box::from_raw(mask) });
    }
}

/// The rescaled local entire profile U_0(delta (x - x0)) + 2 log delta.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_bubble_local(
    x0_x: f64,
    x0_y: f64,
    delta: f64,
    out: *mut *mut NllForm,
) -> NllStatus {
    guarded(|| {
        let out = out_ptr!(out);
        emit(
            bubble_local(Point::new(x0_x, x0_y), delta).map(NllForm),
            out,
        )
    })
}

/// The rescaled entire profile of the nonlocal problem.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_bubble_nonlocal(
    mu: f64,
    x0_x: f64,
    x0_y: f64,
    delta: f64,
    out: *mut *mut NllForm,
) -> NllStatus {
    guarded(|| {
        let out = out_ptr!(out);
        emit(
            BubbleParams::new(mu, Point::new(x0_x, x0_y), delta)
                .map(|p| NllForm(bubble_nonlocal(p))),
            out,
        )
    })
}

/// The rigged-family profile u_k; `which` selects the profile (0) or its
/// exact driving field F_k (1).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_rigged(
    k: u32,
    mu: f64,
    which: i32,
    out: *mut *mut NllForm,
) -> NllStatus {
    guarded(|| {
        let out = out_ptr!(out);
        emit(
            rigged_family(k, mu).and_then(|(u, f, _)| match which {
                0 => Ok(NllForm(u)),
                1 => Ok(NllForm(f)),
                other => Err(Error::InvalidParameter(format!(
                    "rigged selector must be 0 (profile) or 1 (driving field), got {other}"
                ))),
            }),
            out,
        )
    })
}

/// Constant profile.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_constant(value: f64, out: *mut *mut NllForm) -> NllStatus {
    guarded(|| {
        let out = out_ptr!(out);
        emit(Ok(NllForm(ClosedFormField::Constant(value))), out)
    })
}

/// Apply the rescaling u -> u(delta (. - x0)) + 2 log delta.
///
/// # Safety
/// `form` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_rescale(
    form: *const NllForm,
    x0_x: f64,
    x0_y: f64,
    delta: f64,
    out: *mut *mut NllForm,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let out = out_ptr!(out);
        emit(
            rescale(&form.0, Point::new(x0_x, x0_y), delta).map(NllForm),
            out,
        )
    })
}

/// Apply the logarithmic Kelvin transform about (x0, sigma).
///
/// # Safety
/// `form` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_form_kelvin(
    form: *const NllForm,
    x0_x: f64,
    x0_y: f64,
    sigma: f64,
    out: *mut *mut NllForm,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let out = out_ptr!(out);
        emit(
            kelvin(&form.0, Point::new(x0_x, x0_y), sigma).map(NllForm),
            out,
        )
    })
}

/// Evaluate the profile at a point.
///
/// # Safety
/// `form` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nll_form_eval(
    form: *const NllForm,
    x: f64,
    y: f64,
    out: *mut f64,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let out = out_ptr!(out);
        let v = form.0.eval(Point::new(x, y));
        *out = v;
        if v.is_nan() {
            set_error("profile undefined at the requested point");
            NllStatusNumericFailure
        } else {
            NllStatusOk
        }
    })
}

/// # Safety
/// `form` must be a live handle (or NULL, a no-op).
#[no_mangle]
pub unsafe extern "C" fn nll_form_free(form: *mut NllForm) {
    if !form.is_null() {
        drop(unsafe { Box::from_raw(form) });
    }
}

/// Sample e^{scale * form} (use scale = 0 to get the field itself via
/// `nll_field_sample`) at every grid node.
///
/// # Safety
/// `form` and `grid` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_field_sample_exp(
    form: *const NllForm,
    scale: f64,
    grid: *const NllGrid,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        emit(form.0.sample_exp(scale, &grid.0).map(NllField), out)
    })
}

/// Sample the profile at every grid node.
///
/// # Safety
/// `form` and `grid` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_field_sample(
    form: *const NllForm,
    grid: *const NllGrid,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        emit(form.0.sample(&grid.0).map(NllField), out)
    })
}

/// Number of values in the field buffer (n * n).
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nll_field_len(field: *const NllField, out: *mut usize) -> NllStatus {
    guarded(|| {
        let field = nonnull!(field);
        let out = out_ptr!(out);
        *out = field.0.values().len();
        NllStatusOk
    })
}

/// Copy the row-major field values into `buf` (which holds `len` doubles);
/// fails unless `len` matches n * n exactly.
///
/// # Safety
/// `field` must be live; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nll_field_values(
    field: *const NllField,
    buf: *mut f64,
    len: usize,
) -> NllStatus {
    guarded(|| {
        let field = nonnull!(field);
        if buf.is_null() {
            set_error("null buffer");
            return NllStatusNullPointer;
        }
        let values = field.0.values();
        if len != values.len() {
            set_error("buffer length does not match n * n");
            return NllStatusInvalidArgument;
        }
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, len) };
        NllStatusOk
    })
}

/// # Safety
/// `field` must be a live handle (or NULL, a no-op).
#[no_mangle]
pub unsafe extern "C" fn nll_field_free(field: *mut NllField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// 5-point Laplacian of the field (outermost ring zeroed).
///
/// # Safety
/// `field` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_fd_laplacian(
    field: *const NllField,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let field = nonnull!(field);
        let out = out_ptr!(out);
        emit(Ok(NllField(fd_laplacian(&field.0))), out)
    })
}

/// Midpoint quadrature over the masked cells; with `tail_exponent > 2` the
/// analytic radial tail c |x - center|^-a beyond `tail_start` is added.
/// Pass `tail_coefficient = 0` and `tail_exponent = 0` for no tail.
///
/// # Safety
/// `field` and `mask` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_integrate(
    field: *const NllField,
    mask: *const NllMask,
    tail_center_x: f64,
    tail_center_y: f64,
    tail_coefficient: f64,
    tail_exponent: f64,
    tail_start: f64,
    out: *mut f64,
) -> NllStatus {
    guarded(|| {
        let field = nonnull!(field);
        let mask = nonnull!(mask);
        let out = out_ptr!(out);
        let tail = if tail_coefficient == 0.0 && tail_exponent == 0.0 {
            None
        } else {
            Some(PowerTail {
                center: Point::new(tail_center_x, tail_center_y),
                coefficient: tail_coefficient,
                exponent: tail_exponent,
                start_radius: tail_start,
            })
        };
        match integrate(&field.0, &mask.0, tail.as_ref()) {
            Ok(v) => {
                *out = v;
                NllStatusOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Brute-force Riesz potential of the masked density at explicit targets.
/// `xs`, `ys`, and `values` all hold `count` doubles.
///
/// # Safety
/// Handles must be live; the three arrays must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn nll_riesz_direct(
    density: *const NllField,
    support: *const NllMask,
    mu: f64,
    xs: *const f64,
    ys: *const f64,
    count: usize,
    values: *mut f64,
) -> NllStatus {
    guarded(|| {
        let density = nonnull!(density);
        let support = nonnull!(support);
        if xs.is_null() || ys.is_null() || values.is_null() {
            set_error("null target or output array");
            return NllStatusNullPointer;
        }
        let xs = unsafe { std::slice::from_raw_parts(xs, count) };
        let ys = unsafe { std::slice::from_raw_parts(ys, count) };
        let targets: Vec<Point> = xs
            .iter()
            .zip(ys.iter())
            .map(|(&x, &y)| Point::new(x, y))
            .collect();
        let cfg = match RieszConfig::new(mu) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        match riesz_direct(&density.0, &support.0, &cfg, &targets) {
            Ok(v) => {
                unsafe { std::ptr::copy_nonoverlapping(v.as_ptr(), values, count) };
                NllStatusOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// FFT evaluation of the Riesz potential at every grid node (the density is
/// used as given; apply masks before calling).
///
/// # Safety
/// `density` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_riesz_fft(
    density: *const NllField,
    mu: f64,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let density = nonnull!(density);
        let out = out_ptr!(out);
        emit(
            RieszConfig::new(mu).and_then(|cfg| riesz_fft(&density.0, &cfg).map(NllField)),
            out,
        )
    })
}

/// Logarithmic Newtonian potential of the masked density at every node,
/// with an optional analytic radial tail (see `nll_integrate`).
///
/// # Safety
/// Handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_log_potential(
    density: *const NllField,
    support: *const NllMask,
    tail_center_x: f64,
    tail_center_y: f64,
    tail_coefficient: f64,
    tail_exponent: f64,
    tail_start: f64,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let density = nonnull!(density);
        let support = nonnull!(support);
        let out = out_ptr!(out);
        let tail = if tail_coefficient == 0.0 && tail_exponent == 0.0 {
            None
        } else {
            Some(PowerTail {
                center: Point::new(tail_center_x, tail_center_y),
                coefficient: tail_coefficient,
                exponent: tail_exponent,
                start_radius: tail_start,
            })
        };
        emit(
            log_potential(&density.0, &support.0, tail.as_ref()).map(NllField),
            out,
        )
    })
}

/// Zero-boundary solve of -lap u = f on the disk carried by the mask.
///
/// # Safety
/// Handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_dirichlet_disk_solve(
    f: *const NllField,
    disk: *const NllMask,
    out: *mut *mut NllField,
) -> NllStatus {
    guarded(|| {
        let f = nonnull!(f);
        let disk = nonnull!(disk);
        let out = out_ptr!(out);
        emit(dirichlet_disk_solve(&f.0, &disk.0).map(NllField), out)
    })
}

/// Mass of the equation's right side over the target region with constant
/// coefficient, optionally extending the source by the profile's analytic
/// tail.
///
/// # Safety
/// Handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_region_mass(
    form: *const NllForm,
    v_const: f64,
    src: *const NllMask,
    target: *const NllMask,
    mu: f64,
    with_tail: i32,
    out: *mut f64,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let src = nonnull!(src);
        let target = nonnull!(target);
        let out = out_ptr!(out);
        match region_mass(
            &form.0,
            &Coefficient::Const(v_const),
            &src.0,
            &target.0,
            mu,
            with_tail != 0,
        ) {
            Ok(v) => {
                *out = v;
                NllStatusOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Whole-plane mass of the right side for a constant coefficient.
///
/// # Safety
/// Handles must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nll_entire_mass(
    form: *const NllForm,
    v_const: f64,
    mu: f64,
    grid: *const NllGrid,
    out: *mut f64,
) -> NllStatus {
    guarded(|| {
        let form = nonnull!(form);
        let grid = nonnull!(grid);
        let out = out_ptr!(out);
        match entire_mass(&form.0, v_const, mu, &grid.0) {
            Ok(v) => {
                *out = v;
                NllStatusOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Run an experiment from flat key=value config text (the config-file
/// vocabulary: experiment, mu, n, half-width, deltas, ks, centers,
/// separations, r-ball, seed, format). The report is written to `out_path`
/// when non-NULL, in the configured format. The return value carries the
/// CLI exit semantics: Ok, ToleranceFailure, ConfigError, NumericFailure.
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out_path` NULL or the same.
#[no_mangle]
pub unsafe extern "C" fn nll_run_config(
    config_text: *const c_char,
    out_path: *const c_char,
) -> NllStatus {
    guarded(|| {
        if config_text.is_null() {
            set_error("null config text");
            return NllStatusNullPointer;
        }
        let text = match unsafe { CStr::from_ptr(config_text) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("config text is not valid UTF-8");
                return NllStatusConfigError;
            }
        };
        let config = match config_from_text(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return NllStatusConfigError;
            }
        };
        let report = match execute(&config) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        if !out_path.is_null() {
            let path = match unsafe { CStr::from_ptr(out_path) }.to_str() {
                Ok(p) => p,
                Err(_) => {
                    set_error("output path is not valid UTF-8");
                    return NllStatusConfigError;
                }
            };
            let rendered = match config.format {
                OutputFormat::Csv => to_csv(&report),
                OutputFormat::Json => match to_json(&report) {
                    Ok(j) => j,
                    Err(e) => {
                        set_error(&e.to_string());
                        return NllStatusConfigError;
                    }
                },
            };
            if let Err(e) = std::fs::write(path, rendered) {
                set_error(&format!("cannot write report: {e}"));
                return NllStatusConfigError;
            }
        }
        if report.has_nan() {
            set_error("NaN detected in the report");
            return NllStatusNumericFailure;
        }
        if !report.passed() {
            set_error("one or more declared tolerances failed");
            return NllStatusToleranceFailure;
        }
        NllStatusOk
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::ptr;

    #[test]
    fn grid_mask_integrate_roundtrip() {
        unsafe {
            let mut grid: *mut NllGrid = ptr::null_mut();
            assert_eq!(nll_grid_new(0.0, 0.0, 1.5, 96, &mut grid), NllStatusOk);
            let mut h = 0.0;
            assert_eq!(nll_grid_spacing(grid, &mut h), NllStatusOk);
            assert!((h - 3.0 / 96.0).abs() < 1e-15);

            let mut mask: *mut NllMask = ptr::null_mut();
            assert_eq!(nll_mask_disk(grid, 0.0, 0.0, 1.0, &mut mask), NllStatusOk);
            let mut area = 0.0;
            assert_eq!(nll_mask_area(mask, &mut area), NllStatusOk);
            assert!((area - PI).abs() < 1e-9);

            let mut form: *mut NllForm = ptr::null_mut();
            assert_eq!(nll_form_constant(1.0, &mut form), NllStatusOk);
            let mut field: *mut NllField = ptr::null_mut();
            assert_eq!(nll_field_sample(form, grid, &mut field), NllStatusOk);
            let mut value = 0.0;
            assert_eq!(
                nll_integrate(field, mask, 0.0, 0.0, 0.0, 0.0, 0.0, &mut value),
                NllStatusOk
            );
            assert!((value - PI).abs() < 1e-9, "disk integral {value}");

            nll_field_free(field);
            nll_form_free(form);
            nll_mask_free(mask);
            nll_grid_free(grid);
        }
    }

    #[test]
    fn bubble_energy_through_the_c_surface() {
        unsafe {
            let mut grid: *mut NllGrid = ptr::null_mut();
            assert_eq!(nll_grid_new(0.0, 0.0, 12.0, 256, &mut grid), NllStatusOk);
            let mut form: *mut NllForm = ptr::null_mut();
            assert_eq!(
                nll_form_bubble_nonlocal(1.0, 0.0, 0.0, 1.0, &mut form),
                NllStatusOk
            );
            let mut mass = 0.0;
            assert_eq!(
                nll_entire_mass(form, 1.0, 1.0, grid, &mut mass),
                NllStatusOk
            );
            assert!((mass - 8.0 * PI).abs() < 0.02 * 8.0 * PI, "mass {mass}");
            nll_form_free(form);
            nll_grid_free(grid);
        }
    }

    #[test]
    fn null_and_error_paths() {
        unsafe {
            let mut grid: *mut NllGrid = ptr::null_mut();
            assert_eq!(
                nll_grid_new(0.0, 0.0, -1.0, 64, &mut grid),
                NllStatusInvalidArgument
            );
            let mut buf = [0i8; 128];
            let len = nll_last_error(buf.as_mut_ptr(), buf.len());
            assert!(len > 0);

            assert_eq!(
                nll_grid_spacing(ptr::null(), ptr::null_mut()),
                NllStatusNullPointer
            );

            assert_eq!(nll_grid_new(0.0, 0.0, 1.0, 64, &mut grid), NllStatusOk);
            let mut mask: *mut NllMask = ptr::null_mut();
            assert_eq!(
                nll_mask_annulus(grid, 0.0, 0.0, 1.0, 0.5, &mut mask),
                NllStatusInvalidArgument
            );
            nll_grid_free(grid);
        }
    }

    #[test]
    fn config_runner_matches_cli_contract() {
        unsafe {
            let path = std::env::temp_dir().join("nll_ffi_report.csv");
            let cfg =
                CString::new("experiment=quantization\nmu=1.0\nn=256\ndeltas=4,8,16\nformat=csv\n")
                    .unwrap();
            let out = CString::new(path.display().to_string()).unwrap();
            let status = nll_run_config(cfg.as_ptr(), out.as_ptr());
            assert_eq!(status, NllStatusOk);
            let text = std::fs::read_to_string(&path).unwrap();
            assert!(text.starts_with("experiment,param_name,param_value,quantity"));
            std::fs::remove_file(&path).ok();

            let bad = CString::new("experiment=quantization\nmu=2.5\n").unwrap();
            assert_eq!(
                nll_run_config(bad.as_ptr(), ptr::null()),
                NllStatusConfigError
            );
        }
    }

    #[test]
    fn committed_header_exists_and_names_the_surface() {
        let header = include_str!("../include/liouville_lab.h");
        for symbol in [
            "nll_grid_new",
            "nll_riesz_direct",
            "nll_riesz_fft",
            "nll_run_config",
            "NllStatus",
        ] {
            assert!(header.contains(symbol), "header misses {symbol}");
        }
    }
}
