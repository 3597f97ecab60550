//! C ABI over the cgoscatter workbench.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CgsStatus`]; on failure the message is available from
//! [`cgs_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cgoscatter::experiment::{run_experiment, ExitStatus, ExperimentKind};
use cgoscatter::geometry::SurfaceModel;
use cgoscatter::potentials::Potential;
use cgoscatter::scattering::{extract_s_matrix, ScatteringMatrix};
use cgoscatter::{Error, Field, Grid};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Config = 4,
    Io = 5,
    Panic = 6,
}

/// Sampled complex field on a square grid.
pub struct CgsField {
    inner: Field,
}

/// Scattering matrix on the modes `|m| <= m_max`.
pub struct CgsSMatrix {
    inner: ScatteringMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> CgsStatus {
    match err {
        Error::InvalidInput(_) | Error::GridMismatch(..) | Error::UnsupportedModel(_) => CgsStatus::InvalidArgument,
        Error::Config(_) => CgsStatus::Config,
        Error::Io(_) | Error::Csv(_) => CgsStatus::Io,
        _ => CgsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CgsStatus, String)>) -> CgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CgsStatus::Panic
        }
    }
}

fn lift(err: Error) -> (CgsStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (CgsStatus, String) {
    (CgsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CgsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CgsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Version string; static storage.
#[no_mangle]
pub extern "C" fn cgs_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!("cgoscatter ", env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Message of the last failure on this thread; empty if none. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn cgs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Field of `n * n` samples on `[-half_width, half_width]^2` from split real and imaginary parts
/// in row-major order. `im` may be null for a real field.
///
/// # Safety
/// `re` (and `im` if not null) must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_field_new(
    n: usize,
    half_width: f64,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CgsField,
) -> CgsStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Grid::new(n, half_width).map_err(lift)?;
        let re = std::slice::from_raw_parts(re, n * n);
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n * n);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        put(out, CgsField { inner: Field::from_values(grid, values).map_err(lift)? });
        Ok(())
    })
}

/// Gaussian bump `amplitude * exp(-|z - c|^2 / width^2)` sampled on an `n * n` grid.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_field_gaussian(
    n: usize,
    half_width: f64,
    cx: f64,
    cy: f64,
    width: f64,
    amplitude: f64,
    out: *mut *mut CgsField,
) -> CgsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if width.is_nan() || width <= 0.0 {
            return Err((CgsStatus::InvalidArgument, format!("width must be positive, got {width}")));
        }
        let grid = Grid::new(n, half_width).map_err(lift)?;
        let v = Potential::gaussian(Complex64::new(cx, cy), width, amplitude).sample(grid, &SurfaceModel::plane());
        put(out, CgsField { inner: v });
        Ok(())
    })
}

/// Samples per axis, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgs_field_n(field: *const CgsField) -> usize {
    field.as_ref().map(|f| f.inner.grid().n()).unwrap_or(0)
}

/// Sample `(i, k)`.
///
/// # Safety
/// `field` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_field_get(field: *const CgsField, i: usize, k: usize, re: *mut f64, im: *mut f64) -> CgsStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let n = f.inner.grid().n();
        if i >= n || k >= n {
            return Err((CgsStatus::InvalidArgument, format!("index ({i}, {k}) outside {n} x {n}")));
        }
        let v = f.inner.get(i, k);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cgs_field_free(field: *mut CgsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Scattering matrix of the potential sampled in `potential` at frequency `lambda`.
///
/// # Safety
/// `potential` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_s_matrix_extract(
    potential: *const CgsField,
    lambda: f64,
    m_max: usize,
    match_radius: f64,
    out: *mut *mut CgsSMatrix,
) -> CgsStatus {
    guard(|| {
        let v = potential.as_ref().ok_or_else(|| null("potential"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = extract_s_matrix(&v.inner, lambda, m_max, match_radius).map_err(lift)?;
        put(out, CgsSMatrix { inner: s });
        Ok(())
    })
}

/// Mode cutoff `m_max`, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cgs_s_matrix_m_max(s: *const CgsSMatrix) -> usize {
    s.as_ref().map(|s| s.inner.m_max).unwrap_or(0)
}

/// Entry `S[m_out, m_in]`.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_s_matrix_entry(
    s: *const CgsSMatrix,
    m_out: i64,
    m_in: i64,
    re: *mut f64,
    im: *mut f64,
) -> CgsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("s"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let m = s.inner.m_max as i64;
        if m_out.abs() > m || m_in.abs() > m {
            return Err((CgsStatus::InvalidArgument, format!("mode ({m_out}, {m_in}) outside |m| <= {m}")));
        }
        let v = s.inner.entry(m_out, m_in);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Spectral norm of `S*S - I`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgs_s_matrix_unitarity_defect(s: *const CgsSMatrix, out: *mut f64) -> CgsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("s"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.unitarity_defect();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cgs_s_matrix_free(s: *mut CgsSMatrix) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs an experiment as the command line does and returns its exit code (0, 1 or 2).
/// `out_dir` may be null to use the configuration's `output`; the seed overrides the
/// configuration only when `use_seed` is true.
///
/// # Safety
/// `kind` and `config_path` must be NUL-terminated strings; `out_dir` must be null or one.
#[no_mangle]
pub unsafe extern "C" fn cgs_run_experiment(
    kind: *const c_char,
    config_path: *const c_char,
    out_dir: *const c_char,
    use_seed: bool,
    seed: u64,
) -> i32 {
    let mut code = ExitStatus::Schema as i32;
    let status = guard(|| {
        let kind: ExperimentKind = c_str(kind, "kind")?.parse().map_err(lift)?;
        let config = c_str(config_path, "config_path")?;
        let out = if out_dir.is_null() { None } else { Some(Path::new(c_str(out_dir, "out_dir")?)) };
        let (status, message) = run_experiment(kind, Path::new(config), use_seed.then_some(seed), out);
        code = status as i32;
        match status {
            ExitStatus::Success => Ok(()),
            ExitStatus::Numerical => Err((CgsStatus::Numerical, message)),
            ExitStatus::Schema => Err((CgsStatus::Config, message)),
        }
    });
    if status == CgsStatus::Panic {
        code = ExitStatus::Numerical as i32;
    }
    code
}
