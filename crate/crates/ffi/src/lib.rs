//! C ABI over `pego_lab`.
//!
//! Objects cross the boundary as opaque handles (`PegoFunction`,
//! `PegoFamilyHandle`) that the caller frees. Every fallible call returns a
//! [`PegoStatus`]; on failure, `pego_last_error_message` describes the most
//! recent error on the calling thread. Strings returned by the library are
//! owned by the caller and released with `pego_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pego_lab::diagnosis::{diagnose, DiagnosisReport, ResolvedConfig, SweepConfig};
use pego_lab::families::{catalog, catalog_family, FamilySpec};
use pego_lab::halfline::verify_pego;
use pego_lab::transform::plancherel_check;
use pego_lab::{FrequencyGrid, HalfLineFunction, Order, PegoError, TimeGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PegoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    NonFinite = 3,
    NotPego = 4,
    Grid = 5,
    GridMismatch = 6,
    Scale = 7,
    Parameter = 8,
    Invariant = 9,
    Refused = 10,
    Dsl = 11,
    UnknownFamily = 12,
    Io = 13,
    Panic = 14,
}

/// Time grid `(0, t_max)` with step `dt`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PegoGrid {
    pub dt: f64,
    pub t_max: f64,
}

pub struct PegoFunction(HalfLineFunction);

pub struct PegoFamilyHandle {
    name: String,
    spec_label: pego_lab::Label,
    family: pego_lab::PegoFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn status_of(e: &PegoError) -> PegoStatus {
    match e {
        PegoError::NonFinite { .. } => PegoStatus::NonFinite,
        PegoError::NotPego { .. } => PegoStatus::NotPego,
        PegoError::Grid(_) => PegoStatus::Grid,
        PegoError::GridMismatch(_) => PegoStatus::GridMismatch,
        PegoError::Scale(_) => PegoStatus::Scale,
        PegoError::Parameter(_) => PegoStatus::Parameter,
        PegoError::Invariant { .. } => PegoStatus::Invariant,
        PegoError::Refused(_) => PegoStatus::Refused,
        PegoError::Dsl(_) => PegoStatus::Dsl,
        PegoError::UnknownFamily(_) => PegoStatus::UnknownFamily,
        PegoError::Io(_) => PegoStatus::Io,
    }
}

fn fail(status: PegoStatus, msg: String) -> PegoStatus {
    LAST_ERROR.with(|l| *l.borrow_mut() = Some(msg));
    status
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), (PegoStatus, String)>) -> PegoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PegoStatus::Ok,
        Ok(Err((s, m))) => fail(s, m),
        Err(_) => fail(PegoStatus::Panic, "internal panic".into()),
    }
}

fn lib<T>(r: pego_lab::Result<T>) -> Result<T, (PegoStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PegoStatus, String)> {
    if p.is_null() {
        return Err((PegoStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (PegoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), (PegoStatus, String)> {
    if p.is_null() {
        Err((PegoStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn grid_of(g: PegoGrid) -> Result<TimeGrid, (PegoStatus, String)> {
    lib(TimeGrid::new(g.dt, g.t_max))
}

/// `dt = 1e-3`, `t_max = 40`.
#[no_mangle]
pub extern "C" fn pego_grid_default() -> PegoGrid {
    let g = TimeGrid::default();
    PegoGrid { dt: g.dt(), t_max: g.t_max() }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn pego_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Free with
/// `pego_string_free`.
#[no_mangle]
pub extern "C" fn pego_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|l| l.borrow().clone()).map_or(ptr::null_mut(), to_c)
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pego_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a function from the JSON DSL.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_function_from_json(json: *const c_char, out: *mut *mut PegoFunction) -> PegoStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_str(json, "json")?;
        let f = lib(HalfLineFunction::from_json(text))?;
        *out = Box::into_raw(Box::new(PegoFunction(f)));
        Ok(())
    })
}

/// Serializes a function back to the JSON DSL.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_function_to_json(f: *const PegoFunction, out: *mut *mut c_char) -> PegoStatus {
    guard(|| {
        non_null(f, "function")?;
        non_null(out, "out")?;
        *out = to_c((*f).0.to_json());
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle from `pego_function_from_json`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pego_function_free(f: *mut PegoFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Truncated `||e^{-xt} f||_1` and `||e^{-xt} f||_2` on `grid`.
///
/// # Safety
/// `f` must be a live handle; `l1`, `l2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_function_norms(
    f: *const PegoFunction,
    x: f64,
    grid: PegoGrid,
    l1: *mut f64,
    l2: *mut f64,
) -> PegoStatus {
    guard(|| {
        non_null(f, "function")?;
        non_null(l1, "l1")?;
        non_null(l2, "l2")?;
        let n = lib(verify_pego(&(*f).0, lib(Order::new(x))?, &grid_of(grid)?))?;
        *l1 = n.l1;
        *l2 = n.l2;
        Ok(())
    })
}

/// Closed-form `L{f}(re + i im)`. Fails with `Parameter` for sampled
/// functions or points left of the abscissa of convergence.
///
/// # Safety
/// `f` must be a live handle; `out_re`, `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_function_laplace(
    f: *const PegoFunction,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PegoStatus {
    guard(|| {
        non_null(f, "function")?;
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        let v = (*f)
            .0
            .laplace(pego_lab::Complex64::new(re, im))
            .ok_or_else(|| (PegoStatus::Parameter, format!("no closed-form transform at {re} + {im}i")))?;
        *out_re = v.re;
        *out_im = v.im;
        Ok(())
    })
}

/// Both sides of the Plancherel identity on the line `Re z = x`, using the
/// frequency grid native to `grid`.
///
/// # Safety
/// `f` must be a live handle; `lhs`, `rhs` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_plancherel(
    f: *const PegoFunction,
    x: f64,
    grid: PegoGrid,
    lhs: *mut f64,
    rhs: *mut f64,
) -> PegoStatus {
    guard(|| {
        non_null(f, "function")?;
        non_null(lhs, "lhs")?;
        non_null(rhs, "rhs")?;
        let g = grid_of(grid)?;
        let c = lib(plancherel_check(&(*f).0, lib(Order::new(x))?, &g, &FrequencyGrid::for_time_grid(&g)))?;
        *lhs = c.lhs;
        *rhs = c.rhs;
        Ok(())
    })
}

/// JSON array of catalog family specs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_catalog_json(out: *mut *mut c_char) -> PegoStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = to_c(serde_json::to_string_pretty(&catalog()).expect("catalog serializes"));
        Ok(())
    })
}

fn family_handle(spec: FamilySpec, grid: PegoGrid) -> Result<*mut PegoFamilyHandle, (PegoStatus, String)> {
    let family = lib(spec.instantiate(grid_of(grid)?))?;
    Ok(Box::into_raw(Box::new(PegoFamilyHandle { name: spec.name, spec_label: spec.label, family })))
}

/// Instantiates a catalog family by name. A negative `x` keeps the
/// family's own order.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_family_catalog(
    name: *const c_char,
    x: f64,
    grid: PegoGrid,
    out: *mut *mut PegoFamilyHandle,
) -> PegoStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut spec = lib(catalog_family(read_str(name, "name")?))?;
        if x >= 0.0 {
            spec = spec.with_order(lib(Order::new(x))?);
        }
        *out = family_handle(spec, grid)?;
        Ok(())
    })
}

/// Instantiates a family from a JSON family spec.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_family_from_json(
    json: *const c_char,
    grid: PegoGrid,
    out: *mut *mut PegoFamilyHandle,
) -> PegoStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = lib(FamilySpec::from_json(read_str(json, "json")?))?;
        *out = family_handle(spec, grid)?;
        Ok(())
    })
}

/// Number of members, or 0 for a null handle.
///
/// # Safety
/// `fam` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pego_family_len(fam: *const PegoFamilyHandle) -> usize {
    if fam.is_null() {
        0
    } else {
        (*fam).family.len()
    }
}

/// # Safety
/// `fam` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pego_family_free(fam: *mut PegoFamilyHandle) {
    if !fam.is_null() {
        drop(Box::from_raw(fam));
    }
}

/// Full diagnosis at tolerance `eps` with the default sweep, as a
/// `pego-lab/1` JSON report.
///
/// # Safety
/// `fam` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pego_diagnose_json(
    fam: *const PegoFamilyHandle,
    eps: f64,
    out: *mut *mut c_char,
) -> PegoStatus {
    guard(|| {
        non_null(fam, "family")?;
        non_null(out, "out")?;
        let h = &*fam;
        let grid = h.family.grid;
        let ygrid = FrequencyGrid::for_time_grid(&grid);
        let sweep = SweepConfig::default();
        let d = lib(diagnose(&h.family, eps, &ygrid, &sweep))?;
        let mut report = DiagnosisReport::new(ResolvedConfig {
            family: h.name.clone(),
            order: h.family.x(),
            eps,
            grid,
            frequency_grid: ygrid,
            sweep,
            chain_scales: None,
            seed: None,
            members: h.family.len(),
        });
        report.label = Some(h.spec_label);
        report.diagnosis = Some(d);
        *out = to_c(report.to_json());
        Ok(())
    })
}
