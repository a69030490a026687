//! C ABI for `boundreg`.
//!
//! Every function returns a [`BrStatus`]; results go through out-pointers.
//! Datasets and boundary fits are opaque handles owned by the caller and
//! released with their `*_free` function. On failure a message is stored per
//! thread and can be read with [`br_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use boundreg::mdist::{fitted_residuals, BoundaryKind, SearchOptions};
use boundreg::{
    gn_eval, local_constant_fit, make_dataset, minimize_theta, Bandwidths, CriterionKind,
    CriterionSpec, Dataset, Design, Error, Family, Model, ParamBox, ScenarioSpec, SmoothFit,
    TransformSpec,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Range = 4,
    Parameter = 5,
    Estimation = 6,
    Generation = 7,
    Undefined = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrDesign {
    Random = 0,
    Fixed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrFamily {
    YeoJohnson = 0,
    SinhArcsinh = 1,
    Identity = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrCriterion {
    Tks = 0,
    Tcm = 1,
    Tkscm = 2,
    Tcmks = 3,
}

/// Outcome of [`br_estimate`]. Only the first `dim` entries of `theta` are set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrEstimate {
    pub theta: [f64; 2],
    pub dim: usize,
    pub criterion_value: f64,
    pub evaluations: usize,
}

/// Opaque dataset handle.
pub struct BrDataset(Dataset);

/// Opaque boundary-fit handle (local-constant fit plus its smoothing).
pub struct BrBoundary(SmoothFit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BrStatus {
    match e {
        Error::Domain(_) => BrStatus::Domain,
        Error::Range { .. } => BrStatus::Range,
        Error::Parameter(_) => BrStatus::Parameter,
        Error::Estimation(_) => BrStatus::Estimation,
        Error::Generation { .. } => BrStatus::Generation,
        Error::UndefinedCoefficient(_) => BrStatus::Undefined,
        _ => BrStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (BrStatus, String)>) -> BrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BrStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (BrStatus, String)>;
}

impl<T> IntoFfi<T> for boundreg::Result<T> {
    fn ffi(self) -> Result<T, (BrStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (BrStatus, String) {
    (BrStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), (BrStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller passes a valid, aligned, writable pointer.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn read_slice<'a>(
    p: *const f64,
    len: usize,
    name: &str,
) -> Result<&'a [f64], (BrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller guarantees `p` points to `len` readable doubles.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn family_of(f: BrFamily) -> Family {
    match f {
        BrFamily::YeoJohnson => Family::YeoJohnson,
        BrFamily::SinhArcsinh => Family::SinhArcsinh,
        BrFamily::Identity => Family::Identity,
    }
}

fn criterion_of(c: BrCriterion) -> CriterionKind {
    match c {
        BrCriterion::Tks => CriterionKind::Tks,
        BrCriterion::Tcm => CriterionKind::Tcm,
        BrCriterion::Tkscm => CriterionKind::Tkscm,
        BrCriterion::Tcmks => CriterionKind::Tcmks,
    }
}

fn design_of(d: BrDesign) -> Design {
    match d {
        BrDesign::Random => Design::Random,
        BrDesign::Fixed => Design::Fixed,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL,
/// or 0 when no error has been recorded.
#[no_mangle]
pub unsafe extern "C" fn br_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            // SAFETY: caller provides `len` writable bytes at `buf`.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, k);
                *buf.add(k) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn br_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn br_yj_forward(theta: f64, y: f64, out: *mut f64) -> BrStatus {
    guard(|| unsafe { write_out(out, boundreg::yj_forward(theta, y).ffi()?, "out") })
}

#[no_mangle]
pub unsafe extern "C" fn br_yj_inverse(theta: f64, z: f64, out: *mut f64) -> BrStatus {
    guard(|| unsafe { write_out(out, boundreg::yj_inverse(theta, z).ffi()?, "out") })
}

#[no_mangle]
pub unsafe extern "C" fn br_sas_forward(
    tailweight: f64,
    skewness: f64,
    y: f64,
    out: *mut f64,
) -> BrStatus {
    guard(|| unsafe {
        write_out(
            out,
            boundreg::sas_forward(tailweight, skewness, y).ffi()?,
            "out",
        )
    })
}

/// `G_n(y, s)` for residuals `r` and covariates `xs` of length `n`.
#[no_mangle]
pub unsafe extern "C" fn br_gn_eval(
    r: *const f64,
    xs: *const f64,
    n: usize,
    y: f64,
    s: f64,
    out: *mut f64,
) -> BrStatus {
    guard(|| unsafe {
        let r = read_slice(r, n, "r")?;
        let xs = read_slice(xs, n, "xs")?;
        write_out(out, gn_eval(r, xs, y, s).ffi()?, "out")
    })
}

/// Creates a dataset from `n` covariate/response pairs. Rows are sorted by covariate.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_new(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    design: BrDesign,
    out: *mut *mut BrDataset,
) -> BrStatus {
    guard(|| unsafe {
        let xs = read_slice(xs, n, "xs")?;
        let ys = read_slice(ys, n, "ys")?;
        let d = Dataset::from_columns(xs.to_vec(), ys.to_vec(), design_of(design)).ffi()?;
        write_out(out, Box::into_raw(Box::new(BrDataset(d))), "out")
    })
}

/// Generates a dataset from simulation model `model` (1 to 4).
#[no_mangle]
pub unsafe extern "C" fn br_dataset_generate(
    model: u8,
    theta0: f64,
    n: usize,
    design: BrDesign,
    seed: u64,
    out: *mut *mut BrDataset,
) -> BrStatus {
    guard(|| unsafe {
        let model = Model::from_number(model).ffi()?;
        let spec = ScenarioSpec {
            model,
            theta0,
            n,
            design: design_of(design),
            seed,
        };
        let d = make_dataset(&spec).ffi()?;
        write_out(out, Box::into_raw(Box::new(BrDataset(d))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn br_dataset_len(data: *const BrDataset) -> usize {
    // SAFETY: null or a live handle from br_dataset_new/generate.
    unsafe { data.as_ref() }.map_or(0, |d| d.0.len())
}

/// Copies the sorted samples into caller buffers of capacity `cap`.
#[no_mangle]
pub unsafe extern "C" fn br_dataset_copy(
    data: *const BrDataset,
    xs: *mut f64,
    ys: *mut f64,
    cap: usize,
) -> BrStatus {
    guard(|| unsafe {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        if xs.is_null() || ys.is_null() {
            return Err(null("xs/ys"));
        }
        if cap < d.0.len() {
            return Err((
                BrStatus::InvalidArgument,
                format!("buffer holds {cap}, need {}", d.0.len()),
            ));
        }
        ptr::copy_nonoverlapping(d.0.xs().as_ptr(), xs, d.0.len());
        ptr::copy_nonoverlapping(d.0.ys().as_ptr(), ys, d.0.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn br_dataset_free(data: *mut BrDataset) {
    if !data.is_null() {
        // SAFETY: pointer came from Box::into_raw in this crate and is freed once.
        drop(unsafe { Box::from_raw(data) });
    }
}

/// Fits the boundary for transformation `family(params)` with window `b` and smoothing `a`.
#[no_mangle]
pub unsafe extern "C" fn br_boundary_fit(
    data: *const BrDataset,
    family: BrFamily,
    params: *const f64,
    n_params: usize,
    b: f64,
    a: f64,
    out: *mut *mut BrBoundary,
) -> BrStatus {
    guard(|| unsafe {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let params = read_slice(params, n_params, "params")?;
        let t = TransformSpec::new(family_of(family), params.to_vec()).ffi()?;
        let fit = local_constant_fit(&d.0, &t, b).ffi()?.smooth(a).ffi()?;
        write_out(out, Box::into_raw(Box::new(BrBoundary(fit))), "out")
    })
}

/// Local-constant (windowed maximum) boundary at `x`.
#[no_mangle]
pub unsafe extern "C" fn br_boundary_eval_raw(
    fit: *const BrBoundary,
    x: f64,
    out: *mut f64,
) -> BrStatus {
    guard(|| unsafe {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        write_out(out, f.0.raw().eval(x), "out")
    })
}

/// Smoothed boundary at `x`; `fallback` (optional) is set to 1 when the
/// kernel window was empty and the nearest knot value was used.
#[no_mangle]
pub unsafe extern "C" fn br_boundary_eval_smooth(
    fit: *const BrBoundary,
    x: f64,
    out: *mut f64,
    fallback: *mut i32,
) -> BrStatus {
    guard(|| unsafe {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        let e = f.0.eval(x);
        if !fallback.is_null() {
            *fallback = i32::from(e.fallback);
        }
        write_out(out, e.value, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn br_boundary_free(fit: *mut BrBoundary) {
    if !fit.is_null() {
        // SAFETY: pointer came from Box::into_raw in this crate and is freed once.
        drop(unsafe { Box::from_raw(fit) });
    }
}

/// Minimum-distance estimate of the transformation parameter.
///
/// `lower`/`upper` give the search box (`dim` entries, matching the family);
/// pass null for both to use the family default. `b <= 0` selects
/// `n^(-1/3)`, `a <= 0` selects `b / 2`.
#[no_mangle]
pub unsafe extern "C" fn br_estimate(
    data: *const BrDataset,
    family: BrFamily,
    criterion: BrCriterion,
    b: f64,
    a: f64,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    y_grid_size: usize,
    raw_boundary: i32,
    out: *mut BrEstimate,
) -> BrStatus {
    guard(|| unsafe {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let family = family_of(family);
        let theta_box = if lower.is_null() && upper.is_null() {
            family.default_box()
        } else {
            let lo = read_slice(lower, dim, "lower")?;
            let hi = read_slice(upper, dim, "upper")?;
            ParamBox::new(lo.iter().copied().zip(hi.iter().copied()).collect()).ffi()?
        };
        let b = if b > 0.0 {
            b
        } else {
            Bandwidths::rule(d.0.len(), 2.0).b
        };
        let a = if a > 0.0 { a } else { b / 2.0 };
        let bw = Bandwidths::new(b, a).ffi()?;
        let spec = CriterionSpec::with_y_grid_size(criterion_of(criterion), y_grid_size).ffi()?;
        let boundary = if raw_boundary != 0 {
            BoundaryKind::Raw
        } else {
            BoundaryKind::Smoothed
        };
        let est = minimize_theta(
            &d.0,
            family,
            &theta_box,
            bw,
            &spec,
            SearchOptions {
                boundary,
                keep_trace: false,
            },
        )
        .ffi()?;
        let mut theta = [f64::NAN; 2];
        for (slot, v) in theta.iter_mut().zip(&est.theta_hat) {
            *slot = *v;
        }
        write_out(
            out,
            BrEstimate {
                theta,
                dim: est.theta_hat.len(),
                criterion_value: est.criterion_value,
                evaluations: est.evaluations,
            },
            "out",
        )
    })
}

/// Residuals `Lambda(Y_i) - h(x_i)` in sorted sample order, written to `out`
/// (capacity `cap`).
#[no_mangle]
pub unsafe extern "C" fn br_residuals(
    data: *const BrDataset,
    family: BrFamily,
    params: *const f64,
    n_params: usize,
    b: f64,
    a: f64,
    raw_boundary: i32,
    out: *mut f64,
    cap: usize,
) -> BrStatus {
    guard(|| unsafe {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let params = read_slice(params, n_params, "params")?;
        let t = TransformSpec::new(family_of(family), params.to_vec()).ffi()?;
        let kind = if raw_boundary != 0 {
            BoundaryKind::Raw
        } else {
            BoundaryKind::Smoothed
        };
        let r = fitted_residuals(&d.0, &t, Bandwidths::new(b, a).ffi()?, kind).ffi()?;
        if out.is_null() {
            return Err(null("out"));
        }
        if cap < r.len() {
            return Err((
                BrStatus::InvalidArgument,
                format!("buffer holds {cap}, need {}", r.len()),
            ));
        }
        ptr::copy_nonoverlapping(r.as_ptr(), out, r.len());
        Ok(())
    })
}
