//! C ABI over `epd-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_json`
//! and released with the matching `*_free`. Every fallible call returns an
//! [`EpdStatus`]; on failure the message is kept per thread and can be read
//! with [`epd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use epd_core::complexfield::CPoint;
use epd_core::critical::{find_critical_with, CriticalOptions};
use epd_core::darios;
use epd_core::density::Density;
use epd_core::epd::{dual_value_at, epd_residual, JetSource, SolutionSpec};
use epd_core::hamiltonian::{self as ham, Differencing, FieldState, Operator};
use epd_core::hydro::velocity_at;
use epd_core::params::FlowLabel;
use epd_core::EpdError;

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpdComplex {
    pub re: f64,
    pub im: f64,
}

impl From<CPoint> for EpdComplex {
    fn from(z: CPoint) -> Self {
        EpdComplex { re: z.re, im: z.im }
    }
}

impl From<EpdComplex> for CPoint {
    fn from(z: EpdComplex) -> Self {
        CPoint::new(z.re, z.im)
    }
}

/// W and its derivatives up to second order at one point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct EpdJet {
    pub w: EpdComplex,
    pub wz: EpdComplex,
    pub wzb: EpdComplex,
    pub wzz: EpdComplex,
    pub wzbzb: EpdComplex,
    pub wzzb: EpdComplex,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct EpdCritical {
    pub beta: EpdComplex,
    pub beta_bar: EpdComplex,
    /// 1 for a generic critical point.
    pub order: u32,
    /// max(|W_β|, |W_β̄|) at the returned point.
    pub residual: f64,
    pub iterations: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpdStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidSpec = 3,
    Singular = 4,
    NoConvergence = 5,
    Domain = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpdOperator {
    J0 = 0,
    J1 = 1,
    J1Eps = 2,
}

/// Opaque solution spec.
pub struct EpdSpec(SolutionSpec);

/// Opaque periodic state (ρ, u).
pub struct EpdFieldState(FieldState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &EpdError) -> EpdStatus {
    match e {
        EpdError::Parse(_) => EpdStatus::Parse,
        EpdError::InvalidSpec(_) | EpdError::InvalidContour(_) | EpdError::NotUnimodular(_) => EpdStatus::InvalidSpec,
        EpdError::SingularPoint { .. }
        | EpdError::CoincidentPoints(_)
        | EpdError::MobiusPole(_)
        | EpdError::ZeroDenominator
        | EpdError::DegenerateHessian { .. } => EpdStatus::Singular,
        EpdError::QuadratureNonConvergence { .. } | EpdError::NonConvergence { .. } | EpdError::NoRoot(_) => {
            EpdStatus::NoConvergence
        }
        EpdError::Io(_) => EpdStatus::Io,
        _ => EpdStatus::Domain,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (EpdStatus, String)>) -> EpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EpdStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            EpdStatus::Panic
        }
    }
}

fn core<T>(r: epd_core::Result<T>) -> Result<T, (EpdStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EpdStatus, String) {
    (EpdStatus::NullPointer, format!("{what} is NULL"))
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EpdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (EpdStatus::Parse, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be NULL or point to a live `T`.
unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EpdStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be NULL or point to writable memory for a `T`.
unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (EpdStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn epd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn epd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a spec such as `{"variant":"monomial","x":[1,1],"y":[1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_spec_from_json(json: *const c_char, out: *mut *mut EpdSpec) -> EpdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let spec = core(SolutionSpec::from_json(str_arg(json, "json")?))?;
        core(spec.validate())?;
        *out = Box::into_raw(Box::new(EpdSpec(spec)));
        Ok(())
    })
}

/// # Safety
/// `spec` must be NULL or a handle from [`epd_spec_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epd_spec_free(spec: *mut EpdSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Evaluates the 2-jet at `z` with z̄ = conj(z). `normalized` != 0 divides the
/// circle variants by 2πi.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_spec_eval(
    spec: *const EpdSpec,
    z: EpdComplex,
    normalized: c_int,
    out: *mut EpdJet,
) -> EpdStatus {
    guard(|| {
        let spec = &ref_arg(spec, "spec")?.0;
        let out = out_arg(out, "out")?;
        let z: CPoint = z.into();
        let j = if normalized != 0 {
            core(spec.eval_normalized(z, z.conj()))?
        } else {
            core(spec.eval_jet(z, z.conj()))?
        };
        *out = EpdJet {
            w: j.w.into(),
            wz: j.wz.into(),
            wzb: j.wzb.into(),
            wzz: j.wzz.into(),
            wzbzb: j.wzbzb.into(),
            wzzb: j.wzzb.into(),
        };
        Ok(())
    })
}

/// |(z-z̄)W_zz̄ - (W_z - W_z̄)/2| / |∇W| at `z`.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_spec_residual(spec: *const EpdSpec, z: EpdComplex, out: *mut f64) -> EpdStatus {
    guard(|| {
        let spec = &ref_arg(spec, "spec")?.0;
        let out = out_arg(out, "out")?;
        let z: CPoint = z.into();
        let j = core(spec.jet(z, z.conj()))?;
        *out = epd_residual(&j, z, z.conj(), 0.5).norm() / j.grad_norm();
        Ok(())
    })
}

/// Newton iteration for W_β = W_β̄ = 0 from `guess`.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_find_critical(
    spec: *const EpdSpec,
    guess: EpdComplex,
    out: *mut EpdCritical,
) -> EpdStatus {
    guard(|| {
        let spec = &ref_arg(spec, "spec")?.0;
        let out = out_arg(out, "out")?;
        let g: CPoint = guess.into();
        let cp = core(find_critical_with(spec, g, g.conj(), &CriticalOptions::default()))?;
        *out = EpdCritical {
            beta: cp.beta.into(),
            beta_bar: cp.beta_bar.into(),
            order: cp.order,
            residual: cp.residual,
            iterations: cp.iterations as u32,
        };
        Ok(())
    })
}

/// Characteristic velocity λ_{k,l} at β (β̄ = conj β) for flow labels such
/// as `"x2"`, `"y0"` or `"delta-x:1"`.
///
/// # Safety
/// `spec` must be a live handle, `k` and `l` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_velocity(
    spec: *const EpdSpec,
    beta: EpdComplex,
    k: *const c_char,
    l: *const c_char,
    out: *mut EpdComplex,
) -> EpdStatus {
    guard(|| {
        let spec = &ref_arg(spec, "spec")?.0;
        let out = out_arg(out, "out")?;
        let k = core(FlowLabel::parse_for(str_arg(k, "k")?, spec))?;
        let l = core(FlowLabel::parse_for(str_arg(l, "l")?, spec))?;
        let b: CPoint = beta.into();
        *out = core(velocity_at(spec, b, b.conj(), k, l))?.0.into();
        Ok(())
    })
}

/// The dual potential W* at `z`.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_dual_value(spec: *const EpdSpec, z: EpdComplex, out: *mut EpdComplex) -> EpdStatus {
    guard(|| {
        let spec = &ref_arg(spec, "spec")?.0;
        let out = out_arg(out, "out")?;
        *out = core(dual_value_at(spec, z.into()))?.into();
        Ok(())
    })
}

/// Copies `n` samples of ρ and u on a periodic grid of the given length.
///
/// # Safety
/// `rho` and `u` must point to `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn epd_field_new(
    rho: *const f64,
    u: *const f64,
    n: usize,
    length: f64,
    out: *mut *mut EpdFieldState,
) -> EpdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        if rho.is_null() || u.is_null() {
            return Err(null("rho or u"));
        }
        let rho = std::slice::from_raw_parts(rho, n).to_vec();
        let u = std::slice::from_raw_parts(u, n).to_vec();
        let s = core(FieldState::new(rho, u, length))?;
        *out = Box::into_raw(Box::new(EpdFieldState(s)));
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a handle from [`epd_field_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epd_field_free(state: *mut EpdFieldState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Largest relative asymmetry |⟨f, J g⟩ + ⟨J f, g⟩| over random smooth test pairs.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_field_skew_check(
    state: *const EpdFieldState,
    op: EpdOperator,
    eps: f64,
    trials: usize,
    seed: u64,
    out: *mut f64,
) -> EpdStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        let out = out_arg(out, "out")?;
        let op = match op {
            EpdOperator::J0 => Operator::J0,
            EpdOperator::J1 => Operator::J1,
            EpdOperator::J1Eps => Operator::J1Eps(eps),
        };
        *out = core(ham::skew_check(op, s, trials, seed, Differencing::Spectral))?.max;
        Ok(())
    })
}

/// Solves the t = 0 Da Rios relations at `x` for (τ₀, K₀). Densities are JSON
/// objects such as `{"kind":"gaussian","amplitude":1,"center":0,"width":1}`;
/// NULL means zero.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `tau` and `k` writable.
#[no_mangle]
pub unsafe extern "C" fn epd_darios_initial_root(
    phi: *const c_char,
    psi: *const c_char,
    x: f64,
    tau_guess: f64,
    k_guess: f64,
    tau: *mut f64,
    k: *mut f64,
) -> EpdStatus {
    guard(|| {
        let density = |p: *const c_char, what| -> Result<Density, (EpdStatus, String)> {
            if p.is_null() {
                return Ok(Density::Zero);
            }
            let d: Density = serde_json::from_str(str_arg(p, what)?).map_err(|e| (EpdStatus::Parse, e.to_string()))?;
            core(d.validate())?;
            Ok(d)
        };
        let (phi, psi) = (density(phi, "phi")?, density(psi, "psi")?);
        let (tau, k) = (out_arg(tau, "tau")?, out_arg(k, "k")?);
        (*tau, *k) = core(darios::initial_data_root(&phi, &psi, x, (tau_guess, k_guess), None))?;
        Ok(())
    })
}
