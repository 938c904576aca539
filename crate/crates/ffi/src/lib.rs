//! C ABI over the cklh kernels.
//!
//! Every function returns a [`CklhStatus`]; results go through out-pointers.
//! On failure `cklh_last_error` copies a message for the calling thread.
//! Systems are opaque handles created by `cklh_*_new` and released with
//! `cklh_system_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cklh::applications::{AppSystem, Application, ModelParams};
use cklh::class_i4::{i4_F2, i4_superpose, riccati_superpose, Branch, I4System};
use cklh::class_p2::{p2_F2, P2System};
use cklh::symplectic::LieHamiltonSystem;
use cklh::verify::{run_suite, Suite, VerifyOptions};
use cklh::{Error, KappaSignature};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CklhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Pole = 4,
    SymplecticDegeneracy = 5,
    NoRealSolution = 6,
    DegenerateConfiguration = 7,
    BlowUp = 8,
    /// A Rust panic was caught at the boundary.
    Internal = 9,
}

/// Identifiers for `cklh_app_new`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CklhApplication {
    SplitComplexRiccati = 0,
    DiffusionRiccati = 1,
    KummerSchwarzNeg = 2,
    KummerSchwarzPos = 3,
    ErmakovNeg = 4,
    ErmakovPos = 5,
}

/// Opaque Lie–Hamilton system.
pub struct CklhSystem {
    inner: Box<dyn LieHamiltonSystem>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CklhStatus {
    match e {
        Error::Domain(_) | Error::DegenerateChart(_) => CklhStatus::Domain,
        Error::Pole { .. } => CklhStatus::Pole,
        Error::SymplecticDegeneracy(_) => CklhStatus::SymplecticDegeneracy,
        Error::NoRealSolution(_) => CklhStatus::NoRealSolution,
        Error::DegenerateConfiguration(_) => CklhStatus::DegenerateConfiguration,
        Error::BlowUp { .. } => CklhStatus::BlowUp,
        Error::InvalidArgument(_) => CklhStatus::InvalidArgument,
    }
}

/// Runs `f` behind a panic guard and records the message of any error.
fn guard(f: impl FnOnce() -> Result<(), (CklhStatus, String)>) -> CklhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CklhStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside cklh".into());
            CklhStatus::Internal
        }
    }
}

fn lift<T>(r: cklh::Result<T>) -> Result<T, (CklhStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CklhStatus, String) {
    (CklhStatus::NullPointer, format!("{what} is null"))
}

fn finite(vals: &[f64]) -> Result<(), (CklhStatus, String)> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err((CklhStatus::InvalidArgument, "non-finite argument".into()))
    }
}

fn branch(b: i32) -> Result<Branch, (CklhStatus, String)> {
    match b {
        1 => Ok(Branch::Plus),
        -1 => Ok(Branch::Minus),
        _ => Err((CklhStatus::InvalidArgument, format!("branch must be +1 or -1, got {b}"))),
    }
}

/// # Safety
/// `out` must be writable.
unsafe fn emit(out: *mut *mut CklhSystem, sys: Box<dyn LieHamiltonSystem>) -> Result<(), (CklhStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(CklhSystem { inner: sys }));
    Ok(())
}

/// Copies the last error of this thread into `buf` (NUL-terminated, truncated to `len`)
/// and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cklh_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cklh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The curved I4 class at curvature `kappa`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_i4_new(kappa: f64, out: *mut *mut CklhSystem) -> CklhStatus {
    guard(|| {
        finite(&[kappa])?;
        emit(out, Box::new(I4System { kappa }))
    })
}

/// The curved P2 class on the space (kappa1, kappa2).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_p2_new(kappa1: f64, kappa2: f64, out: *mut *mut CklhSystem) -> CklhStatus {
    guard(|| {
        finite(&[kappa1, kappa2])?;
        emit(out, Box::new(P2System { kappas: KappaSignature::new(kappa1, kappa2) }))
    })
}

/// An application system; I4 applications read only `kappa1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_app_new(
    app: CklhApplication,
    kappa1: f64,
    kappa2: f64,
    lambda: f64,
    out: *mut *mut CklhSystem,
) -> CklhStatus {
    guard(|| {
        finite(&[kappa1, kappa2, lambda])?;
        let app = match app {
            CklhApplication::SplitComplexRiccati => Application::SplitComplexRiccati,
            CklhApplication::DiffusionRiccati => Application::DiffusionRiccati,
            CklhApplication::KummerSchwarzNeg => Application::KummerSchwarzNeg,
            CklhApplication::KummerSchwarzPos => Application::KummerSchwarzPos,
            CklhApplication::ErmakovNeg => Application::ErmakovNeg,
            CklhApplication::ErmakovPos => Application::ErmakovPos,
        };
        let params = lift(ModelParams::new(lambda))?;
        let sys = lift(AppSystem::new(app, KappaSignature::new(kappa1, kappa2), params))?;
        emit(out, Box::new(sys))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sys` must come from a `cklh_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_free(sys: *mut CklhSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be null or a live handle.
unsafe fn system<'a>(sys: *const CklhSystem) -> Result<&'a dyn LieHamiltonSystem, (CklhStatus, String)> {
    sys.as_ref().map(|s| &*s.inner).ok_or_else(|| null("system"))
}

/// Writes X1, X2, X3 at (x, y) as six numbers (x1, y1, x2, y2, x3, y3).
///
/// # Safety
/// `sys` must be a live handle and `out` must hold six doubles.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_fields(sys: *const CklhSystem, x: f64, y: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        let s = system(sys)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = lift(s.fields([x, y]))?;
        for (i, v) in f.iter().enumerate() {
            *out.add(2 * i) = v.vx;
            *out.add(2 * i + 1) = v.vy;
        }
        Ok(())
    })
}

/// Writes (h1, h2, h3) at (x, y).
///
/// # Safety
/// `sys` must be a live handle and `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_hamiltonians(sys: *const CklhSystem, x: f64, y: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        let s = system(sys)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let h = lift(s.hamiltonians([x, y]))?;
        std::ptr::copy_nonoverlapping(h.as_ptr(), out, 3);
        Ok(())
    })
}

/// Writes the symplectic weight W with ω = W dx∧dy.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_weight(sys: *const CklhSystem, x: f64, y: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        let s = system(sys)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(s.weight([x, y]))?;
        Ok(())
    })
}

/// Writes the Casimir evaluated on the Hamiltonians at (x, y).
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_casimir(sys: *const CklhSystem, x: f64, y: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        let s = system(sys)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(s.casimir_at([x, y]))?;
        Ok(())
    })
}

/// Writes the right-hand side b1 X1 + b2 X2 + b3 X3 at (x, y) into `out[0..2]`.
///
/// # Safety
/// `sys` must be a live handle, `b` must hold three doubles and `out` two.
#[no_mangle]
pub unsafe extern "C" fn cklh_system_rhs(sys: *const CklhSystem, b: *const f64, x: f64, y: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        let s = system(sys)?;
        if b.is_null() || out.is_null() {
            return Err(null("b or out"));
        }
        let b = [*b, *b.add(1), *b.add(2)];
        let r = lift(s.rhs(b, [x, y]))?;
        std::ptr::copy_nonoverlapping(r.as_ptr(), out, 2);
        Ok(())
    })
}

/// The two-point constant of motion of the curved I4 class.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_i4_f2(kappa: f64, x1: f64, y1: f64, x2: f64, y2: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(i4_F2(kappa, [x1, y1], [x2, y2]))?;
        Ok(())
    })
}

/// The two-point constant of motion of the curved P2 class.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_p2_f2(kappa1: f64, kappa2: f64, x1: f64, y1: f64, x2: f64, y2: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(p2_F2(KappaSignature::new(kappa1, kappa2), [x1, y1], [x2, y2]))?;
        Ok(())
    })
}

/// I4 superposition from particular states `s2`, `s3` (two doubles each), constants
/// (mu1, mu2) and `branch` = +1 or -1; the state goes to `out[0..2]`.
///
/// # Safety
/// `s2`, `s3` and `out` must each hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn cklh_i4_superpose(
    kappa: f64,
    s2: *const f64,
    s3: *const f64,
    mu1: f64,
    mu2: f64,
    branch_sign: i32,
    out: *mut f64,
) -> CklhStatus {
    guard(|| {
        if s2.is_null() || s3.is_null() || out.is_null() {
            return Err(null("s2, s3 or out"));
        }
        let br = branch(branch_sign)?;
        let r = lift(i4_superpose(kappa, [*s2, *s2.add(1)], [*s3, *s3.add(1)], mu1, mu2, br))?;
        std::ptr::copy_nonoverlapping(r.as_ptr(), out, 2);
        Ok(())
    })
}

/// 1D Riccati rule from three particular values and mu1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cklh_riccati_superpose(kappa: f64, x1: f64, x2: f64, x3: f64, mu1: f64, out: *mut f64) -> CklhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(riccati_superpose(kappa, x1, x2, x3, mu1))?;
        Ok(())
    })
}

/// Runs a verification suite by name. `passed` receives 1 or 0 and `failed` the number
/// of failing checks; either may be null.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cklh_verify_suite(
    name: *const c_char,
    seed: u64,
    samples: usize,
    passed: *mut i32,
    failed: *mut usize,
) -> CklhStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let n = CStr::from_ptr(name).to_str().map_err(|_| (CklhStatus::InvalidArgument, "suite name is not UTF-8".into()))?;
        let suite = Suite::from_name(n).ok_or_else(|| (CklhStatus::InvalidArgument, format!("unknown suite {n:?}")))?;
        if samples == 0 {
            return Err((CklhStatus::InvalidArgument, "samples must be positive".into()));
        }
        let r = run_suite(suite, &VerifyOptions { seed, samples });
        if !passed.is_null() {
            *passed = r.pass as i32;
        }
        if !failed.is_null() {
            *failed = r.failures().count();
        }
        Ok(())
    })
}
