//! C ABI over `bresse-core`.
//!
//! Systems are opaque heap handles created by [`bresse_system_new`] and
//! released by [`bresse_system_free`]. Every fallible call returns a
//! [`BresseStatus`]; the message of the most recent failure on the calling
//! thread is available from [`bresse_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bresse_core::resolvent::{resolvent_norm, NormOptions};
use bresse_core::spectral::{axis_scan, EigsOptions};
use bresse_core::timedomain::{simulate, InitialPreset, SimConfig};
use bresse_core::model::{SpeedVariant, DEFAULT_SPEED_TOL};
use bresse_core::{AssembledSystem, BresseError, ModelParams};

/// Status codes; nonzero values below 40 coincide with the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BresseStatus {
    Ok = 0,
    InvalidParameter = 10,
    Parse = 11,
    Schema = 12,
    TooCoarse = 13,
    IncompatibleBoundary = 14,
    InvalidArgument = 15,
    OutOfRange = 20,
    GridBeyondResolution = 21,
    EmptyGrid = 22,
    SingularAtLambda = 23,
    ShiftSingular = 24,
    NoConvergence = 25,
    FactorizationFailed = 26,
    WindowTooSmall = 27,
    NonpositiveEnergy = 28,
    Io = 30,
    MalformedInput = 31,
    NullPointer = 40,
    BufferTooSmall = 41,
    Panic = 42,
}

impl From<&BresseError> for BresseStatus {
    fn from(e: &BresseError) -> Self {
        use BresseStatus::*;
        match e.exit_code() {
            10 => InvalidParameter,
            11 => Parse,
            12 => Schema,
            13 => TooCoarse,
            14 => IncompatibleBoundary,
            15 => InvalidArgument,
            20 => OutOfRange,
            21 => GridBeyondResolution,
            22 => EmptyGrid,
            23 => SingularAtLambda,
            24 => ShiftSingular,
            25 => NoConvergence,
            26 => FactorizationFailed,
            27 => WindowTooSmall,
            28 => NonpositiveEnergy,
            30 => Io,
            31 => MalformedInput,
            _ => InvalidArgument,
        }
    }
}

/// Material, geometric and damping parameters of the beam.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BresseParams {
    pub rho1: f64,
    pub rho2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub l: f64,
    pub length: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d0: f64,
}

impl From<BresseParams> for ModelParams {
    fn from(p: BresseParams) -> Self {
        ModelParams {
            rho1: p.rho1,
            rho2: p.rho2,
            k1: p.k1,
            k2: p.k2,
            k3: p.k3,
            l: p.l,
            length: p.length,
            alpha: p.alpha,
            beta: p.beta,
            d0: p.d0,
        }
    }
}

impl From<ModelParams> for BresseParams {
    fn from(p: ModelParams) -> Self {
        BresseParams {
            rho1: p.rho1,
            rho2: p.rho2,
            k1: p.k1,
            k2: p.k2,
            k3: p.k3,
            l: p.l,
            length: p.length,
            alpha: p.alpha,
            beta: p.beta,
            d0: p.d0,
        }
    }
}

/// Initial data presets for [`bresse_simulate_energy`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BressePreset {
    Default = 0,
    Mixed = 1,
    Impulse = 2,
}

/// Opaque assembled system.
pub struct BresseSystem {
    inner: AssembledSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (BresseStatus, String)>) -> BresseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BresseStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BresseStatus::Panic
        }
    }
}

fn fail(e: BresseError) -> (BresseStatus, String) {
    (BresseStatus::from(&e), e.to_string())
}

fn null(name: &str) -> (BresseStatus, String) {
    (BresseStatus::NullPointer, format!("`{name}` is null"))
}

/// Writes the default parameter set into `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_params_default(out: *mut BresseParams) -> BresseStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ModelParams::default().into();
        Ok(())
    })
}

/// Validates `params`, meshes `[0, L]` with `n_elements` elements and
/// assembles the system. On success `*out` owns a new handle.
///
/// # Safety
/// `params` must be null or point to a valid struct; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_system_new(
    params: *const BresseParams,
    n_elements: usize,
    out: *mut *mut BresseSystem,
) -> BresseStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let inner = AssembledSystem::build(&ModelParams::from(*p), n_elements).map_err(fail)?;
        *out = Box::into_raw(Box::new(BresseSystem { inner }));
        Ok(())
    })
}

/// Releases a handle from [`bresse_system_new`]. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bresse_system_free(sys: *mut BresseSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of displacement unknowns (the state has twice as many).
///
/// # Safety
/// `sys` must be null or a live handle. Null yields 0.
#[no_mangle]
pub unsafe extern "C" fn bresse_system_dofs(sys: *const BresseSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.n_dofs())
}

/// `‖(iλ − A_h)⁻¹‖` in the energy norm.
///
/// # Safety
/// `sys` must be a live handle; `norm_out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_resolvent_norm(
    sys: *const BresseSystem,
    lambda: f64,
    seed: u64,
    norm_out: *mut f64,
) -> BresseStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let out = norm_out.as_mut().ok_or_else(|| null("norm_out"))?;
        let opts = NormOptions {
            seed,
            ..NormOptions::default()
        };
        *out = resolvent_norm(&s.inner, lambda, &opts).map_err(fail)?.norm;
        Ok(())
    })
}

/// Eigenvalues near `iμ` for each of the `n_mu` shifts in `mu`.
///
/// `*count_out` receives the number found. If it exceeds `capacity` the
/// call returns `BufferTooSmall` and nothing is written to `re_out`/`im_out`.
///
/// # Safety
/// `mu` must hold `n_mu` doubles; `re_out`/`im_out` must hold `capacity`
/// doubles each; `count_out` and `abscissa_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_axis_scan(
    sys: *const BresseSystem,
    mu: *const f64,
    n_mu: usize,
    seed: u64,
    re_out: *mut f64,
    im_out: *mut f64,
    capacity: usize,
    count_out: *mut usize,
    abscissa_out: *mut f64,
) -> BresseStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let count = count_out.as_mut().ok_or_else(|| null("count_out"))?;
        let abscissa = abscissa_out.as_mut().ok_or_else(|| null("abscissa_out"))?;
        let grid = slice_in(mu, n_mu, "mu")?;
        let opts = EigsOptions {
            seed,
            ..EigsOptions::default()
        };
        let report = axis_scan(&s.inner.pencil(), grid, &opts).map_err(fail)?;
        *count = report.pairs.len();
        *abscissa = report.spectral_abscissa;
        if report.pairs.len() > capacity {
            return Err((
                BresseStatus::BufferTooSmall,
                format!("{} eigenvalues found, capacity {capacity}", report.pairs.len()),
            ));
        }
        let re = slice_out(re_out, capacity, "re_out")?;
        let im = slice_out(im_out, capacity, "im_out")?;
        for (i, p) in report.pairs.iter().enumerate() {
            re[i] = p.value.re;
            im[i] = p.value.im;
        }
        Ok(())
    })
}

/// Integrates from a preset initial state and records the energy every
/// `stride` steps (and at the final step).
///
/// `*count_out` receives the number of samples. If it exceeds `capacity`
/// the call returns `BufferTooSmall` without running the simulation.
///
/// # Safety
/// `times_out`/`energy_out` must hold `capacity` doubles each; `count_out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_simulate_energy(
    sys: *const BresseSystem,
    preset: BressePreset,
    dt: f64,
    t_final: f64,
    stride: usize,
    times_out: *mut f64,
    energy_out: *mut f64,
    capacity: usize,
    count_out: *mut usize,
) -> BresseStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let count = count_out.as_mut().ok_or_else(|| null("count_out"))?;
        let cfg = SimConfig {
            dt,
            t_final,
            sample_stride: stride,
            fit_window: [t_final / 2.0, t_final],
        };
        cfg.validate().map_err(fail)?;
        let steps = cfg.n_steps();
        let samples = 1 + steps / stride + usize::from(!steps.is_multiple_of(stride));
        *count = samples;
        if samples > capacity {
            return Err((
                BresseStatus::BufferTooSmall,
                format!("{samples} samples needed, capacity {capacity}"),
            ));
        }
        let t = slice_out(times_out, capacity, "times_out")?;
        let e = slice_out(energy_out, capacity, "energy_out")?;
        let preset = match preset {
            BressePreset::Default => InitialPreset::Default,
            BressePreset::Mixed => InitialPreset::Mixed,
            BressePreset::Impulse => InitialPreset::Impulse,
        };
        let u0 = preset.project(&s.inner).map_err(fail)?;
        let series = simulate(&s.inner, &u0, &cfg).map_err(fail)?;
        debug_assert_eq!(series.times.len(), samples);
        t[..samples].copy_from_slice(&series.times);
        e[..samples].copy_from_slice(&series.energies);
        Ok(())
    })
}

/// Writes 0 for equal wave speeds (`k1/ρ1 = k2/ρ2`), 1 otherwise.
///
/// # Safety
/// `params` must point to a valid struct; `variant_out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bresse_classify_speeds(
    params: *const BresseParams,
    variant_out: *mut i32,
) -> BresseStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let out = variant_out.as_mut().ok_or_else(|| null("variant_out"))?;
        let p = ModelParams::from(*p).validate().map_err(fail)?;
        *out = match p.classify_speeds(DEFAULT_SPEED_TOL).variant {
            SpeedVariant::EqualSpeeds => 0,
            SpeedVariant::UnequalSpeeds => 1,
        };
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full length including the NUL, or 0
/// when no error has been recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bresse_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bresse_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

unsafe fn slice_in<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], (BresseStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_out<'a>(p: *mut f64, n: usize, name: &str) -> Result<&'a mut [f64], (BresseStatus, String)> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}
