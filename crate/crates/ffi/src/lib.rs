//! C interface to `susy-decoherence`.
//!
//! Every function returns an [`SdStatus`]; on failure a description is kept
//! per thread and can be read with [`sd_last_error_message`]. Models are
//! opaque handles created by [`sd_model_new`] and released with
//! [`sd_model_free`]. Output buffers are caller-owned. No function unwinds
//! across the boundary; a Rust panic is reported as `SD_STATUS_PANIC`.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use susy_decoherence::cli::commands::compute;
use susy_decoherence::cli::config::{ConfigError, EvolutionConfig, GridConfig};
use susy_decoherence::cli::{CliError, Scenario, ScenarioConfig};
use susy_decoherence::dsl::{parse_superpotential, DslError, ExpressionSource};
use susy_decoherence::grid::{purity, reduced_density};
use susy_decoherence::harmonic::{
    decoherence_equal_freq_channels, decoherence_paper, frequencies_match, GaussianPacket,
};
use susy_decoherence::potential::{find_equilibria, resolve_channel, Channel, PotentialError, SuperpotentialModel};
use susy_decoherence::series::Method;
use susy_decoherence::Complex64;

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The superpotential expression did not parse.
    Parse = 3,
    /// The model has no usable harmonic reduction.
    Model = 4,
    /// Norm loss, box truncation or another numerical contract failure.
    Numerical = 5,
    /// `capacity` was too small; the required count was still written.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Values accepted for `channel` arguments.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdChannel {
    Plus = 0,
    Minus = 1,
}

/// Values accepted for `method` arguments.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdMethod {
    PaperEq30 = 0,
    EqualFreqEq34 = 1,
    GaussianOracle = 2,
    Grid = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SdComplex {
    pub re: f64,
    pub im: f64,
}

/// Quadratic model of one channel about its equilibrium.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SdHarmonicChannel {
    pub x0: f64,
    pub omega0: f64,
    pub v0: f64,
    pub f: f64,
    pub e0: f64,
    pub g: f64,
    pub mass: f64,
    pub hbar: f64,
}

/// Grid propagation settings. `half_width <= 0` and `dt <= 0` select the
/// automatic box and `period / 20000`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdGridOptions {
    pub n: usize,
    pub half_width: f64,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub clamp_harmonic: bool,
}

/// Opaque model handle.
pub struct SdModel {
    expression: String,
    model: SuperpotentialModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SdStatus, String);

impl From<DslError> for Failure {
    fn from(e: DslError) -> Self {
        Failure(SdStatus::Parse, e.to_string())
    }
}

impl From<PotentialError> for Failure {
    fn from(e: PotentialError) -> Self {
        Failure(SdStatus::Model, e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(m) => m.into(),
            ConfigError::Expression(d) => d.into(),
            other => Failure(SdStatus::InvalidArgument, other.to_string()),
        }
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Config(c) => c.into(),
            CliError::Usage(m) => Failure(SdStatus::InvalidArgument, m),
            other => Failure(SdStatus::Numerical, other.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SdStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            SdStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(SdStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

fn channel_from(raw: i32) -> Result<Channel, Failure> {
    match raw {
        0 => Ok(Channel::Plus),
        1 => Ok(Channel::Minus),
        _ => Err(invalid(format!("channel must be 0 (plus) or 1 (minus), got {raw}"))),
    }
}

fn method_from(raw: i32) -> Result<Method, Failure> {
    match raw {
        0 => Ok(Method::PaperEq30),
        1 => Ok(Method::EqualFreqEq34),
        2 => Ok(Method::GaussianOracle),
        3 => Ok(Method::Grid),
        _ => Err(invalid(format!("method must lie in 0..=3, got {raw}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static description of a status code; unknown codes get a fixed text.
#[no_mangle]
pub extern "C" fn sd_status_message(status: i32) -> *const c_char {
    let s: &'static str = match status {
        0 => "ok\0",
        1 => "null pointer argument\0",
        2 => "invalid argument\0",
        3 => "expression parse error\0",
        4 => "model has no usable harmonic reduction\0",
        5 => "numerical contract violated\0",
        6 => "output buffer too small\0",
        7 => "internal panic\0",
        _ => "unknown status\0",
    };
    s.as_ptr().cast()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `expression` as the superpotential `W(x)` and creates a model.
///
/// # Safety
/// `expression` must be a NUL-terminated string and `out_model` a valid
/// pointer. On success `*out_model` owns a handle for [`sd_model_free`].
#[no_mangle]
pub unsafe extern "C" fn sd_model_new(
    expression: *const c_char,
    mass: f64,
    hbar: f64,
    out_model: *mut *mut SdModel,
) -> SdStatus {
    guarded(|| {
        non_null(expression, "expression")?;
        non_null(out_model, "out_model")?;
        let text = unsafe { CStr::from_ptr(expression) }
            .to_str()
            .map_err(|_| Failure(SdStatus::Parse, "expression is not UTF-8".into()))?;
        let w = parse_superpotential(&ExpressionSource::new(text, "expression"))?;
        let model = SuperpotentialModel::new(w, mass, hbar)?;
        let handle = Box::new(SdModel { expression: text.to_string(), model });
        unsafe { *out_model = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from [`sd_model_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sd_model_free(model: *mut SdModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

unsafe fn model_ref<'a>(model: *const SdModel) -> Result<&'a SdModel, Failure> {
    non_null(model, "model")?;
    Ok(unsafe { &*model })
}

/// Writes the stable equilibria of channel `channel` (ascending) to `out`.
/// `*out_count` always receives the number found.
///
/// # Safety
/// `out` must hold `capacity` doubles (it may be NULL when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn sd_model_equilibria(
    model: *const SdModel,
    channel: i32,
    out: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> SdStatus {
    guarded(|| {
        let m = unsafe { model_ref(model) }?;
        non_null(out_count, "out_count")?;
        let xs = find_equilibria(&m.model, channel_from(channel)?)?;
        unsafe { *out_count = xs.len() };
        if xs.len() > capacity {
            return Err(Failure(SdStatus::BufferTooSmall, format!("{} equilibria, capacity {capacity}", xs.len())));
        }
        non_null(out, "out")?;
        unsafe { ptr::copy_nonoverlapping(xs.as_ptr(), out, xs.len()) };
        Ok(())
    })
}

/// Harmonic reduction of one channel about its selected equilibrium.
///
/// # Safety
/// `out` must point to writable storage for one [`SdHarmonicChannel`].
#[no_mangle]
pub unsafe extern "C" fn sd_model_harmonic_channel(
    model: *const SdModel,
    channel: i32,
    out: *mut SdHarmonicChannel,
) -> SdStatus {
    guarded(|| {
        let m = unsafe { model_ref(model) }?;
        non_null(out, "out")?;
        let hc = resolve_channel(&m.model, channel_from(channel)?)?;
        unsafe {
            *out = SdHarmonicChannel {
                x0: hc.x0,
                omega0: hc.omega0,
                v0: hc.v0,
                f: hc.f,
                e0: hc.e0,
                g: hc.g,
                mass: hc.mass,
                hbar: hc.hbar,
            }
        };
        Ok(())
    })
}

/// Decoherence factor `D(t)` at `count` times by a closed-form method
/// (`SD_METHOD_PAPER_EQ30`, `SD_METHOD_EQUAL_FREQ_EQ34` or
/// `SD_METHOD_GAUSSIAN_ORACLE`). The oracle starts from the vacuum Gaussian
/// of the geometric-mean frequency at `x = 0`. Grid results come from
/// [`sd_grid_decoherence`].
///
/// # Safety
/// `times` and `out` must each hold `count` elements.
#[no_mangle]
pub unsafe extern "C" fn sd_decoherence_series(
    model: *const SdModel,
    method: i32,
    times: *const f64,
    count: usize,
    out: *mut SdComplex,
) -> SdStatus {
    guarded(|| {
        let m = unsafe { model_ref(model) }?;
        let method = method_from(method)?;
        if count == 0 {
            return Ok(());
        }
        non_null(times, "times")?;
        non_null(out, "out")?;
        let times = unsafe { std::slice::from_raw_parts(times, count) };
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times must be finite"));
        }
        let plus = resolve_channel(&m.model, Channel::Plus)?;
        let minus = resolve_channel(&m.model, Channel::Minus)?;
        let value: Box<dyn Fn(f64) -> Complex64> = match method {
            Method::PaperEq30 => Box::new(|t| decoherence_paper(&plus, &minus, t)),
            Method::EqualFreqEq34 => {
                if !frequencies_match(&plus, &minus) {
                    return Err(invalid(format!(
                        "equal-frequency form needs omega0+ = omega0- (got {} and {})",
                        plus.omega0, minus.omega0
                    )));
                }
                Box::new(|t| decoherence_equal_freq_channels(&plus, &minus, t))
            }
            Method::GaussianOracle => {
                let width = (m.model.hbar() / (2.0 * m.model.mass() * (plus.omega0 * minus.omega0).sqrt())).sqrt();
                let packet = GaussianPacket::with_width(0.0, width, 0.0, m.model.hbar());
                Box::new(move |t| packet.evolve(&plus, t).overlap(&packet.evolve(&minus, t)))
            }
            Method::Grid => return Err(invalid("use sd_grid_decoherence for the grid method")),
        };
        let out = unsafe { std::slice::from_raw_parts_mut(out, count) };
        for (slot, t) in out.iter_mut().zip(times) {
            let d = value(*t);
            *slot = SdComplex { re: d.re, im: d.im };
        }
        Ok(())
    })
}

/// Defaults matching the command-line tool: n = 2048, automatic box and
/// step, 20000 steps sampled every 100, harmonic clamp on.
///
/// # Safety
/// `out` must point to writable storage for one [`SdGridOptions`].
#[no_mangle]
pub unsafe extern "C" fn sd_grid_options_default(out: *mut SdGridOptions) -> SdStatus {
    guarded(|| {
        non_null(out, "out")?;
        unsafe {
            *out = SdGridOptions {
                n: 2048,
                half_width: 0.0,
                dt: 0.0,
                steps: 20000,
                sample_every: 100,
                clamp_harmonic: true,
            }
        };
        Ok(())
    })
}

/// Propagates the vacuum Gaussian at `x = 0` in both channels on a grid and
/// writes the sample times and `D(t)`. `*out_count` always receives the
/// number of samples.
///
/// # Safety
/// `options` must be valid; `out_times` and `out_values` must each hold
/// `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn sd_grid_decoherence(
    model: *const SdModel,
    options: *const SdGridOptions,
    out_times: *mut f64,
    out_values: *mut SdComplex,
    capacity: usize,
    out_count: *mut usize,
) -> SdStatus {
    guarded(|| {
        let m = unsafe { model_ref(model) }?;
        non_null(options, "options")?;
        non_null(out_count, "out_count")?;
        let o = unsafe { *options };
        if o.steps == 0 || o.sample_every == 0 {
            return Err(invalid("steps and sample_every must be positive"));
        }
        if !o.n.is_power_of_two() || o.n < 64 {
            return Err(invalid(format!("n must be a power of two and at least 64, got {}", o.n)));
        }
        let positive = |v: f64| (v.is_finite() && v > 0.0).then_some(v);
        let mut config = ScenarioConfig::for_expression(&m.expression)?;
        config.model.model = m.model.clone();
        config.grid = GridConfig { n: o.n, half_width: positive(o.half_width) };
        config.evolution = EvolutionConfig {
            dt: positive(o.dt),
            steps: o.steps,
            sample_every: o.sample_every,
            clamp_harmonic: o.clamp_harmonic,
        };
        config.output.methods = vec![Method::Grid];
        let scenario = Scenario::resolve(&config)?;
        let computed = compute(&scenario)?;
        let series = computed.series.iter().find(|s| s.method() == Method::Grid).expect("grid method requested");
        let n = series.len();
        unsafe { *out_count = n };
        if n > capacity {
            return Err(Failure(SdStatus::BufferTooSmall, format!("{n} samples, capacity {capacity}")));
        }
        non_null(out_times, "out_times")?;
        non_null(out_values, "out_values")?;
        let (times, values) = unsafe {
            (std::slice::from_raw_parts_mut(out_times, n), std::slice::from_raw_parts_mut(out_values, n))
        };
        times.copy_from_slice(series.times());
        for (slot, d) in values.iter_mut().zip(series.values()) {
            *slot = SdComplex { re: d.re, im: d.im };
        }
        Ok(())
    })
}

/// Purity `Tr ρ²` of the spin state with amplitudes `c_plus`, `c_minus`
/// (unit total weight) and decoherence factor `d`.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sd_purity(c_plus: SdComplex, c_minus: SdComplex, d: SdComplex, out: *mut f64) -> SdStatus {
    guarded(|| {
        non_null(out, "out")?;
        let (cp, cm) = (Complex64::new(c_plus.re, c_plus.im), Complex64::new(c_minus.re, c_minus.im));
        let weight = cp.norm_sqr() + cm.norm_sqr();
        if !((weight - 1.0).abs() <= 1e-12) {
            return Err(invalid(format!("|c_plus|^2 + |c_minus|^2 must equal 1 within 1e-12, got {weight}")));
        }
        let rho = reduced_density(cp, cm, Complex64::new(d.re, d.im));
        unsafe { *out = purity(&rho) };
        Ok(())
    })
}
