//! C ABI for susplab.
//!
//! Every fallible function returns an [`SlStatus`]; on failure the message is
//! available from [`sl_last_error`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Mutex;

use susplab::dynamics::SuspensionParams;
use susplab::fuzzy::{FuzzyParams, FuzzySystem};
use susplab::optim::{cfoa_minimize, CfoaConfig};
use susplab::pid::PidGains;
use susplab::road::{generate_profile, RoadProfile, RoadSpec};
use susplab::sim::{compute_metrics, integrate_closed_loop, ControlMode, SimConfig, TimeSeries};
use susplab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Numeric = 3,
    Io = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlMode {
    Active = 0,
    SemiActiveZero = 1,
    SemiActiveFuzzyPid = 2,
}

/// Numeric plant parameters; sign convention and spring form keep their defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlPlantParams {
    pub m_s: f64,
    pub m_u: f64,
    pub g: f64,
    pub k11: f64,
    pub k12: f64,
    pub k13: f64,
    pub k21: f64,
    pub k22: f64,
    pub c_o: f64,
    pub c_s: f64,
    pub c_i: f64,
    pub k_s: f64,
    pub k_m: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub b_s: f64,
    pub b_u: f64,
}

impl From<SuspensionParams> for SlPlantParams {
    fn from(p: SuspensionParams) -> Self {
        Self {
            m_s: p.m_s,
            m_u: p.m_u,
            g: p.g,
            k11: p.k11,
            k12: p.k12,
            k13: p.k13,
            k21: p.k21,
            k22: p.k22,
            c_o: p.c_o,
            c_s: p.c_s,
            c_i: p.c_i,
            k_s: p.k_s,
            k_m: p.k_m,
            f_min: p.f_min,
            f_max: p.f_max,
            b_s: p.b_s,
            b_u: p.b_u,
        }
    }
}

impl SlPlantParams {
    fn to_params(self) -> SuspensionParams {
        SuspensionParams {
            m_s: self.m_s,
            m_u: self.m_u,
            g: self.g,
            k11: self.k11,
            k12: self.k12,
            k13: self.k13,
            k21: self.k21,
            k22: self.k22,
            c_o: self.c_o,
            c_s: self.c_s,
            c_i: self.c_i,
            k_s: self.k_s,
            k_m: self.k_m,
            f_min: self.f_min,
            f_max: self.f_max,
            b_s: self.b_s,
            b_u: self.b_u,
            ..SuspensionParams::default()
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SlMetrics {
    pub peak_accel: f64,
    pub rms_accel: f64,
    pub peak_distortion: f64,
    pub rms_distortion: f64,
    pub tire_load_min: f64,
    pub tire_load_max: f64,
}

/// Fuzzy controller handle.
pub struct SlFuzzy(FuzzySystem);

/// Road profile handle.
pub struct SlRoad(RoadProfile);

/// Simulation result handle.
pub struct SlTimeSeries(TimeSeries);

/// Objective callback: returns the score for gains (kp, ki, kd). Calls are serialized.
pub type SlObjective = Option<unsafe extern "C" fn(user_data: *mut c_void, kp: f64, ki: f64, kd: f64) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Config(_) => SlStatus::Io,
        e if e.is_numeric() => SlStatus::Numeric,
        _ => SlStatus::InvalidParameter,
    }
}

struct Fail(SlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SlStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    V.as_ptr()
}

/// # Safety
/// `out` must be NULL or point to writable memory for one `SlPlantParams`.
#[no_mangle]
pub unsafe extern "C" fn sl_plant_params_default(out: *mut SlPlantParams) -> SlStatus {
    guard(|| {
        *unsafe { out_ref(out, "out") }? = SuspensionParams::default().into();
        Ok(())
    })
}

/// Fuzzy controller with the default rule table, output clamped to `[f_min, f_max]`.
///
/// # Safety
/// `out` must be NULL or a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sl_fuzzy_new(f_min: f64, f_max: f64, out: *mut *mut SlFuzzy) -> SlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if !(f_min.is_finite() && f_max.is_finite() && f_min < f_max) {
            return Err(Fail(
                SlStatus::InvalidParameter,
                format!("need finite f_min < f_max, got [{f_min}, {f_max}]"),
            ));
        }
        let sys = FuzzySystem::from_params(&FuzzyParams::default())?.with_output_clamp(f_min, f_max);
        *out = Box::into_raw(Box::new(SlFuzzy(sys)));
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_fuzzy_infer(
    h: *const SlFuzzy,
    velocity: f64,
    acceleration: f64,
    distortion: f64,
    out: *mut f64,
) -> SlStatus {
    guard(|| {
        let h = unsafe { handle(h, "fuzzy handle") }?;
        let out = unsafe { out_ref(out, "out") }?;
        if ![velocity, acceleration, distortion].iter().all(|x| x.is_finite()) {
            return Err(Fail(SlStatus::InvalidParameter, "fuzzy inputs must be finite".into()));
        }
        *out = h.0.infer(velocity, acceleration, distortion);
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from `sl_fuzzy_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_fuzzy_free(h: *mut SlFuzzy) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Random road with the default spectrum and the given seed.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sl_road_generate(
    seed: u64,
    velocity: f64,
    dt: f64,
    duration: f64,
    out: *mut *mut SlRoad,
) -> SlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let spec = RoadSpec {
            seed,
            ..RoadSpec::default()
        };
        let road = generate_profile(&spec, velocity, dt, duration)?;
        *out = Box::into_raw(Box::new(SlRoad(road)));
        Ok(())
    })
}

/// Road from uniformly spaced elevation samples (copied).
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sl_road_from_samples(
    dt: f64,
    samples: *const f64,
    len: usize,
    velocity: f64,
    out: *mut *mut SlRoad,
) -> SlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        let v = unsafe { std::slice::from_raw_parts(samples, len) }.to_vec();
        *out = Box::into_raw(Box::new(SlRoad(RoadProfile::new(dt, v, velocity)?)));
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sl_road_len(h: *const SlRoad) -> usize {
    unsafe { h.as_ref() }.map_or(0, |r| r.0.len())
}

/// Copies up to `cap` samples into `buf`; `written` receives the count.
///
/// # Safety
/// `buf` must have room for `cap` doubles; `written` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn sl_road_samples(h: *const SlRoad, buf: *mut f64, cap: usize, written: *mut usize) -> SlStatus {
    guard(|| {
        let h = unsafe { handle(h, "road handle") }?;
        let n = copy_out(&h.0.samples, buf, cap)?;
        if let Some(w) = unsafe { written.as_mut() } {
            *w = n;
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a road handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_road_free(h: *mut SlRoad) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> Result<usize, Fail> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    let n = src.len().min(cap);
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, n) };
    Ok(n)
}

/// Closed-loop simulation over the whole road.
///
/// `params` and `fuzzy` may be NULL for the defaults. Gains are used only in
/// fuzzy-PID mode.
///
/// # Safety
/// Non-NULL pointers must be valid; `road` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_simulate(
    params: *const SlPlantParams,
    fuzzy: *const SlFuzzy,
    road: *const SlRoad,
    mode: SlMode,
    kp: f64,
    ki: f64,
    kd: f64,
    dt: f64,
    out: *mut *mut SlTimeSeries,
) -> SlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let road = unsafe { handle(road, "road handle") }?;
        let p = unsafe { params.as_ref() }.map_or_else(SuspensionParams::default, |p| p.to_params());
        p.validate()?;
        let default_fuzzy;
        let fz = match unsafe { fuzzy.as_ref() } {
            Some(f) => &f.0,
            None => {
                default_fuzzy = FuzzySystem::from_params(&FuzzyParams::default())?.with_output_clamp(p.f_min, p.f_max);
                &default_fuzzy
            }
        };
        let mode = match mode {
            SlMode::Active => ControlMode::Active,
            SlMode::SemiActiveZero => ControlMode::SemiActiveZero,
            SlMode::SemiActiveFuzzyPid => ControlMode::SemiActiveFuzzyPid,
        };
        let cfg = SimConfig {
            dt,
            duration: road.0.duration(),
            velocity: road.0.velocity,
            mode,
            ..SimConfig::default()
        };
        cfg.validate()?;
        let ts = integrate_closed_loop(&p, fz, &PidGains::new(kp, ki, kd), &road.0, &cfg)?;
        *out = Box::into_raw(Box::new(SlTimeSeries(ts)));
        Ok(())
    })
}

/// Number of samples per channel.
///
/// # Safety
/// `h` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn sl_timeseries_len(h: *const SlTimeSeries) -> usize {
    unsafe { h.as_ref() }.map_or(0, |t| t.0.len())
}

/// Number of channels (time plus nine signals).
#[no_mangle]
pub extern "C" fn sl_timeseries_channel_count() -> usize {
    TimeSeries::COLUMNS.len()
}

/// Static NUL-terminated name of channel `index`, or NULL if out of range.
#[no_mangle]
pub extern "C" fn sl_timeseries_channel_name(index: usize) -> *const c_char {
    const NAMES: [&CStr; 10] = [
        c"time_s",
        c"z_s_m",
        c"z_u_m",
        c"v_s_mps",
        c"v_u_mps",
        c"a_s_mps2",
        c"distortion_m",
        c"tire_load_n",
        c"f_d_n",
        c"u_pid",
    ];
    NAMES.get(index).map_or(ptr::null(), |c| c.as_ptr())
}

/// Copies up to `cap` values of channel `index` into `buf`.
///
/// # Safety
/// `buf` must have room for `cap` doubles; `written` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn sl_timeseries_channel(
    h: *const SlTimeSeries,
    index: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> SlStatus {
    guard(|| {
        let h = unsafe { handle(h, "time series handle") }?;
        let ch = h.0.channels();
        let src = ch.get(index).ok_or_else(|| {
            Fail(
                SlStatus::OutOfRange,
                format!("channel {index} out of range (0..{})", ch.len()),
            )
        })?;
        let n = copy_out(src, buf, cap)?;
        if let Some(w) = unsafe { written.as_mut() } {
            *w = n;
        }
        Ok(())
    })
}

/// Metrics over samples with `t > settle_skip`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_timeseries_metrics(
    h: *const SlTimeSeries,
    settle_skip: f64,
    out: *mut SlMetrics,
) -> SlStatus {
    guard(|| {
        let h = unsafe { handle(h, "time series handle") }?;
        let out = unsafe { out_ref(out, "out") }?;
        let m = compute_metrics(&h.0, settle_skip)?;
        *out = SlMetrics {
            peak_accel: m.peak_accel,
            rms_accel: m.rms_accel,
            peak_distortion: m.peak_distortion,
            rms_distortion: m.rms_distortion,
            tire_load_min: m.tire_load_min,
            tire_load_max: m.tire_load_max,
        };
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a time series handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_timeseries_free(h: *mut SlTimeSeries) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

struct Callback {
    f: unsafe extern "C" fn(*mut c_void, f64, f64, f64) -> f64,
    user: usize,
}

/// Chaotic fruit-fly minimization of a caller-supplied objective over positive gains.
///
/// `gains_out` receives kp, ki, kd; `score_out` may be NULL.
///
/// # Safety
/// `objective` must be callable with `user_data`; `gains_out` must have room for three doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_cfoa_minimize(
    objective: SlObjective,
    user_data: *mut c_void,
    pop_size: usize,
    max_iter: usize,
    seed: u64,
    gains_out: *mut f64,
    score_out: *mut f64,
) -> SlStatus {
    guard(|| {
        let f = objective.ok_or_else(|| null("objective"))?;
        if gains_out.is_null() {
            return Err(null("gains_out"));
        }
        let cfg = CfoaConfig {
            pop_size,
            max_iter,
            seed,
            ..CfoaConfig::default()
        };
        let cb = Mutex::new(Callback {
            f,
            user: user_data as usize,
        });
        let obj = |g: &PidGains| {
            let c = cb.lock().unwrap_or_else(|p| p.into_inner());
            unsafe { (c.f)(c.user as *mut c_void, g.kp, g.ki, g.kd) }
        };
        let r = cfoa_minimize(&obj, &cfg)?;
        let g = r.best_gains.as_array();
        unsafe { ptr::copy_nonoverlapping(g.as_ptr(), gains_out, 3) };
        if let Some(s) = unsafe { score_out.as_mut() } {
            *s = r.best_score;
        }
        Ok(())
    })
}
