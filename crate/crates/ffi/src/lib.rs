//! C ABI for the simulator.
//!
//! Handles are opaque pointers created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`MacrosimStatus`]; on failure a description is kept per thread and can
//! be read with [`macrosim_last_error_message`]. No function unwinds across
//! the boundary: a Rust panic is reported as [`MacrosimStatus::Panic`].
//!
//! Handles are not synchronized. Distinct handles may be used from distinct
//! threads at the same time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;

use macrosim::config::SimConfig;
use macrosim::facts::{bandpass_cycle, lorenz_gini, Band, MacroSeries};
use macrosim::kernel::{run_episode, EpisodeLog, MessageKind, Overrides, Simulation, Stage};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacrosimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BadConfig = 3,
    Simulation = 4,
    InvalidArgument = 5,
    /// The output buffer is too short; the required length was written.
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// Simulation parameters.
pub struct MacrosimConfig {
    inner: SimConfig,
}

/// A finished episode log.
pub struct MacrosimEpisode {
    inner: EpisodeLog,
}

impl MacrosimEpisode {
    /// The log behind the handle, for Rust callers.
    pub fn log(&self) -> &EpisodeLog {
        &self.inner
    }
}

/// A simulation advanced one period at a time with the configured policies.
pub struct MacrosimSimulation {
    inner: Option<Simulation>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    // interior NULs would truncate the C string
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: MacrosimStatus, message: impl Into<String>) -> MacrosimStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> MacrosimStatus) -> MacrosimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(MacrosimStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, MacrosimStatus> {
    if ptr.is_null() {
        return Err(fail(MacrosimStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| fail(MacrosimStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], MacrosimStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(fail(MacrosimStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Copy `data` into `out`, always reporting the full length in `written`.
unsafe fn copy_out(data: &[f64], out: *mut f64, capacity: usize, written: *mut usize) -> MacrosimStatus {
    if written.is_null() {
        return fail(MacrosimStatus::NullPointer, "`written` is null");
    }
    *written = data.len();
    if data.len() > capacity {
        return fail(MacrosimStatus::BufferTooSmall, format!("need {} values, have room for {capacity}", data.len()));
    }
    if !data.is_empty() {
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    }
    MacrosimStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! deref {
    ($ptr:expr, $name:literal) => {{
        if $ptr.is_null() {
            return fail(MacrosimStatus::NullPointer, concat!("`", $name, "` is null"));
        }
        &*$ptr
    }};
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn macrosim_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION.get_or_init(|| CString::new(env!("CARGO_PKG_VERSION")).expect("no NUL")).as_ptr()
}

/// Message of the last failed call on this thread, or null if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn macrosim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn macrosim_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Built-in default configuration.
///
/// # Safety
/// `out` must be a valid pointer to write a handle to.
#[no_mangle]
pub unsafe extern "C" fn macrosim_config_default(out: *mut *mut MacrosimConfig) -> MacrosimStatus {
    guard(|| {
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        *out = Box::into_raw(Box::new(MacrosimConfig { inner: SimConfig::default() }));
        MacrosimStatus::Ok
    })
}

/// Parse and validate a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_config_from_toml(
    toml: *const c_char,
    out: *mut *mut MacrosimConfig,
) -> MacrosimStatus {
    guard(|| {
        let text = try_status!(str_arg(toml, "toml"));
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        match SimConfig::from_toml_str(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MacrosimConfig { inner }));
                MacrosimStatus::Ok
            }
            Err(e) => fail(MacrosimStatus::BadConfig, e.to_string()),
        }
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards; null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn macrosim_config_free(config: *mut MacrosimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Simulate a whole episode with the configured policies.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_run_episode(
    config: *const MacrosimConfig,
    seed: u64,
    out: *mut *mut MacrosimEpisode,
) -> MacrosimStatus {
    guard(|| {
        let config = deref!(config, "config");
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        match run_episode(&config.inner, seed) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MacrosimEpisode { inner }));
                MacrosimStatus::Ok
            }
            Err(e) => fail(MacrosimStatus::Simulation, e.to_string()),
        }
    })
}

/// # Safety
/// `episode` must come from this library and not be used afterwards; null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_free(episode: *mut MacrosimEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// Number of simulated periods.
///
/// # Safety
/// `episode` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_periods(episode: *const MacrosimEpisode, out: *mut u32) -> MacrosimStatus {
    guard(|| {
        let episode = deref!(episode, "episode");
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        *out = episode.inner.quarters.len() as u32;
        MacrosimStatus::Ok
    })
}

/// Number of message kinds tracked by the kernel.
#[no_mangle]
pub extern "C" fn macrosim_message_kind_count() -> usize {
    MessageKind::ALL.len()
}

/// Static name of message kind `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn macrosim_message_kind_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names =
        NAMES.get_or_init(|| MessageKind::ALL.iter().map(|k| CString::new(k.as_str()).expect("no NUL")).collect());
    names.get(index).map_or(std::ptr::null(), |s| s.as_ptr())
}

/// Messages of kind `index` over the episode; `index == kind count` gives
/// the total over all kinds.
///
/// # Safety
/// `episode` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_messages(
    episode: *const MacrosimEpisode,
    index: usize,
    out: *mut u64,
) -> MacrosimStatus {
    guard(|| {
        let episode = deref!(episode, "episode");
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        let stats = episode.inner.message_stats();
        *out = match MessageKind::ALL.get(index) {
            Some(kind) => stats.get(*kind),
            None if index == MessageKind::ALL.len() => stats.total,
            None => return fail(MacrosimStatus::InvalidArgument, format!("message kind {index} out of range")),
        };
        MacrosimStatus::Ok
    })
}

/// Real GDP per period. `written` receives the series length even when the
/// buffer is too small.
///
/// # Safety
/// `out` must have room for `capacity` doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_real_gdp(
    episode: *const MacrosimEpisode,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MacrosimStatus {
    guard(|| {
        let episode = deref!(episode, "episode");
        copy_out(&MacroSeries::from_log(&episode.inner).real_gdp, out, capacity, written)
    })
}

/// Unemployment rate per period.
///
/// # Safety
/// As for [`macrosim_episode_real_gdp`].
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_unemployment(
    episode: *const MacrosimEpisode,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MacrosimStatus {
    guard(|| {
        let episode = deref!(episode, "episode");
        copy_out(&MacroSeries::from_log(&episode.inner).unemployment, out, capacity, written)
    })
}

/// Write `<prefix>.csv` and `<prefix>.json` into `dir`.
///
/// # Safety
/// `episode` must be a live handle; `dir` and `prefix` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn macrosim_episode_write(
    episode: *const MacrosimEpisode,
    dir: *const c_char,
    prefix: *const c_char,
) -> MacrosimStatus {
    guard(|| {
        let episode = deref!(episode, "episode");
        let dir = try_status!(str_arg(dir, "dir"));
        let prefix = try_status!(str_arg(prefix, "prefix"));
        match episode.inner.write_files(Path::new(dir), prefix) {
            Ok(()) => MacrosimStatus::Ok,
            Err(e) => fail(MacrosimStatus::Io, e.to_string()),
        }
    })
}

/// Start a simulation that is advanced with [`macrosim_simulation_step`].
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_simulation_new(
    config: *const MacrosimConfig,
    seed: u64,
    out: *mut *mut MacrosimSimulation,
) -> MacrosimStatus {
    guard(|| {
        let config = deref!(config, "config");
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        if let Some(agent) = macrosim::policy::AgentType::ALL
            .into_iter()
            .find(|a| config.inner.policies.get(*a).is_remote())
        {
            return fail(
                MacrosimStatus::BadConfig,
                format!("{} is bound to `remote`, which needs the environment server", agent.as_str()),
            );
        }
        match Simulation::new(config.inner.clone(), seed) {
            Ok(sim) => {
                *out = Box::into_raw(Box::new(MacrosimSimulation { inner: Some(sim) }));
                MacrosimStatus::Ok
            }
            Err(e) => fail(MacrosimStatus::Simulation, e.to_string()),
        }
    })
}

/// Advance one period. `done` is set to 1 once the horizon is reached.
///
/// # Safety
/// `sim` must be a live handle and `done` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_simulation_step(sim: *mut MacrosimSimulation, done: *mut u8) -> MacrosimStatus {
    guard(|| {
        if sim.is_null() || done.is_null() {
            return fail(MacrosimStatus::NullPointer, "`sim` or `done` is null");
        }
        let Some(inner) = (*sim).inner.as_mut() else {
            return fail(MacrosimStatus::InvalidArgument, "simulation was already converted to an episode");
        };
        if inner.stage() == Stage::Finished {
            return fail(MacrosimStatus::InvalidArgument, "episode already finished");
        }
        let result = inner.begin_period().and_then(|()| inner.finish_period(&Overrides::new()).map(|_| ()));
        if let Err(e) = result {
            return fail(MacrosimStatus::Simulation, e.to_string());
        }
        *done = u8::from(inner.stage() == Stage::Finished);
        MacrosimStatus::Ok
    })
}

/// Move the periods simulated so far into a new episode handle. The
/// simulation handle must still be freed and can no longer step.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn macrosim_simulation_finish(
    sim: *mut MacrosimSimulation,
    out: *mut *mut MacrosimEpisode,
) -> MacrosimStatus {
    guard(|| {
        if sim.is_null() || out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`sim` or `out` is null");
        }
        let Some(inner) = (*sim).inner.take() else {
            return fail(MacrosimStatus::InvalidArgument, "simulation was already converted to an episode");
        };
        *out = Box::into_raw(Box::new(MacrosimEpisode { inner: inner.into_log() }));
        MacrosimStatus::Ok
    })
}

/// # Safety
/// `sim` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn macrosim_simulation_free(sim: *mut MacrosimSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Gini coefficient of `len` values; negative values are shifted up first.
///
/// # Safety
/// `values` must point to `len` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn macrosim_gini(values: *const f64, len: usize, out: *mut f64) -> MacrosimStatus {
    guard(|| {
        let values = try_status!(slice_arg(values, len, "values"));
        if out.is_null() {
            return fail(MacrosimStatus::NullPointer, "`out` is null");
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return fail(MacrosimStatus::InvalidArgument, "values must be non-empty and finite");
        }
        *out = lorenz_gini(values).gini;
        MacrosimStatus::Ok
    })
}

/// Band-pass cyclical component; the output is `2 * k` shorter than the
/// input.
///
/// # Safety
/// `series` must point to `len` doubles, `out` have room for `capacity`
/// doubles and `written` be valid.
#[no_mangle]
pub unsafe extern "C" fn macrosim_bandpass(
    series: *const f64,
    len: usize,
    low: f64,
    high: f64,
    k: usize,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MacrosimStatus {
    guard(|| {
        let series = try_status!(slice_arg(series, len, "series"));
        match bandpass_cycle(series, Band { low, high, k }) {
            Ok(cycle) => copy_out(&cycle, out, capacity, written),
            Err(e) => fail(MacrosimStatus::InvalidArgument, e.to_string()),
        }
    })
}
