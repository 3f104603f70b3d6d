//! C ABI over the ibran simulator.
//!
//! Every fallible call returns an [`IbranStatus`]; on failure the message is
//! available from [`ibran_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ibran::fidelity::ssim::ssim;
use ibran::kpi::KpiRecord;
use ibran::media::image::GrayImage;
use ibran::sched::knapsack::{greedy_select, SchedulingItem};
use ibran::{Direction, EpisodeResult, Error, ScenarioConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbranStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Dataset = 4,
    Io = 5,
    Provider = 6,
    Invariant = 7,
    InvalidArgument = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbranDirection {
    Ul = 0,
    Dl = 1,
}

/// Per-direction episode KPIs. Undefined values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IbranKpi {
    pub pdr: f64,
    pub throughput_bps: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub prb_usage_pct: f64,
    pub decision_time_us: f64,
    pub candidate_set_mean: f64,
    pub iss_mean: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IbranItem {
    pub rnti: u16,
    pub utility: f64,
    pub demand: u32,
    pub relevant: bool,
}

/// Scenario configuration: TOML text plus `key=value` overrides.
pub struct IbranConfig {
    toml: String,
    overrides: Vec<(String, String)>,
    resolved: ScenarioConfig,
}

pub struct IbranEpisode {
    result: EpisodeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> IbranStatus {
    match err {
        Error::ConfigParse(_) | Error::Validation { .. } => IbranStatus::Config,
        Error::Dataset(_) | Error::Image { .. } => IbranStatus::Dataset,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => IbranStatus::Io,
        Error::Provider(_) => IbranStatus::Provider,
        Error::Episode { source, .. } => status_of(source),
        Error::DimensionMismatch(..) | Error::EmptyImage | Error::EmptyBatch(_) | Error::Unschedulable => {
            IbranStatus::InvalidArgument
        }
        Error::Allocation(_) | Error::Invariant(_) => IbranStatus::Invariant,
    }
}

/// Run `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (IbranStatus, String)>) -> IbranStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IbranStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside ibran");
            IbranStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (IbranStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(name: &str) -> (IbranStatus, String) {
    (IbranStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (IbranStatus, String)> {
    if p.is_null() {
        return Err(null_err(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (IbranStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

impl From<&KpiRecord> for IbranKpi {
    fn from(r: &KpiRecord) -> Self {
        IbranKpi {
            pdr: r.pdr,
            throughput_bps: r.throughput_bps,
            latency_ms: opt(r.latency_ms),
            jitter_ms: opt(r.jitter_ms),
            prb_usage_pct: r.prb_usage_pct,
            decision_time_us: opt(r.decision_time_us),
            candidate_set_mean: opt(r.candidate_set_mean),
            iss_mean: opt(r.iss_mean),
        }
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ibran_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ibran_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a scenario from TOML text. `toml` may be NULL for the defaults.
///
/// # Safety
/// `toml` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibran_config_new(toml: *const c_char, out: *mut *mut IbranConfig) -> IbranStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let text = if toml.is_null() { "" } else { read_str(toml, "toml")? };
        let resolved = ScenarioConfig::from_toml_str(text, &[]).map_err(core_err)?;
        let cfg = IbranConfig { toml: text.to_string(), overrides: Vec::new(), resolved };
        *out = Box::into_raw(Box::new(cfg));
        Ok(())
    })
}

/// Override one key, e.g. `("episode_s", "0.5")`. The config is unchanged on error.
///
/// # Safety
/// `cfg` must come from [`ibran_config_new`]; `key` and `value` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ibran_config_set(cfg: *mut IbranConfig, key: *const c_char, value: *const c_char) -> IbranStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null_err("cfg"))?;
        let key = read_str(key, "key")?;
        let value = read_str(value, "value")?;
        let mut overrides = cfg.overrides.clone();
        overrides.push((key.to_string(), value.to_string()));
        cfg.resolved = ScenarioConfig::from_toml_str(&cfg.toml, &overrides).map_err(core_err)?;
        cfg.overrides = overrides;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or come from [`ibran_config_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ibran_config_free(cfg: *mut IbranConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run one episode with the surrogate embedding provider.
///
/// # Safety
/// `cfg` must come from [`ibran_config_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibran_run_episode(cfg: *const IbranConfig, seed: u64, out: *mut *mut IbranEpisode) -> IbranStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null_err("cfg"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let result = ibran::run_episode(&cfg.resolved, seed).map_err(core_err)?;
        *out = Box::into_raw(Box::new(IbranEpisode { result }));
        Ok(())
    })
}

/// KPIs of one direction of a finished episode.
///
/// # Safety
/// `ep` must come from [`ibran_run_episode`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibran_episode_kpi(ep: *const IbranEpisode, direction: IbranDirection, out: *mut IbranKpi) -> IbranStatus {
    guard(|| {
        let ep = ep.as_ref().ok_or_else(|| null_err("ep"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let dir = match direction {
            IbranDirection::Ul => Direction::Ul,
            IbranDirection::Dl => Direction::Dl,
        };
        *out = ep.result.record(dir).into();
        Ok(())
    })
}

/// Number of simulated TTIs, or 0 for a NULL handle.
///
/// # Safety
/// `ep` must be NULL or come from [`ibran_run_episode`].
#[no_mangle]
pub unsafe extern "C" fn ibran_episode_ttis(ep: *const IbranEpisode) -> u64 {
    ep.as_ref().map_or(0, |e| e.result.ttis)
}

/// Object ID requested by the episode's intent, or 0 for a NULL handle.
///
/// # Safety
/// `ep` must be NULL or come from [`ibran_run_episode`].
#[no_mangle]
pub unsafe extern "C" fn ibran_episode_intent_object(ep: *const IbranEpisode) -> u32 {
    ep.as_ref().map_or(0, |e| e.result.intent.object_id)
}

/// # Safety
/// `ep` must be NULL or come from [`ibran_run_episode`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ibran_episode_free(ep: *mut IbranEpisode) {
    if !ep.is_null() {
        drop(Box::from_raw(ep));
    }
}

/// Intent Satisfaction Score of one flow.
#[no_mangle]
pub extern "C" fn ibran_iss(score: f64, relevant: bool, f_min: f64) -> f64 {
    ibran::fidelity::iss(score, relevant, f_min)
}

/// Gaussian-window SSIM of two 8-bit grayscale images of `width` x `height`.
///
/// # Safety
/// `a` and `b` must each point to `width * height` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibran_ssim(a: *const u8, b: *const u8, width: usize, height: usize, out: *mut f64) -> IbranStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null_err("image"));
        }
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let n = width.checked_mul(height).ok_or((IbranStatus::InvalidArgument, "image too large".into()))?;
        let gray = |p: *const u8| {
            GrayImage::new(width, height, std::slice::from_raw_parts(p, n).iter().map(|&v| f64::from(v)).collect())
        };
        *out = ssim(&gray(a), &gray(b)).map_err(core_err)?;
        Ok(())
    })
}

/// Greedy density knapsack over `n` items with capacity `b_max`. Writes 1 to
/// `selected[i]` for each chosen item and 0 otherwise.
///
/// # Safety
/// `items` and `selected` must each point to `n` elements; `total_utility` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ibran_greedy_select(
    items: *const IbranItem,
    n: usize,
    b_max: u32,
    selected: *mut u8,
    total_utility: *mut f64,
) -> IbranStatus {
    guard(|| {
        if n > 0 && (items.is_null() || selected.is_null()) {
            return Err(null_err("items"));
        }
        let input: Vec<SchedulingItem> = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(items, n)
                .iter()
                .map(|i| SchedulingItem { rnti: i.rnti, utility: i.utility, demand: i.demand, relevant: i.relevant })
                .collect()
        };
        if let Some(bad) = input.iter().find(|i| !i.utility.is_finite() || i.utility < 0.0) {
            return Err((IbranStatus::InvalidArgument, format!("utility of rnti {} is not a non-negative number", bad.rnti)));
        }
        let sel = greedy_select(&input, b_max);
        if n > 0 {
            let mask = std::slice::from_raw_parts_mut(selected, n);
            for (m, item) in mask.iter_mut().zip(&input) {
                *m = u8::from(sel.items.iter().any(|s| s.rnti == item.rnti));
            }
        }
        if let Some(t) = total_utility.as_mut() {
            *t = sel.total_utility;
        }
        Ok(())
    })
}
