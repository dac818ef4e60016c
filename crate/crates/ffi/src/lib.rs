//! C ABI over `heate-core`.
//!
//! Objects cross the boundary as opaque pointers created by `*_parse`,
//! `*_generate` or `heate_run` and released with the matching `*_free`.
//! Every fallible call returns a [`HeateStatus`]; on failure
//! [`heate_last_error`] describes what went wrong on the calling thread.
//! Strings returned by the library are owned by the caller and must be
//! released with [`heate_string_free`]. Panics never unwind into C; they
//! surface as [`HeateStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heate_core::heate::{self, Algorithm, HeateError, HeateResult as CoreResult};
use heate_core::milp::{export_lp, SolutionCertificate};
use heate_core::topology::Topology;
use heate_core::traffic::{generate_matrix, GeneratorParams, TrafficMatrix};
use heate_core::weight_search::SearchConfig;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    /// The full topology cannot carry the traffic.
    Infeasible = 5,
    OutOfRange = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeateAlgorithm {
    Heate = 0,
    EaOspf = 1,
    EaFa = 2,
}

impl From<HeateAlgorithm> for Algorithm {
    fn from(a: HeateAlgorithm) -> Self {
        match a {
            HeateAlgorithm::Heate => Algorithm::Heate,
            HeateAlgorithm::EaOspf => Algorithm::EaOspf,
            HeateAlgorithm::EaFa => Algorithm::EaFa,
        }
    }
}

/// Search parameters for [`heate_run`]; start from [`heate_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HeateConfig {
    pub beta: f64,
    pub sleep_fraction: f64,
    pub iterations: usize,
    pub try_next_on_failure: bool,
}

impl From<HeateConfig> for SearchConfig {
    fn from(c: HeateConfig) -> Self {
        SearchConfig {
            beta: c.beta,
            sleep_fraction: c.sleep_fraction,
            iterations: c.iterations,
            try_next_on_failure: c.try_next_on_failure,
        }
    }
}

pub struct HeateTopology(Topology);
pub struct HeateTraffic(TrafficMatrix);
pub struct HeateResult(CoreResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

struct Failure(HeateStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(HeateStatus::NullPointer, format!("{what} is null"))
    }
}

/// Runs `body`, records any failure message and maps panics to
/// [`HeateStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HeateStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HeateStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            HeateStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(HeateStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    let owned = CString::new(value).map_err(|e| Failure(HeateStatus::InvalidArgument, e.to_string()))?;
    put(out, owned.into_raw(), "out")
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. Valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn heate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn heate_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn heate_config_default() -> HeateConfig {
    let c = SearchConfig::default();
    HeateConfig {
        beta: c.beta,
        sleep_fraction: c.sleep_fraction,
        iterations: c.iterations,
        try_next_on_failure: c.try_next_on_failure,
    }
}

/// Parses the `node` / `link` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_topology_parse(text: *const c_char, out: *mut *mut HeateTopology) -> HeateStatus {
    guard(|| {
        let topo =
            Topology::parse(self::text(text, "text")?).map_err(|e| Failure(HeateStatus::Parse, e.to_string()))?;
        put(out, Box::into_raw(Box::new(HeateTopology(topo))), "out")
    })
}

/// # Safety
/// `topo` must come from [`heate_topology_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn heate_topology_free(topo: *mut HeateTopology) {
    if !topo.is_null() {
        drop(Box::from_raw(topo));
    }
}

/// Node count and physical (bidirectional) link count.
///
/// # Safety
/// `topo` must be a live topology; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_topology_size(
    topo: *const HeateTopology,
    nodes: *mut usize,
    physical_links: *mut usize,
) -> HeateStatus {
    guard(|| {
        let topo = &borrow(topo, "topo")?.0;
        put(nodes, topo.node_count(), "nodes")?;
        put(physical_links, topo.physical_link_count(), "physical_links")
    })
}

/// Makes exactly `count` seeded nodes SDN switches and the rest IP routers.
///
/// # Safety
/// `topo` must be a live topology.
#[no_mangle]
pub unsafe extern "C" fn heate_topology_place_sdn(topo: *mut HeateTopology, count: usize, seed: u64) -> HeateStatus {
    guard(|| {
        let topo = &mut borrow_mut(topo, "topo")?.0;
        topo.place_sdn(count, seed).map_err(|e| Failure(HeateStatus::OutOfRange, e.to_string()))
    })
}

/// Parses `demand` lines against the node names of `topo`.
///
/// # Safety
/// `topo` must be a live topology, `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn heate_traffic_parse(
    topo: *const HeateTopology,
    text: *const c_char,
    out: *mut *mut HeateTraffic,
) -> HeateStatus {
    guard(|| {
        let topo = &borrow(topo, "topo")?.0;
        let tm = TrafficMatrix::parse(self::text(text, "text")?, topo)
            .map_err(|e| Failure(HeateStatus::Parse, e.to_string()))?;
        put(out, Box::into_raw(Box::new(HeateTraffic(tm))), "out")
    })
}

/// Seeded capacity-driven matrix.
///
/// # Safety
/// `topo` must be a live topology; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_traffic_generate(
    topo: *const HeateTopology,
    sigma_max: f64,
    seed: u64,
    out: *mut *mut HeateTraffic,
) -> HeateStatus {
    guard(|| {
        let topo = &borrow(topo, "topo")?.0;
        let tm = generate_matrix(topo, &GeneratorParams { sigma_max, seed })
            .map_err(|e| Failure(HeateStatus::InvalidArgument, e.to_string()))?;
        put(out, Box::into_raw(Box::new(HeateTraffic(tm))), "out")
    })
}

/// # Safety
/// `tm` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn heate_traffic_free(tm: *mut HeateTraffic) {
    if !tm.is_null() {
        drop(Box::from_raw(tm));
    }
}

/// Runs one algorithm. Returns [`HeateStatus::Infeasible`] if the full
/// topology cannot carry `tm` within `config.beta`.
///
/// # Safety
/// `topo` and `tm` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_run(
    topo: *const HeateTopology,
    tm: *const HeateTraffic,
    algorithm: HeateAlgorithm,
    config: HeateConfig,
    out: *mut *mut HeateResult,
) -> HeateStatus {
    guard(|| {
        let topo = &borrow(topo, "topo")?.0;
        let tm = &borrow(tm, "tm")?.0;
        let result = heate::run(topo, tm, &config.into(), algorithm.into()).map_err(|e| match e {
            HeateError::InitialInfeasible(_) => Failure(HeateStatus::Infeasible, e.to_string()),
            _ => Failure(HeateStatus::InvalidArgument, e.to_string()),
        })?;
        put(out, Box::into_raw(Box::new(HeateResult(result))), "out")
    })
}

/// # Safety
/// `result` must come from [`heate_run`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn heate_result_free(result: *mut HeateResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Headline numbers of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HeateSummary {
    pub energy_saving_ratio: f64,
    pub max_utilization: f64,
    pub rounds: usize,
    pub removed_links: usize,
    pub active_links: usize,
}

/// # Safety
/// `result` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_result_summary(result: *const HeateResult, out: *mut HeateSummary) -> HeateStatus {
    guard(|| {
        let r = &borrow(result, "result")?.0;
        let summary = HeateSummary {
            energy_saving_ratio: r.energy_saving_ratio,
            max_utilization: r.max_utilization,
            rounds: r.rounds,
            removed_links: r.removed.len(),
            active_links: r.topology.active_physical_links().count(),
        };
        put(out, summary, "out")
    })
}

/// Physical id of the `index`-th removed link, in removal order. Physical
/// link `k` is the `k`-th `link` line of the topology text.
///
/// # Safety
/// `result` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_result_removed_link(
    result: *const HeateResult,
    index: usize,
    out: *mut usize,
) -> HeateStatus {
    guard(|| {
        let r = &borrow(result, "result")?.0;
        let link = r.removed.get(index).ok_or_else(|| {
            Failure(HeateStatus::OutOfRange, format!("index {index} out of {} removed links", r.removed.len()))
        })?;
        put(out, link.0, "out")
    })
}

/// Final weights, one per directed link (`2k` declared direction of
/// physical link `k`, `2k + 1` reverse). Writes at most `capacity` entries
/// and always stores the full length in `len`.
///
/// # Safety
/// `result` must be live; `weights` must hold `capacity` doubles (may be
/// NULL when `capacity` is 0); `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn heate_result_weights(
    result: *const HeateResult,
    weights: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> HeateStatus {
    guard(|| {
        let all = borrow(result, "result")?.0.weights();
        if capacity > 0 {
            if weights.is_null() {
                return Err(Failure::null("weights"));
            }
            let n = capacity.min(all.len());
            ptr::copy_nonoverlapping(all.as_ptr(), weights, n);
        }
        put(len, all.len(), "len")
    })
}

/// Solution certificate of the final state as JSON.
///
/// # Safety
/// `result` must be live; `out` must be writable. Free the string with
/// [`heate_string_free`].
#[no_mangle]
pub unsafe extern "C" fn heate_result_certificate_json(
    result: *const HeateResult,
    out: *mut *mut c_char,
) -> HeateStatus {
    guard(|| {
        let r = &borrow(result, "result")?.0;
        put_string(out, SolutionCertificate::from_result(r).to_json())
    })
}

/// The exact model in CPLEX LP format.
///
/// # Safety
/// `topo` and `tm` must be live; `out` must be writable. Free the string
/// with [`heate_string_free`].
#[no_mangle]
pub unsafe extern "C" fn heate_export_lp(
    topo: *const HeateTopology,
    tm: *const HeateTraffic,
    beta: f64,
    out: *mut *mut c_char,
) -> HeateStatus {
    guard(|| {
        let topo = &borrow(topo, "topo")?.0;
        let tm = &borrow(tm, "tm")?.0;
        tm.check_dimension(topo).map_err(|e| Failure(HeateStatus::InvalidArgument, e.to_string()))?;
        put_string(out, export_lp(topo, tm, beta))
    })
}
