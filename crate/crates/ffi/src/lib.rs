//! C ABI over `dynet`.
//!
//! Graphs are opaque `DynetGraph` handles created by `dynet_graph_from_json`
//! or `dynet_graph_generate` and released with `dynet_graph_free`. Every
//! fallible call returns a `DynetStatus`; on failure `dynet_last_error`
//! describes the problem. Strings returned through `char **` are owned by the
//! caller and must be released with `dynet_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dynet::dynamic_graph::{
    load_dynamic_graph, save_dynamic_graph, Bound, DynamicGraph, GraphError, NodeId,
};
use dynet::generators::{Family, GeneratorSpec, StaticShape};
use dynet::influence::{
    all_metrics, compute_ct, compute_iit, compute_moi, compute_oit, dynamic_diameter, future_set,
    MetricResult,
};
use dynet::local_windows::{CoverNetwork, ModelError};
use dynet::protocols::{run_sync, summarize, ProtocolInstance, SimError};
use serde::Deserialize;

/// Opaque schedule handle.
pub struct DynetGraph(DynamicGraph);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Precondition = 7,
    ModelViolation = 8,
    Timeout = 9,
    Panic = 255,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynetFamily {
    Soifer = 0,
    AlternatingRing = 1,
    /// `param` is `k`.
    OitIitGap = 2,
    SplitHalves = 3,
    StaticComplete = 4,
    StaticPath = 5,
    StaticCycle = 6,
    StaticStar = 7,
    StaticEmpty = 8,
    /// `param` is the horizon.
    RandomOit1 = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynetMetric {
    Oit = 0,
    Iit = 1,
    Moi = 2,
    Ct = 3,
    EdgePeriod = 4,
    DynamicDiameter = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DynetMetricValue {
    /// Meaningful only when `bounded` is true.
    pub value: u64,
    pub bounded: bool,
    pub exact: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(DynetStatus, String);

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let status = match e {
            GraphError::RoundOutOfRange { .. } | GraphError::ZeroRound => DynetStatus::OutOfRange,
            GraphError::Argument(_) => DynetStatus::InvalidArgument,
            _ => DynetStatus::ParseError,
        };
        Failure(status, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Graph(g) => g.into(),
            ModelError::Json(_) => Failure(DynetStatus::ParseError, e.to_string()),
            _ => Failure(DynetStatus::ModelViolation, e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::Precondition(_) => DynetStatus::Precondition,
            SimError::Timeout { .. } => DynetStatus::Timeout,
            SimError::Graph(_) => return Failure(DynetStatus::ParseError, e.to_string()),
            _ => DynetStatus::ModelViolation,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Runs `body`, records any failure, and converts panics to `Panic`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DynetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            DynetStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DynetStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DynetStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn graph_ref<'a>(g: *const DynetGraph) -> Result<&'a DynamicGraph, Failure> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("graph"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(DynetStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(DynetStatus::Panic, "NUL in output".into()))?;
    write_out(out, c.into_raw())
}

/// Parses a schedule JSON document into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_from_json(
    json: *const c_char,
    out: *mut *mut DynetGraph,
) -> DynetStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let g = load_dynamic_graph(text)?;
        write_out(out, Box::into_raw(Box::new(DynetGraph(g))))
    })
}

/// Builds a generator family. `param` is `k` for `OitIitGap` and the horizon
/// for `RandomOit1`; it is ignored otherwise. `seed` only affects
/// `RandomOit1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_generate(
    family: DynetFamily,
    n: usize,
    param: usize,
    seed: u64,
    out: *mut *mut DynetGraph,
) -> DynetStatus {
    guard(|| {
        let family = match family {
            DynetFamily::Soifer => Family::Soifer,
            DynetFamily::AlternatingRing => Family::AlternatingRing,
            DynetFamily::OitIitGap => Family::OitIitGap { k: param },
            DynetFamily::SplitHalves => Family::SplitHalves,
            DynetFamily::StaticComplete => Family::Static(StaticShape::Complete),
            DynetFamily::StaticPath => Family::Static(StaticShape::Path),
            DynetFamily::StaticCycle => Family::Static(StaticShape::Cycle),
            DynetFamily::StaticStar => Family::Static(StaticShape::Star),
            DynetFamily::StaticEmpty => Family::Static(StaticShape::Empty),
            DynetFamily::RandomOit1 => Family::RandomOit1 {
                horizon: param,
                seed,
            },
        };
        let g = GeneratorSpec { family, n }.build()?;
        write_out(out, Box::into_raw(Box::new(DynetGraph(g))))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_free(graph: *mut DynetGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Serializes a schedule to canonical JSON.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_to_json(
    graph: *const DynetGraph,
    out: *mut *mut c_char,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        write_string(out, save_dynamic_graph(g))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dynet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_node_count(
    graph: *const DynetGraph,
    out: *mut usize,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        write_out(out, g.n())
    })
}

/// Copies `E(round)` into `pairs` as `u0, v0, u1, v1, ...` (1-based ids).
///
/// `*edge_count` receives the number of edges even when `capacity` (in
/// `uint32_t` slots) is too small, in which case `BufferTooSmall` is
/// returned and nothing is copied. `pairs` may be null when `capacity` is 0.
///
/// # Safety
/// `graph` must be a live handle; `pairs` must hold `capacity` values;
/// `edge_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_graph_instance(
    graph: *const DynetGraph,
    round: usize,
    pairs: *mut u32,
    capacity: usize,
    edge_count: *mut usize,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let edges = g.instance(round)?;
        write_out(edge_count, edges.len())?;
        if capacity < 2 * edges.len() {
            return Err(Failure(
                DynetStatus::BufferTooSmall,
                format!("round {round} has {} edges", edges.len()),
            ));
        }
        if edges.is_empty() {
            return Ok(());
        }
        if pairs.is_null() {
            return Err(null("pairs"));
        }
        let slots = std::slice::from_raw_parts_mut(pairs, 2 * edges.len());
        for (chunk, e) in slots.chunks_exact_mut(2).zip(edges.iter()) {
            chunk[0] = e.lo();
            chunk[1] = e.hi();
        }
        Ok(())
    })
}

fn metric_value(m: MetricResult) -> DynetMetricValue {
    DynetMetricValue {
        value: m.value.finite().unwrap_or(0) as u64,
        bounded: m.value != Bound::Unbounded,
        exact: m.exact,
    }
}

/// Computes one metric with search bound `k_max` (ignored by `Moi`).
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_metric(
    graph: *const DynetGraph,
    metric: DynetMetric,
    k_max: usize,
    out: *mut DynetMetricValue,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        if k_max == 0 && metric != DynetMetric::Moi {
            return Err(Failure(DynetStatus::InvalidArgument, "k_max must be at least 1".into()));
        }
        let m = match metric {
            DynetMetric::Oit => compute_oit(g, k_max),
            DynetMetric::Iit => compute_iit(g, k_max),
            DynetMetric::Moi => compute_moi(g),
            DynetMetric::Ct => compute_ct(g, k_max),
            DynetMetric::DynamicDiameter => dynamic_diameter(g, k_max),
            DynetMetric::EdgePeriod => {
                let p = g.edge_period(k_max);
                MetricResult {
                    value: p.value,
                    exact: p.exact,
                    witness: None,
                }
            }
        };
        write_out(out, metric_value(m))
    })
}

/// `|future(u, t)(t_prime)|`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_future_size(
    graph: *const DynetGraph,
    u: u32,
    t: usize,
    t_prime: usize,
    out: *mut usize,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let f = future_set(g, u as NodeId, t, t_prime)?;
        write_out(out, f.len())
    })
}

/// All metrics as JSON, `{"oit": {"value", "exact", "witness"}, ...}`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_metrics_json(
    graph: *const DynetGraph,
    k_max: usize,
    out: *mut *mut c_char,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        if k_max == 0 {
            return Err(Failure(DynetStatus::InvalidArgument, "k_max must be at least 1".into()));
        }
        write_string(out, all_metrics(g, k_max).to_json().to_string())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimRequest {
    proto: String,
    #[serde(default)]
    net: Option<serde_json::Value>,
    #[serde(default)]
    param: Option<usize>,
    #[serde(default)]
    max_rounds: Option<usize>,
}

fn protocol(req: &SimRequest) -> Result<ProtocolInstance, Failure> {
    let net = || -> Result<CoverNetwork, Failure> {
        let v = req.net.as_ref().ok_or_else(|| {
            Failure(DynetStatus::InvalidArgument, format!("`net` is required for {}", req.proto))
        })?;
        Ok(CoverNetwork::from_json(&v.to_string())?)
    };
    let param = |name: &str| {
        req.param.ok_or_else(|| {
            Failure(
                DynetStatus::InvalidArgument,
                format!("`param` ({name}) is required for {}", req.proto),
            )
        })
    };
    Ok(match req.proto.as_str() {
        "cover-count" => ProtocolInstance::CoverCount(net()?),
        "consistency" => ProtocolInstance::Consistency(net()?),
        "oit-count" => ProtocolInstance::OitCount { k: param("k")? },
        "ct-count" => ProtocolInstance::CtCount {
            bound: param("T")?,
        },
        other => {
            return Err(Failure(
                DynetStatus::InvalidArgument,
                format!("unknown protocol `{other}`"),
            ))
        }
    })
}

/// Runs a protocol and writes the summary JSON
/// `{"all_correct", "max_halt_round", "max_msg_entries"}`.
///
/// `request` is `{"proto": "cover-count" | "oit-count" | "ct-count" |
/// "consistency", "net": {...}, "param": int, "max_rounds": int}`, with `net`
/// required by `cover-count` and `consistency` and `param` (`k` or `T`) by
/// the others.
///
/// # Safety
/// `graph` must be a live handle; `request` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dynet_simulate_json(
    graph: *const DynetGraph,
    request: *const c_char,
    out: *mut *mut c_char,
) -> DynetStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let req: SimRequest = serde_json::from_str(str_arg(request, "request")?)
            .map_err(|e| Failure(DynetStatus::ParseError, e.to_string()))?;
        let proto = protocol(&req)?;
        let trace = run_sync(g, &proto, req.max_rounds)?;
        let summary = summarize(&trace, &proto);
        write_string(
            out,
            serde_json::to_string(&summary).expect("summary serialization cannot fail"),
        )
    })
}

/// Message for the most recent failed call on this thread, or `""`. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn dynet_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

