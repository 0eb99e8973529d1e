//! C ABI for the mixcert library: opaque graph handles, status codes, and a
//! JSON request runner mirroring the CLI. Every pointer argument is checked;
//! strings are UTF-8.
//!
//! Ownership: `mixcert_graph_*` constructors hand out a heap handle released
//! by `mixcert_graph_free`; strings returned through out-params are released
//! by `mixcert_string_free`.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use mixcert::api::{run, Request};
use mixcert::construct::{generate, ConstructionSpec};
use mixcert::expansion::{conductance, SearchMode};
use mixcert::graph::Graph;
use mixcert::scalar::Backend;
use mixcert::walk::{vertex_mixing_time, well_mixing_set, MixingOutcome};
use mixcert::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixcertStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    Infeasible = 4,
    NotRegular = 5,
    HypothesisNotMet = 6,
    SearchFailed = 7,
    InternalError = 8,
}

fn status_of(err: &Error) -> MixcertStatus {
    match err {
        Error::Parse { .. } => MixcertStatus::ParseError,
        Error::NotRegular { .. } => MixcertStatus::NotRegular,
        Error::HypothesisNotMet { .. } => MixcertStatus::HypothesisNotMet,
        Error::CycleContract { .. } | Error::NoExpanderCore => MixcertStatus::SearchFailed,
        Error::Infeasible(_)
        | Error::RejectionBudget { .. }
        | Error::ExactTooLarge { .. }
        | Error::InvalidParameter(_)
        | Error::UnknownConfigKey(_)
        | Error::EmptySet
        | Error::NotProperSubset
        | Error::LengthMismatch { .. } => MixcertStatus::Infeasible,
        Error::Io(_) => MixcertStatus::InternalError,
    }
}

/// Opaque graph handle.
pub struct MixcertGraph {
    inner: Graph,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, MixcertStatus> {
    if ptr.is_null() {
        return Err(MixcertStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| MixcertStatus::InvalidUtf8)
}

fn hand_out(g: Graph, out: *mut *mut MixcertGraph) -> MixcertStatus {
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    let handle = Box::new(MixcertGraph { inner: g });
    unsafe { *out = Box::into_raw(handle) };
    MixcertStatus::Ok
}

/// Parse edge-list text ("u v" lines, optional `n=<count>` header and
/// "#" comments) into a graph handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_parse(
    text: *const c_char,
    out: *mut *mut MixcertGraph,
) -> MixcertStatus {
    let text = match unsafe { read_str(text) } {
        Ok(s) => s,
        Err(st) => return st,
    };
    match Graph::parse_edge_list(text) {
        Ok(g) => hand_out(g, out),
        Err(e) => status_of(&e),
    }
}

/// Generate a named construction from a descriptor such as
/// "merged_expanders:n=512,D=8,m=32,seed=7".
///
/// # Safety
/// `descriptor` must be a valid NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_generate(
    descriptor: *const c_char,
    out: *mut *mut MixcertGraph,
) -> MixcertStatus {
    let descriptor = match unsafe { read_str(descriptor) } {
        Ok(s) => s,
        Err(st) => return st,
    };
    let spec = match ConstructionSpec::parse(descriptor) {
        Ok(s) => s,
        Err(e) => return status_of(&e),
    };
    match generate(&spec) {
        Ok(g) => hand_out(g, out),
        Err(e) => status_of(&e),
    }
}

/// Release a graph handle. NULL is a no-op.
///
/// # Safety
/// `g` must come from a mixcert constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_free(g: *mut MixcertGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Vertex count; 0 for NULL.
///
/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_vertex_count(g: *const MixcertGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.n() as u64)
}

/// Edge count; 0 for NULL.
///
/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_edge_count(g: *const MixcertGraph) -> u64 {
    unsafe { g.as_ref() }.map_or(0, |g| g.inner.edge_count() as u64)
}

/// Common degree D for regular graphs; -1 when irregular or NULL.
///
/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mixcert_graph_regular_degree(g: *const MixcertGraph) -> i64 {
    unsafe { g.as_ref() }
        .and_then(|g| g.inner.regular_degree())
        .map_or(-1, |d| d as i64)
}

/// Total variation distance of Q_v^t to uniform, written to `out`.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_tv_to_uniform(
    g: *const MixcertGraph,
    v: u64,
    t: u64,
    out: *mut f64,
) -> MixcertStatus {
    let Some(g) = (unsafe { g.as_ref() }) else {
        return MixcertStatus::NullArgument;
    };
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    if v as usize >= g.inner.n() {
        return MixcertStatus::Infeasible;
    }
    let backend = Backend::auto(g.inner.n());
    let d = match mixcert::walk::distribution_at(&g.inner, v as usize, t as usize, backend) {
        Ok(d) => d,
        Err(e) => return status_of(&e),
    };
    let u = mixcert::walk::Distribution::uniform(g.inner.n(), backend);
    match mixcert::walk::tv_distance(&d, &u) {
        Ok(tv) => {
            unsafe { *out = tv.to_f64() };
            MixcertStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Least t <= t_max with TV(Q_v^t, U) < threshold; -1 when capped.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_vertex_mixing_time(
    g: *const MixcertGraph,
    v: u64,
    threshold: f64,
    t_max: u64,
    out: *mut i64,
) -> MixcertStatus {
    let Some(g) = (unsafe { g.as_ref() }) else {
        return MixcertStatus::NullArgument;
    };
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    if v as usize >= g.inner.n() {
        return MixcertStatus::Infeasible;
    }
    let backend = Backend::auto(g.inner.n());
    match vertex_mixing_time(&g.inner, v as usize, threshold, t_max as usize, backend) {
        Ok(MixingOutcome::Mixed(t)) => {
            unsafe { *out = t as i64 };
            MixcertStatus::Ok
        }
        Ok(MixingOutcome::Capped(_)) => {
            unsafe { *out = -1 };
            MixcertStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of vertices with TV(Q_v^tau, U) < delta (strict).
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_well_mixing_count(
    g: *const MixcertGraph,
    tau: u64,
    delta: f64,
    out: *mut u64,
) -> MixcertStatus {
    let Some(g) = (unsafe { g.as_ref() }) else {
        return MixcertStatus::NullArgument;
    };
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    let backend = Backend::auto(g.inner.n());
    match well_mixing_set(&g.inner, tau as usize, delta, backend) {
        Ok(set) => {
            unsafe { *out = set.len() as u64 };
            MixcertStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Conductance phi; `exact` forces full enumeration (n <= 26), otherwise a
/// sweep upper bound is computed.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mixcert_conductance(
    g: *const MixcertGraph,
    exact: bool,
    out: *mut f64,
) -> MixcertStatus {
    let Some(g) = (unsafe { g.as_ref() }) else {
        return MixcertStatus::NullArgument;
    };
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    let mode = if exact {
        SearchMode::Exact
    } else {
        SearchMode::Sweep
    };
    match conductance(&g.inner, mode, 1) {
        Ok(r) => {
            unsafe { *out = r.value.to_f64() };
            MixcertStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Run a JSON request (same schema as the CLI: {"command": "...",
/// "input": "...", "params": {...}}) and hand back the JSON report. On
/// error the out string carries {"error": "..."} and the status the class.
///
/// # Safety
/// `request_json` must be a valid NUL-terminated string; `out` writable.
/// The returned string must be released with `mixcert_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mixcert_run_json(
    request_json: *const c_char,
    out: *mut *mut c_char,
) -> MixcertStatus {
    if out.is_null() {
        return MixcertStatus::NullArgument;
    }
    unsafe { *out = ptr::null_mut() };
    let text = match unsafe { read_str(request_json) } {
        Ok(s) => s,
        Err(st) => return st,
    };
    let give = |s: String, out: *mut *mut c_char| {
        let c = CString::new(s).unwrap_or_else(|_| CString::new("{}").unwrap());
        unsafe { *out = c.into_raw() };
    };
    let request: Request = match serde_json::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            give(format!("{{\"error\":{:?}}}", e.to_string()), out);
            return MixcertStatus::ParseError;
        }
    };
    match run(&request) {
        Ok(report) => {
            give(report.to_json(), out);
            MixcertStatus::Ok
        }
        Err(e) => {
            let st = status_of(&e);
            give(format!("{{\"error\":{:?}}}", e.to_string()), out);
            st
        }
    }
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must come from a mixcert function and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mixcert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn parse_and_query_roundtrip() {
        let text = CString::new("0 1\n1 2\n2 0").unwrap();
        let mut handle: *mut MixcertGraph = ptr::null_mut();
        let st = unsafe { mixcert_graph_parse(text.as_ptr(), &mut handle) };
        assert_eq!(st, MixcertStatus::Ok);
        unsafe {
            assert_eq!(mixcert_graph_vertex_count(handle), 3);
            assert_eq!(mixcert_graph_edge_count(handle), 3);
            assert_eq!(mixcert_graph_regular_degree(handle), 2);
            mixcert_graph_free(handle);
        }
    }

    #[test]
    fn parse_error_status() {
        let text = CString::new("0 0").unwrap();
        let mut handle: *mut MixcertGraph = ptr::null_mut();
        let st = unsafe { mixcert_graph_parse(text.as_ptr(), &mut handle) };
        assert_eq!(st, MixcertStatus::ParseError);
        assert!(handle.is_null());
    }

    #[test]
    fn generate_and_mixing_time() {
        let desc = CString::new("complete:n=5").unwrap();
        let mut handle: *mut MixcertGraph = ptr::null_mut();
        assert_eq!(
            unsafe { mixcert_graph_generate(desc.as_ptr(), &mut handle) },
            MixcertStatus::Ok
        );
        let mut t: i64 = -2;
        let st = unsafe { mixcert_vertex_mixing_time(handle, 0, 0.25, 64, &mut t) };
        assert_eq!(st, MixcertStatus::Ok);
        assert_eq!(t, 1);
        let mut phi = 0.0;
        assert_eq!(
            unsafe { mixcert_conductance(handle, true, &mut phi) },
            MixcertStatus::Ok
        );
        assert!((phi - 1.25).abs() < 1e-12);
        unsafe { mixcert_graph_free(handle) };
    }

    #[test]
    fn capped_mixing_reports_minus_one() {
        let desc = CString::new("cycle:n=4").unwrap();
        let mut handle: *mut MixcertGraph = ptr::null_mut();
        unsafe { mixcert_graph_generate(desc.as_ptr(), &mut handle) };
        let mut t: i64 = 0;
        assert_eq!(
            unsafe { mixcert_vertex_mixing_time(handle, 0, 0.25, 32, &mut t) },
            MixcertStatus::Ok
        );
        assert_eq!(t, -1);
        unsafe { mixcert_graph_free(handle) };
    }

    #[test]
    fn run_json_roundtrip() {
        let req = CString::new(
            r#"{"command":"certify","input":"hypercube:D=3","params":{"c":1.0,"range":"1:4","mode":"exact"}}"#,
        )
        .unwrap();
        let mut out: *mut c_char = ptr::null_mut();
        let st = unsafe { mixcert_run_json(req.as_ptr(), &mut out) };
        assert_eq!(st, MixcertStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { mixcert_string_free(out) };
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json["result"]["certificate"]["verdict"], "certified");
    }

    #[test]
    fn run_json_error_payload() {
        let req = CString::new(r#"{"command":"conductance","input":"cycle:n=2"}"#).unwrap();
        let mut out: *mut c_char = ptr::null_mut();
        let st = unsafe { mixcert_run_json(req.as_ptr(), &mut out) };
        assert_ne!(st, MixcertStatus::Ok);
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { mixcert_string_free(out) };
        assert!(text.contains("error"));
    }
}
