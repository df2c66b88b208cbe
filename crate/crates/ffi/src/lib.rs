//! C interface to the simulator.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns an [`AlStatus`] and
//! leaves a message retrievable with [`al_last_error`]. Strings returned by
//! the library must be released with [`al_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use asynclocal::coverfree::{construct_family, verify_coverfree};
use asynclocal::engine::graph::{build_graph, GraphFile, GraphSpec, Shape};
use asynclocal::engine::{identity_inputs, Graph, Trace};
use asynclocal::registry::NamedAlgorithm;
use asynclocal::schedulers::{make_scheduling, SchedulerSpec};
use asynclocal::verify::{reproduce_table, run_checks, Table};
use asynclocal::wsb::{binom_divisibility, WsbError};
use asynclocal::Color;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed string, spec or parameter.
    InvalidArgument = 2,
    UnknownAlgorithm = 3,
    /// The algorithm failed during execution.
    Engine = 4,
    /// The node has not decided.
    Undecided = 5,
    NotPrime = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// A built graph.
pub struct AlGraph(Graph);

/// A finished execution and its trace.
pub struct AlRun(Trace<serde_json::Value>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let text = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Fail(AlStatus, String);

fn fail(status: AlStatus, msg: impl ToString) -> Fail {
    Fail(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AlStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(AlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(AlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| fail(AlStatus::NullPointer, format!("{what} is null")))
}

/// Message describing the last failure on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn al_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from a shape such as `cycle:9`. `ids` may be null; a
/// `bound` of 0 keeps the default identifier bound.
///
/// # Safety
/// `spec` must be a NUL-terminated string, `ids` null or valid for `n_ids`
/// reads, and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_graph_new(
    spec: *const c_char,
    ids: *const u64,
    n_ids: usize,
    bound: u64,
    out: *mut *mut AlGraph,
) -> AlStatus {
    guard(|| {
        let shape: Shape = text(spec, "spec")?.parse().map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        let out = out_ptr(out, "out")?;
        let mut gs = GraphSpec::new(shape);
        if !ids.is_null() {
            gs = gs.with_ids(std::slice::from_raw_parts(ids, n_ids).to_vec());
        }
        if bound > 0 {
            gs = gs.with_bound(bound);
        }
        let g = build_graph(&gs).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(AlGraph(g)));
        Ok(())
    })
}

/// Builds a graph from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_graph_from_json(json: *const c_char, out: *mut *mut AlGraph) -> AlStatus {
    guard(|| {
        let file: GraphFile =
            serde_json::from_str(text(json, "json")?).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        let out = out_ptr(out, "out")?;
        let g = build_graph(&GraphSpec::new(Shape::Explicit(file))).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(AlGraph(g)));
        Ok(())
    })
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_graph_len(graph: *const AlGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `graph` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn al_graph_free(graph: *mut AlGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Executes a registered algorithm. `delta` 0 means the maximum degree;
/// `sched` is `sync` or `random:seed=S,p=P,crash=R`.
///
/// # Safety
/// `graph` must be a live handle, `algo` and `sched` NUL-terminated strings,
/// and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_run(
    graph: *const AlGraph,
    algo: *const c_char,
    delta: u64,
    sched: *const c_char,
    max_steps: u64,
    out: *mut *mut AlRun,
) -> AlStatus {
    guard(|| {
        let g = &graph.as_ref().ok_or_else(|| fail(AlStatus::NullPointer, "graph is null"))?.0;
        let name = text(algo, "algo")?;
        let spec: SchedulerSpec = text(sched, "sched")?.parse().map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        let out = out_ptr(out, "out")?;
        let a = NamedAlgorithm::for_graph(name, g, (delta > 0).then_some(delta))
            .map_err(|e| fail(AlStatus::UnknownAlgorithm, e))?;
        let s = make_scheduling(&spec, g).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        let trace = a.execute(g, &identity_inputs(g), &s, max_steps).map_err(|e| fail(AlStatus::Engine, e))?;
        *out = Box::into_raw(Box::new(AlRun(trace)));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn al_run_free(run: *mut AlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Whether every activated, non-crashed node decided.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_run_is_complete(run: *const AlRun) -> bool {
    run.as_ref().is_some_and(|r| r.0.is_complete())
}

/// Largest per-node runtime.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_run_max_runtime(run: *const AlRun) -> u64 {
    run.as_ref().map_or(0, |r| r.0.max_runtime())
}

/// Output of `node`. Integer outputs set `*a` and leave `*is_pair` false;
/// pair outputs set both `*a` and `*b`.
///
/// # Safety
/// `run` must be a live handle and the out pointers valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_run_decision(
    run: *const AlRun,
    node: u64,
    a: *mut u64,
    b: *mut u64,
    is_pair: *mut bool,
) -> AlStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| fail(AlStatus::NullPointer, "run is null"))?.0;
        let (a, b, is_pair) = (out_ptr(a, "a")?, out_ptr(b, "b")?, out_ptr(is_pair, "is_pair")?);
        match r.decisions().get(&node) {
            Some(Color::Single(x)) => (*a, *b, *is_pair) = (*x, 0, false),
            Some(Color::Pair(x, y)) => (*a, *b, *is_pair) = (*x, *y, true),
            None => return Err(fail(AlStatus::Undecided, format!("node {node} did not decide"))),
        }
        Ok(())
    })
}

/// Runs one named check (`proper`, `palette`, `termination`, `parity`).
///
/// # Safety
/// `run` must be a live handle, `check` a NUL-terminated string and `pass`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_run_check(run: *const AlRun, check: *const c_char, pass: *mut bool) -> AlStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| fail(AlStatus::NullPointer, "run is null"))?.0;
        let name = text(check, "check")?;
        let pass = out_ptr(pass, "pass")?;
        let v = run_checks(r, &[name]).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        *pass = v[0].pass;
        if !v[0].pass {
            set_error(&v[0]);
        }
        Ok(())
    })
}

/// The trace as newline-delimited JSON. Free with [`al_string_free`].
///
/// # Safety
/// `run` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_run_trace_json(run: *const AlRun, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        let r = &run.as_ref().ok_or_else(|| fail(AlStatus::NullPointer, "run is null"))?.0;
        let out = out_ptr(out, "out")?;
        *out = CString::new(r.to_jsonl_string()).map_err(|e| fail(AlStatus::Internal, e))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn al_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reproduces a golden execution, `table1` or `table2`.
///
/// # Safety
/// `table` must be a NUL-terminated string and `pass` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_repro(table: *const c_char, pass: *mut bool) -> AlStatus {
    guard(|| {
        let which: Table = text(table, "table")?.parse().map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        let pass = out_ptr(pass, "pass")?;
        let report = reproduce_table(which).map_err(|e| fail(AlStatus::Engine, e))?;
        *pass = report.verdict.pass;
        Ok(())
    })
}

/// Constructs the `k`-cover-free family with at least `m` sets and checks it exhaustively.
///
/// # Safety
/// `pass` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_coverfree_verify(k: u64, m: u64, pass: *mut bool) -> AlStatus {
    guard(|| {
        let pass = out_ptr(pass, "pass")?;
        let fam = construct_family(k, m).map_err(|e| fail(AlStatus::InvalidArgument, e))?;
        *pass = verify_coverfree(&fam);
        Ok(())
    })
}

/// Checks `C(n, m) = 0 mod n` for `1 <= m < n`; `n` must be prime.
///
/// # Safety
/// `pass` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn al_wsb_binom(n: u64, pass: *mut bool) -> AlStatus {
    guard(|| {
        let pass = out_ptr(pass, "pass")?;
        match binom_divisibility(n) {
            Ok(v) => *pass = v.pass,
            Err(e @ WsbError::NotPrime(_)) => return Err(fail(AlStatus::NotPrime, e)),
            Err(e) => return Err(fail(AlStatus::Internal, e)),
        }
        Ok(())
    })
}
