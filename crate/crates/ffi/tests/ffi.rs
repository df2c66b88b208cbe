use std::ffi::{CStr, CString};
use std::ptr;

use asynclocal_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(al_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn run_cycle_and_inspect() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(al_graph_new(c("cycle:9").as_ptr(), ptr::null(), 0, 81, &mut g), AlStatus::Ok);
        assert_eq!(al_graph_len(g), 9);
        let mut run = ptr::null_mut();
        let status = al_run(g, c("linial+save1").as_ptr(), 0, c("random:seed=7,p=0.5").as_ptr(), 100_000, &mut run);
        assert_eq!(status, AlStatus::Ok, "{}", last_error());
        assert!(al_run_is_complete(run));
        assert!(al_run_max_runtime(run) > 0);
        for node in 1..=9 {
            let (mut a, mut b, mut pair) = (0, 0, false);
            assert_eq!(al_run_decision(run, node, &mut a, &mut b, &mut pair), AlStatus::Ok);
            assert!(pair && a + b <= 2 && (a, b) != (2, 0));
        }
        let (mut a, mut b, mut pair) = (0, 0, false);
        assert_eq!(al_run_decision(run, 42, &mut a, &mut b, &mut pair), AlStatus::Undecided);
        for check in ["proper", "palette", "termination"] {
            let mut pass = false;
            assert_eq!(al_run_check(run, c(check).as_ptr(), &mut pass), AlStatus::Ok);
            assert!(pass, "{check}");
        }
        let mut pass = false;
        assert_eq!(al_run_check(run, c("bogus").as_ptr(), &mut pass), AlStatus::InvalidArgument);
        let mut json = ptr::null_mut();
        assert_eq!(al_run_trace_json(run, &mut json), AlStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        al_string_free(json);
        assert!(text.lines().next().unwrap().contains("\"record\":\"header\""));
        al_run_free(run);
        al_graph_free(g);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(al_graph_new(c("torus:3").as_ptr(), ptr::null(), 0, 0, &mut g), AlStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(al_graph_new(ptr::null(), ptr::null(), 0, 0, &mut g), AlStatus::NullPointer);
        let ids = [3u64, 4, 2, 1];
        assert_eq!(al_graph_new(c("cycle:4").as_ptr(), ids.as_ptr(), ids.len(), 0, &mut g), AlStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(al_run(g, c("nope").as_ptr(), 0, c("sync").as_ptr(), 10, &mut run), AlStatus::UnknownAlgorithm);
        assert_eq!(al_run(g, c("six").as_ptr(), 0, c("warp").as_ptr(), 10, &mut run), AlStatus::InvalidArgument);
        assert_eq!(al_run(ptr::null(), c("six").as_ptr(), 0, c("sync").as_ptr(), 10, &mut run), AlStatus::NullPointer);
        al_graph_free(g);
        al_graph_free(ptr::null_mut());
        al_run_free(ptr::null_mut());
        al_string_free(ptr::null_mut());
        let mut pass = false;
        assert_eq!(al_wsb_binom(6, &mut pass), AlStatus::NotPrime);
        assert_eq!(al_wsb_binom(11, &mut pass), AlStatus::Ok);
        assert!(pass);
    }
}

#[test]
fn graph_from_json() {
    unsafe {
        let doc = r#"{"id_bound":5,"nodes":[{"id":1,"neighbors":[5]},{"id":5,"neighbors":[1]}]}"#;
        let mut g = ptr::null_mut();
        assert_eq!(al_graph_from_json(c(doc).as_ptr(), &mut g), AlStatus::Ok, "{}", last_error());
        assert_eq!(al_graph_len(g), 2);
        al_graph_free(g);
        assert_eq!(al_graph_from_json(c("{").as_ptr(), &mut g), AlStatus::InvalidArgument);
    }
}

#[test]
fn golden_and_coverfree() {
    unsafe {
        for t in ["table1", "table2"] {
            let mut pass = false;
            assert_eq!(al_repro(c(t).as_ptr(), &mut pass), AlStatus::Ok);
            assert!(pass, "{t}");
        }
        let mut pass = false;
        assert_eq!(al_repro(c("table9").as_ptr(), &mut pass), AlStatus::InvalidArgument);
        assert_eq!(al_coverfree_verify(2, 25, &mut pass), AlStatus::Ok);
        assert!(pass);
        assert_eq!(al_coverfree_verify(0, 25, &mut pass), AlStatus::InvalidArgument);
        assert!(!CStr::from_ptr(al_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/asynclocal.h")).unwrap();
    for name in ["typedef struct AlGraph AlGraph", "typedef struct AlRun AlRun", "AL_STATUS_NOT_PRIME", "al_run(", "al_last_error("] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
