use std::process::{Command, Output};

fn asynclocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asynclocal")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn repro_tables_pass() {
    let out = asynclocal(&["repro", "table2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["certificate"]["cycle_steps"], 2);
    assert_eq!(code(&asynclocal(&["repro", "table1"])), 0);
    assert_eq!(code(&asynclocal(&["repro", "table3"])), 2);
}

#[test]
fn run_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let trace = trace.to_str().unwrap();
    let out = asynclocal(&["run", "--algo", "linial+save1", "--graph", "cycle:9", "--sched", "random:seed=7", "--trace", trace]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = asynclocal(&["verify", "--trace", trace, "--check", "proper,palette"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = asynclocal(&["verify", "--trace", trace, "--check", "proper,termination", "--replay"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(code(&asynclocal(&["verify", "--trace", trace, "--check", "bogus"])), 2);
}

#[test]
fn replay_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.txt");
    std::fs::write(&sched, "[2,3,4]\n[1,3,4]\n[3,4]\n[3,4]\n").unwrap();
    let spec = format!("replay:{}", sched.display());
    let out = asynclocal(&["run", "--algo", "buggy5", "--graph", "cycle:4", "--ids", "3,4,2,1", "--sched", &spec]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&sched, "[2,2]\n").unwrap();
    assert_eq!(code(&asynclocal(&["run", "--algo", "six", "--graph", "cycle:4", "--sched", &spec])), 2);
}

#[test]
fn search_finds_the_livelock() {
    let out = asynclocal(&[
        "search", "--algo", "buggy5", "--graph", "cycle:4", "--ids", "3,4,2,1", "--property", "livelock", "--budget", "0",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let out = asynclocal(&["search", "--algo", "save1", "--graph", "cycle:5", "--property", "proper", "--budget", "50"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&asynclocal(&["wsb", "binom", "--n", "6"])), 2);
    assert_eq!(code(&asynclocal(&["run", "--algo", "nope", "--graph", "cycle:5"])), 2);
    assert_eq!(code(&asynclocal(&["run", "--algo", "six", "--graph", "torus:5"])), 2);
    assert_eq!(code(&asynclocal(&["run", "--algo", "six", "--graph", "cycle:5", "--sched", "enum:depth=2"])), 2);
    assert_eq!(code(&asynclocal(&["frobnicate"])), 2);
    assert_eq!(code(&asynclocal(&["wsb", "count", "--algo", "const1", "--n", "5"])), 2);
}

#[test]
fn wsb_reports() {
    assert_eq!(code(&asynclocal(&["wsb", "binom", "--n", "7"])), 0);
    let out = asynclocal(&["wsb", "count", "--algo", "const1", "--n", "2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("count=-1"));
    assert_eq!(code(&asynclocal(&["wsb", "family", "--family", "cycle", "--n", "5"])), 0);
    assert_eq!(code(&asynclocal(&["wsb", "family", "--family", "exactly:2", "--n", "5"])), 1);
    assert_eq!(code(&asynclocal(&["wsb", "class", "--n", "3", "--blocks", "[[1,2],[3]]"])), 0);
}

#[test]
fn coverfree_reports() {
    let out = asynclocal(&["coverfree", "--k", "2", "--m", "25"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("q=5"));
    let out = asynclocal(&["coverfree", "--bound", "65536", "--delta", "2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("[65536,121,25]"));
}
