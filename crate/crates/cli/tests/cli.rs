//! Invocations of the `lamav` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn lamav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamav")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn z3_available() -> bool {
    Command::new("z3").arg("-version").output().is_ok()
}

#[test]
fn help_lists_subcommands() {
    let o = lamav(&["-h"]);
    assert!(o.status.success());
    for cmd in ["check", "run", "verify", "dump-smt"] {
        assert!(stdout(&o).contains(cmd), "{cmd}");
    }
}

#[test]
fn check_accepts_corpus_and_dumps_deps() {
    let f = corpus("updown.lm");
    let o = lamav(&["check", "--dump-deps", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("-- UpDown"));
    assert!(out.contains("(x, Global, O) -> (x, sm0.A, O)"), "{out}");
}

#[test]
fn static_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lm");
    fs::write(&bad, "input a : int; invariant (+ a 1);").unwrap();
    let o = lamav(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.lm:1:") && err.contains("[invariant]"), "{err}");

    fs::write(&bad, "local x : int; y : int; definition x = y; y = x;").unwrap();
    let o = lamav(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[causality]"), "{}", stderr(&o));

    fs::write(&bad, "input a int;").unwrap();
    assert_eq!(lamav(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn run_prints_one_line_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("in.trace");
    fs::write(&trace, "reset=false\nreset=false\nreset=true\n").unwrap();
    let f = corpus("counter.lm");
    let o = lamav(&["run", "--trace", trace.to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);

    let f = corpus("updown.lm");
    let o = lamav(&["run", "--steps", "12", "--emit-trace", f.to_str().unwrap()]);
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    assert!(last.contains("x=9") && last.contains("@mode(UpDown$sm0)=B"), "{last}");
}

#[test]
fn run_reports_invariant_violations() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("in.trace");
    fs::write(&trace, "i=5\ni=(- 2000)\ni=0\n").unwrap();
    let f = corpus("late_init.lm");
    let o = lamav(&["run", "--trace", trace.to_str().unwrap(), f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invariant violated at step 2"), "{}", stderr(&o));
}

#[test]
fn verify_proves_updown() {
    if !z3_available() {
        return;
    }
    let f = corpus("updown.lm");
    let o = lamav(&["verify", "--strategy", "kinduction", "--max-k", "10", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "RESULT=proved K=0\n");
}

#[test]
fn verify_falsifies_with_property_file() {
    if !z3_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let prop = dir.path().join("neg.lm");
    fs::write(&prop, "(>= x 1)\n").unwrap();
    let f = corpus("updown.lm");
    let args =
        ["verify", "--strategy", "bmc", "--depth", "5", "--property-file", prop.to_str().unwrap(), f.to_str().unwrap()];
    let o = lamav(&args);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "RESULT=falsified K=0\nx=0\n");
    // Identical invocations give identical output.
    assert_eq!(lamav(&args).stdout, o.stdout);
}

#[test]
fn missing_solver_exits_with_three() {
    let f = corpus("updown.lm");
    let o = lamav(&["verify", "--solver", "/nonexistent/solver", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cannot start solver"));
}

#[test]
fn unsupported_types_are_static_errors() {
    let f = corpus("machine_ints.lm");
    let o = lamav(&["dump-smt", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dumped_scripts_run_in_batch_mode() {
    if !z3_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    for (encoding, expected) in [("datatype", "unsat"), ("integer", "unsat")] {
        let f = corpus("updown.lm");
        let o = lamav(&["dump-smt", "--depth", "12", "--nat-encoding", encoding, f.to_str().unwrap()]);
        assert!(o.status.success());
        let script = dir.path().join(format!("{encoding}.smt2"));
        fs::write(&script, &o.stdout).unwrap();
        let z3 = Command::new("z3").arg("-smt2").arg(&script).output().unwrap();
        assert_eq!(String::from_utf8_lossy(&z3.stdout).trim(), expected);
    }
    let prop = dir.path().join("p.lm");
    fs::write(&prop, "(< x 7)").unwrap();
    let f = corpus("updown.lm");
    let o = lamav(&[
        "dump-smt",
        "--depth",
        "12",
        "--enum-encoding",
        "datatype",
        "--property-file",
        prop.to_str().unwrap(),
        f.to_str().unwrap(),
    ]);
    let script = dir.path().join("sat.smt2");
    fs::write(&script, &o.stdout).unwrap();
    let z3 = Command::new("z3").arg("-smt2").arg(&script).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&z3.stdout).trim(), "sat");
}
