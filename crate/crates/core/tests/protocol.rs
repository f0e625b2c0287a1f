//! Solver protocol tests against the scripted mock solver.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use lama::frontend::CheckedProgram;
use lama::parser::parse_expr;
use lama::smt::EncodingConfig;
use lama::solver::{CheckResult, SolverCommand, SolverError, SolverSession};
use lama::value::Value;
use lama::verifier::{confirms_counterexample, verify, Strategy, Verdict, VerifyOptions};

#[test]
fn bmc_command_log_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.smt2");
    let checked = CheckedProgram::from_source(common::BMC_MOCK_PROGRAM).unwrap();
    let opts = VerifyOptions {
        strategy: Strategy::Bmc { max_depth: 3 },
        encoding: EncodingConfig::default(),
        solver: common::mock(&log, ""),
        timeout: None,
        property: None,
    };
    let out = verify(&checked, &opts).unwrap();
    let Verdict::Falsified { depth: 0, trace } = &out.verdict else { panic!("{:?}", out.verdict) };
    assert_eq!(trace[0].get("a"), Some(&Value::Bool(false)));
    assert!(confirms_counterexample(&checked, None, trace).unwrap());
    assert_eq!(fs::read_to_string(&log).unwrap(), common::BMC_MOCK_LOG);
}

#[test]
fn unsat_frames_and_pop_balance() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.smt2");
    let mut s = SolverSession::start(common::mock(&log, ""), None).unwrap();
    s.push().unwrap();
    s.assert("false").unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Unsat);
    s.pop().unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
    assert_eq!(s.depth(), 0);
    assert!(matches!(s.pop(), Err(SolverError::PopBelowZero)));
    // The rejected pop never reached the solver.
    assert_eq!(s.transcript().last().map(String::as_str), Some("(check-sat)"));
}

#[test]
fn timeout_restarts_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.smt2");
    let mut s =
        SolverSession::start(common::mock(&log, "--sleep-on-check 3000"), Some(Duration::from_millis(200))).unwrap();
    s.send("(declare-fun x () Int)").unwrap();
    s.push().unwrap();
    s.assert("(> x 0)").unwrap();
    s.push().unwrap();
    s.assert("(< x 5)").unwrap();
    s.pop().unwrap();
    let started = Instant::now();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Unknown("timeout".into()));
    assert!(started.elapsed() < Duration::from_secs(2));
    assert_eq!(s.restarts(), 1);
    assert_eq!(s.depth(), 1);
    // The fresh process received the setup and the commands still in effect.
    let text = fs::read_to_string(&log).unwrap();
    let replay: Vec<&str> = text.lines().skip_while(|l| *l != "(check-sat)").skip(1).collect();
    assert_eq!(
        replay,
        vec![
            "(set-option :print-success true)",
            "(set-option :produce-models true)",
            "(set-logic ALL)",
            "(declare-fun x () Int)",
            "(push 1)",
            "(assert (> x 0))",
        ]
    );
    s.pop().unwrap();
    assert!(s.get_value(&["x".to_string()]).is_ok());
}

#[test]
fn solver_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.smt2");
    let mut s = SolverSession::start(common::mock(&log, ""), None).unwrap();
    // The mock rejects a pop of its base frame, as a real solver would.
    let err = s.send("(pop 1)").unwrap_err();
    assert!(matches!(err, SolverError::Rejected { .. }), "{err}");
}

#[test]
fn real_solver_session() {
    if !common::z3_available() {
        return;
    }
    let mut s = SolverSession::start(SolverCommand::z3(), Some(Duration::from_secs(10))).unwrap();
    s.send("(declare-fun x () Int)").unwrap();
    s.assert("(and (> x 2) (< x 4))").unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Sat);
    let v = s.get_value(&["x".into(), "(- x 5)".into()]).unwrap();
    assert_eq!(v[0].1.to_string(), "3");
    assert_eq!(v[1].1.to_string(), "(- 2)");
    let err = s.send("(assert (undeclared y))").unwrap_err();
    assert!(matches!(err, SolverError::Rejected { .. }), "{err}");
    s.push().unwrap();
    s.assert("(= x 7)").unwrap();
    assert_eq!(s.check_sat().unwrap(), CheckResult::Unsat);
    s.pop().unwrap();
    let p = parse_expr("(> x 0)").unwrap();
    assert!(matches!(p, lama::ast::Expr::Binary(..)));
}
