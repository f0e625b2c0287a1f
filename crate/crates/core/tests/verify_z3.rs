//! End-to-end verification against the z3 binary on the PATH.

mod common;

use std::time::{Duration, Instant};

use indexmap::IndexMap;

use lama::frontend::CheckedProgram;
use lama::interp::run;
use lama::parser::parse_expr;
use lama::smt::{encode_program, EncodeError, EncodingConfig};
use lama::solver::{SolverCommand, SolverSession};
use lama::value::Value;
use lama::verifier::{bmc, confirms_counterexample, k_induction, verify, Strategy, Verdict, VerifyOptions};

fn opts(strategy: Strategy, property: Option<&str>) -> VerifyOptions {
    VerifyOptions { strategy, property: property.map(|p| parse_expr(p).unwrap()), ..VerifyOptions::default() }
}

macro_rules! require_z3 {
    () => {
        if !common::z3_available() {
            eprintln!("z3 not found; skipping");
            return;
        }
    };
}

#[test]
fn updown_counterexample_at_zero() {
    require_z3!();
    let c = common::load("updown.lm");
    let out = verify(&c, &opts(Strategy::Bmc { max_depth: 5 }, Some("(>= x 1)"))).unwrap();
    let Verdict::Falsified { depth, trace } = &out.verdict else { panic!("{:?}", out.verdict) };
    assert_eq!(*depth, 0);
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0].get("x"), Some(&Value::int(0)));
    assert_eq!(trace[0].modes["UpDown$sm0"].as_str(), "A");
    assert!(confirms_counterexample(&c, Some(&parse_expr("(>= x 1)").unwrap()), trace).unwrap());
}

#[test]
fn updown_invariant_in_all_encodings() {
    require_z3!();
    let c = common::load("updown.lm");
    // Oracle: the interpreter stays within bounds for 21 steps.
    let records = run(&c, &vec![IndexMap::new(); 21]).unwrap();
    assert!(records.iter().all(|r| r.invariant_ok));
    for encoding in EncodingConfig::ALL {
        let bmc = VerifyOptions { encoding, ..opts(Strategy::Bmc { max_depth: 20 }, None) };
        assert_eq!(verify(&c, &bmc).unwrap().verdict, Verdict::Exhausted { bound: 20 }, "{encoding:?}");
        let kind = VerifyOptions { encoding, ..opts(Strategy::KInduction { max_k: 3 }, None) };
        let v = verify(&c, &kind).unwrap().verdict;
        assert!(matches!(v, Verdict::Proved { k } if k <= 3), "{encoding:?}: {v:?}");
    }
}

#[test]
fn trivial_property() {
    require_z3!();
    let c = common::load("counter.lm");
    let b = verify(&c, &opts(Strategy::Bmc { max_depth: 4 }, Some("true"))).unwrap();
    assert_eq!(b.verdict, Verdict::Exhausted { bound: 4 });
    let k = verify(&c, &opts(Strategy::KInduction { max_k: 4 }, Some("true"))).unwrap();
    assert_eq!(k.verdict, Verdict::Proved { k: 0 });
}

/// Smallest k for which `(not a)` is k-inductive over the swap registers,
/// by enumerating all paths of the two-bit state space.
fn brute_force_induction_depth() -> Option<u32> {
    let step = |(a, b): (bool, bool)| (b, a);
    let holds = |(a, _): (bool, bool)| !a;
    let states = [(false, false), (false, true), (true, false), (true, true)];
    (0..4).find(|&k| {
        states.iter().all(|&s0| {
            let mut path = vec![s0];
            for _ in 0..=k {
                path.push(step(*path.last().unwrap()));
            }
            let (last, prefix) = path.split_last().unwrap();
            !prefix.iter().all(|&s| holds(s)) || holds(*last)
        })
    })
}

#[test]
fn swap_needs_one_step_of_induction() {
    require_z3!();
    assert_eq!(brute_force_induction_depth(), Some(1));
    let c = common::load("swap.lm");
    let v = verify(&c, &opts(Strategy::KInduction { max_k: 0 }, None)).unwrap().verdict;
    assert_eq!(v, Verdict::Exhausted { bound: 0 });
    let v = verify(&c, &opts(Strategy::KInduction { max_k: 5 }, None)).unwrap().verdict;
    assert_eq!(v, Verdict::Proved { k: 1 });
}

#[test]
fn counterexamples_replay_on_the_interpreter() {
    require_z3!();
    let properties = ["false", "(not (= 1 1))"];
    let mut checked = 0;
    for (name, src) in common::corpus() {
        let c = CheckedProgram::from_source(&src).unwrap();
        for property in properties.iter().map(|p| Some(*p)).chain([None]) {
            match verify(&c, &opts(Strategy::Bmc { max_depth: 6 }, property)) {
                Ok(out) => {
                    if let Verdict::Falsified { trace, .. } = &out.verdict {
                        let p = property.map(|p| parse_expr(p).unwrap());
                        assert!(confirms_counterexample(&c, p.as_ref(), trace).unwrap(), "{name} {property:?}");
                        checked += 1;
                    }
                }
                Err(lama::verifier::VerifyError::Encode(EncodeError::UnsupportedType { .. })) => {}
                Err(e) => panic!("{name}: {e}"),
            }
        }
    }
    assert!(checked >= 30, "only {checked} counterexamples");
}

#[test]
fn stack_depth_is_restored() {
    require_z3!();
    let c = common::load("updown.lm");
    let sys = encode_program(&c, EncodingConfig::default(), None).unwrap();
    let mut s = SolverSession::start(SolverCommand::z3(), None).unwrap();
    s.push().unwrap();
    assert_eq!(bmc(&sys, 3, &mut s).unwrap(), Verdict::Exhausted { bound: 3 });
    assert_eq!(s.depth(), 1);
    assert!(matches!(k_induction(&sys, 3, &mut s).unwrap(), Verdict::Proved { .. }));
    assert_eq!(s.depth(), 1);
    let neg = encode_program(&c, EncodingConfig::default(), Some(&parse_expr("(< x 5)").unwrap())).unwrap();
    assert!(matches!(bmc(&neg, 10, &mut s).unwrap(), Verdict::Falsified { depth: 5, .. }));
    assert_eq!(s.depth(), 1);
}

#[test]
fn encodings_agree_on_verdicts() {
    require_z3!();
    for (name, src) in common::corpus() {
        let c = CheckedProgram::from_source(&src).unwrap();
        for strategy in [Strategy::Bmc { max_depth: 8 }, Strategy::KInduction { max_k: 4 }] {
            let verdicts: Vec<Option<Verdict>> = EncodingConfig::ALL
                .iter()
                .map(|&encoding| {
                    verify(&c, &VerifyOptions { encoding, ..opts(strategy, None) }).ok().map(|o| match o.verdict {
                        // Models may differ between encodings; compare the depth only.
                        Verdict::Falsified { depth, .. } => Verdict::Falsified { depth, trace: vec![] },
                        v => v,
                    })
                })
                .collect();
            assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{name} {strategy:?}: {verdicts:?}");
        }
    }
}

#[test]
fn bmc_agrees_with_k_induction_proofs() {
    require_z3!();
    for (name, src) in common::corpus() {
        let c = CheckedProgram::from_source(&src).unwrap();
        let Ok(k) = verify(&c, &opts(Strategy::KInduction { max_k: 4 }, None)) else { continue };
        if let Verdict::Proved { .. } = k.verdict {
            let b = verify(&c, &opts(Strategy::Bmc { max_depth: 12 }, None)).unwrap();
            assert_eq!(b.verdict, Verdict::Exhausted { bound: 12 }, "{name}");
        }
    }
}

#[test]
fn stress_fixture_is_proved_quickly() {
    require_z3!();
    let c = common::load("stress.lm");
    let started = Instant::now();
    let v = verify(&c, &opts(Strategy::KInduction { max_k: 10 }, None)).unwrap().verdict;
    assert!(matches!(v, Verdict::Proved { .. }), "{v:?}");
    assert!(started.elapsed() < Duration::from_secs(60));
}
