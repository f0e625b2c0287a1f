#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lama::ast::{Ident, Type};
use lama::frontend::CheckedProgram;
use lama::interp::run;
use lama::smt::{encode_program, EncodeError, EncodedSystem, EncodingConfig, Predicate, Time};
use lama::solver::{CheckResult, SolverCommand, SolverSession};
use lama::trace::Valuation;
use lama::typecheck::EnumTable;
use lama::value::Value;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// Names and sources of all corpus programs, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lm"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

pub fn load(name: &str) -> CheckedProgram {
    let src = fs::read_to_string(corpus_dir().join(name)).unwrap();
    CheckedProgram::from_source(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn z3_available() -> bool {
    SolverSession::start(SolverCommand::z3(), None).is_ok()
}

pub fn random_value(rng: &mut ChaCha8Rng, ty: &Type, enums: &EnumTable) -> Value {
    match ty {
        Type::Bool => Value::Bool(rng.gen()),
        Type::Int => Value::int(rng.gen_range(-20..=20)),
        Type::Real => Value::real(rng.gen_range(-20..=20), rng.gen_range(1..=4)),
        Type::Named(e) => {
            let ctors = &enums.enums[e];
            Value::Enum { ty: e.clone(), ctor: ctors[rng.gen_range(0..ctors.len())].clone() }
        }
        Type::Prod(ts) => Value::Tuple(ts.iter().map(|t| random_value(rng, t, enums)).collect()),
        other => panic!("no generator for {other:?}"),
    }
}

/// A random input trace for a program's top-level inputs.
pub fn random_inputs(rng: &mut ChaCha8Rng, checked: &CheckedProgram, len: usize) -> Vec<IndexMap<Ident, Value>> {
    let env = &checked.env;
    (0..len)
        .map(|_| {
            checked
                .program
                .inputs
                .iter()
                .map(|v| (v.name.clone(), random_value(rng, &env.top.vars[&v.name].ty, &env.enums)))
                .collect()
        })
        .collect()
}

pub const TRACES: usize = 20;
pub const LENGTH: usize = 10;

/// Equalities pinning the observed values of one step.
fn pins(sys: &EncodedSystem, step: &Valuation, k: u32, inputs_only: bool) -> Vec<String> {
    let t = Time::at(k);
    let mut out = vec![];
    let groups = [(&step.inputs, true), (&step.states, false), (&step.locals, false), (&step.outputs, false)];
    for (values, is_input) in groups {
        if is_input != inputs_only {
            continue;
        }
        for (name, v) in values {
            let var = sys.var(name).unwrap_or_else(|| panic!("no stream for {name}"));
            let lits = sys.value_literals(v).unwrap();
            for (&s, lit) in var.streams.iter().zip(lits) {
                out.push(format!("(= {} {lit})", sys.stream_at("top", s, &t)));
            }
        }
    }
    if !inputs_only {
        for (id, loc) in &step.modes {
            let a = sys.automata.iter().find(|a| &a.id == id).unwrap();
            let lit = sys.location_literal(a, loc.as_str()).unwrap();
            out.push(format!("(= {} {lit})", sys.stream_at("top", a.active, &t)));
        }
    }
    out
}

/// Returns the number of traces compared.
pub fn agree(name: &str, checked: &CheckedProgram, config: EncodingConfig, seed: u64) -> usize {
    let sys = match encode_program(checked, config, None) {
        Ok(s) => s,
        Err(EncodeError::UnsupportedType { .. }) => return 0,
        Err(e) => panic!("{name}: {e}"),
    };
    let mut s = SolverSession::start(SolverCommand::z3(), None).unwrap();
    for c in sys.preamble().into_iter().chain(sys.declarations("top")) {
        s.send(&c).unwrap();
    }
    s.assert(&sys.apply(Predicate::Init, "top", &Time::at(0))).unwrap();
    for k in 0..LENGTH as u32 {
        s.assert(&sys.apply(Predicate::Step, "top", &Time::at(k))).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for _ in 0..TRACES {
        let inputs = random_inputs(&mut rng, checked, LENGTH);
        let Ok(records) = run(checked, &inputs) else { continue };
        let first_states = &records[0].values.states;
        s.push().unwrap();
        for (k, r) in records.iter().enumerate() {
            for p in pins(&sys, &r.values, k as u32, true) {
                s.assert(&p).unwrap();
            }
        }
        // Uninitialized states are free in both semantics; fix them too.
        let mut observed = vec![];
        for (k, r) in records.iter().enumerate() {
            observed.extend(pins(&sys, &r.values, k as u32, false));
        }
        for (state, v) in first_states {
            let var = sys.var(state).unwrap();
            for (&st, lit) in var.streams.iter().zip(sys.value_literals(v).unwrap()) {
                s.assert(&format!("(= {} {lit})", sys.stream_at("top", st, &Time::at(0)))).unwrap();
            }
        }
        s.push().unwrap();
        s.assert(&format!("(and {})", observed.join(" "))).unwrap();
        assert_eq!(s.check_sat().unwrap(), CheckResult::Sat, "{name} {config:?}: interpreter values are not a model");
        s.pop().unwrap();
        s.push().unwrap();
        s.assert(&format!("(not (and {}))", observed.join(" "))).unwrap();
        assert_eq!(s.check_sat().unwrap(), CheckResult::Unsat, "{name} {config:?}: model is not unique");
        s.pop().unwrap();
        s.pop().unwrap();
        compared += 1;
    }
    compared
}

pub const MOCK: &str = env!("CARGO_BIN_EXE_lama-mock-solver");

/// The mock solver, appending every command it receives to `log`.
pub fn mock(log: &Path, extra: &str) -> SolverCommand {
    SolverCommand::parse(&format!("{MOCK} --log {} {extra}", log.display())).unwrap()
}

/// Program whose BMC run is compared byte for byte against [`BMC_MOCK_LOG`].
pub const BMC_MOCK_PROGRAM: &str = "input a : bool; invariant a;";

/// Commands sent for `BMC_MOCK_PROGRAM` with a depth bound of 3, when the
/// solver answers sat to the first check.
pub const BMC_MOCK_LOG: &str = "\
(set-option :print-success true)
(set-option :produce-models true)
(set-logic ALL)
(push 1)
(declare-datatypes ((Nat 0)) (((zero) (succ (pred Nat)))))
(declare-fun top$a (Nat) Bool)
(define-fun I%top () Bool true)
(define-fun T%top ((n Nat)) Bool true)
(define-fun A%top ((n Nat)) Bool true)
(define-fun P%top ((n Nat)) Bool (top$a n))
(assert I%top)
(assert (A%top zero))
(assert (T%top zero))
(push 1)
(assert (not (P%top zero)))
(check-sat)
(get-value ((top$a zero)))
(pop 1)
(pop 1)
(exit)
";
