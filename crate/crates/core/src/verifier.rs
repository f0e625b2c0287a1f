//! Bounded model checking and k-induction over an encoded program.
//!
//! Both procedures work incrementally on one solver session. Everything a
//! task asserts lives inside an outer push, so the session's stack depth is
//! the same before and after each call.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{Expr, Ident};
use crate::frontend::CheckedProgram;
use crate::interp::{eval_expr, global_value, run_from, RunError, RuntimeError, StepRecord};
use crate::smt::decode::DecodeError;
use crate::smt::{encode_program, EncodeError, EncodedSystem, EncodingConfig, NatEncoding, Predicate, Time};
use crate::solver::{CheckResult, SolverCommand, SolverError, SolverSession};
use crate::trace::Valuation;
use crate::typecheck::VarKind;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Bmc { max_depth: u32 },
    KInduction { max_k: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The property fails at step `depth` of `trace`.
    Falsified {
        depth: u32,
        trace: Vec<Valuation>,
    },
    /// The property is k-inductive.
    Proved {
        k: u32,
    },
    /// No violation up to the bound, and no proof.
    Exhausted {
        bound: u32,
    },
    Unknown {
        k: u32,
        reason: String,
    },
}

impl Verdict {
    /// `RESULT=<kind> K=<n>`.
    pub fn summary(&self) -> String {
        let (kind, k) = match self {
            Verdict::Falsified { depth, .. } => ("falsified", depth),
            Verdict::Proved { k } => ("proved", k),
            Verdict::Exhausted { bound } => ("exhausted", bound),
            Verdict::Unknown { k, .. } => ("unknown", k),
        };
        format!("RESULT={kind} K={k}")
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("counterexample: {0}")]
    Decode(#[from] DecodeError),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub strategy: Strategy,
    pub encoding: EncodingConfig,
    pub solver: SolverCommand,
    pub timeout: Option<Duration>,
    /// Replaces the program's invariant.
    pub property: Option<Expr>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            strategy: Strategy::KInduction { max_k: 10 },
            encoding: EncodingConfig::default(),
            solver: SolverCommand::z3(),
            timeout: None,
            property: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

const BASE: &str = "base";
const STEP: &str = "ind";
const TOP: &str = "top";
const START: &str = "n$ind";

/// Encodes the program and runs the chosen strategy in a fresh solver.
pub fn verify(checked: &CheckedProgram, opts: &VerifyOptions) -> Result<VerifyOutcome, VerifyError> {
    let sys = encode_program(checked, opts.encoding, opts.property.as_ref())?;
    let mut session = SolverSession::start(opts.solver.clone(), opts.timeout)?;
    let verdict = match opts.strategy {
        Strategy::Bmc { max_depth } => bmc(&sys, max_depth, &mut session)?,
        Strategy::KInduction { max_k } => k_induction(&sys, max_k, &mut session)?,
    };
    Ok(VerifyOutcome { verdict, warnings: sys.warnings.clone() })
}

/// Runs `body` inside a push and restores the stack depth afterwards.
fn scoped<T>(
    session: &mut SolverSession,
    body: impl FnOnce(&mut SolverSession) -> Result<T, VerifyError>,
) -> Result<T, VerifyError> {
    let depth = session.depth();
    session.push()?;
    let result = body(session);
    while session.depth() > depth {
        if let Err(e) = session.pop() {
            return result.and(Err(e.into()));
        }
    }
    result
}

fn load(sys: &EncodedSystem, session: &mut SolverSession, namespaces: &[&str]) -> Result<(), SolverError> {
    for c in sys.preamble() {
        session.send(&c)?;
    }
    for ns in namespaces {
        for c in sys.declarations(ns) {
            session.send(&c)?;
        }
    }
    Ok(())
}

fn assert_pred(
    sys: &EncodedSystem,
    session: &mut SolverSession,
    p: Predicate,
    ns: &str,
    t: &Time,
) -> Result<(), SolverError> {
    session.assert(&sys.apply(p, ns, t))
}

fn assert_not_pred(
    sys: &EncodedSystem,
    session: &mut SolverSession,
    p: Predicate,
    ns: &str,
    t: &Time,
) -> Result<(), SolverError> {
    session.assert(&format!("(not {})", sys.apply(p, ns, t)))
}

/// Outcome of one incremental BMC round.
enum Round {
    Violated(Vec<Valuation>),
    Safe,
    Unknown(String),
}

/// Checks `¬P^k` on top of the current base stack; on unsat, learns `P^k`
/// and unrolls one more step.
fn bmc_round(sys: &EncodedSystem, session: &mut SolverSession, ns: &str, k: u32) -> Result<Round, VerifyError> {
    let at = Time::at(k);
    session.push()?;
    assert_not_pred(sys, session, Predicate::Property, ns, &at)?;
    let r = session.check_sat()?;
    let round = match r {
        CheckResult::Sat => Round::Violated(extract_trace(sys, session, ns, k)?),
        CheckResult::Unsat => Round::Safe,
        CheckResult::Unknown(reason) => Round::Unknown(reason),
    };
    session.pop()?;
    if let Round::Safe = round {
        let next = Time::at(k + 1);
        assert_pred(sys, session, Predicate::Property, ns, &at)?;
        assert_pred(sys, session, Predicate::Assertion, ns, &next)?;
        assert_pred(sys, session, Predicate::Step, ns, &next)?;
    }
    Ok(round)
}

fn init_base(sys: &EncodedSystem, session: &mut SolverSession, ns: &str) -> Result<(), SolverError> {
    let zero = Time::at(0);
    assert_pred(sys, session, Predicate::Init, ns, &zero)?;
    assert_pred(sys, session, Predicate::Assertion, ns, &zero)?;
    assert_pred(sys, session, Predicate::Step, ns, &zero)
}

/// Bounded model checking up to `max_depth`.
pub fn bmc(sys: &EncodedSystem, max_depth: u32, session: &mut SolverSession) -> Result<Verdict, VerifyError> {
    scoped(session, |session| {
        load(sys, session, &[TOP])?;
        init_base(sys, session, TOP)?;
        for k in 0..=max_depth {
            match bmc_round(sys, session, TOP, k)? {
                Round::Violated(trace) => return Ok(Verdict::Falsified { depth: k, trace }),
                Round::Unknown(reason) => return Ok(Verdict::Unknown { k, reason }),
                Round::Safe => {}
            }
        }
        Ok(Verdict::Exhausted { bound: max_depth })
    })
}

/// k-induction for k in `0..=max_k`. The base case runs in one namespace
/// and the step case, over a symbolic start index, in another.
pub fn k_induction(sys: &EncodedSystem, max_k: u32, session: &mut SolverSession) -> Result<Verdict, VerifyError> {
    scoped(session, |session| {
        load(sys, session, &[BASE, STEP])?;
        session.send(&format!("(declare-fun {START} () {})", sys.index_sort()))?;
        if sys.config.nat == NatEncoding::Integer {
            session.assert(&format!("(>= {START} 0)"))?;
        }
        init_base(sys, session, BASE)?;
        let n = Time::symbolic(START, 0);
        assert_pred(sys, session, Predicate::Assertion, STEP, &n)?;
        assert_pred(sys, session, Predicate::Step, STEP, &n)?;
        for k in 0..=max_k {
            match bmc_round(sys, session, BASE, k)? {
                Round::Violated(trace) => return Ok(Verdict::Falsified { depth: k, trace }),
                Round::Unknown(reason) => return Ok(Verdict::Unknown { k, reason }),
                Round::Safe => {}
            }
            let (last, next) = (n.shifted(k), n.shifted(k + 1));
            assert_pred(sys, session, Predicate::Property, STEP, &last)?;
            assert_pred(sys, session, Predicate::Assertion, STEP, &next)?;
            assert_pred(sys, session, Predicate::Step, STEP, &next)?;
            session.push()?;
            assert_not_pred(sys, session, Predicate::Property, STEP, &next)?;
            let r = session.check_sat()?;
            session.pop()?;
            match r {
                CheckResult::Unsat => return Ok(Verdict::Proved { k }),
                CheckResult::Sat => {}
                CheckResult::Unknown(reason) => return Ok(Verdict::Unknown { k, reason }),
            }
        }
        Ok(Verdict::Exhausted { bound: max_k })
    })
}

/// Reads the values of all streams at indices `0..=k` from the current model.
pub fn extract_trace(
    sys: &EncodedSystem,
    session: &mut SolverSession,
    ns: &str,
    k: u32,
) -> Result<Vec<Valuation>, VerifyError> {
    let mut trace = vec![];
    for i in 0..=k {
        let t = Time::at(i);
        let mut wanted: Vec<usize> = sys.vars.iter().flat_map(|v| v.streams.iter().copied()).collect();
        wanted.extend(sys.automata.iter().map(|a| a.active));
        let terms: Vec<String> = wanted.iter().map(|&s| sys.stream_at(ns, s, &t)).collect();
        let values = session.get_value(&terms)?;
        let mut leaf = BTreeMap::new();
        for (&s, (_, v)) in wanted.iter().zip(&values) {
            leaf.insert(s, sys.decode(sys.streams[s].sort, v)?);
        }
        let mut step = Valuation::default();
        for var in &sys.vars {
            let mut leaves = var.streams.iter().map(|s| leaf[s].clone());
            let value = Value::from_leaves(&var.ty, &mut leaves).expect("one stream per leaf");
            let target = match var.kind {
                VarKind::Input => &mut step.inputs,
                VarKind::State => &mut step.states,
                VarKind::Local => &mut step.locals,
                VarKind::Output => &mut step.outputs,
            };
            target.insert(var.name.clone(), value);
        }
        for a in &sys.automata {
            if let Value::Enum { ctor, .. } = &leaf[&a.active] {
                step.modes.insert(a.id.clone(), ctor.clone());
            }
        }
        trace.push(step);
    }
    Ok(trace)
}

/// Runs the interpreter on the top-level inputs of a trace. State variables
/// without an initial value start from the trace's first step.
pub fn replay(checked: &CheckedProgram, trace: &[Valuation]) -> Result<Vec<StepRecord>, RunError> {
    let inputs: Vec<IndexMap<Ident, Value>> = trace
        .iter()
        .map(|s| {
            s.inputs
                .iter()
                .filter(|(k, _)| !k.contains('$'))
                .map(|(k, v)| (Ident::new(k.as_str()), v.clone()))
                .collect()
        })
        .collect();
    let overrides = trace.first().map(|s| s.states.clone()).unwrap_or_default();
    run_from(checked, &inputs, &overrides)
}

/// Evaluates a property over the top-level values of a step.
pub fn property_holds(checked: &CheckedProgram, property: &Expr, step: &Valuation) -> Result<bool, RuntimeError> {
    let env = &checked.env;
    let lookup = |x: &Ident| {
        step.get(x.as_str())
            .cloned()
            .or_else(|| global_value(x, &env.consts, &env.enums))
            .ok_or_else(|| RuntimeError::Unscheduled(x.to_string()))
    };
    Ok(eval_expr(property, &lookup)?.as_bool().unwrap_or(false))
}

/// Whether a falsifying trace replays on the interpreter with the property
/// holding before its last step and failing at it.
pub fn confirms_counterexample(
    checked: &CheckedProgram,
    property: Option<&Expr>,
    trace: &[Valuation],
) -> Result<bool, RunError> {
    let records = replay(checked, trace)?;
    if records.len() != trace.len() {
        return Ok(false);
    }
    let Some(property) = property.or(checked.program.invariant.as_ref()) else {
        return Ok(false);
    };
    let mut held = vec![];
    for (i, r) in records.iter().enumerate() {
        let ok = property_holds(checked, property, &r.values).map_err(|source| RunError {
            step: i,
            completed: records.clone(),
            source,
        })?;
        held.push(ok);
    }
    let (last, before) = held.split_last().expect("non-empty trace");
    Ok(!last && before.iter().all(|&b| b))
}
