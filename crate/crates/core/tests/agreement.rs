//! The SMT encoding and the interpreter agree on every corpus program.
//!
//! For random input traces, the values computed by the interpreter must be a
//! model of the unrolled transition system, and the only one: once inputs
//! (and uninitialized states) are fixed, no other assignment to the
//! observed streams is consistent.

mod common;

use lama::frontend::CheckedProgram;
use lama::smt::EncodingConfig;

use common::{agree, TRACES};

#[test]
fn interpreter_and_encoding_agree_on_corpus() {
    if !common::z3_available() {
        eprintln!("z3 not found; skipping");
        return;
    }
    for (i, (name, src)) in common::corpus().iter().enumerate() {
        let checked = CheckedProgram::from_source(src).unwrap();
        let n = agree(name, &checked, EncodingConfig::default(), 0x5eed + i as u64);
        if name != "machine_ints.lm" {
            assert!(n >= TRACES / 2, "{name}: only {n} traces ran without runtime errors");
        }
    }
}

#[test]
fn agreement_holds_in_every_encoding() {
    if !common::z3_available() {
        return;
    }
    for name in ["enums.lm", "stress.lm", "two_automata.lm"] {
        let checked = common::load(name);
        for config in EncodingConfig::ALL {
            assert!(agree(name, &checked, config, 7) > 0, "{name} {config:?}");
        }
    }
}
