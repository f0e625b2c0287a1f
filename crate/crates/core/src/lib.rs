//! LAMA: a synchronous dataflow language with mode automata, together with a
//! static checker, a reference interpreter and an SMT-based verifier
//! (bounded model checking and k-induction).

pub mod ast;
pub mod deps;
pub mod frontend;
pub mod interp;
pub mod parser;
pub mod smt;
pub mod solver;
pub mod trace;
pub mod typecheck;
pub mod value;
pub mod verifier;
