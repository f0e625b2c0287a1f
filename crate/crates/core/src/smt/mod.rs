//! SMT-LIB2 encoding of programs as transition systems over streams.

pub mod decode;
pub mod encode;
pub mod term;

pub use encode::{
    bmc_script, encode_program, symbol, EncodeError, EncodedAutomaton, EncodedSystem, EncodedVar, EncodingConfig,
    EnumEncoding, EnumSort, NatEncoding, Predicate, SortOrigin, StreamDecl, Time, ValueSort,
};
pub use term::{IteKind, Op, Term};
