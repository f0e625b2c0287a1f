//! Client for SMT-LIB2 solvers running as child processes.

pub mod session;
pub mod sexp;

pub use session::{CheckResult, SolverCommand, SolverError, SolverSession};
pub use sexp::{parse_sexpr, SExpr};
