//! Parsing, type checking and causality analysis in one step.

use thiserror::Error;

use crate::ast::Program;
use crate::deps::{analyze_program, DepError, ScopeDeps};
use crate::parser::{parse_program, ParseError};
use crate::typecheck::{check_program, Env, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Type(Vec<TypeError>),
    #[error("causality error: {0}")]
    Deps(#[from] DepError),
}

impl StaticError {
    /// Error lines prefixed with a file name, one per diagnostic.
    pub fn lines(&self, file: &str) -> Vec<String> {
        match self {
            StaticError::Parse(e) => vec![format!("{file}:{e}")],
            StaticError::Type(es) => es.iter().map(|e| format!("{file}:{e}")).collect(),
            StaticError::Deps(e) => vec![format!("{file}: [causality] {e}")],
        }
    }
}

/// A program that passed all static checks.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub program: Program,
    pub env: Env,
    pub deps: ScopeDeps,
}

impl CheckedProgram {
    pub fn new(program: Program) -> Result<Self, StaticError> {
        let env = check_program(&program).map_err(StaticError::Type)?;
        let deps = analyze_program(&program, &env)?;
        Ok(CheckedProgram { program, env, deps })
    }

    pub fn from_source(src: &str) -> Result<Self, StaticError> {
        Self::new(parse_program(src)?)
    }
}
