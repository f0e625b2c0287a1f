//! Concrete syntax: lexer, recursive-descent parser and pretty printer.

mod grammar;
pub mod lexer;
pub mod pretty;

use std::fmt;

use thiserror::Error;

use crate::ast::{Expr, Loc, Program};

pub use pretty::{pretty_expr, pretty_program, pretty_type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub loc: Loc,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.loc)?;
        if self.expected.is_empty() {
            write!(f, "{}", self.found)
        } else {
            write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
        }
    }
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = lexer::tokenize(src)?;
    grammar::Parser::new(toks).program()
}

/// Parses a single expression (used for property files and trace values).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lexer::tokenize(src)?;
    let mut p = grammar::Parser::new(toks);
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}
