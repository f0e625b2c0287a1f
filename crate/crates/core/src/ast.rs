//! Abstract syntax of LAMA programs.
//!
//! The tree mirrors the concrete grammar closely so that pretty printing
//! followed by parsing reproduces the same tree. Source positions are carried
//! on declarations and statements but never take part in equality.

use std::borrow::Borrow;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use thiserror::Error;

/// Line/column position in the source text (1-based).
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

impl Hash for Loc {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// An identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ident(String);

impl Ident {
    pub fn new(s: impl Into<String>) -> Self {
        Ident(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident(s.to_string())
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Surface types, including the `T ^ n` shorthand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Int,
    Real,
    SInt(u64),
    UInt(u64),
    Named(Ident),
    /// `T ^ n`, an n-fold product of a base type.
    Pow(Box<Type>, u64),
    Prod(Vec<Type>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeShapeError {
    #[error("power type with exponent 0")]
    ZeroPower,
    #[error("empty product type")]
    EmptyProduct,
}

impl Type {
    pub fn is_base(&self) -> bool {
        matches!(self, Type::Bool | Type::Int | Type::Real | Type::SInt(_) | Type::UInt(_))
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Type::Prod(_) | Type::Pow(..))
    }

    /// Number of scalar leaves of a desugared type.
    pub fn leaf_count(&self) -> usize {
        match self {
            Type::Prod(ts) => ts.iter().map(Type::leaf_count).sum(),
            Type::Pow(t, n) => t.leaf_count() * (*n as usize),
            _ => 1,
        }
    }
}

/// Replaces every `T ^ n` by the product of n copies of `T`.
pub fn desugar_pow_type(ty: &Type) -> Result<Type, TypeShapeError> {
    match ty {
        Type::Pow(base, n) => {
            if *n == 0 {
                return Err(TypeShapeError::ZeroPower);
            }
            let base = desugar_pow_type(base)?;
            Ok(Type::Prod(vec![base; *n as usize]))
        }
        Type::Prod(ts) => {
            if ts.is_empty() {
                return Err(TypeShapeError::EmptyProduct);
            }
            Ok(Type::Prod(ts.iter().map(desugar_pow_type).collect::<Result<_, _>>()?))
        }
        other => Ok(other.clone()),
    }
}

/// Literal constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Bool(bool),
    Int(BigInt),
    /// Numerator and denominator as written; the denominator is never zero.
    Real(BigInt, BigInt),
    SInt(u64, BigInt),
    UInt(u64, BigInt),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Xor,
    Implies,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Mul,
    RealDiv,
    IntDiv,
    Mod,
}

impl BinOp {
    pub const ALL: [BinOp; 15] = [
        BinOp::Or,
        BinOp::And,
        BinOp::Xor,
        BinOp::Implies,
        BinOp::Eq,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
        BinOp::Plus,
        BinOp::Minus,
        BinOp::Mul,
        BinOp::RealDiv,
        BinOp::IntDiv,
        BinOp::Mod,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Xor => "xor",
            BinOp::Implies => "=>",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Plus => "+",
            BinOp::Minus => "-",
            BinOp::Mul => "*",
            BinOp::RealDiv => "/",
            BinOp::IntDiv => "div",
            BinOp::Mod => "mod",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TernOp {
    Ite,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Const(Constant),
    Var(Ident),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(Atom),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ternary(TernOp, Box<Expr>, Box<Expr>, Box<Expr>),
    Prod(Vec<Expr>),
    /// `(project x i)`, zero-based.
    Project(Ident, u64),
    Match(Box<Expr>, Vec<Pattern>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Atom(Atom::Var(Ident::from(name)))
    }

    pub fn int(v: i64) -> Expr {
        Expr::Atom(Atom::Const(Constant::Int(BigInt::from(v))))
    }

    pub fn boolean(b: bool) -> Expr {
        Expr::Atom(Atom::Const(Constant::Bool(b)))
    }

    pub fn negation(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::Ternary(TernOp::Ite, Box::new(c), Box::new(t), Box::new(e))
    }

    /// Visits every identifier read by the expression (including constants
    /// and enum constructors, which callers filter).
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        match self {
            Expr::Atom(Atom::Var(x)) => f(x),
            Expr::Atom(Atom::Const(_)) => {}
            Expr::Unary(_, e) => e.for_each_ident(f),
            Expr::Binary(_, l, r) => {
                l.for_each_ident(f);
                r.for_each_ident(f);
            }
            Expr::Ternary(_, a, b, c) => {
                a.for_each_ident(f);
                b.for_each_ident(f);
                c.for_each_ident(f);
            }
            Expr::Prod(es) => es.iter().for_each(|e| e.for_each_ident(f)),
            Expr::Project(x, _) => f(x),
            Expr::Match(e, pats) => {
                e.for_each_ident(f);
                for p in pats {
                    p.body.for_each_ident(f);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PatHead {
    Ctor(Ident),
    Wildcard,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub head: PatHead,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumDef {
    pub name: Ident,
    pub ctors: Vec<Ident>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantDef {
    pub name: Ident,
    pub value: Constant,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedVar {
    pub name: Ident,
    pub ty: Type,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Declarations {
    pub nodes: Vec<Node>,
    pub locals: Vec<TypedVar>,
    pub states: Vec<TypedVar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Use { node: Ident, args: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantDefinition {
    pub target: Ident,
    pub rhs: Rhs,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub target: Ident,
    pub rhs: Expr,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Flow {
    pub definitions: Vec<InstantDefinition>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: Ident,
    pub flow: Flow,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Ident,
    pub to: Ident,
    pub cond: Expr,
    /// Position among the automaton's edges; lower wins.
    pub priority: usize,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefaultDef {
    pub target: Ident,
    pub rhs: Expr,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub locations: Vec<Location>,
    pub initial: Ident,
    pub edges: Vec<Edge>,
    pub defaults: Vec<DefaultDef>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInit {
    pub target: Ident,
    pub value: Expr,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: Ident,
    pub params: Vec<TypedVar>,
    pub returns: Vec<TypedVar>,
    pub decls: Declarations,
    pub flow: Flow,
    pub automata: Vec<Automaton>,
    pub initial: Vec<StateInit>,
    pub assertion: Option<Expr>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub typedefs: Vec<EnumDef>,
    pub constants: Vec<ConstantDef>,
    pub inputs: Vec<TypedVar>,
    pub decls: Declarations,
    pub flow: Flow,
    pub initial: Vec<StateInit>,
    pub assertion: Option<Expr>,
    pub invariant: Option<Expr>,
    pub assertion_loc: Loc,
    pub invariant_loc: Loc,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locations_do_not_affect_equality() {
        let a = TypedVar { name: "x".into(), ty: Type::Int, loc: Loc::new(1, 1) };
        let b = TypedVar { name: "x".into(), ty: Type::Int, loc: Loc::new(7, 3) };
        assert_eq!(a, b);
    }

    #[test]
    fn pow_desugars_to_product() {
        let t = Type::Pow(Box::new(Type::Int), 3);
        assert_eq!(desugar_pow_type(&t).unwrap(), Type::Prod(vec![Type::Int, Type::Int, Type::Int]));
        assert_eq!(t.leaf_count(), 3);
    }

    #[test]
    fn pow_zero_is_rejected() {
        let t = Type::Pow(Box::new(Type::Bool), 0);
        assert_eq!(desugar_pow_type(&t), Err(TypeShapeError::ZeroPower));
    }

    #[test]
    fn nested_pow_inside_product() {
        let t = Type::Prod(vec![Type::Pow(Box::new(Type::Real), 2), Type::Bool]);
        assert_eq!(
            desugar_pow_type(&t).unwrap(),
            Type::Prod(vec![Type::Prod(vec![Type::Real, Type::Real]), Type::Bool])
        );
    }
}
