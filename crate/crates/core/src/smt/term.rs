//! Stream terms: formulas over stream values at a symbolic index `n + shift`.

use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Not,
    And,
    Or,
    Xor,
    Implies,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Add,
    Sub,
    Mul,
    RealDiv,
    IntDiv,
    Mod,
    BvUle,
}

impl Op {
    pub fn smt_name(self) -> &'static str {
        match self {
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Xor => "xor",
            Op::Implies => "=>",
            Op::Eq => "=",
            Op::Lt => "<",
            Op::Gt => ">",
            Op::Le => "<=",
            Op::Ge => ">=",
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::RealDiv => "/",
            Op::IntDiv => "div",
            Op::Mod => "mod",
            Op::BvUle => "bvule",
        }
    }
}

/// Origin of an if-then-else: source-level conditionals are evaluated
/// strictly by the interpreter, structural selections are not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IteKind {
    Strict,
    Lazy,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
    EnumConst {
        sort: usize,
        index: usize,
    },
    /// Value of a stream at `n + shift`.
    Stream {
        stream: usize,
        shift: u32,
    },
    App(Op, Vec<Term>),
    Ite {
        kind: IteKind,
        cond: Box<Term>,
        then: Box<Term>,
        other: Box<Term>,
    },
}

impl Term {
    pub fn stream(stream: usize, shift: u32) -> Term {
        Term::Stream { stream, shift }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App(Op::Eq, vec![a, b])
    }

    pub fn negation(a: Term) -> Term {
        match a {
            Term::Bool(b) => Term::Bool(!b),
            a => Term::App(Op::Not, vec![a]),
        }
    }

    /// Conjunction with trivial operands removed.
    pub fn and(ts: Vec<Term>) -> Term {
        let mut parts = vec![];
        for t in ts {
            match t {
                Term::Bool(true) => {}
                Term::Bool(false) => return Term::Bool(false),
                Term::App(Op::And, inner) => parts.extend(inner),
                t => parts.push(t),
            }
        }
        match parts.len() {
            0 => Term::Bool(true),
            1 => parts.pop().expect("one element"),
            _ => Term::App(Op::And, parts),
        }
    }

    pub fn implies(guard: Term, body: Term) -> Term {
        match guard {
            Term::Bool(true) => body,
            g => Term::App(Op::Implies, vec![g, body]),
        }
    }

    pub fn ite(kind: IteKind, cond: Term, then: Term, other: Term) -> Term {
        Term::Ite { kind, cond: Box::new(cond), then: Box::new(then), other: Box::new(other) }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::App(_, ts) => ts.iter().collect(),
            Term::Ite { cond, then, other, .. } => vec![cond, then, other],
            _ => vec![],
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Largest stream shift occurring in the term.
    pub fn max_shift(&self) -> u32 {
        let mut m = 0;
        self.visit(&mut |t| {
            if let Term::Stream { shift, .. } = t {
                m = m.max(*shift);
            }
        });
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_flattens_and_simplifies() {
        let x = Term::stream(0, 0);
        assert_eq!(Term::and(vec![]), Term::Bool(true));
        assert_eq!(Term::and(vec![Term::Bool(true), x.clone()]), x);
        assert_eq!(Term::and(vec![x.clone(), Term::Bool(false)]), Term::Bool(false));
        let nested = Term::and(vec![Term::and(vec![x.clone(), Term::stream(1, 0)]), Term::stream(2, 1)]);
        assert_eq!(nested.children().len(), 3);
        assert_eq!(nested.max_shift(), 1);
    }

    #[test]
    fn trivial_guard_is_dropped() {
        let x = Term::stream(0, 0);
        assert_eq!(Term::implies(Term::Bool(true), x.clone()), x);
    }
}
