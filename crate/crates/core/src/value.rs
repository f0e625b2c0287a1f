//! Runtime values with exact arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Euclid, Zero};
use thiserror::Error;

use crate::ast::{Atom, BinOp, Constant, Expr, Ident, Type, UnOp};
use crate::parser::pretty::pretty_constant;
use crate::typecheck::{sint_range, uint_range, EnumTable};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
    SInt(u64, BigInt),
    UInt(u64, BigInt),
    Enum { ty: Ident, ctor: Ident },
    Tuple(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} overflows {1}")]
    Overflow(BigInt, String),
    #[error("operator '{op}' is not defined on {operands}")]
    BadOperands { op: &'static str, operands: String },
    #[error("value '{0}' is malformed")]
    Malformed(String),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(BigInt::from(v))
    }

    pub fn real(num: i64, den: i64) -> Value {
        Value::Real(BigRational::new(num.into(), den.into()))
    }

    pub fn from_constant(c: &Constant) -> Value {
        match c {
            Constant::Bool(b) => Value::Bool(*b),
            Constant::Int(n) => Value::Int(n.clone()),
            Constant::Real(n, d) => Value::Real(BigRational::new(n.clone(), d.clone())),
            Constant::SInt(w, v) => Value::SInt(*w, v.clone()),
            Constant::UInt(w, v) => Value::UInt(*w, v.clone()),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Checks that the value inhabits a desugared type.
    pub fn has_type(&self, ty: &Type, enums: &EnumTable) -> bool {
        match (self, ty) {
            (Value::Bool(_), Type::Bool) | (Value::Int(_), Type::Int) | (Value::Real(_), Type::Real) => true,
            (Value::SInt(w, v), Type::SInt(n)) => {
                let (lo, hi) = sint_range(*n);
                w == n && *v >= lo && *v <= hi
            }
            (Value::UInt(w, v), Type::UInt(n)) => {
                let (lo, hi) = uint_range(*n);
                w == n && *v >= lo && *v <= hi
            }
            (Value::Enum { ty: e, ctor }, Type::Named(n)) => {
                e == n && enums.enums.get(n).is_some_and(|cs| cs.contains(ctor))
            }
            (Value::Tuple(vs), Type::Prod(ts)) => {
                vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| v.has_type(t, enums))
            }
            _ => false,
        }
    }

    /// Coerces an integer literal to a real where a real is expected.
    pub fn coerce_to(self, ty: &Type) -> Value {
        match (self, ty) {
            (Value::Int(n), Type::Real) => Value::Real(BigRational::from_integer(n)),
            (Value::Tuple(vs), Type::Prod(ts)) if vs.len() == ts.len() => {
                Value::Tuple(vs.into_iter().zip(ts).map(|(v, t)| v.coerce_to(t)).collect())
            }
            (v, _) => v,
        }
    }

    /// Scalar leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Value> {
        match self {
            Value::Tuple(vs) => vs.iter().flat_map(|v| v.leaves()).collect(),
            v => vec![v],
        }
    }

    /// Rebuilds a value of the given type from its scalar leaves.
    pub fn from_leaves(ty: &Type, leaves: &mut impl Iterator<Item = Value>) -> Option<Value> {
        match ty {
            Type::Prod(ts) => {
                let vs = ts.iter().map(|t| Value::from_leaves(t, leaves)).collect::<Option<_>>()?;
                Some(Value::Tuple(vs))
            }
            _ => leaves.next(),
        }
    }

    /// Converts a constant-shaped expression (literal, constructor or tuple
    /// of those) to a value.
    pub fn from_expr(e: &Expr, enums: &EnumTable) -> Option<Value> {
        match e {
            Expr::Atom(Atom::Const(c)) => Some(Value::from_constant(c)),
            Expr::Atom(Atom::Var(x)) => {
                enums.ctor_owner.get(x).map(|ty| Value::Enum { ty: ty.clone(), ctor: x.clone() })
            }
            Expr::Prod(es) => es.iter().map(|e| Value::from_expr(e, enums)).collect::<Option<_>>().map(Value::Tuple),
            Expr::Unary(UnOp::Not, _) | Expr::Binary(..) | Expr::Ternary(..) | Expr::Project(..) | Expr::Match(..) => {
                None
            }
        }
    }
}

fn int_text(n: &BigInt) -> String {
    pretty_constant(&Constant::Int(n.clone()))
}

impl fmt::Display for Value {
    /// Prints in LAMA constant syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => f.write_str(&int_text(n)),
            Value::Real(q) => write!(f, "{}/{}", int_text(q.numer()), int_text(q.denom())),
            Value::SInt(w, v) => write!(f, "sint[{w}]({})", int_text(v)),
            Value::UInt(w, v) => write!(f, "uint[{w}]({v})"),
            Value::Enum { ctor, .. } => write!(f, "{ctor}"),
            Value::Tuple(vs) => {
                f.write_str("(#")?;
                for v in vs {
                    write!(f, " {v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn bad(op: BinOp, l: &Value, r: &Value) -> ValueError {
    ValueError::BadOperands { op: op.symbol(), operands: format!("{l} and {r}") }
}

fn check_sint(w: u64, v: BigInt) -> Result<Value, ValueError> {
    let (lo, hi) = sint_range(w);
    if v < lo || v > hi {
        Err(ValueError::Overflow(v, format!("sint[{w}]")))
    } else {
        Ok(Value::SInt(w, v))
    }
}

fn check_uint(w: u64, v: BigInt) -> Result<Value, ValueError> {
    let (lo, hi) = uint_range(w);
    if v < lo || v > hi {
        Err(ValueError::Overflow(v, format!("uint[{w}]")))
    } else {
        Ok(Value::UInt(w, v))
    }
}

/// Euclidean division: the remainder is always non-negative.
pub fn euclid_div_mod(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt), ValueError> {
    if b.is_zero() {
        return Err(ValueError::DivisionByZero);
    }
    Ok((a.div_euclid(b), a.rem_euclid(b)))
}

pub fn apply_not(v: &Value) -> Result<Value, ValueError> {
    match v {
        Value::Bool(b) => Ok(Value::Bool(!b)),
        other => Err(ValueError::BadOperands { op: "not", operands: other.to_string() }),
    }
}

pub fn apply_binop(op: BinOp, l: &Value, r: &Value) -> Result<Value, ValueError> {
    use Value::*;
    match op {
        BinOp::Eq => Ok(Bool(l == r)),
        BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies => match (l, r) {
            (Bool(a), Bool(b)) => Ok(Bool(match op {
                BinOp::And => *a && *b,
                BinOp::Or => *a || *b,
                BinOp::Xor => a != b,
                _ => !*a || *b,
            })),
            _ => Err(bad(op, l, r)),
        },
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => {
            let ord = match (l, r) {
                (Int(a), Int(b)) => a.cmp(b),
                (Real(a), Real(b)) => a.cmp(b),
                (SInt(w, a), SInt(v, b)) | (UInt(w, a), UInt(v, b)) if w == v => a.cmp(b),
                _ => return Err(bad(op, l, r)),
            };
            Ok(Bool(match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Gt => ord.is_gt(),
                BinOp::Le => ord.is_le(),
                _ => ord.is_ge(),
            }))
        }
        BinOp::Plus | BinOp::Minus | BinOp::Mul => {
            fn arith<T>(op: BinOp, a: &T, b: &T) -> T
            where
                for<'x> &'x T: std::ops::Add<&'x T, Output = T>
                    + std::ops::Sub<&'x T, Output = T>
                    + std::ops::Mul<&'x T, Output = T>,
            {
                match op {
                    BinOp::Plus => a + b,
                    BinOp::Minus => a - b,
                    _ => a * b,
                }
            }
            match (l, r) {
                (Int(a), Int(b)) => Ok(Int(arith(op, a, b))),
                (Real(a), Real(b)) => Ok(Real(arith(op, a, b))),
                (SInt(w, a), SInt(v, b)) if w == v => check_sint(*w, arith(op, a, b)),
                (UInt(w, a), UInt(v, b)) if w == v => check_uint(*w, arith(op, a, b)),
                _ => Err(bad(op, l, r)),
            }
        }
        BinOp::IntDiv | BinOp::Mod => match (l, r) {
            (Int(a), Int(b)) => {
                let (q, m) = euclid_div_mod(a, b)?;
                Ok(Int(if op == BinOp::IntDiv { q } else { m }))
            }
            _ => Err(bad(op, l, r)),
        },
        BinOp::RealDiv => match (l, r) {
            (Real(a), Real(b)) => {
                if b.is_zero() {
                    Err(ValueError::DivisionByZero)
                } else {
                    Ok(Real(a / b))
                }
            }
            _ => Err(bad(op, l, r)),
        },
    }
}

/// Parses a value written in LAMA constant syntax and checks it against the
/// expected type. Integer literals are accepted where reals are expected.
pub fn parse_value(text: &str, ty: &Type, enums: &EnumTable) -> Result<Value, ValueError> {
    let malformed = || ValueError::Malformed(text.trim().to_string());
    let e = crate::parser::parse_expr(text).map_err(|_| malformed())?;
    let v = Value::from_expr(&e, enums).ok_or_else(malformed)?.coerce_to(ty);
    if v.has_type(ty, enums) {
        Ok(v)
    } else {
        Err(malformed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_division() {
        // a = b*q + r with 0 <= r < |b|
        for (a, b, q, r) in [(7, 2, 3, 1), (-7, 2, -4, 1), (7, -2, -3, 1), (-7, -2, 4, 1)] {
            let (qq, rr) = euclid_div_mod(&a.into(), &b.into()).unwrap();
            assert_eq!((qq, rr), (q.into(), r.into()), "{a} div {b}");
        }
        assert_eq!(euclid_div_mod(&1.into(), &0.into()), Err(ValueError::DivisionByZero));
    }

    #[test]
    fn sint_overflow_is_an_error() {
        let r = apply_binop(BinOp::Plus, &Value::SInt(4, 7.into()), &Value::SInt(4, 1.into()));
        assert!(matches!(r, Err(ValueError::Overflow(..))));
        let r = apply_binop(BinOp::Minus, &Value::UInt(4, 0.into()), &Value::UInt(4, 1.into()));
        assert!(matches!(r, Err(ValueError::Overflow(..))));
    }

    #[test]
    fn display_uses_constant_syntax() {
        assert_eq!(Value::int(-3).to_string(), "(- 3)");
        assert_eq!(Value::real(-1, 2).to_string(), "(- 1)/2");
        assert_eq!(Value::real(4, 2).to_string(), "2/1");
        assert_eq!(Value::Tuple(vec![Value::int(1), Value::Bool(false)]).to_string(), "(# 1 false)");
    }

    #[test]
    fn parse_and_print_round_trip() {
        let enums = EnumTable::default();
        let ty = Type::Prod(vec![Type::Real, Type::SInt(8), Type::Bool]);
        let v = parse_value("(# 3/4 sint[8]((- 2)) true)", &ty, &enums).unwrap();
        assert_eq!(parse_value(&v.to_string(), &ty, &enums).unwrap(), v);
        assert_eq!(parse_value("5", &Type::Real, &enums).unwrap(), Value::real(5, 1));
        assert!(parse_value("true", &Type::Int, &enums).is_err());
    }

    #[test]
    fn leaves_round_trip() {
        let ty = Type::Prod(vec![Type::Int, Type::Prod(vec![Type::Bool, Type::Int])]);
        let v = Value::Tuple(vec![Value::int(1), Value::Tuple(vec![Value::Bool(true), Value::int(2)])]);
        let leaves: Vec<Value> = v.leaves().into_iter().cloned().collect();
        assert_eq!(leaves.len(), 3);
        assert_eq!(Value::from_leaves(&ty, &mut leaves.into_iter()).unwrap(), v);
    }
}
