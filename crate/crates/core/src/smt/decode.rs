//! Reading model values back into LAMA values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Zero};
use thiserror::Error;

use crate::ast::Ident;
use crate::smt::encode::{EncodedSystem, SortOrigin, ValueSort};
use crate::solver::sexp::SExpr;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read '{text}' as a value of sort {sort}")]
pub struct DecodeError {
    pub text: String,
    pub sort: String,
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('|').and_then(|s| s.strip_suffix('|')).unwrap_or(s)
}

/// Evaluates a numeric model term: numerals, decimals, and applications of
/// `-`, `+`, `/` and `to_real`.
fn rational(e: &SExpr) -> Option<BigRational> {
    match e {
        SExpr::Atom(a) => {
            if let Some((int, frac)) = a.split_once('.') {
                let digits = format!("{int}{frac}");
                let num = BigInt::from_str_radix(&digits, 10).ok()?;
                let den = BigInt::from(10).pow(frac.len() as u32);
                Some(BigRational::new(num, den))
            } else {
                BigInt::from_str_radix(a, 10).ok().map(BigRational::from_integer)
            }
        }
        SExpr::List(items) => {
            let (head, args) = items.split_first()?;
            let args = args.iter().map(rational).collect::<Option<Vec<_>>>()?;
            match (head.atom()?, args.as_slice()) {
                ("-", [x]) => Some(-x.clone()),
                ("-", [x, rest @ ..]) => Some(rest.iter().fold(x.clone(), |acc, y| acc - y)),
                ("+", xs) => Some(xs.iter().fold(BigRational::zero(), |acc, y| acc + y)),
                ("/", [x, y]) if !y.is_zero() => Some(x / y),
                ("to_real", [x]) => Some(x.clone()),
                _ => None,
            }
        }
    }
}

fn bitvector(e: &SExpr) -> Option<usize> {
    match e {
        SExpr::Atom(a) => {
            if let Some(bits) = a.strip_prefix("#b") {
                usize::from_str_radix(bits, 2).ok()
            } else if let Some(hex) = a.strip_prefix("#x") {
                usize::from_str_radix(hex, 16).ok()
            } else {
                None
            }
        }
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(u), SExpr::Atom(bv), _] if u == "_" => bv.strip_prefix("bv")?.parse().ok(),
            _ => None,
        },
    }
}

fn constructor(e: &SExpr) -> Option<&str> {
    match e {
        SExpr::Atom(a) => Some(unquote(a)),
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(as_), c, _] if as_ == "as" => constructor(c),
            _ => None,
        },
    }
}

impl EncodedSystem {
    /// Index of the constructor denoted by a model value of an enum sort.
    pub fn decode_enum_index(&self, sort: usize, e: &SExpr) -> Option<usize> {
        let s = &self.sorts[sort];
        let index = match self.config.enums {
            crate::smt::EnumEncoding::Datatype => {
                let name = constructor(e)?;
                (0..s.ctors.len()).find(|&i| s.ctor_smt_name(i) == name)?
            }
            crate::smt::EnumEncoding::Bitvector => bitvector(e)?,
        };
        (index < s.ctors.len()).then_some(index)
    }

    /// Decodes a model value. Location sorts decode to an enum value whose
    /// type is the automaton id.
    pub fn decode(&self, sort: ValueSort, e: &SExpr) -> Result<Value, DecodeError> {
        let err = || DecodeError { text: e.to_string(), sort: self.sort_name(sort) };
        match sort {
            ValueSort::Bool => match e.atom() {
                Some("true") => Ok(Value::Bool(true)),
                Some("false") => Ok(Value::Bool(false)),
                _ => Err(err()),
            },
            ValueSort::Int => {
                let r = rational(e).ok_or_else(err)?;
                if r.is_integer() {
                    Ok(Value::Int(r.to_integer()))
                } else {
                    Err(err())
                }
            }
            ValueSort::Real => rational(e).map(Value::Real).ok_or_else(err),
            ValueSort::Enum(sort) => {
                let index = self.decode_enum_index(sort, e).ok_or_else(err)?;
                let s = &self.sorts[sort];
                let ty = match &s.origin {
                    SortOrigin::Enum(name) => name.clone(),
                    SortOrigin::Locations(id) => Ident::new(id.as_str()),
                };
                Ok(Value::Enum { ty, ctor: s.ctors[index].clone() })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::CheckedProgram;
    use crate::smt::{encode_program, EncodingConfig, EnumEncoding, NatEncoding};
    use crate::solver::sexp::parse_sexpr;

    fn sys(enums: EnumEncoding) -> EncodedSystem {
        let c = CheckedProgram::from_source("typedef enum E = {A, B, C}; input e : E;").unwrap();
        encode_program(&c, EncodingConfig { nat: NatEncoding::Integer, enums }, None).unwrap()
    }

    fn decode(s: &EncodedSystem, sort: ValueSort, text: &str) -> Result<Value, DecodeError> {
        s.decode(sort, &parse_sexpr(text).unwrap())
    }

    #[test]
    fn numbers() {
        let s = sys(EnumEncoding::Bitvector);
        assert_eq!(decode(&s, ValueSort::Int, "(- 7)").unwrap(), Value::int(-7));
        assert_eq!(decode(&s, ValueSort::Real, "(/ 1.0 4.0)").unwrap(), Value::real(1, 4));
        assert_eq!(decode(&s, ValueSort::Real, "(- (/ 3 2))").unwrap(), Value::real(-3, 2));
        assert_eq!(decode(&s, ValueSort::Real, "0.25").unwrap(), Value::real(1, 4));
        assert!(decode(&s, ValueSort::Int, "(/ 1 2)").is_err());
        assert!(decode(&s, ValueSort::Bool, "1").is_err());
    }

    #[test]
    fn enums_in_both_encodings() {
        let e = |ctor: &str| Value::Enum { ty: "E".into(), ctor: ctor.into() };
        let bv = sys(EnumEncoding::Bitvector);
        assert_eq!(decode(&bv, ValueSort::Enum(0), "#b10").unwrap(), e("C"));
        assert_eq!(decode(&bv, ValueSort::Enum(0), "(_ bv1 2)").unwrap(), e("B"));
        assert!(decode(&bv, ValueSort::Enum(0), "#b11").is_err());
        let dt = sys(EnumEncoding::Datatype);
        assert_eq!(decode(&dt, ValueSort::Enum(0), "enum$E$A").unwrap(), e("A"));
        assert_eq!(decode(&dt, ValueSort::Enum(0), "(as enum$E$B enum$E)").unwrap(), e("B"));
    }
}
