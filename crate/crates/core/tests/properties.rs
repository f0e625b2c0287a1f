//! Property-based checks of invariants that hold for all inputs.

mod common;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lama::ast::{BinOp, Expr, Ident, PatHead, Pattern};
use lama::frontend::CheckedProgram;
use lama::interp::run;
use lama::parser::pretty::pretty_expr;
use lama::parser::{parse_expr, parse_program};
use lama::smt::EnumSort;
use lama::solver::sexp::{parse_sexpr, SExpr};
use lama::trace::{format_trace, parse_input_trace, Valuation};
use lama::value::{apply_binop, Value};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-50i64..50).prop_map(Expr::int),
        any::<bool>().prop_map(Expr::boolean),
        prop::sample::select(vec!["x", "y", "z_1"]).prop_map(Expr::var),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::negation),
            (prop::sample::select(BinOp::ALL.to_vec()), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| Expr::ite(c, t, e)),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Prod),
            (inner.clone(), inner.clone(), inner).prop_map(|(s, a, b)| Expr::Match(
                Box::new(s),
                vec![
                    Pattern { head: PatHead::Ctor(Ident::from("A")), body: a },
                    Pattern { head: PatHead::Wildcard, body: b },
                ],
            )),
        ]
    })
}

/// Integer expressions over one int local.
fn int_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![(-9i64..9).prop_map(Expr::int), Just(Expr::var("x"))].prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::Plus, BinOp::Minus, BinOp::Mul]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Expr::ite(
                Expr::binary(BinOp::Lt, a, b),
                c.clone(),
                c
            )),
        ]
    })
}

fn sexpr() -> impl Strategy<Value = SExpr> {
    "[a-z][a-z0-9$.%]{0,5}"
        .prop_map(SExpr::Atom)
        .prop_recursive(3, 20, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(SExpr::List))
}

proptest! {
    #[test]
    fn expressions_round_trip(e in expr()) {
        let text = pretty_expr(&e);
        prop_assert_eq!(parse_expr(&text).unwrap(), e);
    }

    #[test]
    fn parser_never_panics(src in "[a-z0-9 ();:=,'{}#_\\n-]{0,80}") {
        let _ = parse_program(&src);
    }

    #[test]
    fn euclidean_division(a in -1000i64..1000, b in -50i64..50) {
        prop_assume!(b != 0);
        let (va, vb) = (Value::int(a), Value::int(b));
        let Value::Int(q) = apply_binop(BinOp::IntDiv, &va, &vb).unwrap() else { unreachable!() };
        let Value::Int(r) = apply_binop(BinOp::Mod, &va, &vb).unwrap() else { unreachable!() };
        let b = BigInt::from(b);
        prop_assert_eq!(&b * &q + &r, BigInt::from(a));
        prop_assert!(!r.is_negative() && r < b.abs());
    }

    #[test]
    fn sexprs_round_trip(e in sexpr()) {
        prop_assert_eq!(parse_sexpr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn self_transitions_are_causal(e in int_expr()) {
        let src = format!("state x : int; transition x' = {}; initial x = 0; invariant true;", pretty_expr(&e));
        prop_assert!(CheckedProgram::from_source(&src).is_ok(), "{}", src);
    }

    #[test]
    fn well_typed_int_expressions_infer_int(e in int_expr()) {
        let c = CheckedProgram::from_source("input x : int;").unwrap();
        prop_assert_eq!(c.env.infer_top(&e).unwrap(), lama::ast::Type::Int);
    }

    #[test]
    fn definition_order_is_irrelevant(perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        // A chain v0 <- v1 <- ... <- v5 declared and defined in shuffled order.
        let decls: String = perm.iter().map(|i| format!("v{i} : int; ")).collect();
        let defs: String = perm
            .iter()
            .map(|&i| if i == 0 { "v0 = i; ".to_string() } else { format!("v{i} = (+ v{} 1); ", i - 1) })
            .collect();
        let src = format!("input i : int; local {decls} definition {defs}");
        let c = CheckedProgram::from_source(&src).unwrap();
        let pos = |name: &str| c.deps.order.iter().position(|n| n.var.as_str() == name).unwrap();
        for i in 1..6 {
            let (dep, def) = (format!("v{}", i - 1), format!("v{i}"));
            prop_assert!(pos(&dep) < pos(&def));
        }
        let inputs = vec![[(Ident::from("i"), Value::int(1))].into_iter().collect()];
        let records = run(&c, &inputs).unwrap();
        prop_assert_eq!(records[0].values.get("v5"), Some(&Value::int(6)));
    }

    #[test]
    fn bitvector_width_is_minimal(n in 1usize..600) {
        let s = EnumSort { origin: lama::smt::SortOrigin::Enum("E".into()), smt_name: "E".into(), ctors: (0..n).map(|i| Ident::new(format!("C{i}"))).collect() };
        let w = s.width();
        prop_assert!(1usize << w >= n);
        prop_assert!(w == 1 || (1usize << (w - 1)) < n);
    }

    #[test]
    fn input_traces_round_trip(seed in any::<u64>(), len in 0usize..6) {
        let c = common::load("enums.lm");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = common::random_inputs(&mut rng, &c, len);
        let lines: Vec<Valuation> = inputs
            .iter()
            .map(|step| Valuation { inputs: step.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(), ..Valuation::default() })
            .collect();
        let text = format_trace(&lines);
        let parsed = parse_input_trace(&text, &c.program.inputs, &c.env.top, &c.env.enums).unwrap();
        prop_assert_eq!(parsed, inputs);
    }

    #[test]
    fn interpreter_is_deterministic(seed in any::<u64>()) {
        let c = common::load("stress.lm");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = common::random_inputs(&mut rng, &c, 8);
        prop_assert_eq!(run(&c, &inputs), run(&c, &inputs));
    }
}

#[test]
fn zero_divisor_is_an_error() {
    assert!(apply_binop(BinOp::IntDiv, &Value::int(1), &Value::Int(BigInt::zero())).is_err());
}
