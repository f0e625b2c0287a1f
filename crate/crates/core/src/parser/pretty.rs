//! Pretty printer producing text that parses back to an equal tree.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::ast::*;

fn int_const(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

pub fn pretty_constant(c: &Constant) -> String {
    match c {
        Constant::Bool(b) => b.to_string(),
        Constant::Int(n) => int_const(n),
        Constant::Real(num, den) => format!("{}/{}", int_const(num), int_const(den)),
        Constant::SInt(w, v) => format!("sint[{w}]({})", int_const(v)),
        Constant::UInt(w, v) => format!("uint[{w}]({v})"),
    }
}

pub fn pretty_type(t: &Type) -> String {
    match t {
        Type::Bool => "bool".into(),
        Type::Int => "int".into(),
        Type::Real => "real".into(),
        Type::SInt(n) => format!("sint[{n}]"),
        Type::UInt(n) => format!("uint[{n}]"),
        Type::Named(x) => x.to_string(),
        Type::Pow(b, n) => format!("{} ^ {n}", pretty_type(b)),
        Type::Prod(ts) => {
            let inner: Vec<_> = ts.iter().map(pretty_type).collect();
            format!("(# {})", inner.join(" "))
        }
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::Atom(Atom::Const(c)) => pretty_constant(c),
        Expr::Atom(Atom::Var(x)) => x.to_string(),
        Expr::Unary(UnOp::Not, e) => format!("(not {})", pretty_expr(e)),
        Expr::Binary(op, l, r) => {
            format!("({} {} {})", op.symbol(), pretty_expr(l), pretty_expr(r))
        }
        Expr::Ternary(TernOp::Ite, c, t, f) => {
            format!("(ite {} {} {})", pretty_expr(c), pretty_expr(t), pretty_expr(f))
        }
        Expr::Prod(es) => {
            let mut s = String::from("(#");
            for e in es {
                s.push(' ');
                s.push_str(&pretty_expr(e));
            }
            s.push(')');
            s
        }
        Expr::Project(x, i) => format!("(project {x} {i})"),
        Expr::Match(e, pats) => {
            let arms: Vec<_> = pats
                .iter()
                .map(|p| {
                    let head = match &p.head {
                        PatHead::Ctor(c) => c.to_string(),
                        PatHead::Wildcard => "_".into(),
                    };
                    format!("{head}.{}", pretty_expr(&p.body))
                })
                .collect();
            format!("(match {} {{{}}})", pretty_expr(e), arms.join(", "))
        }
    }
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn nested(&mut self, f: impl FnOnce(&mut Self)) {
        self.indent += 1;
        f(self);
        self.indent -= 1;
    }

    fn var_decls(&mut self, kw: &str, vars: &[TypedVar]) {
        if vars.is_empty() {
            return;
        }
        self.line(kw);
        self.nested(|p| {
            for v in vars {
                p.line(&format!("{} : {};", v.name, pretty_type(&v.ty)));
            }
        });
    }

    fn declarations(&mut self, d: &Declarations) {
        if !d.nodes.is_empty() {
            self.line("nodes");
            self.nested(|p| d.nodes.iter().for_each(|n| p.node(n)));
        }
        self.var_decls("local", &d.locals);
        self.var_decls("state", &d.states);
    }

    fn flow(&mut self, f: &Flow) {
        if !f.definitions.is_empty() {
            self.line("definition");
            self.nested(|p| {
                for d in &f.definitions {
                    let rhs = match &d.rhs {
                        Rhs::Expr(e) => pretty_expr(e),
                        Rhs::Use { node, args } => {
                            let mut s = format!("(use {node}");
                            for a in args {
                                let _ = write!(s, " {}", pretty_expr(a));
                            }
                            s.push(')');
                            s
                        }
                    };
                    p.line(&format!("{} = {rhs};", d.target));
                }
            });
        }
        if !f.transitions.is_empty() {
            self.line("transition");
            self.nested(|p| {
                for t in &f.transitions {
                    p.line(&format!("{}' = {};", t.target, pretty_expr(&t.rhs)));
                }
            });
        }
    }

    fn initial(&mut self, inits: &[StateInit]) {
        if inits.is_empty() {
            return;
        }
        let parts: Vec<_> = inits.iter().map(|i| format!("{} = {}", i.target, pretty_expr(&i.value))).collect();
        self.line(&format!("initial {};", parts.join(", ")));
    }

    fn automaton(&mut self, a: &Automaton) {
        self.line("automaton let");
        self.nested(|p| {
            for l in &a.locations {
                p.line(&format!("location {} let", l.name));
                p.nested(|p| p.flow(&l.flow));
                p.line("tel");
            }
            p.line(&format!("initial {};", a.initial));
            for e in &a.edges {
                p.line(&format!("edge ({}, {}) : {};", e.from, e.to, pretty_expr(&e.cond)));
            }
            if !a.defaults.is_empty() {
                let parts: Vec<_> =
                    a.defaults.iter().map(|d| format!("{} = {}", d.target, pretty_expr(&d.rhs))).collect();
                p.line(&format!("default {};", parts.join(", ")));
            }
        });
        self.line("tel");
    }

    fn node(&mut self, n: &Node) {
        let vars = |vs: &[TypedVar]| {
            vs.iter().map(|v| format!("{} : {}", v.name, pretty_type(&v.ty))).collect::<Vec<_>>().join(", ")
        };
        self.line(&format!("node {}({}) returns ({}) let", n.name, vars(&n.params), vars(&n.returns)));
        self.nested(|p| {
            p.declarations(&n.decls);
            p.flow(&n.flow);
            n.automata.iter().for_each(|a| p.automaton(a));
            p.initial(&n.initial);
            if let Some(a) = &n.assertion {
                p.line(&format!("assertion {};", pretty_expr(a)));
            }
        });
        self.line("tel");
    }
}

pub fn pretty_program(prog: &Program) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    if !prog.typedefs.is_empty() {
        p.line("typedef");
        p.nested(|p| {
            for t in &prog.typedefs {
                let ctors: Vec<_> = t.ctors.iter().map(|c| c.to_string()).collect();
                p.line(&format!("enum {} = {{ {} }};", t.name, ctors.join(", ")));
            }
        });
    }
    if !prog.constants.is_empty() {
        p.line("constants");
        p.nested(|p| {
            for c in &prog.constants {
                p.line(&format!("{} = {};", c.name, pretty_constant(&c.value)));
            }
        });
    }
    p.var_decls("input", &prog.inputs);
    p.declarations(&prog.decls);
    p.flow(&prog.flow);
    p.initial(&prog.initial);
    if let Some(a) = &prog.assertion {
        p.line(&format!("assertion {};", pretty_expr(a)));
    }
    if let Some(i) = &prog.invariant {
        p.line(&format!("invariant {};", pretty_expr(i)));
    }
    p.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};

    #[test]
    fn constants_print_in_source_syntax() {
        assert_eq!(pretty_constant(&Constant::Int((-4).into())), "(- 4)");
        assert_eq!(pretty_constant(&Constant::Real(1.into(), (-2).into())), "1/(- 2)");
        assert_eq!(pretty_constant(&Constant::SInt(8, (-1).into())), "sint[8]((- 1))");
    }

    #[test]
    fn expression_round_trip() {
        let src = "(match (ite a E1 E2) {E1.(project p 0), _.(# 1 (/ 1/2 x))})";
        let e = parse_expr(src).unwrap();
        assert_eq!(parse_expr(&pretty_expr(&e)).unwrap(), e);
    }

    #[test]
    fn automaton_round_trip() {
        let src = "nodes node N(i : int) returns (y : int) let \
                   automaton let location A let tel location B let definition y = i; tel \
                   initial A; edge (A, B) : (> i 0); default y = 0; tel tel";
        let p = parse_program(src).unwrap();
        assert_eq!(parse_program(&pretty_program(&p)).unwrap(), p);
    }
}
