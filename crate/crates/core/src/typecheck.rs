//! Static type checking.
//!
//! Operators are typed through polymorphic schemes that are instantiated at
//! each use; every instantiation is logged together with the universe
//! judgement that licensed it.

use std::fmt;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: [{rule}] {message}")]
pub struct TypeError {
    pub loc: Loc,
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub loc: Loc,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.loc, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Universe {
    Num,
    Type,
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Universe::Num => "Num",
            Universe::Type => "Type",
        })
    }
}

/// Types as they occur during checking, including operator schemes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntermediateType {
    Surface(Type),
    /// Well-formedness marker for statements.
    Ok,
    Var(&'static str),
    Arrow(Box<IntermediateType>, Box<IntermediateType>),
    Forall(&'static str, Universe, Box<IntermediateType>),
}

impl fmt::Display for IntermediateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntermediateType::Surface(t) => f.write_str(&crate::parser::pretty_type(t)),
            IntermediateType::Ok => f.write_str("ok"),
            IntermediateType::Var(v) => f.write_str(v),
            IntermediateType::Arrow(a, b) => write!(f, "{a} => {b}"),
            IntermediateType::Forall(v, u, b) => write!(f, "forall {v}:{u}. {b}"),
        }
    }
}

fn arrow(a: IntermediateType, b: IntermediateType) -> IntermediateType {
    IntermediateType::Arrow(Box::new(a), Box::new(b))
}

fn surface(t: Type) -> IntermediateType {
    IntermediateType::Surface(t)
}

/// Rule name and type scheme of a unary or binary operator.
pub fn binop_scheme(op: BinOp) -> (&'static str, IntermediateType) {
    use IntermediateType::{Forall, Var};
    let tv = || Var("t");
    let bool_t = || surface(Type::Bool);
    match op {
        BinOp::Eq => ("eq", Forall("t", Universe::Type, Box::new(arrow(tv(), arrow(tv(), bool_t()))))),
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => {
            ("rels", Forall("t", Universe::Num, Box::new(arrow(tv(), arrow(tv(), bool_t())))))
        }
        BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies => {
            ("bin-bool", arrow(bool_t(), arrow(bool_t(), bool_t())))
        }
        BinOp::Plus | BinOp::Minus | BinOp::Mul => {
            ("arith", Forall("t", Universe::Num, Box::new(arrow(tv(), arrow(tv(), tv())))))
        }
        BinOp::IntDiv | BinOp::Mod => {
            ("int-arith", arrow(surface(Type::Int), arrow(surface(Type::Int), surface(Type::Int))))
        }
        BinOp::RealDiv => ("real-arith", arrow(surface(Type::Real), arrow(surface(Type::Real), surface(Type::Real)))),
    }
}

pub fn not_scheme() -> (&'static str, IntermediateType) {
    ("unary-bool", arrow(surface(Type::Bool), surface(Type::Bool)))
}

pub fn ite_scheme() -> (&'static str, IntermediateType) {
    use IntermediateType::{Forall, Var};
    (
        "ite",
        Forall("t", Universe::Type, Box::new(arrow(surface(Type::Bool), arrow(Var("t"), arrow(Var("t"), Var("t")))))),
    )
}

/// One instantiation of a polymorphic scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub rule: &'static str,
    pub ty: Type,
    pub universe: Universe,
    /// Name of the universe rule that established membership.
    pub judgement: &'static str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumTable {
    pub enums: IndexMap<Ident, Vec<Ident>>,
    pub ctor_owner: IndexMap<Ident, Ident>,
}

impl EnumTable {
    pub fn ctor_index(&self, ctor: &str) -> Option<usize> {
        let owner = self.ctor_owner.get(ctor)?;
        self.enums[owner].iter().position(|c| c.as_str() == ctor)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstTable {
    pub consts: IndexMap<Ident, (Type, Constant)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Input,
    Output,
    Local,
    State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub ty: Type,
    pub kind: VarKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSig {
    pub params: Vec<Type>,
    pub returns: Vec<Type>,
}

impl NodeSig {
    /// Type of `(# A1 .. An) => (# B1 .. Bm)`.
    pub fn as_type(&self) -> IntermediateType {
        arrow(surface(Type::Prod(self.params.clone())), surface(Type::Prod(self.returns.clone())))
    }

    /// Type received by the target of a `use`; a single result is not wrapped.
    pub fn result_type(&self) -> Type {
        if self.returns.len() == 1 {
            self.returns[0].clone()
        } else {
            Type::Prod(self.returns.clone())
        }
    }
}

/// Variables and nodes visible in one block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scope {
    pub vars: IndexMap<Ident, VarInfo>,
    pub nodes: IndexMap<Ident, NodeScope>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeScope {
    pub sig: NodeSig,
    pub scope: Scope,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub enums: EnumTable,
    pub consts: ConstTable,
    pub top: Scope,
    pub warnings: Vec<Warning>,
    pub instantiations: Vec<Instantiation>,
}

/// Minimal universe of a desugared type, or `None` for unknown enums.
pub fn universe_of(ty: &Type, enums: &EnumTable) -> Option<(Universe, &'static str)> {
    match ty {
        Type::Int | Type::Real | Type::SInt(_) | Type::UInt(_) => Some((Universe::Num, "num-univ")),
        Type::Bool => Some((Universe::Type, "bool-univ")),
        Type::Named(x) => enums.enums.contains_key(x).then_some((Universe::Type, "enum-univ")),
        Type::Prod(ts) => {
            for t in ts {
                universe_of(t, enums)?;
            }
            Some((Universe::Type, "prod-univ"))
        }
        Type::Pow(..) => None,
    }
}

fn member(ty: &Type, u: Universe, enums: &EnumTable) -> Option<&'static str> {
    let (min, rule) = universe_of(ty, enums)?;
    match (min, u) {
        (Universe::Num, Universe::Num) => Some(rule),
        (Universe::Num, Universe::Type) => Some("univ-gen"),
        (Universe::Type, Universe::Type) => Some(rule),
        (Universe::Type, Universe::Num) => None,
    }
}

fn substitute(t: &IntermediateType, var: &str, by: &Type) -> IntermediateType {
    match t {
        IntermediateType::Var(v) if *v == var => surface(by.clone()),
        IntermediateType::Arrow(a, b) => arrow(substitute(a, var, by), substitute(b, var, by)),
        IntermediateType::Forall(v, u, b) if *v != var => {
            IntermediateType::Forall(v, *u, Box::new(substitute(b, var, by)))
        }
        other => other.clone(),
    }
}

pub fn constant_type(c: &Constant) -> Type {
    match c {
        Constant::Bool(_) => Type::Bool,
        Constant::Int(_) => Type::Int,
        Constant::Real(..) => Type::Real,
        Constant::SInt(n, _) => Type::SInt(*n),
        Constant::UInt(n, _) => Type::UInt(*n),
    }
}

pub fn sint_range(width: u64) -> (BigInt, BigInt) {
    let half = BigInt::one() << (width as usize - 1);
    (-half.clone(), half - 1)
}

pub fn uint_range(width: u64) -> (BigInt, BigInt) {
    (BigInt::zero(), (BigInt::one() << width as usize) - 1)
}

struct Checker<'a> {
    enums: &'a EnumTable,
    consts: &'a ConstTable,
    loc: Loc,
    errors: Vec<TypeError>,
    warnings: Vec<Warning>,
    log: Vec<Instantiation>,
}

type TResult<T> = Result<T, TypeError>;

impl<'a> Checker<'a> {
    fn err<T>(&self, rule: &'static str, message: impl Into<String>) -> TResult<T> {
        Err(TypeError { loc: self.loc, rule, message: message.into() })
    }

    fn show(t: &Type) -> String {
        crate::parser::pretty_type(t)
    }

    fn check_constant(&self, c: &Constant) -> TResult<Type> {
        match c {
            Constant::SInt(n, v) => {
                if *n == 0 {
                    return self.err("sint-const", "sint width must be at least 1");
                }
                let (lo, hi) = sint_range(*n);
                if v < &lo || v > &hi {
                    return self.err("sint-const", format!("{v} is out of range for sint[{n}]"));
                }
            }
            Constant::UInt(n, v) => {
                if *n == 0 {
                    return self.err("uint-const", "uint width must be at least 1");
                }
                let (lo, hi) = uint_range(*n);
                if v < &lo || v > &hi {
                    return self.err("uint-const", format!("{v} is out of range for uint[{n}]"));
                }
            }
            _ => {}
        }
        Ok(constant_type(c))
    }

    fn resolve_type(&self, t: &Type) -> TResult<Type> {
        let t = match desugar_pow_type(t) {
            Ok(t) => t,
            Err(e) => return self.err("type", e.to_string()),
        };
        self.validate_type(&t)?;
        Ok(t)
    }

    fn validate_type(&self, t: &Type) -> TResult<()> {
        match t {
            Type::SInt(0) | Type::UInt(0) => self.err("type", "bit width must be at least 1"),
            Type::Named(x) if !self.enums.enums.contains_key(x) => self.err("type", format!("unknown type '{x}'")),
            Type::Prod(ts) => ts.iter().try_for_each(|t| self.validate_type(t)),
            _ => Ok(()),
        }
    }

    /// Applies a scheme to argument types, instantiating at most one
    /// quantifier from the first argument position that mentions it.
    fn apply(&mut self, rule: &'static str, scheme: IntermediateType, args: &[Type]) -> TResult<Type> {
        let mut cur = scheme;
        if let IntermediateType::Forall(var, univ, body) = cur {
            let mut probe = body.as_ref();
            let mut chosen = None;
            for a in args {
                match probe {
                    IntermediateType::Arrow(p, rest) => {
                        if **p == IntermediateType::Var(var) {
                            chosen = Some(a.clone());
                            break;
                        }
                        probe = rest;
                    }
                    _ => break,
                }
            }
            let Some(inst) = chosen else {
                return self.err(rule, "cannot instantiate operator type");
            };
            let Some(judgement) = member(&inst, univ, self.enums) else {
                return self.err(rule, format!("type {} is not in universe {univ}", Self::show(&inst)));
            };
            self.log.push(Instantiation { rule, ty: inst.clone(), universe: univ, judgement });
            cur = substitute(&body, var, &inst);
        }
        for (i, a) in args.iter().enumerate() {
            match cur {
                IntermediateType::Arrow(p, rest) => {
                    if *p != surface(a.clone()) {
                        return self.err(rule, format!("argument {} has type {}, expected {p}", i + 1, Self::show(a)));
                    }
                    cur = *rest;
                }
                _ => return self.err(rule, "too many arguments"),
            }
        }
        match cur {
            IntermediateType::Surface(t) => Ok(t),
            other => self.err(rule, format!("partial application of type {other}")),
        }
    }

    fn infer(&mut self, e: &Expr, scope: &Scope) -> TResult<Type> {
        match e {
            Expr::Atom(Atom::Const(c)) => match c {
                Constant::SInt(..) | Constant::UInt(..) => self.check_constant(c),
                Constant::Bool(_) => Ok(Type::Bool),
                Constant::Int(_) => Ok(Type::Int),
                Constant::Real(..) => Ok(Type::Real),
            },
            Expr::Atom(Atom::Var(x)) => {
                if let Some(v) = scope.vars.get(x) {
                    Ok(v.ty.clone())
                } else if let Some((t, _)) = self.consts.consts.get(x) {
                    Ok(t.clone())
                } else if let Some(owner) = self.enums.ctor_owner.get(x) {
                    Ok(Type::Named(owner.clone()))
                } else if scope.nodes.contains_key(x) {
                    self.err("variable", format!("node '{x}' used as a value"))
                } else {
                    self.err("variable", format!("unknown identifier '{x}'"))
                }
            }
            Expr::Unary(UnOp::Not, a) => {
                let t = self.infer(a, scope)?;
                let (rule, scheme) = not_scheme();
                self.apply(rule, scheme, &[t])
            }
            Expr::Binary(op, l, r) => {
                let lt = self.infer(l, scope)?;
                let rt = self.infer(r, scope)?;
                let (rule, scheme) = binop_scheme(*op);
                self.apply(rule, scheme, &[lt, rt])
            }
            Expr::Ternary(TernOp::Ite, c, t, f) => {
                let ct = self.infer(c, scope)?;
                let tt = self.infer(t, scope)?;
                let ft = self.infer(f, scope)?;
                let (rule, scheme) = ite_scheme();
                self.apply(rule, scheme, &[ct, tt, ft])
            }
            Expr::Prod(es) => {
                if es.is_empty() {
                    return self.err("#-intro", "empty product");
                }
                let ts = es.iter().map(|e| self.infer(e, scope)).collect::<TResult<_>>()?;
                Ok(Type::Prod(ts))
            }
            Expr::Project(x, i) => {
                let Some(v) = scope.vars.get(x) else {
                    return self.err("#-elim", format!("'{x}' is not a variable in scope"));
                };
                match &v.ty {
                    Type::Prod(ts) => match ts.get(*i as usize) {
                        Some(t) => Ok(t.clone()),
                        None => self.err("#-elim", format!("index {i} out of range for product of arity {}", ts.len())),
                    },
                    t => self.err("#-elim", format!("'{x}' has non-product type {}", Self::show(t))),
                }
            }
            Expr::Match(scrutinee, pats) => {
                let st = self.infer(scrutinee, scope)?;
                let Type::Named(enum_name) = &st else {
                    return self.err("enum-elim", format!("match on non-enum type {}", Self::show(&st)));
                };
                let ctors = &self.enums.enums[enum_name];
                let mut body_ty: Option<Type> = None;
                let mut covered = vec![false; ctors.len()];
                let mut wildcard = false;
                for p in pats {
                    match &p.head {
                        PatHead::Ctor(c) => match ctors.iter().position(|k| k == c) {
                            Some(i) => covered[i] = true,
                            None => return self.err("enum-elim", format!("'{c}' is not a constructor of {enum_name}")),
                        },
                        PatHead::Wildcard => wildcard = true,
                    }
                    let bt = self.infer(&p.body, scope)?;
                    match &body_ty {
                        None => body_ty = Some(bt),
                        Some(prev) if *prev != bt => {
                            return self.err(
                                "enum-elim",
                                format!("match arms have types {} and {}", Self::show(prev), Self::show(&bt)),
                            )
                        }
                        _ => {}
                    }
                }
                if !wildcard && covered.iter().any(|c| !c) {
                    self.warnings
                        .push(Warning { loc: self.loc, message: format!("non-exhaustive match on {enum_name}") });
                }
                Ok(body_ty.expect("match has at least one arm"))
            }
        }
    }

    fn record<T>(&mut self, r: TResult<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(e);
                None
            }
        }
    }

    fn expect_type(&mut self, rule: &'static str, e: &Expr, scope: &Scope, want: &Type, what: &str) {
        let inferred = self.infer(e, scope);
        if let Some(t) = self.record(inferred) {
            if &t != want {
                let r =
                    self.err::<()>(rule, format!("{what} has type {}, expected {}", Self::show(&t), Self::show(want)));
                self.record(r);
            }
        }
    }

    fn check_flow(&mut self, flow: &Flow, scope: &Scope) {
        for d in &flow.definitions {
            self.loc = d.loc;
            let target = match scope.vars.get(&d.target) {
                Some(v) if matches!(v.kind, VarKind::Local | VarKind::Output) => v.ty.clone(),
                Some(_) => {
                    let r = self.err::<()>("definition", format!("'{}' is not a local or output variable", d.target));
                    self.record(r);
                    continue;
                }
                None => {
                    let r = self.err::<()>("definition", format!("unknown variable '{}'", d.target));
                    self.record(r);
                    continue;
                }
            };
            match &d.rhs {
                Rhs::Expr(e) => self.expect_type("definition", e, scope, &target, "right-hand side"),
                Rhs::Use { node, args } => {
                    let r = self.check_use(node, args, scope, &target);
                    self.record(r);
                }
            }
        }
        for t in &flow.transitions {
            self.loc = t.loc;
            match scope.vars.get(&t.target) {
                Some(v) if v.kind == VarKind::State => {
                    let ty = v.ty.clone();
                    self.expect_type("transition", &t.rhs, scope, &ty, "right-hand side");
                }
                _ => {
                    let r = self.err::<()>("transition", format!("'{}' is not a state variable", t.target));
                    self.record(r);
                }
            }
        }
    }

    fn check_use(&mut self, node: &Ident, args: &[Expr], scope: &Scope, target: &Type) -> TResult<()> {
        let Some(n) = scope.nodes.get(node) else {
            return self.err("use", format!("unknown node '{node}'"));
        };
        let sig = n.sig.clone();
        if sig.params.len() != args.len() {
            return self
                .err("use", format!("node '{node}' expects {} arguments, got {}", sig.params.len(), args.len()));
        }
        for (i, (a, p)) in args.iter().zip(&sig.params).enumerate() {
            let t = self.infer(a, scope)?;
            if &t != p {
                return self.err(
                    "use",
                    format!("argument {} of '{node}' has type {}, expected {}", i + 1, Self::show(&t), Self::show(p)),
                );
            }
        }
        let result = sig.result_type();
        if &result != target {
            return self.err(
                "use",
                format!("node '{node}' returns {}, target has type {}", Self::show(&result), Self::show(target)),
            );
        }
        Ok(())
    }

    fn check_automaton(&mut self, a: &Automaton, scope: &Scope) {
        self.loc = a.loc;
        let mut names: Vec<&Ident> = vec![];
        for l in &a.locations {
            if names.contains(&&l.name) {
                let r = self.err::<()>("automaton", format!("duplicate location '{}'", l.name));
                self.record(r);
            }
            names.push(&l.name);
        }
        if !names.contains(&&a.initial) {
            let r = self.err::<()>("automaton", format!("initial location '{}' is not declared", a.initial));
            self.record(r);
        }
        for l in &a.locations {
            self.check_flow(&l.flow, scope);
        }
        for e in &a.edges {
            self.loc = e.loc;
            for end in [&e.from, &e.to] {
                if !names.contains(&end) {
                    let r = self.err::<()>("automaton", format!("edge endpoint '{end}' is not a location"));
                    self.record(r);
                }
            }
            self.expect_type("edge", &e.cond, scope, &Type::Bool, "edge condition");
        }
        for d in &a.defaults {
            self.loc = d.loc;
            match scope.vars.get(&d.target) {
                Some(v) if v.kind != VarKind::Input => {
                    let ty = v.ty.clone();
                    self.expect_type("default", &d.rhs, scope, &ty, "default value");
                }
                _ => {
                    let r =
                        self.err::<()>("default", format!("'{}' is not a local, output or state variable", d.target));
                    self.record(r);
                }
            }
        }
    }

    fn check_initial(&mut self, inits: &[StateInit], scope: &Scope) {
        for i in inits {
            self.loc = i.loc;
            let Some(v) = scope.vars.get(&i.target).filter(|v| v.kind == VarKind::State) else {
                let r = self.err::<()>("initial", format!("'{}' is not a state variable", i.target));
                self.record(r);
                continue;
            };
            let ty = v.ty.clone();
            let mut offending = None;
            i.value.for_each_ident(&mut |x| {
                if scope.vars.contains_key(x) && offending.is_none() {
                    offending = Some(x.clone());
                }
            });
            if let Some(x) = offending {
                let r = self.err::<()>("initial", format!("initial value of '{}' refers to variable '{x}'", i.target));
                self.record(r);
                continue;
            }
            self.expect_type("initial", &i.value, scope, &ty, "initial value");
        }
    }

    fn declare(&mut self, scope: &mut Scope, v: &TypedVar, kind: VarKind) {
        self.loc = v.loc;
        if scope.vars.contains_key(&v.name) || scope.nodes.contains_key(&v.name) {
            let r = self.err::<()>("declarations", format!("'{}' is declared twice", v.name));
            self.record(r);
            return;
        }
        if self.consts.consts.contains_key(&v.name) || self.enums.ctor_owner.contains_key(&v.name) {
            let r = self.err::<()>("declarations", format!("'{}' shadows a global constant or constructor", v.name));
            self.record(r);
            return;
        }
        if let Some(ty) = self.record(self.resolve_type(&v.ty)) {
            scope.vars.insert(v.name.clone(), VarInfo { ty, kind });
        }
    }

    fn declare_nodes(&mut self, scope: &mut Scope, nodes: &[Node]) {
        for n in nodes {
            self.loc = n.loc;
            if scope.nodes.contains_key(&n.name) {
                let r = self.err::<()>("nodes", format!("node '{}' is declared twice", n.name));
                self.record(r);
                continue;
            }
            if let Some(ns) = self.check_node(n) {
                scope.nodes.insert(n.name.clone(), ns);
            }
        }
    }

    fn check_node(&mut self, n: &Node) -> Option<NodeScope> {
        let before = self.errors.len();
        let mut scope = Scope::default();
        self.declare_nodes(&mut scope, &n.decls.nodes);
        for p in &n.params {
            self.declare(&mut scope, p, VarKind::Input);
        }
        for r in &n.returns {
            self.declare(&mut scope, r, VarKind::Output);
        }
        for l in &n.decls.locals {
            self.declare(&mut scope, l, VarKind::Local);
        }
        for s in &n.decls.states {
            self.declare(&mut scope, s, VarKind::State);
        }
        if self.errors.len() > before {
            return None;
        }
        self.check_flow(&n.flow, &scope);
        for a in &n.automata {
            self.check_automaton(a, &scope);
        }
        self.check_initial(&n.initial, &scope);
        if let Some(a) = &n.assertion {
            self.loc = n.loc;
            self.expect_type("assertion", a, &scope, &Type::Bool, "assertion");
        }
        let ty_of = |vs: &[TypedVar]| -> Vec<Type> { vs.iter().map(|v| scope.vars[&v.name].ty.clone()).collect() };
        let sig = NodeSig { params: ty_of(&n.params), returns: ty_of(&n.returns) };
        Some(NodeScope { sig, scope })
    }
}

/// Builds the enum table from the type definitions.
pub fn build_enum_table(typedefs: &[EnumDef]) -> Result<EnumTable, TypeError> {
    let mut t = EnumTable::default();
    for d in typedefs {
        let err = |message: String| TypeError { loc: d.loc, rule: "typedef", message };
        if t.enums.contains_key(&d.name) {
            return Err(err(format!("enum '{}' is defined twice", d.name)));
        }
        for c in &d.ctors {
            if t.ctor_owner.contains_key(c) {
                return Err(err(format!("constructor '{c}' is defined twice")));
            }
            t.ctor_owner.insert(c.clone(), d.name.clone());
        }
        t.enums.insert(d.name.clone(), d.ctors.clone());
    }
    Ok(t)
}

/// Builds the constant table from the constant definitions.
pub fn build_const_table(defs: &[ConstantDef], enums: &EnumTable) -> Result<ConstTable, TypeError> {
    let mut t = ConstTable::default();
    for d in defs {
        let err = |message: String| TypeError { loc: d.loc, rule: "constants", message };
        if t.consts.contains_key(&d.name) {
            return Err(err(format!("constant '{}' is defined twice", d.name)));
        }
        if enums.ctor_owner.contains_key(&d.name) {
            return Err(err(format!("constant '{}' clashes with a constructor", d.name)));
        }
        let checker = Checker { enums, consts: &t, loc: d.loc, errors: vec![], warnings: vec![], log: vec![] };
        let ty = checker.check_constant(&d.value)?;
        t.consts.insert(d.name.clone(), (ty, d.value.clone()));
    }
    Ok(t)
}

/// Checks a whole program, returning all errors found.
pub fn check_program(prog: &Program) -> Result<Env, Vec<TypeError>> {
    let enums = build_enum_table(&prog.typedefs).map_err(|e| vec![e])?;
    let consts = build_const_table(&prog.constants, &enums).map_err(|e| vec![e])?;
    let (top, warnings, instantiations, errors) = {
        let mut c = Checker {
            enums: &enums,
            consts: &consts,
            loc: Loc::default(),
            errors: vec![],
            warnings: vec![],
            log: vec![],
        };
        let mut scope = Scope::default();
        c.declare_nodes(&mut scope, &prog.decls.nodes);
        for v in &prog.inputs {
            c.declare(&mut scope, v, VarKind::Input);
        }
        for v in &prog.decls.locals {
            c.declare(&mut scope, v, VarKind::Local);
        }
        for v in &prog.decls.states {
            c.declare(&mut scope, v, VarKind::State);
        }
        if c.errors.is_empty() {
            c.check_flow(&prog.flow, &scope);
            c.check_initial(&prog.initial, &scope);
            c.loc = prog.assertion_loc;
            if let Some(a) = &prog.assertion {
                c.expect_type("assertion", a, &scope, &Type::Bool, "assertion");
            }
            c.loc = prog.invariant_loc;
            if let Some(i) = &prog.invariant {
                c.expect_type("invariant", i, &scope, &Type::Bool, "invariant");
            }
        }
        (scope, c.warnings, c.log, c.errors)
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Env { enums, consts, top, warnings, instantiations })
}

/// Infers the type of an expression in a checked environment.
pub fn infer_expr(e: &Expr, enums: &EnumTable, consts: &ConstTable, scope: &Scope) -> Result<Type, TypeError> {
    let mut c = Checker { enums, consts, loc: Loc::default(), errors: vec![], warnings: vec![], log: vec![] };
    c.infer(e, scope)
}

impl Env {
    /// Type of an expression in the top-level scope.
    pub fn infer_top(&self, e: &Expr) -> Result<Type, TypeError> {
        infer_expr(e, &self.enums, &self.consts, &self.top)
    }
}
