//! Translation of a checked program into a transition system over streams.
//!
//! Every variable leaf becomes a stream, an uninterpreted function from time
//! indices to values. The system consists of an initial predicate over index
//! 0 and step, assertion and property predicates over a symbolic index `n`
//! (the step predicate also mentions `n + 1`).

use std::collections::HashMap;

use thiserror::Error;

use crate::ast::*;
use crate::frontend::CheckedProgram;
use crate::interp::{automaton_id, qualify};
use crate::parser::pretty::pretty_type;
use crate::smt::term::{IteKind, Op, Term};
use crate::typecheck::{Env, Scope, VarKind};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NatEncoding {
    /// Peano datatype with `zero` and `succ`.
    #[default]
    Datatype,
    /// Mathematical integers; symbolic indices are constrained to be `>= 0`.
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EnumEncoding {
    Datatype,
    /// Fixed-width bitvectors, with range constraints when the number of
    /// constructors is not a power of two.
    #[default]
    Bitvector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct EncodingConfig {
    pub nat: NatEncoding,
    pub enums: EnumEncoding,
}

impl EncodingConfig {
    pub const ALL: [EncodingConfig; 4] = [
        EncodingConfig { nat: NatEncoding::Datatype, enums: EnumEncoding::Datatype },
        EncodingConfig { nat: NatEncoding::Datatype, enums: EnumEncoding::Bitvector },
        EncodingConfig { nat: NatEncoding::Integer, enums: EnumEncoding::Datatype },
        EncodingConfig { nat: NatEncoding::Integer, enums: EnumEncoding::Bitvector },
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("variable '{var}' has type {ty}, which the SMT encoding does not support")]
    UnsupportedType { var: String, ty: String },
    #[error("constant {0} has a machine integer type, which the SMT encoding does not support")]
    UnsupportedConstant(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortOrigin {
    Enum(Ident),
    /// Locations of the automaton with this id.
    Locations(String),
}

/// A finite sort: a LAMA enumeration or the locations of an automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumSort {
    pub origin: SortOrigin,
    pub smt_name: String,
    pub ctors: Vec<Ident>,
}

impl EnumSort {
    pub fn ctor_smt_name(&self, index: usize) -> String {
        format!("{}${}", self.smt_name, self.ctors[index])
    }

    pub fn width(&self) -> u32 {
        let n = self.ctors.len().max(2);
        usize::BITS - (n - 1).leading_zeros()
    }

    fn needs_range(&self) -> bool {
        self.ctors.len() < (1usize << self.width())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueSort {
    Bool,
    Int,
    Real,
    Enum(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamDecl {
    pub name: String,
    pub sort: ValueSort,
}

/// A program variable and the streams of its leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedVar {
    pub name: String,
    pub kind: VarKind,
    pub ty: Type,
    pub streams: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedAutomaton {
    pub id: String,
    pub sort: usize,
    /// Location active in a step.
    pub active: usize,
    /// Location selected at the end of the previous step.
    pub selected: usize,
}

/// A time index: `base + offset`, where the base is either 0 or a symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Time {
    pub base: Option<String>,
    pub offset: u32,
}

impl Time {
    pub fn at(k: u32) -> Time {
        Time { base: None, offset: k }
    }

    pub fn symbolic(var: &str, offset: u32) -> Time {
        Time { base: Some(var.to_string()), offset }
    }

    pub fn shifted(&self, by: u32) -> Time {
        Time { base: self.base.clone(), offset: self.offset + by }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    Init,
    Step,
    Assertion,
    Property,
}

impl Predicate {
    fn prefix(self) -> &'static str {
        match self {
            Predicate::Init => "I",
            Predicate::Step => "T",
            Predicate::Assertion => "A",
            Predicate::Property => "P",
        }
    }
}

/// The encoded transition system.
#[derive(Clone, Debug)]
pub struct EncodedSystem {
    pub config: EncodingConfig,
    pub sorts: Vec<EnumSort>,
    pub enum_sorts: HashMap<Ident, usize>,
    pub streams: Vec<StreamDecl>,
    pub vars: Vec<EncodedVar>,
    pub automata: Vec<EncodedAutomaton>,
    pub init: Vec<Term>,
    pub step: Vec<Term>,
    pub assertion: Vec<Term>,
    pub property: Term,
    pub warnings: Vec<String>,
}

/// Quotes a symbol when it is not a simple SMT-LIB symbol.
pub fn symbol(s: &str) -> String {
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

fn leaf_suffixes(ty: &Type) -> Vec<String> {
    match ty {
        Type::Prod(ts) => ts
            .iter()
            .enumerate()
            .flat_map(|(i, t)| leaf_suffixes(t).into_iter().map(move |s| format!(".{i}{s}")))
            .collect(),
        _ => vec![String::new()],
    }
}

/// Offset of the first leaf of component `index` in a product type.
fn leaf_offset(ty: &Type, index: usize) -> (usize, usize) {
    match ty {
        Type::Prod(ts) => {
            let start = ts[..index].iter().map(Type::leaf_count).sum();
            (start, ts[index].leaf_count())
        }
        _ => (0, 1),
    }
}

#[derive(Clone, Copy)]
struct Block<'a> {
    nodes: &'a [Node],
    flow: &'a Flow,
    automata: &'a [Automaton],
    initial: &'a [StateInit],
    assertion: Option<&'a Expr>,
}

impl<'a> Block<'a> {
    fn of_node(n: &'a Node) -> Self {
        Block {
            nodes: &n.decls.nodes,
            flow: &n.flow,
            automata: &n.automata,
            initial: &n.initial,
            assertion: n.assertion.as_ref(),
        }
    }

    /// Where a subnode is used: globally, or in location `(automaton, location)`.
    fn use_site(&self, node: &Ident) -> Option<Option<(usize, usize)>> {
        let uses = |f: &Flow| f.definitions.iter().any(|d| matches!(&d.rhs, Rhs::Use { node: n, .. } if n == node));
        if uses(self.flow) {
            return Some(None);
        }
        for (ai, a) in self.automata.iter().enumerate() {
            for (li, l) in a.locations.iter().enumerate() {
                if uses(&l.flow) {
                    return Some(Some((ai, li)));
                }
            }
        }
        None
    }
}

#[derive(Default)]
struct BlockMap {
    vars: HashMap<Ident, (Type, Vec<usize>)>,
    nodes: HashMap<Ident, Interface>,
}

struct Interface {
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
}

struct Encoder<'a> {
    env: &'a Env,
    sys: EncodedSystem,
}

fn streams_at(leaves: &[usize], shift: u32) -> Vec<Term> {
    leaves.iter().map(|&s| Term::stream(s, shift)).collect()
}

fn binop(op: BinOp) -> Op {
    match op {
        BinOp::Or => Op::Or,
        BinOp::And => Op::And,
        BinOp::Xor => Op::Xor,
        BinOp::Implies => Op::Implies,
        BinOp::Eq => Op::Eq,
        BinOp::Lt => Op::Lt,
        BinOp::Gt => Op::Gt,
        BinOp::Le => Op::Le,
        BinOp::Ge => Op::Ge,
        BinOp::Plus => Op::Add,
        BinOp::Minus => Op::Sub,
        BinOp::Mul => Op::Mul,
        BinOp::RealDiv => Op::RealDiv,
        BinOp::IntDiv => Op::IntDiv,
        BinOp::Mod => Op::Mod,
    }
}

fn leaf_eq(lhs: Vec<Term>, rhs: Vec<Term>) -> Vec<Term> {
    lhs.into_iter().zip(rhs).map(|(l, r)| Term::eq(l, r)).collect()
}

impl<'a> Encoder<'a> {
    fn add_sort(&mut self, origin: SortOrigin, smt_name: String, ctors: Vec<Ident>) -> usize {
        self.sys.sorts.push(EnumSort { origin, smt_name, ctors });
        self.sys.sorts.len() - 1
    }

    fn add_stream(&mut self, name: String, sort: ValueSort) -> usize {
        self.sys.streams.push(StreamDecl { name, sort });
        self.sys.streams.len() - 1
    }

    fn leaf_sorts(&self, ty: &Type) -> Option<Vec<ValueSort>> {
        match ty {
            Type::Bool => Some(vec![ValueSort::Bool]),
            Type::Int => Some(vec![ValueSort::Int]),
            Type::Real => Some(vec![ValueSort::Real]),
            Type::Named(e) => self.sys.enum_sorts.get(e).map(|&s| vec![ValueSort::Enum(s)]),
            Type::Prod(ts) => {
                let mut out = vec![];
                for t in ts {
                    out.extend(self.leaf_sorts(t)?);
                }
                Some(out)
            }
            Type::SInt(_) | Type::UInt(_) | Type::Pow(..) => None,
        }
    }

    fn constant(&self, c: &Constant) -> Result<Term, EncodeError> {
        match c {
            Constant::Bool(b) => Ok(Term::Bool(*b)),
            Constant::Int(n) => Ok(Term::Int(n.clone())),
            Constant::Real(n, d) => Ok(Term::Real(num_rational::BigRational::new(n.clone(), d.clone()))),
            Constant::SInt(..) | Constant::UInt(..) => {
                Err(EncodeError::UnsupportedConstant(crate::parser::pretty::pretty_constant(c)))
            }
        }
    }

    fn ctor(&self, c: &Ident) -> Option<Term> {
        let owner = self.env.enums.ctor_owner.get(c)?;
        let index = self.env.enums.ctor_index(c.as_str())?;
        Some(Term::EnumConst { sort: self.sys.enum_sorts[owner], index })
    }

    fn scalar(&self, map: &BlockMap, e: &Expr) -> Result<Term, EncodeError> {
        let mut ts = self.expr(map, e)?;
        debug_assert_eq!(ts.len(), 1, "scalar expression expected");
        Ok(ts.swap_remove(0))
    }

    /// Encodes an expression at shift 0, one term per leaf.
    fn expr(&self, map: &BlockMap, e: &Expr) -> Result<Vec<Term>, EncodeError> {
        Ok(match e {
            Expr::Atom(Atom::Const(c)) => vec![self.constant(c)?],
            Expr::Atom(Atom::Var(x)) => {
                if let Some((_, leaves)) = map.vars.get(x) {
                    streams_at(leaves, 0)
                } else if let Some((_, c)) = self.env.consts.consts.get(x) {
                    vec![self.constant(c)?]
                } else {
                    vec![self.ctor(x).expect("identifier resolved by the type checker")]
                }
            }
            Expr::Unary(UnOp::Not, a) => vec![Term::negation(self.scalar(map, a)?)],
            Expr::Binary(BinOp::Eq, l, r) => {
                let (l, r) = (self.expr(map, l)?, self.expr(map, r)?);
                vec![Term::and(leaf_eq(l, r))]
            }
            Expr::Binary(op, l, r) => vec![Term::App(binop(*op), vec![self.scalar(map, l)?, self.scalar(map, r)?])],
            Expr::Ternary(TernOp::Ite, c, t, f) => {
                let c = self.scalar(map, c)?;
                let (t, f) = (self.expr(map, t)?, self.expr(map, f)?);
                t.into_iter().zip(f).map(|(t, f)| Term::ite(IteKind::Strict, c.clone(), t, f)).collect()
            }
            Expr::Prod(es) => {
                let mut out = vec![];
                for e in es {
                    out.extend(self.expr(map, e)?);
                }
                out
            }
            Expr::Project(x, i) => {
                let (ty, leaves) = &map.vars[x];
                let (start, len) = leaf_offset(ty, *i as usize);
                streams_at(&leaves[start..start + len], 0)
            }
            Expr::Match(scrutinee, pats) => {
                let s = self.scalar(map, scrutinee)?;
                let last = pats.iter().position(|p| p.head == PatHead::Wildcard).unwrap_or(pats.len() - 1);
                let mut acc = self.expr(map, &pats[last].body)?;
                for p in pats[..last].iter().rev() {
                    let PatHead::Ctor(c) = &p.head else { unreachable!("wildcards end the chain") };
                    let hit = Term::eq(s.clone(), self.ctor(c).expect("constructor resolved by the type checker"));
                    let body = self.expr(map, &p.body)?;
                    acc =
                        body.into_iter().zip(acc).map(|(b, a)| Term::ite(IteKind::Strict, hit.clone(), b, a)).collect();
                }
                acc
            }
        })
    }

    /// Encodes a right-hand side; node inputs are bound under `guard`.
    fn rhs(&mut self, map: &BlockMap, rhs: &Rhs, guard: &Term) -> Result<Vec<Term>, EncodeError> {
        match rhs {
            Rhs::Expr(e) => self.expr(map, e),
            Rhs::Use { node, args } => {
                let iface = &map.nodes[node];
                for (arg, input) in args.iter().zip(&iface.inputs) {
                    let arg = self.expr(map, arg)?;
                    for eq in leaf_eq(streams_at(input, 0), arg) {
                        self.gated(guard, eq);
                    }
                }
                Ok(iface.outputs.iter().flat_map(|o| streams_at(o, 0)).collect())
            }
        }
    }

    fn gated(&mut self, guard: &Term, body: Term) {
        if *guard != Term::Bool(false) {
            self.sys.step.push(Term::implies(guard.clone(), body));
        }
    }

    fn framed(&mut self, guard: &Term, frame: Term) {
        if *guard != Term::Bool(true) {
            self.sys.step.push(Term::implies(Term::negation(guard.clone()), frame));
        }
    }

    fn block(&mut self, path: &str, block: Block<'_>, scope: &Scope, guard: Term) -> Result<BlockMap, EncodeError> {
        let mut map = BlockMap::default();
        for (x, info) in &scope.vars {
            let name = qualify(path, x.as_str());
            let sorts = self
                .leaf_sorts(&info.ty)
                .ok_or_else(|| EncodeError::UnsupportedType { var: name.clone(), ty: pretty_type(&info.ty) })?;
            let leaves = leaf_suffixes(&info.ty)
                .into_iter()
                .zip(sorts)
                .map(|(suffix, sort)| self.add_stream(format!("{name}{suffix}"), sort))
                .collect::<Vec<_>>();
            self.sys.vars.push(EncodedVar { name, kind: info.kind, ty: info.ty.clone(), streams: leaves.clone() });
            map.vars.insert(x.clone(), (info.ty.clone(), leaves));
        }

        let mut autos = vec![];
        for (ai, a) in block.automata.iter().enumerate() {
            let id = automaton_id(path, ai);
            let ctors = a.locations.iter().map(|l| l.name.clone()).collect();
            let sort = self.add_sort(SortOrigin::Locations(id.clone()), format!("loc${id}"), ctors);
            let active = self.add_stream(format!("{id}%s"), ValueSort::Enum(sort));
            let selected = self.add_stream(format!("{id}%s1"), ValueSort::Enum(sort));
            autos.push(EncodedAutomaton { id, sort, active, selected });
        }
        self.sys.automata.extend(autos.iter().cloned());
        let in_location = |ai: usize, li: usize| {
            Term::eq(Term::stream(autos[ai].active, 0), Term::EnumConst { sort: autos[ai].sort, index: li })
        };

        for n in block.nodes {
            let node_guard = match block.use_site(&n.name) {
                Some(None) => guard.clone(),
                Some(Some((ai, li))) => Term::and(vec![guard.clone(), in_location(ai, li)]),
                None => Term::Bool(false),
            };
            let inner = self.block(
                &qualify(path, n.name.as_str()),
                Block::of_node(n),
                &scope.nodes[&n.name].scope,
                node_guard,
            )?;
            let leaves = |vs: &[TypedVar]| vs.iter().map(|v| inner.vars[&v.name].1.clone()).collect();
            let iface = Interface { inputs: leaves(&n.params), outputs: leaves(&n.returns) };
            map.nodes.insert(n.name.clone(), iface);
        }

        for d in &block.flow.definitions {
            let rhs = self.rhs(&map, &d.rhs, &guard)?;
            for eq in leaf_eq(streams_at(&map.vars[&d.target].1, 0), rhs) {
                self.gated(&guard, eq);
            }
        }
        for t in &block.flow.transitions {
            let rhs = self.expr(&map, &t.rhs)?;
            let leaves = map.vars[&t.target].1.clone();
            for eq in leaf_eq(streams_at(&leaves, 1), rhs) {
                self.gated(&guard, eq);
            }
            self.framed(&guard, Term::and(leaf_eq(streams_at(&leaves, 1), streams_at(&leaves, 0))));
        }

        for (ai, a) in block.automata.iter().enumerate() {
            self.automaton(&map, a, &autos[ai], &guard)?;
        }

        for init in block.initial {
            let value = self.expr(&map, &init.value)?;
            self.sys.init.extend(leaf_eq(streams_at(&map.vars[&init.target].1, 0), value));
        }
        if let Some(a) = block.assertion {
            let a = self.scalar(&map, a)?;
            if guard != Term::Bool(false) {
                self.sys.assertion.push(Term::implies(guard.clone(), a));
            }
        }
        Ok(map)
    }

    fn automaton(
        &mut self,
        map: &BlockMap,
        a: &Automaton,
        enc: &EncodedAutomaton,
        guard: &Term,
    ) -> Result<(), EncodeError> {
        let loc_index = |name: &Ident| a.locations.iter().position(|l| &l.name == name).expect("location checked");
        let loc = |name: &Ident| Term::EnumConst { sort: enc.sort, index: loc_index(name) };
        let (active, selected) = (Term::stream(enc.active, 0), Term::stream(enc.selected, 0));

        // Active location: first enabled edge out of the selected location.
        let mut chain = selected.clone();
        for l in a.locations.iter().rev() {
            let edges: Vec<&Edge> = a.edges.iter().filter(|e| e.from == l.name).collect();
            if edges.is_empty() {
                continue;
            }
            let mut inner = loc(&l.name);
            for e in edges.iter().rev() {
                let cond = self.scalar(map, &e.cond)?;
                inner = Term::ite(IteKind::Lazy, cond, loc(&e.to), inner);
            }
            chain = Term::ite(IteKind::Lazy, Term::eq(selected.clone(), loc(&l.name)), inner, chain);
        }
        self.sys.step.push(Term::eq(active.clone(), chain));
        self.sys.init.push(Term::eq(selected.clone(), loc(&a.initial)));
        self.gated(guard, Term::eq(Term::stream(enc.selected, 1), active.clone()));
        self.framed(guard, Term::eq(Term::stream(enc.selected, 1), selected));

        let in_loc = |li: usize| Term::eq(active.clone(), Term::EnumConst { sort: enc.sort, index: li });
        let mut defined: Vec<&Ident> = vec![];
        let mut advanced: Vec<&Ident> = vec![];
        for l in &a.locations {
            for d in &l.flow.definitions {
                if !defined.contains(&&d.target) {
                    defined.push(&d.target);
                }
            }
            for t in &l.flow.transitions {
                if !advanced.contains(&&t.target) {
                    advanced.push(&t.target);
                }
            }
        }

        for x in defined {
            let mut bodies = vec![];
            for (li, l) in a.locations.iter().enumerate() {
                if let Some(d) = l.flow.definitions.iter().find(|d| &d.target == x) {
                    let body_guard = Term::and(vec![guard.clone(), in_loc(li)]);
                    bodies.push((li, self.rhs(map, &d.rhs, &body_guard)?));
                }
            }
            let default = match a.defaults.iter().find(|d| &d.target == x) {
                Some(d) => Some(self.expr(map, &d.rhs)?),
                None => None,
            };
            let rhs = select(bodies, default, &in_loc);
            for eq in leaf_eq(streams_at(&map.vars[x].1, 0), rhs) {
                self.gated(guard, eq);
            }
        }

        for x in advanced {
            let mut bodies = vec![];
            for (li, l) in a.locations.iter().enumerate() {
                if let Some(t) = l.flow.transitions.iter().find(|t| &t.target == x) {
                    bodies.push((li, self.expr(map, &t.rhs)?));
                }
            }
            let default = match a.defaults.iter().find(|d| &d.target == x) {
                Some(d) => Some(self.expr(map, &d.rhs)?),
                None => None,
            };
            let rhs = select(bodies, default, &in_loc);
            let leaves = &map.vars[x].1;
            for eq in leaf_eq(streams_at(leaves, 1), rhs) {
                self.gated(guard, eq);
            }
            self.framed(guard, Term::and(leaf_eq(streams_at(leaves, 1), streams_at(leaves, 0))));
        }
        Ok(())
    }
}

/// Selects a body by active location; the default (or else the last body)
/// closes the chain.
fn select(
    mut bodies: Vec<(usize, Vec<Term>)>,
    default: Option<Vec<Term>>,
    in_loc: &impl Fn(usize) -> Term,
) -> Vec<Term> {
    let mut acc = match default {
        Some(d) => d,
        None => bodies.pop().expect("at least one defining location").1,
    };
    for (li, body) in bodies.into_iter().rev() {
        acc = body.into_iter().zip(acc).map(|(b, a)| Term::ite(IteKind::Lazy, in_loc(li), b, a)).collect();
    }
    acc
}

/// Encodes a checked program. `property` replaces the program's invariant
/// when given; it must be a boolean expression over top-level names.
pub fn encode_program(
    checked: &CheckedProgram,
    config: EncodingConfig,
    property: Option<&Expr>,
) -> Result<EncodedSystem, EncodeError> {
    let env = &checked.env;
    let mut enc = Encoder {
        env,
        sys: EncodedSystem {
            config,
            sorts: vec![],
            enum_sorts: HashMap::new(),
            streams: vec![],
            vars: vec![],
            automata: vec![],
            init: vec![],
            step: vec![],
            assertion: vec![],
            property: Term::Bool(true),
            warnings: vec![],
        },
    };
    for (name, ctors) in &env.enums.enums {
        let s = enc.add_sort(SortOrigin::Enum(name.clone()), format!("enum${name}"), ctors.clone());
        enc.sys.enum_sorts.insert(name.clone(), s);
    }
    let p = &checked.program;
    let top = Block {
        nodes: &p.decls.nodes,
        flow: &p.flow,
        automata: &[],
        initial: &p.initial,
        assertion: p.assertion.as_ref(),
    };
    let map = enc.block("", top, &env.top, Term::Bool(true))?;
    match property.or(p.invariant.as_ref()) {
        Some(inv) => enc.sys.property = enc.scalar(&map, inv)?,
        None => enc.sys.warnings.push("program has no invariant; using true".into()),
    }
    if config.enums == EnumEncoding::Bitvector {
        for (i, s) in enc.sys.streams.iter().enumerate() {
            if let ValueSort::Enum(sort) = s.sort {
                let srt = &enc.sys.sorts[sort];
                if srt.needs_range() {
                    let max = Term::EnumConst { sort, index: srt.ctors.len() - 1 };
                    enc.sys.step.push(Term::App(Op::BvUle, vec![Term::stream(i, 0), max]));
                }
            }
        }
    }
    Ok(enc.sys)
}

impl EncodedSystem {
    pub fn index_sort(&self) -> &'static str {
        match self.config.nat {
            NatEncoding::Datatype => "Nat",
            NatEncoding::Integer => "Int",
        }
    }

    pub fn index(&self, t: &Time) -> String {
        match self.config.nat {
            NatEncoding::Datatype => {
                let mut s = t.base.as_deref().map(symbol).unwrap_or_else(|| "zero".to_string());
                for _ in 0..t.offset {
                    s = format!("(succ {s})");
                }
                s
            }
            NatEncoding::Integer => match (&t.base, t.offset) {
                (None, k) => k.to_string(),
                (Some(b), 0) => symbol(b),
                (Some(b), k) => format!("(+ {} {k})", symbol(b)),
            },
        }
    }

    pub fn sort_name(&self, sort: ValueSort) -> String {
        match sort {
            ValueSort::Bool => "Bool".into(),
            ValueSort::Int => "Int".into(),
            ValueSort::Real => "Real".into(),
            ValueSort::Enum(i) => match self.config.enums {
                EnumEncoding::Datatype => symbol(&self.sorts[i].smt_name),
                EnumEncoding::Bitvector => format!("(_ BitVec {})", self.sorts[i].width()),
            },
        }
    }

    pub fn stream_name(&self, ns: &str, stream: usize) -> String {
        symbol(&format!("{ns}${}", self.streams[stream].name))
    }

    /// `(stream index)` for use in assertions and `get-value`.
    pub fn stream_at(&self, ns: &str, stream: usize, t: &Time) -> String {
        format!("({} {})", self.stream_name(ns, stream), self.index(t))
    }

    pub fn enum_literal(&self, sort: usize, index: usize) -> String {
        match self.config.enums {
            EnumEncoding::Datatype => symbol(&self.sorts[sort].ctor_smt_name(index)),
            EnumEncoding::Bitvector => {
                format!("#b{:0width$b}", index, width = self.sorts[sort].width() as usize)
            }
        }
    }

    /// Renders a term with shift 0 at time `t`.
    pub fn render(&self, ns: &str, term: &Term, t: &Time) -> String {
        match term {
            Term::Bool(b) => b.to_string(),
            Term::Int(n) => render_int(n),
            Term::Real(r) => {
                let body = if r.denom() == &1.into() {
                    format!("{}.0", r.numer().magnitude())
                } else {
                    format!("(/ {}.0 {}.0)", r.numer().magnitude(), r.denom())
                };
                if r.numer() < &0.into() {
                    format!("(- {body})")
                } else {
                    body
                }
            }
            Term::EnumConst { sort, index } => self.enum_literal(*sort, *index),
            Term::Stream { stream, shift } => self.stream_at(ns, *stream, &t.shifted(*shift)),
            Term::App(op, args) => {
                let args: Vec<String> = args.iter().map(|a| self.render(ns, a, t)).collect();
                format!("({} {})", op.smt_name(), args.join(" "))
            }
            Term::Ite { cond, then, other, .. } => {
                format!("(ite {} {} {})", self.render(ns, cond, t), self.render(ns, then, t), self.render(ns, other, t))
            }
        }
    }

    fn render_all(&self, ns: &str, terms: &[Term], t: &Time) -> String {
        let rendered: Vec<String> = terms.iter().map(|x| self.render(ns, x, t)).collect();
        match rendered.len() {
            0 => "true".into(),
            1 => rendered.into_iter().next().expect("one element"),
            _ => format!("(and {})", rendered.join(" ")),
        }
    }

    pub fn predicate_name(&self, p: Predicate, ns: &str) -> String {
        symbol(&format!("{}%{ns}", p.prefix()))
    }

    /// Application of a predicate; the initial predicate ignores the time.
    pub fn apply(&self, p: Predicate, ns: &str, t: &Time) -> String {
        match p {
            Predicate::Init => self.predicate_name(p, ns),
            _ => format!("({} {})", self.predicate_name(p, ns), self.index(t)),
        }
    }

    /// Sort declarations shared by all namespaces.
    pub fn preamble(&self) -> Vec<String> {
        let mut out = vec![];
        if self.config.nat == NatEncoding::Datatype {
            out.push("(declare-datatypes ((Nat 0)) (((zero) (succ (pred Nat)))))".to_string());
        }
        if self.config.enums == EnumEncoding::Datatype {
            for s in &self.sorts {
                let ctors: Vec<String> =
                    (0..s.ctors.len()).map(|i| format!("({})", symbol(&s.ctor_smt_name(i)))).collect();
                out.push(format!("(declare-datatypes (({} 0)) (({})))", symbol(&s.smt_name), ctors.join(" ")));
            }
        }
        out
    }

    /// Stream declarations and predicate definitions for one namespace.
    pub fn declarations(&self, ns: &str) -> Vec<String> {
        let idx = self.index_sort();
        let mut out: Vec<String> = (0..self.streams.len())
            .map(|i| {
                format!("(declare-fun {} ({idx}) {})", self.stream_name(ns, i), self.sort_name(self.streams[i].sort))
            })
            .collect();
        let n = Time::symbolic("n", 0);
        out.push(format!(
            "(define-fun {} () Bool {})",
            self.predicate_name(Predicate::Init, ns),
            self.render_all(ns, &self.init, &Time::at(0))
        ));
        for (p, terms) in [
            (Predicate::Step, &self.step[..]),
            (Predicate::Assertion, &self.assertion[..]),
            (Predicate::Property, std::slice::from_ref(&self.property)),
        ] {
            out.push(format!(
                "(define-fun {} ((n {idx})) Bool {})",
                self.predicate_name(p, ns),
                self.render_all(ns, terms, &n)
            ));
        }
        out
    }

    pub fn var(&self, name: &str) -> Option<&EncodedVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    /// SMT literals for the leaves of a value, if it has an encodable type.
    pub fn value_literals(&self, v: &Value) -> Option<Vec<String>> {
        v.leaves()
            .into_iter()
            .map(|leaf| {
                let term = match leaf {
                    Value::Bool(b) => Term::Bool(*b),
                    Value::Int(n) => Term::Int(n.clone()),
                    Value::Real(r) => Term::Real(r.clone()),
                    Value::Enum { ty, ctor } => {
                        let sort = *self.enum_sorts.get(ty)?;
                        let index = self.sorts[sort].ctors.iter().position(|c| c == ctor)?;
                        Term::EnumConst { sort, index }
                    }
                    _ => return None,
                };
                Some(self.render("", &term, &Time::at(0)))
            })
            .collect()
    }

    /// SMT literal for a location of an automaton.
    pub fn location_literal(&self, automaton: &EncodedAutomaton, location: &str) -> Option<String> {
        let index = self.sorts[automaton.sort].ctors.iter().position(|c| c.as_str() == location)?;
        Some(self.enum_literal(automaton.sort, index))
    }
}

fn render_int(n: &num_bigint::BigInt) -> String {
    if n.sign() == num_bigint::Sign::Minus {
        format!("(- {})", n.magnitude())
    } else {
        n.to_string()
    }
}

/// A bounded model checking script: the property fails somewhere in
/// `0..=depth`.
pub fn bmc_script(sys: &EncodedSystem, depth: u32) -> String {
    let ns = "top";
    let mut lines = vec!["(set-option :produce-models true)".to_string(), "(set-logic ALL)".to_string()];
    lines.extend(sys.preamble());
    lines.extend(sys.declarations(ns));
    lines.push(format!("(assert {})", sys.apply(Predicate::Init, ns, &Time::at(0))));
    let mut bad = vec![];
    for k in 0..=depth {
        lines.push(format!("(assert {})", sys.apply(Predicate::Assertion, ns, &Time::at(k))));
        lines.push(format!("(assert {})", sys.apply(Predicate::Step, ns, &Time::at(k))));
        bad.push(format!("(not {})", sys.apply(Predicate::Property, ns, &Time::at(k))));
    }
    lines.push(if bad.len() == 1 {
        format!("(assert {})", bad[0])
    } else {
        format!("(assert (or {}))", bad.join(" "))
    });
    lines.push("(check-sat)".to_string());
    lines.join("\n") + "\n"
}
