//! Reference interpreter.
//!
//! A step evaluates every block in the order computed by the causality
//! analysis. Transitions are strong: the edge leaving the previously selected
//! location is taken first and the target location's flow runs in the same
//! step. Node instances that are not used in a step keep their state.

use std::collections::{BTreeMap, HashMap, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::*;
use crate::deps::{DepNode, Mode, ScopeDeps, Usage};
use crate::frontend::CheckedProgram;
use crate::trace::Valuation;
use crate::typecheck::{ConstTable, EnumTable, Scope, VarKind};
use crate::value::{apply_binop, apply_not, Value, ValueError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("{0}")]
    Value(#[from] ValueError),
    #[error("no pattern matches value {0}")]
    MatchFailure(String),
    #[error("state variable '{0}' is read before it is initialized")]
    UninitializedRead(String),
    #[error("input '{0}' is missing")]
    MissingInput(String),
    #[error("input '{0}' has a value of the wrong type")]
    InputType(String),
    #[error("unknown input '{0}'")]
    UnknownInput(String),
    #[error("'{0}' is read before it is computed")]
    Unscheduled(String),
}

/// Evaluates an expression; `lookup` resolves every identifier.
pub fn eval_expr(e: &Expr, lookup: &dyn Fn(&Ident) -> Result<Value, RuntimeError>) -> Result<Value, RuntimeError> {
    match e {
        Expr::Atom(Atom::Const(c)) => Ok(Value::from_constant(c)),
        Expr::Atom(Atom::Var(x)) => lookup(x),
        Expr::Unary(UnOp::Not, a) => Ok(apply_not(&eval_expr(a, lookup)?)?),
        Expr::Binary(op, l, r) => {
            let l = eval_expr(l, lookup)?;
            let r = eval_expr(r, lookup)?;
            Ok(apply_binop(*op, &l, &r)?)
        }
        Expr::Ternary(TernOp::Ite, c, t, f) => {
            let c = eval_expr(c, lookup)?;
            let t = eval_expr(t, lookup)?;
            let f = eval_expr(f, lookup)?;
            match c {
                Value::Bool(true) => Ok(t),
                Value::Bool(false) => Ok(f),
                other => Err(ValueError::BadOperands { op: "ite", operands: other.to_string() }.into()),
            }
        }
        Expr::Prod(es) => Ok(Value::Tuple(es.iter().map(|e| eval_expr(e, lookup)).collect::<Result<_, _>>()?)),
        Expr::Project(x, i) => match lookup(x)? {
            Value::Tuple(mut vs) if (*i as usize) < vs.len() => Ok(vs.swap_remove(*i as usize)),
            other => Err(ValueError::BadOperands { op: "project", operands: other.to_string() }.into()),
        },
        Expr::Match(scrutinee, pats) => {
            let v = eval_expr(scrutinee, lookup)?;
            let bodies = pats.iter().map(|p| eval_expr(&p.body, lookup)).collect::<Result<Vec<_>, _>>()?;
            for (p, body) in pats.iter().zip(bodies) {
                let hit = match &p.head {
                    PatHead::Wildcard => true,
                    PatHead::Ctor(c) => matches!(&v, Value::Enum { ctor, .. } if ctor == c),
                };
                if hit {
                    return Ok(body);
                }
            }
            Err(RuntimeError::MatchFailure(v.to_string()))
        }
    }
}

/// Resolves constants and enum constructors.
pub fn global_value(x: &Ident, consts: &ConstTable, enums: &EnumTable) -> Option<Value> {
    if let Some((_, c)) = consts.consts.get(x) {
        return Some(Value::from_constant(c));
    }
    enums.ctor_owner.get(x).map(|ty| Value::Enum { ty: ty.clone(), ctor: x.clone() })
}

pub fn qualify(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{path}${name}")
    }
}

/// Identifier of the automaton with the given index in a block.
pub fn automaton_id(path: &str, index: usize) -> String {
    qualify(path, &format!("sm{index}"))
}

/// Persistent state of one block instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineState {
    pub states: IndexMap<Ident, Option<Value>>,
    /// Selected location of each automaton, by automaton index.
    pub selected: Vec<Ident>,
    pub instances: IndexMap<Ident, MachineState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub values: Valuation,
    pub assertion_ok: bool,
    pub invariant_ok: bool,
}

struct AutomatonPlan<'a> {
    automaton: &'a Automaton,
    defs: HashMap<(&'a Ident, &'a Ident), &'a Rhs>,
    next: HashMap<(&'a Ident, &'a Ident), &'a Expr>,
    defaults: HashMap<&'a Ident, &'a Expr>,
}

struct BlockPlan<'a> {
    path: String,
    scope: &'a Scope,
    params: Vec<&'a Ident>,
    returns: Vec<&'a Ident>,
    defs: HashMap<&'a Ident, &'a Rhs>,
    next: HashMap<&'a Ident, &'a Expr>,
    automata: Vec<AutomatonPlan<'a>>,
    owner: HashMap<&'a Ident, usize>,
    order: &'a [DepNode],
    initial: &'a [StateInit],
    assertion: Option<&'a Expr>,
    children: IndexMap<Ident, BlockPlan<'a>>,
}

struct BlockSource<'a> {
    nodes: &'a [Node],
    params: &'a [TypedVar],
    returns: &'a [TypedVar],
    flow: &'a Flow,
    automata: &'a [Automaton],
    initial: &'a [StateInit],
    assertion: Option<&'a Expr>,
}

impl<'a> BlockPlan<'a> {
    fn build(path: String, src: BlockSource<'a>, scope: &'a Scope, deps: &'a ScopeDeps) -> Self {
        let mut children = IndexMap::new();
        for n in src.nodes {
            let child = BlockSource {
                nodes: &n.decls.nodes,
                params: &n.params,
                returns: &n.returns,
                flow: &n.flow,
                automata: &n.automata,
                initial: &n.initial,
                assertion: n.assertion.as_ref(),
            };
            children.insert(
                n.name.clone(),
                BlockPlan::build(
                    qualify(&path, n.name.as_str()),
                    child,
                    &scope.nodes[&n.name].scope,
                    &deps.nodes[&n.name],
                ),
            );
        }
        let mut owner = HashMap::new();
        let automata = src
            .automata
            .iter()
            .enumerate()
            .map(|(ai, a)| {
                let mut plan = AutomatonPlan {
                    automaton: a,
                    defs: HashMap::new(),
                    next: HashMap::new(),
                    defaults: a.defaults.iter().map(|d| (&d.target, &d.rhs)).collect(),
                };
                for l in &a.locations {
                    for d in &l.flow.definitions {
                        plan.defs.insert((&l.name, &d.target), &d.rhs);
                        owner.insert(&d.target, ai);
                    }
                    for t in &l.flow.transitions {
                        plan.next.insert((&l.name, &t.target), &t.rhs);
                        owner.insert(&t.target, ai);
                    }
                }
                plan
            })
            .collect();
        BlockPlan {
            path,
            scope,
            params: src.params.iter().map(|v| &v.name).collect(),
            returns: src.returns.iter().map(|v| &v.name).collect(),
            defs: src.flow.definitions.iter().map(|d| (&d.target, &d.rhs)).collect(),
            next: src.flow.transitions.iter().map(|t| (&t.target, &t.rhs)).collect(),
            automata,
            owner,
            order: &deps.order,
            initial: src.initial,
            assertion: src.assertion,
            children,
        }
    }
}

/// Interpreter for a checked program.
/// Result of stepping one block.
struct BlockStep {
    next: MachineState,
    returns: Vec<Value>,
    assertion_ok: bool,
    /// Values computed in this step, by unqualified name.
    values: HashMap<Ident, Value>,
}

pub struct Machine<'a> {
    checked: &'a CheckedProgram,
    plan: BlockPlan<'a>,
}

struct Frame<'p, 'a> {
    plan: &'p BlockPlan<'a>,
    values: HashMap<Ident, Value>,
    next: HashMap<Ident, Value>,
    active: Vec<Option<Ident>>,
    instances: IndexMap<Ident, MachineState>,
    assertion_ok: bool,
}

impl<'a> Machine<'a> {
    pub fn new(checked: &'a CheckedProgram) -> Self {
        let p = &checked.program;
        let src = BlockSource {
            nodes: &p.decls.nodes,
            params: &p.inputs,
            returns: &[],
            flow: &p.flow,
            automata: &[],
            initial: &p.initial,
            assertion: p.assertion.as_ref(),
        };
        Machine { checked, plan: BlockPlan::build(String::new(), src, &checked.env.top, &checked.deps) }
    }

    fn global(&self, x: &Ident) -> Option<Value> {
        global_value(x, &self.checked.env.consts, &self.checked.env.enums)
    }

    /// Initial state; states without an initial value take the value given in
    /// `overrides` (by qualified name) or stay uninitialized.
    pub fn initial_state_with(&self, overrides: &BTreeMap<String, Value>) -> Result<MachineState, RuntimeError> {
        self.init_block(&self.plan, overrides)
    }

    pub fn initial_state(&self) -> Result<MachineState, RuntimeError> {
        self.initial_state_with(&BTreeMap::new())
    }

    fn init_block(
        &self,
        plan: &BlockPlan<'_>,
        overrides: &BTreeMap<String, Value>,
    ) -> Result<MachineState, RuntimeError> {
        let mut st = MachineState::default();
        for (x, v) in &plan.scope.vars {
            if v.kind == VarKind::State {
                st.states.insert(x.clone(), overrides.get(&qualify(&plan.path, x.as_str())).cloned());
            }
        }
        for init in plan.initial {
            let lookup = |x: &Ident| self.global(x).ok_or_else(|| RuntimeError::Unscheduled(x.to_string()));
            st.states.insert(init.target.clone(), Some(eval_expr(&init.value, &lookup)?));
        }
        st.selected = plan.automata.iter().map(|a| a.automaton.initial.clone()).collect();
        for (name, child) in &plan.children {
            st.instances.insert(name.clone(), self.init_block(child, overrides)?);
        }
        Ok(st)
    }

    /// Performs one synchronous step of the whole program.
    pub fn step(
        &self,
        state: &MachineState,
        inputs: &IndexMap<Ident, Value>,
    ) -> Result<(MachineState, StepRecord), RuntimeError> {
        let env = &self.checked.env;
        for x in inputs.keys() {
            if !self.plan.params.contains(&x) {
                return Err(RuntimeError::UnknownInput(x.to_string()));
            }
        }
        let mut args = vec![];
        for x in &self.plan.params {
            let v = inputs.get(*x).ok_or_else(|| RuntimeError::MissingInput(x.to_string()))?;
            if !v.has_type(&env.top.vars[*x].ty, &env.enums) {
                return Err(RuntimeError::InputType(x.to_string()));
            }
            args.push(v.clone());
        }
        let mut values = Valuation::default();
        record_states(&self.plan, state, &mut values);
        let BlockStep { next, assertion_ok, values: frame_values, .. } =
            self.step_block(&self.plan, state, args, &mut values)?;
        let invariant_ok = match &self.checked.program.invariant {
            Some(inv) => {
                let lookup = |x: &Ident| {
                    frame_values
                        .get(x)
                        .cloned()
                        .or_else(|| self.global(x))
                        .ok_or_else(|| RuntimeError::Unscheduled(x.to_string()))
                };
                eval_expr(inv, &lookup)?.as_bool().unwrap_or(false)
            }
            None => true,
        };
        Ok((next, StepRecord { values, assertion_ok, invariant_ok }))
    }

    fn step_block(
        &self,
        plan: &BlockPlan<'_>,
        state: &MachineState,
        args: Vec<Value>,
        out: &mut Valuation,
    ) -> Result<BlockStep, RuntimeError> {
        let mut frame = Frame {
            plan,
            values: HashMap::new(),
            next: HashMap::new(),
            active: vec![None; plan.automata.len()],
            instances: state.instances.clone(),
            assertion_ok: true,
        };
        for (x, v) in plan.params.iter().zip(args) {
            out.inputs.insert(qualify(&plan.path, x.as_str()), v.clone());
            frame.values.insert((*x).clone(), v);
        }
        for (x, v) in &state.states {
            if let Some(v) = v {
                frame.values.insert(x.clone(), v.clone());
            }
        }
        for node in plan.order {
            self.eval_node(&mut frame, state, node, out)?;
        }
        for ai in 0..plan.automata.len() {
            self.ensure_active(&mut frame, state, ai)?;
        }
        if let Some(a) = plan.assertion {
            let ok = self.eval_in(&frame, a)?.as_bool().unwrap_or(false);
            frame.assertion_ok &= ok;
        }
        for (x, v) in &plan.scope.vars {
            let name = qualify(&plan.path, x.as_str());
            match v.kind {
                VarKind::Local => {
                    if let Some(val) = frame.values.get(x) {
                        out.locals.insert(name, val.clone());
                    }
                }
                VarKind::Output => {
                    if let Some(val) = frame.values.get(x) {
                        out.outputs.insert(name, val.clone());
                    }
                }
                _ => {}
            }
        }
        for (ai, loc) in frame.active.iter().enumerate() {
            out.modes.insert(automaton_id(&plan.path, ai), loc.clone().expect("location computed"));
        }
        let returns = plan
            .returns
            .iter()
            .map(|x| {
                frame.values.get(*x).cloned().ok_or_else(|| RuntimeError::Unscheduled(qualify(&plan.path, x.as_str())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut next_state = MachineState {
            states: state.states.clone(),
            selected: frame.active.iter().map(|l| l.clone().expect("location computed")).collect(),
            instances: frame.instances,
        };
        for (x, v) in frame.next {
            next_state.states.insert(x, Some(v));
        }
        Ok(BlockStep { next: next_state, returns, assertion_ok: frame.assertion_ok, values: frame.values })
    }

    fn eval_in(&self, frame: &Frame<'_, '_>, e: &Expr) -> Result<Value, RuntimeError> {
        let plan = frame.plan;
        let lookup = |x: &Ident| {
            if let Some(v) = frame.values.get(x) {
                return Ok(v.clone());
            }
            match plan.scope.vars.get(x) {
                Some(v) if v.kind == VarKind::State => {
                    Err(RuntimeError::UninitializedRead(qualify(&plan.path, x.as_str())))
                }
                Some(_) => Err(RuntimeError::Unscheduled(qualify(&plan.path, x.as_str()))),
                None => self.global(x).ok_or_else(|| RuntimeError::Unscheduled(x.to_string())),
            }
        };
        eval_expr(e, &lookup)
    }

    fn ensure_active(&self, frame: &mut Frame<'_, '_>, state: &MachineState, ai: usize) -> Result<Ident, RuntimeError> {
        if let Some(l) = &frame.active[ai] {
            return Ok(l.clone());
        }
        let a = frame.plan.automata[ai].automaton;
        let selected = &state.selected[ai];
        let mut target = selected.clone();
        for e in a.edges.iter().filter(|e| &e.from == selected) {
            if self.eval_in(frame, &e.cond)?.as_bool() == Some(true) {
                target = e.to.clone();
                break;
            }
        }
        frame.active[ai] = Some(target.clone());
        Ok(target)
    }

    fn eval_rhs(&self, frame: &mut Frame<'_, '_>, rhs: &Rhs, out: &mut Valuation) -> Result<Value, RuntimeError> {
        match rhs {
            Rhs::Expr(e) => self.eval_in(frame, e),
            Rhs::Use { node, args } => {
                let args = args.iter().map(|a| self.eval_in(frame, a)).collect::<Result<Vec<_>, _>>()?;
                let child = &frame.plan.children[node];
                let child_state = frame.instances[node].clone();
                let BlockStep { next, mut returns, assertion_ok, .. } =
                    self.step_block(child, &child_state, args, out)?;
                frame.instances.insert(node.clone(), next);
                frame.assertion_ok &= assertion_ok;
                Ok(if returns.len() == 1 { returns.remove(0) } else { Value::Tuple(returns) })
            }
        }
    }

    fn eval_node(
        &self,
        frame: &mut Frame<'_, '_>,
        state: &MachineState,
        node: &DepNode,
        out: &mut Valuation,
    ) -> Result<(), RuntimeError> {
        let plan = frame.plan;
        let x = &node.var;
        match (&node.mode, node.usage) {
            (_, Usage::Input | Usage::StateIn) => {}
            (Mode::Global, Usage::Local | Usage::Output) => {
                if let Some(rhs) = plan.defs.get(x) {
                    let v = self.eval_rhs(frame, rhs, out)?;
                    frame.values.insert(x.clone(), v);
                } else if let Some(&ai) = plan.owner.get(x) {
                    self.ensure_active(frame, state, ai)?;
                    if !frame.values.contains_key(x) {
                        let default = plan.automata[ai].defaults.get(x).copied();
                        let e = default.ok_or_else(|| RuntimeError::Unscheduled(qualify(&plan.path, x.as_str())))?;
                        let v = self.eval_in(frame, e)?;
                        frame.values.insert(x.clone(), v);
                    }
                }
            }
            (Mode::Location { automaton, location }, Usage::Local | Usage::Output) => {
                if &self.ensure_active(frame, state, *automaton)? == location {
                    let rhs = plan.automata[*automaton].defs[&(location, x)];
                    let v = self.eval_rhs(frame, rhs, out)?;
                    frame.values.insert(x.clone(), v);
                }
            }
            (Mode::Global, Usage::StateOut) => {
                if let Some(e) = plan.next.get(x) {
                    let v = self.eval_in(frame, e)?;
                    frame.next.insert(x.clone(), v);
                } else if let Some(&ai) = plan.owner.get(x) {
                    self.ensure_active(frame, state, ai)?;
                    if !frame.next.contains_key(x) {
                        let default = plan.automata[ai].defaults.get(x).copied();
                        let e = default.ok_or_else(|| RuntimeError::Unscheduled(qualify(&plan.path, x.as_str())))?;
                        let v = self.eval_in(frame, e)?;
                        frame.next.insert(x.clone(), v);
                    }
                }
            }
            (Mode::Location { automaton, location }, Usage::StateOut) => {
                if &self.ensure_active(frame, state, *automaton)? == location {
                    let e = plan.automata[*automaton].next[&(location, x)];
                    let v = self.eval_in(frame, e)?;
                    frame.next.insert(x.clone(), v);
                }
            }
        }
        Ok(())
    }
}

fn record_states(plan: &BlockPlan<'_>, state: &MachineState, out: &mut Valuation) {
    for (x, v) in &state.states {
        if let Some(v) = v {
            out.states.insert(qualify(&plan.path, x.as_str()), v.clone());
        }
    }
    for (name, child) in &plan.children {
        record_states(child, &state.instances[name], out);
    }
}

/// A run stopped by a runtime error, with the steps completed before it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {source}")]
pub struct RunError {
    pub step: usize,
    pub completed: Vec<StepRecord>,
    pub source: RuntimeError,
}

/// Runs the program on a sequence of inputs. The run ends early at the first
/// step whose assertion fails; that step is the last record.
pub fn run(checked: &CheckedProgram, inputs: &[IndexMap<Ident, Value>]) -> Result<Vec<StepRecord>, RunError> {
    run_from(checked, inputs, &BTreeMap::new())
}

/// Like [`run`], seeding uninitialized state variables from `overrides`.
pub fn run_from(
    checked: &CheckedProgram,
    inputs: &[IndexMap<Ident, Value>],
    overrides: &BTreeMap<String, Value>,
) -> Result<Vec<StepRecord>, RunError> {
    let m = Machine::new(checked);
    let mut records = vec![];
    let mut state =
        m.initial_state_with(overrides).map_err(|source| RunError { step: 0, completed: vec![], source })?;
    for (k, step_inputs) in inputs.iter().enumerate() {
        match m.step(&state, step_inputs) {
            Ok((next, rec)) => {
                let stop = !rec.assertion_ok;
                records.push(rec);
                state = next;
                if stop {
                    break;
                }
            }
            Err(source) => return Err(RunError { step: k, completed: records, source }),
        }
    }
    Ok(records)
}

/// Names of all state variables of a program, qualified.
pub fn qualified_states(checked: &CheckedProgram) -> HashSet<String> {
    fn walk(path: &str, scope: &Scope, out: &mut HashSet<String>) {
        for (x, v) in &scope.vars {
            if v.kind == VarKind::State {
                out.insert(qualify(path, x.as_str()));
            }
        }
        for (n, ns) in &scope.nodes {
            walk(&qualify(path, n.as_str()), &ns.scope, out);
        }
    }
    let mut out = HashSet::new();
    walk("", &checked.env.top, &mut out);
    out
}
