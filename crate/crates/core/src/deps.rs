//! Dependency graphs over (variable, mode, usage) triples and the causality
//! check that derives an evaluation order from them.
//!
//! An edge `a -> b` means that computing `a` needs the value of `b`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::ast::{Automaton, Expr, Flow, Ident, Program, Rhs};
use crate::typecheck::{Env, Scope, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Usage {
    Input,
    StateIn,
    Local,
    Output,
    StateOut,
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Usage::Input => "I",
            Usage::StateIn => "SIn",
            Usage::Local => "L",
            Usage::Output => "O",
            Usage::StateOut => "SOut",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Global,
    /// Location of the automaton with the given index in its node.
    Location {
        automaton: usize,
        location: Ident,
    },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Global => f.write_str("Global"),
            Mode::Location { automaton, location } => write!(f, "sm{automaton}.{location}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DepNode {
    pub var: Ident,
    pub mode: Mode,
    pub usage: Usage,
}

impl DepNode {
    pub fn new(var: &Ident, mode: Mode, usage: Usage) -> Self {
        DepNode { var: var.clone(), mode, usage }
    }

    pub fn global(var: &Ident, usage: Usage) -> Self {
        DepNode::new(var, Mode::Global, usage)
    }
}

impl fmt::Display for DepNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.var, self.mode, self.usage)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepGraph {
    nodes: IndexSet<DepNode>,
    edges: IndexSet<(usize, usize)>,
}

impl DepGraph {
    fn add_node(&mut self, n: DepNode) -> usize {
        self.nodes.insert_full(n).0
    }

    fn add_edge(&mut self, from: DepNode, to: DepNode) {
        let a = self.add_node(from);
        let b = self.add_node(to);
        self.edges.insert((a, b));
    }

    pub fn nodes(&self) -> impl Iterator<Item = &DepNode> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&DepNode, &DepNode)> {
        self.edges.iter().map(|(a, b)| (&self.nodes[*a], &self.nodes[*b]))
    }

    pub fn contains(&self, n: &DepNode) -> bool {
        self.nodes.contains(n)
    }

    pub fn has_edge(&self, from: &DepNode, to: &DepNode) -> bool {
        match (self.nodes.get_index_of(from), self.nodes.get_index_of(to)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    /// One `from -> to` line per edge.
    pub fn dump(&self) -> String {
        self.edges().map(|(a, b)| format!("{a} -> {b}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CausalityError {
    #[error("dependency cycle: {}", .0.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<DepNode>),
    #[error("variable '{var}' is not defined{}", .location.as_ref().map(|l| format!(" in location '{l}'")).unwrap_or_default())]
    MissingDefinition { var: Ident, location: Option<Ident> },
    #[error("variable '{0}' is defined more than once")]
    DuplicateDefinition(Ident),
    #[error("variable '{0}' is defined in more than one automaton")]
    MultiAutomatonDefinition(Ident),
    #[error("node '{0}' is used more than once")]
    NodeUsedTwice(Ident),
}

/// Causality failure annotated with the node path where it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{error}", if scope.is_empty() { String::new() } else { format!("in node {scope}: ") })]
pub struct DepError {
    pub scope: String,
    pub error: CausalityError,
}

fn usage_of_read(kind: VarKind) -> Usage {
    match kind {
        VarKind::Input => Usage::Input,
        VarKind::Local => Usage::Local,
        VarKind::Output => Usage::Output,
        VarKind::State => Usage::StateIn,
    }
}

/// Variables read by an expression together with how they are read.
pub fn expr_deps(e: &Expr, scope: &Scope) -> IndexSet<(Ident, Usage)> {
    let mut out = IndexSet::new();
    e.for_each_ident(&mut |x| {
        if let Some(v) = scope.vars.get(x) {
            out.insert((x.clone(), usage_of_read(v.kind)));
        }
    });
    out
}

fn rhs_deps(rhs: &Rhs, scope: &Scope) -> IndexSet<(Ident, Usage)> {
    match rhs {
        Rhs::Expr(e) => expr_deps(e, scope),
        Rhs::Use { args, .. } => args.iter().flat_map(|a| expr_deps(a, scope)).collect(),
    }
}

fn defined_usage(var: &Ident, scope: &Scope) -> Usage {
    match scope.vars.get(var).map(|v| v.kind) {
        Some(VarKind::Output) => Usage::Output,
        Some(VarKind::State) => Usage::StateOut,
        _ => Usage::Local,
    }
}

fn flow_dep(g: &mut DepGraph, mode: &Mode, flow: &Flow, scope: &Scope, cond_deps: &IndexSet<(Ident, Usage)>) {
    let mut add = |target: &Ident, usage: Usage, deps: IndexSet<(Ident, Usage)>| {
        let node = DepNode::new(target, mode.clone(), usage);
        g.add_node(node.clone());
        if *mode != Mode::Global {
            g.add_edge(DepNode::global(target, usage), node.clone());
        }
        for (y, u) in deps.iter().chain(cond_deps.iter()) {
            g.add_edge(node.clone(), DepNode::global(y, *u));
        }
    };
    for d in &flow.definitions {
        add(&d.target, defined_usage(&d.target, scope), rhs_deps(&d.rhs, scope));
    }
    for t in &flow.transitions {
        add(&t.target, Usage::StateOut, expr_deps(&t.rhs, scope));
    }
}

fn condition_deps(a: &Automaton, scope: &Scope) -> IndexSet<(Ident, Usage)> {
    a.edges.iter().flat_map(|e| expr_deps(&e.cond, scope)).collect()
}

/// Builds the dependency graph of one block: its global flow, the flows of
/// every automaton location, edge conditions and defaults.
pub fn build_dep_graph(flow: &Flow, automata: &[Automaton], scope: &Scope) -> DepGraph {
    let mut g = DepGraph::default();
    let none = IndexSet::new();
    flow_dep(&mut g, &Mode::Global, flow, scope, &none);
    for (ai, a) in automata.iter().enumerate() {
        let conds = condition_deps(a, scope);
        for l in &a.locations {
            let mode = Mode::Location { automaton: ai, location: l.name.clone() };
            flow_dep(&mut g, &mode, &l.flow, scope, &conds);
        }
        for d in &a.defaults {
            let node = DepNode::global(&d.target, defined_usage(&d.target, scope));
            g.add_node(node.clone());
            for (y, u) in expr_deps(&d.rhs, scope).iter().chain(conds.iter()) {
                g.add_edge(node.clone(), DepNode::global(y, *u));
            }
        }
    }
    g
}

fn order_key(n: &DepNode, scope: &Scope, automata: &[Automaton]) -> (usize, usize, usize, usize, Usage) {
    let var = scope.vars.get_index_of(&n.var).unwrap_or(usize::MAX);
    match &n.mode {
        Mode::Global => (var, 0, 0, 0, n.usage),
        Mode::Location { automaton, location } => {
            let li = automata
                .get(*automaton)
                .and_then(|a| a.locations.iter().position(|l| &l.name == location))
                .unwrap_or(usize::MAX);
            (var, 1, *automaton, li, n.usage)
        }
    }
}

/// Topological order with dependencies first; ties are broken by variable
/// declaration order, then mode, then usage.
fn topological_order(g: &DepGraph, scope: &Scope, automata: &[Automaton]) -> Result<Vec<DepNode>, Vec<DepNode>> {
    let n = g.nodes.len();
    let mut pending = vec![0usize; n];
    let mut dependents: Vec<Vec<usize>> = vec![vec![]; n];
    let mut successors: Vec<Vec<usize>> = vec![vec![]; n];
    for &(a, b) in &g.edges {
        pending[a] += 1;
        dependents[b].push(a);
        successors[a].push(b);
    }
    let key = |i: usize| order_key(&g.nodes[i], scope, automata);
    let mut ready: BTreeSet<_> = (0..n).filter(|&i| pending[i] == 0).map(|i| (key(i), i)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let i = first.1;
        order.push(g.nodes[i].clone());
        for &d in &dependents[i] {
            pending[d] -= 1;
            if pending[d] == 0 {
                ready.insert((key(d), d));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    let start = (0..n).filter(|&i| pending[i] > 0).min_by_key(|&i| key(i)).expect("remaining node");
    let mut path = vec![start];
    let mut seen: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = *successors[cur].iter().find(|&&s| pending[s] > 0).expect("cyclic remainder");
        if let Some(&pos) = seen.get(&next) {
            return Err(path[pos..].iter().map(|&i| g.nodes[i].clone()).collect());
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

fn check_definitions(flow: &Flow, automata: &[Automaton], scope: &Scope) -> Result<(), CausalityError> {
    let mut global: HashSet<&Ident> = HashSet::new();
    let mut global_next: HashSet<&Ident> = HashSet::new();
    for d in &flow.definitions {
        if !global.insert(&d.target) {
            return Err(CausalityError::DuplicateDefinition(d.target.clone()));
        }
    }
    for t in &flow.transitions {
        if !global_next.insert(&t.target) {
            return Err(CausalityError::DuplicateDefinition(t.target.clone()));
        }
    }
    let mut owner: HashMap<&Ident, usize> = HashMap::new();
    for (ai, a) in automata.iter().enumerate() {
        let mut managed: IndexSet<&Ident> = IndexSet::new();
        let mut per_location: Vec<HashSet<&Ident>> = vec![];
        for l in &a.locations {
            let mut here = HashSet::new();
            let targets = l
                .flow
                .definitions
                .iter()
                .map(|d| (&d.target, false))
                .chain(l.flow.transitions.iter().map(|t| (&t.target, true)));
            for (x, is_next) in targets {
                if !here.insert(x) {
                    return Err(CausalityError::DuplicateDefinition(x.clone()));
                }
                let globally = if is_next { &global_next } else { &global };
                if globally.contains(x) {
                    return Err(CausalityError::DuplicateDefinition(x.clone()));
                }
                managed.insert(x);
            }
            per_location.push(here);
        }
        for x in &managed {
            if let Some(prev) = owner.insert(x, ai) {
                if prev != ai {
                    return Err(CausalityError::MultiAutomatonDefinition((*x).clone()));
                }
            }
            if a.defaults.iter().any(|d| &d.target == *x) {
                continue;
            }
            for (l, here) in a.locations.iter().zip(&per_location) {
                if !here.contains(x) {
                    return Err(CausalityError::MissingDefinition {
                        var: (*x).clone(),
                        location: Some(l.name.clone()),
                    });
                }
            }
        }
    }
    for (x, v) in &scope.vars {
        let defined = match v.kind {
            VarKind::Input => true,
            VarKind::Output | VarKind::Local => global.contains(x) || owner.contains_key(x),
            VarKind::State => global_next.contains(x) || owner.contains_key(x),
        };
        if !defined {
            return Err(CausalityError::MissingDefinition { var: x.clone(), location: None });
        }
    }
    Ok(())
}

fn check_single_use(flow: &Flow, automata: &[Automaton]) -> Result<(), CausalityError> {
    let mut used = HashSet::new();
    let flows = std::iter::once(flow).chain(automata.iter().flat_map(|a| a.locations.iter().map(|l| &l.flow)));
    for f in flows {
        for d in &f.definitions {
            if let Rhs::Use { node, .. } = &d.rhs {
                if !used.insert(node.clone()) {
                    return Err(CausalityError::NodeUsedTwice(node.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Checks that a block is causal and returns its evaluation order.
pub fn check_causal(
    g: &DepGraph,
    flow: &Flow,
    automata: &[Automaton],
    scope: &Scope,
) -> Result<Vec<DepNode>, CausalityError> {
    let order = topological_order(g, scope, automata).map_err(CausalityError::Cycle)?;
    check_definitions(flow, automata, scope)?;
    check_single_use(flow, automata)?;
    Ok(order)
}

/// Analysis results for one block and, recursively, its nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeDeps {
    pub graph: DepGraph,
    pub order: Vec<DepNode>,
    pub nodes: IndexMap<Ident, ScopeDeps>,
}

fn analyze_block(
    path: &str,
    nodes: &[crate::ast::Node],
    flow: &Flow,
    automata: &[Automaton],
    scope: &Scope,
) -> Result<ScopeDeps, DepError> {
    let mut sub = IndexMap::new();
    for n in nodes {
        let child_path = if path.is_empty() { n.name.to_string() } else { format!("{path}${}", n.name) };
        let ns = &scope.nodes[&n.name].scope;
        sub.insert(n.name.clone(), analyze_block(&child_path, &n.decls.nodes, &n.flow, &n.automata, ns)?);
    }
    let graph = build_dep_graph(flow, automata, scope);
    let order =
        check_causal(&graph, flow, automata, scope).map_err(|error| DepError { scope: path.to_string(), error })?;
    Ok(ScopeDeps { graph, order, nodes: sub })
}

/// Runs the causality analysis on every block of a checked program.
pub fn analyze_program(prog: &Program, env: &Env) -> Result<ScopeDeps, DepError> {
    analyze_block("", &prog.decls.nodes, &prog.flow, &[], &env.top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::typecheck::check_program;

    fn analyze(src: &str) -> Result<ScopeDeps, DepError> {
        let p = parse_program(src).unwrap();
        let env = check_program(&p).unwrap();
        analyze_program(&p, &env)
    }

    #[test]
    fn self_transition_is_causal() {
        let d = analyze("state x : int; transition x' = x; initial x = 0;").unwrap();
        let out = DepNode::global(&"x".into(), Usage::StateOut);
        let inp = DepNode::global(&"x".into(), Usage::StateIn);
        assert!(d.graph.has_edge(&out, &inp));
        assert_eq!(d.order, vec![inp, out]);
    }

    #[test]
    fn mutual_definitions_form_a_cycle() {
        let err = analyze("local x : int; y : int; definition x = y; y = x;").unwrap_err();
        assert!(matches!(err.error, CausalityError::Cycle(ref c) if c.len() == 2));
    }

    #[test]
    fn order_respects_dependencies_and_declaration_order() {
        let d = analyze(
            "input i : int; local a : int; b : int; c : int; \
             definition c = (+ a b); a = i; b = i;",
        )
        .unwrap();
        let names: Vec<_> = d.order.iter().map(|n| n.var.to_string()).collect();
        assert_eq!(names, vec!["i", "a", "b", "c"]);
    }

    #[test]
    fn dump_has_one_edge_per_line() {
        let d = analyze("input i : int; local a : int; definition a = i;").unwrap();
        assert_eq!(d.graph.dump(), "(a, Global, L) -> (i, Global, I)\n");
    }

    #[test]
    fn missing_location_definition_without_default() {
        let err = analyze(
            "nodes node N() returns (y : int) let automaton let \
             location A let definition y = 1; tel location B let tel \
             initial A; edge (A, B) : true; tel tel",
        )
        .unwrap_err();
        assert_eq!(err.error, CausalityError::MissingDefinition { var: "y".into(), location: Some("B".into()) });
        assert_eq!(err.scope, "N");
    }

    #[test]
    fn default_covers_missing_location_definition() {
        analyze(
            "nodes node N() returns (y : int) let automaton let \
             location A let definition y = 1; tel location B let tel \
             initial A; edge (A, B) : true; default y = 0; tel tel",
        )
        .unwrap();
    }

    #[test]
    fn variable_in_two_automata() {
        let err = analyze(
            "nodes node N() returns (y : int) let \
             automaton let location A let definition y = 1; tel initial A; tel \
             automaton let location B let definition y = 2; tel initial B; tel tel",
        )
        .unwrap_err();
        assert_eq!(err.error, CausalityError::MultiAutomatonDefinition("y".into()));
    }

    #[test]
    fn undefined_return_is_reported() {
        let err = analyze("nodes node N() returns (y : int) let tel").unwrap_err();
        assert_eq!(err.error, CausalityError::MissingDefinition { var: "y".into(), location: None });
    }

    #[test]
    fn node_used_twice() {
        let err = analyze(
            "nodes node N() returns (y : int) let definition y = 1; tel \
             local a : int; b : int; definition a = (use N); b = (use N);",
        )
        .unwrap_err();
        assert_eq!(err.error, CausalityError::NodeUsedTwice("N".into()));
    }

    #[test]
    fn edge_condition_on_location_local_is_cyclic() {
        let err = analyze(
            "nodes node N() returns (y : int) let local z : int; definition y = z; \
             automaton let location A let definition z = 1; tel \
             location B let definition z = 2; tel initial A; edge (A, B) : (> z 0); tel tel",
        )
        .unwrap_err();
        let CausalityError::Cycle(c) = err.error else { panic!("expected cycle") };
        assert!(c.iter().all(|n| n.var.as_str() == "z"));
    }
}
