//! Step valuations and their line-oriented text format.
//!
//! Each line holds one step as comma-separated `name=value` pairs, values in
//! LAMA constant syntax. Automaton locations appear as `@mode(id)=location`.
//! Names of variables inside node instances are qualified as `Node$var`.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{Ident, TypedVar};
use crate::typecheck::{EnumTable, Scope};
use crate::value::{parse_value, Value};

/// Values of all observable streams at one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    pub inputs: BTreeMap<String, Value>,
    pub states: BTreeMap<String, Value>,
    pub locals: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub modes: BTreeMap<String, Ident>,
}

impl Valuation {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.inputs
            .get(name)
            .or_else(|| self.states.get(name))
            .or_else(|| self.locals.get(name))
            .or_else(|| self.outputs.get(name))
    }

    /// Names and values of all streams, modes excluded.
    pub fn streams(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.inputs.iter().chain(&self.states).chain(&self.locals).chain(&self.outputs)
    }

    /// Keeps only top-level names.
    pub fn top_level(&self) -> Valuation {
        let keep = |m: &BTreeMap<String, Value>| -> BTreeMap<String, Value> {
            m.iter().filter(|(k, _)| !k.contains('$')).map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        Valuation {
            inputs: keep(&self.inputs),
            states: keep(&self.states),
            locals: keep(&self.locals),
            outputs: keep(&self.outputs),
            modes: BTreeMap::new(),
        }
    }

    /// Names whose value here differs from (or is absent in) `other`.
    pub fn disagreements(&self, other: &Valuation) -> Vec<String> {
        let mut out = vec![];
        for (k, v) in self.streams() {
            match other.get(k) {
                Some(w) if w == v => {}
                Some(w) => out.push(format!("{k}: {v} vs {w}")),
                None => out.push(format!("{k}: {v} vs <missing>")),
            }
        }
        for (k, l) in &self.modes {
            match other.modes.get(k) {
                Some(m) if m == l => {}
                m => out.push(format!("@mode({k}): {l} vs {m:?}")),
            }
        }
        out
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.streams().map(|(k, v)| format!("{k}={v}")).collect();
        parts.extend(self.modes.iter().map(|(k, l)| format!("@mode({k})={l}")));
        f.write_str(&parts.join(", "))
    }
}

/// Formats a sequence of valuations, one per line.
pub fn format_trace(steps: &[Valuation]) -> String {
    steps.iter().map(|s| format!("{s}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(line: &str) -> Vec<&str> {
    let mut parts = vec![];
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&line[start..]);
    parts.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

/// Parses an input trace for the given input declarations. Blank lines are
/// steps without inputs; text after `--` is ignored.
pub fn parse_input_trace(
    text: &str,
    inputs: &[TypedVar],
    scope: &Scope,
    enums: &EnumTable,
) -> Result<Vec<IndexMap<Ident, Value>>, TraceError> {
    let mut steps = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("--").next().unwrap_or("");
        let err = |message: String| TraceError { line: i + 1, message };
        let mut step = IndexMap::new();
        for part in split_top_level(line) {
            let (name, val) =
                part.split_once('=').ok_or_else(|| err(format!("expected name=value, found '{}'", part.trim())))?;
            let name = name.trim();
            let decl = inputs
                .iter()
                .find(|v| v.name.as_str() == name)
                .ok_or_else(|| err(format!("'{name}' is not an input")))?;
            let ty = &scope.vars[&decl.name].ty;
            let v = parse_value(val, ty, enums).map_err(|e| err(e.to_string()))?;
            if step.insert(decl.name.clone(), v).is_some() {
                return Err(err(format!("'{name}' given twice")));
            }
        }
        steps.push(step);
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::typecheck::check_program;

    #[test]
    fn split_respects_parentheses() {
        assert_eq!(split_top_level("a=(# 1 2), b=(- 3)"), vec!["a=(# 1 2)", " b=(- 3)"]);
    }

    #[test]
    fn parse_inputs() {
        let p = parse_program("typedef enum E = {A, B}; input x : int; e : E; r : real;").unwrap();
        let env = check_program(&p).unwrap();
        let steps =
            parse_input_trace("x=1, e=A, r=1/2\nx=(- 2), e=B, r=3 -- comment\n", &p.inputs, &env.top, &env.enums)
                .unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[1]["x"], Value::int(-2));
        assert_eq!(steps[1]["r"], Value::real(3, 1));
        let bad = parse_input_trace("y=1", &p.inputs, &env.top, &env.enums).unwrap_err();
        assert_eq!(bad.line, 1);
    }

    #[test]
    fn valuation_line_format() {
        let mut v = Valuation::default();
        v.inputs.insert("i".into(), Value::int(-1));
        v.locals.insert("x".into(), Value::Bool(true));
        v.modes.insert("N$sm0".into(), "A".into());
        assert_eq!(v.to_string(), "i=(- 1), x=true, @mode(N$sm0)=A");
    }
}
