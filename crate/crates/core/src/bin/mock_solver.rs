//! Scripted stand-in for an SMT solver, used by protocol tests.
//!
//! Answers `success` to every command and appends each received line to the
//! file given with `--log`. `check-sat` answers `unsat` when a literal
//! `(assert false)` is in scope and `sat` otherwise; `get-value` answers with
//! a fixed default value of each term's sort. `--sleep-on-check <ms>` delays
//! every `check-sat` answer.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{self, BufRead, Write};
use std::thread;
use std::time::Duration;

use lama::solver::sexp::{parse_sexpr, SExpr};

struct Mock {
    frames: Vec<bool>,
    /// Result sort of each declared function.
    functions: HashMap<String, SExpr>,
    /// First constructor of each declared datatype.
    datatypes: HashMap<String, String>,
}

impl Mock {
    fn default_value(&self, sort: &SExpr) -> String {
        match sort {
            SExpr::Atom(s) if s == "Bool" => "false".into(),
            SExpr::Atom(s) if s == "Int" => "0".into(),
            SExpr::Atom(s) if s == "Real" => "0.0".into(),
            SExpr::Atom(s) => self.datatypes.get(s).cloned().unwrap_or_else(|| "0".into()),
            SExpr::List(items) => match items.as_slice() {
                [_, SExpr::Atom(bv), SExpr::Atom(w)] if bv == "BitVec" => {
                    format!("#b{}", "0".repeat(w.parse().unwrap_or(1)))
                }
                _ => "0".into(),
            },
        }
    }

    fn value_of(&self, term: &SExpr) -> String {
        let head = match term {
            SExpr::List(items) => items.first().and_then(SExpr::atom),
            SExpr::Atom(a) => Some(a.as_str()),
        };
        match head.and_then(|h| self.functions.get(h)) {
            Some(sort) => self.default_value(sort),
            None => "0".into(),
        }
    }

    fn answer(&mut self, line: &str) -> Option<String> {
        let Ok(cmd) = parse_sexpr(line) else {
            return Some("(error \"malformed command\")".into());
        };
        let items = cmd.list().unwrap_or_default();
        let head = items.first().and_then(SExpr::atom).unwrap_or("");
        Some(match head {
            "exit" => return None,
            "check-sat" => if self.frames.iter().any(|&f| f) { "unsat" } else { "sat" }.into(),
            "get-value" => {
                let terms = items.get(1).and_then(SExpr::list).unwrap_or_default();
                let pairs: Vec<String> = terms.iter().map(|t| format!("({t} {})", self.value_of(t))).collect();
                format!("({})", pairs.join(" "))
            }
            "push" => {
                self.frames.push(false);
                "success".into()
            }
            "pop" => {
                if self.frames.len() > 1 {
                    self.frames.pop();
                    "success".into()
                } else {
                    "(error \"pop below zero\")".into()
                }
            }
            "assert" => {
                if items.get(1).and_then(SExpr::atom) == Some("false") {
                    *self.frames.last_mut().expect("base frame") = true;
                }
                "success".into()
            }
            "declare-fun" | "define-fun" => {
                if let (Some(SExpr::Atom(name)), Some(sort)) = (items.get(1), items.get(3)) {
                    self.functions.insert(name.clone(), sort.clone());
                }
                "success".into()
            }
            "declare-datatypes" => {
                if let (Some(SExpr::List(sorts)), Some(SExpr::List(decls))) = (items.get(1), items.get(2)) {
                    for (s, d) in sorts.iter().zip(decls) {
                        let name = s.list().and_then(|l| l.first()).and_then(SExpr::atom);
                        let ctor = d.list().and_then(|l| l.first()).and_then(|c| match c {
                            SExpr::List(l) => l.first().and_then(SExpr::atom),
                            SExpr::Atom(a) => Some(a.as_str()),
                        });
                        if let (Some(n), Some(c)) = (name, ctor) {
                            self.datatypes.insert(n.to_string(), c.to_string());
                        }
                    }
                }
                "success".into()
            }
            _ => "success".into(),
        })
    }
}

fn main() -> io::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut log_path = None;
    let mut sleep = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--log" => log_path = it.next().cloned(),
            "--sleep-on-check" => sleep = it.next().and_then(|ms| ms.parse::<u64>().ok()).map(Duration::from_millis),
            other => eprintln!("lama-mock-solver: ignoring argument '{other}'"),
        }
    }
    let mut log = match &log_path {
        Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
        None => None,
    };
    let mut mock = Mock { frames: vec![false], functions: HashMap::new(), datatypes: HashMap::new() };
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(f) = log.as_mut() {
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        if line.trim() == "(check-sat)" {
            if let Some(d) = sleep {
                thread::sleep(d);
            }
        }
        match mock.answer(&line) {
            Some(reply) => {
                writeln!(stdout, "{reply}")?;
                stdout.flush()?;
            }
            None => break,
        }
    }
    Ok(())
}
