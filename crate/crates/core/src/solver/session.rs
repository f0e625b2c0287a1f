//! Interactive SMT-LIB2 session over a child process's stdin and stdout.
//!
//! The session runs the solver with `:print-success` enabled so that every
//! command has a response. Check-sat calls may time out; the solver is then
//! killed, restarted, and brought back to the same assertion stack by
//! replaying the commands still in effect.

use std::io::{self, Read as _, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::solver::sexp::{read_sexpr, Read, SExpr};

/// Program and arguments used to start a solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl SolverCommand {
    /// Splits a command line on whitespace.
    pub fn parse(line: &str) -> Result<Self, SolverError> {
        let mut parts = line.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or(SolverError::EmptyCommand)?;
        Ok(SolverCommand { program, args: parts.collect() })
    }

    pub fn z3() -> Self {
        SolverCommand::parse("z3 -in -smt2").expect("non-empty command")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    Unknown(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("empty solver command")]
    EmptyCommand,
    #[error("cannot start solver '{program}': {source}")]
    Spawn { program: String, source: io::Error },
    #[error("solver I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error("solver exited while answering '{command}'")]
    Closed { command: String },
    #[error("solver rejected '{command}': {message}")]
    Rejected { command: String, message: String },
    #[error("unexpected solver response to '{command}': {response}")]
    Unexpected { command: String, response: String },
    #[error("pop without a matching push")]
    PopBelowZero,
}

enum Chunk {
    Data(String),
    Eof,
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<Chunk>,
    buffer: String,
}

impl Process {
    fn spawn(cmd: &SolverCommand) -> Result<Process, SolverError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn { program: cmd.program.clone(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut buf = [0u8; 8192];
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => {
                        let _ = tx.send(Chunk::Eof);
                        return;
                    }
                    Ok(n) => {
                        if tx.send(Chunk::Data(String::from_utf8_lossy(&buf[..n]).into_owned())).is_err() {
                            return;
                        }
                    }
                }
            }
        });
        Ok(Process { child, stdin, rx, buffer: String::new() })
    }

    fn send(&mut self, command: &str) -> io::Result<()> {
        self.stdin.write_all(command.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()
    }

    /// Next response, or `Ok(None)` when the deadline passes first.
    fn response(&mut self, command: &str, deadline: Option<Instant>) -> Result<Option<SExpr>, SolverError> {
        loop {
            match read_sexpr(&self.buffer) {
                Read::Complete(e, used) => {
                    self.buffer.drain(..used);
                    return Ok(Some(e));
                }
                Read::Malformed(m) => {
                    return Err(SolverError::Unexpected { command: command.into(), response: m });
                }
                Read::Incomplete => {}
            }
            let chunk = match deadline {
                Some(d) => match self.rx.recv_timeout(d.saturating_duration_since(Instant::now())) {
                    Ok(c) => c,
                    Err(RecvTimeoutError::Timeout) => return Ok(None),
                    Err(RecvTimeoutError::Disconnected) => Chunk::Eof,
                },
                None => self.rx.recv().unwrap_or(Chunk::Eof),
            };
            match chunk {
                Chunk::Data(s) => self.buffer.push_str(&s),
                Chunk::Eof => {
                    // A final atom may be missing its trailing newline.
                    if !self.buffer.trim().is_empty() && !self.buffer.ends_with(char::is_whitespace) {
                        self.buffer.push('\n');
                        continue;
                    }
                    return Err(SolverError::Closed { command: command.into() });
                }
            }
        }
    }

    /// Lets the solver exit on its own for a short while, then kills it.
    fn shutdown(&mut self) {
        if self.send("(exit)").is_ok() {
            let deadline = Instant::now() + Duration::from_millis(500);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(2));
            }
        }
        self.kill();
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A running solver with an assertion stack.
pub struct SolverSession {
    command: SolverCommand,
    process: Process,
    timeout: Option<Duration>,
    /// Commands that define the current solver state, replayed on restart.
    log: Vec<String>,
    /// Length of `log` at each open push.
    frames: Vec<usize>,
    transcript: Vec<String>,
    restarts: usize,
}

const SETUP: [&str; 3] = ["(set-option :print-success true)", "(set-option :produce-models true)", "(set-logic ALL)"];

impl SolverSession {
    /// Starts the solver and sends the setup commands.
    pub fn start(command: SolverCommand, timeout: Option<Duration>) -> Result<Self, SolverError> {
        let process = Process::spawn(&command)?;
        let mut s =
            SolverSession { command, process, timeout, log: vec![], frames: vec![], transcript: vec![], restarts: 0 };
        for c in SETUP {
            s.command_ok(c)?;
        }
        Ok(s)
    }

    /// Every command sent to the solver since it started, restarts excluded.
    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    fn exchange(&mut self, command: &str, deadline: Option<Instant>) -> Result<Option<SExpr>, SolverError> {
        self.transcript.push(command.to_string());
        self.process.send(command)?;
        self.process.response(command, deadline)
    }

    fn expect_success(command: &str, r: SExpr) -> Result<(), SolverError> {
        match &r {
            SExpr::Atom(a) if a == "success" => Ok(()),
            SExpr::List(items) if items.first().and_then(SExpr::atom) == Some("error") => Err(SolverError::Rejected {
                command: command.into(),
                message: items.get(1).map(|m| m.to_string().trim_matches('"').to_string()).unwrap_or_default(),
            }),
            _ => Err(SolverError::Unexpected { command: command.into(), response: r.to_string() }),
        }
    }

    fn command_ok(&mut self, command: &str) -> Result<(), SolverError> {
        let r = self.exchange(command, None)?.expect("no deadline");
        Self::expect_success(command, r)?;
        self.log.push(command.to_string());
        Ok(())
    }

    /// Sends a command that changes solver state and answers `success`.
    pub fn send(&mut self, command: &str) -> Result<(), SolverError> {
        self.command_ok(command)
    }

    pub fn assert(&mut self, term: &str) -> Result<(), SolverError> {
        self.command_ok(&format!("(assert {term})"))
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        let mark = self.log.len();
        self.command_ok("(push 1)")?;
        self.frames.push(mark);
        Ok(())
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        let mark = *self.frames.last().ok_or(SolverError::PopBelowZero)?;
        self.command_ok("(pop 1)")?;
        self.frames.pop();
        self.log.truncate(mark);
        Ok(())
    }

    pub fn check_sat(&mut self) -> Result<CheckResult, SolverError> {
        let command = "(check-sat)";
        let deadline = self.timeout.map(|t| Instant::now() + t);
        match self.exchange(command, deadline)? {
            Some(SExpr::Atom(a)) if a == "sat" => Ok(CheckResult::Sat),
            Some(SExpr::Atom(a)) if a == "unsat" => Ok(CheckResult::Unsat),
            Some(SExpr::Atom(a)) if a == "unknown" => Ok(CheckResult::Unknown("unknown".into())),
            Some(r) => {
                Self::expect_success(command, r.clone())?;
                Err(SolverError::Unexpected { command: command.into(), response: r.to_string() })
            }
            None => {
                self.restart()?;
                Ok(CheckResult::Unknown("timeout".into()))
            }
        }
    }

    /// Values of the given terms in the current model.
    pub fn get_value(&mut self, terms: &[String]) -> Result<Vec<(SExpr, SExpr)>, SolverError> {
        if terms.is_empty() {
            return Ok(vec![]);
        }
        let command = format!("(get-value ({}))", terms.join(" "));
        let r = self.exchange(&command, None)?.expect("no deadline");
        let unexpected = |r: &SExpr| SolverError::Unexpected { command: command.clone(), response: r.to_string() };
        let Some(pairs) = r.list() else {
            return Err(unexpected(&r));
        };
        if pairs.first().and_then(SExpr::atom) == Some("error") {
            Self::expect_success(&command, r.clone())?;
        }
        let out = pairs
            .iter()
            .map(|p| match p.list() {
                Some([t, v]) => Ok((t.clone(), v.clone())),
                _ => Err(unexpected(&r)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if out.len() != terms.len() {
            return Err(unexpected(&r));
        }
        Ok(out)
    }

    /// Kills the solver and restores the current stack in a fresh process.
    fn restart(&mut self) -> Result<(), SolverError> {
        self.process.kill();
        self.process = Process::spawn(&self.command)?;
        self.restarts += 1;
        for c in self.log.clone() {
            self.process.send(&c)?;
            let r = self.process.response(&c, None)?.expect("no deadline");
            Self::expect_success(&c, r)?;
        }
        Ok(())
    }
}

impl Drop for SolverSession {
    fn drop(&mut self) {
        self.process.shutdown();
    }
}
