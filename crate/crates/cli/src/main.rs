//! `lamav`: check, run and verify LAMA programs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;

use lama::ast::{Expr, Ident, Type};
use lama::deps::ScopeDeps;
use lama::frontend::CheckedProgram;
use lama::interp::run;
use lama::parser::parse_expr;
use lama::smt::{bmc_script, encode_program, EncodingConfig, EnumEncoding, NatEncoding};
use lama::solver::SolverCommand;
use lama::trace::{parse_input_trace, Valuation};
use lama::value::Value;
use lama::verifier::{verify, Strategy, Verdict, VerifyError, VerifyOptions};

const EXIT_FALSIFIED: u8 = 1;
const EXIT_STATIC: u8 = 2;
const EXIT_INFRA: u8 = 3;

#[derive(Parser)]
#[command(name = "lamav", version, about = "Check, run and verify LAMA programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse, type check and analyze dependencies.
    Check {
        file: PathBuf,
        /// Print the dependency graph of every scope.
        #[arg(long)]
        dump_deps: bool,
    },
    /// Run the interpreter on an input trace.
    Run {
        file: PathBuf,
        /// Input trace, one step per line.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Number of steps for programs without inputs.
        #[arg(long)]
        steps: Option<usize>,
        /// Print nested node variables and automaton locations too.
        #[arg(long)]
        emit_trace: bool,
    },
    /// Verify the program's invariant.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Kinduction)]
        strategy: StrategyArg,
        /// Unrolling bound for BMC.
        #[arg(long, visible_alias = "depth", default_value_t = 20)]
        max_depth: u32,
        /// Largest k tried by k-induction.
        #[arg(long, default_value_t = 10)]
        max_k: u32,
        #[command(flatten)]
        encoding: EncodingArgs,
        /// Solver command line; the solver must read SMT-LIB2 from stdin.
        #[arg(long, default_value = "z3 -in -smt2")]
        solver: String,
        /// Per check-sat timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Print nested node variables and automaton locations in traces.
        #[arg(long)]
        emit_trace: bool,
        /// File holding a boolean expression that replaces the invariant.
        #[arg(long)]
        property_file: Option<PathBuf>,
    },
    /// Print an SMT-LIB2 script for bounded model checking.
    DumpSmt {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[arg(long)]
        property_file: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EncodingArgs {
    #[arg(long, value_enum, default_value_t = NatArg::Datatype)]
    nat_encoding: NatArg,
    #[arg(long, value_enum, default_value_t = EnumArg::Bitvector)]
    enum_encoding: EnumArg,
}

impl EncodingArgs {
    fn config(&self) -> EncodingConfig {
        EncodingConfig {
            nat: match self.nat_encoding {
                NatArg::Datatype => NatEncoding::Datatype,
                NatArg::Integer => NatEncoding::Integer,
            },
            enums: match self.enum_encoding {
                EnumArg::Datatype => EnumEncoding::Datatype,
                EnumArg::Bitvector => EnumEncoding::Bitvector,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bmc,
    Kinduction,
}

#[derive(Clone, Copy, ValueEnum)]
enum NatArg {
    Datatype,
    Integer,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumArg {
    Datatype,
    Bitvector,
}

/// A failure with its exit code; the message goes to standard error.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn new(code: u8, line: impl Into<String>) -> Self {
        Failure { code, lines: vec![line.into()] }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INFRA, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<CheckedProgram, Failure> {
    let src = read(path)?;
    let checked = CheckedProgram::from_source(&src)
        .map_err(|e| Failure { code: EXIT_STATIC, lines: e.lines(&path.display().to_string()) })?;
    for w in &checked.env.warnings {
        eprintln!("{}:{}: warning: {}", path.display(), w.loc, w.message);
    }
    Ok(checked)
}

fn load_property(path: &Path, checked: &CheckedProgram) -> Result<Expr, Failure> {
    let name = path.display();
    let e = parse_expr(&read(path)?).map_err(|e| Failure::new(EXIT_STATIC, format!("{name}:{e}")))?;
    match checked.env.infer_top(&e) {
        Ok(Type::Bool) => Ok(e),
        Ok(t) => Err(Failure::new(
            EXIT_STATIC,
            format!("{name}: [invariant] property has type {}, expected bool", lama::parser::pretty::pretty_type(&t)),
        )),
        Err(e) => Err(Failure::new(EXIT_STATIC, format!("{name}:{e}"))),
    }
}

fn shown(v: &Valuation, full: bool) -> String {
    if full {
        v.to_string()
    } else {
        v.top_level().to_string()
    }
}

fn dump_deps(out: &mut String, title: &str, deps: &ScopeDeps) {
    out.push_str(&format!("-- {title}\n"));
    out.push_str(&deps.graph.dump());
    for (name, inner) in &deps.nodes {
        let title = if title == "program" { name.to_string() } else { format!("{title}${name}") };
        dump_deps(out, &title, inner);
    }
}

fn cmd_check(file: &Path, deps: bool) -> CmdResult {
    let checked = load(file)?;
    if deps {
        let mut out = String::new();
        dump_deps(&mut out, "program", &checked.deps);
        print!("{out}");
    }
    Ok(0)
}

fn cmd_run(file: &Path, trace: Option<&Path>, steps: Option<usize>, full: bool) -> CmdResult {
    let checked = load(file)?;
    let inputs: Vec<IndexMap<Ident, Value>> = match (trace, steps) {
        (Some(t), _) => {
            let text = read(t)?;
            let env = &checked.env;
            let mut parsed = parse_input_trace(&text, &checked.program.inputs, &env.top, &env.enums)
                .map_err(|e| Failure::new(EXIT_STATIC, format!("{}: {e}", t.display())))?;
            if let Some(n) = steps {
                parsed.truncate(n);
            }
            parsed
        }
        (None, Some(n)) => vec![IndexMap::new(); n],
        (None, None) => return Err(Failure::new(EXIT_STATIC, "run needs --trace or --steps")),
    };
    let records = run(&checked, &inputs).map_err(|e| {
        for r in &e.completed {
            println!("{}", shown(&r.values, full));
        }
        Failure::new(EXIT_INFRA, format!("runtime error at step {}: {}", e.step, e.source))
    })?;
    let mut code = 0;
    for (k, r) in records.iter().enumerate() {
        println!("{}", shown(&r.values, full));
        if !r.assertion_ok {
            eprintln!("assertion failed at step {k}; the run ends here");
        }
        if !r.invariant_ok && code == 0 {
            eprintln!("invariant violated at step {k}");
            code = EXIT_FALSIFIED;
        }
    }
    Ok(code)
}

struct VerifyArgs<'a> {
    file: &'a Path,
    strategy: Strategy,
    encoding: EncodingConfig,
    solver: &'a str,
    timeout: Option<f64>,
    full: bool,
    property_file: Option<&'a Path>,
}

fn cmd_verify(a: VerifyArgs<'_>) -> CmdResult {
    let checked = load(a.file)?;
    let property = a.property_file.map(|p| load_property(p, &checked)).transpose()?;
    let solver = SolverCommand::parse(a.solver).map_err(|e| Failure::new(EXIT_INFRA, e.to_string()))?;
    let timeout = match a.timeout {
        Some(t) if t.is_finite() && t > 0.0 => Some(Duration::from_secs_f64(t)),
        Some(_) => return Err(Failure::new(EXIT_STATIC, "--timeout must be a positive number of seconds")),
        None => None,
    };
    let opts = VerifyOptions { strategy: a.strategy, encoding: a.encoding, solver, timeout, property };
    let outcome = verify(&checked, &opts).map_err(|e| match e {
        VerifyError::Encode(e) => Failure::new(EXIT_STATIC, format!("{}: {e}", a.file.display())),
        e => Failure::new(EXIT_INFRA, e.to_string()),
    })?;
    for w in &outcome.warnings {
        eprintln!("{}: warning: {w}", a.file.display());
    }
    println!("{}", outcome.verdict.summary());
    Ok(match &outcome.verdict {
        Verdict::Falsified { trace, .. } => {
            for step in trace {
                println!("{}", shown(step, a.full));
            }
            EXIT_FALSIFIED
        }
        Verdict::Proved { .. } | Verdict::Exhausted { .. } => 0,
        Verdict::Unknown { reason, .. } => {
            eprintln!("solver returned unknown: {reason}");
            EXIT_INFRA
        }
    })
}

fn cmd_dump(file: &Path, depth: u32, encoding: EncodingConfig, property_file: Option<&Path>) -> CmdResult {
    let checked = load(file)?;
    let property = property_file.map(|p| load_property(p, &checked)).transpose()?;
    let sys = encode_program(&checked, encoding, property.as_ref())
        .map_err(|e| Failure::new(EXIT_STATIC, format!("{}: {e}", file.display())))?;
    print!("{}", bmc_script(&sys, depth));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Check { file, dump_deps } => cmd_check(file, *dump_deps),
        Cmd::Run { file, trace, steps, emit_trace } => cmd_run(file, trace.as_deref(), *steps, *emit_trace),
        Cmd::Verify { file, strategy, max_depth, max_k, encoding, solver, timeout, emit_trace, property_file } => {
            cmd_verify(VerifyArgs {
                file,
                strategy: match strategy {
                    StrategyArg::Bmc => Strategy::Bmc { max_depth: *max_depth },
                    StrategyArg::Kinduction => Strategy::KInduction { max_k: *max_k },
                },
                encoding: encoding.config(),
                solver,
                timeout: *timeout,
                full: *emit_trace,
                property_file: property_file.as_deref(),
            })
        }
        Cmd::DumpSmt { file, depth, encoding, property_file } => {
            cmd_dump(file, *depth, encoding.config(), property_file.as_deref())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            for l in f.lines {
                eprintln!("{l}");
            }
            ExitCode::from(f.code)
        }
    }
}
