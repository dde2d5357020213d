//! External SMT solver driver.
//!
//! Each query runs in its own child process: the script goes to stdin, the
//! answer is read from stdout. The first top-level token of the answer
//! must be `sat`, `unsat` or `unknown`; on `sat` the following `(get-model)`
//! output is decoded into values for the script's declared constants.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use wait_timeout::ChildExt;

use crate::contract::{Sort, Value};
use crate::encoder::{ModelVar, SmtScript};

pub const DEFAULT_SOLVER: &str = "z3 -in";
pub const SOLVER_ENV: &str = "REALIZE_SOLVER";

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unexpected solver output: {0}")]
    Protocol(String),
    #[error("cannot parse model: {0}")]
    ModelParse(String),
}

/// Program and arguments used to start the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl SolverCommand {
    /// Splits a shell-style command line such as `z3 -in` or
    /// `cvc5 --lang smt2 --produce-models`.
    pub fn parse(cmd: &str) -> Result<Self, SolverError> {
        let parts = shlex::split(cmd).filter(|p| !p.is_empty());
        match parts {
            Some(mut parts) => {
                let program = parts.remove(0);
                Ok(SolverCommand {
                    program,
                    args: parts,
                })
            }
            None => Err(SolverError::Spawn {
                command: cmd.to_string(),
                source: std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "empty or malformed solver command",
                ),
            }),
        }
    }

    /// `$REALIZE_SOLVER` if set, otherwise `z3 -in`.
    pub fn from_env() -> Result<Self, SolverError> {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::parse(&cmd),
            _ => Self::parse(DEFAULT_SOLVER),
        }
    }

    /// True if the program can be started at all.
    pub fn is_available(&self) -> bool {
        Command::new(&self.program)
            .arg("--version")
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok()
    }
}

impl fmt::Display for SolverCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.program)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for SatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatStatus::Sat => "sat",
            SatStatus::Unsat => "unsat",
            SatStatus::Unknown => "unknown",
        })
    }
}

/// Values assigned to a script's declared constants, keyed by SMT name.
pub type Model = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedModel {
    pub values: Model,
    /// Declared constants the solver left out; they were given the default
    /// value of their sort.
    pub defaulted: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub status: SatStatus,
    /// Present iff `status` is `Sat`.
    pub model: Option<ParsedModel>,
    /// Why the answer is `Unknown`: `"timeout"` or the solver's own words.
    pub reason: Option<String>,
    pub stderr_tail: String,
    pub wall_time_ms: u64,
}

const STDERR_TAIL: usize = 2000;

pub fn run_query(
    script: &SmtScript,
    solver: &SolverCommand,
    timeout: Duration,
) -> Result<SolverResult, SolverError> {
    let started = Instant::now();
    let mut child = Command::new(&solver.program)
        .args(&solver.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn {
            command: solver.to_string(),
            source,
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let text = script.text.clone();
    // A solver that dies early closes the pipe; that surfaces as a protocol
    // error below, so write failures are ignored here.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(text.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let out_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let finished = child
        .wait_timeout(timeout)
        .map_err(|e| SolverError::Protocol(format!("waiting for solver: {e}")))?;
    let timed_out = finished.is_none();
    if timed_out {
        let _ = child.kill();
        let _ = child.wait();
    }
    let _ = writer.join();
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let wall_time_ms = started.elapsed().as_millis() as u64;
    let stderr_tail = tail(&err, STDERR_TAIL);

    if timed_out {
        return Ok(SolverResult {
            status: SatStatus::Unknown,
            model: None,
            reason: Some("timeout".into()),
            stderr_tail,
            wall_time_ms,
        });
    }

    let mut result = interpret_output(&out, &script.model_vars)?;
    result.stderr_tail = stderr_tail;
    result.wall_time_ms = wall_time_ms;
    Ok(result)
}

fn tail(s: &str, max: usize) -> String {
    if s.len() <= max {
        return s.to_string();
    }
    let mut start = s.len() - max;
    while !s.is_char_boundary(start) {
        start += 1;
    }
    s[start..].to_string()
}

/// Decodes the solver's stdout for a script ending in
/// `(check-sat) (get-model)`.
pub fn interpret_output(out: &str, vars: &[ModelVar]) -> Result<SolverResult, SolverError> {
    let items = parse_sexprs(out).map_err(SolverError::Protocol)?;
    let Some(first) = items.first() else {
        return Err(SolverError::Protocol("solver produced no output".into()));
    };
    let status = match first {
        SExpr::Atom(a) if a == "sat" => SatStatus::Sat,
        SExpr::Atom(a) if a == "unsat" => SatStatus::Unsat,
        SExpr::Atom(a) if a == "unknown" => SatStatus::Unknown,
        other => {
            return Err(SolverError::Protocol(format!(
                "expected sat/unsat/unknown, got {}",
                truncate(&other.to_string(), 200)
            )))
        }
    };
    let mut result = SolverResult {
        status,
        model: None,
        reason: None,
        stderr_tail: String::new(),
        wall_time_ms: 0,
    };
    match status {
        SatStatus::Sat => {
            let model = items.get(1).ok_or_else(|| {
                SolverError::Protocol("`sat` without a model".into())
            })?;
            result.model = Some(model_from_sexpr(model, vars)?);
        }
        SatStatus::Unknown => result.reason = Some("solver returned unknown".into()),
        SatStatus::Unsat => {}
    }
    Ok(result)
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        let mut end = max;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &s[..end])
    }
}

/// Parses `(get-model)` output, keeping only the constants in `vars`.
pub fn parse_model(model_text: &str, vars: &[ModelVar]) -> Result<ParsedModel, SolverError> {
    let items = parse_sexprs(model_text).map_err(SolverError::ModelParse)?;
    match items.as_slice() {
        [one] => model_from_sexpr(one, vars),
        _ => Err(SolverError::ModelParse(format!(
            "expected one model s-expression, found {}",
            items.len()
        ))),
    }
}

fn model_from_sexpr(model: &SExpr, vars: &[ModelVar]) -> Result<ParsedModel, SolverError> {
    let SExpr::List(entries) = model else {
        return Err(SolverError::ModelParse(format!("not a model: {model}")));
    };
    // Older solvers wrap the definitions as `(model ...)`.
    let entries = match entries.split_first() {
        Some((SExpr::Atom(head), rest)) if head == "model" => rest,
        Some((SExpr::Atom(head), _)) if head == "error" => {
            return Err(SolverError::ModelParse(format!("solver error: {model}")))
        }
        _ => entries.as_slice(),
    };

    let wanted: BTreeMap<&str, Sort> = vars
        .iter()
        .map(|v| (v.smt_name.as_str(), v.sort))
        .collect();
    let mut values = Model::new();
    for entry in entries {
        let SExpr::List(parts) = entry else {
            return Err(SolverError::ModelParse(format!("bad model entry {entry}")));
        };
        let [SExpr::Atom(kw), SExpr::Atom(name), SExpr::List(params), _sort, value] =
            parts.as_slice()
        else {
            continue;
        };
        if kw != "define-fun" || !params.is_empty() {
            continue;
        }
        let name = unquote(name);
        if let Some(sort) = wanted.get(name) {
            let v = value_of(value, *sort).ok_or_else(|| {
                SolverError::ModelParse(format!("cannot read {sort} value {value} for {name}"))
            })?;
            values.insert(name.to_string(), v);
        }
    }

    let mut defaulted = Vec::new();
    for v in vars {
        if !values.contains_key(&v.smt_name) {
            values.insert(v.smt_name.clone(), v.sort.default_value());
            defaulted.push(v.smt_name.clone());
        }
    }
    Ok(ParsedModel { values, defaulted })
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('|')
        .and_then(|s| s.strip_suffix('|'))
        .unwrap_or(s)
}

fn value_of(e: &SExpr, sort: Sort) -> Option<Value> {
    match sort {
        Sort::Bool => match e {
            SExpr::Atom(a) if a == "true" => Some(Value::Bool(true)),
            SExpr::Atom(a) if a == "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Sort::Int => {
            let r = rational_of(e)?;
            r.is_integer().then(|| Value::Int(r.to_integer()))
        }
        Sort::Real => rational_of(e).map(Value::Real),
    }
}

fn rational_of(e: &SExpr) -> Option<BigRational> {
    match e {
        SExpr::Atom(a) => numeral(a),
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(op), x] if op == "-" => rational_of(x).map(|r| -r),
            [SExpr::Atom(op), x, y] if op == "/" => {
                let (x, y) = (rational_of(x)?, rational_of(y)?);
                (!y.is_zero()).then(|| x / y)
            }
            _ => None,
        },
    }
}

fn numeral(a: &str) -> Option<BigRational> {
    let (int_part, frac) = match a.split_once('.') {
        Some((i, f)) => (i, f),
        None => (a, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac}").parse().ok()?;
    let denom = if frac.is_empty() {
        BigInt::one()
    } else {
        Pow::pow(BigInt::from(10u32), frac.len() as u32)
    };
    Some(BigRational::new(digits, denom))
}

/// Minimal S-expression tree for solver responses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a sequence of top-level S-expressions. String literals and
/// `|quoted|` symbols are kept verbatim as atoms; `;` comments are skipped.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                if stack.len() < 2 {
                    return Err("unbalanced `)`".into());
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(done));
                i += 1;
            }
            '"' | '|' => {
                let start = i;
                i += 1;
                loop {
                    if i >= chars.len() {
                        return Err("unterminated literal".into());
                    }
                    if chars[i] == c {
                        // `""` is an escaped quote inside a string literal.
                        if c == '"' && chars.get(i + 1) == Some(&'"') {
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    i += 1;
                }
                let atom: String = chars[start..i].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !matches!(chars[i], '(' | ')' | ';' | '"')
                {
                    i += 1;
                }
                let atom: String = chars[start..i].iter().collect();
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}
