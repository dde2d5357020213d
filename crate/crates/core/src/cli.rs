//! The `realize` command line.
//!
//! Exit codes: 0 realizable, 1 unrealizable, 2 unknown, 3 tool error,
//! 4 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contract::Valuation;
use crate::engine::{self, check_realizability, report, report_error, CheckOptions, Format, VerdictKind};
use crate::oracle::{parse_range_arg, parse_ranges, Domain, FiniteContract, OracleError, Ranges};
use crate::parser::render_contract;
use crate::solver::SolverCommand;
use crate::typecheck::TypedContract;

pub const EXIT_REALIZABLE: i32 = 0;
pub const EXIT_UNREALIZABLE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_TOOL_ERROR: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "realize", version, about = "Realizability checker for assume/guarantee contracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide realizability with the SMT engine.
    Check(CheckArgs),
    /// Decide realizability by explicit enumeration over finite ranges.
    Oracle(OracleArgs),
    /// Write every query script for n = 0..=max-n without solving.
    DumpSmt(DumpArgs),
    /// Type check and pretty-print a contract.
    Parse(ParseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Human => Format::Human,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub contract: PathBuf,
    #[arg(long, default_value_t = engine::DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long, default_value_t = engine::DEFAULT_TIMEOUT_MS,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout_ms: u64,
    /// Solver command line; defaults to $REALIZE_SOLVER or `z3 -in`.
    #[arg(long)]
    pub solver: Option<String>,
    /// Save every script sent to the solver in this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_smt: Option<PathBuf>,
    /// Also run the exact base check (reported, never decides).
    #[arg(long)]
    pub exact_base: bool,
    /// Solve the two per-iteration queries in parallel.
    #[arg(long)]
    pub concurrent: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub contract: PathBuf,
    /// `var=lo..hi` or `var=bool`; overrides the ranges file.
    #[arg(long = "range", value_name = "VAR=LO..HI")]
    pub ranges: Vec<String>,
    /// Ranges file; defaults to the contract path with extension `.ranges`
    /// when that file exists.
    #[arg(long, value_name = "FILE")]
    pub ranges_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    pub contract: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "smt")]
    pub dump_smt: PathBuf,
    #[arg(long, default_value_t = engine::DEFAULT_MAX_N)]
    pub max_n: usize,
    #[arg(long)]
    pub exact_base: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub contract: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

/// Where a run failed before producing its normal output.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn tool(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_TOOL_ERROR,
            message: message.into(),
        }
    }
}

/// Exit code for a verdict.
pub fn exit_code(kind: &VerdictKind) -> i32 {
    match kind {
        VerdictKind::Realizable { .. } => EXIT_REALIZABLE,
        VerdictKind::Unrealizable { .. } => EXIT_UNREALIZABLE,
        VerdictKind::Unknown { .. } => EXIT_UNKNOWN,
    }
}

fn wants_json(args: &[OsString]) -> bool {
    args.windows(2).any(|w| w[0] == "--format" && w[1] == "json")
        || args.iter().any(|a| a == "--format=json")
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            if wants_json(&args) {
                let msg = e.kind().to_string();
                let _ = writeln!(out, "{}", report_error("", &msg));
            }
            let _ = write!(err, "{e}");
            return EXIT_USAGE;
        }
    };

    let (format, path) = match &cli.command {
        Command::Check(a) => (a.format, &a.contract),
        Command::Oracle(a) => (a.format, &a.contract),
        Command::DumpSmt(a) => (a.format, &a.contract),
        Command::Parse(a) => (a.format, &a.contract),
    };
    let result = match &cli.command {
        Command::Check(a) => check(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::DumpSmt(a) => dump_smt(a, out),
        Command::Parse(a) => parse(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            if format == OutputFormat::Json {
                let name = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
                let _ = writeln!(out, "{}", report_error(&name, &f.message));
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<TypedContract, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    crate::load_contract(&text).map_err(|d| {
        let lines: Vec<String> = d
            .iter()
            .map(|x| format!("{}:{x}", path.display()))
            .collect();
        Failure::usage(lines.join("\n"))
    })
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let contract = load(&a.contract)?;
    let solver = match &a.solver {
        Some(cmd) => SolverCommand::parse(cmd),
        None => SolverCommand::from_env(),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let opts = CheckOptions {
        max_n: a.max_n,
        timeout_ms: a.timeout_ms,
        solver,
        exact_base: a.exact_base,
        dump_dir: a.dump_smt.clone(),
        concurrent: a.concurrent,
    };
    let verdict = check_realizability(&contract, &opts).map_err(|e| Failure::tool(e.to_string()))?;
    let text = report(&verdict, a.format.into());
    let _ = write!(out, "{text}");
    if !text.ends_with('\n') {
        let _ = writeln!(out);
    }
    Ok(exit_code(&verdict.kind))
}

/// Ranges from the sidecar or explicit file, then `--range` overrides.
fn collect_ranges(a: &OracleArgs) -> Result<Ranges, Failure> {
    let file = match &a.ranges_file {
        Some(p) => Some(p.clone()),
        None => {
            let side = a.contract.with_extension("ranges");
            side.exists().then_some(side)
        }
    };
    let mut ranges = match file {
        Some(p) => {
            let text = fs::read_to_string(&p)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?;
            parse_ranges(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
        }
        None => Ranges::new(),
    };
    for r in &a.ranges {
        let (var, dom) = parse_range_arg(r).map_err(Failure::usage)?;
        ranges.insert(var, dom);
    }
    Ok(ranges)
}

#[derive(Serialize)]
struct OracleJson<'a> {
    contract: &'a str,
    verdict: &'static str,
    states: usize,
    inputs: usize,
    initial_states: usize,
    viable_states: usize,
    fixpoint_iterations: usize,
    witness_initial: Option<&'a Valuation>,
    ranges: Vec<(String, String)>,
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let contract = load(&a.contract)?;
    let ranges = collect_ranges(a)?;
    let fc = FiniteContract::new(&contract, ranges).map_err(|e| match e {
        OracleError::Eval(_) => Failure::tool(e.to_string()),
        _ => Failure::usage(e.to_string()),
    })?;
    let s = fc.summary();
    let verdict = if s.realizable { "realizable" } else { "unrealizable" };
    match a.format {
        OutputFormat::Json => {
            let doc = OracleJson {
                contract: &contract.name,
                verdict,
                states: s.states,
                inputs: s.inputs,
                initial_states: s.initial,
                viable_states: s.viable,
                fixpoint_iterations: s.fixpoint_iterations,
                witness_initial: s.witness_initial.as_ref(),
                ranges: fc
                    .ranges()
                    .iter()
                    .map(|(k, d): (&String, &Domain)| (k.clone(), d.to_string()))
                    .collect(),
            };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
        OutputFormat::Human => {
            let _ = writeln!(out, "{} (oracle)", verdict.to_uppercase());
            let _ = writeln!(
                out,
                "  {} states, {} inputs, {} initial",
                s.states, s.inputs, s.initial
            );
            let _ = writeln!(
                out,
                "  |V*| = {} after {} fixpoint iterations",
                s.viable, s.fixpoint_iterations
            );
            if let Some(w) = &s.witness_initial {
                let text: Vec<String> = w.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let _ = writeln!(out, "  witness initial state: {}", text.join(", "));
            }
        }
    }
    Ok(if s.realizable {
        EXIT_REALIZABLE
    } else {
        EXIT_UNREALIZABLE
    })
}

fn dump_smt(a: &DumpArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let contract = load(&a.contract)?;
    let paths = engine::dump_scripts(&contract, a.max_n, a.exact_base, &a.dump_smt)
        .map_err(|e| Failure::tool(e.to_string()))?;
    match a.format {
        OutputFormat::Json => {
            let files: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            let doc = serde_json::json!({ "contract": contract.name, "files": files });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
        OutputFormat::Human => {
            for p in &paths {
                let _ = writeln!(out, "{}", p.display());
            }
        }
    }
    Ok(0)
}

fn parse(a: &ParseArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let contract = load(&a.contract)?;
    let text = render_contract(&contract);
    match a.format {
        OutputFormat::Json => {
            let doc = serde_json::json!({ "contract": contract.name, "rendered": text });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
        OutputFormat::Human => {
            let _ = write!(out, "{text}");
        }
    }
    Ok(0)
}

/// Entry point used by the binary.
pub fn main() -> std::process::ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::ExitCode::from(code as u8)
}
