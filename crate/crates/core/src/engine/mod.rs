//! The realizability decision loop.
//!
//! `InitialSat` runs once. Then, for `n = 0, 1, ..., max_n`, `BaseCheck'(n)`
//! looks for a valid `n`-path from an initial state that dead-ends, and
//! `ExtendCheck(n)` asks whether every valid `n`-path from *any* state can
//! be extended. A deadlock is reported as unrealizable (possibly a false
//! positive); a passing extend check proves realizability.

mod report;
mod trace;

use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

pub use report::{report, report_error, Format};
pub use trace::build_counterexample;

use crate::contract::Trace;
use crate::encoder::{encode, QueryKind, SmtScript};
use crate::solver::{run_query, SatStatus, SolverCommand, SolverError, SolverResult};
use crate::typecheck::TypedContract;

pub const DEFAULT_MAX_N: usize = 20;
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub max_n: usize,
    /// Per-query limit.
    pub timeout_ms: u64,
    pub solver: SolverCommand,
    /// Also run the exact base check each iteration and record its answer
    /// in the stats. Never affects the verdict.
    pub exact_base: bool,
    /// Write every script to this directory before solving it.
    pub dump_dir: Option<PathBuf>,
    /// Run `BaseCheck'(n)` and `ExtendCheck(n)` in parallel.
    pub concurrent: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_n: DEFAULT_MAX_N,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            solver: SolverCommand::from_env().unwrap_or_else(|_| {
                SolverCommand::parse(crate::solver::DEFAULT_SOLVER).expect("default solver")
            }),
            exact_base: false,
            dump_dir: None,
            concurrent: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnrealizableReason {
    NoInitialState,
    DeadlockAtDepth(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerdictKind {
    Realizable {
        n: usize,
    },
    /// `trace` is `None` only for `NoInitialState`.
    Unrealizable {
        reason: UnrealizableReason,
        trace: Option<Trace>,
    },
    Unknown {
        reason: String,
        last_n: usize,
        query: Option<QueryKind>,
    },
}

impl VerdictKind {
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::Realizable { .. } => "realizable",
            VerdictKind::Unrealizable { .. } => "unrealizable",
            VerdictKind::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactBaseRecord {
    pub n: usize,
    pub status: SatStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub queries: usize,
    pub total_ms: u64,
    pub exact_base: Vec<ExactBaseRecord>,
    /// Model constants the solver omitted and that were defaulted.
    pub defaulted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub contract: String,
    pub kind: VerdictKind,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_realizable(&self) -> bool {
        matches!(self.kind, VerdictKind::Realizable { .. })
    }

    pub fn is_unrealizable(&self) -> bool {
        matches!(self.kind, VerdictKind::Unrealizable { .. })
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.kind {
            VerdictKind::Unrealizable { trace, .. } => trace.as_ref(),
            _ => None,
        }
    }
}

/// Failures of the tool itself, as opposed to verdicts about the contract.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("counterexample does not replay: {0}")]
    TraceReconstruction(String),
    #[error("cannot write script to {path}: {source}")]
    Dump {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

struct Run<'a> {
    contract: &'a TypedContract,
    opts: &'a CheckOptions,
    stats: Stats,
}

impl Run<'_> {
    fn script(&self, kind: QueryKind) -> Result<SmtScript, ToolError> {
        let script = encode(self.contract, kind);
        if let Some(dir) = &self.opts.dump_dir {
            dump(dir, &self.contract.name, &script)?;
        }
        Ok(script)
    }

    fn solve(&self, script: &SmtScript) -> Result<SolverResult, ToolError> {
        Ok(run_query(
            script,
            &self.opts.solver,
            Duration::from_millis(self.opts.timeout_ms),
        )?)
    }

    fn query(&mut self, kind: QueryKind) -> Result<SolverResult, ToolError> {
        let script = self.script(kind)?;
        let result = self.solve(&script)?;
        self.stats.queries += 1;
        Ok(result)
    }

    /// Both per-iteration queries at once; results come back in the order
    /// `(base, extend)`.
    fn query_pair(&mut self, n: usize) -> Result<(SolverResult, SolverResult), ToolError> {
        let base = self.script(QueryKind::BaseCheckPrime(n))?;
        let ext = self.script(QueryKind::ExtendCheck(n))?;
        let (rb, re) = thread::scope(|scope| {
            let hb = scope.spawn(|| self.solve(&base));
            let re = self.solve(&ext);
            (hb.join().expect("solver thread panicked"), re)
        });
        self.stats.queries += 2;
        Ok((rb?, re?))
    }

    fn unknown(&self, result: &SolverResult, n: usize, kind: QueryKind) -> VerdictKind {
        VerdictKind::Unknown {
            reason: result
                .reason
                .clone()
                .unwrap_or_else(|| "solver returned unknown".into()),
            last_n: n,
            query: Some(kind),
        }
    }

    fn deadlock(&mut self, result: &SolverResult, n: usize) -> Result<VerdictKind, ToolError> {
        let model = result
            .model
            .as_ref()
            .ok_or_else(|| ToolError::TraceReconstruction("sat answer without a model".into()))?;
        self.stats.defaulted.extend(model.defaulted.iter().cloned());
        let trace = build_counterexample(&model.values, self.contract, n)?;
        Ok(VerdictKind::Unrealizable {
            reason: UnrealizableReason::DeadlockAtDepth(n),
            trace: Some(trace),
        })
    }

    fn decide(&mut self) -> Result<VerdictKind, ToolError> {
        let init = self.query(QueryKind::InitialSat)?;
        match init.status {
            SatStatus::Unsat => {
                return Ok(VerdictKind::Unrealizable {
                    reason: UnrealizableReason::NoInitialState,
                    trace: None,
                })
            }
            SatStatus::Unknown => return Ok(self.unknown(&init, 0, QueryKind::InitialSat)),
            SatStatus::Sat => {}
        }

        for n in 0..=self.opts.max_n {
            if self.opts.exact_base {
                let r = self.query(QueryKind::ExactBaseCheck(n))?;
                self.stats.exact_base.push(ExactBaseRecord { n, status: r.status });
            }

            let (base, ext) = if self.opts.concurrent {
                let (b, e) = self.query_pair(n)?;
                (b, Some(e))
            } else {
                (self.query(QueryKind::BaseCheckPrime(n))?, None)
            };
            match base.status {
                SatStatus::Sat => return self.deadlock(&base, n),
                SatStatus::Unknown => {
                    return Ok(self.unknown(&base, n, QueryKind::BaseCheckPrime(n)))
                }
                SatStatus::Unsat => {}
            }

            let ext = match ext {
                Some(e) => e,
                None => self.query(QueryKind::ExtendCheck(n))?,
            };
            match ext.status {
                SatStatus::Unsat => return Ok(VerdictKind::Realizable { n }),
                SatStatus::Unknown => {
                    return Ok(self.unknown(&ext, n, QueryKind::ExtendCheck(n)))
                }
                SatStatus::Sat => {}
            }
        }
        Ok(VerdictKind::Unknown {
            reason: "bound exhausted".into(),
            last_n: self.opts.max_n,
            query: None,
        })
    }
}

fn dump(dir: &std::path::Path, contract: &str, script: &SmtScript) -> Result<(), ToolError> {
    let path = dir.join(script.kind.file_name(contract));
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, &script.text))
        .map_err(|source| ToolError::Dump { path, source })
}

/// Decides realizability of `contract`.
pub fn check_realizability(
    contract: &TypedContract,
    opts: &CheckOptions,
) -> Result<Verdict, ToolError> {
    let started = Instant::now();
    let mut run = Run {
        contract,
        opts,
        stats: Stats::default(),
    };
    let kind = run.decide()?;
    let mut stats = run.stats;
    stats.total_ms = started.elapsed().as_millis() as u64;
    Ok(Verdict {
        contract: contract.name.clone(),
        kind,
        stats,
    })
}

/// Writes the scripts of every query kind for `n = 0..=max_n` to `dir`
/// without solving them. Returns the written paths in order.
pub fn dump_scripts(
    contract: &TypedContract,
    max_n: usize,
    exact_base: bool,
    dir: &std::path::Path,
) -> Result<Vec<PathBuf>, ToolError> {
    let mut kinds = vec![QueryKind::InitialSat];
    for n in 0..=max_n {
        if exact_base {
            kinds.push(QueryKind::ExactBaseCheck(n));
        }
        kinds.push(QueryKind::BaseCheckPrime(n));
        kinds.push(QueryKind::ExtendCheck(n));
    }
    let mut paths = Vec::new();
    for kind in kinds {
        let script = encode(contract, kind);
        dump(dir, &contract.name, &script)?;
        paths.push(dir.join(kind.file_name(&contract.name)));
    }
    Ok(paths)
}
