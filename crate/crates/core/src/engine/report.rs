use std::fmt::Write;

use serde::Serialize;

use super::{UnrealizableReason, Verdict, VerdictKind};
use crate::contract::{Trace, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Serialize)]
struct JsonStep<'a> {
    state: &'a Valuation,
    input: Option<&'a Valuation>,
}

#[derive(Serialize)]
struct JsonVerdict<'a> {
    contract: &'a str,
    verdict: &'a str,
    n: Option<usize>,
    reason: Option<String>,
    trace: Option<Vec<JsonStep<'a>>>,
    pending_input: Option<&'a Valuation>,
    queries: usize,
    time_ms: u64,
}

fn reason_text(reason: UnrealizableReason) -> String {
    match reason {
        UnrealizableReason::NoInitialState => "no state satisfies the initial guarantees".into(),
        UnrealizableReason::DeadlockAtDepth(k) => format!("deadlock at depth {k}"),
    }
}

// The last entry pairs the final state with the pending input.
fn json_trace(t: &Trace) -> Vec<JsonStep<'_>> {
    let mut out: Vec<JsonStep> = t
        .steps
        .iter()
        .map(|s| JsonStep {
            state: &s.state,
            input: Some(&s.input),
        })
        .collect();
    out.push(JsonStep {
        state: &t.final_state,
        input: t.pending_input.as_ref(),
    });
    out
}

pub fn report(v: &Verdict, format: Format) -> String {
    match format {
        Format::Human => human(v),
        Format::Json => json(v),
    }
}

fn json(v: &Verdict) -> String {
    let (n, reason, trace, pending) = match &v.kind {
        VerdictKind::Realizable { n } => (Some(*n), None, None, None),
        VerdictKind::Unrealizable { reason, trace } => {
            let n = match reason {
                UnrealizableReason::NoInitialState => None,
                UnrealizableReason::DeadlockAtDepth(k) => Some(*k),
            };
            (
                n,
                Some(reason_text(*reason)),
                trace.as_ref().map(json_trace),
                trace.as_ref().and_then(|t| t.pending_input.as_ref()),
            )
        }
        VerdictKind::Unknown { reason, last_n, .. } => {
            (Some(*last_n), Some(reason.clone()), None, None)
        }
    };
    let out = JsonVerdict {
        contract: &v.contract,
        verdict: v.kind.label(),
        n,
        reason,
        trace,
        pending_input: pending,
        queries: v.stats.queries,
        time_ms: v.stats.total_ms,
    };
    serde_json::to_string_pretty(&out).expect("verdict serializes")
}

/// JSON document for a run that ended in a tool or usage error.
pub fn report_error(contract: &str, message: &str) -> String {
    let out = JsonVerdict {
        contract,
        verdict: "error",
        n: None,
        reason: Some(message.to_string()),
        trace: None,
        pending_input: None,
        queries: 0,
        time_ms: 0,
    };
    serde_json::to_string_pretty(&out).expect("error serializes")
}

fn assignments(v: &Valuation) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter()
        .map(|(k, x)| format!("{k} = {x}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn human(v: &Verdict) -> String {
    let mut out = String::new();
    match &v.kind {
        VerdictKind::Realizable { n } => writeln!(out, "REALIZABLE (n={n})").unwrap(),
        VerdictKind::Unrealizable { reason, trace } => {
            writeln!(out, "UNREALIZABLE: {}", reason_text(*reason)).unwrap();
            if let Some(t) = trace {
                human_trace(&mut out, t);
            }
        }
        VerdictKind::Unknown { reason, last_n, query } => {
            writeln!(out, "UNKNOWN: {reason} at n={last_n}").unwrap();
            if let Some(q) = query {
                writeln!(out, "  while solving {q}").unwrap();
            }
        }
    }
    for rec in &v.stats.exact_base {
        writeln!(out, "  exact base check n={}: {}", rec.n, rec.status).unwrap();
    }
    if !v.stats.defaulted.is_empty() {
        writeln!(
            out,
            "  warning: solver omitted {}; default values used",
            v.stats.defaulted.join(", ")
        )
        .unwrap();
    }
    writeln!(out, "  {} queries, {} ms", v.stats.queries, v.stats.total_ms).unwrap();
    out
}

fn human_trace(out: &mut String, t: &Trace) {
    let rows: Vec<(String, String, String)> = (0..=t.len())
        .map(|j| {
            let input = if j < t.len() {
                assignments(&t.steps[j].input)
            } else {
                "(pending)".into()
            };
            (j.to_string(), assignments(t.state(j)), input)
        })
        .collect();
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(5);
    writeln!(out, "  {:<w0$}  {:<w1$}  input", "step", "state").unwrap();
    for (a, b, c) in &rows {
        writeln!(out, "  {a:<w0$}  {b:<w1$}  {c}").unwrap();
    }
    if let Some(p) = &t.pending_input {
        writeln!(
            out,
            "  pending input {}: no post-state satisfies the transitional guarantees",
            assignments(p)
        )
        .unwrap();
    }
}
