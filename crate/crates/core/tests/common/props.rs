//! Checks shared by the oracle tests and the acceptance runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use realize::engine::{check_realizability, CheckOptions, UnrealizableReason, VerdictKind};
use realize::eval::{holds_assumptions, holds_initial, holds_transition};
use realize::oracle::{FiniteContract, TransitionSystem};
use realize::Trace;

use super::Generated;

pub const MAX_FV_DEPTH: usize = 5;

fn subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !*x || *y)
}

/// Transition systems to try against the realization conditions: the
/// witness, the maximal viable system, and random restrictions of `G_T`.
fn candidate_systems(fc: &FiniteContract, rng: &mut ChaCha8Rng) -> Vec<TransitionSystem> {
    let ns = fc.states().len();
    let v = fc.viable_set();
    let mut out = Vec::new();
    out.extend(fc.witness_transition());
    let init: Vec<bool> = (0..ns).map(|s| fc.is_initial(s) && v[s]).collect();
    out.push(TransitionSystem::from_ids(fc, init, |s, i, t| {
        fc.successors(s, i).contains(&t) && v[t]
    }));
    for _ in 0..4 {
        let init: Vec<bool> = (0..ns).map(|s| fc.is_initial(s) && rng.gen_bool(0.5)).collect();
        let keep: Vec<bool> = (0..ns * fc.inputs().len() * ns).map(|_| rng.gen_bool(0.7)).collect();
        let ni = fc.inputs().len();
        out.push(TransitionSystem::from_ids(fc, init, |s, i, t| {
            fc.successors(s, i).contains(&t) && keep[(s * ni + i) * ns + t]
        }));
    }
    for _ in 0..2 {
        let init: Vec<bool> = (0..ns).map(|_| rng.gen_bool(0.3)).collect();
        let keep: Vec<bool> = (0..ns * fc.inputs().len() * ns).map(|_| rng.gen_bool(0.5)).collect();
        let ni = fc.inputs().len();
        out.push(TransitionSystem::from_ids(fc, init, |s, i, t| keep[(s * ni + i) * ns + t]));
    }
    out
}

/// Violations of the fixpoint, closure, reachability and equivalence
/// properties for one contract. Empty means all hold.
pub fn theorem_violations(g: &Generated, seed: u64) -> Vec<String> {
    let fc = g.finite();
    let name = &g.contract.name;
    let mut bad = Vec::new();
    let ns = fc.states().len();

    // (i) monotone decreasing iterates ending in a fixpoint
    let iterates = fc.viable_iterates();
    for w in iterates.windows(2) {
        if !subset(&w[1], &w[0]) || w[1] == w[0] {
            bad.push(format!("{name}: viable iterates not strictly decreasing"));
        }
    }
    if iterates.len() > ns + 1 {
        bad.push(format!("{name}: more than |S| fixpoint iterations"));
    }
    let v = iterates.last().unwrap().clone();

    // (ii) closure
    for s in (0..ns).filter(|&s| v[s]) {
        for i in 0..fc.inputs().len() {
            if fc.admissible(s, i) && !fc.successors(s, i).iter().any(|&t| v[t]) {
                bad.push(format!("{name}: viable state {s} has no viable successor on input {i}"));
            }
        }
    }

    // (iii) + (iv)
    let realizable = fc.check_realizable_oracle();
    match fc.witness_transition() {
        Some(ts) => {
            if !realizable || !fc.check_realization(&ts).holds() {
                bad.push(format!("{name}: witness does not realize a realizable contract"));
            }
        }
        None => {
            if realizable {
                bad.push(format!("{name}: realizable but no witness"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for ts in candidate_systems(&fc, &mut rng) {
        if fc.check_realization(&ts).holds() {
            if !subset(&fc.reachable_set(&ts), &v) {
                bad.push(format!("{name}: reachable state of a realization is not viable"));
            }
            if !realizable {
                bad.push(format!("{name}: realization exists but oracle says unrealizable"));
            }
        }
    }

    // (v)
    let ext_everywhere = |n: usize| fc.extendable_set(n).iter().all(|b| *b);
    for n in 0..=MAX_FV_DEPTH {
        let fv = fc.finitely_viable_set(n);
        if !subset(&v, &fv) {
            bad.push(format!("{name}: viable state not finitely viable at n={n}"));
        }
        let fv_initial = (0..ns).any(|s| fc.is_initial(s) && fv[s]);
        if fv_initial && ext_everywhere(n) && !realizable {
            bad.push(format!("{name}: exact algorithm claims realizable at n={n}"));
        }
    }
    bad
}

/// Replays a deadlock trace with the evaluator.
pub fn trace_replays(c: &realize::Contract, t: &Trace) -> bool {
    let ok = |r: Result<bool, _>| matches!(r, Ok(true));
    if !ok(holds_initial(c, t.state(0))) {
        return false;
    }
    for (j, step) in t.steps.iter().enumerate() {
        if !ok(holds_assumptions(c, &step.state, &step.input))
            || !ok(holds_transition(c, &step.state, &step.input, t.state(j + 1)))
        {
            return false;
        }
    }
    match &t.pending_input {
        Some(w) => ok(holds_assumptions(c, &t.final_state, w)),
        None => false,
    }
}

#[derive(Debug, Default)]
pub struct Agreement {
    pub total: usize,
    pub realizable: usize,
    pub unrealizable: usize,
    pub unknown: usize,
    /// Engine realizable, oracle not. Must stay zero.
    pub unsound: Vec<String>,
    /// Engine unrealizable, oracle realizable.
    pub false_positives: Vec<String>,
    /// No initial state reported but the oracle has one.
    pub bad_no_initial: Vec<String>,
    pub traces: usize,
    pub invalid_traces: Vec<String>,
    pub tool_errors: Vec<String>,
}

impl Agreement {
    pub fn disagreement_rate(&self) -> f64 {
        if self.unrealizable == 0 {
            0.0
        } else {
            self.false_positives.len() as f64 / self.unrealizable as f64
        }
    }
}

/// Runs the engine on the range-constrained version of every contract and
/// compares against the oracle.
pub fn agreement(corpus: &[Generated], opts: &CheckOptions) -> Agreement {
    let mut a = Agreement::default();
    for g in corpus {
        let fc = g.finite();
        let bounded = fc.bounded_contract();
        let oracle = fc.check_realizable_oracle();
        a.total += 1;
        let verdict = match check_realizability(&bounded, opts) {
            Ok(v) => v,
            Err(e) => {
                a.tool_errors.push(format!("{}: {e}", g.contract.name));
                continue;
            }
        };
        match &verdict.kind {
            VerdictKind::Realizable { .. } => {
                a.realizable += 1;
                if !oracle {
                    a.unsound.push(g.contract.name.clone());
                }
            }
            VerdictKind::Unrealizable { reason, trace } => {
                a.unrealizable += 1;
                if oracle {
                    a.false_positives.push(g.contract.name.clone());
                }
                if *reason == UnrealizableReason::NoInitialState
                    && (0..fc.states().len()).any(|s| fc.is_initial(s))
                {
                    a.bad_no_initial.push(g.contract.name.clone());
                }
                if let Some(t) = trace {
                    a.traces += 1;
                    if !trace_replays(&bounded, t) || !trace_replays(&g.contract, t) {
                        a.invalid_traces.push(g.contract.name.clone());
                    }
                }
            }
            VerdictKind::Unknown { .. } => a.unknown += 1,
        }
    }
    a
}
