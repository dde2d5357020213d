mod common;

use std::collections::BTreeMap;

use realize::contract::{Contract, Valuation, Value};
use realize::eval::{holds_assumptions, holds_initial, holds_transition};
use realize::oracle::{Domain, FiniteContract, Ranges, TransitionSystem};
use realize::load_contract;

fn ranges(entries: &[(&str, Domain)]) -> Ranges {
    entries.iter().map(|(k, d)| (k.to_string(), *d)).collect()
}

/// All valuations of the given variables, built by nested loops without
/// the oracle's indexing.
fn all_valuations(vars: &[(String, Domain)]) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for (name, dom) in vars {
        let values: Vec<Value> = match dom {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::IntRange(lo, hi) => (*lo..=*hi).map(Value::int).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|v| {
                values.iter().map(move |x| {
                    let mut v = v.clone();
                    v.insert(name.clone(), x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Direct recursive readings of the definitions, evaluated on valuations.
struct Brute<'a> {
    c: &'a Contract,
    states: Vec<Valuation>,
    inputs: Vec<Valuation>,
}

impl<'a> Brute<'a> {
    fn new(fc: &'a FiniteContract) -> Self {
        let c: &Contract = fc.contract();
        let pick = |decls: &[realize::contract::VarDecl]| -> Vec<(String, Domain)> {
            decls.iter().map(|d| (d.name.clone(), fc.ranges()[&d.name])).collect()
        };
        Brute {
            c,
            states: all_valuations(&pick(&c.states)),
            inputs: all_valuations(&pick(&c.inputs)),
        }
    }

    fn a(&self, s: &Valuation, i: &Valuation) -> bool {
        holds_assumptions(self.c, s, i).unwrap()
    }

    fn gt(&self, s: &Valuation, i: &Valuation, t: &Valuation) -> bool {
        holds_transition(self.c, s, i, t).unwrap()
    }

    fn fv(&self, n: usize, s: &Valuation) -> bool {
        n == 0
            || self.inputs.iter().all(|i| {
                !self.a(s, i) || self.states.iter().any(|t| self.gt(s, i, t) && self.fv(n - 1, t))
            })
    }

    fn ext(&self, n: usize, s: &Valuation) -> bool {
        if n == 0 {
            return self
                .inputs
                .iter()
                .all(|i| !self.a(s, i) || self.states.iter().any(|t| self.gt(s, i, t)));
        }
        self.inputs.iter().all(|i| {
            !self.a(s, i) || self.states.iter().all(|t| !self.gt(s, i, t) || self.ext(n - 1, t))
        })
    }

    /// Greatest fixpoint by repeated pruning.
    fn viable(&self) -> Vec<Valuation> {
        let mut v = self.states.clone();
        loop {
            let next: Vec<Valuation> = v
                .iter()
                .filter(|s| {
                    self.inputs
                        .iter()
                        .all(|i| !self.a(s, i) || v.iter().any(|t| self.gt(s, i, t)))
                })
                .cloned()
                .collect();
            if next.len() == v.len() {
                return v;
            }
            v = next;
        }
    }
}

#[test]
fn tables_match_direct_definitions() {
    let corpus = common::corpus();
    for g in corpus.iter().take(80) {
        let fc = g.finite();
        let b = Brute::new(&fc);
        let viable = b.viable();
        assert_eq!(fc.viable_valuations(), viable, "{}", g.contract.name);
        let realizable = viable.iter().any(|s| holds_initial(b.c, s).unwrap());
        assert_eq!(fc.check_realizable_oracle(), realizable, "{}", g.contract.name);
        for n in 0..=2 {
            for s in &b.states {
                assert_eq!(fc.finitely_viable(n, s), Some(b.fv(n, s)), "FV {n} {}", g.contract.name);
                assert_eq!(fc.extendable(n, s), Some(b.ext(n, s)), "EXT {n} {}", g.contract.name);
            }
        }
    }
}

#[test]
fn theorem_properties_on_corpus() {
    let corpus = common::corpus();
    let mut bad = Vec::new();
    for (k, g) in corpus.iter().enumerate() {
        bad.extend(common::props::theorem_violations(g, k as u64));
    }
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn corpus_has_both_outcomes() {
    let corpus = common::corpus();
    let realizable = corpus.iter().filter(|g| g.finite().check_realizable_oracle()).count();
    assert!(realizable >= 20, "{realizable}");
    assert!(corpus.len() - realizable >= 20, "{realizable}");
}

fn doubler(fixed: bool, input: (i64, i64)) -> FiniteContract {
    let name = if fixed { "doubler_fixed.ctr" } else { "doubler.ctr" };
    let c = common::load_file(name);
    FiniteContract::new(
        &c,
        ranges(&[
            ("in", Domain::IntRange(input.0, input.1)),
            ("out", Domain::IntRange(-4, 4)),
        ]),
    )
    .unwrap()
}

#[test]
fn doubler_deadlocks_on_negative_input_everywhere() {
    let fc = doubler(false, (-4, 4));
    let minus_one: Valuation = BTreeMap::from([("in".to_string(), Value::int(-1))]);
    let i = fc.inputs().id(&minus_one).unwrap();
    for s in 0..fc.states().len() {
        assert!(fc.successors(s, i).is_empty());
    }
    assert!(fc.viable_set().iter().all(|b| !b));
    assert!(!fc.check_realizable_oracle());
}

#[test]
fn fixed_doubler_values() {
    // Every initial state is one-step extendable when in >= 0, as long as
    // 2 * in stays inside out's range.
    let small = doubler(true, (0, 2));
    assert!(small.extendable_set(0).iter().all(|b| *b));
    assert!(small.finitely_viable_set(2).iter().all(|b| *b));
    assert!(small.check_realizable_oracle());
    let ts = small.witness_transition().unwrap();
    let init: Vec<usize> = (0..9).filter(|&s| ts.initial()[s]).collect();
    assert_eq!(init, vec![0]);
    assert_eq!(small.states().valuation(0)["out"], Value::int(-4));

    let wide = doubler(true, (-4, 4));
    assert!(!wide.check_realizable_oracle());
}

#[test]
fn false_positive_oracle_side() {
    let c = common::load_file("false_positive.ctr");
    let fc = FiniteContract::new(
        &c,
        ranges(&[("d", Domain::Bool), ("x", Domain::IntRange(0, 1))]),
    )
    .unwrap();
    assert_eq!(fc.viable_set(), vec![true, false]);
    assert!(fc.check_realizable_oracle());
    let x1 = fc.states().valuation(1);
    assert_eq!(fc.extendable(0, &x1), Some(false));
}

#[test]
fn two_step_deadlocks_after_one_step() {
    let c = common::load_file("two_step.ctr");
    let fc = FiniteContract::new(
        &c,
        ranges(&[("tick", Domain::Bool), ("x", Domain::IntRange(-1, 3))]),
    )
    .unwrap();
    let x = |v: i64| fc.states().id(&BTreeMap::from([("x".to_string(), Value::int(v))])).unwrap();
    let fv1 = fc.finitely_viable_set(1);
    let fv2 = fc.finitely_viable_set(2);
    assert!(fv1[x(0)] && !fv2[x(0)]);
    assert!(!fc.check_realizable_oracle());
}

#[test]
fn initial_states_are_reachable_without_predecessors() {
    let c = load_contract("contract c state: x : int; transitions: x' = x; end").unwrap();
    let fc = FiniteContract::new(&c, ranges(&[("x", Domain::IntRange(0, 2))])).unwrap();
    let ts = TransitionSystem::from_ids(&fc, vec![false, false, true], |s, _, t| s == t && s < 2);
    assert_eq!(fc.reachable_set(&ts), vec![false, false, true]);
    let empty = TransitionSystem::from_ids(&fc, vec![false; 3], |_, _, _| true);
    assert_eq!(fc.reachable_set(&empty), vec![false; 3]);
    let report = fc.check_realization(&empty);
    assert!(!report.conditions[2]);
}

#[test]
fn assumptions_limit_reachability() {
    let c = load_contract(
        "contract c inputs: go : bool; state: x : int; assumptions: not go; transitions: true; end",
    )
    .unwrap();
    let fc = FiniteContract::new(
        &c,
        ranges(&[("go", Domain::Bool), ("x", Domain::IntRange(0, 1))]),
    )
    .unwrap();
    // Steps only exist on go = true, which the assumptions rule out.
    let ts = TransitionSystem::from_predicates(
        &fc,
        |s| s["x"] == Value::int(0),
        |s, i, t| i["go"] == Value::Bool(true) && s["x"] == Value::int(0) && t["x"] == Value::int(1),
    );
    assert_eq!(fc.reachable_set(&ts), vec![true, false]);
    assert!(!fc.check_realization(&ts).conditions[3]);
}
