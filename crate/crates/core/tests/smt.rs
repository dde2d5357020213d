mod common;

use std::path::Path;
use std::time::Duration;

use realize::encoder::{encode, QueryKind, SmtScript};
use realize::load_contract;
use realize::solver::{run_query, SatStatus, SolverCommand, SolverResult};
use realize::Value;

fn solve(script: &SmtScript) -> Option<SolverResult> {
    if !common::solver_available() {
        eprintln!("skipping: no SMT solver available");
        return None;
    }
    let solver = SolverCommand::from_env().unwrap();
    Some(run_query(script, &solver, Duration::from_secs(20)).unwrap())
}

fn status(c: &realize::TypedContract, kind: QueryKind) -> Option<SatStatus> {
    solve(&encode(c, kind)).map(|r| r.status)
}

fn with_initial(text: &str) -> realize::TypedContract {
    load_contract(&format!(
        "contract c state: x : int; initial: {text}; transitions: x' = x; end"
    ))
    .unwrap()
}

#[test]
fn golden_scripts() {
    let c = common::load_file("doubler.ctr");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut kinds = vec![QueryKind::InitialSat];
    for n in 0..=1 {
        kinds.extend([
            QueryKind::BaseCheckPrime(n),
            QueryKind::ExactBaseCheck(n),
            QueryKind::ExtendCheck(n),
        ]);
    }
    for kind in kinds {
        let expected = std::fs::read_to_string(dir.join(kind.file_name("doubler"))).unwrap();
        assert_eq!(encode(&c, kind).text, expected, "{kind}");
    }
}

#[test]
fn initial_sat_examples() {
    let Some(s) = status(&common::load_file("doubler.ctr"), QueryKind::InitialSat) else { return };
    assert_eq!(s, SatStatus::Sat);
    assert_eq!(
        status(&with_initial("x > 0 and x < 0"), QueryKind::InitialSat),
        Some(SatStatus::Unsat)
    );
    let r = solve(&encode(&with_initial("x = 0 or x = 1"), QueryKind::InitialSat)).unwrap();
    assert_eq!(r.status, SatStatus::Sat);
    let x = &r.model.unwrap().values["s0$x"];
    assert!(*x == Value::int(0) || *x == Value::int(1));
}

#[test]
fn base_check_examples() {
    let doubler = common::load_file("doubler.ctr");
    let Some(r) = solve(&encode(&doubler, QueryKind::BaseCheckPrime(0))) else { return };
    assert_eq!(r.status, SatStatus::Sat);
    let Value::Int(w) = &r.model.unwrap().values["w$in"] else { panic!() };
    assert!(w < &0.into());

    let fixed = common::load_file("doubler_fixed.ctr");
    assert_eq!(status(&fixed, QueryKind::BaseCheckPrime(0)), Some(SatStatus::Unsat));
    let never = with_initial("false");
    for k in 0..3 {
        assert_eq!(status(&never, QueryKind::BaseCheckPrime(k)), Some(SatStatus::Unsat));
    }
}

#[test]
fn extend_check_examples() {
    let fixed = common::load_file("doubler_fixed.ctr");
    let Some(s) = status(&fixed, QueryKind::ExtendCheck(0)) else { return };
    assert_eq!(s, SatStatus::Unsat);
    let doubler = common::load_file("doubler.ctr");
    assert_eq!(status(&doubler, QueryKind::ExtendCheck(0)), Some(SatStatus::Sat));
    let free = load_contract("contract c inputs: i : int; state: x : int; end").unwrap();
    for n in 0..3 {
        assert_eq!(status(&free, QueryKind::ExtendCheck(n)), Some(SatStatus::Unsat));
    }
}

#[test]
fn exact_base_check_examples() {
    let doubler = common::load_file("doubler.ctr");
    let Some(s) = status(&doubler, QueryKind::ExactBaseCheck(0)) else { return };
    assert_eq!(s, SatStatus::Unsat);
    assert_eq!(status(&doubler, QueryKind::ExactBaseCheck(1)), Some(SatStatus::Sat));
    let fixed = common::load_file("doubler_fixed.ctr");
    assert_eq!(status(&fixed, QueryKind::ExactBaseCheck(2)), Some(SatStatus::Unsat));
}

#[test]
fn base_check_models_are_valid_paths() {
    let corpus = common::corpus();
    let mut checked = 0;
    for g in corpus.iter().take(60) {
        for k in 0..=2 {
            let script = encode(&g.contract, QueryKind::BaseCheckPrime(k));
            let Some(r) = solve(&script) else { return };
            if r.status != SatStatus::Sat {
                continue;
            }
            let model = r.model.unwrap();
            let trace = realize::engine::build_counterexample(&model.values, &g.contract, k)
                .unwrap_or_else(|e| panic!("{}: {e}", g.contract.name));
            assert!(common::props::trace_replays(&g.contract, &trace));
            checked += 1;
        }
    }
    if common::solver_available() {
        assert!(checked > 20, "{checked}");
    }
}

#[test]
fn solver_accepts_every_script_kind() {
    let corpus = common::corpus();
    for g in corpus.iter().take(30) {
        for kind in [
            QueryKind::InitialSat,
            QueryKind::BaseCheckPrime(2),
            QueryKind::ExtendCheck(2),
            QueryKind::ExactBaseCheck(1),
        ] {
            let script = encode(&g.contract, kind);
            assert!(script.text.ends_with("(check-sat)\n(get-model)\n"));
            // Any `(error ...)` before the status line is a protocol error.
            if solve(&script).is_none() {
                return;
            }
        }
    }
}

#[test]
fn scripts_are_deterministic() {
    for g in common::corpus().iter().take(50) {
        for n in 0..=3 {
            for kind in [
                QueryKind::BaseCheckPrime(n),
                QueryKind::ExactBaseCheck(n),
                QueryKind::ExtendCheck(n),
            ] {
                assert_eq!(encode(&g.contract, kind), encode(&g.contract, kind));
            }
        }
    }
}

#[test]
fn model_vars_cover_declarations() {
    let c = common::load_file("two_step.ctr");
    let s = encode(&c, QueryKind::ExtendCheck(2));
    let declared = s.text.matches("(declare-const ").count();
    assert_eq!(declared, s.model_vars.len());
    assert_eq!(declared, 3 + 2 + 1);
}
