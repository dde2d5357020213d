use crate::contract::{Contract, Trace, TraceStep, Valuation, VarDecl};
use crate::encoder::{input_prefix, state_prefix, PENDING_PREFIX};
use crate::eval::{holds_assumptions, holds_initial, holds_transition};
use crate::solver::Model;

use super::ToolError;

fn valuation(model: &Model, prefix: &str, decls: &[VarDecl]) -> Result<Valuation, ToolError> {
    decls
        .iter()
        .map(|d| {
            let key = format!("{prefix}{}", d.name);
            match model.get(&key) {
                Some(v) if v.sort() == d.sort => Ok((d.name.clone(), v.clone())),
                Some(v) => Err(ToolError::TraceReconstruction(format!(
                    "{key} has a {} value, expected {}",
                    v.sort(),
                    d.sort
                ))),
                None => Err(ToolError::TraceReconstruction(format!("no value for {key}"))),
            }
        })
        .collect()
}

/// Rebuilds the deadlocking path from a satisfying `BaseCheck'(k)` model and
/// replays it: `G_I` on the first state, `A` and `G_T` on every step, and
/// `A` on the pending input. The deadlock itself is taken from the solver.
pub fn build_counterexample(model: &Model, c: &Contract, k: usize) -> Result<Trace, ToolError> {
    let mut states = Vec::with_capacity(k + 1);
    for j in 0..=k {
        states.push(valuation(model, &state_prefix(j), &c.states)?);
    }
    let mut inputs = Vec::with_capacity(k);
    for j in 0..k {
        inputs.push(valuation(model, &input_prefix(j), &c.inputs)?);
    }
    let pending = valuation(model, PENDING_PREFIX, &c.inputs)?;

    let fail = |what: String| ToolError::TraceReconstruction(what);
    let check = |ok: Result<bool, crate::eval::EvalError>, what: &dyn Fn() -> String| match ok {
        Ok(true) => Ok(()),
        Ok(false) => Err(fail(format!("{} does not hold", what()))),
        Err(e) => Err(fail(format!("{}: {e}", what()))),
    };

    check(holds_initial(c, &states[0]), &|| "initial guarantee on step 0".into())?;
    for j in 0..k {
        check(holds_assumptions(c, &states[j], &inputs[j]), &|| {
            format!("assumption on step {j}")
        })?;
        check(holds_transition(c, &states[j], &inputs[j], &states[j + 1]), &|| {
            format!("transitional guarantee on step {j}")
        })?;
    }
    check(holds_assumptions(c, &states[k], &pending), &|| {
        "assumption on the pending input".into()
    })?;

    let final_state = states.pop().expect("k + 1 states");
    let steps = states
        .into_iter()
        .zip(inputs)
        .map(|(state, input)| TraceStep { state, input })
        .collect();
    Ok(Trace {
        steps,
        pending_input: Some(pending),
        final_state,
    })
}
