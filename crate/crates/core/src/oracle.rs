//! Explicit-state semantics over finite variable ranges.
//!
//! Every state and input valuation is enumerated, so viability,
//! reachability and the realization conditions are computed directly from
//! their definitions. This is the ground truth the SMT engine is tested
//! against; it is only practical for small domains.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;

use crate::contract::{CmpOp, Contract, Expr, Sort, Valuation, Value, VarDecl, VarTag};
use crate::eval::{holds_assumptions, holds_initial, holds_transition, EvalError};
use crate::typecheck::{typecheck, TypedContract};

/// Largest state or input space the oracle will enumerate.
pub const MAX_SPACE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Bool,
    /// Inclusive bounds.
    IntRange(i64, i64),
}

impl Domain {
    fn size(self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::IntRange(lo, hi) => (hi as i128 - lo as i128 + 1).max(0) as u64,
        }
    }

    fn value(self, k: u64) -> Value {
        match self {
            Domain::Bool => Value::Bool(k == 1),
            Domain::IntRange(lo, _) => Value::Int(BigInt::from(lo as i128 + k as i128)),
        }
    }

    fn position(self, v: &Value) -> Option<u64> {
        match (self, v) {
            (Domain::Bool, Value::Bool(b)) => Some(*b as u64),
            (Domain::IntRange(lo, hi), Value::Int(x)) => {
                let x = i64::try_from(x).ok()?;
                (lo..=hi).contains(&x).then(|| (x as i128 - lo as i128) as u64)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::IntRange(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

pub type Ranges = BTreeMap<String, Domain>;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("no range given for variable `{0}`")]
    MissingRange(String),
    #[error("range given for undeclared variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is real; the oracle only handles bool and int variables")]
    RealVariable(String),
    #[error("range for `{var}` does not match its sort {sort}")]
    RangeSort { var: String, sort: Sort },
    #[error("range for `{0}` is empty")]
    EmptyRange(String),
    #[error("{what} space has {size} elements (limit {MAX_SPACE})")]
    DomainTooLarge { what: &'static str, size: u128 },
    #[error("line {line}: {message}")]
    RangeSyntax { line: usize, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Parses one `var lo hi` or `var bool` entry per line. Blank lines and
/// text after `--` or `#` are ignored.
pub fn parse_ranges(text: &str) -> Result<Ranges, OracleError> {
    let mut out = Ranges::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split("--").next().unwrap_or("");
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| OracleError::RangeSyntax {
            line: idx + 1,
            message,
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let domain = match parts.as_slice() {
            [_, "bool"] => Domain::Bool,
            [_, lo, hi] => Domain::IntRange(
                lo.parse().map_err(|_| err(format!("bad lower bound `{lo}`")))?,
                hi.parse().map_err(|_| err(format!("bad upper bound `{hi}`")))?,
            ),
            _ => return Err(err(format!("expected `var lo hi` or `var bool`, got `{line}`"))),
        };
        out.insert(parts[0].to_string(), domain);
    }
    Ok(out)
}

/// Parses `var=lo..hi` or `var=bool`.
pub fn parse_range_arg(arg: &str) -> Result<(String, Domain), String> {
    let (var, dom) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected var=lo..hi or var=bool, got `{arg}`"))?;
    let var = var.trim();
    if var.is_empty() {
        return Err(format!("missing variable name in `{arg}`"));
    }
    let dom = dom.trim();
    if dom == "bool" {
        return Ok((var.to_string(), Domain::Bool));
    }
    let (lo, hi) = dom
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got `{dom}`"))?;
    let lo = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    Ok((var.to_string(), Domain::IntRange(lo, hi)))
}

/// Mixed-radix enumeration of valuations. Variables are ordered by name
/// and the first one is most significant, so ids follow lexicographic
/// order on values.
#[derive(Debug, Clone)]
pub struct Space {
    vars: Vec<(String, Domain)>,
    size: usize,
}

impl Space {
    fn new(
        decls: &[VarDecl],
        ranges: &Ranges,
        what: &'static str,
    ) -> Result<Self, OracleError> {
        let mut vars = Vec::new();
        for d in decls {
            let dom = *ranges
                .get(&d.name)
                .ok_or_else(|| OracleError::MissingRange(d.name.clone()))?;
            match (d.sort, dom) {
                (Sort::Real, _) => return Err(OracleError::RealVariable(d.name.clone())),
                (Sort::Bool, Domain::Bool) | (Sort::Int, Domain::IntRange(..)) => {}
                (sort, _) => {
                    return Err(OracleError::RangeSort {
                        var: d.name.clone(),
                        sort,
                    })
                }
            }
            if dom.size() == 0 {
                return Err(OracleError::EmptyRange(d.name.clone()));
            }
            vars.push((d.name.clone(), dom));
        }
        vars.sort_by(|a, b| a.0.cmp(&b.0));
        let size = vars
            .iter()
            .fold(1u128, |acc, (_, d)| acc.saturating_mul(d.size() as u128));
        if size > MAX_SPACE as u128 {
            return Err(OracleError::DomainTooLarge { what, size });
        }
        Ok(Space {
            vars,
            size: size as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn valuation(&self, mut id: usize) -> Valuation {
        let mut out = Valuation::new();
        for (name, dom) in self.vars.iter().rev() {
            let radix = dom.size() as usize;
            out.insert(name.clone(), dom.value((id % radix) as u64));
            id /= radix;
        }
        out
    }

    /// Id of a valuation, or `None` if it lies outside the ranges.
    pub fn id(&self, v: &Valuation) -> Option<usize> {
        let mut id = 0usize;
        for (name, dom) in &self.vars {
            id = id * dom.size() as usize + dom.position(v.get(name)?)? as usize;
        }
        Some(id)
    }
}

/// A contract together with a finite range for every variable, plus the
/// precomputed predicate tables.
#[derive(Debug, Clone)]
pub struct FiniteContract {
    contract: TypedContract,
    ranges: Ranges,
    states: Space,
    inputs: Space,
    initial: Vec<bool>,
    /// `A(s, i)` at `s * |I| + i`.
    admissible: Vec<bool>,
    /// `{s' | G_T(s, i, s')}` at `s * |I| + i`, filled only where `A` holds.
    successors: Vec<Vec<usize>>,
}

/// Set of state ids as a membership vector.
pub type StateSet = Vec<bool>;

fn count(set: &[bool]) -> usize {
    set.iter().filter(|b| **b).count()
}

impl FiniteContract {
    pub fn new(contract: &TypedContract, ranges: Ranges) -> Result<Self, OracleError> {
        for name in ranges.keys() {
            if contract.input(name).is_none() && contract.state(name).is_none() {
                return Err(OracleError::UnknownVariable(name.clone()));
            }
        }
        let states = Space::new(&contract.states, &ranges, "state")?;
        let inputs = Space::new(&contract.inputs, &ranges, "input")?;
        let c: &Contract = contract;
        let svals: Vec<Valuation> = (0..states.len()).map(|s| states.valuation(s)).collect();
        let ivals: Vec<Valuation> = (0..inputs.len()).map(|i| inputs.valuation(i)).collect();

        let mut initial = Vec::with_capacity(svals.len());
        for s in &svals {
            initial.push(holds_initial(c, s)?);
        }
        let mut admissible = Vec::with_capacity(svals.len() * ivals.len());
        let mut successors = Vec::with_capacity(svals.len() * ivals.len());
        for s in &svals {
            for i in &ivals {
                let a = holds_assumptions(c, s, i)?;
                admissible.push(a);
                let mut next = Vec::new();
                if a {
                    for (t, sv) in svals.iter().enumerate() {
                        if holds_transition(c, s, i, sv)? {
                            next.push(t);
                        }
                    }
                }
                successors.push(next);
            }
        }
        Ok(FiniteContract {
            contract: contract.clone(),
            ranges,
            states,
            inputs,
            initial,
            admissible,
            successors,
        })
    }

    pub fn contract(&self) -> &TypedContract {
        &self.contract
    }

    pub fn ranges(&self) -> &Ranges {
        &self.ranges
    }

    pub fn states(&self) -> &Space {
        &self.states
    }

    pub fn inputs(&self) -> &Space {
        &self.inputs
    }

    pub fn is_initial(&self, s: usize) -> bool {
        self.initial[s]
    }

    pub fn admissible(&self, s: usize, i: usize) -> bool {
        self.admissible[s * self.inputs.len() + i]
    }

    /// Post-states allowed by `G_T`; empty when `A(s, i)` is false.
    pub fn successors(&self, s: usize, i: usize) -> &[usize] {
        &self.successors[s * self.inputs.len() + i]
    }

    /// `G_T(s, i, s')` for an admissible pair.
    fn guarantees(&self, s: usize, i: usize, next: usize) -> bool {
        self.successors(s, i).binary_search(&next).is_ok()
    }

    fn admissible_inputs(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.inputs.len()).filter(move |&i| self.admissible(s, i))
    }

    /// The contract with every range turned into constraints: input and
    /// pre-state ranges join the assumptions, the state range joins the
    /// initial guarantees and the post-state range joins the transitional
    /// guarantees. Its realizability over unbounded domains matches the
    /// oracle's answer for this finite contract.
    pub fn bounded_contract(&self) -> TypedContract {
        let mut c: Contract = self.contract.contract().clone();
        let range = |name: &str, tag: VarTag| -> Option<Expr> {
            match self.ranges.get(name)? {
                Domain::Bool => None,
                Domain::IntRange(lo, hi) => Some(Expr::and(vec![
                    Expr::cmp(CmpOp::Le, Expr::int(*lo), Expr::var(name, tag)),
                    Expr::cmp(CmpOp::Le, Expr::var(name, tag), Expr::int(*hi)),
                ])),
            }
        };
        let inputs: Vec<String> = c.inputs.iter().map(|d| d.name.clone()).collect();
        let states: Vec<String> = c.states.iter().map(|d| d.name.clone()).collect();
        for name in &inputs {
            c.assumptions.extend(range(name, VarTag::Input));
        }
        for name in &states {
            c.assumptions.extend(range(name, VarTag::PreState));
            c.initial_guarantees.extend(range(name, VarTag::PreState));
            c.transitional_guarantees.extend(range(name, VarTag::PostState));
        }
        typecheck(&c).expect("range constraints are well typed")
    }

    /// `V_0 ⊇ V_1 ⊇ ...` up to and including the fixpoint.
    pub fn viable_iterates(&self) -> Vec<StateSet> {
        let mut current = vec![true; self.states.len()];
        let mut out = vec![current.clone()];
        loop {
            let next: StateSet = (0..self.states.len())
                .map(|s| {
                    current[s]
                        && self
                            .admissible_inputs(s)
                            .all(|i| self.successors(s, i).iter().any(|&t| current[t]))
                })
                .collect();
            if next == current {
                return out;
            }
            out.push(next.clone());
            current = next;
        }
    }

    /// Greatest fixpoint: states from which `G_T` can be kept forever under
    /// every admissible input.
    pub fn viable_set(&self) -> StateSet {
        self.viable_iterates().pop().expect("at least V_0")
    }

    pub fn viable_valuations(&self) -> Vec<Valuation> {
        self.members(&self.viable_set())
    }

    pub fn members(&self, set: &[bool]) -> Vec<Valuation> {
        (0..set.len())
            .filter(|&s| set[s])
            .map(|s| self.states.valuation(s))
            .collect()
    }

    /// `∃ s. G_I(s) ∧ viable(s)`.
    pub fn check_realizable_oracle(&self) -> bool {
        let v = self.viable_set();
        (0..v.len()).any(|s| v[s] && self.initial[s])
    }

    /// States satisfying the initial guarantees.
    pub fn initial_states(&self) -> StateSet {
        self.initial.clone()
    }

    /// `FV_n` for every state: `G_T` can be kept for `n` more steps.
    pub fn finitely_viable_set(&self, n: usize) -> StateSet {
        let mut fv = vec![true; self.states.len()];
        for _ in 0..n {
            fv = (0..self.states.len())
                .map(|s| {
                    self.admissible_inputs(s)
                        .all(|i| self.successors(s, i).iter().any(|&t| fv[t]))
                })
                .collect();
        }
        fv
    }

    /// `EXT_n` for every state: every valid `n`-path from the state can take
    /// one more step under any admissible input.
    pub fn extendable_set(&self, n: usize) -> StateSet {
        let mut ext: StateSet = (0..self.states.len())
            .map(|s| {
                self.admissible_inputs(s)
                    .all(|i| !self.successors(s, i).is_empty())
            })
            .collect();
        for _ in 0..n {
            ext = (0..self.states.len())
                .map(|s| {
                    self.admissible_inputs(s)
                        .all(|i| self.successors(s, i).iter().all(|&t| ext[t]))
                })
                .collect();
        }
        ext
    }

    pub fn finitely_viable(&self, n: usize, s: &Valuation) -> Option<bool> {
        let id = self.states.id(s)?;
        Some(self.finitely_viable_set(n)[id])
    }

    pub fn extendable(&self, n: usize, s: &Valuation) -> Option<bool> {
        let id = self.states.id(s)?;
        Some(self.extendable_set(n)[id])
    }

    /// Least fixpoint from the initial states of `ts`, following
    /// `A`-admissible `T` steps. Initial states are always included.
    pub fn reachable_set(&self, ts: &TransitionSystem) -> StateSet {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        for (s, &init) in ts.initial.iter().enumerate() {
            if init {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for i in self.admissible_inputs(s) {
                for &t in ts.next(s, i) {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// Evaluates the four realization conditions for `ts`.
    pub fn check_realization(&self, ts: &TransitionSystem) -> RealizationReport {
        let reach = self.reachable_set(ts);
        let n = self.states.len();
        let initial_ok = (0..n).all(|s| !ts.initial[s] || self.initial[s]);
        let guarantees_ok = (0..n).filter(|&s| reach[s]).all(|s| {
            self.admissible_inputs(s)
                .all(|i| ts.next(s, i).iter().all(|&t| self.guarantees(s, i, t)))
        });
        let nonempty = ts.initial.iter().any(|b| *b);
        let total = (0..n)
            .filter(|&s| reach[s])
            .all(|s| self.admissible_inputs(s).all(|i| !ts.next(s, i).is_empty()));
        RealizationReport {
            conditions: [initial_ok, guarantees_ok, nonempty, total],
        }
    }

    /// The standard witness: start only in the least viable initial state
    /// and take exactly the `G_T` steps that stay viable. `None` when the
    /// contract is not realizable.
    pub fn witness_transition(&self) -> Option<TransitionSystem> {
        let v = self.viable_set();
        let s0 = (0..v.len()).find(|&s| v[s] && self.initial[s])?;
        let mut initial = vec![false; self.states.len()];
        initial[s0] = true;
        Some(TransitionSystem::from_ids(self, initial, |s, i, t| {
            self.guarantees(s, i, t) && v[t]
        }))
    }
}

/// A finite transition system `(I, T)` over a contract's state and input
/// spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    initial: Vec<bool>,
    inputs: usize,
    /// Successor ids at `s * |I| + i`, ascending.
    next: Vec<Vec<usize>>,
}

impl TransitionSystem {
    /// Tabulates `I` and `T`. `T` is queried for every triple, including
    /// pairs the assumptions exclude.
    pub fn from_predicates(
        fc: &FiniteContract,
        initial: impl Fn(&Valuation) -> bool,
        transition: impl Fn(&Valuation, &Valuation, &Valuation) -> bool,
    ) -> Self {
        let svals: Vec<Valuation> = (0..fc.states.len()).map(|s| fc.states.valuation(s)).collect();
        let ivals: Vec<Valuation> = (0..fc.inputs.len()).map(|i| fc.inputs.valuation(i)).collect();
        let init = svals.iter().map(&initial).collect();
        Self::from_ids(fc, init, |s, i, t| transition(&svals[s], &ivals[i], &svals[t]))
    }

    /// Same as [`from_predicates`](Self::from_predicates) over state and
    /// input ids.
    pub fn from_ids(
        fc: &FiniteContract,
        initial: Vec<bool>,
        transition: impl Fn(usize, usize, usize) -> bool,
    ) -> Self {
        let (ns, ni) = (fc.states.len(), fc.inputs.len());
        assert_eq!(initial.len(), ns, "initial set must cover every state");
        let mut next = Vec::with_capacity(ns * ni);
        for s in 0..ns {
            for i in 0..ni {
                next.push((0..ns).filter(|&t| transition(s, i, t)).collect());
            }
        }
        TransitionSystem {
            initial,
            inputs: ni,
            next,
        }
    }

    pub fn initial(&self) -> &[bool] {
        &self.initial
    }

    pub fn next(&self, s: usize, i: usize) -> &[usize] {
        &self.next[s * self.inputs + i]
    }
}

/// Outcome of each realization condition, in order:
/// 1. every initial state satisfies `G_I`;
/// 2. every reachable admissible step of `T` satisfies `G_T`;
/// 3. some initial state exists;
/// 4. every reachable state has a `T` step for each admissible input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealizationReport {
    pub conditions: [bool; 4],
}

impl RealizationReport {
    pub fn holds(&self) -> bool {
        self.conditions.iter().all(|c| *c)
    }
}

/// Summary used by the command line `oracle` mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSummary {
    pub realizable: bool,
    pub states: usize,
    pub inputs: usize,
    pub initial: usize,
    pub viable: usize,
    pub fixpoint_iterations: usize,
    /// Least state in `G_I ∩ V*`.
    pub witness_initial: Option<Valuation>,
}

impl FiniteContract {
    pub fn summary(&self) -> OracleSummary {
        let iterates = self.viable_iterates();
        let v = iterates.last().expect("at least V_0");
        let s0 = (0..v.len()).find(|&s| v[s] && self.initial[s]);
        OracleSummary {
            realizable: s0.is_some(),
            states: self.states.len(),
            inputs: self.inputs.len(),
            initial: count(&self.initial),
            viable: count(v),
            fixpoint_iterations: iterates.len() - 1,
            witness_initial: s0.map(|s| self.states.valuation(s)),
        }
    }
}
