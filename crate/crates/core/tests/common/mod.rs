#![allow(dead_code)]

pub mod props;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use realize::contract::{ArithOp, CmpOp, Contract, Expr, Sort, VarDecl, VarTag};
use realize::oracle::{Domain, FiniteContract, Ranges};
use realize::{typecheck, TypedContract};

pub const CORPUS_SEED: u64 = 0x5eed_2024;
pub const CORPUS_SIZE: usize = 240;

pub struct Generated {
    pub contract: TypedContract,
    pub ranges: Ranges,
}

impl Generated {
    pub fn finite(&self) -> FiniteContract {
        FiniteContract::new(&self.contract, self.ranges.clone()).expect("generated ranges are valid")
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    c: &'a Contract,
    reals: bool,
}

impl Gen<'_> {
    fn vars(&self, sort: Sort, tags: &[VarTag]) -> Vec<Expr> {
        let mut out = Vec::new();
        for &tag in tags {
            let decls = if tag == VarTag::Input { &self.c.inputs } else { &self.c.states };
            for d in decls.iter().filter(|d| d.sort == sort) {
                out.push(Expr::var(&d.name, tag));
            }
        }
        out
    }

    fn num(&mut self, sort: Sort, tags: &[VarTag], depth: u32) -> Expr {
        let vars = self.vars(sort, tags);
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        if leaf {
            if !vars.is_empty() && self.rng.gen_bool(0.7) {
                return vars.choose(self.rng).unwrap().clone();
            }
            return self.literal(sort);
        }
        match self.rng.gen_range(0..6) {
            0 => Expr::arith(
                ArithOp::Add,
                vec![self.num(sort, tags, depth - 1), self.num(sort, tags, depth - 1)],
            ),
            1 => Expr::arith(
                ArithOp::Sub,
                vec![self.num(sort, tags, depth - 1), self.num(sort, tags, depth - 1)],
            ),
            2 => Expr::arith(
                ArithOp::Mul,
                vec![self.literal(sort), self.num(sort, tags, depth - 1)],
            ),
            3 if sort == Sort::Int => {
                let op = if self.rng.gen_bool(0.5) { ArithOp::Div } else { ArithOp::Mod };
                let d = *[-2, 2, 3].choose(self.rng).unwrap();
                Expr::arith(op, vec![self.num(sort, tags, depth - 1), Expr::int(d)])
            }
            4 => Expr::ite(
                self.formula(tags, depth - 1),
                self.num(sort, tags, depth - 1),
                self.num(sort, tags, depth - 1),
            ),
            _ => Expr::arith(ArithOp::Neg, vec![self.num(sort, tags, depth - 1)]),
        }
    }

    fn literal(&mut self, sort: Sort) -> Expr {
        match sort {
            Sort::Int => Expr::int(self.rng.gen_range(-2..=2)),
            Sort::Real => {
                let d = *[1, 2, 4, 5].choose(self.rng).unwrap();
                Expr::real(self.rng.gen_range(-9..=9), d)
            }
            Sort::Bool => Expr::bool(self.rng.gen_bool(0.5)),
        }
    }

    fn atom(&mut self, tags: &[VarTag], depth: u32) -> Expr {
        let bools = self.vars(Sort::Bool, tags);
        let mut sorts = vec![];
        if !self.vars(Sort::Int, tags).is_empty() {
            sorts.push(Sort::Int);
        }
        if self.reals && !self.vars(Sort::Real, tags).is_empty() {
            sorts.push(Sort::Real);
        }
        if !bools.is_empty() && (sorts.is_empty() || self.rng.gen_bool(0.35)) {
            return bools.choose(self.rng).unwrap().clone();
        }
        let sort = sorts.choose(self.rng).copied().unwrap_or(Sort::Int);
        let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
        let op = *ops.choose(self.rng).unwrap();
        let a = self.num(sort, tags, depth.min(2));
        let b = self.num(sort, tags, depth.min(1));
        Expr::cmp(op, a, b)
    }

    fn formula(&mut self, tags: &[VarTag], depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.45) {
            return if self.rng.gen_bool(0.05) {
                self.literal(Sort::Bool)
            } else {
                self.atom(tags, depth)
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..5) {
            0 => Expr::not(self.formula(tags, d)),
            1 => Expr::and(vec![self.formula(tags, d), self.formula(tags, d)]),
            2 => Expr::or(vec![self.formula(tags, d), self.formula(tags, d)]),
            3 => Expr::implies(self.formula(tags, d), self.formula(tags, d)),
            _ => Expr::cmp(CmpOp::Eq, self.formula(tags, d), self.formula(tags, d)),
        }
    }
}

fn random_decls(rng: &mut ChaCha8Rng, reals: bool) -> (Vec<VarDecl>, Vec<VarDecl>) {
    let total = rng.gen_range(1..=3);
    let n_states = rng.gen_range(1..=total);
    let mut inputs = Vec::new();
    let mut states = Vec::new();
    for k in 0..total {
        let sort = if reals && rng.gen_bool(0.2) {
            Sort::Real
        } else if rng.gen_bool(0.4) {
            Sort::Bool
        } else {
            Sort::Int
        };
        if k < n_states {
            states.push(VarDecl::new(&format!("s{k}"), sort));
        } else {
            inputs.push(VarDecl::new(&format!("i{k}"), sort));
        }
    }
    (inputs, states)
}

fn fill_sections(rng: &mut ChaCha8Rng, c: &mut Contract, reals: bool) {
    use VarTag::*;
    let n_assume = rng.gen_range(0..=1);
    let n_init = rng.gen_range(0..=2);
    let n_trans = rng.gen_range(1..=2);
    let mut assumptions = Vec::new();
    let mut initial = Vec::new();
    let mut transitions = Vec::new();
    {
        let mut g = Gen { rng, c, reals };
        for _ in 0..n_assume {
            assumptions.push(g.formula(&[PreState, Input], 2));
        }
        for _ in 0..n_init {
            initial.push(g.formula(&[PreState], 2));
        }
        for _ in 0..n_trans {
            transitions.push(g.formula(&[PreState, Input, PostState], 2));
        }
    }
    c.assumptions = assumptions;
    c.initial_guarantees = initial;
    c.transitional_guarantees = transitions;
}

/// Random well-typed contract with Bool/Int variables (at most three) and
/// ranges inside [-2, 2].
pub fn finite_contract(rng: &mut ChaCha8Rng, index: usize) -> Generated {
    let mut c = Contract::new(&format!("gen{index}"));
    let (inputs, states) = random_decls(rng, false);
    c.inputs = inputs;
    c.states = states;
    fill_sections(rng, &mut c, false);
    let mut ranges = Ranges::new();
    for d in c.inputs.iter().chain(&c.states) {
        let dom = match d.sort {
            Sort::Bool => Domain::Bool,
            _ => {
                let lo = rng.gen_range(-2..=0);
                let hi = rng.gen_range(lo.max(-1)..=2);
                Domain::IntRange(lo, hi)
            }
        };
        ranges.insert(d.name.clone(), dom);
    }
    let contract = typecheck(&c).unwrap_or_else(|d| panic!("generator produced ill-typed contract: {d}"));
    Generated { contract, ranges }
}

/// Random well-typed contract that may also use real variables; used for
/// syntax-level properties.
pub fn any_contract(seed: u64) -> TypedContract {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Contract::new(&format!("any{}", seed % 1000));
    let (inputs, states) = random_decls(&mut rng, true);
    c.inputs = inputs;
    c.states = states;
    fill_sections(&mut rng, &mut c, true);
    typecheck(&c).unwrap_or_else(|d| panic!("generator produced ill-typed contract: {d}"))
}

/// The fixed corpus shared by the agreement and property suites.
pub fn corpus() -> Vec<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|k| finite_contract(&mut rng, k)).collect()
}

pub fn solver_available() -> bool {
    realize::solver::SolverCommand::from_env()
        .map(|s| s.is_available())
        .unwrap_or(false)
}

pub fn contract_file(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("contracts")
        .join(name)
}

pub fn load_file(name: &str) -> TypedContract {
    let text = std::fs::read_to_string(contract_file(name)).unwrap();
    realize::load_contract(&text).unwrap()
}
