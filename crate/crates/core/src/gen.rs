//! Seeded random formulas, traces and io signatures for differential and
//! property testing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{CmpOp, Expr, Formula, IoKind, IoSignature, Predicate, VarRef};
use crate::oracle::DiscreteTrace;
use crate::time::{Decimal, Duration, Interval, TimeBound, TimeUnit};

/// Shape of generated formulas.
#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub vars: Vec<VarRef>,
    /// Maximum tree depth (a lone predicate has depth 1).
    pub max_depth: usize,
    /// Largest interval bound, in samples.
    pub max_bound: u64,
    pub future: bool,
    pub unbounded_past: bool,
    /// Next, Prev, Rise and Fall.
    pub steps: bool,
}

impl FormulaGen {
    pub fn new(vars: &[&str]) -> Self {
        FormulaGen {
            vars: vars.iter().map(|v| VarRef::new(*v).expect("valid variable")).collect(),
            max_depth: 4,
            max_bound: 8,
            future: true,
            unbounded_past: true,
            steps: true,
        }
    }

    /// Only operators the dense monitor evaluates.
    pub fn dense(mut self) -> Self {
        self.steps = false;
        self
    }

    pub fn formula(&self, rng: &mut impl Rng) -> Formula {
        self.node(rng, self.max_depth)
    }

    fn var(&self, rng: &mut impl Rng) -> Expr {
        Expr::Var(self.vars.choose(rng).expect("at least one variable").clone())
    }

    pub fn predicate(&self, rng: &mut impl Rng) -> Predicate {
        let c = Expr::Const(f64::from(rng.gen_range(-16i32..=16)) / 2.0);
        let ops = [CmpOp::Ge, CmpOp::Gt, CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ne];
        let op = *ops.choose(rng).expect("nonempty");
        let lhs = match rng.gen_range(0..20) {
            0 => return Predicate::new(Expr::Const(1.0), op, c),
            1..=11 => self.var(rng),
            12..=16 => Expr::Add(Box::new(self.var(rng)), Box::new(self.var(rng))),
            17 | 18 => Expr::Abs(Box::new(Expr::Sub(Box::new(self.var(rng)), Box::new(self.var(rng))))),
            _ => Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(self.var(rng))),
        };
        Predicate::new(lhs, op, c)
    }

    fn bounded(&self, rng: &mut impl Rng) -> Interval {
        let a = rng.gen_range(0..=self.max_bound);
        let b = rng.gen_range(a..=self.max_bound);
        Interval::ints(a, b)
    }

    fn past_interval(&self, rng: &mut impl Rng) -> Interval {
        if self.unbounded_past && rng.gen_bool(0.2) {
            Interval { lo: TimeBound::int(rng.gen_range(0..=self.max_bound.min(3))), hi: None }
        } else {
            self.bounded(rng)
        }
    }

    fn node(&self, rng: &mut impl Rng, depth: usize) -> Formula {
        if depth <= 1 || rng.gen_bool(0.15) {
            return Formula::Pred(self.predicate(rng));
        }
        let d = depth - 1;
        let b = Box::new;
        loop {
            let f = match rng.gen_range(0..16) {
                0 | 1 => Formula::not(self.node(rng, d)),
                2 => Formula::and(self.node(rng, d), self.node(rng, d)),
                3 => Formula::or(self.node(rng, d), self.node(rng, d)),
                4 => Formula::implies(self.node(rng, d), self.node(rng, d)),
                5 => Formula::once(self.past_interval(rng), self.node(rng, d)),
                6 => Formula::historically(self.past_interval(rng), self.node(rng, d)),
                7 => Formula::since(self.past_interval(rng), self.node(rng, d), self.node(rng, d)),
                8 if self.future => Formula::eventually(self.bounded(rng), self.node(rng, d)),
                9 if self.future => Formula::always(self.bounded(rng), self.node(rng, d)),
                10 | 11 if self.future => Formula::until(self.bounded(rng), self.node(rng, d), self.node(rng, d)),
                12 if self.steps && self.future => Formula::Next(b(self.node(rng, d))),
                13 if self.steps => Formula::Prev(b(self.node(rng, d))),
                14 if self.steps => Formula::Rise(b(self.node(rng, d))),
                15 if self.steps => Formula::Fall(b(self.node(rng, d))),
                _ => continue,
            };
            return f;
        }
    }
}

/// A trace with every variable uniform in `[-10, 10]`, rounded to quarters
/// so that ties (and therefore equal-value merging) actually occur.
pub fn random_trace(rng: &mut impl Rng, vars: &[VarRef], len: usize) -> DiscreteTrace {
    let columns: BTreeMap<VarRef, Vec<f64>> = vars
        .iter()
        .map(|v| (v.clone(), (0..len).map(|_| f64::from(rng.gen_range(-40i32..=40)) / 4.0).collect()))
        .collect();
    DiscreteTrace::new(Duration::new(Decimal::ONE, TimeUnit::S).expect("positive"), columns).expect("finite columns")
}

/// Each variable independently input, output or undeclared.
pub fn random_io(rng: &mut impl Rng, vars: &[VarRef]) -> IoSignature {
    let mut io = IoSignature::new();
    for v in vars {
        match rng.gen_range(0..5) {
            0 | 1 => io.declare(v.clone(), IoKind::Input),
            2 | 3 => io.declare(v.clone(), IoKind::Output),
            _ => true,
        };
    }
    io
}
