//! Formula syntax trees and the parsed model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::time::{Duration, Interval, TimeBound, TimeUnit};

/// A dot-separated variable path such as `cmd.linear.x`, treated as one name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef(String);

impl VarRef {
    /// Checks that every segment is an identifier.
    pub fn new(path: impl Into<String>) -> Option<Self> {
        let path = path.into();
        let ok = !path.is_empty()
            && path.split('.').all(|seg| {
                let mut chars = seg.chars();
                matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                    && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            });
        ok.then_some(VarRef(path))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The path itself followed by each of its proper prefixes, longest first.
    pub fn prefixes(&self) -> impl Iterator<Item = &str> {
        let s = self.0.as_str();
        std::iter::once(s).chain(s.rmatch_indices('.').map(move |(i, _)| &s[..i]))
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(VarRef),
    #[error("predicate `{0}` evaluated to a non-finite number")]
    NonFinite(String),
}

/// Real-valued arithmetic over variables and constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VarRef),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(VarRef::new(name).expect("valid variable path"))
    }

    pub fn eval(&self, lookup: &impl Fn(&VarRef) -> Option<f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::UnknownVariable(v.clone()))?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Add(a, b) => a.eval(lookup)? + b.eval(lookup)?,
            Expr::Sub(a, b) => a.eval(lookup)? - b.eval(lookup)?,
            Expr::Mul(a, b) => a.eval(lookup)? * b.eval(lookup)?,
            Expr::Div(a, b) => a.eval(lookup)? / b.eval(lookup)?,
            Expr::Abs(e) => e.eval(lookup)?.abs(),
        })
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a VarRef>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v);
            }
            Expr::Neg(e) | Expr::Abs(e) => e.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// An atomic comparison `lhs op rhs`; its robustness is a real-valued
/// function of the variables, positive exactly when the comparison holds
/// with margin.
#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Predicate {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        Predicate { lhs, op, rhs }
    }

    /// The robustness expression `f` such that the predicate reads `f > 0`.
    pub fn robustness_expr(&self) -> Expr {
        let (l, r) = (Box::new(self.lhs.clone()), Box::new(self.rhs.clone()));
        match self.op {
            CmpOp::Ge | CmpOp::Gt => Expr::Sub(l, r),
            CmpOp::Le | CmpOp::Lt => Expr::Sub(r, l),
            CmpOp::Eq => Expr::Neg(Box::new(Expr::Abs(Box::new(Expr::Sub(l, r))))),
            CmpOp::Ne => Expr::Abs(Box::new(Expr::Sub(l, r))),
        }
    }

    /// Evaluates the robustness expression; the result is always finite.
    pub fn value(&self, lookup: &impl Fn(&VarRef) -> Option<f64>) -> Result<f64, EvalError> {
        let l = self.lhs.eval(lookup)?;
        let r = self.rhs.eval(lookup)?;
        let v = match self.op {
            CmpOp::Ge | CmpOp::Gt => l - r,
            CmpOp::Le | CmpOp::Lt => r - l,
            CmpOp::Eq => -(l - r).abs(),
            CmpOp::Ne => (l - r).abs(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(crate::format::format_predicate(self)))
        }
    }

    pub fn vars(&self) -> BTreeSet<&VarRef> {
        let mut out = BTreeSet::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        out
    }
}

/// (IA-)STL formulas. `Delay` and `DelayedUntil` only appear in pastified
/// formulas.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Pred(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Prev(Box<Formula>),
    Rise(Box<Formula>),
    Fall(Box<Formula>),
    Once(Interval, Box<Formula>),
    Historically(Interval, Box<Formula>),
    Since(Interval, Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    /// Exact shift into the past; equals `Once` over `[d, d]`.
    Delay(TimeBound, Box<Formula>),
    /// Until over `[a, b]` evaluated `b` steps late from buffered history.
    /// The left operand is read one step later than in `Until`: at time `t`
    /// the value is the max over `t'` in `[t-b+a, t]` of
    /// `min(rhs[t'], min over t'' in (t-b, t'] of lhs[t''])`, and −∞ while
    /// `t < b`.
    DelayedUntil(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn pred(lhs: Expr, op: CmpOp, rhs: Expr) -> Formula {
        Formula::Pred(Predicate::new(lhs, op, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn once(i: Interval, f: Formula) -> Formula {
        Formula::Once(i, Box::new(f))
    }

    pub fn historically(i: Interval, f: Formula) -> Formula {
        Formula::Historically(i, Box::new(f))
    }

    pub fn since(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::Since(i, Box::new(a), Box::new(b))
    }

    pub fn eventually(i: Interval, f: Formula) -> Formula {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn always(i: Interval, f: Formula) -> Formula {
        Formula::Always(i, Box::new(f))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    pub fn delay(d: TimeBound, f: Formula) -> Formula {
        Formula::Delay(d, Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Pred(_) => vec![],
            Not(f)
            | Next(f)
            | Prev(f)
            | Rise(f)
            | Fall(f)
            | Once(_, f)
            | Historically(_, f)
            | Eventually(_, f)
            | Always(_, f)
            | Delay(_, f) => vec![f],
            And(a, b) | Or(a, b) | Implies(a, b) | Since(_, a, b) | Until(_, a, b) | DelayedUntil(_, a, b) => {
                vec![a, b]
            }
        }
    }

    /// Every interval and delay bound in the tree, pre-order.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        self.walk(&mut |f| match f {
            Formula::Once(i, _)
            | Formula::Historically(i, _)
            | Formula::Since(i, ..)
            | Formula::Eventually(i, _)
            | Formula::Always(i, _)
            | Formula::Until(i, ..)
            | Formula::DelayedUntil(i, ..) => out.push(*i),
            Formula::Delay(d, _) => out.push(Interval::bounded(*d, *d)),
            _ => {}
        });
        out
    }

    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// True for the future operators Next, Eventually, Always and Until.
    pub fn is_future_node(&self) -> bool {
        matches!(self, Formula::Next(_) | Formula::Eventually(..) | Formula::Always(..) | Formula::Until(..))
    }

    pub fn is_past_only(&self) -> bool {
        let mut past = true;
        self.walk(&mut |f| past &= !f.is_future_node());
        past
    }

    pub fn vars(&self) -> BTreeSet<&VarRef> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Pred(p) = f {
                out.extend(p.vars());
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Rebuilds the tree bottom-up, rewriting every interval and delay bound.
    pub fn try_map_bounds<E>(&self, f: &mut impl FnMut(TimeBound) -> Result<TimeBound, E>) -> Result<Formula, E> {
        self.map_bounds_dyn(f)
    }

    fn map_bounds_dyn<E>(&self, f: &mut dyn FnMut(TimeBound) -> Result<TimeBound, E>) -> Result<Formula, E> {
        use Formula::*;
        let mut b = |x: &Formula| -> Result<Box<Formula>, E> { Ok(Box::new(x.map_bounds_dyn(&mut *f)?)) };
        Ok(match self {
            Pred(p) => Pred(p.clone()),
            Not(x) => Not(b(x)?),
            And(x, y) => And(b(x)?, b(y)?),
            Or(x, y) => Or(b(x)?, b(y)?),
            Implies(x, y) => Implies(b(x)?, b(y)?),
            Next(x) => Next(b(x)?),
            Prev(x) => Prev(b(x)?),
            Rise(x) => Rise(b(x)?),
            Fall(x) => Fall(b(x)?),
            Once(i, x) => Once(i.try_map(&mut *f)?, self.map_child(x, f)?),
            Historically(i, x) => Historically(i.try_map(&mut *f)?, self.map_child(x, f)?),
            Since(i, x, y) => Since(i.try_map(&mut *f)?, self.map_child(x, f)?, self.map_child(y, f)?),
            Eventually(i, x) => Eventually(i.try_map(&mut *f)?, self.map_child(x, f)?),
            Always(i, x) => Always(i.try_map(&mut *f)?, self.map_child(x, f)?),
            Until(i, x, y) => Until(i.try_map(&mut *f)?, self.map_child(x, f)?, self.map_child(y, f)?),
            Delay(d, x) => Delay(f(*d)?, self.map_child(x, f)?),
            DelayedUntil(i, x, y) => DelayedUntil(i.try_map(&mut *f)?, self.map_child(x, f)?, self.map_child(y, f)?),
        })
    }

    fn map_child<E>(
        &self,
        x: &Formula,
        f: &mut dyn FnMut(TimeBound) -> Result<TimeBound, E>,
    ) -> Result<Box<Formula>, E> {
        Ok(Box::new(x.map_bounds_dyn(f)?))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::format_formula(self))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IoKind {
    Input,
    Output,
}

/// Input/output signature: declared roots and their direction. A dotted
/// path inherits the direction of its longest declared prefix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IoSignature {
    decls: BTreeMap<VarRef, IoKind>,
}

impl IoSignature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` if the variable was already declared.
    pub fn declare(&mut self, var: VarRef, kind: IoKind) -> bool {
        if self.decls.contains_key(&var) {
            return false;
        }
        self.decls.insert(var, kind);
        true
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarRef, IoKind)> {
        self.decls.iter().map(|(v, k)| (v, *k))
    }

    /// Direction of `var`, looked up through its prefixes.
    pub fn kind_of(&self, var: &VarRef) -> Option<IoKind> {
        var.prefixes().find_map(|p| self.decls.iter().find(|(v, _)| v.as_str() == p).map(|(_, k)| *k))
    }

    pub fn is_declared(&self, var: &VarRef) -> bool {
        self.kind_of(var).is_some()
    }
}

/// Which relative robustness to compute.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SemanticsMode {
    #[default]
    Standard,
    OutputRobustness,
    InputVacuity,
}

impl SemanticsMode {
    pub fn parse(s: &str) -> Option<SemanticsMode> {
        match s {
            "standard" => Some(SemanticsMode::Standard),
            "output-robustness" => Some(SemanticsMode::OutputRobustness),
            "input-vacuity" => Some(SemanticsMode::InputVacuity),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticsMode::Standard => "standard",
            SemanticsMode::OutputRobustness => "output-robustness",
            SemanticsMode::InputVacuity => "input-vacuity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeDomain {
    Discrete { period: Duration },
    Dense,
}

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedFormula {
    pub name: String,
    pub formula: Formula,
    /// Position of the assignment target.
    pub pos: Pos,
    /// Where each variable occurrence appears in the source.
    pub var_sites: Vec<(VarRef, Pos)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub key: String,
    pub raw: String,
    pub pos: Pos,
}

/// A parsed specification.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecModel {
    pub declarations: IoSignature,
    pub annotations: Vec<Annotation>,
    /// `from … import …` lines, kept verbatim and otherwise ignored.
    pub imports: Vec<String>,
    pub mode: SemanticsMode,
    pub formulas: Vec<NamedFormula>,
    pub time_domain: TimeDomain,
    /// Unit of interval bounds written without a suffix.
    pub default_unit: TimeUnit,
}

impl SpecModel {
    pub fn new() -> Self {
        SpecModel {
            declarations: IoSignature::new(),
            annotations: Vec::new(),
            imports: Vec::new(),
            mode: SemanticsMode::Standard,
            formulas: Vec::new(),
            time_domain: TimeDomain::Discrete { period: Duration::seconds(crate::time::Decimal::ONE) },
            default_unit: TimeUnit::S,
        }
    }

    /// Adds a formula without source positions.
    pub fn with_formula(mut self, name: &str, formula: Formula) -> Self {
        self.formulas.push(NamedFormula {
            name: name.to_string(),
            formula,
            pos: Pos::default(),
            var_sites: Vec::new(),
        });
        self
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.formulas.iter().find(|f| f.name == name).map(|f| &f.formula)
    }

    /// All variables referenced by any formula.
    pub fn variables(&self) -> BTreeSet<VarRef> {
        self.formulas.iter().flat_map(|f| f.formula.vars()).cloned().collect()
    }
}

impl Default for SpecModel {
    fn default() -> Self {
        Self::new()
    }
}
