//! Reference semantics: direct, non-incremental evaluation of resolved
//! formulas over a finite discrete trace, and the interface-aware predicate
//! evaluation shared with the monitors.
//!
//! Inner windows are half-open: `(t', t]` for Since and `[t, t')` for Until,
//! so that `y[t] = max(x2[t], min(x1[t], y[t-1]))` is the unbounded Since.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ext::{ext_max, ext_min, sign_inf, ExtReal};
use crate::formula::{EvalError, Formula, IoKind, IoSignature, Predicate, SemanticsMode, VarRef};
use crate::time::{Duration, Interval, TimeBound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("index {t} is outside a trace of length {len}")]
    IndexOutOfRange { t: usize, len: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("bound {0} is not a resolved sample count")]
    UnresolvedBound(TimeBound),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("column `{var}` has {got} samples, expected {expected}")]
    RaggedColumn { var: VarRef, got: usize, expected: usize },
    #[error("column `{var}` has a non-finite value at index {index}")]
    NonFinite { var: VarRef, index: usize },
}

/// Equally spaced samples of a set of real-valued variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrace {
    len: usize,
    period: Duration,
    columns: BTreeMap<VarRef, Vec<f64>>,
}

impl DiscreteTrace {
    pub fn new(period: Duration, columns: BTreeMap<VarRef, Vec<f64>>) -> Result<Self, TraceError> {
        let len = columns.values().map(Vec::len).next().unwrap_or(0);
        for (var, col) in &columns {
            if col.len() != len {
                return Err(TraceError::RaggedColumn { var: var.clone(), got: col.len(), expected: len });
            }
            if let Some(index) = col.iter().position(|x| !x.is_finite()) {
                return Err(TraceError::NonFinite { var: var.clone(), index });
            }
        }
        Ok(DiscreteTrace { len, period, columns })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn period(&self) -> Duration {
        self.period
    }

    pub fn columns(&self) -> &BTreeMap<VarRef, Vec<f64>> {
        &self.columns
    }

    pub fn value(&self, var: &VarRef, t: usize) -> Option<f64> {
        self.columns.get(var).and_then(|c| c.get(t)).copied()
    }

    /// All variables at index `t`.
    pub fn row(&self, t: usize) -> Vec<(VarRef, f64)> {
        self.columns.iter().map(|(v, c)| (v.clone(), c[t])).collect()
    }
}

/// How a predicate contributes under relative robustness, determined by
/// which of its variables lie in the reference sets U and V.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredClass {
    /// Some variable is outside U ∪ V: the predicate is neutral (0).
    Neutral,
    /// Some variable is outside V: ordinary finite robustness.
    Finite,
    /// All variables are in V: only the sign counts (±∞).
    Pole,
}

impl PredClass {
    pub fn apply(self, value: f64) -> ExtReal {
        match self {
            PredClass::Neutral => ExtReal::finite(0.0),
            PredClass::Finite => ExtReal::finite(value),
            PredClass::Pole => sign_inf(value),
        }
    }
}

/// Classification for arbitrary reference sets U and V.
pub fn relative_class<'a>(
    vars: impl IntoIterator<Item = &'a VarRef>,
    in_u: impl Fn(&VarRef) -> bool,
    in_v: impl Fn(&VarRef) -> bool,
) -> PredClass {
    let vars: Vec<_> = vars.into_iter().collect();
    if vars.iter().any(|y| !in_u(y) && !in_v(y)) {
        PredClass::Neutral
    } else if vars.iter().any(|y| !in_v(y)) {
        PredClass::Finite
    } else {
        PredClass::Pole
    }
}

/// Classification under a semantics mode: standard uses (U, V) = (X, ∅),
/// output robustness (X_O, X∖X_O), input vacuity (X_I, ∅).
pub fn classify(p: &Predicate, mode: SemanticsMode, io: &IoSignature) -> PredClass {
    let vars = p.vars();
    let is = |k: IoKind| move |v: &VarRef| io.kind_of(v) == Some(k);
    match mode {
        SemanticsMode::Standard => relative_class(vars, |_| true, |_| false),
        SemanticsMode::OutputRobustness => {
            relative_class(vars, is(IoKind::Output), |v| io.kind_of(v) != Some(IoKind::Output))
        }
        SemanticsMode::InputVacuity => relative_class(vars, is(IoKind::Input), |_| false),
    }
}

/// Relative robustness of one predicate at one valuation.
pub fn eval_predicate(
    p: &Predicate,
    valuation: &impl Fn(&VarRef) -> Option<f64>,
    mode: SemanticsMode,
    io: &IoSignature,
) -> Result<ExtReal, EvalError> {
    eval_classified(p, classify(p, mode, io), valuation)
}

/// Predicate evaluation with a precomputed class.
pub fn eval_classified(
    p: &Predicate,
    class: PredClass,
    valuation: &impl Fn(&VarRef) -> Option<f64>,
) -> Result<ExtReal, EvalError> {
    if let Some(missing) = p.vars().into_iter().find(|v| valuation(v).is_none()) {
        return Err(EvalError::UnknownVariable(missing.clone()));
    }
    match class {
        PredClass::Neutral => Ok(ExtReal::finite(0.0)),
        class => Ok(class.apply(p.value(valuation)?)),
    }
}

/// Robustness of `f` at index `t`.
pub fn offline_robustness(
    f: &Formula,
    w: &DiscreteTrace,
    t: usize,
    mode: SemanticsMode,
    io: &IoSignature,
) -> Result<ExtReal, OracleError> {
    if t >= w.len() {
        return Err(OracleError::IndexOutOfRange { t, len: w.len() });
    }
    Ok(offline_series(f, w, mode, io)?[t])
}

/// Robustness of `f` at every index of `w`.
pub fn offline_series(
    f: &Formula,
    w: &DiscreteTrace,
    mode: SemanticsMode,
    io: &IoSignature,
) -> Result<Vec<ExtReal>, OracleError> {
    Oracle { w, mode, io }.series(f)
}

struct Oracle<'a> {
    w: &'a DiscreteTrace,
    mode: SemanticsMode,
    io: &'a IoSignature,
}

fn samples(b: &TimeBound) -> Result<usize, OracleError> {
    match (b.unit, b.value.to_u64()) {
        (None, Some(v)) => Ok(v as usize),
        _ => Err(OracleError::UnresolvedBound(*b)),
    }
}

fn bounds(i: &Interval) -> Result<(usize, Option<usize>), OracleError> {
    Ok((samples(&i.lo)?, i.hi.as_ref().map(samples).transpose()?))
}

fn window_min(x: &[ExtReal], range: std::ops::Range<usize>) -> ExtReal {
    ext_min(x[range].iter().copied())
}

impl Oracle<'_> {
    fn series(&self, f: &Formula) -> Result<Vec<ExtReal>, OracleError> {
        use Formula::*;
        let n = self.w.len();
        let map = |x: Vec<ExtReal>, g: &dyn Fn(usize, &[ExtReal]) -> ExtReal| (0..n).map(|t| g(t, &x)).collect();
        let zip = |x: Vec<ExtReal>, y: Vec<ExtReal>, g: fn(ExtReal, ExtReal) -> ExtReal| {
            x.into_iter().zip(y).map(|(a, b)| g(a, b)).collect()
        };
        Ok(match f {
            Pred(p) => {
                let class = classify(p, self.mode, self.io);
                (0..n).map(|t| eval_classified(p, class, &|v: &VarRef| self.w.value(v, t))).collect::<Result<_, _>>()?
            }
            Not(x) => self.series(x)?.into_iter().map(|v| -v).collect(),
            And(a, b) => zip(self.series(a)?, self.series(b)?, ExtReal::min),
            Or(a, b) => zip(self.series(a)?, self.series(b)?, ExtReal::max),
            Implies(a, b) => zip(self.series(a)?, self.series(b)?, |a, b| (-a).max(b)),
            Prev(x) => map(self.series(x)?, &|t, x| if t == 0 { ExtReal::NegInf } else { x[t - 1] }),
            Next(x) => map(self.series(x)?, &|t, x| x.get(t + 1).copied().unwrap_or(ExtReal::NegInf)),
            Rise(x) => map(self.series(x)?, &|t, x| {
                let prev_not = if t == 0 { ExtReal::NegInf } else { -x[t - 1] };
                prev_not.min(x[t])
            }),
            Fall(x) => map(self.series(x)?, &|t, x| {
                let prev = if t == 0 { ExtReal::NegInf } else { x[t - 1] };
                prev.min(-x[t])
            }),
            Once(i, x) | Historically(i, x) => {
                let (a, b) = bounds(i)?;
                let once = matches!(f, Once(..));
                map(self.series(x)?, &|t, x| {
                    let vals = past_window(t, a, b).map(|r| &x[r]).unwrap_or(&[]).iter().copied();
                    if once {
                        ext_max(vals)
                    } else {
                        ext_min(vals)
                    }
                })
            }
            Eventually(i, x) | Always(i, x) => {
                let (a, b) = bounds(i)?;
                let ev = matches!(f, Eventually(..));
                map(self.series(x)?, &|t, x| {
                    let vals = future_window(t, a, b, n).map(|r| &x[r]).unwrap_or(&[]).iter().copied();
                    if ev {
                        ext_max(vals)
                    } else {
                        ext_min(vals)
                    }
                })
            }
            Since(i, p, q) => {
                let (a, b) = bounds(i)?;
                let (x1, x2) = (self.series(p)?, self.series(q)?);
                (0..n)
                    .map(|t| {
                        let r = past_window(t, a, b).unwrap_or(0..0);
                        ext_max(r.map(|s| x2[s].min(window_min(&x1, s + 1..t + 1))))
                    })
                    .collect()
            }
            Until(i, p, q) => {
                let (a, b) = bounds(i)?;
                let (x1, x2) = (self.series(p)?, self.series(q)?);
                (0..n)
                    .map(|t| {
                        let r = future_window(t, a, b, n).unwrap_or(0..0);
                        ext_max(r.map(|s| x2[s].min(window_min(&x1, t..s))))
                    })
                    .collect()
            }
            Delay(d, x) => {
                let d = samples(d)?;
                map(self.series(x)?, &|t, x| if t < d { ExtReal::NegInf } else { x[t - d] })
            }
            DelayedUntil(i, p, q) => {
                let (a, b) = bounds(i)?;
                let b = b.expect("delayed until is bounded");
                let (x1, x2) = (self.series(p)?, self.series(q)?);
                (0..n)
                    .map(|t| {
                        if t < b {
                            return ExtReal::NegInf;
                        }
                        ext_max((t - b + a..t + 1).map(|s| x2[s].min(window_min(&x1, t - b + 1..s + 1))))
                    })
                    .collect()
            }
        })
    }
}

/// Indices `[t-b, t-a] ∩ [0, t]`, or `None` when empty.
fn past_window(t: usize, a: usize, b: Option<usize>) -> Option<std::ops::Range<usize>> {
    let hi = t.checked_sub(a)?;
    let lo = b.map_or(0, |b| t.saturating_sub(b));
    Some(lo..hi + 1)
}

/// Indices `[t+a, t+b] ∩ [0, n-1]`, or `None` when empty.
fn future_window(t: usize, a: usize, b: Option<usize>, n: usize) -> Option<std::ops::Range<usize>> {
    let lo = t + a;
    let hi = b.map_or(n - 1, |b| (t + b).min(n - 1));
    (lo <= hi).then_some(lo..hi + 1)
}
