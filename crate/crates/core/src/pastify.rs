//! Temporal depth and pastification: rewriting bounded-future formulas into
//! past-only formulas whose value at `t + H` is the original value at `t`.
//!
//! Everything here works on *resolved* formulas, whose interval bounds are
//! plain numbers: sample counts in discrete time, seconds in dense time.

use thiserror::Error;

use crate::formula::{Formula, SpecModel, TimeDomain};
use crate::time::{duration_to_samples, Decimal, Interval, TimeBound, TimeError, TimeUnit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PastifyError {
    #[error("unbounded future operator in `{0}`")]
    UnboundedFuture(String),
    #[error("`{0}` is not supported in dense time")]
    Unsupported(&'static str),
    #[error("formula `{name}`: {source}")]
    Time { name: String, source: Box<TimeError> },
}

/// Which horizon rules apply. Discrete time has a unit step, so `Next`
/// exists and Until reads its left operand one step early; dense time
/// uses the continuous rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    Discrete,
    Dense,
}

impl From<&TimeDomain> for Clock {
    fn from(d: &TimeDomain) -> Self {
        match d {
            TimeDomain::Discrete { .. } => Clock::Discrete,
            TimeDomain::Dense => Clock::Dense,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HorizonReport {
    /// Future reach H: how far ahead the formula looks.
    pub horizon: Decimal,
    /// Past reach L; `None` when an unbounded past operator is present.
    pub past_depth: Option<Decimal>,
    /// Past reach with unbounded windows counted at their lower bound, i.e.
    /// the longest finite history any buffer has to hold.
    pub buffer_depth: Decimal,
}

impl HorizonReport {
    /// `L + H` with unbounded windows counted at their lower bound.
    pub fn warmup(&self) -> Decimal {
        self.buffer_depth.checked_add(self.horizon).expect("depths are small")
    }
}

/// A formula before and after pastification.
#[derive(Clone, Debug, PartialEq)]
pub struct Pastified {
    pub name: String,
    /// The source formula with resolved bounds and the top-level rewrite.
    pub resolved: Formula,
    pub pastified: Formula,
    pub report: HorizonReport,
    /// True when a top-level unbounded Always/Eventually was rewritten.
    pub rewritten: bool,
}

type Res<T> = Result<T, TimeError>;

fn num(b: &TimeBound) -> Decimal {
    debug_assert!(b.unit.is_none(), "formula bounds must be resolved");
    b.value
}

fn hi(i: &Interval) -> Option<Decimal> {
    i.hi.as_ref().map(num)
}

fn sub0(a: Decimal, b: Decimal) -> Res<Decimal> {
    Ok(a.checked_sub(b)?.max(Decimal::ZERO))
}

fn max3(a: Decimal, b: Decimal, c: Decimal) -> Decimal {
    a.max(b).max(c)
}

/// Converts every bound to a plain number: samples of `period` in discrete
/// time, seconds in dense time. Unitless bounds are read in `default_unit`.
pub fn resolve_bounds(f: &Formula, default_unit: TimeUnit, domain: &TimeDomain) -> Result<Formula, TimeError> {
    f.try_map_bounds(&mut |b: TimeBound| {
        let d = b.to_duration(default_unit)?;
        let value = match domain {
            TimeDomain::Discrete { period } => Decimal::from_int(duration_to_samples(d, *period)? as i128),
            TimeDomain::Dense if d.unit == TimeUnit::Samples => d.value,
            TimeDomain::Dense => d.in_seconds()?,
        };
        Ok(TimeBound::unitless(value))
    })
}

/// Maps a top-level unbounded Always/Eventually to Historically/Once.
pub fn rewrite_top_level(f: &Formula) -> (Formula, bool) {
    match f {
        Formula::Always(i, x) if !i.is_bounded() => (Formula::Historically(*i, x.clone()), true),
        Formula::Eventually(i, x) if !i.is_bounded() => (Formula::Once(*i, x.clone()), true),
        _ => (f.clone(), false),
    }
}

fn unbounded(f: &Formula) -> PastifyError {
    PastifyError::UnboundedFuture(f.to_string())
}

/// Future reach H of a resolved formula.
pub fn future_reach(f: &Formula, clock: Clock) -> Result<Decimal, PastifyError> {
    use Formula::*;
    let h = |x: &Formula| future_reach(x, clock);
    let time = |e: TimeError| PastifyError::Time { name: String::new(), source: Box::new(e) };
    Ok(match f {
        Pred(_) => Decimal::ZERO,
        Not(x) | Prev(x) | Rise(x) | Fall(x) | Once(_, x) | Historically(_, x) | Delay(_, x) => h(x)?,
        And(a, b) | Or(a, b) | Implies(a, b) | Since(_, a, b) | DelayedUntil(_, a, b) => h(a)?.max(h(b)?),
        Next(x) => match clock {
            Clock::Discrete => h(x)?.checked_add(Decimal::ONE).map_err(time)?,
            Clock::Dense => return Err(PastifyError::Unsupported("next")),
        },
        Eventually(i, x) | Always(i, x) => {
            let b = hi(i).ok_or_else(|| unbounded(f))?;
            b.checked_add(h(x)?).map_err(time)?
        }
        Until(i, a, c) => {
            let b = hi(i).ok_or_else(|| unbounded(f))?;
            let lhs = match clock {
                Clock::Discrete => h(a)?.checked_sub(Decimal::ONE).map_err(time)?,
                Clock::Dense => h(a)?,
            };
            b.checked_add(lhs.max(h(c)?)).map_err(time)?
        }
    })
}

/// Past reach L. With `clamp_unbounded`, unbounded windows count at their
/// lower bound instead of making the result `None`.
pub fn past_reach(f: &Formula, clock: Clock, clamp_unbounded: bool) -> Res<Option<Decimal>> {
    use Formula::*;
    let l = |x: &Formula| past_reach(x, clock, clamp_unbounded);
    // upper end of a past window, or its lower bound when clamping
    let reach = |i: &Interval| match hi(i) {
        Some(b) => Some(b),
        None if clamp_unbounded => Some(num(&i.lo)),
        None => None,
    };
    let both = |a: &Formula, b: &Formula| -> Res<Option<(Decimal, Decimal)>> { Ok(l(a)?.zip(l(b)?)) };
    Ok(match f {
        Pred(_) => Some(Decimal::ZERO),
        Not(x) => l(x)?,
        And(a, b) | Or(a, b) | Implies(a, b) => both(a, b)?.map(|(x, y)| x.max(y)),
        Next(x) => l(x)?.map(|v| sub0(v, Decimal::ONE)).transpose()?,
        Prev(x) | Rise(x) | Fall(x) => l(x)?.map(|v| v.checked_add(Decimal::ONE)).transpose()?,
        Once(i, x) | Historically(i, x) => match (reach(i), l(x)?) {
            (Some(b), Some(v)) => Some(b.checked_add(v)?),
            _ => None,
        },
        Since(i, a, b) => match (reach(i), both(a, b)?) {
            (Some(w), Some((x, y))) => Some(w.checked_add(x.max(y))?),
            _ => None,
        },
        Eventually(i, x) | Always(i, x) => l(x)?.map(|v| sub0(v, num(&i.lo))).transpose()?,
        Until(i, a, b) => match both(a, b)? {
            Some((x, y)) => Some(x.max(sub0(y, num(&i.lo))?)),
            None => None,
        },
        Delay(d, x) => l(x)?.map(|v| num(d).checked_add(v)).transpose()?,
        DelayedUntil(i, a, b) => match both(a, b)? {
            Some((x, y)) => {
                let w = hi(i).expect("delayed until is bounded");
                let lhs = match clock {
                    Clock::Discrete => w.checked_add(x)?.checked_sub(Decimal::ONE)?,
                    Clock::Dense => w.checked_add(x)?,
                };
                Some(max3(w, lhs, w.checked_sub(num(&i.lo))?.checked_add(y)?))
            }
            None => None,
        },
    })
}

/// H and L of a resolved formula (after the top-level rewrite).
pub fn horizon(f: &Formula, clock: Clock) -> Result<HorizonReport, PastifyError> {
    let time = |e| PastifyError::Time { name: String::new(), source: Box::new(e) };
    Ok(HorizonReport {
        horizon: future_reach(f, clock)?,
        past_depth: past_reach(f, clock, false).map_err(time)?,
        buffer_depth: past_reach(f, clock, true).map_err(time)?.expect("clamped reach is finite"),
    })
}

fn delay(d: Decimal, f: Formula) -> Formula {
    if d.is_zero() {
        return f;
    }
    match f {
        Formula::Delay(e, x) => {
            let total = d.checked_add(num(&e)).expect("delays are small");
            Formula::Delay(TimeBound::unitless(total), x)
        }
        f => Formula::Delay(TimeBound::unitless(d), Box::new(f)),
    }
}

fn window(width: Decimal) -> Interval {
    Interval::bounded(TimeBound::unitless(Decimal::ZERO), TimeBound::unitless(width))
}

/// Π(φ, d): the past-only formula whose value at `t` is φ's value at `t − d`.
fn pi(f: &Formula, d: Decimal, clock: Clock) -> Res<Formula> {
    use Formula::*;
    let b = |x: Formula| Box::new(x);
    let p = |x: &Formula, d: Decimal| pi(x, d, clock);
    Ok(match f {
        Not(x) => Formula::not(p(x, d)?),
        And(x, y) => Formula::and(p(x, d)?, p(y, d)?),
        Or(x, y) => Formula::or(p(x, d)?, p(y, d)?),
        Implies(x, y) => Formula::or(Formula::not(p(x, d)?), p(y, d)?),
        f if f.is_past_only() => delay(d, f.clone()),
        Next(x) => {
            assert!(!d.is_zero(), "pastification depth below the horizon");
            p(x, d.checked_sub(Decimal::ONE)?)?
        }
        Eventually(i, x) | Always(i, x) => {
            let (lo, hi) = (num(&i.lo), hi(i).expect("checked by horizon"));
            let inner = p(x, d.checked_sub(hi)?)?;
            let width = hi.checked_sub(lo)?;
            if width.is_zero() {
                inner
            } else if matches!(f, Eventually(..)) {
                Formula::once(window(width), inner)
            } else {
                Formula::historically(window(width), inner)
            }
        }
        Until(i, x, y) => {
            let hi = hi(i).expect("checked by horizon");
            let rhs_depth = d.checked_sub(hi)?;
            let lhs_depth = match clock {
                Clock::Discrete => rhs_depth.checked_add(Decimal::ONE)?,
                Clock::Dense => rhs_depth,
            };
            DelayedUntil(*i, b(p(x, lhs_depth)?), b(p(y, rhs_depth)?))
        }
        Prev(x) => Prev(b(p(x, d)?)),
        Rise(x) => Rise(b(p(x, d)?)),
        Fall(x) => Fall(b(p(x, d)?)),
        Once(i, x) => Once(*i, b(p(x, d)?)),
        Historically(i, x) => Historically(*i, b(p(x, d)?)),
        Since(i, x, y) => Since(*i, b(p(x, d)?), b(p(y, d)?)),
        Delay(e, x) => delay(num(e), p(x, d)?),
        DelayedUntil(i, x, y) => DelayedUntil(*i, b(p(x, d)?), b(p(y, d)?)),
        Pred(_) => unreachable!("predicates are past-only"),
    })
}

/// Pastifies one resolved formula: top-level rewrite, horizon, then Π(φ, H).
pub fn pastify_formula(f: &Formula, clock: Clock) -> Result<Pastified, PastifyError> {
    let (resolved, rewritten) = rewrite_top_level(f);
    let report = horizon(&resolved, clock)?;
    let pastified = pi(&resolved, report.horizon, clock)
        .map_err(|e| PastifyError::Time { name: String::new(), source: Box::new(e) })?;
    Ok(Pastified { name: String::new(), resolved, pastified, report, rewritten })
}

/// Resolves and pastifies every formula of a model.
pub fn pastify_all(model: &SpecModel) -> Result<Vec<Pastified>, PastifyError> {
    let clock = Clock::from(&model.time_domain);
    model
        .formulas
        .iter()
        .map(|nf| {
            let named = |e: PastifyError| match e {
                PastifyError::Time { source, .. } => PastifyError::Time { name: nf.name.clone(), source },
                e => e,
            };
            let resolved = resolve_bounds(&nf.formula, model.default_unit, &model.time_domain)
                .map_err(|e| PastifyError::Time { name: nf.name.clone(), source: Box::new(e) })?;
            let mut p = pastify_formula(&resolved, clock).map_err(named)?;
            p.name = nf.name.clone();
            Ok(p)
        })
        .collect()
}

/// The model with every formula replaced by its pastified form. Bounds of
/// the result are plain sample counts (discrete) or seconds (dense).
pub fn pastify(model: &SpecModel) -> Result<SpecModel, PastifyError> {
    let done = pastify_all(model)?;
    let mut out = model.clone();
    for (nf, p) in out.formulas.iter_mut().zip(done) {
        nf.formula = p.pastified;
    }
    out.default_unit = match model.time_domain {
        TimeDomain::Discrete { .. } => TimeUnit::Samples,
        TimeDomain::Dense => TimeUnit::S,
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_spec};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn h(s: &str) -> HorizonReport {
        horizon(&f(s), Clock::Discrete).unwrap()
    }

    fn d(v: i128) -> Decimal {
        Decimal::from_int(v)
    }

    fn pastified(s: &str) -> String {
        pastify_formula(&f(s), Clock::Discrete).unwrap().pastified.to_string()
    }

    #[test]
    fn horizons() {
        assert_eq!(h("a > 0").horizon, d(0));
        assert_eq!(h("next a > 0").horizon, d(1));
        assert_eq!(h("req >= 3 implies eventually[0:5] gnt >= 3").horizon, d(5));
        assert_eq!(h("a > 0 until[1:4] b > 0").horizon, d(4));
        assert_eq!(h("next next a > 0 until[1:4] b > 0").horizon, d(5));
        assert_eq!(h("once[0:7] next a > 0").horizon, d(1));
    }

    #[test]
    fn past_depths() {
        assert_eq!(h("once[2:7] prev a > 0").past_depth, Some(d(8)));
        assert_eq!(h("eventually[3:5] once[0:2] a > 0").past_depth, Some(d(0)));
        assert_eq!(h("eventually[1:5] once[0:2] a > 0").past_depth, Some(d(1)));
        assert_eq!(h("next once[0:2] a > 0").past_depth, Some(d(1)));
        let r = h("historically[2:inf] a > 0");
        assert_eq!(r.past_depth, None);
        assert_eq!(r.buffer_depth, d(2));
    }

    #[test]
    fn unbounded_future_is_rejected() {
        let e = horizon(&f("once[0:1] eventually a > 0"), Clock::Discrete).unwrap_err();
        assert!(matches!(e, PastifyError::UnboundedFuture(_)));
        // only at the root is it rewritten
        assert!(pastify_formula(&f("eventually a > 0"), Clock::Discrete).unwrap().rewritten);
    }

    #[test]
    fn predicate_is_delayed() {
        assert_eq!(pi(&f("p > 0"), d(3), Clock::Discrete).unwrap().to_string(), "delay[3] (p > 0)");
    }

    #[test]
    fn eventually_becomes_once() {
        assert_eq!(pastified("eventually[0:5] p > 0"), "once[0:5] (p > 0)");
        assert_eq!(pastified("eventually[2:5] p > 0"), "once[0:3] (p > 0)");
        assert_eq!(pastified("always[3:3] p > 0"), "p > 0");
    }

    #[test]
    fn request_grant() {
        assert_eq!(
            pastified("always(req >= 3 implies eventually[0:5] gnt >= 3)"),
            "historically((not delay[5] (req >= 3)) or once[0:5] (gnt >= 3))"
        );
    }

    #[test]
    fn next_and_until() {
        assert_eq!(pastified("next a > 0 and b > 0"), "a > 0 and delay[1] (b > 0)");
        assert_eq!(pastified("a > 0 until[1:2] b > 0"), "(delay[1] (a > 0)) until@[1:2] (b > 0)");
        assert_eq!(
            pastified("(eventually[0:3] a > 0) until[0:2] b > 0"),
            "(once[0:3] (a > 0)) until@[0:2] (delay[2] (b > 0))"
        );
    }

    #[test]
    fn output_is_past_only() {
        for s in [
            "always[0:4] (a > 0 -> next eventually[1:2] b > 0)",
            "once[0:3] (a > 0 until[0:2] next b > 0)",
            "rise(eventually[0:2] a > 0) since[1:3] not always[0:1] b > 0",
        ] {
            let p = pastify_formula(&f(s), Clock::Discrete).unwrap().pastified;
            assert!(p.is_past_only(), "{s} -> {p}");
            let mut implies = false;
            p.walk(&mut |g| implies |= matches!(g, Formula::Implies(..)));
            assert!(!implies);
        }
    }

    #[test]
    fn idempotent_on_models() {
        let text = "input req\noutput gnt\n\
                    out = always(req >= 3 implies eventually[0:500] gnt >= 3)\n\
                    o2 = next (req >= 0 until[100:300] eventually[0:0.2s] gnt >= 1)";
        let mut m = parse_spec(text).unwrap();
        m.time_domain =
            TimeDomain::Discrete { period: crate::time::Duration::new(Decimal::new(1, 1), TimeUnit::S).unwrap() };
        m.default_unit = TimeUnit::Ms;
        let once = pastify(&m).unwrap();
        assert_eq!(
            once.formula("out").unwrap().to_string(),
            "historically((not delay[5] (req >= 3)) or once[0:5] (gnt >= 3))"
        );
        assert_eq!(pastify(&once).unwrap(), once);
    }

    #[test]
    fn indivisible_bounds_are_errors() {
        let mut m = parse_spec("out = once[0:150ms] a > 0").unwrap();
        m.time_domain = TimeDomain::Discrete { period: crate::time::Duration::new(d(100), TimeUnit::Ms).unwrap() };
        assert!(matches!(pastify(&m), Err(PastifyError::Time { .. })));
    }

    #[test]
    fn dense_resolution_uses_seconds() {
        let mut m = parse_spec("out = eventually[0:1500ms] a > 0 until[0:2] b > 0").unwrap();
        m.time_domain = TimeDomain::Dense;
        let p = &pastify_all(&m).unwrap()[0];
        assert_eq!(p.report.horizon, Decimal::new(35, 1));
        assert!(matches!(pastify_formula(&f("next a > 0"), Clock::Dense), Err(PastifyError::Unsupported("next"))));
    }
}
