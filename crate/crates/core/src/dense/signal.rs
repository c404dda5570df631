//! Piecewise-constant signals and the window operators over them.
//!
//! A signal is a right-continuous step function: segment `i` holds its
//! value on `[start_i, start_{i+1})`. Every operator below is evaluated
//! exactly at a superset of its possible breakpoints and held constant in
//! between, so outputs are again step functions.

use std::collections::VecDeque;

use crate::discrete::Extremum;
use crate::ext::ExtReal;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Signal {
    segs: VecDeque<(f64, ExtReal)>,
}

impl Signal {
    pub fn new() -> Self {
        Signal::default()
    }

    /// Builds a signal from `(start, value)` pairs with increasing starts,
    /// merging equal neighbours.
    pub fn from_segments(segs: impl IntoIterator<Item = (f64, ExtReal)>) -> Self {
        let mut s = Signal::new();
        for (t, v) in segs {
            s.push(t, v);
        }
        s
    }

    /// Appends a segment starting at `t`; a value equal to the current last
    /// one extends that segment instead. Returns whether a segment was added.
    pub fn push(&mut self, t: f64, v: ExtReal) -> bool {
        if let Some(&(last_t, last_v)) = self.segs.back() {
            assert!(t > last_t, "segment starts must increase ({t} after {last_t})");
            if last_v == v {
                return false;
            }
        }
        self.segs.push_back((t, v));
        true
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, ExtReal)> + '_ {
        self.segs.iter().copied()
    }

    pub fn first_start(&self) -> Option<f64> {
        self.segs.front().map(|s| s.0)
    }

    pub fn last(&self) -> Option<(f64, ExtReal)> {
        self.segs.back().copied()
    }

    /// Index of the segment containing `t`.
    fn index_at(&self, t: f64) -> usize {
        let i = self.segs.partition_point(|s| s.0 <= t);
        assert!(i > 0, "time {t} precedes the retained signal");
        i - 1
    }

    pub fn value_at(&self, t: f64) -> ExtReal {
        self.segs[self.index_at(t)].1
    }

    /// Segment starts in `(lo, hi]`.
    pub fn starts_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let from = self.segs.partition_point(|s| s.0 <= lo);
        self.segs.range(from..).map(|s| s.0).take_while(move |&t| t <= hi)
    }

    /// Extremum over the segments meeting `[lo, hi]`.
    pub fn extremum(&self, kind: Extremum, lo: f64, hi: f64) -> ExtReal {
        let (i, j) = (self.index_at(lo), self.index_at(hi));
        self.segs.range(i..=j).fold(kind.identity(), |acc, s| kind.pick(acc, s.1))
    }

    /// The value held just before `t` (the left limit).
    pub fn value_before(&self, t: f64) -> ExtReal {
        let i = self.segs.partition_point(|s| s.0 < t);
        assert!(i > 0, "no value before {t} in the retained signal");
        self.segs[i - 1].1
    }

    /// Drops segments that end at or before `t`, keeping the one containing it.
    pub fn prune_before(&mut self, t: f64) {
        while self.segs.len() > 1 && self.segs[1].0 <= t {
            self.segs.pop_front();
        }
    }
}

/// Sorted, deduplicated time points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Events {
    times: VecDeque<f64>,
}

impl Events {
    pub fn new() -> Self {
        Events::default()
    }

    pub fn from_times(times: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = times.into_iter().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        Events { times: v.into() }
    }

    /// Adds `t` at its sorted position.
    pub fn insert(&mut self, t: f64) {
        if let Err(i) = self.times.binary_search_by(|e| e.total_cmp(&t)) {
            self.times.insert(i, t);
        }
    }

    pub fn extend(&mut self, times: impl IntoIterator<Item = f64>) {
        times.into_iter().for_each(|t| self.insert(t));
    }

    /// Events in `(lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> impl DoubleEndedIterator<Item = f64> + '_ {
        let i = self.times.partition_point(|&e| e <= lo);
        let j = self.times.partition_point(|&e| e <= hi);
        self.times.range(i..j).copied()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.times.binary_search_by(|e| e.total_cmp(&t)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn prune_before(&mut self, t: f64) {
        while self.times.front().is_some_and(|&e| e < t) {
            self.times.pop_front();
        }
    }
}

/// Once (`Max`) or Historically (`Min`) over `[a, b]` (`b = None`: `[a, ∞)`)
/// at time `t`; the identity while the window lies before 0.
pub fn window_at(x: &Signal, kind: Extremum, a: f64, b: Option<f64>, t: f64) -> ExtReal {
    if t < a {
        return kind.identity();
    }
    let lo = b.map_or(0.0, |b| (t - b).max(0.0));
    x.extremum(kind, lo.max(x.first_start().unwrap_or(0.0)), t - a)
}

/// Since at `t`: sup over `τ ∈ [t-b, t-a] ∩ [0, t]` of
/// `min(x2(τ), min of x1 at the events in (τ, t])`.
pub fn since_at(x1: &Signal, x2: &Signal, events: &Events, a: f64, b: Option<f64>, t: f64) -> ExtReal {
    if t < a {
        return ExtReal::NegInf;
    }
    let hi = t - a;
    let lo = b.map_or(0.0, |b| (t - b).max(0.0));
    let mut inner = events.within(hi, t).fold(ExtReal::PosInf, |m, e| m.min(x1.value_at(e)));
    let mut points: Vec<(f64, bool)> =
        x2.starts_in(lo, hi).map(|p| (p, false)).chain(events.within(lo, hi).map(|e| (e, true))).collect();
    points.sort_by(|p, q| q.0.total_cmp(&p.0).then(q.1.cmp(&p.1)));
    points.dedup_by(|later, earlier| later.0 == earlier.0);
    let mut best = ExtReal::NegInf;
    for (p, is_event) in points {
        best = best.max(x2.value_at(p).min(inner));
        if is_event {
            inner = inner.min(x1.value_at(p));
        }
    }
    best.max(x2.value_at(lo).min(inner))
}

/// DelayedUntil over `[a, b]` at `t`: `−∞` while `t < b`, otherwise sup over
/// `τ ∈ [t-b+a, t]` of `min(x2(τ), min over events e ∈ (t-b, τ] of x1(e⁻))`,
/// where `x1(e⁻)` is the value held just before `e`. On a sampling grid
/// this reads the left operand one sample late, like the discrete monitor.
pub fn delayed_until_at(x1: &Signal, x2: &Signal, events: &Events, a: f64, b: f64, t: f64) -> ExtReal {
    if t < b {
        return ExtReal::NegInf;
    }
    let (base, lo) = (t - b, t - b + a);
    let mut inner = events.within(base, lo).fold(ExtReal::PosInf, |m, e| m.min(x1.value_before(e)));
    let mut points: Vec<(f64, bool)> =
        x2.starts_in(lo, t).map(|p| (p, false)).chain(events.within(lo, t).map(|e| (e, true))).collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.cmp(&p.1)));
    points.dedup_by(|later, earlier| later.0 == earlier.0);
    let mut best = x2.value_at(lo).min(inner);
    for (p, is_event) in points {
        if is_event {
            inner = inner.min(x1.value_before(p));
        }
        best = best.max(x2.value_at(p).min(inner));
    }
    best
}

/// Delay by `d`: `x(t - d)`, `−∞` before `d`.
pub fn delay_at(x: &Signal, d: f64, t: f64) -> ExtReal {
    if t < d {
        ExtReal::NegInf
    } else {
        x.value_at(t - d)
    }
}

/// Candidate breakpoints in `(lo, hi]`: every `p + s` for `p` in `points`
/// and `s` in `shifts`, sorted and deduplicated.
pub(crate) fn candidates(points: &[f64], shifts: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out: Vec<f64> =
        points.iter().flat_map(|&p| shifts.iter().map(move |&s| p + s)).filter(|&c| c > lo && c <= hi).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Evaluates `value` at 0 and at every candidate up to `frontier`.
fn tabulate(cands: Vec<f64>, value: impl Fn(f64) -> ExtReal) -> Signal {
    let mut s = Signal::new();
    s.push(0.0, value(0.0));
    for c in cands {
        s.push(c, value(c));
    }
    s
}

fn starts(s: &Signal) -> Vec<f64> {
    s.segments().map(|x| x.0).collect()
}

/// Pointwise min or max of two signals on `[0, frontier]`.
pub fn pw_combine(kind: Extremum, s1: &Signal, s2: &Signal, frontier: f64) -> Signal {
    let pts: Vec<f64> = starts(s1).into_iter().chain(starts(s2)).collect();
    tabulate(candidates(&pts, &[0.0], 0.0, frontier), |t| kind.pick(s1.value_at(t), s2.value_at(t)))
}

/// Once/Historically of `s` over `[a, b]` on `[0, frontier]`.
pub fn pw_window_extremum(kind: Extremum, s: &Signal, a: f64, b: Option<f64>, frontier: f64) -> Signal {
    let mut pts = starts(s);
    pts.push(0.0);
    let shifts: Vec<f64> = std::iter::once(a).chain(b).collect();
    tabulate(candidates(&pts, &shifts, 0.0, frontier), |t| window_at(s, kind, a, b, t))
}

/// Since of `s1`, `s2` over `[a, b]` on `[0, frontier]`, reading `s1` at
/// `events`.
pub fn pw_since(s1: &Signal, s2: &Signal, events: &Events, a: f64, b: Option<f64>, frontier: f64) -> Signal {
    let mut pts = starts(s2);
    pts.extend(events.within(f64::NEG_INFINITY, frontier));
    pts.push(0.0);
    let shifts: Vec<f64> = [0.0, a].into_iter().chain(b).collect();
    tabulate(candidates(&pts, &shifts, 0.0, frontier), |t| since_at(s1, s2, events, a, b, t))
}

/// DelayedUntil of `s1`, `s2` over `[a, b]` on `[0, frontier]`, reading
/// `s1` just before `events`.
pub fn pw_delayed_until(s1: &Signal, s2: &Signal, events: &Events, a: f64, b: f64, frontier: f64) -> Signal {
    let mut pts = starts(s2);
    pts.extend(events.within(f64::NEG_INFINITY, frontier));
    pts.push(0.0);
    tabulate(candidates(&pts, &[0.0, b - a, b], 0.0, frontier), |t| delayed_until_at(s1, s2, events, a, b, t))
}
