//! Per-operator streaming state for the discrete monitor.

use std::collections::VecDeque;

use super::wedge::{Extremum, Wedge};
use crate::ext::ExtReal;

/// Fixed delay: returns the value pushed `len` updates ago, `fill` before
/// that.
#[derive(Clone, Debug)]
pub struct DelayLine {
    len: usize,
    fill: ExtReal,
    buf: VecDeque<ExtReal>,
}

impl DelayLine {
    pub fn new(len: usize, fill: ExtReal) -> Self {
        DelayLine { len, fill, buf: VecDeque::with_capacity(len) }
    }

    pub fn push(&mut self, x: ExtReal) -> ExtReal {
        if self.len == 0 {
            return x;
        }
        self.buf.push_back(x);
        if self.buf.len() > self.len {
            self.buf.pop_front().expect("nonempty")
        } else {
            self.fill
        }
    }

    pub fn cells(&self) -> usize {
        self.buf.len()
    }
}

/// The last `cap` values of a stream, oldest first.
#[derive(Clone, Debug)]
pub struct Ring {
    cap: usize,
    buf: VecDeque<ExtReal>,
}

impl Ring {
    pub fn new(cap: usize) -> Self {
        Ring { cap, buf: VecDeque::with_capacity(cap) }
    }

    pub fn push(&mut self, x: ExtReal) {
        if self.buf.len() == self.cap {
            self.buf.pop_front();
        }
        self.buf.push_back(x);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// The value pushed `age` updates ago (0 = newest).
    pub fn ago(&self, age: usize) -> ExtReal {
        self.buf[self.buf.len() - 1 - age]
    }
}

/// Since over a bounded window `[a, b]`: O(b) recomputation per update from
/// the last `b + 1` operand values.
#[derive(Clone, Debug)]
pub struct BoundedSince {
    a: usize,
    b: usize,
    x1: Ring,
    x2: Ring,
}

impl BoundedSince {
    pub fn new(a: usize, b: usize) -> Self {
        BoundedSince { a, b, x1: Ring::new(b + 1), x2: Ring::new(b + 1) }
    }

    /// Max over `t' ∈ [t-b, t-a] ∩ [0, t]` of
    /// `min(x2[t'], min over t'' ∈ (t', t] of x1[t''])`.
    pub fn update(&mut self, x1: ExtReal, x2: ExtReal) -> ExtReal {
        self.x1.push(x1);
        self.x2.push(x2);
        let mut best = ExtReal::NegInf;
        let mut lhs = ExtReal::PosInf;
        for age in 0..self.x1.len() {
            if age >= self.a {
                best = best.max(self.x2.ago(age).min(lhs));
            }
            lhs = lhs.min(self.x1.ago(age));
        }
        debug_assert!(self.x1.len() <= self.b + 1);
        best
    }

    pub fn cells(&self) -> usize {
        self.x1.len() + self.x2.len()
    }
}

/// Since over `[a, ∞)`: the `[0, ∞)` recurrence `z = max(x2, min(x1, z))`
/// read `a` steps late, capped by the minimum of `x1` over the last `a`
/// steps.
#[derive(Clone, Debug)]
pub struct UnboundedSince {
    z: ExtReal,
    late: DelayLine,
    recent: Option<Wedge>,
    t: u64,
}

impl UnboundedSince {
    pub fn new(a: usize) -> Self {
        UnboundedSince {
            z: ExtReal::NegInf,
            late: DelayLine::new(a, ExtReal::NegInf),
            recent: (a > 0).then(|| Wedge::new(Extremum::Min, a as u64)),
            t: 0,
        }
    }

    pub fn update(&mut self, x1: ExtReal, x2: ExtReal) -> ExtReal {
        self.z = x2.max(x1.min(self.z));
        let late = self.late.push(self.z);
        let out = match &mut self.recent {
            Some(w) => w.update(self.t, x1).min(late),
            None => late,
        };
        self.t += 1;
        out
    }

    pub fn cells(&self) -> usize {
        self.late.cells() + self.recent.as_ref().map_or(0, |w| w.width() as usize)
    }

    pub fn wedge(&self) -> Option<&Wedge> {
        self.recent.as_ref()
    }
}

/// Until over `[a, b]` of the operand streams, reported `b` steps late.
/// The left operand is read one step later than in Until: at `t ≥ b` the
/// value is max over `t' ∈ [t-b+a, t]` of
/// `min(x2[t'], min over t'' ∈ (t-b, t'] of x1[t''])`; −∞ while `t < b`.
#[derive(Clone, Debug)]
pub struct DelayedUntil {
    a: usize,
    b: usize,
    x1: Ring,
    x2: Ring,
}

impl DelayedUntil {
    pub fn new(a: usize, b: usize) -> Self {
        DelayedUntil { a, b, x1: Ring::new(b + 1), x2: Ring::new(b + 1) }
    }

    pub fn update(&mut self, x1: ExtReal, x2: ExtReal) -> ExtReal {
        self.x1.push(x1);
        self.x2.push(x2);
        if self.x1.len() <= self.b {
            return ExtReal::NegInf;
        }
        let mut best = ExtReal::NegInf;
        let mut lhs = ExtReal::PosInf;
        // walk t' = t-b .. t, i.e. ages b down to 0
        for age in (0..=self.b).rev() {
            if age < self.b {
                lhs = lhs.min(self.x1.ago(age));
            }
            if age <= self.b - self.a {
                best = best.max(self.x2.ago(age).min(lhs));
            }
        }
        best
    }

    pub fn cells(&self) -> usize {
        self.x1.len() + self.x2.len()
    }
}

/// Runs a fresh bounded Since over paired streams.
pub fn since_bounded_series(a: usize, b: usize, x1: &[ExtReal], x2: &[ExtReal]) -> Vec<ExtReal> {
    let mut s = BoundedSince::new(a, b);
    x1.iter().zip(x2).map(|(&p, &q)| s.update(p, q)).collect()
}

/// Runs a fresh DelayedUntil over paired streams.
pub fn delayed_until_series(a: usize, b: usize, x1: &[ExtReal], x2: &[ExtReal]) -> Vec<ExtReal> {
    let mut s = DelayedUntil::new(a, b);
    x1.iter().zip(x2).map(|(&p, &q)| s.update(p, q)).collect()
}
