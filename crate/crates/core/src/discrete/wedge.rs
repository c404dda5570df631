use std::collections::VecDeque;

use crate::ext::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    /// The value an empty window reports.
    pub fn identity(self) -> ExtReal {
        match self {
            Extremum::Max => ExtReal::NegInf,
            Extremum::Min => ExtReal::PosInf,
        }
    }

    pub fn pick(self, a: ExtReal, b: ExtReal) -> ExtReal {
        match self {
            Extremum::Max => a.max(b),
            Extremum::Min => a.min(b),
        }
    }

    /// True when `old` can never again be the extremum once `new` is in.
    fn dominated(self, old: ExtReal, new: ExtReal) -> bool {
        match self {
            Extremum::Max => old <= new,
            Extremum::Min => old >= new,
        }
    }
}

/// Sliding-window extremum over the last `width` indices (monotonic deque).
/// Values in the deque are strictly monotone and every element is pushed
/// and popped at most once, so updates are amortized O(1).
#[derive(Clone, Debug)]
pub struct Wedge {
    kind: Extremum,
    width: u64,
    deque: VecDeque<(u64, ExtReal)>,
    last: Option<u64>,
    ops: u64,
    peak: usize,
}

impl Wedge {
    pub fn new(kind: Extremum, width: u64) -> Self {
        assert!(width > 0, "window width must be positive");
        Wedge { kind, width, deque: VecDeque::new(), last: None, ops: 0, peak: 0 }
    }

    /// Inserts `x` at index `t` and returns the extremum over `(t - width, t]`.
    pub fn update(&mut self, t: u64, x: ExtReal) -> ExtReal {
        assert!(self.last.is_none_or(|l| t > l), "wedge indices must increase");
        self.last = Some(t);
        while self.deque.front().is_some_and(|&(i, _)| i + self.width <= t) {
            self.deque.pop_front();
            self.ops += 1;
        }
        while self.deque.back().is_some_and(|&(_, v)| self.kind.dominated(v, x)) {
            self.deque.pop_back();
            self.ops += 1;
        }
        self.deque.push_back((t, x));
        self.ops += 1;
        self.peak = self.peak.max(self.deque.len());
        self.deque.front().expect("just pushed").1
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.deque.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deque.is_empty()
    }

    /// Largest deque length seen so far.
    pub fn peak_len(&self) -> usize {
        self.peak
    }

    /// Total pushes plus pops so far.
    pub fn operations(&self) -> u64 {
        self.ops
    }

    /// Checks the deque invariants against the last inserted index.
    pub fn is_well_formed(&self) -> bool {
        let t = self.last.unwrap_or(0);
        let ordered = self
            .deque
            .iter()
            .zip(self.deque.iter().skip(1))
            .all(|(&(i, u), &(j, v))| i < j && !self.kind.dominated(u, v));
        ordered && self.deque.front().is_none_or(|&(i, _)| i + self.width > t)
    }
}

/// Runs a fresh wedge over `xs` (convenience for examples and tests).
pub fn wedge_series(kind: Extremum, width: u64, xs: &[f64]) -> Vec<ExtReal> {
    let mut w = Wedge::new(kind, width);
    xs.iter().enumerate().map(|(t, &x)| w.update(t as u64, ExtReal::finite(x))).collect()
}
