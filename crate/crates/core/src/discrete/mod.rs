//! Time-triggered monitor: one robustness value per formula per sample,
//! with state bounded by the formula's interval bounds.

mod ops;
mod wedge;

pub use ops::{
    delayed_until_series, since_bounded_series, BoundedSince, DelayLine, DelayedUntil, Ring, UnboundedSince,
};
pub use wedge::{wedge_series, Extremum, Wedge};

use indexmap::IndexMap;

use crate::ext::ExtReal;
use crate::formula::{Formula, SpecModel, TimeDomain};
use crate::monitor::{count, MonitorError, VarRegistry};
use crate::oracle::{classify, eval_classified, PredClass};
use crate::pastify::{pastify_all, HorizonReport, Pastified};
use crate::time::{Decimal, Interval};

/// Sliding extremum behind a delay line: Once/Historically over `[a, b]`
/// or `[a, ∞)`.
#[derive(Clone, Debug)]
enum Window {
    Bounded(Wedge),
    Running(ExtReal),
}

#[derive(Clone, Debug)]
enum Node {
    Pred(crate::formula::Predicate, PredClass),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Prev {
        x: usize,
        last: ExtReal,
    },
    /// `last` holds `prev not x`.
    Rise {
        x: usize,
        last: ExtReal,
    },
    Fall {
        x: usize,
        last: ExtReal,
    },
    Delay {
        x: usize,
        line: DelayLine,
    },
    Window {
        x: usize,
        kind: Extremum,
        line: DelayLine,
        window: Window,
    },
    BoundedSince {
        x1: usize,
        x2: usize,
        state: BoundedSince,
    },
    UnboundedSince {
        x1: usize,
        x2: usize,
        state: UnboundedSince,
    },
    DelayedUntil {
        x1: usize,
        x2: usize,
        state: DelayedUntil,
    },
}

/// A compiled formula: nodes in post-order, the root last.
#[derive(Clone, Debug)]
struct Program {
    nodes: Vec<Node>,
    values: Vec<ExtReal>,
}

fn bounds(i: &Interval) -> (usize, Option<usize>) {
    (count(i.lo.value), i.hi.map(|h| count(h.value)))
}

fn compile(f: &Formula, model: &SpecModel, nodes: &mut Vec<Node>) -> Result<usize, MonitorError> {
    use Formula::*;
    let mut c = |x: &Formula| compile(x, model, nodes);
    let node = match f {
        Pred(p) => Node::Pred(p.clone(), classify(p, model.mode, &model.declarations)),
        Not(x) => Node::Not(c(x)?),
        And(a, b) => Node::And(c(a)?, c(b)?),
        Or(a, b) => Node::Or(c(a)?, c(b)?),
        Implies(a, b) => Node::Implies(c(a)?, c(b)?),
        Prev(x) => Node::Prev { x: c(x)?, last: ExtReal::NegInf },
        Rise(x) => Node::Rise { x: c(x)?, last: ExtReal::NegInf },
        Fall(x) => Node::Fall { x: c(x)?, last: ExtReal::NegInf },
        Delay(d, x) => Node::Delay { x: c(x)?, line: DelayLine::new(count(d.value), ExtReal::NegInf) },
        Once(i, x) | Historically(i, x) => {
            let kind = if matches!(f, Once(..)) { Extremum::Max } else { Extremum::Min };
            let (a, b) = bounds(i);
            let window = match b {
                Some(b) => Window::Bounded(Wedge::new(kind, (b - a + 1) as u64)),
                None => Window::Running(kind.identity()),
            };
            Node::Window { x: c(x)?, kind, line: DelayLine::new(a, kind.identity()), window }
        }
        Since(i, p, q) => {
            let (x1, x2) = (c(p)?, c(q)?);
            match bounds(i) {
                (a, Some(b)) => Node::BoundedSince { x1, x2, state: BoundedSince::new(a, b) },
                (a, None) => Node::UnboundedSince { x1, x2, state: UnboundedSince::new(a) },
            }
        }
        DelayedUntil(i, p, q) => {
            let (a, b) = bounds(i);
            let b = b.expect("delayed until is bounded");
            Node::DelayedUntil { x1: c(p)?, x2: c(q)?, state: ops::DelayedUntil::new(a, b) }
        }
        Next(_) => return Err(MonitorError::Unsupported("next")),
        Eventually(..) => return Err(MonitorError::Unsupported("eventually")),
        Always(..) => return Err(MonitorError::Unsupported("always")),
        Until(..) => return Err(MonitorError::Unsupported("until")),
    };
    nodes.push(node);
    Ok(nodes.len() - 1)
}

impl Program {
    fn new(f: &Formula, model: &SpecModel) -> Result<Self, MonitorError> {
        let mut nodes = Vec::new();
        compile(f, model, &mut nodes)?;
        let values = vec![ExtReal::NegInf; nodes.len()];
        Ok(Program { nodes, values })
    }

    fn step(
        &mut self,
        t: u64,
        lookup: &impl Fn(&crate::formula::VarRef) -> Option<f64>,
    ) -> Result<ExtReal, MonitorError> {
        let v = &mut self.values;
        for (i, node) in self.nodes.iter_mut().enumerate() {
            let out = match node {
                Node::Pred(p, class) => eval_classified(p, *class, lookup)?,
                Node::Not(x) => -v[*x],
                Node::And(a, b) => v[*a].min(v[*b]),
                Node::Or(a, b) => v[*a].max(v[*b]),
                Node::Implies(a, b) => (-v[*a]).max(v[*b]),
                Node::Prev { x, last } => std::mem::replace(last, v[*x]),
                Node::Rise { x, last } => std::mem::replace(last, -v[*x]).min(v[*x]),
                Node::Fall { x, last } => std::mem::replace(last, v[*x]).min(-v[*x]),
                Node::Delay { x, line } => line.push(v[*x]),
                Node::Window { x, kind, line, window } => {
                    let late = line.push(v[*x]);
                    match window {
                        Window::Bounded(w) => w.update(t, late),
                        Window::Running(acc) => {
                            *acc = kind.pick(*acc, late);
                            *acc
                        }
                    }
                }
                Node::BoundedSince { x1, x2, state } => state.update(v[*x1], v[*x2]),
                Node::UnboundedSince { x1, x2, state } => state.update(v[*x1], v[*x2]),
                Node::DelayedUntil { x1, x2, state } => state.update(v[*x1], v[*x2]),
            };
            v[i] = out;
        }
        Ok(*v.last().expect("programs are nonempty"))
    }

    fn cells(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Delay { line, .. } => line.cells(),
                Node::Window { line, window, .. } => {
                    line.cells() + if let Window::Bounded(w) = window { w.width() as usize } else { 0 }
                }
                Node::BoundedSince { state, .. } => state.cells(),
                Node::UnboundedSince { state, .. } => state.cells(),
                Node::DelayedUntil { state, .. } => state.cells(),
                _ => 0,
            })
            .sum()
    }

    fn wedges(&self) -> impl Iterator<Item = &Wedge> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Window { window: Window::Bounded(w), .. } => Some(w),
            Node::UnboundedSince { state, .. } => state.wedge(),
            _ => None,
        })
    }
}

/// Online discrete-time monitor over a pastified model.
#[derive(Clone, Debug)]
pub struct DiscreteMonitor {
    plans: Vec<Pastified>,
    fresh: Vec<Program>,
    programs: Vec<Program>,
    registry: VarRegistry,
    next: u64,
}

impl DiscreteMonitor {
    /// Pastifies the model and sizes every buffer from its bounds.
    pub fn new(model: &SpecModel) -> Result<Self, MonitorError> {
        if !matches!(model.time_domain, TimeDomain::Discrete { .. }) {
            return Err(MonitorError::WrongTimeDomain("discrete"));
        }
        let plans = pastify_all(model)?;
        let programs = plans.iter().map(|p| Program::new(&p.pastified, model)).collect::<Result<Vec<_>, _>>()?;
        Ok(DiscreteMonitor { plans, fresh: programs.clone(), programs, registry: VarRegistry::new(model), next: 0 })
    }

    /// Feeds the samples of index `t` and returns each formula's value.
    pub fn update<S: AsRef<str>>(
        &mut self,
        t: u64,
        samples: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<IndexMap<String, ExtReal>, MonitorError> {
        if t != self.next {
            return Err(MonitorError::OutOfOrderUpdate { expected: self.next, got: t });
        }
        let row = self.registry.collect(samples)?;
        let registry = &self.registry;
        let lookup = |v: &crate::formula::VarRef| registry.slot_of(v).map(|i| row[i]);
        let mut out = IndexMap::with_capacity(self.programs.len());
        for (plan, prog) in self.plans.iter().zip(&mut self.programs) {
            out.insert(plan.name.clone(), prog.step(t, &lookup)?);
        }
        self.next += 1;
        Ok(out)
    }

    /// Back to the freshly constructed state.
    pub fn reset(&mut self) {
        self.programs.clone_from(&self.fresh);
        self.next = 0;
    }

    /// The index the next update must carry.
    pub fn next_index(&self) -> u64 {
        self.next
    }

    pub fn formulas(&self) -> &[Pastified] {
        &self.plans
    }

    pub fn report(&self, name: &str) -> Option<HorizonReport> {
        self.plans.iter().find(|p| p.name == name).map(|p| p.report)
    }

    /// Largest `L + H` over all formulas, in samples.
    pub fn warmup(&self) -> u64 {
        self.plans.iter().map(|p| count(p.report.warmup()) as u64).max().unwrap_or(0)
    }

    /// Variables each update must provide.
    pub fn variables(&self) -> impl Iterator<Item = &crate::formula::VarRef> {
        self.registry.vars().iter()
    }

    /// Stored history cells: occupied delay/ring buffer slots plus the
    /// widths of all sliding windows.
    pub fn memory_cells(&self) -> usize {
        self.programs.iter().map(Program::cells).sum()
    }

    /// Longest deque any sliding window has held.
    pub fn max_wedge_len(&self) -> usize {
        self.programs.iter().flat_map(Program::wedges).map(Wedge::peak_len).max().unwrap_or(0)
    }

    /// Total deque pushes and pops so far.
    pub fn wedge_operations(&self) -> u64 {
        self.programs.iter().flat_map(Program::wedges).map(Wedge::operations).sum()
    }

    pub fn horizon(&self, name: &str) -> Option<Decimal> {
        self.report(name).map(|r| r.horizon)
    }
}
