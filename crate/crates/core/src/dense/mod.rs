//! Event-driven monitor over piecewise-constant signals in continuous time.
//!
//! Inputs arrive as `(time, value)` samples, each holding until the next
//! one of the same variable. After every update the monitor reports, per
//! formula, the output segments newly determined by the inputs received so
//! far. Segments never get retracted.
//!
//! Since and DelayedUntil read their left operand at input event times
//! (DelayedUntil just before each event), so that a sampled trace fed as
//! segments reproduces the discrete monitor at sample times.

mod signal;

pub use signal::{
    delay_at, delayed_until_at, pw_combine, pw_delayed_until, pw_since, pw_window_extremum, since_at, window_at,
    Events, Signal,
};

use indexmap::IndexMap;

use crate::discrete::Extremum;
use crate::ext::ExtReal;
use crate::formula::{Formula, Predicate, SpecModel, TimeDomain, VarRef};
use crate::monitor::{MonitorError, VarRegistry};
use crate::oracle::{classify, eval_classified, PredClass};
use crate::pastify::{pastify_all, HorizonReport, Pastified};
use crate::time::Interval;
use signal::candidates;

/// Output segments: `(start time, value)`, consecutive values distinct.
pub type Segments = Vec<(f64, ExtReal)>;

#[derive(Clone, Debug)]
enum Op {
    Pred(Predicate, PredClass, Vec<usize>),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Delay(usize, f64),
    Window {
        x: usize,
        kind: Extremum,
        a: f64,
        b: Option<f64>,
    },
    /// Window over `[a, ∞)` folded into a running extremum of the
    /// segments starting at or before `folded`.
    Running {
        x: usize,
        kind: Extremum,
        a: f64,
        acc: ExtReal,
        folded: f64,
    },
    Since {
        x1: usize,
        x2: usize,
        a: f64,
        b: f64,
    },
    /// Since over `[a, ∞)`: the `[0, ∞)` value `z` is advanced through the
    /// breakpoints up to `through`, then capped by the left operand's events
    /// in the last `a`.
    RunningSince {
        x1: usize,
        x2: usize,
        a: f64,
        z: ExtReal,
        through: f64,
    },
    DelayedUntil {
        x1: usize,
        x2: usize,
        a: f64,
        b: f64,
    },
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    out: Signal,
    /// How far back the parent reads this node's output.
    lookback: f64,
}

fn seconds(i: &Interval) -> (f64, Option<f64>) {
    (i.lo.value.to_f64(), i.hi.map(|h| h.value.to_f64()))
}

fn compile(f: &Formula, model: &SpecModel, reg: &VarRegistry, nodes: &mut Vec<Node>) -> Result<usize, MonitorError> {
    use Formula::*;
    let mut c = |x: &Formula, look: f64| -> Result<usize, MonitorError> {
        let i = compile(x, model, reg, nodes)?;
        nodes[i].lookback = look;
        Ok(i)
    };
    let op = match f {
        Pred(p) => {
            let slots = p.vars().into_iter().filter_map(|v| reg.slot_of(v)).collect();
            Op::Pred(p.clone(), classify(p, model.mode, &model.declarations), slots)
        }
        Not(x) => Op::Not(c(x, 0.0)?),
        And(p, q) => Op::And(c(p, 0.0)?, c(q, 0.0)?),
        Or(p, q) => Op::Or(c(p, 0.0)?, c(q, 0.0)?),
        Implies(p, q) => Op::Implies(c(p, 0.0)?, c(q, 0.0)?),
        Delay(d, x) => {
            let d = d.value.to_f64();
            Op::Delay(c(x, d)?, d)
        }
        Once(i, x) | Historically(i, x) => {
            let kind = if matches!(f, Once(..)) { Extremum::Max } else { Extremum::Min };
            match seconds(i) {
                (a, Some(b)) => Op::Window { x: c(x, b)?, kind, a, b: Some(b) },
                (a, None) => Op::Running { x: c(x, a)?, kind, a, acc: kind.identity(), folded: f64::NEG_INFINITY },
            }
        }
        Since(i, p, q) => match seconds(i) {
            (a, Some(b)) => Op::Since { x1: c(p, b)?, x2: c(q, b)?, a, b },
            (a, None) => {
                Op::RunningSince { x1: c(p, a)?, x2: c(q, a)?, a, z: ExtReal::NegInf, through: f64::NEG_INFINITY }
            }
        },
        DelayedUntil(i, p, q) => {
            let (a, b) = seconds(i);
            let b = b.expect("delayed until is bounded");
            Op::DelayedUntil { x1: c(p, b)?, x2: c(q, b)?, a, b }
        }
        Prev(_) => return Err(MonitorError::Unsupported("prev")),
        Next(_) => return Err(MonitorError::Unsupported("next")),
        Rise(_) => return Err(MonitorError::Unsupported("rise")),
        Fall(_) => return Err(MonitorError::Unsupported("fall")),
        Eventually(..) => return Err(MonitorError::Unsupported("eventually")),
        Always(..) => return Err(MonitorError::Unsupported("always")),
        Until(..) => return Err(MonitorError::Unsupported("until")),
    };
    nodes.push(Node { op, out: Signal::new(), lookback: 0.0 });
    Ok(nodes.len() - 1)
}

/// Shared, read-only view of the inputs during one evaluation pass.
struct Inputs<'a> {
    signals: &'a [Signal],
    vars: &'a [VarRef],
    events: &'a Events,
}

fn starts_in(s: &Signal, lo: f64, hi: f64) -> Vec<f64> {
    s.starts_in(lo, hi).collect()
}

/// Starts that can still shift into `(lo, hi]`, plus time 0 (where a
/// shifted window first becomes nonempty).
fn shiftable(s: &Signal, lo: f64, hi: f64, max_shift: f64) -> Vec<f64> {
    let mut v = starts_in(s, lo - max_shift, hi);
    v.push(0.0);
    v
}

impl Node {
    /// Extends the output over `(lo, hi]`; the first pass (`lo = −∞`)
    /// starts at time 0.
    fn extend(&mut self, done: &[Node], inp: &Inputs, lo: f64, hi: f64) -> Result<(), MonitorError> {
        let kid = |i: usize| &done[i].out;
        let (cands, first) = (
            match &self.op {
                Op::Pred(_, _, slots) => {
                    let pts: Vec<f64> = slots.iter().flat_map(|&s| starts_in(&inp.signals[s], lo, hi)).collect();
                    candidates(&pts, &[0.0], lo, hi)
                }
                Op::Not(x) => starts_in(kid(*x), lo, hi),
                Op::And(p, q) | Op::Or(p, q) | Op::Implies(p, q) => {
                    let pts: Vec<f64> =
                        starts_in(kid(*p), lo, hi).into_iter().chain(starts_in(kid(*q), lo, hi)).collect();
                    candidates(&pts, &[0.0], lo, hi)
                }
                Op::Delay(x, d) => candidates(&shiftable(kid(*x), lo, hi, *d), &[*d], lo, hi),
                Op::Window { x, a, b, .. } => {
                    let b = b.expect("bounded window");
                    candidates(&shiftable(kid(*x), lo, hi, b), &[*a, b], lo, hi)
                }
                Op::Running { x, a, .. } => candidates(&shiftable(kid(*x), lo, hi, *a), &[*a], lo, hi),
                Op::Since { x2, a, b, .. } => {
                    let mut pts = shiftable(kid(*x2), lo, hi, *b);
                    pts.extend(inp.events.within(lo - b, hi));
                    candidates(&pts, &[0.0, *a, *b], lo, hi)
                }
                Op::RunningSince { x2, a, .. } => {
                    let mut pts = shiftable(kid(*x2), lo, hi, *a);
                    pts.extend(inp.events.within(lo - a, hi));
                    candidates(&pts, &[0.0, *a], lo, hi)
                }
                Op::DelayedUntil { x2, a, b, .. } => {
                    let mut pts = shiftable(kid(*x2), lo, hi, *b);
                    pts.extend(inp.events.within(lo - b, hi));
                    candidates(&pts, &[0.0, b - a, *b], lo, hi)
                }
            },
            lo == f64::NEG_INFINITY,
        );
        let times = first.then_some(0.0).into_iter().chain(cands.into_iter().filter(|&c| c > 0.0));
        for t in times {
            let v = self.value(done, inp, t)?;
            self.out.push(t, v);
        }
        Ok(())
    }

    fn value(&mut self, done: &[Node], inp: &Inputs, t: f64) -> Result<ExtReal, MonitorError> {
        let at = |i: usize| done[i].out.value_at(t);
        Ok(match &mut self.op {
            Op::Pred(p, class, _) => {
                let lookup =
                    |v: &VarRef| inp.vars.iter().position(|u| u == v).map(|i| inp.signals[i].value_at(t).to_f64());
                eval_classified(p, *class, &lookup)?
            }
            Op::Not(x) => -at(*x),
            Op::And(p, q) => at(*p).min(at(*q)),
            Op::Or(p, q) => at(*p).max(at(*q)),
            Op::Implies(p, q) => (-at(*p)).max(at(*q)),
            Op::Delay(x, d) => delay_at(&done[*x].out, *d, t),
            Op::Window { x, kind, a, b } => window_at(&done[*x].out, *kind, *a, *b, t),
            Op::Running { x, kind, a, acc, folded } => {
                if t < *a {
                    return Ok(kind.identity());
                }
                let s = &done[*x].out;
                let upto = t - *a;
                if *folded < s.first_start().unwrap_or(0.0) {
                    *acc = kind.pick(*acc, s.value_at(s.first_start().unwrap_or(0.0)));
                    *folded = s.first_start().unwrap_or(0.0);
                }
                for st in s.starts_in(*folded, upto).collect::<Vec<_>>() {
                    *acc = kind.pick(*acc, s.value_at(st));
                    *folded = st;
                }
                *acc
            }
            Op::Since { x1, x2, a, b } => since_at(&done[*x1].out, &done[*x2].out, inp.events, *a, Some(*b), t),
            Op::RunningSince { x1, x2, a, z, through } => {
                if t < *a {
                    return Ok(ExtReal::NegInf);
                }
                let (s1, s2) = (&done[*x1].out, &done[*x2].out);
                let upto = t - *a;
                let mut pts: Vec<(f64, bool)> = s2
                    .starts_in(*through, upto)
                    .map(|p| (p, false))
                    .chain(inp.events.within(*through, upto).map(|e| (e, true)))
                    .collect();
                if *through < 0.0 && !pts.iter().any(|p| p.0 == 0.0) {
                    pts.push((0.0, false));
                }
                pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.cmp(&p.1)));
                pts.dedup_by(|later, earlier| later.0 == earlier.0);
                for (p, is_event) in pts {
                    let lhs = if is_event { s1.value_at(p) } else { ExtReal::PosInf };
                    *z = s2.value_at(p).max(lhs.min(*z));
                    *through = p;
                }
                inp.events.within(upto, t).fold(*z, |m, e| m.min(s1.value_at(e)))
            }
            Op::DelayedUntil { x1, x2, a, b } => {
                delayed_until_at(&done[*x1].out, &done[*x2].out, inp.events, *a, *b, t)
            }
        })
    }

    fn reset(&mut self) {
        self.out = Signal::new();
        match &mut self.op {
            Op::Running { kind, acc, folded, .. } => {
                *acc = kind.identity();
                *folded = f64::NEG_INFINITY;
            }
            Op::RunningSince { z, through, .. } => {
                *z = ExtReal::NegInf;
                *through = f64::NEG_INFINITY;
            }
            _ => {}
        }
    }
}

/// Dense-time monitor for every formula of a model.
#[derive(Clone, Debug)]
pub struct DenseMonitor {
    formulas: Vec<Pastified>,
    programs: Vec<Vec<Node>>,
    registry: VarRegistry,
    inputs: Vec<Signal>,
    last_time: Vec<Option<f64>>,
    events: Events,
    event_lookback: f64,
    frontier: Option<f64>,
    latest: Option<f64>,
}

impl DenseMonitor {
    /// Pastifies the model and prepares one program per formula. The model
    /// must use dense time; Prev, Next, Rise and Fall are rejected.
    pub fn new(model: &SpecModel) -> Result<Self, MonitorError> {
        if !matches!(model.time_domain, TimeDomain::Dense) {
            return Err(MonitorError::WrongTimeDomain("dense"));
        }
        let formulas = pastify_all(model)?;
        let registry = VarRegistry::new(model);
        let mut programs = Vec::new();
        let mut event_lookback: f64 = 0.0;
        for p in &formulas {
            let mut nodes = Vec::new();
            compile(&p.pastified, model, &registry, &mut nodes)?;
            for n in &nodes {
                match n.op {
                    Op::Since { b, .. } => event_lookback = event_lookback.max(b),
                    Op::RunningSince { a, .. } => event_lookback = event_lookback.max(a),
                    Op::DelayedUntil { b, .. } => event_lookback = event_lookback.max(b),
                    _ => {}
                }
            }
            programs.push(nodes);
        }
        let n = registry.vars().len();
        Ok(DenseMonitor {
            formulas,
            programs,
            registry,
            inputs: vec![Signal::new(); n],
            last_time: vec![None; n],
            events: Events::new(),
            event_lookback,
            frontier: None,
            latest: None,
        })
    }

    /// Appends samples and returns, per formula, the output segments that
    /// became determined. A batch is validated as a whole before any of it
    /// is applied.
    pub fn update<S, B>(
        &mut self,
        batch: impl IntoIterator<Item = (S, B)>,
    ) -> Result<IndexMap<String, Segments>, MonitorError>
    where
        S: AsRef<str>,
        B: IntoIterator<Item = (f64, f64)>,
    {
        let mut staged: Vec<Vec<(f64, f64)>> = vec![Vec::new(); self.inputs.len()];
        let mut latest = self.latest;
        for (name, samples) in batch {
            let slot = self.registry.slot(name.as_ref())?;
            for (time, x) in samples {
                let Some(i) = slot else {
                    latest = Some(latest.map_or(time, |l| l.max(time)));
                    continue;
                };
                let var = || self.registry.vars()[i].clone();
                let last = staged[i].last().map(|s| s.0).or(self.last_time[i]);
                match last {
                    None if time != 0.0 => return Err(MonitorError::LateStart { var: var(), time }),
                    Some(last) if !time.is_finite() || time <= last => {
                        return Err(MonitorError::NonMonotoneTime { var: var(), time, last })
                    }
                    _ => {}
                }
                if !x.is_finite() {
                    return Err(MonitorError::NonFiniteSample { var: var() });
                }
                staged[i].push((time, x));
                latest = Some(latest.map_or(time, |l| l.max(time)));
            }
        }
        for (i, samples) in staged.into_iter().enumerate() {
            for &(time, x) in &samples {
                self.inputs[i].push(time, ExtReal::finite(x));
            }
            self.events.extend(samples.iter().map(|s| s.0));
            if let Some(&(time, _)) = samples.last() {
                self.last_time[i] = Some(time);
            }
        }
        self.latest = latest;
        let frontier = if self.inputs.is_empty() {
            latest
        } else {
            self.last_time.iter().copied().try_fold(f64::INFINITY, |m, t| t.map(|t| m.min(t)))
        };
        let mut out: IndexMap<String, Segments> = self.formulas.iter().map(|p| (p.name.clone(), Vec::new())).collect();
        let Some(hi) = frontier.filter(|&f| self.frontier.is_none_or(|old| f > old)) else {
            return Ok(out);
        };
        let lo = self.frontier.unwrap_or(f64::NEG_INFINITY);
        let inp = Inputs { signals: &self.inputs, vars: self.registry.vars(), events: &self.events };
        for (nodes, segs) in self.programs.iter_mut().zip(out.values_mut()) {
            for k in 0..nodes.len() {
                let (done, rest) = nodes.split_at_mut(k);
                rest[0].extend(done, &inp, lo, hi)?;
            }
            let root = &nodes.last().expect("programs are nonempty").out;
            segs.extend(root.segments().filter(|s| s.0 > lo));
            for n in nodes.iter_mut() {
                n.out.prune_before(hi - n.lookback);
            }
        }
        for s in &mut self.inputs {
            s.prune_before(hi);
        }
        self.events.prune_before(hi - self.event_lookback);
        self.frontier = Some(hi);
        Ok(out)
    }

    /// Forgets all input and output; the next update starts again at 0.
    pub fn reset(&mut self) {
        for nodes in &mut self.programs {
            nodes.iter_mut().for_each(Node::reset);
        }
        self.inputs.iter_mut().for_each(|s| *s = Signal::new());
        self.last_time.iter_mut().for_each(|t| *t = None);
        self.events = Events::new();
        self.frontier = None;
        self.latest = None;
    }

    /// Time up to which outputs have been reported.
    pub fn frontier(&self) -> Option<f64> {
        self.frontier
    }

    pub fn formulas(&self) -> &[Pastified] {
        &self.formulas
    }

    pub fn report(&self, name: &str) -> Option<HorizonReport> {
        self.formulas.iter().find(|p| p.name == name).map(|p| p.report)
    }

    pub fn variables(&self) -> impl Iterator<Item = &VarRef> {
        self.registry.vars().iter()
    }

    /// Segments and events currently held, inputs included.
    pub fn retained(&self) -> usize {
        let nodes: usize = self.programs.iter().flatten().map(|n| n.out.len()).sum();
        nodes + self.inputs.iter().map(Signal::len).sum::<usize>() + self.events.len()
    }
}
