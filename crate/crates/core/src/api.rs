//! Stateful specification objects for host-language bindings.
//!
//! The lifecycle is declare → configure → parse → update. Declarations and
//! the semantics mode are fixed once `parse` succeeds. Values leave through
//! `f64`, with the poles mapped to IEEE infinities; NaN never appears.

use indexmap::IndexMap;
use thiserror::Error;

use crate::dense::DenseMonitor;
use crate::discrete::DiscreteMonitor;
use crate::formula::{IoKind, IoSignature, SemanticsMode, SpecModel, TimeDomain, VarRef};
use crate::monitor::MonitorError;
use crate::parser::{parse_spec, validate, SpecError};
use crate::time::{Duration, TimeUnit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifecycleError {
    #[error("`{0}` must be called before parse")]
    AlreadyParsed(&'static str),
    #[error("`{0}` called before parse")]
    NotParsed(&'static str),
    #[error("variable `{0}` is already declared")]
    DuplicateVariable(String),
    #[error("`{0}` is not a variable path")]
    InvalidName(String),
    #[error("unknown io type `{0}` (expected input or output)")]
    UnknownIoType(String),
    #[error("unknown semantics `{0}` (expected standard, output-robustness or input-vacuity)")]
    UnknownSemantics(String),
    #[error("no formula is defined")]
    NoFormula,
    #[error(transparent)]
    Spec(Box<SpecError>),
    #[error(transparent)]
    Monitor(Box<MonitorError>),
}

impl From<SpecError> for LifecycleError {
    fn from(e: SpecError) -> Self {
        LifecycleError::Spec(Box::new(e))
    }
}

impl From<MonitorError> for LifecycleError {
    fn from(e: MonitorError) -> Self {
        LifecycleError::Monitor(Box::new(e))
    }
}

/// Declarations and mode collected before parsing.
#[derive(Clone, Debug, Default)]
struct Setup {
    declarations: IoSignature,
    mode: Option<SemanticsMode>,
}

impl Setup {
    fn declare_var(&mut self, name: &str, io_type: &str) -> Result<(), LifecycleError> {
        let var = VarRef::new(name).ok_or_else(|| LifecycleError::InvalidName(name.to_string()))?;
        let kind = match io_type {
            "input" => IoKind::Input,
            "output" => IoKind::Output,
            _ => return Err(LifecycleError::UnknownIoType(io_type.to_string())),
        };
        if self.declarations.declare(var, kind) {
            Ok(())
        } else {
            Err(LifecycleError::DuplicateVariable(name.to_string()))
        }
    }

    fn set_semantics(&mut self, mode: &str) -> Result<(), LifecycleError> {
        self.mode = Some(SemanticsMode::parse(mode).ok_or_else(|| LifecycleError::UnknownSemantics(mode.to_string()))?);
        Ok(())
    }

    /// Parses `text` and merges the collected declarations into it.
    fn model(&self, text: &str, time_domain: TimeDomain, unit: TimeUnit) -> Result<SpecModel, LifecycleError> {
        let mut model = parse_spec(text)?;
        for (var, kind) in self.declarations.iter() {
            if !model.declarations.declare(var.clone(), kind) {
                return Err(LifecycleError::DuplicateVariable(var.to_string()));
            }
        }
        let diags = validate(&model);
        if !diags.is_empty() {
            return Err(SpecError::Validation(diags).into());
        }
        if model.formulas.is_empty() {
            return Err(LifecycleError::NoFormula);
        }
        if let Some(mode) = self.mode {
            model.mode = mode;
        }
        model.time_domain = time_domain;
        model.default_unit = unit;
        Ok(model)
    }
}

/// A specification monitored over equally spaced samples.
///
/// `update` returns the value of the output formula, the last one defined.
#[derive(Clone, Debug)]
pub struct DiscreteSpecification {
    setup: Setup,
    period: Duration,
    monitor: Option<DiscreteMonitor>,
}

impl DiscreteSpecification {
    /// Samples are `period` apart; bounds without a unit are read in the
    /// period's unit.
    pub fn new(period: Duration) -> Self {
        DiscreteSpecification { setup: Setup::default(), period, monitor: None }
    }

    pub fn declare_var(&mut self, name: &str, io_type: &str) -> Result<(), LifecycleError> {
        self.unparsed("declare_var")?;
        self.setup.declare_var(name, io_type)
    }

    pub fn set_semantics(&mut self, mode: &str) -> Result<(), LifecycleError> {
        self.unparsed("set_semantics")?;
        self.setup.set_semantics(mode)
    }

    pub fn parse(&mut self, text: &str) -> Result<(), LifecycleError> {
        self.unparsed("parse")?;
        let model = self.setup.model(text, TimeDomain::Discrete { period: self.period }, self.period.unit)?;
        self.monitor = Some(DiscreteMonitor::new(&model)?);
        Ok(())
    }

    pub fn update(&mut self, time_index: u64, samples: &[(&str, f64)]) -> Result<f64, LifecycleError> {
        let all = self.update_all(time_index, samples)?;
        Ok(*all.last().expect("at least one formula").1)
    }

    /// Values of every formula, in definition order.
    pub fn update_all(
        &mut self,
        time_index: u64,
        samples: &[(&str, f64)],
    ) -> Result<IndexMap<String, f64>, LifecycleError> {
        let mon = self.monitor.as_mut().ok_or(LifecycleError::NotParsed("update"))?;
        let out = mon.update(time_index, samples.iter().copied())?;
        Ok(out.into_iter().map(|(k, v)| (k, v.to_f64())).collect())
    }

    pub fn monitor(&self) -> Option<&DiscreteMonitor> {
        self.monitor.as_ref()
    }

    fn unparsed(&self, op: &'static str) -> Result<(), LifecycleError> {
        match self.monitor {
            Some(_) => Err(LifecycleError::AlreadyParsed(op)),
            None => Ok(()),
        }
    }
}

/// A specification monitored over piecewise-constant signals; times and
/// unitless bounds are in seconds.
///
/// `update` returns the newly determined segments of the output formula.
#[derive(Clone, Debug, Default)]
pub struct DenseSpecification {
    setup: Setup,
    monitor: Option<DenseMonitor>,
}

impl DenseSpecification {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_var(&mut self, name: &str, io_type: &str) -> Result<(), LifecycleError> {
        self.unparsed("declare_var")?;
        self.setup.declare_var(name, io_type)
    }

    pub fn set_semantics(&mut self, mode: &str) -> Result<(), LifecycleError> {
        self.unparsed("set_semantics")?;
        self.setup.set_semantics(mode)
    }

    pub fn parse(&mut self, text: &str) -> Result<(), LifecycleError> {
        self.unparsed("parse")?;
        let model = self.setup.model(text, TimeDomain::Dense, TimeUnit::S)?;
        self.monitor = Some(DenseMonitor::new(&model)?);
        Ok(())
    }

    pub fn update(&mut self, batches: &[(&str, Vec<(f64, f64)>)]) -> Result<Vec<(f64, f64)>, LifecycleError> {
        let all = self.update_all(batches)?;
        Ok(all.into_iter().last().expect("at least one formula").1)
    }

    /// Newly determined segments of every formula, in definition order.
    pub fn update_all(
        &mut self,
        batches: &[(&str, Vec<(f64, f64)>)],
    ) -> Result<IndexMap<String, Vec<(f64, f64)>>, LifecycleError> {
        let mon = self.monitor.as_mut().ok_or(LifecycleError::NotParsed("update"))?;
        let out = mon.update(batches.iter().map(|(v, b)| (*v, b.iter().copied())))?;
        Ok(out.into_iter().map(|(k, segs)| (k, segs.into_iter().map(|(t, v)| (t, v.to_f64())).collect())).collect())
    }

    pub fn monitor(&self) -> Option<&DenseMonitor> {
        self.monitor.as_ref()
    }

    fn unparsed(&self, op: &'static str) -> Result<(), LifecycleError> {
        match self.monitor {
            Some(_) => Err(LifecycleError::AlreadyParsed(op)),
            None => Ok(()),
        }
    }
}
