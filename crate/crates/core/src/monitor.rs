//! Pieces shared by the discrete and dense monitors.

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::{EvalError, SpecModel, VarRef};
use crate::pastify::PastifyError;
use crate::time::Decimal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error(transparent)]
    Pastify(#[from] PastifyError),
    #[error("update for index {got}, expected {expected}")]
    OutOfOrderUpdate { expected: u64, got: u64 },
    #[error("no sample for variable `{0}`")]
    MissingVariable(VarRef),
    #[error("variable `{0}` sampled twice in one update")]
    DuplicateVariable(VarRef),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{var}`: time {time} does not advance past {last}")]
    NonMonotoneTime { var: VarRef, time: f64, last: f64 },
    #[error("variable `{var}` starts at time {time}; signals must start at 0")]
    LateStart { var: VarRef, time: f64 },
    #[error("`{0}` is not supported by this monitor")]
    Unsupported(&'static str),
    #[error("sample value for `{var}` is not finite")]
    NonFiniteSample { var: VarRef },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the model is not configured for {0} time")]
    WrongTimeDomain(&'static str),
}

/// Input variables of a model: every variable a formula reads gets a slot.
/// Declared variables no formula reads are accepted and ignored.
#[derive(Debug, Clone)]
pub(crate) struct VarRegistry {
    vars: Vec<VarRef>,
    slots: HashMap<String, usize>,
    declarations: crate::formula::IoSignature,
}

impl VarRegistry {
    pub(crate) fn new(model: &SpecModel) -> Self {
        let vars: Vec<VarRef> = model.variables().into_iter().collect();
        let slots = vars.iter().enumerate().map(|(i, v)| (v.as_str().to_string(), i)).collect();
        VarRegistry { vars, slots, declarations: model.declarations.clone() }
    }

    pub(crate) fn vars(&self) -> &[VarRef] {
        &self.vars
    }

    /// Slot of `name`, `None` for declared-but-unused variables.
    pub(crate) fn slot(&self, name: &str) -> Result<Option<usize>, MonitorError> {
        if let Some(&i) = self.slots.get(name) {
            return Ok(Some(i));
        }
        match VarRef::new(name) {
            Some(v) if self.declarations.is_declared(&v) => Ok(None),
            _ => Err(MonitorError::UnknownVariable(name.to_string())),
        }
    }

    pub(crate) fn slot_of(&self, v: &VarRef) -> Option<usize> {
        self.slots.get(v.as_str()).copied()
    }

    /// One value per slot; every variable exactly once, values finite.
    pub(crate) fn collect<S: AsRef<str>>(
        &self,
        samples: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Vec<f64>, MonitorError> {
        let mut row: Vec<Option<f64>> = vec![None; self.vars.len()];
        for (name, x) in samples {
            let Some(i) = self.slot(name.as_ref())? else { continue };
            if row[i].is_some() {
                return Err(MonitorError::DuplicateVariable(self.vars[i].clone()));
            }
            if !x.is_finite() {
                return Err(MonitorError::NonFiniteSample { var: self.vars[i].clone() });
            }
            row[i] = Some(x);
        }
        row.into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| MonitorError::MissingVariable(self.vars[i].clone())))
            .collect()
    }
}

/// Integer value of a resolved sample-count bound.
pub(crate) fn count(d: Decimal) -> usize {
    d.to_u64().expect("resolved bounds are sample counts") as usize
}
