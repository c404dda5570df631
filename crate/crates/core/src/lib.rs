//! Online robustness monitoring for Signal Temporal Logic (STL) and its
//! interface-aware variant (IA-STL).
//!
//! The pipeline is parse → pastify → evaluate: a textual specification is
//! parsed into a [`SpecModel`], bounded-future formulas are rewritten into
//! past-only equivalents delayed by their horizon, and the result is
//! evaluated incrementally by a discrete-time or dense-time monitor.

pub mod api;
pub mod bench;
pub mod dense;
pub mod discrete;
pub mod ext;
pub mod format;
pub mod formula;
pub mod gen;
pub mod monitor;
pub mod oracle;
pub mod parser;
pub mod pastify;
pub mod time;
pub mod trace_io;

pub use ext::ExtReal;
pub use formula::{Formula, IoKind, SemanticsMode, SpecModel, VarRef};
pub use parser::{parse_formula, parse_spec, ParseError, SpecError};
