//! Symbolic conditional steps, traces, trace sets and their ordering.

pub mod order;
pub mod step;
pub mod term;
pub mod trace;

use thiserror::Error;

pub use order::{glb, lub, set_equiv, set_leq, step_leq, trace_leq, Dim, Universe, DEFAULT_UNIVERSE_CAP};
pub use step::{Guard, Update};
pub use term::{ChanRef, Place, Term};
pub use trace::{CondStep, ConditionalTrace, Interpretation, Terminator, TraceSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("state universe of {size} states exceeds the cap of {cap}")]
    UniverseTooLarge { size: usize, cap: usize },
    #[error("unknown proctype `{0}`")]
    UnknownProctype(String),
}
