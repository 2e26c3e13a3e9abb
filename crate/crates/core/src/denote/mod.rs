//! Expression evaluation, statement denotations, the per-process fixpoint
//! and atomic-block expansion.

mod atomics;
mod expr;
mod process;
mod stmt;

use thiserror::Error;

use crate::state::StateError;

pub use atomics::{atomics, atomics_with, Feasible};
pub use expr::{eval_l, eval_r, resolve_l, resolve_r, LRef};
pub use process::{
    add_else, at, edge_denotations, entry_denotation, iterate, process_denotation, tp_step, PointDenotation,
};
pub use stmt::denote_stmt;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DenoteError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("`{0}` is not writable")]
    NotWritable(String),
    #[error("`{0}` is an array and needs an index")]
    NotScalar(String),
    #[error("`{0}` is not an array")]
    NotArray(String),
    #[error("`{0}` is not a channel")]
    NotChannel(String),
    #[error("channel `{0}` used as a value")]
    ChannelAsValue(String),
    #[error("channel `{chan}` carries {expected} fields, statement has {found}")]
    MessageArity { chan: String, expected: usize, found: usize },
    #[error("run {proctype}: expected {expected} arguments, found {found}")]
    RunArity { proctype: String, expected: usize, found: usize },
    #[error("unknown proctype `{0}`")]
    UnknownProctype(String),
    #[error("initializer of `{name}` has {found} items")]
    InitLength { name: String, found: usize },
    #[error("else branch beside a trace that does not start with a transition")]
    ElseWithoutGuard,
    #[error("marked step at the head of a trace")]
    MarkAtHead,
}

impl From<StateError> for DenoteError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Unbound(n) => DenoteError::Unbound(n),
            other => DenoteError::Unbound(other.to_string()),
        }
    }
}
