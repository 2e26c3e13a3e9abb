//! Program-level phase: declaration denotations, the program fixpoint,
//! interleaving and state propagation.

mod decls;
mod interleave;
mod propagate;

use thiserror::Error;

use crate::denote::DenoteError;
use crate::domain::DomainError;

pub use decls::{denote_declarations, end_trace, program_fixpoint};
pub use interleave::{interlv, is_sync_recv, is_sync_send, synch, wantsynch, Choice, Frontier};
pub use propagate::{propagate, sem_prog, sem_prog_from, DiscardDiagnostic, Interner, Propagation, StateSequence, Termination};

/// Switches shared by the fixpoint and the interleaving.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Drop suspension branches whose guard fails on every state of the process universe.
    pub prune_unsat: bool,
    /// Let unpaired rendezvous steps interleave on their own.
    pub literal_interlv: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("spawn step reached state propagation")]
    SpawnInPropagate,
    #[error("spawn of {0} without a preceding allocation")]
    SpawnWithoutAlloc(String),
    #[error(transparent)]
    Denote(#[from] DenoteError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
