//! Differential check of the denotational pipeline against the oracle.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::Model;
use crate::oracle::run_bounded;
use crate::state::SystemState;
use crate::system::{sem_prog, Options, StateSequence, SystemError, Termination};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompareReport {
    pub max_len: u32,
    pub denotational: usize,
    pub operational: usize,
    /// Oracle runs with no denotational counterpart.
    pub missing: Vec<StateSequence>,
    /// Denotational sequences the oracle cannot produce.
    pub extra: Vec<StateSequence>,
    /// Sequences cut before the length bound.
    pub premature: Vec<StateSequence>,
    pub deadlocks: usize,
    pub diagnostics: usize,
}

impl CompareReport {
    pub fn matches(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.premature.is_empty()
    }
}

pub fn compare(
    model: &Model,
    sigma0: &SystemState,
    k: u32,
    depth: u32,
    max_len: u32,
    opts: Options,
) -> Result<CompareReport, SystemError> {
    let den = sem_prog(model, sigma0, k, depth, max_len, opts)?;
    let (ok, premature): (BTreeSet<StateSequence>, BTreeSet<StateSequence>) = den
        .sequences
        .iter()
        .cloned()
        .partition(|s| s.termination == Termination::Completed || s.len() == max_len as usize);
    let ops = run_bounded(model, sigma0, max_len as usize);
    Ok(CompareReport {
        max_len,
        denotational: ok.len(),
        operational: ops.sequences.len(),
        missing: ops.sequences.difference(&ok).cloned().collect(),
        extra: ok.difference(&ops.sequences).cloned().collect(),
        premature: premature.into_iter().collect(),
        deadlocks: ops.deadlocks.len(),
        diagnostics: den.diagnostics.len(),
    })
}
