use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::interleave::{Choice, Frontier};
use super::{program_fixpoint, Options, SystemError};
use crate::domain::{CondStep, ConditionalTrace, Terminator, TraceSet};
use crate::model::Model;
use crate::state::SystemState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Completed,
    Cut,
}

/// States reached after each step, excluding the initial state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StateSequence {
    pub states: Vec<Arc<SystemState>>,
    pub termination: Termination,
}

impl StateSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The first `n` states, cut if anything was dropped.
    pub fn prefix(&self, n: usize) -> StateSequence {
        if n >= self.len() {
            return self.clone();
        }
        StateSequence { states: self.states[..n].to_vec(), termination: Termination::Cut }
    }
}

impl fmt::Display for StateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                write!(f, " . ")?;
            }
            write!(f, "{s}")?;
        }
        match self.termination {
            Termination::Completed => write!(f, " . END"),
            Termination::Cut => write!(f, " . ..."),
        }
    }
}

/// A step dropped because its guard failed after `prefix`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DiscardDiagnostic {
    pub prefix: Vec<Arc<SystemState>>,
    pub guard: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Propagation {
    pub sequences: BTreeSet<StateSequence>,
    pub diagnostics: BTreeSet<DiscardDiagnostic>,
}

/// Shares equal states between sequences.
#[derive(Default)]
pub struct Interner(HashMap<SystemState, Arc<SystemState>>);

impl Interner {
    pub fn get(&mut self, s: SystemState) -> Arc<SystemState> {
        self.0.entry(s).or_insert_with_key(|k| Arc::new(k.clone())).clone()
    }
}

fn prop_rec(
    state: &SystemState,
    traces: &[(&ConditionalTrace, usize)],
    prefix: &mut Vec<Arc<SystemState>>,
    interner: &mut Interner,
    out: &mut Propagation,
) -> Result<(), SystemError> {
    let mut classes: Vec<(&CondStep, Vec<(&ConditionalTrace, usize)>)> = Vec::new();
    for &(t, pos) in traces {
        match t.steps.get(pos) {
            None => {
                let termination = match t.end {
                    Terminator::Final => Termination::Completed,
                    Terminator::Truncated(_) => Termination::Cut,
                    Terminator::Open => continue,
                };
                out.sequences.insert(StateSequence { states: prefix.clone(), termination });
            }
            Some(s) => match classes.iter_mut().find(|(h, _)| *h == s) {
                Some((_, v)) => v.push((t, pos + 1)),
                None => classes.push((s, vec![(t, pos + 1)])),
            },
        }
    }
    for (step, cont) in classes {
        let CondStep::Trans { guard, update, .. } = step else {
            return Err(SystemError::SpawnInPropagate);
        };
        if !guard.eval(state) {
            out.diagnostics.insert(DiscardDiagnostic { prefix: prefix.clone(), guard: guard.render_at(state) });
            continue;
        }
        let next = interner.get(update.apply(state));
        prefix.push(next.clone());
        prop_rec(&next, &cont, prefix, interner, out)?;
        prefix.pop();
    }
    Ok(())
}

/// Feeds `sigma` through every trace of `s`, dropping traces at their first failing guard.
pub fn propagate(sigma: &SystemState, s: &TraceSet) -> Result<Propagation, SystemError> {
    let traces: Vec<(&ConditionalTrace, usize)> = s.iter().map(|t| (t, 0)).collect();
    let mut out = Propagation::default();
    prop_rec(sigma, &traces, &mut Vec::new(), &mut Interner::default(), &mut out)?;
    Ok(out)
}

struct Search<'a> {
    literal: bool,
    interner: &'a mut Interner,
    out: &'a mut Propagation,
}

impl Search<'_> {
    fn run(
        &mut self,
        f: Frontier,
        state: &SystemState,
        fuel: u32,
        prefix: &mut Vec<Arc<SystemState>>,
    ) -> Result<(), SystemError> {
        let mut f = f;
        f.settle()?;
        if f.is_empty() {
            self.out.sequences.insert(StateSequence { states: prefix.clone(), termination: Termination::Completed });
            return Ok(());
        }
        if fuel == 0 {
            self.out.sequences.insert(StateSequence { states: prefix.clone(), termination: Termination::Cut });
            return Ok(());
        }
        if f.truncated().is_some() {
            self.out.sequences.insert(StateSequence { states: prefix.clone(), termination: Termination::Cut });
        }
        let choices = f.choices(self.literal);
        let mut enabled_owner = vec![false; choices.len()];
        let mut failed = Vec::new();
        let mut live = Vec::new();
        for (i, c) in choices.iter().enumerate() {
            match c.step() {
                Some(CondStep::Trans { guard, .. }) if !guard.eval(state) => failed.push((i, guard)),
                _ => {
                    enabled_owner[i] = true;
                    live.push(i);
                }
            }
        }
        let blocked = |comp: usize| {
            !choices.iter().enumerate().any(|(i, c)| enabled_owner[i] && involves(c, comp))
        };
        for (i, guard) in failed {
            if choices[i].owner().is_some_and(blocked) {
                self.out.diagnostics.insert(DiscardDiagnostic { prefix: prefix.clone(), guard: guard.render_at(state) });
            }
        }
        for i in live {
            let c = &choices[i];
            let next = f.advance(c)?;
            match c.step() {
                Some(CondStep::Trans { update, .. }) => {
                    let s = self.interner.get(update.apply(state));
                    prefix.push(s.clone());
                    self.run(next, &s, fuel - 1, prefix)?;
                    prefix.pop();
                }
                Some(CondStep::Spawn { .. }) => return Err(SystemError::SpawnInPropagate),
                None => self.run(next, state, fuel, prefix)?,
            }
        }
        Ok(())
    }
}

fn involves(c: &Choice, comp: usize) -> bool {
    match c {
        Choice::Single { comp: i, .. } | Choice::Dissolve { comp: i, .. } | Choice::Finish { comp: i } => *i == comp,
        Choice::Pair { send, recv, .. } => send.0 == comp || recv.0 == comp,
    }
}

/// Propagation of `sigma` through the interleavings of `init`, pruning each
/// branch as soon as its guard fails. Reports only discards that leave a
/// process without any enabled move.
pub fn sem_prog_from(
    init: &TraceSet,
    sigma: &SystemState,
    fuel: u32,
    literal: bool,
) -> Result<Propagation, SystemError> {
    let mut out = Propagation::default();
    let mut interner = Interner::default();
    let mut search = Search { literal, interner: &mut interner, out: &mut out };
    search.run(Frontier::new(init), sigma, fuel, &mut Vec::new())?;
    Ok(out)
}

/// State sequences of the program from `sigma0` extended with its initial globals.
pub fn sem_prog(
    model: &Model,
    sigma0: &SystemState,
    k: u32,
    depth: u32,
    fuel: u32,
    opts: Options,
) -> Result<Propagation, SystemError> {
    let interp = program_fixpoint(model, k, depth, opts)?;
    let init = interp.apply("init", 0)?;
    sem_prog_from(&init, &model.initial_state_from(sigma0), fuel, opts.literal_interlv)
}
