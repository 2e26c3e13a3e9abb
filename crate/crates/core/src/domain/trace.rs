use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::step::{Guard, Update};
use super::DomainError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CondStep {
    Trans { guard: Guard, update: Update, marked: bool },
    /// Embedded behavior of a spawned process, over formal locations.
    Spawn { proctype: String, payload: Arc<TraceSet>, marked: bool },
}

impl CondStep {
    pub fn trans(guard: Guard, update: Update) -> CondStep {
        CondStep::Trans { guard, update, marked: false }
    }

    pub fn marked(&self) -> bool {
        match self {
            CondStep::Trans { marked, .. } | CondStep::Spawn { marked, .. } => *marked,
        }
    }

    pub fn with_mark(&self, m: bool) -> CondStep {
        match self {
            CondStep::Trans { guard, update, .. } => CondStep::Trans { guard: guard.clone(), update: update.clone(), marked: m },
            CondStep::Spawn { proctype, payload, .. } => {
                CondStep::Spawn { proctype: proctype.clone(), payload: payload.clone(), marked: m }
            }
        }
    }

    pub fn is_spawn(&self) -> bool {
        matches!(self, CondStep::Spawn { .. })
    }

    /// Renaming does not descend into spawn payloads: they are renamed when dissolved.
    pub fn rename(&self, pid: u32) -> CondStep {
        match self {
            CondStep::Trans { guard, update, marked } => {
                CondStep::Trans { guard: guard.rename(pid), update: update.rename(pid), marked: *marked }
            }
            s => s.clone(),
        }
    }
}

impl fmt::Display for CondStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondStep::Trans { guard, update, marked } => {
                write!(f, "<{guard}, {update}>")?;
                if *marked {
                    f.write_str("^")?;
                }
                Ok(())
            }
            CondStep::Spawn { proctype, payload, marked } => {
                write!(f, "run {proctype}{{{} traces}}", payload.len())?;
                if *marked {
                    f.write_str("^")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Terminator {
    Open,
    Final,
    /// Unexplored tail cut at the given bound.
    Truncated(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionalTrace {
    pub steps: Vec<CondStep>,
    pub end: Terminator,
}

impl ConditionalTrace {
    pub fn epsilon() -> Self {
        ConditionalTrace { steps: Vec::new(), end: Terminator::Open }
    }

    pub fn finalizer() -> Self {
        ConditionalTrace { steps: Vec::new(), end: Terminator::Final }
    }

    pub fn truncated(d: u32) -> Self {
        ConditionalTrace { steps: Vec::new(), end: Terminator::Truncated(d) }
    }

    pub fn new(steps: Vec<CondStep>, end: Terminator) -> Self {
        ConditionalTrace { steps, end }
    }

    pub fn is_epsilon(&self) -> bool {
        self.steps.is_empty() && self.end == Terminator::Open
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Only open traces can be extended.
    pub fn concat(&self, other: &ConditionalTrace) -> ConditionalTrace {
        if self.end != Terminator::Open {
            return self.clone();
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        ConditionalTrace { steps, end: other.end }
    }

    pub fn prepend(&self, step: CondStep) -> ConditionalTrace {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.push(step);
        steps.extend(self.steps.iter().cloned());
        ConditionalTrace { steps, end: self.end }
    }

    pub fn rename(&self, pid: u32) -> ConditionalTrace {
        ConditionalTrace { steps: self.steps.iter().map(|s| s.rename(pid)).collect(), end: self.end }
    }

    pub fn has_marks(&self) -> bool {
        self.steps.iter().any(CondStep::marked)
    }

    pub fn has_spawns(&self) -> bool {
        self.steps.iter().any(CondStep::is_spawn)
    }

    /// Open prefixes, shortest first, excluding the trace itself.
    pub fn prefixes(&self) -> impl Iterator<Item = ConditionalTrace> + '_ {
        (0..self.steps.len()).map(move |n| ConditionalTrace { steps: self.steps[..n].to_vec(), end: Terminator::Open })
    }
}

impl fmt::Display for ConditionalTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{s}")?;
        }
        let tail = match self.end {
            Terminator::Open if self.steps.is_empty() => "eps",
            Terminator::Open => return Ok(()),
            Terminator::Final => "END",
            Terminator::Truncated(_) => "...",
        };
        if !self.steps.is_empty() {
            f.write_str(" . ")?;
        }
        f.write_str(tail)
    }
}

/// A non-empty set of conditional traces; the empty set is read as `{ε}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceSet(BTreeSet<ConditionalTrace>);

impl TraceSet {
    pub fn new(traces: impl IntoIterator<Item = ConditionalTrace>) -> Self {
        let mut set: BTreeSet<_> = traces.into_iter().collect();
        if set.is_empty() {
            set.insert(ConditionalTrace::epsilon());
        }
        TraceSet(set)
    }

    pub fn epsilon() -> Self {
        TraceSet::new([ConditionalTrace::epsilon()])
    }

    pub fn singleton(t: ConditionalTrace) -> Self {
        TraceSet::new([t])
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConditionalTrace> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: &ConditionalTrace) -> bool {
        self.0.contains(t)
    }

    pub fn union(&self, other: &TraceSet) -> TraceSet {
        TraceSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a TraceSet>) -> TraceSet {
        TraceSet::new(sets.into_iter().flat_map(|s| s.0.iter().cloned()))
    }

    pub fn concat(&self, other: &TraceSet) -> TraceSet {
        TraceSet::new(self.0.iter().flat_map(|a| other.0.iter().map(move |b| a.concat(b))))
    }

    pub fn prefix_with(&self, t: &ConditionalTrace) -> TraceSet {
        TraceSet::new(self.0.iter().map(|b| t.concat(b)))
    }

    pub fn rename(&self, pid: u32) -> TraceSet {
        TraceSet::new(self.0.iter().map(|t| t.rename(pid)))
    }

    pub fn map(&self, f: impl Fn(&ConditionalTrace) -> ConditionalTrace) -> TraceSet {
        TraceSet::new(self.0.iter().map(f))
    }

    pub fn into_inner(self) -> BTreeSet<ConditionalTrace> {
        self.0
    }
}

impl FromIterator<ConditionalTrace> for TraceSet {
    fn from_iter<I: IntoIterator<Item = ConditionalTrace>>(iter: I) -> Self {
        TraceSet::new(iter)
    }
}

impl fmt::Display for TraceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Map from process names to their behavior over formal locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    map: BTreeMap<String, Arc<TraceSet>>,
}

impl Interpretation {
    pub fn bottom<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let eps = Arc::new(TraceSet::epsilon());
        Interpretation { map: names.into_iter().map(|n| (n.to_string(), eps.clone())).collect() }
    }

    pub fn insert(&mut self, name: &str, s: TraceSet) {
        self.map.insert(name.to_string(), Arc::new(s));
    }

    pub fn get(&self, name: &str) -> Result<&Arc<TraceSet>, DomainError> {
        self.map.get(name).ok_or_else(|| DomainError::UnknownProctype(name.to_string()))
    }

    /// Behavior of `name` instantiated at process id `pid`.
    pub fn apply(&self, name: &str, pid: u32) -> Result<TraceSet, DomainError> {
        Ok(self.get(name)?.rename(pid))
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Arc<TraceSet>)> {
        self.map.iter()
    }
}
