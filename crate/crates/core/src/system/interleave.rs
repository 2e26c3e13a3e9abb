use std::collections::VecDeque;
use std::sync::Arc;

use super::SystemError;
use crate::domain::{ChanRef, CondStep, ConditionalTrace, Guard, Terminator, TraceSet, Update};

fn sync_send_chan(s: &CondStep) -> Option<&ChanRef> {
    let CondStep::Trans { guard: Guard::ChanDefined(c), update: Update::Seq(us), .. } = s else {
        return None;
    };
    match us.as_slice() {
        [Update::ChanPush(p, _), Update::SetHandshake(Some(h))] if p == c && h == c => Some(c),
        _ => None,
    }
}

fn sync_recv_chan(s: &CondStep) -> Option<&ChanRef> {
    let CondStep::Trans { guard: Guard::And(gs), update: Update::Seq(us), .. } = s else {
        return None;
    };
    match (gs.as_slice(), us.as_slice()) {
        ([Guard::ChanDefined(c), Guard::HandshakeIs(h)], [Update::ChanPop(p, _), Update::SetHandshake(None)])
            if c == h && c == p =>
        {
            Some(c)
        }
        _ => None,
    }
}

pub fn is_sync_send(s: &CondStep) -> bool {
    sync_send_chan(s).is_some()
}

pub fn is_sync_recv(s: &CondStep) -> bool {
    sync_recv_chan(s).is_some()
}

/// `a` sends and `b` receives on the same rendezvous channel.
pub fn wantsynch(a: &CondStep, b: &CondStep) -> bool {
    matches!((sync_send_chan(a), sync_recv_chan(b)), (Some(c), Some(d)) if c.id == d.id)
}

/// The joint step of `a` followed by `b`.
pub fn synch(a: &CondStep, b: &CondStep) -> CondStep {
    match (a, b) {
        (CondStep::Trans { guard: ga, update: ua, .. }, CondStep::Trans { guard: gb, update: ub, .. }) => CondStep::trans(
            Guard::and(vec![ga.clone(), Guard::after(ua.clone(), gb.clone())]),
            Update::seq(vec![ua.clone(), ub.clone()]),
        ),
        _ => panic!("synch on a spawn step"),
    }
}

#[derive(Clone, Debug)]
struct Alt {
    trace: Arc<ConditionalTrace>,
    pos: usize,
}

impl Alt {
    fn head(&self) -> Result<&CondStep, Terminator> {
        self.trace.steps.get(self.pos).ok_or(self.trace.end)
    }
}

#[derive(Clone, Debug)]
struct Component {
    pid: u32,
    alts: Vec<Alt>,
    pending: VecDeque<u32>,
}

impl Component {
    fn new(pid: u32, s: &TraceSet) -> Self {
        let alts = s.iter().map(|t| Alt { trace: Arc::new(t.clone()), pos: 0 }).collect();
        Component { pid, alts, pending: VecDeque::new() }
    }

    fn heads(&self) -> Vec<&CondStep> {
        let mut out: Vec<&CondStep> = Vec::new();
        for a in &self.alts {
            if let Ok(s) = a.head() {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    fn finished(&self) -> bool {
        self.alts.iter().any(|a| a.head() == Err(Terminator::Final))
    }

    fn advance(&self, step: &CondStep) -> Component {
        let alts = self
            .alts
            .iter()
            .filter(|a| a.head().ok() == Some(step))
            .map(|a| Alt { trace: a.trace.clone(), pos: a.pos + 1 })
            .collect();
        Component { pid: self.pid, alts, pending: self.pending.clone() }
    }

    /// Sole pending spawn, if every alternative starts with the same one.
    fn forced_spawn(&self) -> Option<&CondStep> {
        let first = self.alts.first()?.head().ok()?;
        (first.is_spawn() && self.alts.iter().all(|a| a.head().ok() == Some(first))).then_some(first)
    }

    fn only_final(&self) -> bool {
        self.alts.iter().all(|a| a.head() == Err(Terminator::Final))
    }
}

/// A selectable move of the interleaving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Single { comp: usize, step: CondStep },
    Pair { send: (usize, CondStep), recv: (usize, CondStep), send_first: bool },
    Dissolve { comp: usize, step: CondStep },
    Finish { comp: usize },
}

impl Choice {
    /// The state-changing step performed, if any.
    pub fn step(&self) -> Option<CondStep> {
        match self {
            Choice::Single { step, .. } => Some(step.with_mark(false)),
            Choice::Pair { send, recv, send_first: true } => Some(synch(&send.1, &recv.1)),
            Choice::Pair { send, recv, send_first: false } => Some(synch(&recv.1, &send.1)),
            Choice::Dissolve { .. } | Choice::Finish { .. } => None,
        }
    }

    /// Components whose only moves are this kind of choice are considered blocked when it fails.
    pub fn owner(&self) -> Option<usize> {
        match self {
            Choice::Single { comp, .. } => Some(*comp),
            _ => None,
        }
    }
}

/// Parallel composition of the live processes along one interleaving path.
#[derive(Clone, Debug)]
pub struct Frontier {
    comps: Vec<Component>,
    next_pid: u32,
}

impl Frontier {
    /// A single process with pid 0 running `s`.
    pub fn new(s: &TraceSet) -> Self {
        Frontier { comps: vec![Component::new(0, s)], next_pid: 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn pid_of(&self, comp: usize) -> u32 {
        self.comps[comp].pid
    }

    /// Performs every move that cannot affect which state sequences arise:
    /// finished processes leave, unambiguous spawns dissolve.
    pub fn settle(&mut self) -> Result<(), SystemError> {
        loop {
            if let Some(i) = self.comps.iter().position(Component::only_final) {
                self.comps.remove(i);
                continue;
            }
            let Some((i, step)) = self.comps.iter().enumerate().find_map(|(i, c)| c.forced_spawn().map(|s| (i, s.clone())))
            else {
                return Ok(());
            };
            *self = self.advance(&Choice::Dissolve { comp: i, step })?;
        }
    }

    /// Truncation bound of a process whose behavior was cut, if any.
    pub fn truncated(&self) -> Option<u32> {
        self.comps.iter().flat_map(|c| &c.alts).find_map(|a| match a.head() {
            Err(Terminator::Truncated(d)) => Some(d),
            Err(Terminator::Open) => Some(0),
            _ => None,
        })
    }

    pub fn choices(&self, literal: bool) -> Vec<Choice> {
        let mut out = Vec::new();
        let heads: Vec<Vec<&CondStep>> = self.comps.iter().map(Component::heads).collect();
        for (i, hs) in heads.iter().enumerate() {
            for s in hs {
                if s.is_spawn() {
                    out.push(Choice::Dissolve { comp: i, step: (*s).clone() });
                } else if literal || !(is_sync_send(s) || is_sync_recv(s)) {
                    out.push(Choice::Single { comp: i, step: (*s).clone() });
                }
            }
            if self.comps[i].finished() {
                out.push(Choice::Finish { comp: i });
            }
        }
        for (i, hi) in heads.iter().enumerate() {
            for (j, hj) in heads.iter().enumerate() {
                if i == j {
                    continue;
                }
                for a in hi.iter().filter(|a| is_sync_send(a)) {
                    for b in hj.iter().filter(|b| wantsynch(a, b)) {
                        for send_first in [true, false] {
                            out.push(Choice::Pair { send: (i, (*a).clone()), recv: (j, (*b).clone()), send_first });
                        }
                    }
                }
            }
        }
        out
    }

    fn take(&mut self, comp: usize, step: &CondStep) {
        let mut c = self.comps[comp].advance(step);
        if let CondStep::Trans { update, .. } = step {
            for _ in 0..update.spawn_count() {
                c.pending.push_back(self.next_pid);
                self.next_pid += 1;
            }
        }
        self.comps[comp] = c;
    }

    /// Successor frontier after `choice`.
    pub fn advance(&self, choice: &Choice) -> Result<Frontier, SystemError> {
        let mut f = self.clone();
        match choice {
            Choice::Single { comp, step } => f.take(*comp, step),
            Choice::Pair { send, recv, .. } => {
                f.take(send.0, &send.1);
                f.take(recv.0, &recv.1);
            }
            Choice::Finish { comp } => {
                f.comps.remove(*comp);
            }
            Choice::Dissolve { comp, step } => {
                let CondStep::Spawn { proctype, payload, .. } = step else {
                    unreachable!("dissolve of a transition");
                };
                f.take(*comp, step);
                let pid =
                    f.comps[*comp].pending.pop_front().ok_or_else(|| SystemError::SpawnWithoutAlloc(proctype.clone()))?;
                f.comps.push(Component::new(pid, &payload.rename(pid)));
            }
        }
        Ok(f)
    }
}

fn interlv_rec(
    f: Frontier,
    fuel: u32,
    total: u32,
    literal: bool,
    prefix: &mut Vec<CondStep>,
    out: &mut Vec<ConditionalTrace>,
) -> Result<(), SystemError> {
    let mut f = f;
    f.settle()?;
    if f.is_empty() {
        out.push(ConditionalTrace::new(prefix.clone(), Terminator::Final));
        return Ok(());
    }
    if fuel == 0 {
        out.push(ConditionalTrace::new(prefix.clone(), Terminator::Truncated(total)));
        return Ok(());
    }
    if let Some(d) = f.truncated() {
        out.push(ConditionalTrace::new(prefix.clone(), Terminator::Truncated(d)));
    }
    let choices = f.choices(literal);
    for c in &choices {
        let next = f.advance(c)?;
        match c.step() {
            Some(s) => {
                prefix.push(s);
                interlv_rec(next, fuel - 1, total, literal, prefix, out)?;
                prefix.pop();
            }
            None => interlv_rec(next, fuel, total, literal, prefix, out)?,
        }
    }
    Ok(())
}

/// All interleavings of the process started by `s` and everything it spawns,
/// cut after `fuel` transitions.
pub fn interlv(s: &TraceSet, fuel: u32, literal: bool) -> Result<TraceSet, SystemError> {
    let mut out = Vec::new();
    interlv_rec(Frontier::new(s), fuel, fuel, literal, &mut Vec::new(), &mut out)?;
    Ok(TraceSet::new(out))
}
