use std::collections::VecDeque;
use std::sync::Arc;

use super::trace::{CondStep, ConditionalTrace, Terminator, TraceSet};
use super::DomainError;
use crate::model::Model;
use crate::state::{BasicType, ChanId, ChannelInstance, Loc, SystemState, Value, VarType, HANDSHAKE, NR_PR};

pub const DEFAULT_UNIVERSE_CAP: usize = 1 << 14;

/// One enumerated coordinate of a finite state universe.
#[derive(Clone, Debug)]
pub enum Dim {
    Mem(Loc, Vec<Value>),
    Chan(ChanId, Vec<ChannelInstance>),
}

/// A finite set of states over which guard implication and transformer
/// equality are decided. A structural universe compares terms syntactically.
#[derive(Clone, Debug)]
pub struct Universe {
    states: Vec<SystemState>,
    structural: bool,
}

impl Universe {
    pub fn enumerate(base: &SystemState, dims: &[Dim], cap: usize) -> Result<Universe, DomainError> {
        let mut size: usize = 1;
        for d in dims {
            let n = match d {
                Dim::Mem(_, vs) => vs.len(),
                Dim::Chan(_, cs) => cs.len(),
            };
            size = size.saturating_mul(n.max(1));
            if size > cap {
                return Err(DomainError::UniverseTooLarge { size, cap });
            }
        }
        let mut states = vec![base.clone()];
        for d in dims {
            let mut next = Vec::with_capacity(states.len());
            for s in &states {
                match d {
                    Dim::Mem(l, vs) => {
                        for v in vs {
                            next.push(s.update(*l, v.clone()));
                        }
                    }
                    Dim::Chan(c, cs) => {
                        for ch in cs {
                            let mut t = s.clone();
                            t.set_channel(*c, ch.clone());
                            next.push(t);
                        }
                    }
                }
            }
            states = next;
        }
        Ok(Universe { states, structural: false })
    }

    pub fn structural() -> Universe {
        Universe { states: Vec::new(), structural: true }
    }

    /// Enumerate, or fall back to structural comparison when over the cap.
    pub fn enumerate_or_structural(base: &SystemState, dims: &[Dim], cap: usize) -> Universe {
        match Universe::enumerate(base, dims, cap) {
            Ok(u) => u,
            Err(e) => {
                log::warn!("{e}; comparing traces structurally");
                Universe::structural()
            }
        }
    }

    /// Globals, channels and the formal frame of process `proc`, with small
    /// value domains: full range for bit and bool, {0, 1} otherwise.
    pub fn for_process(model: &Model, proc: &str, cap: usize) -> Result<Universe, DomainError> {
        let pm = if proc == "init" { Some(&model.init) } else { model.proctype(proc) };
        let pm = pm.ok_or_else(|| DomainError::UnknownProctype(proc.to_string()))?;
        let mut dims = Vec::new();
        dims.push(Dim::Mem(NR_PR, vec![Value::Int(1), Value::Int(2)]));
        dims.push(Dim::Mem(HANDSHAKE, vec![Value::Int(-1)]));
        for g in &model.globals {
            dims.push(Dim::Mem(g.loc, var_domain(g.ty)));
        }
        for (slot, (_, ty)) in pm.frame.iter().enumerate() {
            dims.push(Dim::Mem(Loc::Formal(slot as u32), var_domain(*ty)));
        }
        for c in &model.chans {
            let empty = ChannelInstance::new(c.capacity, c.fields.clone());
            let msgs = product(&vec![small(BasicType::Bit); c.fields.len()]);
            let mut insts = vec![empty.clone()];
            let mut frontier = vec![empty];
            for _ in 0..c.capacity.max(1) {
                let mut next = Vec::new();
                for inst in &frontier {
                    for m in &msgs {
                        let mut i = inst.clone();
                        i.queue.push_back(m.iter().zip(&c.fields).map(|(v, t)| t.coerce(v.as_int().unwrap_or(0))).collect());
                        next.push(i);
                    }
                }
                insts.extend(next.iter().cloned());
                frontier = next;
            }
            dims.push(Dim::Chan(c.id, insts));
        }
        Universe::enumerate(&SystemState::new(), &dims, cap)
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn is_structural(&self) -> bool {
        self.structural
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn small(t: BasicType) -> Vec<Value> {
    t.domain().unwrap_or_else(|| vec![0, 1]).into_iter().map(|v| t.coerce(v)).collect()
}

fn product(cols: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for c in cols {
        out = out.iter().flat_map(|p| c.iter().map(move |v| [p.clone(), vec![v.clone()]].concat())).collect();
    }
    out
}

fn var_domain(ty: VarType) -> Vec<Value> {
    match ty {
        VarType::Scalar(t) => small(t),
        VarType::Array(t, n) => product(&vec![small(t); n]).into_iter().map(|items| Value::Array(t, items)).collect(),
    }
}

pub fn step_leq(a: &CondStep, b: &CondStep, u: &Universe) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (
            CondStep::Trans { guard: g1, update: t1, marked: m1 },
            CondStep::Trans { guard: g2, update: t2, marked: m2 },
        ) => {
            if m1 != m2 || u.structural {
                return false;
            }
            u.states.iter().all(|s| !g1.eval(s) || (g2.eval(s) && t1.apply(s) == t2.apply(s)))
        }
        (
            CondStep::Spawn { proctype: p1, payload: s1, marked: m1 },
            CondStep::Spawn { proctype: p2, payload: s2, marked: m2 },
        ) => p1 == p2 && m1 == m2 && (Arc::ptr_eq(s1, s2) || set_leq(s1, s2, u)),
        _ => false,
    }
}

/// Truncated and open tails both stand for ε.
pub fn trace_leq(a: &ConditionalTrace, b: &ConditionalTrace, u: &Universe) -> bool {
    let n = a.steps.len();
    if n > b.steps.len() {
        return false;
    }
    if !a.steps.iter().zip(&b.steps).all(|(x, y)| step_leq(x, y, u)) {
        return false;
    }
    match a.end {
        Terminator::Final => b.steps.len() == n && b.end == Terminator::Final,
        _ => true,
    }
}

pub fn set_leq(a: &TraceSet, b: &TraceSet, u: &Universe) -> bool {
    a.iter().all(|x| b.contains(x) || b.iter().any(|y| trace_leq(x, y, u)))
}

pub fn set_equiv(a: &TraceSet, b: &TraceSet, u: &Universe) -> bool {
    set_leq(a, b, u) && set_leq(b, a, u)
}

pub fn lub<'a>(sets: impl IntoIterator<Item = &'a TraceSet>) -> TraceSet {
    TraceSet::union_all(sets)
}

/// Greatest lower bound over the finite candidate space of member traces and
/// their prefixes.
pub fn glb(sets: &[TraceSet], u: &Universe) -> TraceSet {
    let mut cands: VecDeque<ConditionalTrace> = VecDeque::new();
    cands.push_back(ConditionalTrace::epsilon());
    for s in sets {
        for t in s.iter() {
            cands.push_back(t.clone());
            cands.extend(t.prefixes());
        }
    }
    TraceSet::new(cands.into_iter().filter(|c| sets.iter().all(|s| s.iter().any(|t| trace_leq(c, t, u)))))
}
