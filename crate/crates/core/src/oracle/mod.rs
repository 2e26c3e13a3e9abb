//! Reference operational interpreter: explicit interleaving of CFG edges with
//! atomic exclusivity and rendezvous as a joint step.

mod eval;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::cfg::{BasicStmt, Edge, PointId};
use crate::model::{Model, ProcModel};
use crate::state::{Binding, ChanId, Env, Loc, SystemState, Value, VarType, NR_PR, PID_SLOT};
use crate::syntax::Initializer;
use crate::system::{Interner, StateSequence, Termination};

pub use eval::{assign, eval, truthy};

/// Steps an atomic block may take inside one scheduling step.
pub const MACRO_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProcState {
    pub pid: u32,
    pub proctype: String,
    pub pc: PointId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Config {
    pub state: SystemState,
    pub procs: Vec<ProcState>,
    /// Process holding the atomic privilege; always released between scheduling steps.
    pub exclusive: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub sequences: BTreeSet<StateSequence>,
    pub deadlocks: BTreeSet<Config>,
    pub terminations: BTreeSet<Config>,
}

pub struct Oracle<'m> {
    model: &'m Model,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        Oracle { model }
    }

    fn proc_model(&self, name: &str) -> &'m ProcModel {
        if name == "init" {
            &self.model.init
        } else {
            self.model.proctype(name).expect("process of a known proctype")
        }
    }

    fn env(&self, p: &ProcState) -> Env {
        self.proc_model(&p.proctype).env_for(p.pid)
    }

    pub fn initial(&self, sigma0: &SystemState) -> Config {
        Config {
            state: self.model.initial_state_from(sigma0),
            procs: vec![ProcState { pid: 0, proctype: "init".into(), pc: self.model.init.cfg.entry }],
            exclusive: None,
        }
    }

    fn edges(&self, p: &ProcState) -> Vec<&'m Edge> {
        self.proc_model(&p.proctype).cfg.out_edges(p.pc).collect()
    }

    fn chan_id(&self, env: &Env, name: &str) -> Option<ChanId> {
        match env.lookup(name).ok()? {
            Binding::Chan(id) => Some(*id),
            _ => None,
        }
    }

    /// Another process is ready for the opposite end of a rendezvous on `chan`.
    fn partner_exists(&self, c: &Config, pid: u32, env: &Env, chan: &str, want_recv: bool) -> bool {
        let Some(id) = self.chan_id(env, chan).filter(|id| c.state.channel(*id).is_some()) else {
            return false;
        };
        c.procs.iter().filter(|q| q.pid != pid).any(|q| {
            let qenv = self.env(q);
            self.edges(q).iter().any(|e| match &e.stmt {
                Some(BasicStmt::Receive { chan: d, sync: true, .. }) if want_recv => self.chan_id(&qenv, d) == Some(id),
                Some(BasicStmt::Send { chan: d, sync: true, .. }) if !want_recv => self.chan_id(&qenv, d) == Some(id),
                _ => false,
            })
        })
    }

    fn basic_executable(&self, c: &Config, p: &ProcState, env: &Env, st: &BasicStmt) -> bool {
        let s = &c.state;
        match st {
            BasicStmt::Skip | BasicStmt::Assign(..) | BasicStmt::Decl(_) | BasicStmt::Run { .. } => true,
            BasicStmt::Expr(e) => truthy(e, env, s),
            BasicStmt::Send { chan, sync: false, .. } => {
                self.chan_id(env, chan).and_then(|id| s.channel(id)).is_some_and(|ch| ch.nfull())
            }
            BasicStmt::Receive { chan, sync: false, .. } => {
                self.chan_id(env, chan).and_then(|id| s.channel(id)).is_some_and(|ch| !ch.is_empty())
            }
            BasicStmt::Send { chan, sync: true, .. } => self.partner_exists(c, p.pid, env, chan, true),
            BasicStmt::Receive { chan, sync: true, .. } => self.partner_exists(c, p.pid, env, chan, false),
        }
    }

    /// Whether `edge`, leaving the current point of process `pid`, can fire.
    pub fn executable(&self, c: &Config, pid: u32, edge: &Edge) -> bool {
        if c.state.is_bottom() || c.exclusive.is_some_and(|x| x != pid) {
            return false;
        }
        let Some(p) = c.procs.iter().find(|p| p.pid == pid) else {
            return false;
        };
        let env = self.env(p);
        match &edge.stmt {
            Some(st) => self.basic_executable(c, p, &env, st),
            None => !self
                .edges(p)
                .iter()
                .filter_map(|e| e.stmt.as_ref())
                .any(|st| self.basic_executable(c, p, &env, st)),
        }
    }

    /// Effect of a non-rendezvous statement of process `pid`.
    pub fn execute_basic(&self, c: &Config, pid: u32, st: &BasicStmt) -> Config {
        let mut next = c.clone();
        let p = c.procs.iter().find(|p| p.pid == pid).expect("live process");
        let env = self.env(p);
        let s = &mut next.state;
        match st {
            BasicStmt::Skip | BasicStmt::Expr(_) => {}
            BasicStmt::Assign(l, r) => {
                let v = eval(r, &env, s);
                assign(l, v, &env, s);
            }
            BasicStmt::Decl(d) => self.declare(d, &env, s),
            BasicStmt::Send { chan, args, .. } => {
                let id = self.chan_id(&env, chan).expect("channel");
                let vals: Option<Vec<i64>> = args.iter().map(|a| eval(a, &env, s)).collect();
                match (vals, s.channel(id)) {
                    (Some(v), Some(ch)) => match ch.push(id, ch.coerce(&v)) {
                        Ok(ch) => s.set_channel(id, ch),
                        Err(_) => *s = SystemState::bottom(),
                    },
                    _ => *s = SystemState::bottom(),
                }
            }
            BasicStmt::Receive { chan, args, .. } => {
                let id = self.chan_id(&env, chan).expect("channel");
                match s.channel(id).map(|ch| ch.pop(id)) {
                    Some(Ok((msg, rest))) => {
                        s.set_channel(id, rest);
                        for (l, v) in args.iter().zip(msg) {
                            assign(l, v.as_int(), &env, s);
                        }
                    }
                    _ => *s = SystemState::bottom(),
                }
            }
            BasicStmt::Run { proctype, args } => {
                let vals: Option<Vec<i64>> = args.iter().map(|a| eval(a, &env, s)).collect();
                let Some(vals) = vals else {
                    *s = SystemState::bottom();
                    return next;
                };
                let child = self.proc_model(proctype);
                let npid = s.fresh_pid();
                s.write(Loc::Local { pid: npid, slot: PID_SLOT }, Value::Int(npid as i32));
                for (i, (v, prm)) in vals.iter().zip(&child.params).enumerate() {
                    s.write(Loc::Local { pid: npid, slot: i as u32 + 1 }, prm.ty.coerce(*v));
                }
                let n = s.nr_pr().map_or(Value::Undefined, |n| Value::Int(n as i32 + 1));
                s.write(NR_PR, n);
                next.procs.push(ProcState { pid: npid, proctype: proctype.clone(), pc: child.cfg.entry });
            }
        }
        next
    }

    fn declare(&self, d: &crate::syntax::VarDecl, env: &Env, s: &mut SystemState) {
        let Ok(Binding::Var { loc, ty, .. }) = env.lookup(&d.name) else {
            *s = SystemState::bottom();
            return;
        };
        let (loc, ty) = (*loc, *ty);
        let exprs = match &d.init {
            None => vec![],
            Some(Initializer::Expr(e)) => vec![e.clone()],
            Some(Initializer::List(es)) => es.clone(),
        };
        let vals: Option<Vec<i64>> = if exprs.is_empty() {
            Some(vec![0])
        } else {
            exprs.iter().map(|e| eval(e, env, s)).collect()
        };
        let Some(vals) = vals else {
            *s = SystemState::bottom();
            return;
        };
        let v = match ty {
            VarType::Scalar(t) => t.coerce(vals[0]),
            VarType::Array(t, n) if vals.len() == 1 => Value::Array(t, vec![t.coerce(vals[0]); n]),
            VarType::Array(t, _) => Value::Array(t, vals.iter().map(|v| t.coerce(*v)).collect()),
        };
        s.write(loc, v);
    }

    fn set_pc(c: &mut Config, pid: u32, pc: PointId) {
        if let Some(p) = c.procs.iter_mut().find(|p| p.pid == pid) {
            p.pc = pc;
        }
    }

    fn fire(&self, c: &Config, pid: u32, e: &Edge) -> Config {
        let mut next = match &e.stmt {
            Some(st) => self.execute_basic(c, pid, st),
            None => c.clone(),
        };
        Self::set_pc(&mut next, pid, e.to);
        next
    }

    /// Continues process `pid` through marked edges while one can fire.
    fn run_atomic(&self, c: Config, pid: u32, budget: usize, out: &mut Vec<Config>) {
        let p = c.procs.iter().find(|p| p.pid == pid).cloned().expect("live process");
        let marked: Vec<&Edge> = self.edges(&p).into_iter().filter(|e| e.marked()).collect();
        let mut held = c.clone();
        held.exclusive = Some(pid);
        let ready: Vec<&&Edge> = marked.iter().filter(|e| self.executable(&held, pid, e)).collect();
        if ready.is_empty() || budget == 0 {
            if budget == 0 {
                log::warn!("atomic block of process {pid} exceeded {MACRO_LIMIT} steps");
            }
            out.push(c);
            return;
        }
        for e in ready {
            let mut next = self.fire(&held, pid, e);
            next.exclusive = None;
            self.run_atomic(next, pid, budget - 1, out);
        }
    }

    fn rendezvous(&self, c: &Config, s: &ProcState, se: &Edge, r: &ProcState, re: &Edge, out: &mut Vec<Config>) {
        let (Some(BasicStmt::Send { chan, args, .. }), Some(BasicStmt::Receive { chan: rc, args: rargs, .. })) =
            (&se.stmt, &re.stmt)
        else {
            return;
        };
        let senv = self.env(s);
        let renv = self.env(r);
        let (Some(id), Some(rid)) = (self.chan_id(&senv, chan), self.chan_id(&renv, rc)) else {
            return;
        };
        if id != rid || c.state.channel(id).is_none() {
            return;
        }
        let mut next = c.clone();
        let vals: Vec<Option<i64>> = args.iter().map(|a| eval(a, &senv, &c.state)).collect();
        let fields = c.state.channel(id).map(|ch| ch.fields.clone()).unwrap_or_default();
        for ((l, v), t) in rargs.iter().zip(vals).zip(fields) {
            let v = v.and_then(|v| t.coerce(v).as_int());
            assign(l, v, &renv, &mut next.state);
        }
        Self::set_pc(&mut next, s.pid, se.to);
        Self::set_pc(&mut next, r.pid, re.to);
        out.push(next);
    }

    /// Every configuration reachable in one scheduling step.
    pub fn step(&self, c: &Config) -> Vec<Config> {
        let mut out = Vec::new();
        if c.state.is_bottom() {
            return out;
        }
        for p in &c.procs {
            let edges = self.edges(p);
            if edges.is_empty() {
                let mut next = c.clone();
                let n = next.state.nr_pr().map_or(Value::Undefined, |n| Value::Int(n as i32 - 1));
                next.state.write(NR_PR, n);
                next.procs.retain(|q| q.pid != p.pid);
                out.push(next);
                continue;
            }
            for e in edges {
                if e.stmt.as_ref().is_some_and(BasicStmt::is_sync) || !self.executable(c, p.pid, e) {
                    continue;
                }
                let next = self.fire(c, p.pid, e);
                self.run_atomic(next, p.pid, MACRO_LIMIT, &mut out);
            }
        }
        for s in &c.procs {
            for se in self.edges(s).into_iter().filter(|e| matches!(e.stmt, Some(BasicStmt::Send { sync: true, .. }))) {
                for r in c.procs.iter().filter(|r| r.pid != s.pid) {
                    for re in self.edges(r).into_iter().filter(|e| matches!(e.stmt, Some(BasicStmt::Receive { sync: true, .. }))) {
                        self.rendezvous(c, s, se, r, re, &mut out);
                    }
                }
            }
        }
        out
    }

    fn explore(
        &self,
        c: &Config,
        max_len: usize,
        prefix: &mut Vec<Arc<SystemState>>,
        interner: &mut Interner,
        out: &mut RunResult,
    ) {
        if c.procs.is_empty() {
            out.terminations.insert(c.clone());
            out.sequences.insert(StateSequence { states: prefix.clone(), termination: Termination::Completed });
            return;
        }
        if prefix.len() >= max_len {
            out.sequences.insert(StateSequence { states: prefix.clone(), termination: Termination::Cut });
            return;
        }
        let succ = self.step(c);
        if succ.is_empty() {
            out.deadlocks.insert(c.clone());
            return;
        }
        for n in succ {
            prefix.push(interner.get(n.state.clone()));
            self.explore(&n, max_len, prefix, interner, out);
            prefix.pop();
        }
    }

    /// Exhaustive exploration from `sigma0` for at most `max_len` steps.
    pub fn run_bounded(&self, sigma0: &SystemState, max_len: usize) -> RunResult {
        let mut out = RunResult::default();
        self.explore(&self.initial(sigma0), max_len, &mut Vec::new(), &mut Interner::default(), &mut out);
        out
    }
}

pub fn run_bounded(model: &Model, sigma0: &SystemState, max_len: usize) -> RunResult {
    Oracle::new(model).run_bounded(sigma0, max_len)
}
