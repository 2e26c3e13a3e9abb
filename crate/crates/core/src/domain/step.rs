use std::fmt;

use super::term::{ChanRef, Place, Term};
use crate::state::{BasicType, Loc, SystemState, Value, VarType, HANDSHAKE, NR_PR, PID_SLOT};
use crate::syntax::BinOp;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    True,
    False,
    Expr(Term),
    ChanDefined(ChanRef),
    NFull(ChanRef),
    NEmpty(ChanRef),
    HandshakeIs(ChanRef),
    Not(Box<Guard>),
    And(Vec<Guard>),
    /// `g` evaluated in the state produced by the update.
    After(Box<Update>, Box<Guard>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Update {
    Id,
    Assign(Place, Term),
    /// Declaration with initializer; arrays carry one term per element.
    Init { name: String, loc: Loc, ty: VarType, values: Vec<Term> },
    ChanPush(ChanRef, Vec<Term>),
    ChanPop(ChanRef, Vec<Place>),
    SetHandshake(Option<ChanRef>),
    BumpNrPr(i32),
    /// Allocates a frame at the first free pid and writes `_pid` and the actuals.
    SpawnAlloc { proctype: String, actuals: Vec<Term>, param_types: Vec<BasicType> },
    Seq(Vec<Update>),
}

impl Guard {
    pub fn eval(&self, s: &SystemState) -> bool {
        if s.is_bottom() {
            return false;
        }
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Expr(t) => t.eval(s).is_some_and(|v| v != 0),
            Guard::ChanDefined(c) => s.channel(c.id).is_some(),
            Guard::NFull(c) => s.channel(c.id).is_some_and(|ch| ch.nfull()),
            Guard::NEmpty(c) => s.channel(c.id).is_some_and(|ch| !ch.is_empty()),
            Guard::HandshakeIs(c) => s.read(HANDSHAKE).as_int() == Some(c.id.0 as i64),
            Guard::Not(g) => !g.eval(s),
            Guard::And(gs) => gs.iter().all(|g| g.eval(s)),
            Guard::After(u, g) => g.eval(&u.apply(s)),
        }
    }

    pub fn not(g: Guard) -> Guard {
        match g {
            Guard::True => Guard::False,
            Guard::False => Guard::True,
            Guard::Not(inner) => *inner,
            g => Guard::Not(Box::new(g)),
        }
    }

    pub fn and(gs: Vec<Guard>) -> Guard {
        let mut out = Vec::new();
        for g in gs {
            match g {
                Guard::True => {}
                Guard::False => return Guard::False,
                Guard::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Guard::True,
            1 => out.pop().unwrap_or(Guard::True),
            _ => Guard::And(out),
        }
    }

    pub fn after(u: Update, g: Guard) -> Guard {
        match (u, g) {
            (_, Guard::True) => Guard::True,
            (_, Guard::False) => Guard::False,
            (Update::Id, g) => g,
            (u, g) => Guard::After(Box::new(u), Box::new(g)),
        }
    }

    /// Structural simplification; preserves evaluation on every state.
    pub fn simplify(self) -> Guard {
        match self {
            Guard::Not(g) => Guard::not(g.simplify()),
            Guard::And(gs) => Guard::and(gs.into_iter().map(Guard::simplify).collect()),
            Guard::After(u, g) => Guard::after(u.simplify(), g.simplify()),
            g => g,
        }
    }

    pub fn rename(&self, pid: u32) -> Guard {
        match self {
            Guard::Expr(t) => Guard::Expr(t.rename(pid)),
            Guard::Not(g) => Guard::Not(Box::new(g.rename(pid))),
            Guard::And(gs) => Guard::And(gs.iter().map(|g| g.rename(pid)).collect()),
            Guard::After(u, g) => Guard::After(Box::new(u.rename(pid)), Box::new(g.rename(pid))),
            g => g.clone(),
        }
    }

    fn render(&self, at: Option<&SystemState>, top: bool) -> String {
        let term = |t: &Term| match at {
            Some(s) => t.render_at(s),
            None => t.to_string(),
        };
        match self {
            Guard::True => "true".into(),
            Guard::False => "false".into(),
            Guard::Expr(t) => {
                let r = term(t);
                let low = matches!(t, Term::Binary(op, ..) if op.precedence() <= BinOp::And.precedence());
                if low && !top {
                    format!("({r})")
                } else {
                    r
                }
            }
            Guard::ChanDefined(c) => format!("defined({c})"),
            Guard::NFull(c) => format!("nfull({c})"),
            Guard::NEmpty(c) => format!("nempty({c})"),
            Guard::HandshakeIs(c) => format!("handshake == {c}"),
            Guard::Not(g) => match g.as_ref() {
                Guard::Expr(Term::Var { .. } | Term::Elem { .. } | Term::Const(_)) => format!("!{}", g.render(at, false)),
                g => format!("!({})", g.render(at, true)),
            },
            Guard::And(gs) => {
                let parts: Vec<String> = gs.iter().map(|g| g.render(at, false)).collect();
                let r = parts.join(" && ");
                if top {
                    r
                } else {
                    format!("({r})")
                }
            }
            Guard::After(u, g) => format!("<{u}>({})", g.render(at, true)),
        }
    }

    /// Rendering with array indices evaluated in `s`.
    pub fn render_at(&self, s: &SystemState) -> String {
        self.render(Some(s), true)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None, true))
    }
}

impl Update {
    pub fn seq(us: Vec<Update>) -> Update {
        let mut out = Vec::new();
        for u in us {
            match u {
                Update::Id => {}
                Update::Seq(inner) => out.extend(inner),
                u => out.push(u),
            }
        }
        match out.len() {
            0 => Update::Id,
            1 => out.pop().unwrap_or(Update::Id),
            _ => Update::Seq(out),
        }
    }

    pub fn simplify(self) -> Update {
        match self {
            Update::Seq(us) => Update::seq(us.into_iter().map(Update::simplify).collect()),
            u => u,
        }
    }

    pub fn apply(&self, s: &SystemState) -> SystemState {
        let mut next = s.clone();
        self.apply_mut(&mut next);
        next
    }

    pub fn apply_mut(&self, s: &mut SystemState) {
        if s.is_bottom() {
            return;
        }
        match self {
            Update::Id => {}
            Update::Assign(p, t) => {
                let v = t.eval(s);
                p.write(s, v);
            }
            Update::Init { loc, ty, values, .. } => {
                let vals: Option<Vec<i64>> = values.iter().map(|t| t.eval(s)).collect();
                let Some(vals) = vals else {
                    *s = SystemState::bottom();
                    return;
                };
                let v = match ty {
                    VarType::Scalar(t) => t.coerce(vals[0]),
                    VarType::Array(t, _) => Value::Array(*t, vals.iter().map(|v| t.coerce(*v)).collect()),
                };
                s.write(*loc, v);
            }
            Update::ChanPush(c, terms) => {
                let vals: Option<Vec<i64>> = terms.iter().map(|t| t.eval(s)).collect();
                let pushed = match (vals, s.channel(c.id)) {
                    (Some(vals), Some(ch)) => ch.push(c.id, ch.coerce(&vals)).ok(),
                    _ => None,
                };
                match pushed {
                    Some(ch) => s.set_channel(c.id, ch),
                    None => *s = SystemState::bottom(),
                }
            }
            Update::ChanPop(c, places) => {
                let Some((msg, rest)) = s.channel(c.id).and_then(|ch| ch.pop(c.id).ok()) else {
                    *s = SystemState::bottom();
                    return;
                };
                for (p, v) in places.iter().zip(&msg) {
                    p.write(s, v.as_int());
                }
                s.set_channel(c.id, rest);
            }
            Update::SetHandshake(c) => {
                let v = c.as_ref().map_or(-1, |c| c.id.0 as i32);
                s.write(HANDSHAKE, Value::Int(v));
            }
            Update::BumpNrPr(d) => {
                let v = s.nr_pr().map(|n| Value::Int((n as i32).wrapping_add(*d))).unwrap_or(Value::Undefined);
                s.write(NR_PR, v);
            }
            Update::SpawnAlloc { actuals, param_types, .. } => {
                let pid = s.fresh_pid();
                let vals: Option<Vec<i64>> = actuals.iter().map(|t| t.eval(s)).collect();
                let Some(vals) = vals else {
                    *s = SystemState::bottom();
                    return;
                };
                s.write(Loc::Local { pid, slot: PID_SLOT }, Value::Int(pid as i32));
                for (i, (v, t)) in vals.iter().zip(param_types).enumerate() {
                    s.write(Loc::Local { pid, slot: i as u32 + 1 }, t.coerce(*v));
                }
            }
            Update::Seq(us) => {
                for u in us {
                    u.apply_mut(s);
                }
            }
        }
    }

    pub fn rename(&self, pid: u32) -> Update {
        match self {
            Update::Id | Update::SetHandshake(_) | Update::BumpNrPr(_) => self.clone(),
            Update::Assign(p, t) => Update::Assign(p.rename(pid), t.rename(pid)),
            Update::Init { name, loc, ty, values } => Update::Init {
                name: name.clone(),
                loc: loc.rename(pid),
                ty: *ty,
                values: values.iter().map(|t| t.rename(pid)).collect(),
            },
            Update::ChanPush(c, ts) => Update::ChanPush(c.clone(), ts.iter().map(|t| t.rename(pid)).collect()),
            Update::ChanPop(c, ps) => Update::ChanPop(c.clone(), ps.iter().map(|p| p.rename(pid)).collect()),
            Update::SpawnAlloc { proctype, actuals, param_types } => Update::SpawnAlloc {
                proctype: proctype.clone(),
                actuals: actuals.iter().map(|t| t.rename(pid)).collect(),
                param_types: param_types.clone(),
            },
            Update::Seq(us) => Update::Seq(us.iter().map(|u| u.rename(pid)).collect()),
        }
    }

    /// Number of process allocations performed, in order.
    pub fn spawn_count(&self) -> usize {
        match self {
            Update::SpawnAlloc { .. } => 1,
            Update::Seq(us) => us.iter().map(Update::spawn_count).sum(),
            _ => 0,
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::Id => f.write_str("id"),
            Update::Assign(p, t) => write!(f, "{p} = {t}"),
            Update::Init { name, ty: VarType::Scalar(_), values, .. } => write!(f, "{name} = {}", values[0]),
            Update::Init { name, values, .. } => write!(f, "{name} = {{{}}}", join(values)),
            Update::ChanPush(c, ts) => write!(f, "{c}!{}", join(ts)),
            Update::ChanPop(c, ps) => write!(f, "{c}?{}", join(ps)),
            Update::SetHandshake(Some(c)) => write!(f, "handshake = {c}"),
            Update::SetHandshake(None) => f.write_str("handshake = -1"),
            Update::BumpNrPr(d) if *d >= 0 => write!(f, "_nr_pr += {d}"),
            Update::BumpNrPr(d) => write!(f, "_nr_pr -= {}", -d),
            Update::SpawnAlloc { proctype, actuals, .. } => write!(f, "alloc {proctype}({})", join(actuals)),
            Update::Seq(us) => {
                let parts: Vec<String> = us.iter().map(|u| u.to_string()).collect();
                f.write_str(&parts.join("; "))
            }
        }
    }
}
