//! Small random instances of conditional traces over two byte variables.

use proptest::prelude::*;
use proptest::sample::select;

use pml_sem::denote::{iterate, tp_step};
use pml_sem::domain::{
    CondStep, ConditionalTrace, Dim, Guard, Interpretation, Place, Term, Terminator, TraceSet, Universe, Update,
    DEFAULT_UNIVERSE_CAP,
};
use pml_sem::model::Model;
use pml_sem::state::{BasicType, Loc, SystemState, Value};
use pml_sem::syntax::{BinOp, UnOp};

pub fn x() -> Term {
    Term::Var { name: "x".into(), loc: Loc::Global(2) }
}

pub fn y() -> Term {
    Term::Var { name: "y".into(), loc: Loc::Global(3) }
}

fn place(name: &str, loc: u32) -> Place {
    Place::Var { name: name.into(), loc: Loc::Global(loc), ty: BasicType::Byte }
}

pub fn universe() -> Universe {
    let vals: Vec<Value> = (0..3).map(Value::Byte).collect();
    let dims = [Dim::Mem(Loc::Global(2), vals.clone()), Dim::Mem(Loc::Global(3), vals)];
    Universe::enumerate(&SystemState::new(), &dims, 64).expect("nine states")
}

pub fn guards() -> Vec<Guard> {
    let gt0 = Term::Binary(BinOp::Gt, Box::new(x()), Box::new(Term::Const(0)));
    vec![
        Guard::True,
        Guard::False,
        Guard::Expr(x()),
        Guard::Expr(y()),
        Guard::Expr(gt0),
        Guard::Expr(Term::Unary(UnOp::Not, Box::new(x()))),
        Guard::And(vec![Guard::Expr(x()), Guard::Expr(y())]),
        Guard::Not(Box::new(Guard::Expr(y()))),
    ]
}

pub fn updates() -> Vec<Update> {
    vec![
        Update::Id,
        Update::Assign(place("x", 2), Term::Const(0)),
        Update::Assign(place("x", 2), Term::Const(1)),
        Update::Assign(place("x", 2), y()),
        Update::Assign(place("y", 3), x()),
    ]
}

pub fn arb_step() -> impl Strategy<Value = CondStep> {
    (select(guards()), select(updates())).prop_map(|(g, u)| CondStep::trans(g, u))
}

pub fn arb_end() -> impl Strategy<Value = Terminator> {
    select(vec![Terminator::Open, Terminator::Final, Terminator::Truncated(2)])
}

pub fn arb_trace() -> impl Strategy<Value = ConditionalTrace> {
    (prop::collection::vec(arb_step(), 0..4), arb_end()).prop_map(|(s, e)| ConditionalTrace::new(s, e))
}

pub fn arb_set() -> impl Strategy<Value = TraceSet> {
    prop::collection::vec(arb_trace(), 0..4).prop_map(TraceSet::new)
}

/// A trace below `t`: the first `keep` steps with guards strengthened by `extra`.
pub fn below(t: &ConditionalTrace, keep: usize, extra: &[Option<Guard>]) -> ConditionalTrace {
    let n = keep.min(t.steps.len());
    let steps = t.steps[..n]
        .iter()
        .enumerate()
        .map(|(i, s)| match (s, extra.get(i).cloned().flatten()) {
            (CondStep::Trans { guard, update, marked }, Some(g)) => {
                CondStep::Trans { guard: Guard::And(vec![guard.clone(), g]), update: update.clone(), marked: *marked }
            }
            (s, _) => s.clone(),
        })
        .collect();
    let end = if n == t.steps.len() && keep > n { t.end } else { Terminator::Open };
    ConditionalTrace::new(steps, end)
}

pub fn arb_weakening() -> impl Strategy<Value = (usize, Vec<Option<Guard>>)> {
    (0usize..6, prop::collection::vec(prop::option::of(select(guards())), 0..4))
}

/// Fixture processes used for the monotonicity check.
pub const TP_PROCESSES: &[(&str, &str)] =
    &[("peterson", "P"), ("prodcons1", "Consumer"), ("selector", "Choose"), ("gotoloop", "init"), ("pingpong", "Ponger"), ("runchain", "A")];

pub fn names(model: &Model) -> Vec<String> {
    model.procs.iter().map(|p| p.name.clone()).chain(["init".to_string()]).collect()
}

/// Checks TP(η) ⊑ TP(η') for η' an iterate and η a sub-selection of its prefixes.
pub fn tp_monotone(model: &Model, proc: &str, depth: u32, mask: &[bool]) -> Result<(), String> {
    let pm = if proc == "init" { &model.init } else { model.proctype(proc).expect("proctype") };
    let names = names(model);
    let interp = Interpretation::bottom(names.iter().map(String::as_str));
    let u = Universe::for_process(model, proc, DEFAULT_UNIVERSE_CAP).map_err(|e| e.to_string())?;
    let upper = iterate(&pm.cfg, &pm.env, model, &interp, depth).map_err(|e| e.to_string())?;
    let mut bit = mask.iter().copied().cycle();
    let lower: Vec<TraceSet> = upper
        .iter()
        .map(|s| TraceSet::new(s.iter().flat_map(|t| t.prefixes().chain([t.clone()]).collect::<Vec<_>>()).filter(|_| bit.next().unwrap_or(true))))
        .collect();
    for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
        if !pml_sem::domain::set_leq(a, b, &u) {
            return Err(format!("{proc}: selected prefixes at point {i} are not below the iterate"));
        }
    }
    let ta = tp_step(&pm.cfg, &pm.env, model, &interp, &lower).map_err(|e| e.to_string())?;
    let tb = tp_step(&pm.cfg, &pm.env, model, &interp, &upper).map_err(|e| e.to_string())?;
    for (i, (a, b)) in ta.iter().zip(&tb).enumerate() {
        if !pml_sem::domain::set_leq(a, b, &u) {
            return Err(format!("{proc} depth {depth}: TP not monotone at point {i}"));
        }
    }
    Ok(())
}
