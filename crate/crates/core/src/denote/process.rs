use super::atomics::{atomics_with, Feasible};
use super::stmt::denote_stmt;
use super::DenoteError;
use crate::cfg::{Cfg, PointId};
use crate::domain::{CondStep, ConditionalTrace, Guard, Interpretation, Terminator, TraceSet, Update};
use crate::model::Model;
use crate::state::Env;

/// Trace sets indexed by process point.
pub type PointDenotation = Vec<TraceSet>;

/// Per-edge statement denotations; `None` for else edges.
pub fn edge_denotations(
    cfg: &Cfg,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
) -> Result<Vec<Option<ConditionalTrace>>, DenoteError> {
    cfg.edges
        .iter()
        .map(|e| e.stmt.as_ref().map(|st| denote_stmt(st, env, model, interp, e.marked())).transpose())
        .collect()
}

pub fn add_else(e: &TraceSet, t: &TraceSet) -> Result<TraceSet, DenoteError> {
    add_else_marked(e, t, false)
}

fn add_else_marked(e: &TraceSet, t: &TraceSet, marked: bool) -> Result<TraceSet, DenoteError> {
    let mut guards: Vec<Guard> = Vec::new();
    for tr in t.iter() {
        match tr.steps.first() {
            Some(CondStep::Trans { guard, .. }) => {
                if !guards.contains(guard) {
                    guards.push(guard.clone());
                }
            }
            _ => return Err(DenoteError::ElseWithoutGuard),
        }
    }
    let g = Guard::and(guards.into_iter().map(Guard::not).collect()).simplify();
    let head = ConditionalTrace::new(vec![CondStep::Trans { guard: g, update: Update::Id, marked }], Terminator::Open);
    Ok(t.union(&e.prefix_with(&head)))
}

fn step_with(cfg: &Cfg, edges: &[Option<ConditionalTrace>], eta: &[TraceSet]) -> Result<PointDenotation, DenoteError> {
    let mut out = Vec::with_capacity(cfg.points.len());
    for p in &cfg.points {
        let mut normal: Vec<TraceSet> = Vec::new();
        let mut els = None;
        for e in cfg.out_edges(p.id) {
            let next = &eta[e.to.0 as usize];
            match &edges[e.id] {
                Some(tr) => normal.push(next.prefix_with(tr)),
                None => els = Some((next, e.marked())),
            }
        }
        let t = if normal.is_empty() { TraceSet::epsilon() } else { TraceSet::union_all(&normal) };
        out.push(match els {
            Some((e, marked)) => add_else_marked(e, &t, marked)?,
            None => t,
        });
    }
    Ok(out)
}

/// One application of the immediate-consequences operator.
pub fn tp_step(
    cfg: &Cfg,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
    eta: &[TraceSet],
) -> Result<PointDenotation, DenoteError> {
    let edges = edge_denotations(cfg, env, model, interp)?;
    step_with(cfg, &edges, eta)
}

/// `depth` Kleene iterates from the truncated bottom, before atomics.
pub fn iterate(
    cfg: &Cfg,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
    depth: u32,
) -> Result<PointDenotation, DenoteError> {
    let edges = edge_denotations(cfg, env, model, interp)?;
    let mut eta: PointDenotation = vec![TraceSet::singleton(ConditionalTrace::truncated(depth)); cfg.points.len()];
    for _ in 0..depth {
        eta = step_with(cfg, &edges, &eta)?;
    }
    Ok(eta)
}

/// Denotation at every point, with atomic blocks expanded.
pub fn process_denotation(
    cfg: &Cfg,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
    depth: u32,
    feasible: Feasible<'_>,
) -> Result<PointDenotation, DenoteError> {
    iterate(cfg, env, model, interp, depth)?.iter().map(|s| atomics_with(s, true, feasible)).collect()
}

/// Denotation at the entry point, with atomic blocks expanded.
pub fn entry_denotation(
    cfg: &Cfg,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
    depth: u32,
    feasible: Feasible<'_>,
) -> Result<TraceSet, DenoteError> {
    let eta = iterate(cfg, env, model, interp, depth)?;
    atomics_with(&eta[cfg.entry.0 as usize], false, feasible)
}

pub fn at(eta: &PointDenotation, p: PointId) -> &TraceSet {
    &eta[p.0 as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{set_leq, Term, Universe, DEFAULT_UNIVERSE_CAP};

    const FIG: &str = "bit f[2] = {0,0};
proctype P(bit id){
  L0: if :: atomic{ f[id] = 1; L1: !f[1-id] }; L2: skip; L3: f[id] = 0; L4: goto L0 fi
}
init{ L5: atomic{ run P(0); L6: run P(1) } }";

    fn setup() -> (Model, Interpretation) {
        (Model::from_source(FIG).unwrap(), Interpretation::bottom(["P", "init"]))
    }

    #[test]
    fn one_step_from_bottom() {
        let (m, i) = setup();
        let p = m.proctype("P").unwrap();
        let eta0: Vec<TraceSet> = vec![TraceSet::epsilon(); p.cfg.points.len()];
        let eta1 = tp_step(&p.cfg, &p.env, &m, &i, &eta0).unwrap();
        let l3 = p.cfg.label("L3").unwrap();
        let s = at(&eta1, l3);
        assert_eq!(s.len(), 1);
        let t = s.iter().next().unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.end, Terminator::Open);
        assert_eq!(t.steps[0].to_string(), "<true, f[id] = 0>");
    }

    #[test]
    fn depth_four_loop_body() {
        let (m, i) = setup();
        let p = m.proctype("P").unwrap();
        let eta = iterate(&p.cfg, &p.env, &m, &i, 4).unwrap();
        let s = at(&eta, p.cfg.entry);
        assert_eq!(s.len(), 1);
        let t = s.iter().next().unwrap();
        let shown: Vec<String> = t.steps.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, vec!["<true, f[id] = 1>", "<!f[1 - id], id>^", "<true, id>", "<true, f[id] = 0>"]);
        assert_eq!(t.end, Terminator::Truncated(4));
    }

    #[test]
    fn iterates_increase() {
        let (m, i) = setup();
        let p = m.proctype("P").unwrap();
        let u = Universe::for_process(&m, "P", DEFAULT_UNIVERSE_CAP).unwrap();
        let mut prev = iterate(&p.cfg, &p.env, &m, &i, 0).unwrap();
        for d in 1..6 {
            let next = iterate(&p.cfg, &p.env, &m, &i, d).unwrap();
            for (a, b) in prev.iter().zip(&next) {
                assert!(set_leq(a, b, &u));
            }
            prev = next;
        }
    }

    #[test]
    fn else_guard_negates_first_guards() {
        let x = Term::Var { name: "x".into(), loc: crate::state::Loc::Global(2) };
        let y = Term::Var { name: "y".into(), loc: crate::state::Loc::Global(3) };
        let t = TraceSet::new([
            ConditionalTrace::new(vec![CondStep::trans(Guard::Expr(x), Update::Id)], Terminator::Open),
            ConditionalTrace::new(vec![CondStep::trans(Guard::Expr(y), Update::Id)], Terminator::Open),
        ]);
        let r = add_else(&TraceSet::singleton(ConditionalTrace::finalizer()), &t).unwrap();
        assert_eq!(r.len(), 3);
        let e = r.iter().find(|t| t.end == Terminator::Final).unwrap();
        assert_eq!(e.steps[0].to_string(), "<!x && !y, id>");
        let only_true = TraceSet::singleton(ConditionalTrace::new(vec![CondStep::trans(Guard::True, Update::Id)], Terminator::Open));
        let r = add_else(&TraceSet::epsilon(), &only_true).unwrap();
        assert!(r.iter().any(|t| matches!(&t.steps[0], CondStep::Trans { guard: Guard::False, .. })));
    }
}
