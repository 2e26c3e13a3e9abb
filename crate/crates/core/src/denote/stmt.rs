use super::expr::{resolve_l, resolve_r};
use super::DenoteError;
use crate::cfg::BasicStmt;
use crate::domain::{ChanRef, CondStep, ConditionalTrace, Guard, Interpretation, Term, Terminator, Update};
use crate::model::Model;
use crate::state::{Binding, Env, VarType};
use crate::syntax::{Initializer, RExpr};

fn chan_ref(model: &Model, env: &Env, name: &str) -> Result<(ChanRef, usize, usize), DenoteError> {
    match env.lookup(name)? {
        Binding::Chan(id) => {
            let info = model.chan(*id);
            Ok((ChanRef { id: *id, name: name.to_string() }, info.capacity, info.fields.len()))
        }
        _ => Err(DenoteError::NotChannel(name.to_string())),
    }
}

fn expr_guard(t: Term) -> Guard {
    match t {
        Term::Const(0) => Guard::False,
        Term::Const(_) => Guard::True,
        t => Guard::Expr(t),
    }
}

fn one(step: CondStep) -> ConditionalTrace {
    ConditionalTrace::new(vec![step], Terminator::Open)
}

/// Denotation of a basic statement as a (one- or two-step) open trace.
pub fn denote_stmt(
    st: &BasicStmt,
    env: &Env,
    model: &Model,
    interp: &Interpretation,
    marked: bool,
) -> Result<ConditionalTrace, DenoteError> {
    let trans = |guard: Guard, update: Update| CondStep::Trans { guard, update, marked };
    Ok(match st {
        BasicStmt::Skip => one(trans(Guard::True, Update::Id)),
        BasicStmt::Expr(e) => one(trans(expr_guard(resolve_r(e, env)?), Update::Id)),
        BasicStmt::Assign(l, r) => one(trans(Guard::True, Update::Assign(resolve_l(l, env)?, resolve_r(r, env)?))),
        BasicStmt::Decl(d) => {
            let Binding::Var { loc, ty, .. } = env.lookup(&d.name)? else {
                return Err(DenoteError::NotWritable(d.name.clone()));
            };
            let zero = RExpr::Const(0);
            let init = d.init.clone().unwrap_or(Initializer::Expr(zero));
            let values = match (init, ty) {
                (Initializer::Expr(e), VarType::Scalar(_)) => vec![resolve_r(&e, env)?],
                (Initializer::Expr(e), VarType::Array(_, n)) => vec![resolve_r(&e, env)?; *n],
                (Initializer::List(es), VarType::Array(_, n)) if es.len() == *n => {
                    es.iter().map(|e| resolve_r(e, env)).collect::<Result<_, _>>()?
                }
                (Initializer::List(es), _) => {
                    return Err(DenoteError::InitLength { name: d.name.clone(), found: es.len() });
                }
            };
            one(trans(Guard::True, Update::Init { name: d.name.clone(), loc: *loc, ty: *ty, values }))
        }
        BasicStmt::Send { chan, args, .. } => {
            let (c, cap, fields) = chan_ref(model, env, chan)?;
            if args.len() != fields {
                return Err(DenoteError::MessageArity { chan: chan.clone(), expected: fields, found: args.len() });
            }
            let terms = args.iter().map(|a| resolve_r(a, env)).collect::<Result<Vec<_>, _>>()?;
            if cap == 0 {
                one(trans(
                    Guard::ChanDefined(c.clone()),
                    Update::Seq(vec![Update::ChanPush(c.clone(), terms), Update::SetHandshake(Some(c))]),
                ))
            } else {
                one(trans(Guard::And(vec![Guard::ChanDefined(c.clone()), Guard::NFull(c.clone())]), Update::ChanPush(c, terms)))
            }
        }
        BasicStmt::Receive { chan, args, .. } => {
            let (c, cap, fields) = chan_ref(model, env, chan)?;
            if args.len() != fields {
                return Err(DenoteError::MessageArity { chan: chan.clone(), expected: fields, found: args.len() });
            }
            let places = args.iter().map(|a| resolve_l(a, env)).collect::<Result<Vec<_>, _>>()?;
            if cap == 0 {
                one(trans(
                    Guard::And(vec![Guard::ChanDefined(c.clone()), Guard::HandshakeIs(c.clone())]),
                    Update::Seq(vec![Update::ChanPop(c, places), Update::SetHandshake(None)]),
                ))
            } else {
                one(trans(Guard::And(vec![Guard::ChanDefined(c.clone()), Guard::NEmpty(c.clone())]), Update::ChanPop(c, places)))
            }
        }
        BasicStmt::Run { proctype, args } => {
            let pm = model.proctype(proctype).ok_or_else(|| DenoteError::UnknownProctype(proctype.clone()))?;
            if pm.params.len() != args.len() {
                return Err(DenoteError::RunArity { proctype: proctype.clone(), expected: pm.params.len(), found: args.len() });
            }
            let actuals = args.iter().map(|a| resolve_r(a, env)).collect::<Result<Vec<_>, _>>()?;
            let param_types = pm.params.iter().map(|p| p.ty).collect();
            let alloc = Update::Seq(vec![
                Update::SpawnAlloc { proctype: proctype.clone(), actuals, param_types },
                Update::BumpNrPr(1),
            ]);
            let payload = interp.get(proctype).map_err(|_| DenoteError::UnknownProctype(proctype.clone()))?.clone();
            ConditionalTrace::new(
                vec![trans(Guard::True, alloc), CondStep::Spawn { proctype: proctype.clone(), payload, marked }],
                Terminator::Open,
            )
        }
    })
}
