use super::DenoteError;
use crate::domain::{Place, Term};
use crate::state::{Binding, Env, SystemState, Value, VarType};
use crate::syntax::{LExpr, RExpr};

pub fn resolve_r(e: &RExpr, env: &Env) -> Result<Term, DenoteError> {
    Ok(match e {
        RExpr::Const(c) => Term::Const(*c),
        RExpr::Var(n) => match env.lookup(n)? {
            Binding::Var { loc, ty: VarType::Scalar(_), .. } => Term::Var { name: n.clone(), loc: *loc },
            Binding::Var { .. } => return Err(DenoteError::NotScalar(n.clone())),
            Binding::Const(c) => Term::Const(*c),
            Binding::Chan(_) => return Err(DenoteError::ChannelAsValue(n.clone())),
        },
        RExpr::Index(n, i) => match env.lookup(n)? {
            Binding::Var { loc, ty: VarType::Array(_, len), .. } => {
                Term::Elem { name: n.clone(), loc: *loc, len: *len, index: Box::new(resolve_r(i, env)?) }
            }
            _ => return Err(DenoteError::NotArray(n.clone())),
        },
        RExpr::Unary(op, a) => Term::Unary(*op, Box::new(resolve_r(a, env)?)),
        RExpr::Binary(op, a, b) => Term::Binary(*op, Box::new(resolve_r(a, env)?), Box::new(resolve_r(b, env)?)),
    })
}

pub fn resolve_l(e: &LExpr, env: &Env) -> Result<Place, DenoteError> {
    let name = e.name();
    let Binding::Var { loc, ty, writable } = env.lookup(name)? else {
        return Err(DenoteError::NotWritable(name.to_string()));
    };
    if !writable {
        return Err(DenoteError::NotWritable(name.to_string()));
    }
    match (e, ty) {
        (LExpr::Var(_), VarType::Scalar(t)) => Ok(Place::Var { name: name.to_string(), loc: *loc, ty: *t }),
        (LExpr::Index(_, i), VarType::Array(t, len)) => {
            Ok(Place::Elem { name: name.to_string(), loc: *loc, ty: *t, len: *len, index: resolve_r(i, env)? })
        }
        (LExpr::Var(_), VarType::Array(..)) => Err(DenoteError::NotScalar(name.to_string())),
        (LExpr::Index(..), VarType::Scalar(_)) => Err(DenoteError::NotArray(name.to_string())),
    }
}

/// Value of an r-expression; booleans are 0/1 and failures are `Undefined`.
pub fn eval_r(e: &RExpr, env: &Env, s: &SystemState) -> Result<Value, DenoteError> {
    let t = resolve_r(e, env)?;
    Ok(t.eval(s).map_or(Value::Undefined, |v| Value::Int(v as i32)))
}

/// Location handle produced by an l-expression in a given state.
#[derive(Clone, Debug)]
pub struct LRef {
    pub place: Place,
    state: SystemState,
}

impl LRef {
    pub fn apply(self, f: impl FnOnce(Option<i64>) -> Option<i64>) -> SystemState {
        let mut s = self.state;
        self.place.modify(&mut s, f);
        s
    }
}

pub fn eval_l(e: &LExpr, env: &Env, s: &SystemState) -> Result<LRef, DenoteError> {
    Ok(LRef { place: resolve_l(e, env)?, state: s.clone() })
}
