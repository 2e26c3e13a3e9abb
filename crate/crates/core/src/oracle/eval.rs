use crate::state::{Binding, Env, SystemState, Value, VarType};
use crate::syntax::{BinOp, LExpr, RExpr};

fn lookup<'a>(env: &'a Env, n: &str) -> Option<&'a Binding> {
    env.lookup(n).ok()
}

fn element(v: &Value, i: i64) -> Option<i64> {
    match v {
        Value::Array(_, items) if i >= 0 => items.get(i as usize)?.as_int(),
        _ => None,
    }
}

/// Integer value of `e`; `None` for undefined reads, bad indices and division by zero.
pub fn eval(e: &RExpr, env: &Env, s: &SystemState) -> Option<i64> {
    match e {
        RExpr::Const(c) => Some(*c),
        RExpr::Var(n) => match lookup(env, n)? {
            Binding::Var { loc, ty: VarType::Scalar(_), .. } => s.get(*loc)?.as_int(),
            Binding::Const(c) => Some(*c),
            _ => None,
        },
        RExpr::Index(n, i) => {
            let Binding::Var { loc, ty: VarType::Array(..), .. } = lookup(env, n)? else {
                return None;
            };
            let i = eval(i, env, s)?;
            element(s.get(*loc)?, i)
        }
        RExpr::Unary(op, a) => Some(op.apply(eval(a, env, s)?)),
        RExpr::Binary(BinOp::And, a, b) => match eval(a, env, s)? {
            0 => Some(0),
            _ => Some((eval(b, env, s)? != 0) as i64),
        },
        RExpr::Binary(BinOp::Or, a, b) => match eval(a, env, s)? {
            0 => Some((eval(b, env, s)? != 0) as i64),
            _ => Some(1),
        },
        RExpr::Binary(op, a, b) => op.apply(eval(a, env, s)?, eval(b, env, s)?),
    }
}

pub fn truthy(e: &RExpr, env: &Env, s: &SystemState) -> bool {
    eval(e, env, s).is_some_and(|v| v != 0)
}

/// Stores `v` into the location named by `l`, coerced to its type.
/// Failures leave the undefined state.
pub fn assign(l: &LExpr, v: Option<i64>, env: &Env, s: &mut SystemState) {
    let Some(Binding::Var { loc, ty, writable: true }) = lookup(env, l.name()) else {
        *s = SystemState::bottom();
        return;
    };
    let (loc, ty) = (*loc, *ty);
    match (l, ty, v) {
        (LExpr::Var(_), VarType::Scalar(t), Some(v)) => s.write(loc, t.coerce(v)),
        (LExpr::Index(_, i), VarType::Array(t, n), Some(v)) => {
            let idx = eval(i, env, s).filter(|i| (0..n as i64).contains(i));
            match (idx, s.get(loc).cloned()) {
                (Some(i), Some(Value::Array(et, mut items))) => {
                    items[i as usize] = t.coerce(v);
                    s.write(loc, Value::Array(et, items));
                }
                _ => *s = SystemState::bottom(),
            }
        }
        _ => *s = SystemState::bottom(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{BasicType, Loc};

    fn setup() -> (Env, SystemState) {
        let mut env = Env::new();
        env.bind("b", Binding::Var { loc: Loc::Global(2), ty: VarType::Scalar(BasicType::Byte), writable: true });
        env.bind("f", Binding::Var { loc: Loc::Global(3), ty: VarType::Array(BasicType::Bit, 2), writable: true });
        env.bind("K", Binding::Const(7));
        let mut s = SystemState::new();
        s.write(Loc::Global(2), Value::Byte(250));
        s.write(Loc::Global(3), Value::Array(BasicType::Bit, vec![Value::Bit(0), Value::Bit(1)]));
        (env, s)
    }

    #[test]
    fn byte_wraps_on_store() {
        let (env, mut s) = setup();
        let e = RExpr::Binary(BinOp::Add, Box::new(RExpr::Var("b".into())), Box::new(RExpr::Const(10)));
        let v = eval(&e, &env, &s);
        assert_eq!(v, Some(260));
        assign(&LExpr::Var("b".into()), v, &env, &mut s);
        assert_eq!(s.read(Loc::Global(2)), Value::Byte(4));
    }

    #[test]
    fn array_access() {
        let (env, mut s) = setup();
        assert_eq!(eval(&RExpr::Index("f".into(), Box::new(RExpr::Const(1))), &env, &s), Some(1));
        assert_eq!(eval(&RExpr::Index("f".into(), Box::new(RExpr::Const(2))), &env, &s), None);
        assert_eq!(eval(&RExpr::Var("K".into()), &env, &s), Some(7));
        assign(&LExpr::Index("f".into(), Box::new(RExpr::Const(5))), Some(1), &env, &mut s);
        assert!(s.is_bottom());
    }

    #[test]
    fn short_circuit() {
        let (env, s) = setup();
        let bad = RExpr::Binary(BinOp::Div, Box::new(RExpr::Const(1)), Box::new(RExpr::Const(0)));
        let e = RExpr::Binary(BinOp::And, Box::new(RExpr::Const(0)), Box::new(bad.clone()));
        assert_eq!(eval(&e, &env, &s), Some(0));
        assert!(!truthy(&bad, &env, &s));
    }
}
