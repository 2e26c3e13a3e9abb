use std::fmt;

use crate::state::{BasicType, ChanId, Loc, SystemState, Value};
use crate::syntax::{BinOp, UnOp};

/// A resolved r-expression: identifiers replaced by their locations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(i64),
    Var { name: String, loc: Loc },
    Elem { name: String, loc: Loc, len: usize, index: Box<Term> },
    Unary(UnOp, Box<Term>),
    Binary(BinOp, Box<Term>, Box<Term>),
}

/// A resolved l-expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Var { name: String, loc: Loc, ty: BasicType },
    Elem { name: String, loc: Loc, ty: BasicType, len: usize, index: Term },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChanRef {
    pub id: ChanId,
    pub name: String,
}

impl fmt::Display for ChanRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn index_in(idx: i64, len: usize) -> Option<usize> {
    usize::try_from(idx).ok().filter(|&i| i < len)
}

impl Term {
    /// `None` is the undefined value.
    pub fn eval(&self, s: &SystemState) -> Option<i64> {
        match self {
            Term::Const(c) => Some(*c),
            Term::Var { loc, .. } => s.get(*loc)?.as_int(),
            Term::Elem { loc, len, index, .. } => {
                let i = index_in(index.eval(s)?, *len)?;
                match s.get(*loc)? {
                    Value::Array(_, items) => items.get(i)?.as_int(),
                    _ => None,
                }
            }
            Term::Unary(op, a) => Some(op.apply(a.eval(s)?)),
            Term::Binary(BinOp::And, a, b) => {
                if a.eval(s)? == 0 {
                    Some(0)
                } else {
                    Some((b.eval(s)? != 0) as i64)
                }
            }
            Term::Binary(BinOp::Or, a, b) => {
                if a.eval(s)? != 0 {
                    Some(1)
                } else {
                    Some((b.eval(s)? != 0) as i64)
                }
            }
            Term::Binary(op, a, b) => op.apply(a.eval(s)?, b.eval(s)?),
        }
    }

    pub fn rename(&self, pid: u32) -> Term {
        match self {
            Term::Const(c) => Term::Const(*c),
            Term::Var { name, loc } => Term::Var { name: name.clone(), loc: loc.rename(pid) },
            Term::Elem { name, loc, len, index } => {
                Term::Elem { name: name.clone(), loc: loc.rename(pid), len: *len, index: Box::new(index.rename(pid)) }
            }
            Term::Unary(op, a) => Term::Unary(*op, Box::new(a.rename(pid))),
            Term::Binary(op, a, b) => Term::Binary(*op, Box::new(a.rename(pid)), Box::new(b.rename(pid))),
        }
    }

    pub fn locations(&self, out: &mut Vec<Loc>) {
        match self {
            Term::Const(_) => {}
            Term::Var { loc, .. } => out.push(*loc),
            Term::Elem { loc, index, .. } => {
                out.push(*loc);
                index.locations(out);
            }
            Term::Unary(_, a) => a.locations(out),
            Term::Binary(_, a, b) => {
                a.locations(out);
                b.locations(out);
            }
        }
    }

    fn render(&self, at: Option<&SystemState>, parent: u8, f: &mut dyn fmt::Write) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var { name, .. } => f.write_str(name),
            Term::Elem { name, index, .. } => match at.and_then(|s| index.eval(s)) {
                Some(i) => write!(f, "{name}[{i}]"),
                None => {
                    write!(f, "{name}[")?;
                    index.render(at, 0, f)?;
                    f.write_str("]")
                }
            },
            Term::Unary(op, a) => {
                f.write_str(op.symbol())?;
                a.render(at, 11, f)
            }
            Term::Binary(op, a, b) => {
                let p = op.precedence();
                if p < parent {
                    f.write_str("(")?;
                }
                a.render(at, p, f)?;
                write!(f, " {} ", op.symbol())?;
                b.render(at, p + 1, f)?;
                if p < parent {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    /// Rendering with array indices evaluated in `s`.
    pub fn render_at(&self, s: &SystemState) -> String {
        let mut out = String::new();
        let _ = self.render(Some(s), 0, &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render(None, 0, &mut out)?;
        f.write_str(&out)
    }
}

impl Place {
    pub fn ty(&self) -> BasicType {
        match self {
            Place::Var { ty, .. } | Place::Elem { ty, .. } => *ty,
        }
    }

    pub fn read(&self, s: &SystemState) -> Option<i64> {
        self.as_term().eval(s)
    }

    pub fn as_term(&self) -> Term {
        match self {
            Place::Var { name, loc, .. } => Term::Var { name: name.clone(), loc: *loc },
            Place::Elem { name, loc, len, index, .. } => {
                Term::Elem { name: name.clone(), loc: *loc, len: *len, index: Box::new(index.clone()) }
            }
        }
    }

    /// Apply a value modifier to the targeted location; failures yield ⊥.
    pub fn modify(&self, s: &mut SystemState, f: impl FnOnce(Option<i64>) -> Option<i64>) {
        if s.is_bottom() {
            return;
        }
        match self {
            Place::Var { loc, ty, .. } => {
                let old = s.get(*loc).and_then(Value::as_int);
                match f(old) {
                    Some(v) => s.write(*loc, ty.coerce(v)),
                    None => *s = SystemState::bottom(),
                }
            }
            Place::Elem { loc, ty, len, index, .. } => {
                let Some(i) = index.eval(s).and_then(|i| index_in(i, *len)) else {
                    *s = SystemState::bottom();
                    return;
                };
                let Some(Value::Array(t, mut items)) = s.get(*loc).cloned() else {
                    *s = SystemState::bottom();
                    return;
                };
                match f(items[i].as_int()) {
                    Some(v) => {
                        items[i] = ty.coerce(v);
                        s.write(*loc, Value::Array(t, items));
                    }
                    None => *s = SystemState::bottom(),
                }
            }
        }
    }

    pub fn write(&self, s: &mut SystemState, v: Option<i64>) {
        self.modify(s, |_| v)
    }

    pub fn rename(&self, pid: u32) -> Place {
        match self {
            Place::Var { name, loc, ty } => Place::Var { name: name.clone(), loc: loc.rename(pid), ty: *ty },
            Place::Elem { name, loc, ty, len, index } => Place::Elem {
                name: name.clone(),
                loc: loc.rename(pid),
                ty: *ty,
                len: *len,
                index: index.rename(pid),
            },
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_term())
    }
}
