use std::fmt;

use serde::Serialize;

use crate::state::BasicType;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum UnOp {
    Not,
    Neg,
    BitNot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::BitOr => 3,
            BinOp::BitXor => 4,
            BinOp::BitAnd => 5,
            BinOp::Eq | BinOp::Ne => 6,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 10,
        }
    }

    /// Integer semantics on 32-bit wrapping arithmetic; `None` is undefined.
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        let (x, y) = (a as i32, b as i32);
        let r = match self {
            BinOp::Add => x.wrapping_add(y) as i64,
            BinOp::Sub => x.wrapping_sub(y) as i64,
            BinOp::Mul => x.wrapping_mul(y) as i64,
            BinOp::Div => {
                if y == 0 {
                    return None;
                }
                x.wrapping_div(y) as i64
            }
            BinOp::Mod => {
                if y == 0 {
                    return None;
                }
                x.wrapping_rem(y) as i64
            }
            BinOp::Lt => (a < b) as i64,
            BinOp::Le => (a <= b) as i64,
            BinOp::Gt => (a > b) as i64,
            BinOp::Ge => (a >= b) as i64,
            BinOp::Eq => (a == b) as i64,
            BinOp::Ne => (a != b) as i64,
            BinOp::And => (a != 0 && b != 0) as i64,
            BinOp::Or => (a != 0 || b != 0) as i64,
            BinOp::BitAnd => (x & y) as i64,
            BinOp::BitOr => (x | y) as i64,
            BinOp::BitXor => (x ^ y) as i64,
            BinOp::Shl => x.wrapping_shl(y as u32) as i64,
            BinOp::Shr => x.wrapping_shr(y as u32) as i64,
        };
        Some(r)
    }
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
            UnOp::BitNot => "~",
        }
    }

    pub fn apply(self, a: i64) -> i64 {
        match self {
            UnOp::Not => (a == 0) as i64,
            UnOp::Neg => (a as i32).wrapping_neg() as i64,
            UnOp::BitNot => !(a as i32) as i64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RExpr {
    Const(i64),
    Var(String),
    Index(String, Box<RExpr>),
    Unary(UnOp, Box<RExpr>),
    Binary(BinOp, Box<RExpr>, Box<RExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LExpr {
    Var(String),
    Index(String, Box<RExpr>),
}

impl LExpr {
    pub fn name(&self) -> &str {
        match self {
            LExpr::Var(n) | LExpr::Index(n, _) => n,
        }
    }

    pub fn to_rexpr(&self) -> RExpr {
        match self {
            LExpr::Var(n) => RExpr::Var(n.clone()),
            LExpr::Index(n, i) => RExpr::Index(n.clone(), i.clone()),
        }
    }
}

fn fmt_expr(e: &RExpr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        RExpr::Const(c) => write!(f, "{c}"),
        RExpr::Var(n) => f.write_str(n),
        RExpr::Index(n, i) => write!(f, "{n}[{i}]"),
        RExpr::Unary(op, a) => {
            f.write_str(op.symbol())?;
            fmt_expr(a, 11, f)
        }
        RExpr::Binary(op, a, b) => {
            let p = op.precedence();
            if p < parent {
                f.write_str("(")?;
            }
            fmt_expr(a, p, f)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(b, p + 1, f)?;
            if p < parent {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for RExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

impl fmt::Display for LExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LExpr::Var(n) => f.write_str(n),
            LExpr::Index(n, i) => write!(f, "{n}[{i}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Initializer {
    Expr(RExpr),
    List(Vec<RExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarDecl {
    pub ty: BasicType,
    pub name: String,
    pub array_len: Option<usize>,
    pub init: Option<Initializer>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChanDecl {
    pub name: String,
    pub capacity: usize,
    pub fields: Vec<BasicType>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GlobalDecl {
    Var(VarDecl),
    Chan(ChanDecl),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: BasicType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProctypeDecl {
    pub name: String,
    pub active: u32,
    pub params: Vec<Param>,
    pub body: Vec<LabeledStmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InitDecl {
    pub body: Vec<LabeledStmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledStmt {
    pub labels: Vec<String>,
    pub stmt: Stmt,
    pub pos: Pos,
}

impl LabeledStmt {
    pub fn new(stmt: Stmt, pos: Pos) -> Self {
        LabeledStmt { labels: Vec::new(), stmt, pos }
    }
}

/// Branches of `if`/`do`; each branch is a statement list whose head is the guard.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub branches: Vec<Vec<LabeledStmt>>,
    pub else_branch: Option<Vec<LabeledStmt>>,
    /// Label of the convergence point, set when a loop is lowered.
    pub exit_label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Stmt {
    Skip,
    Goto(String),
    Break,
    Expr(RExpr),
    Assign(LExpr, RExpr),
    Decl(VarDecl),
    Send { chan: String, args: Vec<RExpr> },
    Receive { chan: String, args: Vec<LExpr> },
    Run { proctype: String, args: Vec<RExpr> },
    If(Selection),
    Do(Selection),
    Atomic(Vec<LabeledStmt>),
    Printf { format: String, args: Vec<RExpr> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Program {
    pub mtypes: Vec<String>,
    pub globals: Vec<GlobalDecl>,
    pub proctypes: Vec<ProctypeDecl>,
    pub init: Option<InitDecl>,
}

impl Program {
    pub fn proctype(&self, name: &str) -> Option<&ProctypeDecl> {
        self.proctypes.iter().find(|p| p.name == name)
    }
}
