use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::state::BasicType;

const UNSUPPORTED: &[&str] = &[
    "for", "unless", "timeout", "select", "inline", "d_step", "never", "trace", "notrace", "typedef", "short",
    "unsigned", "pid", "hidden", "show", "local", "ltl", "c_code", "c_expr", "provided", "priority", "assert", "eval",
    "len", "empty", "nempty", "full", "nfull", "enabled", "pc_value", "xr", "xs", "np_", "chan_array",
];

pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    Parser { toks, i: 0 }.program()
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

fn basic_type(s: &str) -> Option<BasicType> {
    match s {
        "bit" => Some(BasicType::Bit),
        "bool" => Some(BasicType::Bool),
        "byte" => Some(BasicType::Byte),
        "int" => Some(BasicType::Int),
        "mtype" => Some(BasicType::Mtype),
        _ => None,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let p = self.pos();
        ParseError::Unexpected { line: p.line, col: p.col, found: self.peek().to_string(), expected: expected.into() }
    }

    fn unsupported(&self, what: &str) -> ParseError {
        let p = self.pos();
        ParseError::Unsupported { line: p.line, col: p.col, construct: what.into() }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                if UNSUPPORTED.contains(&s.as_str()) {
                    return Err(self.unsupported(&s));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn number(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn program(mut self) -> Result<Program, ParseError> {
        let mut prog = Program::default();
        loop {
            while self.eat_sym(";") {}
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "mtype" if matches!(self.peek_at(1), Tok::Sym("=") | Tok::Sym("{")) => {
                        self.bump();
                        self.eat_sym("=");
                        self.expect_sym("{")?;
                        loop {
                            prog.mtypes.push(self.ident()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                        self.expect_sym("}")?;
                    }
                    "chan" => {
                        let c = self.chan_decl()?;
                        prog.globals.push(GlobalDecl::Chan(c));
                    }
                    "active" | "proctype" => {
                        let p = self.proctype()?;
                        prog.proctypes.push(p);
                    }
                    "init" => {
                        self.bump();
                        if prog.init.is_some() {
                            return Err(ParseError::Syntax { line: pos.line, col: pos.col, msg: "duplicate init".into() });
                        }
                        self.expect_sym("{")?;
                        let body = self.seq()?;
                        self.expect_sym("}")?;
                        prog.init = Some(InitDecl { body, pos });
                    }
                    k if basic_type(k).is_some() => {
                        for d in self.var_decls()? {
                            prog.globals.push(GlobalDecl::Var(d));
                        }
                    }
                    k if UNSUPPORTED.contains(&k) => return Err(self.unsupported(k)),
                    _ => return Err(self.unexpected("declaration")),
                },
                _ => return Err(self.unexpected("declaration")),
            }
        }
        Ok(prog)
    }

    fn chan_decl(&mut self) -> Result<ChanDecl, ParseError> {
        let pos = self.pos();
        self.expect_kw("chan")?;
        let name = self.ident()?;
        if self.is_sym("[") {
            return Err(self.unsupported("channel array"));
        }
        if !self.is_sym("=") {
            return Err(self.unsupported("uninitialized channel"));
        }
        self.bump();
        self.expect_sym("[")?;
        let cap = self.number()?;
        self.expect_sym("]")?;
        self.expect_kw("of")?;
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        loop {
            let t = self.ident()?;
            let ty = basic_type(&t).ok_or_else(|| self.unsupported(&format!("message field type {t}")))?;
            fields.push(ty);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        let capacity = usize::try_from(cap).map_err(|_| self.unexpected("channel capacity"))?;
        Ok(ChanDecl { name, capacity, fields, pos })
    }

    fn var_decls(&mut self) -> Result<Vec<VarDecl>, ParseError> {
        let tname = self.ident()?;
        let ty = basic_type(&tname).ok_or_else(|| self.unexpected("type"))?;
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            let name = self.ident()?;
            let array_len = if self.eat_sym("[") {
                let n = self.number()?;
                self.expect_sym("]")?;
                Some(usize::try_from(n).map_err(|_| self.unexpected("array size"))?)
            } else {
                None
            };
            let init = if self.eat_sym("=") {
                if self.eat_sym("{") {
                    let mut items = Vec::new();
                    loop {
                        items.push(self.expr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym("}")?;
                    Some(Initializer::List(items))
                } else {
                    Some(Initializer::Expr(self.expr()?))
                }
            } else {
                None
            };
            out.push(VarDecl { ty, name, array_len, init, pos });
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(out)
    }

    fn proctype(&mut self) -> Result<ProctypeDecl, ParseError> {
        let pos = self.pos();
        let mut active = 0;
        if self.is_kw("active") {
            self.bump();
            active = 1;
            if self.eat_sym("[") {
                let n = self.number()?;
                active = u32::try_from(n).map_err(|_| self.unexpected("instance count"))?;
                self.expect_sym("]")?;
            }
        }
        self.expect_kw("proctype")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        while !self.is_sym(")") {
            let tname = self.ident()?;
            let ty = basic_type(&tname).ok_or_else(|| self.unsupported(&format!("parameter type {tname}")))?;
            loop {
                params.push(Param { name: self.ident()?, ty });
                if !self.eat_sym(",") {
                    break;
                }
                if matches!(self.peek(), Tok::Ident(s) if basic_type(s).is_some()) {
                    break;
                }
            }
            if !self.eat_sym(";") && !self.is_sym(")") && !matches!(self.peek(), Tok::Ident(s) if basic_type(s).is_some())
            {
                return Err(self.unexpected("`)`"));
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("{")?;
        let body = self.seq()?;
        self.expect_sym("}")?;
        Ok(ProctypeDecl { name, active, params, body, pos })
    }

    fn at_seq_end(&self) -> bool {
        matches!(self.peek(), Tok::Sym("}") | Tok::Sym("::") | Tok::Eof)
            || self.is_kw("fi")
            || self.is_kw("od")
    }

    fn seq(&mut self) -> Result<Vec<LabeledStmt>, ParseError> {
        let mut out: Vec<LabeledStmt> = Vec::new();
        let mut need_sep = false;
        loop {
            let mut sep = false;
            while self.eat_sym(";") || self.eat_sym("->") {
                sep = true;
            }
            if self.at_seq_end() {
                break;
            }
            if need_sep && !sep {
                return Err(self.unexpected("`;`"));
            }
            let (mut steps, closed) = self.step()?;
            need_sep = !closed;
            out.append(&mut steps);
        }
        Ok(out)
    }

    /// One step; the flag records whether it ended with a closing keyword or brace.
    fn step(&mut self) -> Result<(Vec<LabeledStmt>, bool), ParseError> {
        let pos = self.pos();
        let mut labels = Vec::new();
        while let (Tok::Ident(l), Tok::Sym(":")) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.bump();
            self.bump();
            labels.push(l);
        }
        let head_pos = self.pos();
        if let Tok::Ident(k) = self.peek().clone() {
            if (k != "mtype" || !matches!(self.peek_at(1), Tok::Sym("="))) && basic_type(&k).is_some() {
                let decls = self.var_decls()?;
                let mut out: Vec<LabeledStmt> =
                    decls.into_iter().map(|d| LabeledStmt::new(Stmt::Decl(d), head_pos)).collect();
                out[0].labels = labels;
                out[0].pos = pos;
                return Ok((out, false));
            }
            if k == "chan" {
                return Err(self.unsupported("local channel declaration"));
            }
            if k == "else" {
                return Err(self.unsupported("else outside a selection head"));
            }
        }
        if self.is_sym("{") {
            self.bump();
            let mut inner = self.seq()?;
            self.expect_sym("}")?;
            if inner.is_empty() {
                inner.push(LabeledStmt::new(Stmt::Skip, head_pos));
            }
            let mut ls = labels;
            ls.append(&mut inner[0].labels);
            inner[0].labels = ls;
            return Ok((inner, true));
        }
        let (stmt, closed) = self.stmt()?;
        if self.is_kw("unless") {
            return Err(self.unsupported("unless"));
        }
        Ok((vec![LabeledStmt { labels, stmt, pos }], closed))
    }

    fn selection(&mut self, close: &str) -> Result<Selection, ParseError> {
        let mut branches = Vec::new();
        let mut else_branch = None;
        if !self.is_sym("::") {
            return Err(self.unexpected("`::`"));
        }
        while self.eat_sym("::") {
            if self.is_kw("else") {
                let p = self.pos();
                self.bump();
                if else_branch.is_some() {
                    return Err(ParseError::Syntax { line: p.line, col: p.col, msg: "duplicate else branch".into() });
                }
                let body = self.seq()?;
                else_branch = Some(body);
            } else {
                let body = self.seq()?;
                if body.is_empty() {
                    return Err(self.unexpected("statement"));
                }
                branches.push(body);
            }
        }
        self.expect_kw(close)?;
        Ok(Selection { branches, else_branch, exit_label: None })
    }

    fn stmt(&mut self) -> Result<(Stmt, bool), ParseError> {
        if let Tok::Ident(k) = self.peek().clone() {
            match k.as_str() {
                "if" => {
                    self.bump();
                    return Ok((Stmt::If(self.selection("fi")?), true));
                }
                "do" => {
                    self.bump();
                    return Ok((Stmt::Do(self.selection("od")?), true));
                }
                "atomic" => {
                    self.bump();
                    self.expect_sym("{")?;
                    let body = self.seq()?;
                    self.expect_sym("}")?;
                    return Ok((Stmt::Atomic(body), true));
                }
                "skip" => {
                    self.bump();
                    return Ok((Stmt::Skip, false));
                }
                "break" => {
                    self.bump();
                    return Ok((Stmt::Break, false));
                }
                "goto" => {
                    self.bump();
                    return Ok((Stmt::Goto(self.ident()?), false));
                }
                "run" => {
                    self.bump();
                    let proctype = self.ident()?;
                    let args = self.call_args()?;
                    return Ok((Stmt::Run { proctype, args }, false));
                }
                "printf" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let format = match self.bump() {
                        Tok::Str(s) => s,
                        _ => return Err(self.unexpected("format string")),
                    };
                    let mut args = Vec::new();
                    while self.eat_sym(",") {
                        args.push(self.expr()?);
                    }
                    self.expect_sym(")")?;
                    return Ok((Stmt::Printf { format, args }, false));
                }
                "true" | "false" => {}
                k if UNSUPPORTED.contains(&k) => return Err(self.unsupported(k)),
                _ => {
                    if let Tok::Sym(s) = self.peek_at(1).clone() {
                        match s {
                            "!" | "?" => {
                                self.bump();
                                self.bump();
                                let op = self.toks[self.i - 1].pos;
                                let next = self.pos();
                                let adjacent = next.line == op.line && next.col == op.col + 1;
                                if (adjacent && (self.is_sym("!") || self.is_sym("?"))) || self.is_sym("<") {
                                    return Err(self.unsupported("sorted or random channel operation"));
                                }
                                return self.chan_op(k, s == "!").map(|s| (s, false));
                            }
                            "=" | "++" | "--" | "[" => {
                                let save = self.i;
                                let lhs = self.lexpr()?;
                                if self.eat_sym("=") {
                                    let rhs = self.expr()?;
                                    return Ok((Stmt::Assign(lhs, rhs), false));
                                }
                                for (op, bop) in [("++", BinOp::Add), ("--", BinOp::Sub)] {
                                    if self.eat_sym(op) {
                                        let rhs = RExpr::Binary(bop, Box::new(lhs.to_rexpr()), Box::new(RExpr::Const(1)));
                                        return Ok((Stmt::Assign(lhs, rhs), false));
                                    }
                                }
                                self.i = save;
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok((Stmt::Expr(self.expr()?), false))
    }

    fn chan_op(&mut self, chan: String, send: bool) -> Result<Stmt, ParseError> {
        if send {
            let mut args = vec![self.expr()?];
            while self.eat_sym(",") {
                args.push(self.expr()?);
            }
            Ok(Stmt::Send { chan, args })
        } else {
            let mut args = Vec::new();
            loop {
                if !matches!(self.peek(), Tok::Ident(_)) || self.is_kw("eval") {
                    return Err(self.unsupported("receive with constant or eval argument"));
                }
                args.push(self.lexpr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            Ok(Stmt::Receive { chan, args })
        }
    }

    fn call_args(&mut self) -> Result<Vec<RExpr>, ParseError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn lexpr(&mut self) -> Result<LExpr, ParseError> {
        let name = self.ident()?;
        if self.eat_sym("[") {
            let i = self.expr()?;
            self.expect_sym("]")?;
            Ok(LExpr::Index(name, Box::new(i)))
        } else {
            if self.is_sym(".") {
                return Err(self.unsupported("structure field access"));
            }
            Ok(LExpr::Var(name))
        }
    }

    fn binop(&self) -> Option<BinOp> {
        let Tok::Sym(s) = self.peek() else { return None };
        Some(match *s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            "&" => BinOp::BitAnd,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            _ => return None,
        })
    }

    pub fn expr(&mut self) -> Result<RExpr, ParseError> {
        self.expr_prec(1)
    }

    fn expr_prec(&mut self, min: u8) -> Result<RExpr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.bump();
            let rhs = self.expr_prec(p + 1)?;
            lhs = RExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RExpr, ParseError> {
        for (s, op) in [("!", UnOp::Not), ("-", UnOp::Neg), ("~", UnOp::BitNot)] {
            if self.eat_sym(s) {
                let a = self.unary()?;
                if let (UnOp::Neg, RExpr::Const(c)) = (op, &a) {
                    return Ok(RExpr::Const(-c));
                }
                return Ok(RExpr::Unary(op, Box::new(a)));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(RExpr::Const(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                if self.is_sym("->") {
                    return Err(self.unsupported("conditional expression"));
                }
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(RExpr::Const(1))
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(RExpr::Const(0))
            }
            Tok::Ident(k) if k == "run" => Err(self.unsupported("run inside an expression")),
            Tok::Ident(_) => {
                if matches!(self.peek_at(1), Tok::Sym("(")) {
                    return Err(self.unsupported("function call"));
                }
                Ok(self.lexpr()?.to_rexpr())
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}
