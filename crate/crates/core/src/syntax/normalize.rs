use std::collections::BTreeSet;

use super::ast::*;
use super::NormalizeError;

/// Lowers loops, strips output statements, fills default initializers and
/// folds `active` proctypes into the init process.
pub fn normalize(mut prog: Program) -> Result<Program, NormalizeError> {
    let mut used = BTreeSet::new();
    for p in &prog.proctypes {
        collect_labels(&p.body, &mut used);
    }
    if let Some(i) = &prog.init {
        collect_labels(&i.body, &mut used);
    }
    let mut n = Normalizer { used, counter: 0 };

    let mut runs = Vec::new();
    for p in &prog.proctypes {
        if p.active > 0 && !p.params.is_empty() {
            return Err(NormalizeError::ActiveWithParams(p.name.clone()));
        }
        for _ in 0..p.active {
            runs.push(LabeledStmt::new(Stmt::Run { proctype: p.name.clone(), args: Vec::new() }, p.pos));
        }
    }
    if prog.init.is_none() && runs.is_empty() {
        return Err(NormalizeError::NoInit);
    }
    let mut init = prog.init.take().unwrap_or(InitDecl { body: Vec::new(), pos: Pos::default() });
    if !runs.is_empty() {
        let pos = runs[0].pos;
        init.body.insert(0, LabeledStmt::new(Stmt::Atomic(runs), pos));
    }

    for p in &mut prog.proctypes {
        p.active = 0;
        check_labels(&p.body, &p.name)?;
        p.body = n.seq(std::mem::take(&mut p.body), None, false)?;
    }
    check_labels(&init.body, "init")?;
    init.body = n.seq(init.body, None, false)?;
    prog.init = Some(init);

    for g in &mut prog.globals {
        if let GlobalDecl::Var(d) = g {
            default_init(d);
        }
    }
    Ok(prog)
}

fn default_init(d: &mut VarDecl) {
    if d.init.is_none() {
        d.init = Some(Initializer::Expr(RExpr::Const(0)));
    }
}

fn collect_labels(body: &[LabeledStmt], out: &mut BTreeSet<String>) {
    for s in body {
        out.extend(s.labels.iter().cloned());
        match &s.stmt {
            Stmt::If(sel) | Stmt::Do(sel) => {
                for b in sel.branches.iter().chain(sel.else_branch.iter()) {
                    collect_labels(b, out);
                }
            }
            Stmt::Atomic(b) => collect_labels(b, out),
            _ => {}
        }
    }
}

fn check_labels(body: &[LabeledStmt], owner: &str) -> Result<(), NormalizeError> {
    fn walk(body: &[LabeledStmt], defs: &mut Vec<String>, uses: &mut Vec<(String, Pos)>) {
        for s in body {
            defs.extend(s.labels.iter().cloned());
            match &s.stmt {
                Stmt::Goto(l) => uses.push((l.clone(), s.pos)),
                Stmt::If(sel) | Stmt::Do(sel) => {
                    for b in sel.branches.iter().chain(sel.else_branch.iter()) {
                        walk(b, defs, uses);
                    }
                }
                Stmt::Atomic(b) => walk(b, defs, uses),
                _ => {}
            }
        }
    }
    let (mut defs, mut uses) = (Vec::new(), Vec::new());
    walk(body, &mut defs, &mut uses);
    let mut seen = BTreeSet::new();
    for d in &defs {
        if !seen.insert(d.clone()) {
            return Err(NormalizeError::DuplicateLabel { label: d.clone(), owner: owner.into() });
        }
    }
    for (u, pos) in uses {
        if !seen.contains(&u) {
            return Err(NormalizeError::UndefinedLabel { label: u, owner: owner.into(), line: pos.line });
        }
    }
    Ok(())
}

struct Normalizer {
    used: BTreeSet<String>,
    counter: usize,
}

impl Normalizer {
    fn fresh(&mut self, stem: &str) -> String {
        loop {
            self.counter += 1;
            let l = format!("__{stem}{}", self.counter);
            if self.used.insert(l.clone()) {
                return l;
            }
        }
    }

    fn seq(
        &mut self,
        body: Vec<LabeledStmt>,
        exit: Option<&str>,
        nonempty: bool,
    ) -> Result<Vec<LabeledStmt>, NormalizeError> {
        let mut out = Vec::new();
        let mut last_pos = Pos::default();
        for s in body {
            last_pos = s.pos;
            let LabeledStmt { mut labels, stmt, pos } = s;
            let stmt = match stmt {
                Stmt::Printf { .. } if labels.is_empty() => continue,
                Stmt::Printf { .. } => Stmt::Skip,
                Stmt::Break => match exit {
                    Some(l) => Stmt::Goto(l.to_string()),
                    None => return Err(NormalizeError::BreakOutsideLoop { line: pos.line }),
                },
                Stmt::Decl(mut d) => {
                    default_init(&mut d);
                    Stmt::Decl(d)
                }
                Stmt::Atomic(b) => Stmt::Atomic(self.seq(b, exit, true)?),
                Stmt::If(sel) => Stmt::If(self.selection(sel, exit)?),
                Stmt::Do(sel) => {
                    let head = self.fresh("do");
                    let tail = self.fresh("od");
                    let mut sel = self.selection(sel, Some(&tail))?;
                    for b in sel.branches.iter_mut().chain(sel.else_branch.iter_mut()) {
                        b.push(LabeledStmt::new(Stmt::Goto(head.clone()), pos));
                    }
                    sel.exit_label = Some(tail);
                    labels.push(head);
                    Stmt::If(sel)
                }
                other => other,
            };
            out.push(LabeledStmt { labels, stmt, pos });
        }
        if nonempty && out.is_empty() {
            out.push(LabeledStmt::new(Stmt::Skip, last_pos));
        }
        Ok(out)
    }

    fn selection(&mut self, sel: Selection, exit: Option<&str>) -> Result<Selection, NormalizeError> {
        let branches = sel.branches.into_iter().map(|b| self.seq(b, exit, true)).collect::<Result<_, _>>()?;
        let else_branch = sel.else_branch.map(|b| self.seq(b, exit, false)).transpose()?;
        Ok(Selection { branches, else_branch, exit_label: sel.exit_label })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn norm(src: &str) -> Result<Program, NormalizeError> {
        normalize(parse(src).unwrap())
    }

    fn has_loops(body: &[LabeledStmt]) -> bool {
        body.iter().any(|s| match &s.stmt {
            Stmt::Do(_) | Stmt::Break | Stmt::Printf { .. } => true,
            Stmt::If(sel) => sel.branches.iter().chain(sel.else_branch.iter()).any(|b| has_loops(b)),
            Stmt::Atomic(b) => has_loops(b),
            _ => false,
        })
    }

    #[test]
    fn lowers_do_and_break() {
        let p = norm("init { byte i; do :: i < 3 -> i++ :: else -> break od; printf(\"x\") }").unwrap();
        let body = &p.init.as_ref().unwrap().body;
        assert!(!has_loops(body));
        let Stmt::If(sel) = &body[1].stmt else { panic!() };
        let exit = sel.exit_label.clone().unwrap();
        let head = body[1].labels[0].clone();
        assert_eq!(sel.branches[0].last().unwrap().stmt, Stmt::Goto(head.clone()));
        assert_eq!(sel.else_branch.as_ref().unwrap()[0].stmt, Stmt::Goto(exit));
        assert_eq!(body.len(), 2);
        assert!(matches!(&body[0].stmt, Stmt::Decl(d) if d.init.is_some()));
    }

    #[test]
    fn fresh_labels_avoid_user_labels() {
        let p = norm("init { __do1: skip; do :: break od }").unwrap();
        let body = &p.init.as_ref().unwrap().body;
        assert_ne!(body[1].labels[0], "__do1");
    }

    #[test]
    fn actives_are_prepended_to_init() {
        let p = norm("active [2] proctype A() { skip } init { skip }").unwrap();
        let body = &p.init.as_ref().unwrap().body;
        let Stmt::Atomic(runs) = &body[0].stmt else { panic!() };
        assert_eq!(runs.len(), 2);
        assert_eq!(body[1].stmt, Stmt::Skip);
        assert!(norm("active proctype A(bit x) { skip }").is_err());
    }

    #[test]
    fn labelled_printf_becomes_skip() {
        let p = norm("init { L: printf(\"a\"); goto L }").unwrap();
        let body = &p.init.as_ref().unwrap().body;
        assert_eq!(body[0].labels, vec!["L".to_string()]);
        assert_eq!(body[0].stmt, Stmt::Skip);
    }

    #[test]
    fn static_label_errors() {
        assert!(matches!(norm("init { break }"), Err(NormalizeError::BreakOutsideLoop { .. })));
        assert!(matches!(norm("init { goto X }"), Err(NormalizeError::UndefinedLabel { .. })));
        assert!(matches!(norm("init { L: skip; L: skip }"), Err(NormalizeError::DuplicateLabel { .. })));
        assert!(matches!(norm("proctype P() { skip }"), Err(NormalizeError::NoInit)));
    }
}
