//! Control-flow graphs over program points, one per process body.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Initializer, LExpr, LabeledStmt, Pos, RExpr, Stmt, VarDecl};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgError {
    #[error("{owner}: goto `{label}` forms a cycle without statements")]
    GotoCycle { owner: String, label: String },
    #[error("{owner}: line {line}: selection has only an else branch")]
    ElseOnly { owner: String, line: u32 },
    #[error("{owner}: point {point} has more than one else branch")]
    MultipleElse { owner: String, point: String },
    #[error("{owner}: line {line}: unknown channel `{chan}`")]
    UnknownChannel { owner: String, chan: String, line: u32 },
    #[error("{owner}: line {line}: `{what}` must be normalized away before building the graph")]
    NotNormalized { owner: String, what: &'static str, line: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PointId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BasicStmt {
    Skip,
    Expr(RExpr),
    Assign(LExpr, RExpr),
    Decl(VarDecl),
    Send { chan: String, args: Vec<RExpr>, sync: bool },
    Receive { chan: String, args: Vec<LExpr>, sync: bool },
    Run { proctype: String, args: Vec<RExpr> },
}

impl BasicStmt {
    pub fn is_sync(&self) -> bool {
        matches!(self, BasicStmt::Send { sync: true, .. } | BasicStmt::Receive { sync: true, .. })
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for BasicStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicStmt::Skip => f.write_str("skip"),
            BasicStmt::Expr(e) => write!(f, "{e}"),
            BasicStmt::Assign(l, r) => write!(f, "{l} = {r}"),
            BasicStmt::Decl(d) => {
                write!(f, "{} {}", d.ty, d.name)?;
                if let Some(n) = d.array_len {
                    write!(f, "[{n}]")?;
                }
                match &d.init {
                    Some(Initializer::Expr(e)) => write!(f, " = {e}"),
                    Some(Initializer::List(es)) => write!(f, " = {{{}}}", join(es)),
                    None => Ok(()),
                }
            }
            BasicStmt::Send { chan, args, .. } => write!(f, "{chan}!{}", join(args)),
            BasicStmt::Receive { chan, args, .. } => write!(f, "{chan}?{}", join(args)),
            BasicStmt::Run { proctype, args } => write!(f, "run {proctype}({})", join(args)),
        }
    }
}

/// Position of an edge relative to atomic blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomicMark {
    Outside,
    Head,
    Marked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: usize,
    pub from: PointId,
    pub to: PointId,
    /// `None` is the else edge.
    pub stmt: Option<BasicStmt>,
    pub atomic: AtomicMark,
    pub pos: Pos,
}

impl Edge {
    pub fn is_else(&self) -> bool {
        self.stmt.is_none()
    }

    pub fn marked(&self) -> bool {
        self.atomic == AtomicMark::Marked
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub id: PointId,
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cfg {
    pub name: String,
    pub points: Vec<Point>,
    pub edges: Vec<Edge>,
    pub entry: PointId,
    pub exit: PointId,
}

impl Cfg {
    pub fn out_edges(&self, p: PointId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == p)
    }

    pub fn point(&self, p: PointId) -> &Point {
        &self.points[p.0 as usize]
    }

    pub fn label(&self, l: &str) -> Option<PointId> {
        self.points.iter().find(|p| p.labels.iter().any(|x| x == l)).map(|p| p.id)
    }

    pub fn is_terminal(&self, p: PointId) -> bool {
        self.out_edges(p).next().is_none()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let q = |p: PointId| format!("{:?}", self.point(p).name);
        let _ = writeln!(s, "digraph {:?} {{", self.name);
        let _ = writeln!(s, "  node [shape=circle];");
        for p in &self.points {
            let shape = if p.id == self.exit { ", shape=doublecircle" } else { "" };
            let label = if p.labels.len() > 1 { p.labels.join("/") } else { p.name.clone() };
            let _ = writeln!(s, "  {} [label={:?}{}];", q(p.id), label, shape);
        }
        let _ = writeln!(s, "  __entry [shape=point];");
        let _ = writeln!(s, "  __entry -> {};", q(self.entry));
        for e in &self.edges {
            let label = e.stmt.as_ref().map_or("else".to_string(), |st| st.to_string());
            let mut attrs = format!("label={label:?}");
            if e.is_else() {
                attrs.push_str(", style=dashed");
            }
            match e.atomic {
                AtomicMark::Marked => attrs.push_str(", color=blue"),
                AtomicMark::Head => attrs.push_str(", color=blue, style=bold"),
                AtomicMark::Outside => {}
            }
            let _ = writeln!(s, "  {} -> {} [{}];", q(e.from), q(e.to), attrs);
        }
        s.push_str("}\n");
        s
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: entry {} exit {}", self.name, self.point(self.entry).name, self.point(self.exit).name)?;
        for p in &self.points {
            if p.labels.len() > 1 {
                writeln!(f, "  {}", p.labels.join(" = "))?;
            }
        }
        for e in &self.edges {
            let st = e.stmt.as_ref().map_or("else".to_string(), |s| s.to_string());
            let mark = match e.atomic {
                AtomicMark::Outside => "",
                AtomicMark::Head => " [atomic]",
                AtomicMark::Marked => " [atomic, marked]",
            };
            writeln!(f, "  {} -> {}: {}{}", self.point(e.from).name, self.point(e.to).name, st, mark)?;
        }
        Ok(())
    }
}

struct RawEdge {
    from: u32,
    to: u32,
    stmt: Option<BasicStmt>,
    atomic: AtomicMark,
    pos: Pos,
}

struct Builder<'a> {
    owner: String,
    parent: Vec<u32>,
    names: Vec<Option<String>>,
    labels: BTreeMap<String, u32>,
    edges: Vec<RawEdge>,
    capacity: &'a dyn Fn(&str) -> Option<usize>,
}

/// Atomic context: `None` outside, `Some(next_marked)` inside.
type AtomicState = Option<bool>;

fn mark_of(st: AtomicState, sync: bool) -> AtomicMark {
    match st {
        None => AtomicMark::Outside,
        Some(true) if !sync => AtomicMark::Marked,
        Some(_) => AtomicMark::Head,
    }
}

impl Builder<'_> {
    fn new_point(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.names.push(None);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Merge two points; `keep` supplies the representative unless it is anonymous.
    fn union(&mut self, keep: u32, other: u32) {
        let (a, b) = (self.find(keep), self.find(other));
        if a == b {
            return;
        }
        let (root, child) = if self.names[a as usize].is_none() && self.names[b as usize].is_some() { (b, a) } else { (a, b) };
        self.parent[child as usize] = root;
    }

    fn label_point(&mut self, l: &str) -> u32 {
        if let Some(&p) = self.labels.get(l) {
            return p;
        }
        let p = self.new_point();
        self.names[p as usize] = Some(l.to_string());
        self.labels.insert(l.to_string(), p);
        p
    }

    fn edge(&mut self, from: u32, stmt: Option<BasicStmt>, atomic: AtomicMark, pos: Pos) -> u32 {
        let to = self.new_point();
        let from = self.find(from);
        self.edges.push(RawEdge { from, to, stmt, atomic, pos });
        to
    }

    fn seq(&mut self, body: &[LabeledStmt], mut cur: u32, mut st: AtomicState) -> Result<(u32, AtomicState), CfgError> {
        for s in body {
            for l in &s.labels {
                let lp = self.label_point(l);
                self.union(lp, cur);
                cur = self.find(cur);
            }
            (cur, st) = self.stmt(s, cur, st)?;
        }
        Ok((cur, st))
    }

    fn basic(&mut self, s: &LabeledStmt, stmt: BasicStmt, cur: u32, st: AtomicState) -> (u32, AtomicState) {
        let sync = stmt.is_sync();
        let to = self.edge(cur, Some(stmt), mark_of(st, sync), s.pos);
        (to, st.map(|_| !sync))
    }

    fn chan_sync(&self, chan: &str, line: u32) -> Result<bool, CfgError> {
        (self.capacity)(chan)
            .map(|c| c == 0)
            .ok_or_else(|| CfgError::UnknownChannel { owner: self.owner.clone(), chan: chan.to_string(), line })
    }

    fn stmt(&mut self, s: &LabeledStmt, cur: u32, st: AtomicState) -> Result<(u32, AtomicState), CfgError> {
        let line = s.pos.line;
        let basic = match &s.stmt {
            Stmt::Skip => BasicStmt::Skip,
            Stmt::Expr(e) => BasicStmt::Expr(e.clone()),
            Stmt::Assign(l, r) => BasicStmt::Assign(l.clone(), r.clone()),
            Stmt::Decl(d) => BasicStmt::Decl(d.clone()),
            Stmt::Send { chan, args } => {
                BasicStmt::Send { chan: chan.clone(), args: args.clone(), sync: self.chan_sync(chan, line)? }
            }
            Stmt::Receive { chan, args } => {
                BasicStmt::Receive { chan: chan.clone(), args: args.clone(), sync: self.chan_sync(chan, line)? }
            }
            Stmt::Run { proctype, args } => BasicStmt::Run { proctype: proctype.clone(), args: args.clone() },
            Stmt::Goto(l) => {
                let lp = self.label_point(l);
                if self.find(lp) == self.find(cur) {
                    return Err(CfgError::GotoCycle { owner: self.owner.clone(), label: l.clone() });
                }
                self.union(lp, cur);
                return Ok((self.new_point(), st));
            }
            Stmt::Atomic(body) => {
                return match st {
                    None => {
                        let (end, _) = self.seq(body, cur, Some(false))?;
                        Ok((end, None))
                    }
                    Some(_) => self.seq(body, cur, st),
                };
            }
            Stmt::If(sel) => {
                if sel.branches.is_empty() {
                    return Err(CfgError::ElseOnly { owner: self.owner.clone(), line });
                }
                let start = cur;
                let after = match &sel.exit_label {
                    Some(l) => self.label_point(l),
                    None => self.new_point(),
                };
                let mut outs = Vec::new();
                for b in &sel.branches {
                    let guarded;
                    let b = if matches!(b[0].stmt, Stmt::Goto(_)) {
                        let mut v = vec![LabeledStmt::new(Stmt::Skip, b[0].pos)];
                        v.extend(b.iter().cloned());
                        guarded = v;
                        &guarded
                    } else {
                        b
                    };
                    let (end, st2) = self.seq(b, start, st)?;
                    self.union(after, end);
                    outs.push(st2);
                }
                if let Some(eb) = &sel.else_branch {
                    let e = self.edge(start, None, mark_of(st, false), s.pos);
                    let (end, st2) = self.seq(eb, e, st.map(|_| true))?;
                    self.union(after, end);
                    outs.push(st2);
                }
                let merged = if outs.iter().all(Option::is_none) {
                    None
                } else {
                    Some(outs.iter().all(|o| *o == Some(true)))
                };
                return Ok((self.find(after), merged));
            }
            Stmt::Do(_) => return Err(CfgError::NotNormalized { owner: self.owner.clone(), what: "do", line }),
            Stmt::Break => return Err(CfgError::NotNormalized { owner: self.owner.clone(), what: "break", line }),
            Stmt::Printf { .. } => {
                return Err(CfgError::NotNormalized { owner: self.owner.clone(), what: "printf", line })
            }
        };
        Ok(self.basic(s, basic, cur, st))
    }
}

/// Build the graph of a normalized body. `capacity` resolves channel names.
pub fn build_cfg(
    owner: &str,
    body: &[LabeledStmt],
    capacity: &dyn Fn(&str) -> Option<usize>,
) -> Result<Cfg, CfgError> {
    let mut b = Builder {
        owner: owner.to_string(),
        parent: Vec::new(),
        names: Vec::new(),
        labels: BTreeMap::new(),
        edges: Vec::new(),
        capacity,
    };
    let entry = b.new_point();
    let exit = b.new_point();
    let (end, _) = b.seq(body, entry, None)?;
    b.union(exit, end);

    let raw_edges = std::mem::take(&mut b.edges);
    let mut used: Vec<u32> = vec![entry, exit];
    for e in &raw_edges {
        used.push(e.from);
        used.push(e.to);
    }
    used.extend(b.labels.values().copied());
    let mut order: BTreeMap<u32, u32> = BTreeMap::new();
    for raw in 0..b.parent.len() as u32 {
        let root = b.find(raw);
        order.entry(root).or_insert(raw);
    }
    let mut roots: Vec<u32> = used.iter().map(|&u| b.find(u)).collect();
    roots.sort_by_key(|r| order[r]);
    roots.dedup();
    let index: BTreeMap<u32, PointId> = roots.iter().enumerate().map(|(i, r)| (*r, PointId(i as u32))).collect();

    let label_roots: Vec<(u32, u32, String)> =
        b.labels.clone().into_iter().map(|(l, p)| (b.find(p), p, l)).collect();
    let exit_root = b.find(exit);
    let mut anon = 0;
    let mut points = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        let mut labels: Vec<(u32, String)> =
            label_roots.iter().filter(|(lr, _, _)| lr == r).map(|(_, p, l)| (*p, l.clone())).collect();
        labels.sort();
        let labels: Vec<String> = labels.into_iter().map(|(_, l)| l).collect();
        let name = match &b.names[*r as usize] {
            Some(n) => n.clone(),
            None if *r == exit_root => "@exit".to_string(),
            None => {
                anon += 1;
                format!("@{anon}")
            }
        };
        points.push(Point { id: PointId(i as u32), name, labels });
    }
    let edges: Vec<Edge> = raw_edges
        .into_iter()
        .enumerate()
        .map(|(id, e)| {
            let (from, to) = (b.find(e.from), b.find(e.to));
            Edge { id, from: index[&from], to: index[&to], stmt: e.stmt, atomic: e.atomic, pos: e.pos }
        })
        .collect();
    let cfg = Cfg {
        name: owner.to_string(),
        entry: index[&b.find(entry)],
        exit: index[&b.find(exit)],
        points,
        edges,
    };
    for p in &cfg.points {
        let elses = cfg.out_edges(p.id).filter(|e| e.is_else()).count();
        if elses > 1 {
            return Err(CfgError::MultipleElse { owner: owner.to_string(), point: p.name.clone() });
        }
    }
    Ok(cfg)
}
