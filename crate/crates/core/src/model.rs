//! Static layout of a normalized program: channel table, global and frame
//! slots, environments and control-flow graphs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cfg::{build_cfg, Cfg, CfgError};
use crate::state::{
    BasicType, Binding, ChanId, ChannelInstance, Env, Loc, SystemState, Value, VarType, FIRST_USER_GLOBAL, HANDSHAKE,
    NR_PR, PID_SLOT,
};
use crate::syntax::{GlobalDecl, Initializer, LabeledStmt, Param, Program, RExpr, Stmt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("`{0}` is a reserved name")]
    Reserved(String),
    #[error("run of unknown proctype `{0}`")]
    UnknownProctype(String),
    #[error("run {proctype}: expected {expected} arguments, found {found}")]
    Arity { proctype: String, expected: usize, found: usize },
    #[error("initializer of global `{0}` is not a constant expression")]
    NonConstantInit(String),
    #[error("initializer of `{name}` has {found} items for {expected} elements")]
    InitLength { name: String, expected: usize, found: usize },
    #[error(transparent)]
    Cfg(#[from] CfgError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChanInfo {
    pub id: ChanId,
    pub name: String,
    pub capacity: usize,
    pub fields: Vec<BasicType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalVar {
    pub name: String,
    pub loc: Loc,
    pub ty: VarType,
    pub init: Value,
}

#[derive(Clone, Debug)]
pub struct ProcModel {
    pub name: String,
    pub params: Vec<Param>,
    /// Frame layout by slot: `_pid`, parameters, then locals.
    pub frame: Vec<(String, VarType)>,
    /// Environment over formal slots.
    pub env: Env,
    pub cfg: Cfg,
}

impl ProcModel {
    pub fn env_for(&self, pid: u32) -> Env {
        self.env.rename(pid)
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub program: Program,
    pub globals: Vec<GlobalVar>,
    pub chans: Vec<ChanInfo>,
    pub root: Env,
    pub procs: Vec<ProcModel>,
    pub init: ProcModel,
}

const RESERVED: &[&str] = &["_pid", "_nr_pr", "handshake", "init"];

fn const_eval(e: &RExpr, env: &Env) -> Option<i64> {
    match e {
        RExpr::Const(c) => Some(*c),
        RExpr::Var(n) => match env.lookup(n).ok()? {
            Binding::Const(c) => Some(*c),
            _ => None,
        },
        RExpr::Index(..) => None,
        RExpr::Unary(op, a) => Some(op.apply(const_eval(a, env)?)),
        RExpr::Binary(op, a, b) => op.apply(const_eval(a, env)?, const_eval(b, env)?),
    }
}

fn collect_decls(body: &[LabeledStmt], out: &mut Vec<(String, VarType)>) {
    for s in body {
        match &s.stmt {
            Stmt::Decl(d) => {
                let ty = match d.array_len {
                    Some(n) => VarType::Array(d.ty, n),
                    None => VarType::Scalar(d.ty),
                };
                out.push((d.name.clone(), ty));
            }
            Stmt::If(sel) | Stmt::Do(sel) => {
                for b in sel.branches.iter().chain(sel.else_branch.iter()) {
                    collect_decls(b, out);
                }
            }
            Stmt::Atomic(b) => collect_decls(b, out),
            _ => {}
        }
    }
}

fn collect_runs(body: &[LabeledStmt], out: &mut Vec<(String, usize)>) {
    for s in body {
        match &s.stmt {
            Stmt::Run { proctype, args } => out.push((proctype.clone(), args.len())),
            Stmt::If(sel) | Stmt::Do(sel) => {
                for b in sel.branches.iter().chain(sel.else_branch.iter()) {
                    collect_runs(b, out);
                }
            }
            Stmt::Atomic(b) => collect_runs(b, out),
            _ => {}
        }
    }
}

impl Model {
    pub fn from_source(src: &str) -> Result<Model, crate::Error> {
        Ok(Model::build(crate::syntax::load(src)?)?)
    }

    pub fn build(program: Program) -> Result<Model, ModelError> {
        let mut root = Env::new();
        root.bind("_nr_pr", Binding::Var { loc: NR_PR, ty: VarType::Scalar(BasicType::Int), writable: false });
        root.bind("handshake", Binding::Var { loc: HANDSHAKE, ty: VarType::Scalar(BasicType::Int), writable: false });
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut claim = |n: &str| -> Result<(), ModelError> {
            if RESERVED.contains(&n) {
                return Err(ModelError::Reserved(n.to_string()));
            }
            if !seen.insert(n.to_string()) {
                return Err(ModelError::Duplicate(n.to_string()));
            }
            Ok(())
        };
        for (i, m) in program.mtypes.iter().enumerate() {
            claim(m)?;
            root.bind(m.clone(), Binding::Const(i as i64));
        }
        let mut globals = Vec::new();
        let mut chans = Vec::new();
        let mut next = FIRST_USER_GLOBAL;
        for g in &program.globals {
            match g {
                GlobalDecl::Chan(c) => {
                    claim(&c.name)?;
                    let id = ChanId(chans.len() as u32);
                    root.bind(c.name.clone(), Binding::Chan(id));
                    chans.push(ChanInfo { id, name: c.name.clone(), capacity: c.capacity, fields: c.fields.clone() });
                }
                GlobalDecl::Var(d) => {
                    claim(&d.name)?;
                    let ty = match d.array_len {
                        Some(n) => VarType::Array(d.ty, n),
                        None => VarType::Scalar(d.ty),
                    };
                    let ev = |e: &RExpr| const_eval(e, &root).ok_or_else(|| ModelError::NonConstantInit(d.name.clone()));
                    let init = match (&d.init, ty) {
                        (None, t) => t.default_value(),
                        (Some(Initializer::Expr(e)), VarType::Scalar(t)) => t.coerce(ev(e)?),
                        (Some(Initializer::Expr(e)), VarType::Array(t, n)) => Value::Array(t, vec![t.coerce(ev(e)?); n]),
                        (Some(Initializer::List(es)), VarType::Array(t, n)) => {
                            if es.len() != n {
                                return Err(ModelError::InitLength { name: d.name.clone(), expected: n, found: es.len() });
                            }
                            Value::Array(t, es.iter().map(|e| ev(e).map(|v| t.coerce(v))).collect::<Result<_, _>>()?)
                        }
                        (Some(Initializer::List(es)), VarType::Scalar(_)) => {
                            return Err(ModelError::InitLength { name: d.name.clone(), expected: 1, found: es.len() })
                        }
                    };
                    let loc = Loc::Global(next);
                    next += 1;
                    root.bind(d.name.clone(), Binding::Var { loc, ty, writable: true });
                    globals.push(GlobalVar { name: d.name.clone(), loc, ty, init });
                }
            }
        }
        for p in &program.proctypes {
            claim(&p.name)?;
        }

        let capacity = |c: &str| chans.iter().find(|i| i.name == c).map(|i| i.capacity);
        let proc_model = |name: &str, params: &[Param], body: &[LabeledStmt]| -> Result<ProcModel, ModelError> {
            let mut frame = vec![("_pid".to_string(), VarType::Scalar(BasicType::Int))];
            frame.extend(params.iter().map(|p| (p.name.clone(), VarType::Scalar(p.ty))));
            collect_decls(body, &mut frame);
            let mut env = root.clone();
            let mut local = BTreeSet::new();
            for (slot, (n, ty)) in frame.iter().enumerate() {
                if slot > 0 && RESERVED.contains(&n.as_str()) {
                    return Err(ModelError::Reserved(n.clone()));
                }
                if !local.insert(n.clone()) {
                    return Err(ModelError::Duplicate(format!("{name}.{n}")));
                }
                let writable = slot as u32 != PID_SLOT;
                env.bind(n.clone(), Binding::Var { loc: Loc::Formal(slot as u32), ty: *ty, writable });
            }
            let cfg = build_cfg(name, body, &capacity)?;
            Ok(ProcModel { name: name.to_string(), params: params.to_vec(), frame, env, cfg })
        };
        let mut procs = Vec::new();
        for p in &program.proctypes {
            procs.push(proc_model(&p.name, &p.params, &p.body)?);
        }
        let init_body = program.init.as_ref().map(|i| i.body.as_slice()).unwrap_or(&[]);
        let init = proc_model("init", &[], init_body)?;

        let mut runs = Vec::new();
        for p in &program.proctypes {
            collect_runs(&p.body, &mut runs);
        }
        collect_runs(init_body, &mut runs);
        for (name, n) in runs {
            let pm = procs.iter().find(|p| p.name == name).ok_or(ModelError::UnknownProctype(name.clone()))?;
            if pm.params.len() != n {
                return Err(ModelError::Arity { proctype: name, expected: pm.params.len(), found: n });
            }
        }
        Ok(Model { program, globals, chans, root, procs, init })
    }

    pub fn proctype(&self, name: &str) -> Option<&ProcModel> {
        self.procs.iter().find(|p| p.name == name)
    }

    pub fn chan(&self, id: ChanId) -> &ChanInfo {
        &self.chans[id.0 as usize]
    }

    pub fn global_loc(&self, name: &str) -> Option<Loc> {
        self.globals.iter().find(|g| g.name == name).map(|g| g.loc)
    }

    /// Initial state over `sigma0`: one live process (init, pid 0), initialized
    /// globals and empty channels.
    pub fn initial_state_from(&self, sigma0: &SystemState) -> SystemState {
        let mut s = sigma0.clone();
        s.write(NR_PR, Value::Int(1));
        s.write(HANDSHAKE, Value::Int(-1));
        for g in &self.globals {
            s.write(g.loc, g.init.clone());
        }
        for c in &self.chans {
            s.set_channel(c.id, ChannelInstance::new(c.capacity, c.fields.clone()));
        }
        s.write(Loc::Local { pid: 0, slot: PID_SLOT }, Value::Int(0));
        s
    }

    pub fn initial_state(&self) -> SystemState {
        self.initial_state_from(&SystemState::new())
    }

    /// Human-readable name of a location, for diagnostics.
    pub fn loc_name(&self, loc: Loc) -> String {
        match loc {
            NR_PR => "_nr_pr".into(),
            HANDSHAKE => "handshake".into(),
            Loc::Global(_) => self.globals.iter().find(|g| g.loc == loc).map_or(loc.to_string(), |g| g.name.clone()),
            _ => loc.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: &str = "bit f[2] = {0,0};
proctype P(bit id){
  L0: if :: atomic{ f[id] = 1; L1: !f[1-id] }; L2: skip; L3: f[id] = 0; L4: goto L0 fi
}
init{ L5: atomic{ run P(0); L6: run P(1) } }";

    #[test]
    fn layout_of_mutex_example() {
        let m = Model::from_source(FIG).unwrap();
        assert_eq!(m.global_loc("f"), Some(Loc::Global(2)));
        let p = m.proctype("P").unwrap();
        assert_eq!(p.frame.len(), 2);
        assert_eq!(
            p.env.lookup("id").unwrap(),
            &Binding::Var { loc: Loc::Formal(1), ty: VarType::Scalar(BasicType::Bit), writable: true }
        );
        let s = m.initial_state();
        assert_eq!(s.nr_pr(), Some(1));
        assert_eq!(s.read(Loc::Global(2)), Value::Array(BasicType::Bit, vec![Value::Bit(0); 2]));
        assert_eq!(s.fresh_pid(), 1);
    }

    #[test]
    fn static_checks() {
        assert!(matches!(Model::from_source("init { run Q() }"), Err(crate::Error::Model(ModelError::UnknownProctype(_)))));
        assert!(matches!(
            Model::from_source("proctype P(bit a) { skip } init { run P() }"),
            Err(crate::Error::Model(ModelError::Arity { .. }))
        ));
        assert!(matches!(Model::from_source("bit x; byte x; init { skip }"), Err(crate::Error::Model(ModelError::Duplicate(_)))));
        assert!(matches!(Model::from_source("byte y; byte x = y; init { skip }"), Err(crate::Error::Model(ModelError::NonConstantInit(_)))));
    }

    #[test]
    fn mtype_constants_and_channels() {
        let m = Model::from_source("mtype = { a, b }; mtype cur = b; chan c = [2] of { mtype }; init { skip }").unwrap();
        assert_eq!(m.root.lookup("b").unwrap(), &Binding::Const(1));
        let s = m.initial_state();
        assert_eq!(s.read(m.global_loc("cur").unwrap()), Value::Mtype(1));
        assert_eq!(s.channel(ChanId(0)).unwrap().capacity, 2);
    }
}
