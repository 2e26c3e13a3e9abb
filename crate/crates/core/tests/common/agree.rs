//! Statement-level agreement between `denote_stmt` and the oracle.

use proptest::prelude::*;
use proptest::sample::select;

use pml_sem::cfg::Edge;
use pml_sem::denote::denote_stmt;
use pml_sem::domain::{CondStep, Interpretation};
use pml_sem::model::Model;
use pml_sem::oracle::{Config, Oracle, ProcState};
use pml_sem::state::{BasicType, Binding, Env, SystemState, Value, VarType, NR_PR};

const PID: u32 = 1;

const BINOPS: &[&str] = &["+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||", "&", "|", "^", "<<", ">>"];
const SCALARS: &[&str] = &["x", "b", "t", "l", "m", "p", "_pid"];
const TARGETS: &[&str] = &["x", "b", "t", "l", "m"];

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0i64..4).prop_map(|c| c.to_string()),
        select(vec!["255", "256", "7"]).prop_map(String::from),
        select(SCALARS.to_vec()).prop_map(String::from),
        (0i64..3).prop_map(|i| format!("a[{i}]")),
    ]
}

pub fn arb_expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (select(BINOPS.to_vec()), inner.clone(), inner.clone()).prop_map(|(op, a, b)| format!("({a} {op} {b})")),
            (select(vec!["!", "-", "~"]), inner.clone()).prop_map(|(op, a)| format!("{op}({a})")),
            inner.prop_map(|i| format!("a[{i}]")),
        ]
    })
}

fn arb_target() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => select(TARGETS.to_vec()).prop_map(String::from),
        1 => arb_expr().prop_map(|i| format!("a[{i}]")),
    ]
}

pub fn arb_stmt() -> impl Strategy<Value = String> {
    prop_oneof![
        1 => Just("skip".to_string()),
        3 => arb_expr(),
        4 => (arb_target(), arb_expr()).prop_map(|(l, e)| format!("{l} = {e}")),
        1 => (select(vec!["byte", "bit", "bool"]), arb_expr()).prop_map(|(t, e)| format!("{t} k = {e}")),
        1 => arb_expr().prop_map(|e| format!("byte k[2] = {e}")),
        2 => (arb_expr(), arb_expr()).prop_map(|(a, b)| format!("q ! {a}, {b}")),
        2 => (arb_target(), select(vec!["b", "m", "t"])).prop_map(|(a, b)| format!("q ? {a}, {b}")),
        1 => arb_expr().prop_map(|e| format!("run Q({e})")),
    ]
}

/// Values for every variable visible to the statement.
#[derive(Clone, Debug)]
pub struct StateInput {
    pub x: u8,
    pub b: u8,
    pub t: u8,
    pub a: [u8; 2],
    pub p: u8,
    pub l: u8,
    pub m: u8,
    pub queue: Vec<(u8, u8)>,
    pub nr_pr: i32,
}

fn byte() -> impl Strategy<Value = u8> {
    prop_oneof![0u8..4, Just(255u8), any::<u8>()]
}

pub fn arb_state() -> impl Strategy<Value = StateInput> {
    (
        (byte(), 0u8..2, 0u8..2, [byte(), byte()]),
        (byte(), byte(), 0u8..2),
        prop::collection::vec((byte(), 0u8..2), 0..=2),
        1i32..4,
    )
        .prop_map(|((x, b, t, a), (p, l, m), queue, nr_pr)| StateInput { x, b, t, a, p, l, m, queue, nr_pr })
}

pub fn program(stmt: &str) -> String {
    format!(
        "byte x; bit b; bool t; byte a[2];
chan q = [2] of {{ byte, bit }};
proctype Q(byte v) {{ skip }}
proctype P(byte p) {{
  byte l; bit m;
  {stmt}
}}
init {{ skip }}"
    )
}

fn write_var(env: &Env, s: &mut SystemState, name: &str, v: i64) {
    let Ok(Binding::Var { loc, ty, .. }) = env.lookup(name) else { panic!("no variable {name}") };
    s.write(*loc, ty.elem().coerce(v));
}

pub fn build_state(model: &Model, env: &Env, input: &StateInput) -> SystemState {
    let mut s = model.initial_state();
    s.write(NR_PR, Value::Int(input.nr_pr));
    for (n, v) in [("x", input.x), ("b", input.b), ("t", input.t), ("p", input.p), ("l", input.l), ("m", input.m)] {
        write_var(env, &mut s, n, v as i64);
    }
    write_var(env, &mut s, "_pid", PID as i64);
    let Ok(Binding::Var { loc, .. }) = env.lookup("a") else { panic!("no array") };
    s.write(*loc, Value::Array(BasicType::Byte, input.a.iter().map(|v| Value::Byte(*v)).collect()));
    let Ok(Binding::Chan(id)) = env.lookup("q") else { panic!("no channel") };
    let mut ch = s.channel(*id).expect("channel instance").clone();
    for (v, w) in &input.queue {
        ch = ch.push(*id, ch.coerce(&[*v as i64, *w as i64])).expect("room in channel");
    }
    s.set_channel(*id, ch);
    s
}

/// The edge of the statement under test: the third edge along P's body.
pub fn statement_edge(model: &Model) -> &Edge {
    let cfg = &model.proctype("P").expect("P").cfg;
    let mut at = cfg.entry;
    for _ in 0..2 {
        at = cfg.out_edges(at).next().expect("declaration edge").to;
    }
    cfg.out_edges(at).next().expect("statement edge")
}

/// Compares enabledness and effect of `stmt` in the state built from `input`.
pub fn check(stmt: &str, input: &StateInput) -> Result<(), String> {
    let model = Model::from_source(&program(stmt)).map_err(|e| format!("{stmt}: {e}"))?;
    let pm = model.proctype("P").expect("P");
    let env = pm.env_for(PID);
    let edge = statement_edge(&model);
    let st = edge.stmt.as_ref().expect("basic statement");
    let sigma = build_state(&model, &env, input);

    let interp = Interpretation::bottom(["P", "Q", "init"]);
    let trace = denote_stmt(st, &env, &model, &interp, false).map_err(|e| format!("{stmt}: {e}"))?;
    let CondStep::Trans { guard, update, .. } = &trace.steps[0] else {
        return Err(format!("{stmt}: denotation starts with a spawn"));
    };

    let oracle = Oracle::new(&model);
    let config = Config {
        state: sigma.clone(),
        procs: vec![ProcState { pid: PID, proctype: "P".into(), pc: edge.from }],
        exclusive: None,
    };
    let enabled_d = guard.eval(&sigma);
    let enabled_o = oracle.executable(&config, PID, edge);
    if enabled_d != enabled_o {
        return Err(format!("{stmt}: guard {guard} is {enabled_d}, oracle says {enabled_o} in {sigma}"));
    }
    if enabled_d {
        let after_d = update.apply(&sigma);
        let after_o = oracle.execute_basic(&config, PID, st).state;
        if after_d != after_o {
            return Err(format!("{stmt}: from {sigma}\n  denotation {after_d}\n  oracle     {after_o}"));
        }
    }
    Ok(())
}

/// Quick sanity on the frame layout used by [`build_state`].
pub fn locals_are_bytes_and_bits(model: &Model) -> bool {
    let env = model.proctype("P").expect("P").env_for(PID);
    matches!(env.lookup("l"), Ok(Binding::Var { ty: VarType::Scalar(BasicType::Byte), .. }))
        && matches!(env.lookup("m"), Ok(Binding::Var { ty: VarType::Scalar(BasicType::Bit), .. }))
}
