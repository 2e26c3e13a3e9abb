//! Text and JSON renderings used by the command line.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::{json, Value as Json};

use crate::compare::CompareReport;
use crate::domain::Interpretation;
use crate::model::Model;
use crate::oracle::RunResult;
use crate::state::{Loc, SystemState};
use crate::system::{Propagation, StateSequence, Termination};

/// Location keys used in JSON state records, mapped to source names.
pub fn legend(model: &Model) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for loc in [crate::state::NR_PR, crate::state::HANDSHAKE] {
        out.insert(loc.to_string(), model.loc_name(loc));
    }
    for g in &model.globals {
        out.insert(g.loc.to_string(), g.name.clone());
    }
    for c in &model.chans {
        out.insert(c.id.to_string(), c.name.clone());
    }
    out
}

pub fn state_text(model: &Model, s: &SystemState) -> String {
    if s.is_bottom() {
        return "⊥".into();
    }
    let mut parts = Vec::new();
    for (l, v) in s.memory() {
        let name = match l {
            Loc::Global(_) => model.loc_name(*l),
            _ => l.to_string(),
        };
        parts.push(format!("{name}={v}"));
    }
    for (c, inst) in s.channels() {
        parts.push(format!("{}={inst}", model.chan(*c).name));
    }
    format!("{{{}}}", parts.join(", "))
}

fn termination(t: Termination) -> &'static str {
    match t {
        Termination::Completed => "completed",
        Termination::Cut => "cut",
    }
}

fn sequence_text(model: &Model, seq: &StateSequence, out: &mut String) {
    let _ = writeln!(out, "sequence ({} states, {})", seq.len(), termination(seq.termination));
    for s in &seq.states {
        let _ = writeln!(out, "  {}", state_text(model, s));
    }
}

pub fn run_text(model: &Model, p: &Propagation) -> String {
    let mut out = String::new();
    for seq in &p.sequences {
        sequence_text(model, seq, &mut out);
    }
    for d in &p.diagnostics {
        let _ = writeln!(out, "discarded after {} states: {}", d.prefix.len(), d.guard);
        if let Some(last) = d.prefix.last() {
            let _ = writeln!(out, "  at {}", state_text(model, last));
        }
    }
    let _ = writeln!(out, "{} sequences, {} discards", p.sequences.len(), p.diagnostics.len());
    out
}

pub fn run_json(model: &Model, p: &Propagation) -> Json {
    json!({
        "command": "run",
        "locations": legend(model),
        "sequences": p.sequences,
        "diagnostics": p.diagnostics,
    })
}

pub fn oracle_text(model: &Model, r: &RunResult) -> String {
    let mut out = String::new();
    for seq in &r.sequences {
        sequence_text(model, seq, &mut out);
    }
    for d in &r.deadlocks {
        let procs: Vec<String> = d.procs.iter().map(|p| format!("{}:{}@{}", p.pid, p.proctype, p.pc.0)).collect();
        let _ = writeln!(out, "deadlock {} [{}]", state_text(model, &d.state), procs.join(" "));
    }
    let _ = writeln!(
        out,
        "{} sequences, {} deadlocks, {} terminations",
        r.sequences.len(),
        r.deadlocks.len(),
        r.terminations.len()
    );
    out
}

pub fn oracle_json(model: &Model, r: &RunResult) -> Json {
    json!({
        "command": "oracle",
        "locations": legend(model),
        "sequences": r.sequences,
        "deadlocks": r.deadlocks,
        "terminations": r.terminations.len(),
    })
}

pub fn compare_text(model: &Model, r: &CompareReport) -> String {
    let mut out = String::new();
    let verdict = if r.matches() { "match" } else { "MISMATCH" };
    let _ = writeln!(
        out,
        "{verdict} at length {}: {} denotational, {} operational, {} oracle deadlocks, {} discards",
        r.max_len, r.denotational, r.operational, r.deadlocks, r.diagnostics
    );
    if !r.premature.is_empty() {
        let _ = writeln!(out, "{} sequences were cut by the per-process depth; raise --depth", r.premature.len());
    }
    for (tag, list) in [("missing", &r.missing), ("extra", &r.extra), ("premature", &r.premature)] {
        for seq in list {
            let _ = write!(out, "{tag}: ");
            sequence_text(model, seq, &mut out);
        }
    }
    out
}

pub fn compare_json(model: &Model, r: &CompareReport) -> Json {
    json!({
        "command": "compare",
        "locations": legend(model),
        "match": r.matches(),
        "max_len": r.max_len,
        "denotational": r.denotational,
        "operational": r.operational,
        "missing": r.missing,
        "extra": r.extra,
        "premature": r.premature,
        "deadlocks": r.deadlocks,
        "diagnostics": r.diagnostics,
    })
}

pub fn traces_text(interp: &Interpretation) -> String {
    let mut out = String::new();
    for (name, set) in interp.iter() {
        let _ = writeln!(out, "{name}: {} traces", set.len());
        for t in set.iter() {
            let _ = writeln!(out, "  {t}");
        }
    }
    out
}

pub fn traces_json(interp: &Interpretation) -> Json {
    let map: BTreeMap<&String, Vec<String>> =
        interp.iter().map(|(n, s)| (n, s.iter().map(ToString::to_string).collect())).collect();
    json!({ "command": "traces", "interpretation": map })
}

pub fn cfg_text(model: &Model, dot: bool) -> String {
    let mut out = String::new();
    for pm in model.procs.iter().chain(std::iter::once(&model.init)) {
        if dot {
            out.push_str(&pm.cfg.to_dot());
        } else {
            let _ = writeln!(out, "{}", pm.cfg);
        }
    }
    out
}

pub fn cfg_json(model: &Model) -> Json {
    let cfgs: Vec<_> = model.procs.iter().chain(std::iter::once(&model.init)).map(|p| &p.cfg).collect();
    json!({ "command": "cfg", "cfgs": cfgs })
}

pub fn parse_json(model: &Model) -> Json {
    json!({ "command": "parse", "program": model.program })
}

pub fn parse_text(model: &Model) -> String {
    let mut out = String::new();
    for g in &model.globals {
        let _ = writeln!(out, "global {} {}: {} = {}", g.loc, g.name, vartype(g.ty), g.init);
    }
    for c in &model.chans {
        let fields: Vec<&str> = c.fields.iter().map(|t| t.keyword()).collect();
        let _ = writeln!(out, "chan {} {}: [{}] of {{ {} }}", c.id, c.name, c.capacity, fields.join(", "));
    }
    for pm in model.procs.iter().chain(std::iter::once(&model.init)) {
        let frame: Vec<String> = pm.frame.iter().map(|(n, t)| format!("{n}: {}", vartype(*t))).collect();
        let _ = writeln!(out, "proctype {} [{}] {} points, {} edges", pm.name, frame.join(", "), pm.cfg.points.len(), pm.cfg.edges.len());
    }
    out
}

fn vartype(t: crate::state::VarType) -> String {
    match t {
        crate::state::VarType::Scalar(b) => b.keyword().to_string(),
        crate::state::VarType::Array(b, n) => format!("{}[{n}]", b.keyword()),
    }
}
