mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use common::{agree, fixture, lattice, FIXTURES};
use pml_sem::cfg::AtomicMark;
use pml_sem::compare::compare;
use pml_sem::denote::{entry_denotation, process_denotation};
use pml_sem::domain::{
    lub, set_equiv, set_leq, trace_leq, CondStep, ConditionalTrace, Guard, Interpretation, Place, Term, Terminator,
    TraceSet, Universe, Update, DEFAULT_UNIVERSE_CAP,
};
use pml_sem::model::Model;
use pml_sem::oracle::run_bounded;
use pml_sem::state::{BasicType, Loc, SystemState, Value, HANDSHAKE};
use pml_sem::syntax::{BinOp, UnOp};
use pml_sem::system::{interlv, program_fixpoint, sem_prog, Options, Propagation, Termination};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn id() -> Term {
    Term::Var { name: "id".into(), loc: Loc::Formal(1) }
}

fn f_at(index: Term) -> Term {
    Term::Elem { name: "f".into(), loc: Loc::Global(2), len: 2, index: Box::new(index) }
}

fn other() -> Term {
    Term::Binary(BinOp::Sub, Box::new(Term::Const(1)), Box::new(id()))
}

fn set_f(v: i64) -> Update {
    Update::Assign(Place::Elem { name: "f".into(), loc: Loc::Global(2), ty: BasicType::Bit, len: 2, index: id() }, Term::Const(v))
}

fn tr(g: Guard, u: Update) -> CondStep {
    CondStep::trans(g, u)
}

/// The two beginnings of P's loop at depth 4.
fn hand_p() -> TraceSet {
    let free = Guard::Expr(Term::Unary(UnOp::Not, Box::new(f_at(other()))));
    let taken = Guard::Expr(f_at(other()));
    TraceSet::new([
        ConditionalTrace::new(
            vec![tr(free.clone(), set_f(1)), tr(Guard::True, Update::Id), tr(Guard::True, set_f(0))],
            Terminator::Truncated(4),
        ),
        ConditionalTrace::new(
            vec![tr(taken, set_f(1)), tr(free, Update::Id), tr(Guard::True, Update::Id), tr(Guard::True, set_f(0))],
            Terminator::Truncated(4),
        ),
    ])
}

fn hand_init() -> TraceSet {
    let alloc = |n: i64| Update::SpawnAlloc { proctype: "P".into(), actuals: vec![Term::Const(n)], param_types: vec![BasicType::Bit] };
    let payload = Arc::new(hand_p());
    let spawn = || CondStep::Spawn { proctype: "P".into(), payload: payload.clone(), marked: false };
    TraceSet::singleton(ConditionalTrace::new(
        vec![
            tr(Guard::True, Update::Seq(vec![alloc(0), alloc(1), Update::BumpNrPr(2)])),
            spawn(),
            spawn(),
            tr(Guard::True, Update::BumpNrPr(-1)),
        ],
        Terminator::Final,
    ))
}

fn p_universe(m: &Model) -> Universe {
    Universe::for_process(m, "P", DEFAULT_UNIVERSE_CAP).expect("P universe")
}

fn criterion_1() -> Outcome {
    let m = fixture("peterson");
    let cfg = &m.proctype("P").ok_or("no proctype P")?.cfg;
    let named: BTreeSet<&str> = cfg.points.iter().flat_map(|p| p.labels.iter().map(String::as_str)).collect();
    ensure(named == BTreeSet::from(["L0", "L1", "L2", "L3", "L4"]), || format!("labels {named:?}"))?;
    let l = |n: &str| cfg.label(n).expect("label");
    ensure(l("L4") == l("L0"), || "L4 is not collapsed into L0".into())?;
    ensure(cfg.entry == l("L0"), || "entry is not L0".into())?;
    let edges: BTreeSet<(String, String, String, AtomicMark)> = cfg
        .edges
        .iter()
        .map(|e| {
            let st = e.stmt.as_ref().map_or("else".to_string(), |s| s.to_string());
            (cfg.point(e.from).name.clone(), st, cfg.point(e.to).name.clone(), e.atomic)
        })
        .collect();
    let want = BTreeSet::from([
        ("L0".into(), "f[id] = 1".into(), "L1".into(), AtomicMark::Head),
        ("L1".into(), "!f[1 - id]".into(), "L2".into(), AtomicMark::Marked),
        ("L2".into(), "skip".into(), "L3".into(), AtomicMark::Outside),
        ("L3".into(), "f[id] = 0".into(), "L0".into(), AtomicMark::Outside),
    ]);
    ensure(edges == want, || format!("edges {edges:?}"))?;
    ensure(cfg.points.len() == 5, || format!("{} points (four labelled plus exit expected)", cfg.points.len()))?;
    Ok("4 labelled points, L4 = L0, 4 edges, one marked".into())
}

fn criterion_2() -> Outcome {
    let m = fixture("peterson");
    let interp = program_fixpoint(&m, 2, 4, Options::default()).map_err(|e| e.to_string())?;
    let init = interp.get("init").map_err(|e| e.to_string())?;
    let want = hand_init();
    let u = p_universe(&m);
    ensure(init.len() == 1, || format!("{} init traces", init.len()))?;
    ensure(!init.iter().any(ConditionalTrace::has_marks), || "marks survive atomics".into())?;
    ensure(set_equiv(init, &want, &u), || format!("init = {}", init.iter().next().unwrap()))?;
    Ok(format!("init equivalent to the hand trace over {} states", u.len()))
}

fn criterion_3() -> Outcome {
    let m = fixture("peterson");
    let pm = m.proctype("P").ok_or("no proctype P")?;
    let interp = Interpretation::bottom(["P", "init"]);
    let all = process_denotation(&pm.cfg, &pm.env, &m, &interp, 4, &|_| true).map_err(|e| e.to_string())?;
    let at_entry = &all[pm.cfg.entry.0 as usize];
    let entry = entry_denotation(&pm.cfg, &pm.env, &m, &interp, 4, &|_| true).map_err(|e| e.to_string())?;
    ensure(*at_entry == entry, || "entry denotation differs from process_denotation at the entry".into())?;
    let u = p_universe(&m);
    let want = hand_p();
    ensure(entry.len() == 2, || format!("{} traces", entry.len()))?;
    ensure(set_equiv(&entry, &want, &u), || entry.iter().map(|t| format!("\n    {t}")).collect())?;
    Ok("merged and suspension beginnings match".into())
}

fn f_of(s: &SystemState) -> (i64, i64) {
    match s.read(Loc::Global(2)) {
        Value::Array(_, items) => (items[0].as_int().unwrap_or(-1), items[1].as_int().unwrap_or(-1)),
        _ => (-1, -1),
    }
}

fn peterson_semantics(fuel: u32) -> Result<Propagation, String> {
    sem_prog(&fixture("peterson"), &SystemState::new(), 4, 16, fuel, Options::default()).map_err(|e| e.to_string())
}

fn criterion_4() -> Outcome {
    let sem = peterson_semantics(8)?;
    let prefixes: BTreeSet<Vec<(i64, i64)>> = sem
        .sequences
        .iter()
        .filter(|s| s.len() >= 7)
        .map(|s| s.states[..7].iter().map(|x| f_of(x)).collect())
        .collect();
    let families = [
        [(0, 0), (1, 0), (1, 0), (0, 0), (0, 1), (0, 1), (0, 0)],
        [(0, 0), (0, 1), (0, 1), (0, 0), (1, 0), (1, 0), (0, 0)],
        [(0, 0), (1, 0), (1, 0), (0, 0), (1, 0), (1, 0), (0, 0)],
    ];
    for fam in &families {
        ensure(prefixes.contains(fam.as_slice()), || format!("family {fam:?} missing"))?;
    }
    Ok(format!("3 families among {} distinct f-prefixes", prefixes.len()))
}

fn criterion_5() -> Outcome {
    let sem = peterson_semantics(8)?;
    let want = vec![(0, 0), (1, 0), (1, 0), (1, 1)];
    let hit = sem
        .diagnostics
        .iter()
        .find(|d| d.guard == "!f[0]" && d.prefix.iter().map(|s| f_of(s)).collect::<Vec<_>>() == want);
    ensure(hit.is_some(), || {
        sem.diagnostics
            .iter()
            .map(|d| format!("\n    {:?} !! {}", d.prefix.iter().map(|s| f_of(s)).collect::<Vec<_>>(), d.guard))
            .collect()
    })?;
    let runs = run_bounded(&fixture("peterson"), &SystemState::new(), 8);
    let stuck = runs.deadlocks.iter().filter(|c| f_of(&c.state) == (1, 1)).count();
    ensure(stuck >= 1, || format!("{} oracle deadlocks, none with f = 11", runs.deadlocks.len()))?;
    Ok(format!("diagnostic found; {stuck} oracle deadlocks with f = 11"))
}

fn criterion_6() -> Outcome {
    let mut summary = Vec::new();
    for name in FIXTURES {
        let r = compare(&fixture(name), &SystemState::new(), 4, 16, 8, Options::default()).map_err(|e| e.to_string())?;
        ensure(r.matches(), || {
            format!("{name}: {} missing, {} extra, {} premature", r.missing.len(), r.extra.len(), r.premature.len())
        })?;
        summary.push(format!("{name} {}", r.denotational));
    }
    Ok(summary.join(", "))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn criterion_7() -> Outcome {
    let cases = 1000;
    runner(cases)
        .run(&(agree::arb_stmt(), agree::arb_state()), |(stmt, input)| agree::check(&stmt, &input).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} statement/state pairs agree"))
}

fn criterion_8() -> Outcome {
    use lattice::{arb_set, arb_step, arb_trace, arb_weakening, below, universe};
    let u = universe();

    runner(256)
        .run(&(arb_trace(), arb_set()), |(t, s)| {
            prop_assert!(trace_leq(&t, &t, &u) && set_leq(&s, &s, &u));
            prop_assert!(trace_leq(&ConditionalTrace::epsilon(), &t, &u));
            prop_assert!(set_leq(&TraceSet::epsilon(), &s, &u));
            Ok(())
        })
        .map_err(|e| format!("reflexivity/bottom: {}", e))?;

    runner(256)
        .run(&(arb_trace(), arb_weakening(), arb_weakening()), |(c, w1, w2)| {
            let b = below(&c, w1.0, &w1.1);
            let a = below(&b, w2.0, &w2.1);
            prop_assert!(trace_leq(&a, &b, &u) && trace_leq(&b, &c, &u) && trace_leq(&a, &c, &u));
            Ok(())
        })
        .map_err(|e| format!("transitivity: {}", e))?;

    runner(256)
        .run(&(arb_step(), arb_trace()), |(phi, psi)| {
            prop_assume!(!psi.is_epsilon());
            let long = psi.prepend(phi.clone());
            let small = TraceSet::singleton(long.clone());
            let big = TraceSet::new([ConditionalTrace::new(vec![phi], Terminator::Open), long]);
            prop_assert!(set_equiv(&small, &big, &u) && small != big);
            Ok(())
        })
        .map_err(|e| format!("non-antisymmetry: {}", e))?;

    runner(256)
        .run(&(arb_set(), arb_set(), arb_set()), |(a, b, c)| {
            let j = lub([&a, &b]);
            prop_assert_eq!(&j, &a.union(&b));
            prop_assert!(set_leq(&a, &j, &u) && set_leq(&b, &j, &u));
            if set_leq(&a, &c, &u) && set_leq(&b, &c, &u) {
                prop_assert!(set_leq(&j, &c, &u));
            }
            Ok(())
        })
        .map_err(|e| format!("lub: {}", e))?;

    let copy = Update::Assign(Place::Var { name: "x".into(), loc: Loc::Global(2), ty: BasicType::Byte }, lattice::y());
    let positive = Guard::Expr(Term::Binary(BinOp::Gt, Box::new(lattice::x()), Box::new(Term::Const(0))));
    let psi = ConditionalTrace::new(vec![tr(Guard::True, copy.clone())], Terminator::Final);
    let psi2 = ConditionalTrace::new(vec![tr(positive, copy)], Terminator::Final);
    ensure(trace_leq(&psi2, &psi, &u) && !trace_leq(&psi, &psi2, &u), || "psi' <= psi example".into())?;

    runner(48)
        .run(
            &(select(lattice::TP_PROCESSES.to_vec()), 0u32..5, prop::collection::vec(any::<bool>(), 1..16)),
            |((name, proc), depth, mask)| lattice::tp_monotone(&fixture(name), proc, depth, &mask).map_err(TestCaseError::fail),
        )
        .map_err(|e| format!("TP monotonicity: {}", e))?;
    Ok("reflexivity, transitivity, bottom, example, witness, lub, TP monotonicity".into())
}

fn criterion_9() -> Outcome {
    let mut checked = 0usize;
    for name in FIXTURES {
        let m = fixture(name);
        let interp = program_fixpoint(&m, 4, 8, Options::default()).map_err(|e| e.to_string())?;
        for (proc, set) in interp.iter() {
            ensure(!set.iter().any(ConditionalTrace::has_marks), || format!("{name}: marks in {proc}"))?;
        }
        let raw = Interpretation::bottom(lattice::names(&m).iter().map(String::as_str));
        for pm in m.procs.iter().chain([&m.init]) {
            let all = process_denotation(&pm.cfg, &pm.env, &m, &raw, 6, &|_| true).map_err(|e| e.to_string())?;
            ensure(all.iter().all(|s| !s.iter().any(ConditionalTrace::has_marks)), || format!("{name}: marks at a point of {}", pm.name))?;
        }
        let init = interp.apply("init", 0).map_err(|e| e.to_string())?;
        let woven = interlv(&init, 6, false).map_err(|e| e.to_string())?;
        ensure(!woven.iter().any(ConditionalTrace::has_spawns), || format!("{name}: spawn survives interleaving"))?;

        let sem = sem_prog(&m, &SystemState::new(), 4, 16, 8, Options::default()).map_err(|e| e.to_string())?;
        for s in &sem.sequences {
            if s.termination == Termination::Completed {
                let last = s.states.last().ok_or_else(|| format!("{name}: empty completed sequence"))?;
                ensure(last.nr_pr() == Some(0), || format!("{name}: _nr_pr = {:?} at the end of {s}", last.nr_pr()))?;
            }
            ensure(s.states.iter().all(|x| x.read(HANDSHAKE) == Value::Int(-1)), || format!("{name}: handshake set in {s}"))?;
            checked += s.len();
        }
        for d in &sem.diagnostics {
            ensure(d.prefix.iter().all(|x| x.read(HANDSHAKE) == Value::Int(-1)), || format!("{name}: handshake set before {}", d.guard))?;
        }
    }
    Ok(format!("{checked} emitted states checked"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("CFG golden", criterion_1),
        ("init denotation golden", criterion_2),
        ("P loop denotation golden", criterion_3),
        ("propagation families", criterion_4),
        ("deadlock diagnostic", criterion_5),
        ("oracle equivalence", criterion_6),
        ("statement agreement", criterion_7),
        ("lattice properties", criterion_8),
        ("invariant sweep", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({ms} ms)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
