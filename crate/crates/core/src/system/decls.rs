use super::Options;
use crate::denote::{entry_denotation, DenoteError};
use crate::domain::{CondStep, ConditionalTrace, Guard, Interpretation, Terminator, TraceSet, Universe, Update, DEFAULT_UNIVERSE_CAP};
use crate::model::{Model, ProcModel};

/// The final step of every process: decrement `_nr_pr`, then finish.
pub fn end_trace() -> ConditionalTrace {
    ConditionalTrace::new(vec![CondStep::trans(Guard::True, Update::BumpNrPr(-1))], Terminator::Final)
}

fn universe(model: &Model, name: &str) -> Universe {
    Universe::for_process(model, name, DEFAULT_UNIVERSE_CAP).unwrap_or_else(|e| {
        log::warn!("{name}: {e}; keeping every suspension branch");
        Universe::structural()
    })
}

fn proc_entry(model: &Model, pm: &ProcModel, interp: &Interpretation, depth: u32, opts: Options) -> Result<TraceSet, DenoteError> {
    let s = if opts.prune_unsat {
        let u = universe(model, &pm.name);
        let feasible = |g: &Guard| u.is_structural() || u.states().iter().any(|s| g.eval(s));
        entry_denotation(&pm.cfg, &pm.env, model, interp, depth, &feasible)?
    } else {
        entry_denotation(&pm.cfg, &pm.env, model, interp, depth, &|_| true)?
    };
    let end = end_trace();
    Ok(s.map(|t| t.concat(&end)))
}

/// One application of the declaration semantics to `interp`.
pub fn denote_declarations(model: &Model, interp: &Interpretation, depth: u32, opts: Options) -> Result<Interpretation, DenoteError> {
    let mut next = interp.clone();
    for pm in model.procs.iter().chain(std::iter::once(&model.init)) {
        next.insert(&pm.name, proc_entry(model, pm, interp, depth, opts)?);
    }
    Ok(next)
}

fn names(model: &Model) -> Vec<&str> {
    model.procs.iter().map(|p| p.name.as_str()).chain(std::iter::once("init")).collect()
}

/// `k` iterations of [`denote_declarations`] from the bottom interpretation.
pub fn program_fixpoint(model: &Model, k: u32, depth: u32, opts: Options) -> Result<Interpretation, DenoteError> {
    let mut interp = Interpretation::bottom(names(model));
    for _ in 0..k {
        interp = denote_declarations(model, &interp, depth, opts)?;
    }
    Ok(interp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denote::process_denotation;
    use crate::domain::set_leq;

    const FIG: &str = "bit f[2] = {0,0};
proctype P(bit id){
  L0: if :: atomic{ f[id] = 1; L1: !f[1-id] }; L2: skip; L3: f[id] = 0; L4: goto L0 fi
}
init{ L5: atomic{ run P(0); L6: run P(1) } }";

    #[test]
    fn zero_iterations_is_bottom() {
        let m = Model::from_source(FIG).unwrap();
        let i = program_fixpoint(&m, 0, 4, Options::default()).unwrap();
        assert_eq!(**i.get("init").unwrap(), TraceSet::epsilon());
    }

    #[test]
    fn only_init() {
        let m = Model::from_source("init { skip }").unwrap();
        let i = program_fixpoint(&m, 1, 4, Options::default()).unwrap();
        assert_eq!(i.names().collect::<Vec<_>>(), vec!["init"]);
        let s = i.get("init").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.iter().next().unwrap().to_string(), "<true, id> . <true, _nr_pr -= 1> . END");
    }

    #[test]
    fn final_traces_end_with_decrement() {
        let m = Model::from_source(FIG).unwrap();
        let i = program_fixpoint(&m, 2, 6, Options::default()).unwrap();
        for (_, s) in i.iter() {
            for t in s.iter().filter(|t| t.end == Terminator::Final) {
                assert_eq!(t.steps.last(), end_trace().steps.first());
            }
        }
    }

    #[test]
    fn second_iteration_embeds_process_behavior() {
        let m = Model::from_source(FIG).unwrap();
        let i = program_fixpoint(&m, 2, 6, Options::default()).unwrap();
        let p = m.proctype("P").unwrap();
        let direct = process_denotation(&p.cfg, &p.env, &m, &i, 6, &|_| true).unwrap();
        let expected = direct[p.cfg.entry.0 as usize].map(|t| t.concat(&end_trace()));
        let init = i.get("init").unwrap();
        let payloads: Vec<_> = init
            .iter()
            .flat_map(|t| t.steps.iter())
            .filter_map(|s| match s {
                CondStep::Spawn { payload, .. } => Some(payload.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(payloads.len(), 2);
        for pl in payloads {
            assert_ne!(*pl, TraceSet::epsilon());
            assert_eq!(*pl, expected);
        }
    }

    #[test]
    fn iterates_increase_with_k() {
        let m = Model::from_source(FIG).unwrap();
        let u = Universe::for_process(&m, "init", DEFAULT_UNIVERSE_CAP).unwrap();
        let a = program_fixpoint(&m, 1, 5, Options::default()).unwrap();
        let b = program_fixpoint(&m, 2, 5, Options::default()).unwrap();
        assert!(set_leq(a.get("init").unwrap(), b.get("init").unwrap(), &u));
    }
}
