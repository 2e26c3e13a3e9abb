use super::DenoteError;
use crate::domain::{CondStep, ConditionalTrace, Guard, TraceSet, Update};

/// Policy for discarding suspension branches. Structurally false guards are
/// always dropped; `feasible` may reject more.
pub type Feasible<'a> = &'a dyn Fn(&Guard) -> bool;

fn unmark(steps: &[CondStep]) -> Vec<CondStep> {
    steps.iter().map(|s| s.with_mark(false)).collect()
}

fn parts(s: &CondStep) -> (&Guard, &Update) {
    match s {
        CondStep::Trans { guard, update, .. } => (guard, update),
        CondStep::Spawn { .. } => unreachable!("spawn has no guard"),
    }
}

fn expand(
    t: &ConditionalTrace,
    lenient: bool,
    feasible: Feasible<'_>,
    out: &mut Vec<ConditionalTrace>,
) -> Result<(), DenoteError> {
    let steps = &t.steps;
    let Some(j2) = steps.iter().position(|s| !s.is_spawn() && s.marked()) else {
        out.push(ConditionalTrace::new(unmark(steps), t.end));
        return Ok(());
    };
    let Some(j1) = steps[..j2].iter().rposition(|s| !s.is_spawn()) else {
        if !lenient {
            return Err(DenoteError::MarkAtHead);
        }
        let mut fixed = steps.clone();
        fixed[j2] = fixed[j2].with_mark(false);
        return expand(&ConditionalTrace::new(fixed, t.end), lenient, feasible, out);
    };
    let k = steps[j2 + 1..].iter().position(|s| !s.is_spawn()).map_or(steps.len(), |p| j2 + 1 + p);
    let (c1, t1) = parts(&steps[j1]);
    let (c2, t2) = parts(&steps[j2]);
    let head = &steps[..j1];
    let rho1 = &steps[j1 + 1..j2];
    let rho2 = &steps[j2 + 1..k];
    let rest = &steps[k..];

    let merged_step = CondStep::Trans {
        guard: Guard::and(vec![c1.clone(), Guard::after(t1.clone(), c2.clone())]).simplify(),
        update: Update::seq(vec![t1.clone(), t2.clone()]),
        marked: false,
    };
    let mut merged = head.to_vec();
    merged.push(merged_step);
    merged.extend(unmark(rho1));
    merged.extend(unmark(rho2));
    merged.extend(rest.iter().cloned());
    expand(&ConditionalTrace::new(merged, t.end), lenient, feasible, out)?;

    let sguard = Guard::and(vec![c1.clone(), Guard::not(Guard::after(t1.clone(), c2.clone()))]).simplify();
    if sguard == Guard::False || !feasible(&sguard) {
        return Ok(());
    }
    let mut prefix = head.to_vec();
    prefix.push(CondStep::Trans { guard: sguard, update: t1.clone(), marked: false });
    prefix.extend(unmark(rho1));
    let mut suffix = vec![steps[j2].with_mark(false)];
    suffix.extend(rho2.iter().cloned());
    suffix.extend(rest.iter().cloned());
    let mut tails = Vec::new();
    expand(&ConditionalTrace::new(suffix, t.end), lenient, feasible, &mut tails)?;
    for tail in tails {
        let mut s = prefix.clone();
        s.extend(tail.steps);
        out.push(ConditionalTrace::new(s, tail.end));
    }
    Ok(())
}

/// Replace marked steps by their merged and suspended alternatives.
pub fn atomics(s: &TraceSet) -> Result<TraceSet, DenoteError> {
    atomics_with(s, false, &|_| true)
}

/// As [`atomics`]; `lenient` unmarks a leading marked step instead of failing,
/// which is the view from a point inside an atomic block.
pub fn atomics_with(s: &TraceSet, lenient: bool, feasible: Feasible<'_>) -> Result<TraceSet, DenoteError> {
    let mut out = Vec::new();
    for t in s.iter() {
        expand(t, lenient, feasible, &mut out)?;
    }
    Ok(TraceSet::new(out))
}
