//! Invariant monitors for the edge-flipping program, evaluated by replaying
//! a trace's scheduling through the engine.

use std::collections::{BTreeMap, BTreeSet};

use super::{Verdict, Witness};
use crate::algorithms::{special_neighborhood, SaveOneMoreState};
use crate::color::NodeId;
use crate::engine::{step, Algorithm, Configuration, EngineError, Graph, Inputs, NodeState, Trace};

fn view<'a, S>(state: &'a NodeState<S>, extract: &impl Fn(&'a S) -> Option<&'a SaveOneMoreState>) -> Option<&'a SaveOneMoreState> {
    state.running().and_then(extract)
}

/// Replays `trace` and calls `visit(step, before, after)` around every step.
fn replay<A: Algorithm>(
    algo: &A,
    trace: &Trace<A::State>,
    mut visit: impl FnMut(u64, &Configuration<A::State>, &Configuration<A::State>, &Graph) -> Option<Witness>,
) -> Result<Option<Witness>, EngineError> {
    let g = trace.graph();
    let inputs: Inputs = trace.header.inputs.clone();
    let mut cfg = Configuration::initial(algo, g, &inputs);
    if let Some(w) = visit(0, &cfg, &cfg, g) {
        return Ok(Some(w));
    }
    for rec in &trace.steps {
        let before = cfg.clone();
        step(&mut cfg, &rec.scheduled.iter().copied().collect(), algo, g)?;
        if let Some(w) = visit(rec.step, &before, &cfg, g) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// x-values of every node, read from any state the replay exposes.
fn local_extremum(g: &Graph, xs: &BTreeMap<NodeId, u64>, v: NodeId) -> Result<Option<bool>, String> {
    let xv = *xs.get(&v).ok_or_else(|| format!("x of node {v} unknown"))?;
    let mut above = 0;
    let mut below = 0;
    for u in g.neighbors(v) {
        let xu = *xs.get(&u).ok_or_else(|| format!("x of node {u} unknown"))?;
        if xu > xv {
            above += 1;
        } else {
            below += 1;
        }
    }
    Ok(if above == 0 {
        Some(true)
    } else if below == 0 {
        Some(false)
    } else {
        None
    })
}

/// Whenever `u` enters `v.f`, both endpoints have degree `delta` and are
/// local extrema of `x`, one a maximum and the other a minimum.
pub fn check_flip_precondition<A: Algorithm>(
    algo: &A,
    trace: &Trace<A::State>,
    delta: u64,
    extract: impl Fn(&A::State) -> Option<&SaveOneMoreState>,
) -> Result<Verdict, EngineError> {
    let mut xs: BTreeMap<NodeId, u64> = BTreeMap::new();
    let witness = replay(algo, trace, |step_no, before, after, g| {
        for r in after.registers().iter() {
            for st in [&r.old, &r.new] {
                if let Some(s) = view(st, &extract) {
                    xs.insert(s.z, s.x);
                }
            }
        }
        for (i, (b, a)) in before.registers().iter().zip(after.registers()).enumerate() {
            let (Some(old_f), Some(new_s)) = (view(&b.new, &extract).map(|s| &s.f), view(&a.new, &extract)) else {
                continue;
            };
            let v = g.id(i);
            for &u in new_s.f.difference(old_f) {
                let fail = |reason: String| Some(Witness::Flip { step: step_no, node: v, partner: u, reason });
                if g.degree(v) as u64 != delta || g.degree(u) as u64 != delta {
                    return fail(format!("degrees {} and {}, expected {delta}", g.degree(v), g.degree(u)));
                }
                match (local_extremum(g, &xs, v), local_extremum(g, &xs, u)) {
                    (Ok(Some(ev)), Ok(Some(eu))) if ev != eu => {}
                    (Err(e), _) | (_, Err(e)) => return fail(e),
                    _ => return fail("endpoints are not a local maximum and a local minimum".into()),
                }
            }
        }
        None
    })?;
    Ok(match witness {
        Some(w) => Verdict::fail("flip-precondition", w),
        None => Verdict::pass("flip-precondition"),
    })
}

/// Once the published states of `v` and its neighbors form a special
/// neighborhood, they keep doing so at every later step boundary.
pub fn check_special_absorbing<A: Algorithm>(
    algo: &A,
    trace: &Trace<A::State>,
    delta: u64,
    extract: impl Fn(&A::State) -> Option<&SaveOneMoreState>,
) -> Result<Verdict, EngineError> {
    let mut special_since: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut seen_special = BTreeSet::new();
    let witness = replay(algo, trace, |step_no, _, after, g| {
        let regs = after.registers();
        for i in 0..g.len() {
            let v = g.id(i);
            let now = view(&regs[i].old, &extract).is_some_and(|s| {
                let snaps: Vec<Option<&SaveOneMoreState>> =
                    g.neighbor_indices(i).iter().map(|&u| view(&regs[u].old, &extract)).collect();
                let mut padded = snaps;
                padded.resize(delta.max(g.degree(v) as u64) as usize, None);
                special_neighborhood(s, &padded, delta)
            });
            if now {
                special_since.entry(v).or_insert(step_no);
                seen_special.insert(v);
            } else if let Some(&at) = special_since.get(&v) {
                return Some(Witness::SpecialLost { node: v, special_at: at, lost_at: step_no });
            }
        }
        None
    })?;
    Ok(match witness {
        Some(w) => Verdict::fail("special-absorbing", w),
        None => Verdict::pass("special-absorbing")
            .with_note(format!("{} node(s) reached a special neighborhood", seen_special.len())),
    })
}
