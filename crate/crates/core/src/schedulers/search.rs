//! Adversary search for a scheduling that breaks a property.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{enumerate_schedulings, RandomAdversary, Scheduling};
use crate::color::NodeId;
use crate::engine::{detect_livelock, execute, Algorithm, Block, EngineError, Graph, Inputs, LivelockCertificate, Trace};
use crate::verify::{check_palette, check_proper, check_termination, Palette, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Property {
    Proper,
    Palette(Palette),
    /// Every node that is never crashed decides.
    Termination,
    /// No periodic scheduling revisits a configuration with undecided nodes.
    PeriodicTermination,
}

impl Property {
    /// Parses a property name; `palette` needs the algorithm's palette.
    pub fn parse(name: &str, palette: Option<Palette>) -> Option<Property> {
        match name {
            "proper" => Some(Property::Proper),
            "palette" => palette.map(Property::Palette),
            "termination" => Some(Property::Termination),
            "livelock" | "periodic-termination" => Some(Property::PeriodicTermination),
            _ => None,
        }
    }

    fn evaluate<S>(&self, trace: &Trace<S>) -> Verdict {
        match self {
            Property::Proper => check_proper(trace),
            Property::Palette(p) => check_palette(trace, p),
            Property::Termination | Property::PeriodicTermination => check_termination(trace),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Proper => write!(f, "proper"),
            Property::Palette(_) => write!(f, "palette"),
            Property::Termination => write!(f, "termination"),
            Property::PeriodicTermination => write!(f, "livelock"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Random schedulings to try after the exhaustive phase.
    pub budget: u64,
    /// First random seed; seeds `seed..seed + budget` are tried.
    pub seed: u64,
    pub p: f64,
    pub crash_rate: f64,
    pub max_steps: u64,
    /// Prefix depth of the exhaustive phase (instances of at most 5 nodes).
    pub exhaustive_depth: usize,
    /// Longest period tried when looking for livelocks.
    pub period_len: usize,
    /// Period repetitions before giving up on a periodic scheduling.
    pub livelock_bound: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 1000,
            seed: 0,
            p: 0.5,
            crash_rate: 0.0,
            max_steps: 10_000,
            exhaustive_depth: 2,
            period_len: 2,
            livelock_bound: 64,
        }
    }
}

/// A replayable counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct Violation<S> {
    pub property: String,
    /// Random seed that produced it, if found in the random phase.
    pub seed: Option<u64>,
    /// Executed blocks, or the prefix of a periodic scheduling.
    pub scheduling: Vec<Block>,
    /// Period repeated forever after `scheduling`; empty for finite counterexamples.
    pub period: Vec<Block>,
    pub crashed: BTreeSet<NodeId>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<LivelockCertificate<S>>,
    #[serde(skip)]
    pub trace: Option<Trace<S>>,
}

const SMALL_INSTANCE: usize = 5;

/// Exhaustive phase over small instances, then seeded random schedulings.
/// Returns the first violation in a fixed order (exhaustive order, then
/// lowest seed).
pub fn adversary_search<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    inputs: &Inputs,
    property: Property,
    config: &SearchConfig,
) -> Result<Option<Violation<A::State>>, EngineError> {
    let name = property.to_string();
    if graph.len() <= SMALL_INSTANCE {
        let nodes = graph.ids().to_vec();
        let mut prefixes: Vec<Vec<Block>> = vec![Vec::new()];
        prefixes.extend(enumerate_schedulings(&nodes, config.exhaustive_depth, true).expect("unguarded"));
        let found = if property == Property::PeriodicTermination {
            let periods: Vec<Vec<Block>> = enumerate_schedulings(&nodes, config.period_len, true).expect("unguarded").collect();
            let total = prefixes.len() * periods.len();
            (0..total).into_par_iter().find_map_first(|k| {
                let (prefix, period) = (&prefixes[k / periods.len()], &periods[k % periods.len()]);
                match detect_livelock(algo, graph, inputs, prefix, period, config.livelock_bound) {
                    Ok(Some(cert)) => Some(Ok(Violation {
                        property: name.clone(),
                        seed: None,
                        scheduling: prefix.clone(),
                        period: period.clone(),
                        crashed: BTreeSet::new(),
                        verdict: livelock_verdict(&cert),
                        certificate: Some(cert),
                        trace: None,
                    })),
                    Ok(None) => None,
                    Err(e) => Some(Err(e)),
                }
            })
        } else {
            let all: Block = nodes.iter().copied().collect();
            prefixes.par_iter().find_map_first(|prefix| {
                let sched = Scheduling::Periodic { prefix: prefix.clone(), period: vec![all.clone()] };
                finite_violation(algo, graph, inputs, &sched, &property, config.max_steps, None).transpose()
            })
        };
        if let Some(v) = found.transpose()? {
            return Ok(Some(v));
        }
    }
    let seeds = config.seed..config.seed.saturating_add(config.budget);
    seeds
        .into_par_iter()
        .find_map_first(|seed| {
            let adv = RandomAdversary::new(seed, config.p, config.crash_rate, Default::default(), graph);
            finite_violation(algo, graph, inputs, &Scheduling::Random(adv), &property, config.max_steps, Some(seed))
                .transpose()
        })
        .transpose()
}

fn livelock_verdict<S>(cert: &LivelockCertificate<S>) -> Verdict {
    Verdict::fail(
        "livelock",
        Witness::Livelock {
            first_boundary: cert.first_boundary,
            repeat_boundary: cert.repeat_boundary,
            cycle_steps: cert.cycle_steps,
        },
    )
}

fn finite_violation<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    inputs: &Inputs,
    sched: &Scheduling,
    property: &Property,
    max_steps: u64,
    seed: Option<u64>,
) -> Result<Option<Violation<A::State>>, EngineError> {
    let trace = execute(algo, graph, inputs, sched, max_steps)?;
    let verdict = property.evaluate(&trace);
    if verdict.pass {
        return Ok(None);
    }
    Ok(Some(Violation {
        property: property.to_string(),
        seed,
        scheduling: trace.scheduling(),
        period: Vec::new(),
        crashed: trace.end.crashed.iter().copied().collect(),
        verdict,
        certificate: None,
        trace: Some(trace),
    }))
}

/// Re-runs a violation's scheduling and re-evaluates the property.
pub fn replay_violation<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    inputs: &Inputs,
    violation: &Violation<A::State>,
    property: Property,
    config: &SearchConfig,
) -> Result<Verdict, EngineError> {
    if !violation.period.is_empty() {
        return Ok(
            match detect_livelock(algo, graph, inputs, &violation.scheduling, &violation.period, config.livelock_bound)? {
                Some(cert) => livelock_verdict(&cert),
                None => Verdict::pass("livelock"),
            },
        );
    }
    let sched = Scheduling::Blocks { blocks: violation.scheduling.clone(), crashed: violation.crashed.clone() };
    let trace = execute(algo, graph, inputs, &sched, config.max_steps)?;
    Ok(property.evaluate(&trace))
}
