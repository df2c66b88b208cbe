//! Checkers over traces. Every failing verdict carries a witness that can be
//! re-validated against the raw trace.

pub mod campaign;
pub mod golden;
pub mod monitors;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{Color, NodeId};
use crate::engine::{EngineError, Trace};
pub use campaign::{campaign, CampaignConfig, CampaignReport, RunSummary};
pub use golden::{reproduce_table, Table, TableReport};
pub use monitors::{check_flip_precondition, check_special_absorbing};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Evidence for a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Adjacent nodes with the same output.
    Edge { u: NodeId, v: NodeId, color: Color },
    OffPalette { node: NodeId, color: Color, palette: Palette },
    /// All decided colors share this parity.
    SameParity { parity: u64 },
    Undecided { nodes: Vec<NodeId> },
    Livelock { first_boundary: u64, repeat_boundary: u64, cycle_steps: u64 },
    /// First divergent cell of a golden table.
    Cell { row: String, node: NodeId, column: String, expected: String, actual: String },
    Flip { step: u64, node: NodeId, partner: NodeId, reason: String },
    SpecialLost { node: NodeId, special_at: u64, lost_at: u64 },
    Binomial { n: u64, m: u64, residue: u64 },
    Message { text: String },
}

impl Witness {
    /// Re-validates the witness against `trace`; `None` when the witness is
    /// not a statement about a trace's decisions.
    pub fn recheck<S>(&self, trace: &Trace<S>) -> Option<bool> {
        let dec = trace.decisions();
        Some(match self {
            Witness::Edge { u, v, color } => {
                trace.graph().are_adjacent(*u, *v) && dec.get(u) == Some(color) && dec.get(v) == Some(color)
            }
            Witness::OffPalette { node, color, palette } => dec.get(node) == Some(color) && !palette.contains(color),
            Witness::SameParity { parity } => {
                let colors = parity_labels(dec).ok()?;
                !colors.is_empty() && colors.values().all(|c| c % 2 == *parity)
            }
            Witness::Undecided { nodes } => !nodes.is_empty() && nodes.iter().all(|v| !dec.contains_key(v)),
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Nodes the check could not judge because they never decided.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub undecided: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn pass(check: &str) -> Self {
        Verdict { check: check.into(), pass: true, witness: None, undecided: Vec::new(), note: None }
    }

    pub fn fail(check: &str, witness: Witness) -> Self {
        Verdict { check: check.into(), pass: false, witness: Some(witness), undecided: Vec::new(), note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with_undecided<S>(mut self, trace: &Trace<S>) -> Self {
        self.undecided = trace.end.undecided.clone();
        if !self.undecided.is_empty() && self.pass {
            self.note = Some(format!("vacuous on {} undecided node(s)", self.undecided.len()));
        }
        self
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, if self.pass { "pass" } else { "FAIL" })?;
        if let Some(w) = &self.witness {
            write!(f, " {}", serde_json::to_string(w).unwrap_or_default())?;
        }
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

/// Passes iff no two adjacent decided nodes share an output.
pub fn check_proper<S>(trace: &Trace<S>) -> Verdict {
    let dec = trace.decisions();
    for (u, v) in trace.graph().edges() {
        if let (Some(cu), Some(cv)) = (dec.get(&u), dec.get(&v)) {
            if cu == cv {
                return Verdict::fail("proper", Witness::Edge { u, v, color: *cu }).with_undecided(trace);
            }
        }
    }
    let v = Verdict::pass("proper").with_undecided(trace);
    if dec.is_empty() {
        v.with_note("vacuous: no decisions")
    } else {
        v
    }
}

/// Set of admissible outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Palette {
    /// Pairs `(a, b)` with `a + b <= delta`, without `(delta, 0)` when `exclude_high`.
    Pairs { delta: u64, exclude_high: bool },
    /// Integers in `lo..=hi`.
    Range { lo: u64, hi: u64 },
}

impl Palette {
    /// Palette of a registered algorithm for the given degree bound and identifier bound.
    pub fn for_algorithm(name: &str, delta: u64, id_bound: u64) -> Result<Palette, VerifyError> {
        Ok(match name {
            "six" => Palette::Pairs { delta: 2, exclude_high: false },
            "save" | "linial+save" => Palette::Pairs { delta, exclude_high: false },
            "save1" | "linial+save1" => Palette::Pairs { delta, exclude_high: true },
            "linial" => {
                let hi = crate::coverfree::reduction_schedule(id_bound, delta).final_palette();
                Palette::Range { lo: 1, hi }
            }
            "buggy5" => Palette::Range { lo: 0, hi: 4 },
            other => return Err(VerifyError::UnknownAlgorithm(other.into())),
        })
    }

    pub fn contains(&self, c: &Color) -> bool {
        match (*self, *c) {
            (Palette::Pairs { delta, exclude_high }, Color::Pair(a, b)) => {
                a.checked_add(b).is_some_and(|s| s <= delta) && !(exclude_high && (a, b) == (delta, 0))
            }
            (Palette::Range { lo, hi }, Color::Single(x)) => (lo..=hi).contains(&x),
            _ => false,
        }
    }

    pub fn size(&self) -> u64 {
        match *self {
            Palette::Pairs { delta, exclude_high } => (delta + 1) * (delta + 2) / 2 - exclude_high as u64,
            Palette::Range { lo, hi } => hi + 1 - lo,
        }
    }
}

impl fmt::Display for Palette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Palette::Pairs { delta, exclude_high: false } => write!(f, "pairs a+b<={delta}"),
            Palette::Pairs { delta, exclude_high: true } => write!(f, "pairs a+b<={delta} except ({delta},0)"),
            Palette::Range { lo, hi } => write!(f, "{lo}..={hi}"),
        }
    }
}

pub fn check_palette<S>(trace: &Trace<S>, palette: &Palette) -> Verdict {
    for (&node, color) in trace.decisions() {
        if !palette.contains(color) {
            return Verdict::fail("palette", Witness::OffPalette { node, color: *color, palette: *palette })
                .with_undecided(trace);
        }
    }
    Verdict::pass("palette").with_undecided(trace)
}

/// Palette implied by the trace header's algorithm, degree bound and graph.
pub fn palette_of<S>(trace: &Trace<S>) -> Result<Palette, VerifyError> {
    let delta = trace.header.delta.unwrap_or(trace.graph().max_degree() as u64);
    Palette::for_algorithm(&trace.header.algorithm, delta, trace.graph().id_bound())
}

pub fn check_termination<S>(trace: &Trace<S>) -> Verdict {
    if trace.is_complete() {
        Verdict::pass("termination")
    } else {
        let mut nodes = trace.end.undecided.clone();
        if nodes.is_empty() {
            nodes = trace.graph().ids().iter().copied().filter(|v| !trace.decisions().contains_key(v)).collect();
        }
        Verdict::fail("termination", Witness::Undecided { nodes })
            .with_note(format!("stopped: {:?}", trace.end.stop))
    }
}

/// Integer labels used by the parity check: integer outputs as they are,
/// pair outputs by rank among the distinct decided pairs.
fn parity_labels(dec: &BTreeMap<NodeId, Color>) -> Result<BTreeMap<NodeId, u64>, String> {
    let distinct: BTreeSet<Color> = dec.values().copied().collect();
    if distinct.len() > 4 {
        return Err(format!("{} distinct colors, at most 4 allowed", distinct.len()));
    }
    let rank: BTreeMap<Color, u64> = distinct.iter().enumerate().map(|(i, c)| (*c, i as u64)).collect();
    Ok(dec
        .iter()
        .map(|(&v, c)| (v, match c {
            Color::Single(x) => *x,
            Color::Pair(..) => rank[c],
        }))
        .collect())
}

/// On an odd cycle fully decided with at most four colors, both parities
/// must occur among the outputs.
pub fn check_parity_reduction<S>(trace: &Trace<S>) -> Result<Verdict, VerifyError> {
    let g = trace.graph();
    if !g.is_cycle() || g.len().is_multiple_of(2) {
        return Err(VerifyError::Precondition("graph is not an odd cycle".into()));
    }
    let dec = trace.decisions();
    if dec.len() != g.len() {
        return Err(VerifyError::Precondition(format!("{} of {} nodes decided", dec.len(), g.len())));
    }
    let labels = parity_labels(dec).map_err(VerifyError::Precondition)?;
    let parities: BTreeSet<u64> = labels.values().map(|c| c % 2).collect();
    Ok(if parities.len() == 2 {
        Verdict::pass("parity")
    } else {
        Verdict::fail("parity", Witness::SameParity { parity: *parities.iter().next().unwrap() })
    })
}

/// Runs the named checks (`proper`, `palette`, `termination`, `parity`).
pub fn run_checks<S>(trace: &Trace<S>, checks: &[&str]) -> Result<Vec<Verdict>, VerifyError> {
    checks
        .iter()
        .map(|&c| match c {
            "proper" => Ok(check_proper(trace)),
            "palette" => Ok(check_palette(trace, &palette_of(trace)?)),
            "termination" => Ok(check_termination(trace)),
            "parity" => check_parity_reduction(trace),
            other => Err(VerifyError::UnknownCheck(other.into())),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimeReport {
    pub runtimes: BTreeMap<NodeId, u64>,
    pub max: u64,
    /// `false` when the trace is incomplete and the numbers are lower bounds.
    pub complete: bool,
}

/// Recounts `T_v` from the step records: activations while not yet decided.
pub fn measure_runtime<S>(trace: &Trace<S>) -> RuntimeReport {
    let mut runtimes: BTreeMap<NodeId, u64> = trace.graph().ids().iter().map(|&v| (v, 0)).collect();
    let mut decided = BTreeSet::new();
    for step in &trace.steps {
        for v in &step.scheduled {
            if !decided.contains(v) {
                *runtimes.entry(*v).or_default() += 1;
            }
        }
        decided.extend(step.decided.iter().map(|(v, _)| *v));
    }
    let max = runtimes.values().copied().max().unwrap_or(0);
    RuntimeReport { runtimes, max, complete: trace.is_complete() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::graph::{build_graph, GraphSpec, Shape};
    use crate::engine::{identity_inputs, execute, TraceEnd, TraceHeader, StopReason};
    use crate::algorithms::CycleSixColoring;
    use crate::schedulers::Scheduling;

    fn fabricated(shape: Shape, decisions: &[(NodeId, Color)]) -> Trace<()> {
        let g = build_graph(&GraphSpec::new(shape)).unwrap();
        Trace {
            header: TraceHeader {
                algorithm: "six".into(),
                graph_hash: g.hash(),
                inputs: identity_inputs(&g),
                graph: g,
                scheduler: "fabricated".into(),
                seed: None,
                delta: None,
            },
            steps: Vec::new(),
            end: TraceEnd {
                stop: StopReason::AllTerminated,
                complete: true,
                crashed: vec![],
                undecided: vec![],
                decisions: decisions.iter().copied().collect(),
                decided_at: BTreeMap::new(),
                runtimes: BTreeMap::new(),
            },
        }
    }

    #[test]
    fn proper_fails_with_edge() {
        let t = fabricated(Shape::Path(3), &[(1, Color::Pair(1, 0)), (2, Color::Pair(1, 0))]);
        let v = check_proper(&t);
        assert!(!v.pass);
        assert_eq!(v.witness, Some(Witness::Edge { u: 1, v: 2, color: Color::Pair(1, 0) }));
        assert_eq!(v.witness.unwrap().recheck(&t), Some(true));
        let empty = fabricated(Shape::Path(3), &[]);
        assert!(check_proper(&empty).pass);
    }

    #[test]
    fn palette_membership() {
        let save1 = Palette::Pairs { delta: 2, exclude_high: true };
        assert!(!save1.contains(&Color::Pair(2, 0)));
        assert!(save1.contains(&Color::Pair(0, 2)));
        assert_eq!(save1.size(), 5);
        let save = Palette::Pairs { delta: 2, exclude_high: false };
        assert!(!save.contains(&Color::Pair(2, 1)));
        assert_eq!(save.size(), 6);
        assert!(matches!(Palette::for_algorithm("nope", 2, 9), Err(VerifyError::UnknownAlgorithm(_))));
        let t = fabricated(Shape::Path(3), &[(1, Color::Pair(2, 0))]);
        let v = check_palette(&t, &save1);
        assert!(!v.pass);
        assert_eq!(v.witness.unwrap().recheck(&t), Some(true));
    }

    #[test]
    fn parity_examples() {
        let colors = |cs: &[u64]| cs.iter().enumerate().map(|(i, &c)| (i as NodeId + 1, Color::Single(c))).collect::<Vec<_>>();
        let t = fabricated(Shape::Cycle(5), &colors(&[0, 1, 0, 1, 2]));
        assert!(check_parity_reduction(&t).unwrap().pass);
        let t = fabricated(Shape::Cycle(5), &colors(&[0, 2, 0, 2, 0]));
        let v = check_parity_reduction(&t).unwrap();
        assert!(!v.pass && !check_proper(&t).pass);
        assert_eq!(v.witness.unwrap().recheck(&t), Some(true));
        let t = fabricated(Shape::Clique(3), &colors(&[1, 2, 3]));
        assert!(check_parity_reduction(&t).unwrap().pass);
        let t = fabricated(Shape::Cycle(4), &colors(&[0, 1, 0, 1]));
        assert!(check_parity_reduction(&t).is_err());
    }

    #[test]
    fn runtime_single_node() {
        let g = build_graph(&GraphSpec::new(Shape::Clique(1))).unwrap();
        let t = execute(&CycleSixColoring, &g, &identity_inputs(&g), &Scheduling::Sync, 10).unwrap();
        let r = measure_runtime(&t);
        assert_eq!((r.max, r.complete), (1, true));
        assert_eq!(r.runtimes, t.end.runtimes);
    }
}
