//! Algorithms by name, for the CLI and the C interface.

use thiserror::Error;

use crate::algorithms::{
    compose, BuggyFive, Composed, CycleSixColoring, SaveColors, SaveOneMoreColor, SaveOneMoreState, WaitFreeLinial,
};
use crate::engine::{execute, Graph, Inputs, Trace};
use crate::schedulers::{adversary_search, Property, Scheduling, SearchConfig, Violation};
use crate::verify::{check_flip_precondition, check_special_absorbing, Palette, Verdict};
use crate::EngineError;

pub const ALGORITHM_NAMES: &[&str] = &["six", "linial", "save", "save1", "buggy5", "linial+save", "linial+save1"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown algorithm `{0}` (known: six, linial, save, save1, buggy5, linial+save, linial+save1)")]
    Unknown(String),
}

/// A registered algorithm instantiated for a degree bound and identifier bound.
#[derive(Clone, Debug)]
pub enum NamedAlgorithm {
    Six(CycleSixColoring),
    Linial(WaitFreeLinial),
    Save(SaveColors),
    Save1(SaveOneMoreColor),
    Buggy5(BuggyFive),
    LinialSave(Composed<WaitFreeLinial, SaveColors>),
    LinialSave1(Composed<WaitFreeLinial, SaveOneMoreColor>),
}

/// Evaluates `$body` with `$a` bound to the concrete algorithm.
macro_rules! dispatch {
    ($self:expr, $a:ident => $body:expr) => {
        match $self {
            NamedAlgorithm::Six($a) => $body,
            NamedAlgorithm::Linial($a) => $body,
            NamedAlgorithm::Save($a) => $body,
            NamedAlgorithm::Save1($a) => $body,
            NamedAlgorithm::Buggy5($a) => $body,
            NamedAlgorithm::LinialSave($a) => $body,
            NamedAlgorithm::LinialSave1($a) => $body,
        }
    };
}

/// Type-erased search result: states are JSON values.
pub type ErasedViolation = Violation<serde_json::Value>;

impl NamedAlgorithm {
    pub fn new(name: &str, delta: u64, id_bound: u64) -> Result<Self, RegistryError> {
        Ok(match name {
            "six" => NamedAlgorithm::Six(CycleSixColoring),
            "linial" => NamedAlgorithm::Linial(WaitFreeLinial::new(id_bound, delta)),
            "save" => NamedAlgorithm::Save(SaveColors),
            "save1" => NamedAlgorithm::Save1(SaveOneMoreColor::new(delta)),
            "buggy5" => NamedAlgorithm::Buggy5(BuggyFive),
            "linial+save" => NamedAlgorithm::LinialSave(compose(WaitFreeLinial::new(id_bound, delta), SaveColors)),
            "linial+save1" => {
                NamedAlgorithm::LinialSave1(compose(WaitFreeLinial::new(id_bound, delta), SaveOneMoreColor::new(delta)))
            }
            other => return Err(RegistryError::Unknown(other.into())),
        })
    }

    /// Instantiates `name` for `graph`, with `delta` defaulting to its maximum degree.
    pub fn for_graph(name: &str, graph: &Graph, delta: Option<u64>) -> Result<Self, RegistryError> {
        Self::new(name, delta.unwrap_or(graph.max_degree() as u64).max(1), graph.id_bound())
    }

    pub fn name(&self) -> String {
        use crate::engine::Algorithm;
        dispatch!(self, a => a.name())
    }

    pub fn delta(&self) -> Option<u64> {
        match self {
            NamedAlgorithm::Linial(a) => Some(a.schedule().delta),
            NamedAlgorithm::Save1(a) => Some(a.delta),
            NamedAlgorithm::LinialSave(a) => Some(a.first.schedule().delta),
            NamedAlgorithm::LinialSave1(a) => Some(a.second.delta),
            _ => None,
        }
    }

    pub fn palette(&self, graph: &Graph) -> Palette {
        let delta = self.delta().unwrap_or(graph.max_degree() as u64);
        Palette::for_algorithm(&self.name(), delta, graph.id_bound()).expect("registered name")
    }

    pub fn execute(
        &self,
        graph: &Graph,
        inputs: &Inputs,
        sched: &Scheduling,
        max_steps: u64,
    ) -> Result<Trace<serde_json::Value>, EngineError> {
        let mut trace = dispatch!(self, a => execute(a, graph, inputs, sched, max_steps)?.erase());
        trace.header.delta = self.delta();
        Ok(trace)
    }

    pub fn search(
        &self,
        graph: &Graph,
        inputs: &Inputs,
        property: Property,
        config: &SearchConfig,
    ) -> Result<Option<ErasedViolation>, EngineError> {
        dispatch!(self, a => Ok(adversary_search(a, graph, inputs, property, config)?.map(|v| erase_violation(&v))))
    }

    /// Invariant monitors of the edge-flipping program; empty for other algorithms.
    pub fn monitors(&self, graph: &Graph, inputs: &Inputs, sched: &Scheduling, max_steps: u64) -> Result<Vec<Verdict>, EngineError> {
        match self {
            NamedAlgorithm::Save1(a) => {
                let trace = execute(a, graph, inputs, sched, max_steps)?;
                fn id(s: &SaveOneMoreState) -> Option<&SaveOneMoreState> {
                    Some(s)
                }
                Ok(vec![
                    check_flip_precondition(a, &trace, a.delta, id)?,
                    check_special_absorbing(a, &trace, a.delta, id)?,
                ])
            }
            NamedAlgorithm::LinialSave1(a) => {
                let trace = execute(a, graph, inputs, sched, max_steps)?;
                let view = crate::algorithms::ComposedState::second_state;
                Ok(vec![
                    check_flip_precondition(a, &trace, a.second.delta, view)?,
                    check_special_absorbing(a, &trace, a.second.delta, view)?,
                ])
            }
            _ => Ok(Vec::new()),
        }
    }
}

fn erase_violation<S: serde::Serialize>(v: &Violation<S>) -> ErasedViolation {
    Violation {
        property: v.property.clone(),
        seed: v.seed,
        scheduling: v.scheduling.clone(),
        period: v.period.clone(),
        crashed: v.crashed.clone(),
        verdict: v.verdict.clone(),
        certificate: v.certificate.as_ref().map(|c| crate::engine::LivelockCertificate {
            first_boundary: c.first_boundary,
            repeat_boundary: c.repeat_boundary,
            cycle_steps: c.cycle_steps,
            prefix: c.prefix.clone(),
            period: c.period.clone(),
            undecided: c.undecided.clone(),
            configuration: c
                .configuration
                .iter()
                .map(|(k, r)| {
                    (*k, crate::engine::Registers {
                        old: r.old.map(|s| serde_json::to_value(s).expect("state serializes")),
                        new: r.new.map(|s| serde_json::to_value(s).expect("state serializes")),
                    })
                })
                .collect(),
        }),
        trace: v.trace.as_ref().map(|t| t.erase()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::graph::{build_graph, GraphSpec, Shape};
    use crate::engine::identity_inputs;

    #[test]
    fn every_name_resolves() {
        let g = build_graph(&GraphSpec::new(Shape::Cycle(6))).unwrap();
        for &name in ALGORITHM_NAMES {
            let a = NamedAlgorithm::for_graph(name, &g, None).unwrap();
            assert_eq!(a.name(), name);
            let t = a.execute(&g, &identity_inputs(&g), &Scheduling::Sync, 1000).unwrap();
            assert_eq!(t.header.algorithm, name);
        }
        assert!(NamedAlgorithm::for_graph("nope", &g, None).is_err());
    }
}
