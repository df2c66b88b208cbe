//! Step semantics of the asynchronous LOCAL model.
//!
//! Every node owns a register pair: `old` is the published value neighbors
//! read, `new` the pending value that becomes visible at the node's next
//! activation. Activating a block first publishes `new -> old` for every
//! non-terminated node of the block, then each of them reads the published
//! values of its neighbors and computes a fresh `new`. Because the publish
//! phase completes before any read, concurrently scheduled neighbors see each
//! other's writes.

pub mod graph;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{Color, NodeId};
use crate::schedulers::Scheduling;
pub use graph::Graph;
pub use trace::{NodeRead, StepRecord, StopReason, Trace, TraceEnd, TraceHeader};

/// A set of nodes activated together.
pub type Block = BTreeSet<NodeId>;

/// Per-node input labels. Nodes absent from the map use their identifier.
pub type Inputs = BTreeMap<NodeId, u64>;

/// Inputs equal to the node identifiers.
pub fn identity_inputs(graph: &Graph) -> Inputs {
    graph.ids().iter().map(|&v| (v, v)).collect()
}

/// Outcome of one state transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transition<S> {
    Continue(S),
    Decide(Color),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgorithmError {
    #[error("no admissible color left: {0}")]
    EmptyCandidateSet(String),
    #[error("color {color} outside the family of size {size}")]
    ColorOutOfRange { color: u64, size: u64 },
    #[error("phase-1 output {0} is not a valid phase-2 input")]
    PhaseInput(Color),
    #[error("node has degree {degree} but the algorithm was configured for at most {delta}")]
    DegreeTooLarge { degree: usize, delta: usize },
}

/// A full-information node program given by its `(init, next)` pair.
///
/// `next` receives the node's own published state and the published states
/// of its neighbors in ascending identifier order, `None` standing for a
/// register that was never written.
pub trait Algorithm: Sync {
    type State: Clone + Eq + Hash + Debug + Serialize + DeserializeOwned + Send + Sync;

    fn name(&self) -> String;

    fn init(&self, id: NodeId, input: u64) -> Self::State;

    fn next(
        &self,
        own: &Self::State,
        snaps: &[Option<&Self::State>],
    ) -> Result<Transition<Self::State>, AlgorithmError>;
}

/// Register content.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeState<S> {
    Bottom,
    Running(S),
    Terminated(Color),
}

impl<S> NodeState<S> {
    pub fn running(&self) -> Option<&S> {
        match self {
            NodeState::Running(s) => Some(s),
            _ => None,
        }
    }

    pub fn decision(&self) -> Option<Color> {
        match self {
            NodeState::Terminated(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self, NodeState::Terminated(_))
    }

    pub fn map<T>(&self, f: impl FnOnce(&S) -> T) -> NodeState<T> {
        match self {
            NodeState::Bottom => NodeState::Bottom,
            NodeState::Running(s) => NodeState::Running(f(s)),
            NodeState::Terminated(c) => NodeState::Terminated(*c),
        }
    }
}

/// Published and pending register of one node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Registers<S> {
    pub old: NodeState<S>,
    pub new: NodeState<S>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("scheduled block is empty (step {0})")]
    EmptyBlock(u64),
    #[error("scheduled node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("node {node} failed at step {step}: {source}")]
    Algorithm {
        node: NodeId,
        step: u64,
        #[source]
        source: AlgorithmError,
    },
}

/// Global register contents at a step boundary, indexed like the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration<S> {
    registers: Vec<Registers<S>>,
    step_index: u64,
}

impl<S: Clone> Configuration<S> {
    /// Step-0 configuration: nothing published, `new` holds the initial state.
    pub fn initial<A>(algo: &A, graph: &Graph, inputs: &Inputs) -> Self
    where
        A: Algorithm<State = S>,
    {
        let registers = graph
            .ids()
            .iter()
            .map(|&v| Registers {
                old: NodeState::Bottom,
                new: NodeState::Running(algo.init(v, inputs.get(&v).copied().unwrap_or(v))),
            })
            .collect();
        Configuration { registers, step_index: 0 }
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn registers(&self) -> &[Registers<S>] {
        &self.registers
    }

    pub fn node(&self, graph: &Graph, id: NodeId) -> Option<&Registers<S>> {
        graph.index_of(id).map(|i| &self.registers[i])
    }

    pub fn is_terminated(&self, index: usize) -> bool {
        self.registers[index].new.is_terminated()
    }

    pub fn all_terminated(&self) -> bool {
        self.registers.iter().all(|r| r.new.is_terminated())
    }
}

/// Activates `block` once.
///
/// Terminated members are no-ops; nodes outside the block are untouched.
pub fn step<A: Algorithm>(
    cfg: &mut Configuration<A::State>,
    block: &Block,
    algo: &A,
    graph: &Graph,
) -> Result<StepRecord<A::State>, EngineError> {
    let step_no = cfg.step_index + 1;
    if block.is_empty() {
        return Err(EngineError::EmptyBlock(step_no));
    }
    let mut active = Vec::with_capacity(block.len());
    for &v in block {
        let i = graph.index_of(v).ok_or(EngineError::UnknownNode(v))?;
        if !cfg.registers[i].new.is_terminated() {
            active.push(i);
        }
    }
    for &i in &active {
        cfg.registers[i].old = cfg.registers[i].new.clone();
    }
    let mut reads = Vec::with_capacity(active.len());
    let mut decided = Vec::new();
    let mut updates = Vec::with_capacity(active.len());
    for &i in &active {
        let own = match &cfg.registers[i].old {
            NodeState::Running(s) => s,
            _ => unreachable!("published state of an active node is running"),
        };
        let snaps: Vec<Option<&A::State>> = graph
            .neighbor_indices(i)
            .iter()
            .map(|&u| cfg.registers[u].old.running())
            .collect();
        let next = algo.next(own, &snaps).map_err(|source| EngineError::Algorithm {
            node: graph.id(i),
            step: step_no,
            source,
        })?;
        let new = match next {
            Transition::Continue(s) => NodeState::Running(s),
            Transition::Decide(c) => {
                decided.push((graph.id(i), c));
                NodeState::Terminated(c)
            }
        };
        reads.push(NodeRead {
            node: graph.id(i),
            snapshot: graph
                .neighbor_indices(i)
                .iter()
                .map(|&u| (graph.id(u), cfg.registers[u].old.running().cloned()))
                .collect(),
            new: new.clone(),
        });
        updates.push((i, new));
    }
    for (i, new) in updates {
        cfg.registers[i].new = new;
    }
    cfg.step_index = step_no;
    Ok(StepRecord { step: step_no, scheduled: block.iter().copied().collect(), reads, decided })
}

/// Drives `algo` under `sched` until every node the scheduling may still
/// activate has terminated, the scheduling ends, or `max_steps` is reached.
pub fn execute<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    inputs: &Inputs,
    sched: &Scheduling,
    max_steps: u64,
) -> Result<Trace<A::State>, EngineError> {
    let mut cfg = Configuration::initial(algo, graph, inputs);
    let mut steps = Vec::new();
    let mut runtimes: BTreeMap<NodeId, u64> = graph.ids().iter().map(|&v| (v, 0)).collect();
    let mut decided_at = BTreeMap::new();
    let mut decisions = BTreeMap::new();
    let mut appeared = BTreeSet::new();
    let stop = loop {
        let t = cfg.step_index;
        if sched.is_done(t, graph, &|i| cfg.is_terminated(i)) {
            break StopReason::AllTerminated;
        }
        if t >= max_steps {
            break StopReason::MaxSteps;
        }
        let Some(block) = sched.block_at(t + 1, graph) else {
            break StopReason::ScheduleExhausted;
        };
        for &v in &block {
            if let Some(i) = graph.index_of(v) {
                if !cfg.is_terminated(i) {
                    *runtimes.get_mut(&v).unwrap() += 1;
                }
            }
            appeared.insert(v);
        }
        let record = step(&mut cfg, &block, algo, graph)?;
        for &(v, c) in &record.decided {
            decided_at.insert(v, record.step);
            decisions.insert(v, c);
        }
        steps.push(record);
    };
    let executed = cfg.step_index;
    let crashed: BTreeSet<NodeId> = sched.crashed_by(executed, graph);
    let undecided: Vec<NodeId> = appeared
        .iter()
        .copied()
        .filter(|v| !decisions.contains_key(v) && !crashed.contains(v))
        .collect();
    let complete = undecided.is_empty() && stop != StopReason::MaxSteps;
    Ok(Trace {
        header: TraceHeader {
            algorithm: algo.name(),
            graph_hash: graph.hash(),
            graph: graph.clone(),
            inputs: graph.ids().iter().map(|&v| (v, inputs.get(&v).copied().unwrap_or(v))).collect(),
            scheduler: sched.describe(),
            seed: sched.seed(),
            delta: None,
        },
        steps,
        end: TraceEnd {
            stop,
            complete,
            crashed: crashed.into_iter().collect(),
            undecided,
            decisions,
            decided_at,
            runtimes,
        },
    })
}

/// Proof that a periodic scheduling revisits a configuration while some of
/// its nodes are still undecided.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LivelockCertificate<S> {
    /// Period boundary (0 = right after the prefix) of the first visit.
    pub first_boundary: u64,
    /// Period boundary at which the configuration reappears.
    pub repeat_boundary: u64,
    /// Number of steps in the cycle.
    pub cycle_steps: u64,
    pub prefix: Vec<Vec<NodeId>>,
    pub period: Vec<Vec<NodeId>>,
    /// Undecided nodes that are activated by the period.
    pub undecided: Vec<NodeId>,
    /// Registers of every node in the repeated configuration.
    pub configuration: BTreeMap<NodeId, Registers<S>>,
}

/// Runs `prefix` and then `period` repeatedly, looking for a repeated
/// configuration at period boundaries.
pub fn detect_livelock<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    inputs: &Inputs,
    prefix: &[Block],
    period: &[Block],
    bound: u64,
) -> Result<Option<LivelockCertificate<A::State>>, EngineError> {
    assert!(!period.is_empty(), "livelock period must be nonempty");
    let mut cfg = Configuration::initial(algo, graph, inputs);
    for block in prefix {
        step(&mut cfg, block, algo, graph)?;
    }
    let period_nodes: Vec<usize> = period
        .iter()
        .flatten()
        .filter_map(|&v| graph.index_of(v))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut seen: HashMap<Vec<Registers<A::State>>, u64> = HashMap::new();
    for boundary in 0..=bound {
        if period_nodes.iter().all(|&i| cfg.is_terminated(i)) {
            return Ok(None);
        }
        if let Some(&first) = seen.get(cfg.registers()) {
            return Ok(Some(LivelockCertificate {
                first_boundary: first,
                repeat_boundary: boundary,
                cycle_steps: (boundary - first) * period.len() as u64,
                prefix: prefix.iter().map(|b| b.iter().copied().collect()).collect(),
                period: period.iter().map(|b| b.iter().copied().collect()).collect(),
                undecided: period_nodes
                    .iter()
                    .filter(|&&i| !cfg.is_terminated(i))
                    .map(|&i| graph.id(i))
                    .collect(),
                configuration: graph
                    .ids()
                    .iter()
                    .zip(cfg.registers())
                    .map(|(&v, r)| (v, r.clone()))
                    .collect(),
            }));
        }
        seen.insert(cfg.registers().to_vec(), boundary);
        for block in period {
            step(&mut cfg, block, algo, graph)?;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{BuggyFive, CycleSixColoring, SaveColors};
    use crate::engine::graph::{build_graph, GraphSpec, Shape};

    fn block(ids: &[NodeId]) -> Block {
        ids.iter().copied().collect()
    }

    fn table_one_graph() -> Graph {
        build_graph(&GraphSpec::new(Shape::Cycle(5)).with_ids(vec![3, 5, 4, 1, 6])).unwrap()
    }

    fn table_two_graph() -> Graph {
        build_graph(&GraphSpec::new(Shape::Cycle(4)).with_ids(vec![3, 4, 2, 1])).unwrap()
    }

    fn running<S: Clone>(cfg: &Configuration<S>, g: &Graph, v: NodeId) -> (NodeState<S>, NodeState<S>) {
        let r = cfg.node(g, v).unwrap();
        (r.old.clone(), r.new.clone())
    }

    #[test]
    fn first_step_of_table_one() {
        let g = table_one_graph();
        let algo = CycleSixColoring;
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        let rec = step(&mut cfg, &block(&[1, 3, 5]), &algo, &g).unwrap();
        let r3 = rec.reads.iter().find(|r| r.node == 3).unwrap();
        assert_eq!(r3.snapshot[0], (5, Some(crate::algorithms::PairState { x: 5, a: 0, b: 0 })));
        assert_eq!(r3.snapshot[1], (6, None));
        let (_, new3) = running(&cfg, &g, 3);
        assert_eq!(new3, NodeState::Running(crate::algorithms::PairState { x: 3, a: 1, b: 0 }));
        assert_eq!(running(&cfg, &g, 1).1, NodeState::Terminated(Color::Pair(0, 0)));
        assert_eq!(cfg.step_index(), 1);
    }

    #[test]
    fn terminated_node_alone_is_frozen() {
        let g = table_one_graph();
        let algo = CycleSixColoring;
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        step(&mut cfg, &block(&[1]), &algo, &g).unwrap();
        let before = cfg.clone();
        let rec = step(&mut cfg, &block(&[1]), &algo, &g).unwrap();
        assert!(rec.reads.is_empty());
        assert_eq!(cfg.registers(), before.registers());
        assert_eq!(cfg.step_index(), before.step_index() + 1);
    }

    #[test]
    fn table_two_first_step() {
        let g = table_two_graph();
        let algo = BuggyFive;
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        step(&mut cfg, &block(&[2, 3, 4]), &algo, &g).unwrap();
        assert_eq!(
            running(&cfg, &g, 3).1,
            NodeState::Running(crate::algorithms::PairState { x: 3, a: 1, b: 1 })
        );
    }

    #[test]
    fn concurrent_neighbors_see_fresh_writes() {
        let g = build_graph(&GraphSpec::new(Shape::Path(2))).unwrap();
        let algo = SaveColors;
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        let rec = step(&mut cfg, &block(&[1, 2]), &algo, &g).unwrap();
        for read in &rec.reads {
            assert!(read.snapshot.iter().all(|(_, s)| s.is_some()), "node {} saw bottom", read.node);
        }
        // Solo activation instead sees nothing.
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        let rec = step(&mut cfg, &block(&[1]), &algo, &g).unwrap();
        assert_eq!(rec.reads[0].snapshot, vec![(2, None)]);
    }

    #[test]
    fn rejects_bad_blocks() {
        let g = table_one_graph();
        let algo = CycleSixColoring;
        let mut cfg = Configuration::initial(&algo, &g, &identity_inputs(&g));
        assert_eq!(step(&mut cfg, &Block::new(), &algo, &g), Err(EngineError::EmptyBlock(1)));
        assert_eq!(step(&mut cfg, &block(&[2]), &algo, &g), Err(EngineError::UnknownNode(2)));
    }

    #[test]
    fn table_two_livelock_certificate() {
        let g = table_two_graph();
        let cert = detect_livelock(
            &BuggyFive,
            &g,
            &identity_inputs(&g),
            &[block(&[2, 3, 4]), block(&[1, 3, 4])],
            &[block(&[3, 4])],
            16,
        )
        .unwrap()
        .expect("livelock");
        assert_eq!((cert.first_boundary, cert.repeat_boundary, cert.cycle_steps), (0, 2, 2));
        assert_eq!(cert.undecided, vec![3, 4]);
    }

    #[test]
    fn no_livelock_for_six_coloring() {
        let g = table_one_graph();
        let cert = detect_livelock(
            &CycleSixColoring,
            &g,
            &identity_inputs(&g),
            &[block(&[1, 3, 5]), block(&[4, 5])],
            &[block(&[3, 4])],
            32,
        )
        .unwrap();
        assert!(cert.is_none());
        let single = build_graph(&GraphSpec::new(Shape::Clique(1))).unwrap();
        let cert = detect_livelock(&CycleSixColoring, &single, &identity_inputs(&single), &[], &[block(&[1])], 8)
            .unwrap();
        assert!(cert.is_none());
    }
}
