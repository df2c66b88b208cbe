//! Schedulings: which nodes the adversary activates at each step.

mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::color::NodeId;
use crate::engine::{Block, Graph, Trace};
pub use search::{adversary_search, replay_violation, Property, SearchConfig, Violation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("scheduling line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid scheduler spec `{0}`")]
    BadSpec(String),
    #[error("enumeration over {nodes} nodes to depth {depth} exceeds the guard (5 nodes, depth 6); set ASYNCLOCAL_GUARD_OVERRIDE=1 to proceed")]
    GuardExceeded { nodes: usize, depth: usize },
    #[error("`{0}` describes a family of schedulings, not a single one")]
    NotSingle(String),
}

/// A seeded random crash adversary.
///
/// Every step includes each live node independently with probability `p`;
/// empty draws are redrawn. A node with crash time `c` may be activated at
/// steps `1..=c` only, so `c = 0` means initially crashed. Blocks depend only
/// on `(seed, graph, step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomAdversary {
    pub seed: u64,
    pub p: f64,
    pub crash_rate: f64,
    crash_times: BTreeMap<NodeId, u64>,
    /// Explicit crash times as given, kept for `describe`.
    kills: BTreeMap<NodeId, u64>,
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomAdversary {
    pub fn new(seed: u64, p: f64, crash_rate: f64, kills: BTreeMap<NodeId, u64>, graph: &Graph) -> Self {
        let mut crash_times = BTreeMap::new();
        for &v in graph.ids() {
            if let Some(&t) = kills.get(&v) {
                crash_times.insert(v, t);
            } else if crash_rate > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(seed, 0xC4A5_4000), v));
                // Geometric number of survived steps: P(c = k) = (1 - r)^k r.
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let c = if crash_rate >= 1.0 { 0.0 } else { (u.ln() / (1.0 - crash_rate).ln()).floor() };
                if c.is_finite() && c < u64::MAX as f64 {
                    crash_times.insert(v, c as u64);
                }
            }
        }
        RandomAdversary { seed, p: p.clamp(f64::MIN_POSITIVE, 1.0), crash_rate, crash_times, kills }
    }

    pub fn crash_time(&self, v: NodeId) -> Option<u64> {
        self.crash_times.get(&v).copied()
    }

    fn alive_at(&self, v: NodeId, step: u64) -> bool {
        self.crash_time(v).is_none_or(|c| step <= c)
    }

    fn block(&self, step: u64, graph: &Graph) -> Option<Block> {
        let alive: Vec<NodeId> = graph.ids().iter().copied().filter(|&v| self.alive_at(v, step)).collect();
        if alive.is_empty() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, step));
        loop {
            let block: Block = alive.iter().copied().filter(|_| rng.gen_bool(self.p)).collect();
            if !block.is_empty() {
                return Some(block);
            }
        }
    }
}

/// A scheduling, possibly infinite.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheduling {
    /// `V, V, V, …`
    Sync,
    /// A finite block list. `crashed` names nodes known to have crashed,
    /// which matters only for deciding completeness.
    Blocks { blocks: Vec<Block>, crashed: BTreeSet<NodeId> },
    /// `prefix` once, then `period` forever.
    Periodic { prefix: Vec<Block>, period: Vec<Block> },
    Random(RandomAdversary),
}

impl Scheduling {
    pub fn blocks(blocks: Vec<Block>) -> Self {
        Scheduling::Blocks { blocks, crashed: BTreeSet::new() }
    }

    /// Replays the executed blocks of a trace.
    pub fn replay_of<S>(trace: &Trace<S>) -> Self {
        Scheduling::Blocks { blocks: trace.scheduling(), crashed: trace.end.crashed.iter().copied().collect() }
    }

    /// Block for 1-based step `step`, or `None` once the scheduling ends.
    pub fn block_at(&self, step: u64, graph: &Graph) -> Option<Block> {
        debug_assert!(step >= 1);
        let idx = (step - 1) as usize;
        match self {
            Scheduling::Sync => Some(graph.ids().iter().copied().collect()),
            Scheduling::Blocks { blocks, .. } => blocks.get(idx).cloned(),
            Scheduling::Periodic { prefix, period } => {
                if idx < prefix.len() {
                    Some(prefix[idx].clone())
                } else if period.is_empty() {
                    None
                } else {
                    Some(period[(idx - prefix.len()) % period.len()].clone())
                }
            }
            Scheduling::Random(adv) => adv.block(step, graph),
        }
    }

    /// Whether no node that may still be activated after `executed` steps is
    /// undecided. `terminated` is queried by graph index.
    pub fn is_done(&self, executed: u64, graph: &Graph, terminated: &dyn Fn(usize) -> bool) -> bool {
        let all = |ids: &mut dyn Iterator<Item = NodeId>| {
            let mut ids = ids;
            (&mut ids).all(|v| graph.index_of(v).is_none_or(terminated))
        };
        match self {
            Scheduling::Sync | Scheduling::Blocks { .. } => (0..graph.len()).all(terminated),
            Scheduling::Periodic { prefix, period } => {
                let rest = prefix.iter().skip(executed as usize).chain(period.iter());
                all(&mut rest.flatten().copied())
            }
            Scheduling::Random(adv) => {
                all(&mut graph.ids().iter().copied().filter(|&v| adv.alive_at(v, executed + 1)))
            }
        }
    }

    /// Nodes that can no longer be activated after `executed` steps.
    pub fn crashed_by(&self, executed: u64, graph: &Graph) -> BTreeSet<NodeId> {
        match self {
            Scheduling::Sync => BTreeSet::new(),
            Scheduling::Blocks { crashed, .. } => crashed.clone(),
            Scheduling::Periodic { prefix, period } => {
                if (executed as usize) < prefix.len() {
                    BTreeSet::new()
                } else {
                    let live: BTreeSet<NodeId> = period.iter().flatten().copied().collect();
                    graph.ids().iter().copied().filter(|v| !live.contains(v)).collect()
                }
            }
            Scheduling::Random(adv) => {
                graph.ids().iter().copied().filter(|&v| !adv.alive_at(v, executed + 1)).collect()
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scheduling::Random(adv) => Some(adv.seed),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Scheduling::Sync => "sync".into(),
            Scheduling::Blocks { blocks, .. } => format!("replay:{} blocks", blocks.len()),
            Scheduling::Periodic { prefix, period } => {
                format!("periodic:prefix={},period={}", fmt_blocks(prefix), fmt_blocks(period))
            }
            Scheduling::Random(adv) => {
                let mut s = format!("random:seed={},p={},crash={}", adv.seed, adv.p, adv.crash_rate);
                for (v, t) in &adv.kills {
                    s.push_str(&format!(",kill={v}@{t}"));
                }
                s
            }
        }
    }
}

fn fmt_blocks(blocks: &[Block]) -> String {
    blocks
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("")
}

/// Parsed `--sched` argument.
#[derive(Clone, Debug, PartialEq)]
pub enum SchedulerSpec {
    Sync,
    Random { seed: u64, p: f64, crash_rate: f64, kills: BTreeMap<NodeId, u64> },
    /// Newline-delimited blocks, as produced by [`format_scheduling`].
    Replay { blocks: Vec<Block>, crashed: BTreeSet<NodeId> },
    Enumerate { depth: usize },
}

impl fmt::Display for SchedulerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerSpec::Sync => write!(f, "sync"),
            SchedulerSpec::Random { seed, p, crash_rate, kills } => {
                write!(f, "random:seed={seed},p={p},crash={crash_rate}")?;
                for (v, t) in kills {
                    write!(f, ",kill={v}@{t}")?;
                }
                Ok(())
            }
            SchedulerSpec::Replay { blocks, .. } => write!(f, "replay:{} blocks", blocks.len()),
            SchedulerSpec::Enumerate { depth } => write!(f, "enum:depth={depth}"),
        }
    }
}

impl FromStr for SchedulerSpec {
    type Err = SchedulerError;

    /// Parses `sync`, `random:seed=S,p=P,crash=R,kill=V@T` and `enum:depth=D`.
    /// Replay specs need file contents; see [`parse_scheduling`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SchedulerError::BadSpec(s.to_string());
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for part in args.split(',').filter(|p| !p.is_empty()) {
            kv.push(part.split_once('=').ok_or_else(bad)?);
        }
        match kind {
            "sync" if kv.is_empty() => Ok(SchedulerSpec::Sync),
            "random" => {
                let (mut seed, mut p, mut crash_rate, mut kills) = (0, 0.5, 0.0, BTreeMap::new());
                for (k, v) in kv {
                    match k {
                        "seed" => seed = v.parse().map_err(|_| bad())?,
                        "p" => p = v.parse().map_err(|_| bad())?,
                        "crash" => crash_rate = v.parse().map_err(|_| bad())?,
                        "kill" => {
                            let (node, at) = v.split_once('@').ok_or_else(bad)?;
                            kills.insert(node.parse().map_err(|_| bad())?, at.parse().map_err(|_| bad())?);
                        }
                        _ => return Err(bad()),
                    }
                }
                if !(p > 0.0 && p <= 1.0) || !(0.0..=1.0).contains(&crash_rate) {
                    return Err(bad());
                }
                Ok(SchedulerSpec::Random { seed, p, crash_rate, kills })
            }
            "enum" => match kv.as_slice() {
                [("depth", d)] => Ok(SchedulerSpec::Enumerate { depth: d.parse().map_err(|_| bad())? }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

/// Parses a scheduling document: one JSON array of identifiers per line.
/// A trace file is accepted as well; its executed blocks and crashed set are used.
pub fn parse_scheduling(text: &str) -> Result<(Vec<Block>, BTreeSet<NodeId>), SchedulerError> {
    if text.lines().next().is_some_and(|l| l.contains("\"record\"")) {
        let trace = Trace::<serde_json::Value>::read_jsonl(text.as_bytes())
            .map_err(|e| SchedulerError::Format { line: 0, message: e.to_string() })?;
        return Ok((trace.scheduling(), trace.end.crashed.iter().copied().collect()));
    }
    let mut blocks = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ids: Vec<NodeId> = serde_json::from_str(line)
            .map_err(|e| SchedulerError::Format { line: n + 1, message: e.to_string() })?;
        if ids.is_empty() {
            return Err(SchedulerError::Format { line: n + 1, message: "empty block".into() });
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SchedulerError::Format { line: n + 1, message: "identifiers must be strictly ascending".into() });
        }
        blocks.push(ids.into_iter().collect());
    }
    Ok((blocks, BTreeSet::new()))
}

/// Inverse of [`parse_scheduling`].
pub fn format_scheduling(blocks: &[Block]) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(&serde_json::to_string(&b.iter().collect::<Vec<_>>()).unwrap());
        out.push('\n');
    }
    out
}

/// Instantiates a single scheduling for `graph`.
pub fn make_scheduling(spec: &SchedulerSpec, graph: &Graph) -> Result<Scheduling, SchedulerError> {
    match spec {
        SchedulerSpec::Sync => Ok(Scheduling::Sync),
        SchedulerSpec::Random { seed, p, crash_rate, kills } => {
            Ok(Scheduling::Random(RandomAdversary::new(*seed, *p, *crash_rate, kills.clone(), graph)))
        }
        SchedulerSpec::Replay { blocks, crashed } => {
            for (n, b) in blocks.iter().enumerate() {
                if let Some(v) = b.iter().find(|v| !graph.contains(**v)) {
                    return Err(SchedulerError::Format { line: n + 1, message: format!("node {v} not in graph") });
                }
            }
            Ok(Scheduling::Blocks { blocks: blocks.clone(), crashed: crashed.clone() })
        }
        SchedulerSpec::Enumerate { .. } => Err(SchedulerError::NotSingle(spec.to_string())),
    }
}

/// Default enumeration guard.
pub const ENUM_MAX_NODES: usize = 5;
pub const ENUM_MAX_DEPTH: usize = 6;

/// Every sequence of 1..=depth nonempty subsets of `nodes`, each once.
///
/// Sequences come in lexicographic order, a prefix before its extensions;
/// subsets are ordered by their membership bitmask over the sorted nodes, so
/// `{1} < {2} < {1,2}`.
pub fn enumerate_schedulings(
    nodes: &[NodeId],
    depth: usize,
    allow_large: bool,
) -> Result<ScheduleEnumerator, SchedulerError> {
    if !allow_large && (nodes.len() > ENUM_MAX_NODES || depth > ENUM_MAX_DEPTH) {
        return Err(SchedulerError::GuardExceeded { nodes: nodes.len(), depth });
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let subsets = if sorted.is_empty() || sorted.len() >= 64 { 0 } else { (1u64 << sorted.len()) - 1 };
    Ok(ScheduleEnumerator { nodes: sorted, depth, subsets, stack: Vec::new(), started: false })
}

/// Count of sequences [`enumerate_schedulings`] produces.
pub fn enumeration_count(nodes: usize, depth: usize) -> u128 {
    let s = (1u128 << nodes) - 1;
    (1..=depth as u32).map(|j| s.pow(j)).sum()
}

pub struct ScheduleEnumerator {
    nodes: Vec<NodeId>,
    depth: usize,
    subsets: u64,
    /// Current sequence as subset masks minus one.
    stack: Vec<u64>,
    started: bool,
}

impl ScheduleEnumerator {
    fn block(&self, mask_minus_one: u64) -> Block {
        let mask = mask_minus_one + 1;
        self.nodes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect()
    }
}

impl Iterator for ScheduleEnumerator {
    type Item = Vec<Block>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.depth == 0 || self.subsets == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            self.stack.push(0);
        } else if self.stack.len() < self.depth {
            self.stack.push(0);
        } else {
            loop {
                let last = self.stack.last_mut()?;
                *last += 1;
                if *last < self.subsets {
                    break;
                }
                self.stack.pop();
                if self.stack.is_empty() {
                    return None;
                }
            }
        }
        Some(self.stack.iter().map(|&m| self.block(m)).collect())
    }
}
