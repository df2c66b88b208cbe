//! Weak-symmetry-breaking combinatorics over shared memory.
//!
//! Shared memory on `n` processes is the engine on `clique(n)` with
//! identifiers `1..=n`. Executions are sequences of blocks in which a
//! terminated process never appears again.

pub mod inputs;
pub mod toys;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::color::Color;
use crate::coverfree::is_prime;
use crate::engine::graph::{build_graph, GraphSpec, Shape};
use crate::engine::{identity_inputs, step, Algorithm, Block, Configuration, EngineError, Graph};
use crate::verify::{Verdict, Witness};

pub use inputs::{
    all_permutations, check_input_family, cycle_family, equivalence_class, exactly_k_family, leader_family,
    FamilyReport, InputFunction, Permutation,
};
pub use toys::{trim, Toy, TrimState, Trimmed, TOY_NAMES};

/// Largest `n` enumerated without the guard override.
pub const ENUM_MAX_PROCESSES: usize = 3;
pub const DEFAULT_STEP_BOUND: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WsbError {
    #[error("{what} with n = {n} is beyond the guard (set ASYNCLOCAL_GUARD_OVERRIDE=1 to force)")]
    Guard { what: String, n: usize },
    #[error("execution {blocks:?} is still undecided after the step bound")]
    StepBound { blocks: Vec<Vec<u64>> },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `prod (-1)^(|S_i| + 1)` over the blocks.
pub fn sign_of(blocks: &[Vec<u64>]) -> i64 {
    if blocks.iter().filter(|b| b.len() % 2 == 0).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExecutionRecord {
    pub n: usize,
    pub blocks: Vec<Vec<u64>>,
    pub complete: bool,
    pub decisions: BTreeMap<u64, Color>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimClassification {
    /// Class 1, 2 or 3 per participating process.
    pub classes: BTreeMap<u64, u8>,
    pub sim: BTreeSet<u64>,
}

impl ExecutionRecord {
    pub fn participating(&self) -> BTreeSet<u64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn dec(&self) -> BTreeSet<Color> {
        self.decisions.values().copied().collect()
    }

    pub fn sign(&self) -> i64 {
        sign_of(&self.blocks)
    }

    /// Whether every process decided `b`.
    pub fn univalued(&self, b: u64) -> bool {
        self.complete && self.decisions.values().all(|c| *c == Color::Single(b))
    }

    /// Classes relative to the first step at which every process has been
    /// activated. Without such a step every participant is class 3.
    pub fn classify(&self) -> SimClassification {
        let mut seen = BTreeSet::new();
        let mut first_full = None;
        for (i, b) in self.blocks.iter().enumerate() {
            seen.extend(b.iter().copied());
            if seen.len() == self.n {
                first_full = Some(i);
                break;
            }
        }
        let mut classes: BTreeMap<u64, u8> = self.participating().into_iter().map(|p| (p, 3)).collect();
        if let Some(i) = first_full {
            let before: BTreeSet<u64> = self.blocks[..i].iter().flatten().copied().collect();
            for &p in &self.blocks[i] {
                if !before.contains(&p) {
                    classes.insert(p, 1);
                }
            }
            for b in &self.blocks[i..] {
                for p in b {
                    if before.contains(p) {
                        classes.insert(*p, 2);
                    }
                }
            }
        }
        let sim = classes.iter().filter(|(_, &c)| c != 1).map(|(&p, _)| p).collect();
        SimClassification { classes, sim }
    }

    /// Blocks with every process renamed by `pi`.
    pub fn relabel(&self, pi: &Permutation) -> Vec<Vec<u64>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut r: Vec<u64> = b.iter().map(|&p| inputs::apply(pi, p)).collect();
                r.sort_unstable();
                r
            })
            .collect()
    }
}

fn clique(n: usize) -> Graph {
    build_graph(&GraphSpec::new(Shape::Clique(n))).expect("clique is a valid shape")
}

/// Every complete execution of `algo` on `n` processes, in depth-first order
/// with blocks tried in bitmask order.
pub fn enumerate_complete<A: Algorithm>(
    algo: &A,
    n: usize,
    step_bound: usize,
    allow_large: bool,
) -> Result<Vec<ExecutionRecord>, WsbError> {
    if n > ENUM_MAX_PROCESSES && !allow_large {
        return Err(WsbError::Guard { what: "execution enumeration".into(), n });
    }
    let graph = clique(n);
    let cfg = Configuration::initial(algo, &graph, &identity_inputs(&graph));
    if n == 0 {
        return Ok(vec![ExecutionRecord { n, blocks: Vec::new(), complete: true, decisions: BTreeMap::new() }]);
    }
    if step_bound == 0 {
        return Err(WsbError::StepBound { blocks: Vec::new() });
    }
    // Parallel over first blocks; concatenation keeps the sequential order.
    let firsts: Vec<Block> = subsets(&(1..=n as u64).collect::<Vec<_>>());
    let parts: Vec<Result<Vec<ExecutionRecord>, WsbError>> = firsts
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut cfg = cfg.clone();
            let mut blocks = Vec::new();
            let mut decisions = BTreeMap::new();
            descend(algo, &graph, &mut cfg, first, step_bound, &mut blocks, &mut decisions, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Nonempty subsets of `items` in bitmask order.
fn subsets(items: &[u64]) -> Vec<Block> {
    (1u32..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn descend<A: Algorithm>(
    algo: &A,
    graph: &Graph,
    cfg: &mut Configuration<A::State>,
    block: Block,
    budget: usize,
    blocks: &mut Vec<Vec<u64>>,
    decisions: &mut BTreeMap<u64, Color>,
    out: &mut Vec<ExecutionRecord>,
) -> Result<(), WsbError> {
    let saved = cfg.clone();
    let rec = step(cfg, &block, algo, graph)?;
    blocks.push(block.iter().copied().collect());
    for &(v, c) in &rec.decided {
        decisions.insert(v, c);
    }
    let live: Vec<u64> = (0..graph.len()).filter(|&i| !cfg.is_terminated(i)).map(|i| graph.id(i)).collect();
    if live.is_empty() {
        out.push(ExecutionRecord { n: graph.len(), blocks: blocks.clone(), complete: true, decisions: decisions.clone() });
    } else if budget == 1 {
        return Err(WsbError::StepBound { blocks: blocks.clone() });
    } else {
        for next in subsets(&live) {
            descend(algo, graph, cfg, next, budget - 1, blocks, decisions, out)?;
        }
    }
    for (v, _) in &rec.decided {
        decisions.remove(v);
    }
    blocks.pop();
    *cfg = saved;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub algorithm: String,
    pub n: usize,
    pub executions: usize,
    pub c0: usize,
    pub c1: usize,
    /// Sum of signs over all complete executions.
    pub sign_sum: i64,
    pub sign_sum_c0: i64,
    pub sign_sum_c1: i64,
    pub count: i64,
}

impl fmt::Display for CountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "algorithm={} n={} executions={} c0={} c1={} signs={} signs_c0={} signs_c1={} count={}",
            self.algorithm,
            self.n,
            self.executions,
            self.c0,
            self.c1,
            self.sign_sum,
            self.sign_sum_c0,
            self.sign_sum_c1,
            self.count
        )
    }
}

/// `sum_{C0} sign + (-1)^(n-1) sum_{C1} sign` over enumerated executions.
pub fn count_report(algorithm: &str, n: usize, execs: &[ExecutionRecord]) -> CountReport {
    let c0: Vec<&ExecutionRecord> = execs.iter().filter(|e| e.univalued(0)).collect();
    let c1: Vec<&ExecutionRecord> = execs.iter().filter(|e| e.univalued(1)).collect();
    let sign_sum_c0 = c0.iter().map(|e| e.sign()).sum::<i64>();
    let sign_sum_c1 = c1.iter().map(|e| e.sign()).sum::<i64>();
    let flip = if n % 2 == 1 { 1 } else { -1 };
    CountReport {
        algorithm: algorithm.to_string(),
        n,
        executions: execs.len(),
        c0: c0.len(),
        c1: c1.len(),
        sign_sum: execs.iter().map(ExecutionRecord::sign).sum(),
        sign_sum_c0,
        sign_sum_c1,
        count: sign_sum_c0 + flip * sign_sum_c1,
    }
}

pub fn univalued_signed_count<A: Algorithm>(
    algo: &A,
    n: usize,
    step_bound: usize,
    allow_large: bool,
) -> Result<CountReport, WsbError> {
    let execs = enumerate_complete(algo, n, step_bound, allow_large)?;
    Ok(count_report(&algo.name(), n, &execs))
}

/// `C(n, m) = 0 mod n` for every `1 <= m < n`, by Pascal's rule mod `n`.
pub fn binom_divisibility(n: u64) -> Result<Verdict, WsbError> {
    if !is_prime(n) {
        return Err(WsbError::NotPrime(n));
    }
    let row = binomial_row_mod(n, n);
    for (m, &r) in row.iter().enumerate().take(n as usize).skip(1) {
        if r != 0 {
            return Ok(Verdict::fail("binom", Witness::Binomial { n, m: m as u64, residue: r }));
        }
    }
    Ok(Verdict::pass("binom").with_note(format!("C({n}, m) = 0 mod {n} for 1 <= m < {n}")))
}

/// Row `n` of Pascal's triangle reduced mod `modulus`.
pub fn binomial_row_mod(n: u64, modulus: u64) -> Vec<u64> {
    let mut row = vec![1 % modulus];
    for _ in 0..n {
        let mut next = vec![1 % modulus; row.len() + 1];
        for k in 1..row.len() {
            next[k] = (row[k - 1] + row[k]) % modulus;
        }
        row = next;
    }
    row
}
