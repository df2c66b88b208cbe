//! Many independent seeded executions checked in parallel.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_palette, check_parity_reduction, check_proper, check_termination, Palette, Verdict};
use crate::color::Color;
use crate::engine::{execute, Algorithm, EngineError, Graph, Inputs};
use crate::schedulers::Scheduling;

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub max_steps: u64,
    pub palette: Option<Palette>,
    /// Also require termination of every node that is never crashed.
    pub termination: bool,
    /// Also run the parity check (odd cycles, at most four colors).
    pub parity: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig { max_steps: 1_000_000, palette: None, termination: true, parity: false }
    }
}

/// Outcome of one seed.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub failures: Vec<Verdict>,
    pub colors: BTreeSet<Color>,
    pub max_runtime: u64,
    pub complete: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CampaignReport {
    pub runs: u64,
    pub failed_runs: u64,
    /// First failing seeds with their failed verdicts, lowest seeds first.
    pub failures: Vec<RunSummary>,
    pub colors: BTreeSet<Color>,
    pub max_runtime: u64,
    pub incomplete: u64,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failed_runs == 0
    }
}

const KEPT_FAILURES: usize = 8;

/// Runs `algo` once per seed on the instance `job(seed)` builds, in
/// parallel, aggregating in seed order.
pub fn campaign<A, F>(algo: &A, seeds: Range<u64>, config: &CampaignConfig, job: F) -> Result<CampaignReport, EngineError>
where
    A: Algorithm,
    F: Fn(u64) -> (Graph, Inputs, Scheduling) + Sync,
{
    let summaries: Vec<RunSummary> = seeds
        .into_par_iter()
        .map(|seed| {
            let (graph, inputs, sched) = job(seed);
            let trace = execute(algo, &graph, &inputs, &sched, config.max_steps)?;
            let mut verdicts = vec![check_proper(&trace)];
            if let Some(p) = &config.palette {
                verdicts.push(check_palette(&trace, p));
            }
            if config.termination {
                verdicts.push(check_termination(&trace));
            }
            if config.parity && trace.decisions().len() == graph.len() {
                if let Ok(v) = check_parity_reduction(&trace) {
                    verdicts.push(v);
                }
            }
            Ok(RunSummary {
                seed,
                failures: verdicts.into_iter().filter(|v| !v.pass).collect(),
                colors: trace.decisions().values().copied().collect(),
                max_runtime: trace.max_runtime(),
                complete: trace.is_complete(),
            })
        })
        .collect::<Result<_, EngineError>>()?;
    let mut report = CampaignReport::default();
    for s in summaries {
        report.runs += 1;
        report.colors.extend(s.colors.iter().copied());
        report.max_runtime = report.max_runtime.max(s.max_runtime);
        report.incomplete += !s.complete as u64;
        if !s.failures.is_empty() {
            report.failed_runs += 1;
            if report.failures.len() < KEPT_FAILURES {
                report.failures.push(s);
            }
        }
    }
    Ok(report)
}
