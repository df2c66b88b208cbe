//! Golden executions: every old/new register cell of two published
//! execution tables, embedded verbatim and compared cell by cell.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use super::{Verdict, Witness};
use crate::algorithms::{BuggyFive, CycleSixColoring, PairState};
use crate::color::{Color, NodeId};
use crate::engine::graph::{build_graph, GraphSpec, Shape};
use crate::engine::{
    detect_livelock, identity_inputs, step, Algorithm, Block, Configuration, EngineError, Graph, LivelockCertificate,
    NodeState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table {
    /// 6-coloring on C5 with identifiers (3,5,4,1,6).
    One,
    /// The looping 5-coloring program on C4 with identifiers (3,4,2,1).
    Two,
}

impl FromStr for Table {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table1" => Ok(Table::One),
            "table2" => Ok(Table::Two),
            other => Err(format!("unknown table `{other}` (expected table1 or table2)")),
        }
    }
}

/// Columns in table order, then rows of `old new` cell pairs separated by `|`.
const TABLE_ONE_IDS: [NodeId; 5] = [3, 5, 4, 1, 6];
const TABLE_ONE_SCHEDULE: [&[NodeId]; 5] = [&[1, 3, 5], &[4, 5], &[3, 4], &[6], &[6]];
const TABLE_ONE_ROWS: &[&str] = &[
    "⊥ (3,0,0) | ⊥ (5,0,0) | ⊥ (4,0,0) | ⊥ (1,0,0) | ⊥ (6,0,0)",
    "(3,0,0) (3,0,0) | (5,0,0) (5,0,0) | ⊥ (4,0,0) | (1,0,0) (1,0,0) | ⊥ (6,0,0)",
    "(3,0,0) (3,1,0) | (5,0,0) (5,0,1) | ⊥ (4,0,0) | (1,0,0) T(0,0) | ⊥ (6,0,0)",
    "(3,0,0) (3,1,0) | (5,0,1) (5,0,1) | (4,0,0) (4,0,0) | (1,0,0) T(0,0) | ⊥ (6,0,0)",
    "(3,0,0) (3,1,0) | (5,0,1) T(0,1) | (4,0,0) (4,1,1) | (1,0,0) T(0,0) | ⊥ (6,0,0)",
    "(3,1,0) (3,1,0) | (5,0,1) T(0,1) | (4,1,1) (4,1,1) | (1,0,0) T(0,0) | ⊥ (6,0,0)",
    "(3,1,0) T(1,0) | (5,0,1) T(0,1) | (4,1,1) T(1,1) | (1,0,0) T(0,0) | ⊥ (6,0,0)",
    "(3,1,0) T(1,0) | (5,0,1) T(0,1) | (4,1,1) T(1,1) | (1,0,0) T(0,0) | (6,0,0) (6,0,0)",
    "(3,1,0) T(1,0) | (5,0,1) T(0,1) | (4,1,1) T(1,1) | (1,0,0) T(0,0) | (6,0,0) (6,0,1)",
    "(3,1,0) T(1,0) | (5,0,1) T(0,1) | (4,1,1) T(1,1) | (1,0,0) T(0,0) | (6,0,1) (6,0,1)",
    "(3,1,0) T(1,0) | (5,0,1) T(0,1) | (4,1,1) T(1,1) | (1,0,0) T(0,0) | (6,0,1) T(0,1)",
];
const TABLE_ONE_DECISIONS: [(NodeId, Color); 5] = [
    (3, Color::Pair(1, 0)),
    (5, Color::Pair(0, 1)),
    (4, Color::Pair(1, 1)),
    (1, Color::Pair(0, 0)),
    (6, Color::Pair(0, 1)),
];

const TABLE_TWO_IDS: [NodeId; 4] = [3, 4, 2, 1];
const TABLE_TWO_SCHEDULE: [&[NodeId]; 4] = [&[2, 3, 4], &[1, 3, 4], &[3, 4], &[3, 4]];
const TABLE_TWO_ROWS: &[&str] = &[
    "⊥ (3,0,0) | ⊥ (4,0,0) | ⊥ (2,0,0) | ⊥ (1,0,0)",
    "(3,0,0) (3,0,0) | (4,0,0) (4,0,0) | (2,0,0) (2,0,0) | ⊥ (1,0,0)",
    "(3,0,0) (3,1,1) | (4,0,0) (4,0,1) | (2,0,0) (2,1,1) | ⊥ (1,0,0)",
    "(3,1,1) (3,1,1) | (4,0,1) (4,0,1) | (2,0,0) (2,1,1) | (1,0,0) (1,0,0)",
    "(3,1,1) (3,2,2) | (4,0,1) (4,0,2) | (2,0,0) (2,1,1) | (1,0,0) (1,2,2)",
    "(3,2,2) (3,2,2) | (4,0,2) (4,0,2) | (2,0,0) (2,1,1) | (1,0,0) (1,2,2)",
    "(3,2,2) (3,1,1) | (4,0,2) (4,0,1) | (2,0,0) (2,1,1) | (1,0,0) (1,2,2)",
    "(3,1,1) (3,1,1) | (4,0,1) (4,0,1) | (2,0,0) (2,1,1) | (1,0,0) (1,2,2)",
    "(3,1,1) (3,2,2) | (4,0,1) (4,0,2) | (2,0,0) (2,1,1) | (1,0,0) (1,2,2)",
];

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub table: String,
    pub verdict: Verdict,
    pub decisions: BTreeMap<NodeId, Color>,
    pub runtimes: BTreeMap<NodeId, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<LivelockCertificate<PairState>>,
}

fn cell(state: &NodeState<PairState>) -> String {
    match state {
        NodeState::Bottom => "⊥".into(),
        NodeState::Running(s) => s.to_string(),
        NodeState::Terminated(Color::Pair(a, b)) => format!("T({a},{b})"),
        NodeState::Terminated(Color::Single(c)) => format!("T({c})"),
    }
}

fn row_label(row: usize, schedule: &[&[NodeId]]) -> String {
    if row == 0 {
        return "initialization".into();
    }
    let blk = schedule[(row - 1) / 2].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    let phase = if row % 2 == 1 { "after write" } else { "update" };
    format!("step {} {{{blk}}} {phase}", row.div_ceil(2))
}

fn compare_row(
    expected: &str,
    actual: &[(NodeState<PairState>, NodeState<PairState>)],
    ids: &[NodeId],
    label: &str,
) -> Option<Witness> {
    for ((exp, (old, new)), &node) in expected.split('|').zip(actual).zip(ids) {
        let mut parts = exp.split_whitespace();
        for (column, got) in [("old", cell(old)), ("new", cell(new))] {
            let want = parts.next().unwrap_or("");
            if want != got {
                return Some(Witness::Cell {
                    row: label.into(),
                    node,
                    column: column.into(),
                    expected: want.into(),
                    actual: got,
                });
            }
        }
    }
    None
}

fn snapshot(cfg: &Configuration<PairState>, g: &Graph, ids: &[NodeId]) -> Vec<(NodeState<PairState>, NodeState<PairState>)> {
    ids.iter()
        .map(|&v| {
            let r = cfg.node(g, v).unwrap();
            (r.old.clone(), r.new.clone())
        })
        .collect()
}

/// Drives the schedule step by step, checking the after-write and update rows.
/// Final graph, configuration, first mismatching cell and runtimes.
type Replayed = (Graph, Configuration<PairState>, Option<Witness>, BTreeMap<NodeId, u64>);

fn replay_rows<A: Algorithm<State = PairState>>(
    algo: &A,
    ids: &[NodeId],
    schedule: &[&[NodeId]],
    rows: &[&str],
) -> Result<Replayed, EngineError> {
    let g = build_graph(&GraphSpec::new(Shape::Cycle(ids.len())).with_ids(ids.to_vec())).expect("fixture graph");
    let mut cfg = Configuration::initial(algo, &g, &identity_inputs(&g));
    let mut runtimes: BTreeMap<NodeId, u64> = ids.iter().map(|&v| (v, 0)).collect();
    if let Some(w) = compare_row(rows[0], &snapshot(&cfg, &g, ids), ids, &row_label(0, schedule)) {
        return Ok((g, cfg, Some(w), runtimes));
    }
    for (k, blk) in schedule.iter().enumerate() {
        let block: Block = blk.iter().copied().collect();
        let mut written = snapshot(&cfg, &g, ids);
        for (i, v) in ids.iter().enumerate() {
            if block.contains(v) && !written[i].1.is_terminated() {
                written[i].0 = written[i].1.clone();
                *runtimes.get_mut(v).unwrap() += 1;
            }
        }
        if let Some(w) = compare_row(rows[2 * k + 1], &written, ids, &row_label(2 * k + 1, schedule)) {
            return Ok((g, cfg, Some(w), runtimes));
        }
        step(&mut cfg, &block, algo, &g)?;
        if let Some(w) = compare_row(rows[2 * k + 2], &snapshot(&cfg, &g, ids), ids, &row_label(2 * k + 2, schedule)) {
            return Ok((g, cfg, Some(w), runtimes));
        }
    }
    Ok((g, cfg, None, runtimes))
}

pub fn reproduce_table(which: Table) -> Result<TableReport, EngineError> {
    match which {
        Table::One => {
            let (g, cfg, mismatch, runtimes) =
                replay_rows(&CycleSixColoring, &TABLE_ONE_IDS, &TABLE_ONE_SCHEDULE, TABLE_ONE_ROWS)?;
            let decisions: BTreeMap<NodeId, Color> = TABLE_ONE_IDS
                .iter()
                .filter_map(|&v| cfg.node(&g, v).unwrap().new.decision().map(|c| (v, c)))
                .collect();
            let verdict = match mismatch {
                Some(w) => Verdict::fail("table1", w),
                None => match TABLE_ONE_DECISIONS.iter().find(|(v, c)| decisions.get(v) != Some(c)) {
                    Some(&(v, c)) => Verdict::fail(
                        "table1",
                        Witness::Cell {
                            row: "decisions".into(),
                            node: v,
                            column: "decision".into(),
                            expected: c.to_string(),
                            actual: decisions.get(&v).map(|d| d.to_string()).unwrap_or_else(|| "none".into()),
                        },
                    ),
                    None => Verdict::pass("table1"),
                },
            };
            Ok(TableReport { table: "table1".into(), verdict, decisions, runtimes, certificate: None })
        }
        Table::Two => {
            let (g, _, mismatch, runtimes) =
                replay_rows(&BuggyFive, &TABLE_TWO_IDS, &TABLE_TWO_SCHEDULE, TABLE_TWO_ROWS)?;
            let block = |ids: &[NodeId]| ids.iter().copied().collect::<Block>();
            let cert = detect_livelock(
                &BuggyFive,
                &g,
                &identity_inputs(&g),
                &[block(&[2, 3, 4]), block(&[1, 3, 4])],
                &[block(&[3, 4])],
                64,
            )?;
            let verdict = match (&mismatch, &cert) {
                (Some(w), _) => Verdict::fail("table2", w.clone()),
                (None, None) => Verdict::fail("table2", Witness::Message { text: "no configuration repeated".into() }),
                (None, Some(c)) => {
                    let state = |v: NodeId| {
                        let r = &c.configuration[&v];
                        (cell(&r.old), cell(&r.new))
                    };
                    let expected_three = ("(3,1,1)".to_string(), "(3,2,2)".to_string());
                    let expected_four = ("(4,0,1)".to_string(), "(4,0,2)".to_string());
                    if c.cycle_steps != 2 {
                        Verdict::fail(
                            "table2",
                            Witness::Livelock {
                                first_boundary: c.first_boundary,
                                repeat_boundary: c.repeat_boundary,
                                cycle_steps: c.cycle_steps,
                            },
                        )
                    } else if state(3) != expected_three || state(4) != expected_four {
                        Verdict::fail("table2", Witness::Message { text: "repeated configuration differs".into() })
                    } else {
                        Verdict::pass("table2").with_note(format!(
                            "configuration after period boundary {} reappears at boundary {} ({} steps)",
                            c.first_boundary, c.repeat_boundary, c.cycle_steps
                        ))
                    }
                }
            };
            Ok(TableReport { table: "table2".into(), verdict, decisions: BTreeMap::new(), runtimes, certificate: cert })
        }
    }
}
