//! Execution records and their newline-delimited JSON form.
//!
//! A trace file is a header record, one record per step, and a closing
//! record with decisions and runtimes:
//!
//! ```text
//! {"record":"header","algorithm":"six","graph_hash":"…","graph":{…},"inputs":{…},"scheduler":"sync","seed":null}
//! {"record":"step","step":1,"scheduled":[1,3,5],"reads":[…],"decided":[[1,[0,0]]]}
//! {"record":"end","stop":"all_terminated","complete":true,…}
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Block, Graph, NodeState};
use crate::color::{Color, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: String,
    pub graph_hash: String,
    pub graph: Graph,
    pub inputs: BTreeMap<NodeId, u64>,
    pub scheduler: String,
    pub seed: Option<u64>,
    /// Degree bound the algorithm was configured with, when it takes one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<u64>,
}

/// What one activated node read and computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRead<S> {
    pub node: NodeId,
    /// Published neighbor states in identifier order; `None` is bottom.
    pub snapshot: Vec<(NodeId, Option<S>)>,
    pub new: NodeState<S>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord<S> {
    pub step: u64,
    pub scheduled: Vec<NodeId>,
    pub reads: Vec<NodeRead<S>>,
    pub decided: Vec<(NodeId, Color)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllTerminated,
    ScheduleExhausted,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEnd {
    pub stop: StopReason,
    /// Every activated, non-crashed node decided.
    pub complete: bool,
    pub crashed: Vec<NodeId>,
    pub undecided: Vec<NodeId>,
    pub decisions: BTreeMap<NodeId, Color>,
    pub decided_at: BTreeMap<NodeId, u64>,
    pub runtimes: BTreeMap<NodeId, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace<S> {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord<S>>,
    pub end: TraceEnd,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record<S> {
    Header(TraceHeader),
    Step(StepRecord<S>),
    End(TraceEnd),
}

impl<S: DeserializeOwned> Record<S> {
    /// Dispatches on the tag by hand: serde's buffered tagged-enum path
    /// cannot read the integer map keys the records contain.
    fn parse(line: &str) -> Result<Self, serde_json::Error> {
        use serde::de::Error;
        let mut value: serde_json::Value = serde_json::from_str(line)?;
        let tag = value
            .as_object_mut()
            .and_then(|o| o.remove("record"))
            .ok_or_else(|| serde_json::Error::missing_field("record"))?;
        match tag.as_str() {
            Some("header") => serde_json::from_value(value).map(Record::Header),
            Some("step") => serde_json::from_value(value).map(Record::Step),
            Some("end") => serde_json::from_value(value).map(Record::End),
            _ => Err(serde_json::Error::unknown_variant(&tag.to_string(), &["header", "step", "end"])),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace has no header record")]
    MissingHeader,
    #[error("trace has no end record")]
    MissingEnd,
    #[error("line {0}: record out of order")]
    OutOfOrder(usize),
}

impl<S> Trace<S> {
    pub fn graph(&self) -> &Graph {
        &self.header.graph
    }

    pub fn decisions(&self) -> &BTreeMap<NodeId, Color> {
        &self.end.decisions
    }

    pub fn is_complete(&self) -> bool {
        self.end.complete
    }

    /// The executed blocks, in order.
    pub fn scheduling(&self) -> Vec<Block> {
        self.steps.iter().map(|s| s.scheduled.iter().copied().collect()).collect()
    }

    pub fn max_runtime(&self) -> u64 {
        self.end.runtimes.values().copied().max().unwrap_or(0)
    }

    pub fn map_states<T>(&self, mut f: impl FnMut(&S) -> T) -> Trace<T> {
        Trace {
            header: self.header.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord {
                    step: s.step,
                    scheduled: s.scheduled.clone(),
                    reads: s
                        .reads
                        .iter()
                        .map(|r| NodeRead {
                            node: r.node,
                            snapshot: r.snapshot.iter().map(|(v, st)| (*v, st.as_ref().map(&mut f))).collect(),
                            new: r.new.map(&mut f),
                        })
                        .collect(),
                    decided: s.decided.clone(),
                })
                .collect(),
            end: self.end.clone(),
        }
    }
}

impl<S: Serialize> Trace<S> {
    /// Type-erased copy whose states are JSON values.
    pub fn erase(&self) -> Trace<serde_json::Value> {
        self.map_states(|s| serde_json::to_value(s).expect("state serializes"))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &Record::<S>::Header(self.header.clone()))?;
        out.write_all(b"\n")?;
        for s in &self.steps {
            serde_json::to_writer(&mut out, &StepRef(s))?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut out, &Record::<S>::End(self.end.clone()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// Serializes a borrowed step as a `"record":"step"` line without cloning.
struct StepRef<'a, S>(&'a StepRecord<S>);

impl<S: Serialize> Serialize for StepRef<'_, S> {
    fn serialize<Ser: serde::Serializer>(&self, ser: Ser) -> Result<Ser::Ok, Ser::Error> {
        #[derive(Serialize)]
        struct Tagged<'a, S> {
            record: &'static str,
            #[serde(flatten)]
            step: &'a StepRecord<S>,
        }
        Tagged { record: "step", step: self.0 }.serialize(ser)
    }
}

impl<S: DeserializeOwned> Trace<S> {
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceFormatError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut end = None;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = Record::<S>::parse(&line).map_err(|source| TraceFormatError::Json { line: n + 1, source })?;
            match record {
                Record::Header(h) if header.is_none() && end.is_none() => header = Some(h),
                Record::Step(s) if header.is_some() && end.is_none() => steps.push(s),
                Record::End(e) if header.is_some() && end.is_none() => end = Some(e),
                _ => return Err(TraceFormatError::OutOfOrder(n + 1)),
            }
        }
        Ok(Trace {
            header: header.ok_or(TraceFormatError::MissingHeader)?,
            steps,
            end: end.ok_or(TraceFormatError::MissingEnd)?,
        })
    }
}
