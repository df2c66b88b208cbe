use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::color::{Color, NodeId};
use crate::coverfree::{reduction_schedule, ReductionSchedule};
use crate::engine::{Algorithm, AlgorithmError, Transition};

/// The filled prefix `S[1..=i]` of the color array; the current round is its length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinialState {
    #[serde(rename = "S")]
    pub s: Vec<u64>,
}

impl LinialState {
    pub fn round(&self) -> usize {
        self.s.len()
    }
}

/// Linial's color reduction with one cover-free family per round.
#[derive(Clone, Debug)]
pub struct WaitFreeLinial {
    schedule: Arc<ReductionSchedule>,
}

impl WaitFreeLinial {
    pub fn new(id_bound: u64, delta: u64) -> Self {
        WaitFreeLinial { schedule: Arc::new(reduction_schedule(id_bound, delta)) }
    }

    pub fn with_schedule(schedule: ReductionSchedule) -> Self {
        WaitFreeLinial { schedule: Arc::new(schedule) }
    }

    pub fn schedule(&self) -> &ReductionSchedule {
        &self.schedule
    }

    pub fn rounds(&self) -> usize {
        self.schedule.rounds()
    }
}

impl Algorithm for WaitFreeLinial {
    type State = LinialState;

    fn name(&self) -> String {
        "linial".into()
    }

    fn init(&self, id: NodeId, _input: u64) -> LinialState {
        LinialState { s: vec![id] }
    }

    fn next(&self, own: &LinialState, snaps: &[Option<&LinialState>]) -> Result<Transition<LinialState>, AlgorithmError> {
        let t = self.schedule.rounds();
        let i = own.round();
        if t == 0 {
            return Ok(Transition::Decide(Color::Single(own.s[0])));
        }
        let fam = &self.schedule.families[i - 1];
        let in_range = |c: u64| fam.set(c).ok_or(AlgorithmError::ColorOutOfRange { color: c, size: fam.len() });
        let mine = in_range(own.s[i - 1])?;
        let mut excluded = Vec::new();
        for s in snaps.iter().flatten() {
            if let Some(&c) = s.s.get(i - 1) {
                excluded.extend(in_range(c)?);
            }
        }
        excluded.sort_unstable();
        let next = mine.iter().copied().find(|e| excluded.binary_search(e).is_err()).ok_or_else(|| {
            AlgorithmError::EmptyCandidateSet(format!("round {i}, color {} fully covered by neighbors", own.s[i - 1]))
        })?;
        if i == t {
            return Ok(Transition::Decide(Color::Single(next)));
        }
        let mut s = own.s.clone();
        s.push(next);
        Ok(Transition::Continue(LinialState { s }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_node_decides_within_palette() {
        let algo = WaitFreeLinial::new(10_000, 2);
        let mut st = algo.init(5000, 5000);
        let mut steps = 0;
        loop {
            steps += 1;
            match algo.next(&st, &[None, None]).unwrap() {
                Transition::Continue(s) => st = s,
                Transition::Decide(Color::Single(c)) => {
                    assert!((1..=algo.schedule().final_palette()).contains(&c));
                    break;
                }
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(steps, algo.rounds());
    }

    #[test]
    fn equal_colors_exhaust_candidates() {
        let algo = WaitFreeLinial::new(100, 2);
        let st = algo.init(7, 7);
        let twin = st.clone();
        assert!(matches!(algo.next(&st, &[Some(&twin)]), Err(AlgorithmError::EmptyCandidateSet(_))));
    }

    #[test]
    fn zero_rounds_decides_identifier() {
        let algo = WaitFreeLinial::new(12, 2);
        assert_eq!(algo.rounds(), 0);
        assert_eq!(algo.next(&algo.init(9, 9), &[]).unwrap(), Transition::Decide(Color::Single(9)));
    }
}
