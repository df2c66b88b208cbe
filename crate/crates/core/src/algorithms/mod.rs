//! Node programs as `(init, next)` pairs.

mod compose;
mod linial;
mod save1;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::color::{mex, Color, NodeId};
use crate::engine::{Algorithm, AlgorithmError, Transition};
pub use compose::{compose, Composed, ComposedState, Identity, IdentityState};
pub use linial::{LinialState, WaitFreeLinial};
pub use save1::{
    map_pair, smaller_larger, special_neighborhood, special_termination, SaveOneMoreColor, SaveOneMoreState,
};

/// State `(x, a, b)` shared by the pair-valued cycle programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairState {
    pub x: u64,
    pub a: u64,
    pub b: u64,
}

impl PairState {
    pub fn new(x: u64, a: u64, b: u64) -> Self {
        PairState { x, a, b }
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.a, self.b)
    }
}

/// Decide `(a, b)` unless a visible neighbor shows the same pair; otherwise
/// recompute `a` from larger-`x` neighbors and `b` from smaller-`x` ones.
fn pair_rule(own: &PairState, snaps: &[Option<&PairState>]) -> Transition<PairState> {
    let seen = snaps.iter().flatten();
    if !seen.clone().any(|s| (s.a, s.b) == (own.a, own.b)) {
        return Transition::Decide(Color::Pair(own.a, own.b));
    }
    let a = mex(seen.clone().filter(|s| s.x > own.x).map(|s| s.a));
    let b = mex(seen.filter(|s| s.x < own.x).map(|s| s.b));
    Transition::Continue(PairState { x: own.x, a, b })
}

/// 6-coloring of cycles ordered by identifier.
#[derive(Clone, Copy, Debug, Default)]
pub struct CycleSixColoring;

impl Algorithm for CycleSixColoring {
    type State = PairState;

    fn name(&self) -> String {
        "six".into()
    }

    fn init(&self, id: NodeId, _input: u64) -> PairState {
        PairState::new(id, 0, 0)
    }

    fn next(&self, own: &PairState, snaps: &[Option<&PairState>]) -> Result<Transition<PairState>, AlgorithmError> {
        Ok(pair_rule(own, snaps))
    }
}

/// The same rule on any graph, ordered by an input proper coloring `x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SaveColors;

impl Algorithm for SaveColors {
    type State = PairState;

    fn name(&self) -> String {
        "save".into()
    }

    fn init(&self, _id: NodeId, input: u64) -> PairState {
        PairState::new(input, 0, 0)
    }

    fn next(&self, own: &PairState, snaps: &[Option<&PairState>]) -> Result<Transition<PairState>, AlgorithmError> {
        Ok(pair_rule(own, snaps))
    }
}

/// A 5-coloring program for cycles that can loop forever.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuggyFive;

impl Algorithm for BuggyFive {
    type State = PairState;

    fn name(&self) -> String {
        "buggy5".into()
    }

    fn init(&self, id: NodeId, _input: u64) -> PairState {
        PairState::new(id, 0, 0)
    }

    fn next(&self, own: &PairState, snaps: &[Option<&PairState>]) -> Result<Transition<PairState>, AlgorithmError> {
        let seen: Vec<&PairState> = snaps.iter().flatten().copied().collect();
        let all: Vec<u64> = seen.iter().flat_map(|s| [s.a, s.b]).collect();
        if !all.contains(&own.a) {
            return Ok(Transition::Decide(Color::Single(own.a)));
        }
        if !all.contains(&own.b) {
            return Ok(Transition::Decide(Color::Single(own.b)));
        }
        let larger = seen.iter().filter(|s| s.x > own.x).flat_map(|s| [s.a, s.b]);
        Ok(Transition::Continue(PairState { x: own.x, a: mex(larger), b: mex(all) }))
    }
}
