use serde::{Deserialize, Serialize};

use crate::color::{Color, NodeId};
use crate::engine::{Algorithm, AlgorithmError, Transition};

/// Published state of a two-phase node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "lowercase")]
pub enum ComposedState<S1, S2> {
    First {
        id: NodeId,
        state: S1,
    },
    Second {
        id: NodeId,
        /// The phase-1 state this node published last; phase-1 readers keep seeing it.
        first: S1,
        decision: u64,
        state: S2,
    },
}

impl<S1, S2> ComposedState<S1, S2> {
    pub fn second_state(&self) -> Option<&S2> {
        match self {
            ComposedState::Second { state, .. } => Some(state),
            ComposedState::First { .. } => None,
        }
    }
}

/// Runs `first` to termination, then `second` with the first output as input.
///
/// A phase-2 reader sees phase-1 neighbors as bottom. A phase-1 reader sees a
/// phase-2 neighbor as the frozen phase-1 state it last published, exactly
/// what it would read if that neighbor had simply terminated.
#[derive(Clone, Debug)]
pub struct Composed<A1, A2> {
    pub first: A1,
    pub second: A2,
}

pub fn compose<A1: Algorithm, A2: Algorithm>(first: A1, second: A2) -> Composed<A1, A2> {
    Composed { first, second }
}

impl<A1: Algorithm, A2: Algorithm> Algorithm for Composed<A1, A2> {
    type State = ComposedState<A1::State, A2::State>;

    fn name(&self) -> String {
        format!("{}+{}", self.first.name(), self.second.name())
    }

    fn init(&self, id: NodeId, input: u64) -> Self::State {
        ComposedState::First { id, state: self.first.init(id, input) }
    }

    fn next(&self, own: &Self::State, snaps: &[Option<&Self::State>]) -> Result<Transition<Self::State>, AlgorithmError> {
        match own {
            ComposedState::First { id, state } => {
                let view: Vec<Option<&A1::State>> = snaps
                    .iter()
                    .map(|s| {
                        s.map(|s| match s {
                            ComposedState::First { state, .. } => state,
                            ComposedState::Second { first, .. } => first,
                        })
                    })
                    .collect();
                match self.first.next(state, &view)? {
                    Transition::Continue(next) => Ok(Transition::Continue(ComposedState::First { id: *id, state: next })),
                    Transition::Decide(Color::Single(c)) => Ok(Transition::Continue(ComposedState::Second {
                        id: *id,
                        first: state.clone(),
                        decision: c,
                        state: self.second.init(*id, c),
                    })),
                    Transition::Decide(other) => Err(AlgorithmError::PhaseInput(other)),
                }
            }
            ComposedState::Second { id, first, decision, state } => {
                let view: Vec<Option<&A2::State>> = snaps
                    .iter()
                    .map(|s| match s {
                        Some(ComposedState::Second { state, .. }) => Some(state),
                        _ => None,
                    })
                    .collect();
                Ok(match self.second.next(state, &view)? {
                    Transition::Continue(next) => Transition::Continue(ComposedState::Second {
                        id: *id,
                        first: first.clone(),
                        decision: *decision,
                        state: next,
                    }),
                    Transition::Decide(c) => Transition::Decide(c),
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdentityState {
    pub input: u64,
}

/// Outputs its input at the first activation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl Algorithm for Identity {
    type State = IdentityState;

    fn name(&self) -> String {
        "identity".into()
    }

    fn init(&self, _id: NodeId, input: u64) -> IdentityState {
        IdentityState { input }
    }

    fn next(&self, own: &IdentityState, _snaps: &[Option<&IdentityState>]) -> Result<Transition<IdentityState>, AlgorithmError> {
        Ok(Transition::Decide(Color::Single(own.input)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{CycleSixColoring, SaveColors};

    #[test]
    fn pair_output_cannot_feed_phase_two() {
        let algo = compose(CycleSixColoring, SaveColors);
        let st = algo.init(1, 1);
        assert_eq!(algo.next(&st, &[None, None]), Err(AlgorithmError::PhaseInput(Color::Pair(0, 0))));
    }

    #[test]
    fn phase_two_reader_ignores_phase_one_neighbors() {
        let algo = compose(Identity, SaveColors);
        let ahead = algo.init(1, 5);
        let Transition::Continue(ahead2) = algo.next(&ahead, &[]).unwrap() else { panic!() };
        let behind = algo.init(2, 8);
        // `ahead2` is in phase 2 and its only neighbor is still in phase 1.
        assert_eq!(algo.next(&ahead2, &[Some(&behind)]).unwrap(), Transition::Decide(Color::Pair(0, 0)));
    }
}
