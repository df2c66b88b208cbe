//! Small wait-free shared-memory programs with 0/1 outputs, and the
//! trimming transformation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::color::{Color, NodeId};
use crate::engine::{Algorithm, AlgorithmError, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToyState {
    pub id: NodeId,
    pub activations: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toy {
    /// Outputs 0 at the first activation.
    Const0,
    /// Outputs 1 at the first activation.
    Const1,
    /// Outputs `id mod 2` at the first activation.
    IdParity,
    /// Outputs 1 at the first activation iff it saw at least `k` others.
    SawOthers(usize),
    /// Outputs, at the second activation, the parity of the number of others seen.
    TwoStep,
}

/// Toys exercised by the test suites.
pub const TOY_NAMES: &[&str] = &["const0", "const1", "id-parity", "saw-others:1", "saw-others:2", "two-step"];

impl FromStr for Toy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "const0" => Toy::Const0,
            "const1" => Toy::Const1,
            "id-parity" => Toy::IdParity,
            "two-step" => Toy::TwoStep,
            _ => match s.strip_prefix("saw-others:").map(str::parse) {
                Some(Ok(k)) => Toy::SawOthers(k),
                _ => return Err(format!("unknown toy algorithm `{s}`")),
            },
        })
    }
}

impl fmt::Display for Toy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Toy::Const0 => write!(f, "const0"),
            Toy::Const1 => write!(f, "const1"),
            Toy::IdParity => write!(f, "id-parity"),
            Toy::SawOthers(k) => write!(f, "saw-others:{k}"),
            Toy::TwoStep => write!(f, "two-step"),
        }
    }
}

impl Algorithm for Toy {
    type State = ToyState;

    fn name(&self) -> String {
        self.to_string()
    }

    fn init(&self, id: NodeId, _input: u64) -> ToyState {
        ToyState { id, activations: 0 }
    }

    fn next(&self, own: &ToyState, snaps: &[Option<&ToyState>]) -> Result<Transition<ToyState>, AlgorithmError> {
        let seen = snaps.iter().flatten().count();
        let out = |b: bool| Ok(Transition::Decide(Color::Single(b as u64)));
        match self {
            Toy::Const0 => out(false),
            Toy::Const1 => out(true),
            Toy::IdParity => out(own.id % 2 == 1),
            Toy::SawOthers(k) => out(seen >= *k),
            Toy::TwoStep if own.activations == 0 => {
                Ok(Transition::Continue(ToyState { id: own.id, activations: 1 }))
            }
            Toy::TwoStep => out(seen % 2 == 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrimState<S> {
    pub inner: S,
    pub activated: bool,
}

/// The trimmed program: a process that sees every other process stops,
/// outputting 0 if this is its first activation and 1 otherwise.
#[derive(Clone, Debug)]
pub struct Trimmed<A> {
    pub inner: A,
    pub n: usize,
}

pub fn trim<A: Algorithm>(inner: A, n: usize) -> Trimmed<A> {
    Trimmed { inner, n }
}

impl<A: Algorithm> Algorithm for Trimmed<A> {
    type State = TrimState<A::State>;

    fn name(&self) -> String {
        format!("trim({})", self.inner.name())
    }

    fn init(&self, id: NodeId, input: u64) -> Self::State {
        TrimState { inner: self.inner.init(id, input), activated: false }
    }

    fn next(&self, own: &Self::State, snaps: &[Option<&Self::State>]) -> Result<Transition<Self::State>, AlgorithmError> {
        if snaps.len() + 1 == self.n && snaps.iter().all(Option::is_some) {
            return Ok(Transition::Decide(Color::Single(own.activated as u64)));
        }
        let view: Vec<Option<&A::State>> = snaps.iter().map(|s| s.map(|s| &s.inner)).collect();
        Ok(match self.inner.next(&own.inner, &view)? {
            Transition::Continue(inner) => Transition::Continue(TrimState { inner, activated: true }),
            Transition::Decide(c) => Transition::Decide(c),
        })
    }
}
