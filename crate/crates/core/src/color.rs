use std::fmt;

use serde::{Deserialize, Serialize};

/// Node identifier, a positive integer bounded by the graph's identifier bound.
pub type NodeId = u64;

/// An output value decided by a node.
///
/// Pair-valued outputs come from the `(a, b)` family of algorithms; single
/// integers from Linial's reduction, the 5-coloring program, and the
/// shared-memory toys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Color {
    Single(u64),
    Pair(u64, u64),
}

impl Color {
    pub fn as_single(&self) -> Option<u64> {
        match *self {
            Color::Single(c) => Some(c),
            Color::Pair(..) => None,
        }
    }

    pub fn as_pair(&self) -> Option<(u64, u64)> {
        match *self {
            Color::Pair(a, b) => Some((a, b)),
            Color::Single(_) => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Single(c) => write!(f, "{c}"),
            Color::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// Least natural number not contained in `values`.
pub fn mex<I: IntoIterator<Item = u64>>(values: I) -> u64 {
    let mut seen: Vec<u64> = values.into_iter().collect();
    seen.sort_unstable();
    seen.dedup();
    let mut candidate = 0;
    for v in seen {
        if v == candidate {
            candidate += 1;
        } else if v > candidate {
            break;
        }
    }
    candidate
}
