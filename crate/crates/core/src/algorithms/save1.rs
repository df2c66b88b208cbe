use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::color::{mex, Color, NodeId};
use crate::engine::{Algorithm, AlgorithmError, Transition};

/// State `(a, b, x, f, alpha, beta, z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SaveOneMoreState {
    pub a: u64,
    pub b: u64,
    pub x: u64,
    /// Identifiers of neighbors whose edge this node flipped.
    pub f: BTreeSet<NodeId>,
    pub alpha: bool,
    pub beta: bool,
    pub z: NodeId,
}

impl SaveOneMoreState {
    pub fn new(id: NodeId, x: u64) -> Self {
        SaveOneMoreState { a: 0, b: 0, x, f: BTreeSet::new(), alpha: false, beta: false, z: id }
    }
}

/// Identifies `(delta, 0)` with `(0, delta)`.
pub fn map_pair(a: u64, b: u64, delta: u64) -> (u64, u64) {
    if (a, b) == (delta, 0) {
        (0, delta)
    } else {
        (a, b)
    }
}

fn is_flipped(s: &SaveOneMoreState, t: &SaveOneMoreState) -> bool {
    s.f.contains(&t.z) || t.f.contains(&s.z)
}

/// Positions (0-based) of neighbors considered smaller and larger than `s`
/// under the flip-adjusted order. Bottom slots are in neither.
pub fn smaller_larger(s: &SaveOneMoreState, snaps: &[Option<&SaveOneMoreState>]) -> (Vec<usize>, Vec<usize>) {
    let mut smaller = Vec::new();
    let mut larger = Vec::new();
    for (i, t) in snaps.iter().enumerate() {
        let Some(t) = t else { continue };
        let flipped = is_flipped(s, t);
        if (!flipped && s.x > t.x) || (flipped && s.x < t.x) {
            smaller.push(i);
        }
        if (!flipped && s.x < t.x) || (flipped && s.x > t.x) {
            larger.push(i);
        }
    }
    (smaller, larger)
}

/// `snaps` must already be padded to `delta` slots.
pub fn special_neighborhood(s: &SaveOneMoreState, snaps: &[Option<&SaveOneMoreState>], delta: u64) -> bool {
    if snaps.len() as u64 != delta || snaps.iter().any(|t| t.is_none()) {
        return false;
    }
    let neighbors: Vec<&SaveOneMoreState> = snaps.iter().flatten().copied().collect();
    let low = |v: u64| v < delta;
    if !(low(s.a) && low(s.b) && neighbors.iter().all(|t| low(t.a) && low(t.b))) {
        return false;
    }
    s.alpha
        && s.beta
        && neighbors.iter().all(|t| {
            let (sm, lg) = smaller_larger(t, &[Some(s)]);
            (t.alpha || sm.len() == 1) && (t.beta || lg.len() == 1)
        })
}

pub fn special_termination(s: &SaveOneMoreState, snaps: &[Option<&SaveOneMoreState>], delta: u64) -> bool {
    special_neighborhood(s, snaps, delta) && snaps.iter().flatten().all(|t| s.x > t.x)
}

/// Color saving that also avoids `(delta, 0)` by flipping edges between
/// local extrema.
#[derive(Clone, Copy, Debug)]
pub struct SaveOneMoreColor {
    pub delta: u64,
}

impl SaveOneMoreColor {
    pub fn new(delta: u64) -> Self {
        SaveOneMoreColor { delta }
    }
}

impl Algorithm for SaveOneMoreColor {
    type State = SaveOneMoreState;

    fn name(&self) -> String {
        "save1".into()
    }

    fn init(&self, id: NodeId, input: u64) -> SaveOneMoreState {
        SaveOneMoreState::new(id, input)
    }

    fn next(
        &self,
        own: &SaveOneMoreState,
        snaps: &[Option<&SaveOneMoreState>],
    ) -> Result<Transition<SaveOneMoreState>, AlgorithmError> {
        let delta = self.delta;
        if snaps.len() as u64 > delta {
            return Err(AlgorithmError::DegreeTooLarge { degree: snaps.len(), delta: delta as usize });
        }
        let mut padded = snaps.to_vec();
        padded.resize(delta as usize, None);
        let seen = padded.iter().flatten();

        let mine = map_pair(own.a, own.b, delta);
        if !seen.clone().any(|t| map_pair(t.a, t.b, delta) == mine) {
            return Ok(Transition::Decide(Color::Pair(mine.0, mine.1)));
        }
        let mut s = own.clone();
        if s.a == delta || s.b == delta {
            s.f.extend(seen.filter(|t| t.a == delta || t.b == delta).map(|t| t.z));
        }
        let (smaller, larger) = smaller_larger(&s, &padded);
        s.a = mex(larger.iter().map(|&i| padded[i].unwrap().a));
        s.b = mex(smaller.iter().map(|&i| padded[i].unwrap().b));
        s.alpha |= !smaller.is_empty();
        s.beta |= !larger.is_empty();
        if special_termination(&s, &padded, delta) {
            return Ok(Transition::Decide(Color::Pair(0, delta)));
        }
        Ok(Transition::Continue(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(z: NodeId, x: u64, a: u64, b: u64) -> SaveOneMoreState {
        SaveOneMoreState { a, b, x, f: BTreeSet::new(), alpha: false, beta: false, z }
    }

    #[test]
    fn map_examples() {
        assert_eq!(map_pair(2, 0, 2), (0, 2));
        assert_eq!(map_pair(0, 2, 2), (0, 2));
        assert_eq!(map_pair(1, 1, 2), (1, 1));
    }

    #[test]
    fn order_examples() {
        let s = st(10, 5, 0, 0);
        let (n1, n2) = (st(11, 3, 0, 0), st(12, 7, 0, 0));
        assert_eq!(smaller_larger(&s, &[Some(&n1), Some(&n2)]), (vec![0], vec![1]));
        let mut flipped = s.clone();
        flipped.f.insert(12);
        assert_eq!(smaller_larger(&flipped, &[Some(&n1), Some(&n2)]), (vec![0, 1], vec![]));
        assert_eq!(smaller_larger(&s, &[None, None]), (vec![], vec![]));
    }

    #[test]
    fn special_termination_guards() {
        let mut s = st(1, 9, 0, 1);
        s.alpha = true;
        s.beta = true;
        let n = st(2, 3, 1, 0);
        assert!(!special_termination(&s, &[Some(&n), None], 2));
        let mut high = s.clone();
        high.a = 2;
        assert!(!special_termination(&high, &[Some(&n), Some(&n)], 2));
    }

    #[test]
    fn lone_node_decides_zero_pair() {
        let algo = SaveOneMoreColor::new(2);
        assert_eq!(algo.next(&st(1, 4, 0, 0), &[None, None]).unwrap(), Transition::Decide(Color::Pair(0, 0)));
        assert!(matches!(
            algo.next(&st(1, 4, 0, 0), &[None, None, None]),
            Err(AlgorithmError::DegreeTooLarge { degree: 3, delta: 2 })
        ));
    }

    #[test]
    fn opposite_extreme_pairs_flip() {
        let algo = SaveOneMoreColor::new(2);
        // v = (2,0) sees u = (0,2) and another neighbor; Map makes them clash.
        let v = st(1, 1, 2, 0);
        let u = st(2, 9, 0, 2);
        let w = st(3, 5, 1, 1);
        match algo.next(&v, &[Some(&u), Some(&w)]).unwrap() {
            Transition::Continue(next) => assert!(next.f.contains(&2)),
            other => panic!("expected a flip, got {other:?}"),
        }
        match algo.next(&u, &[Some(&v), Some(&w)]).unwrap() {
            Transition::Continue(next) => assert!(next.f.contains(&1)),
            other => panic!("expected a flip, got {other:?}"),
        }
    }
}
