//! Input functions `sigma: [n] -> [n]* x I`, their conjugation by
//! permutations, and the family checks.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{ExecutionRecord, WsbError};
use crate::coverfree::is_prime;

/// `entries[i - 1]` is process `i`'s identifier list and input value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputFunction {
    pub entries: Vec<(Vec<u64>, String)>,
}

/// Relabeled blocks paired with the relabeled input function.
pub type ClassMember = (Vec<Vec<u64>>, InputFunction);

/// A permutation of `1..=n` as `image[i - 1] = pi(i)`.
pub type Permutation = Vec<u64>;

pub fn apply(pi: &Permutation, i: u64) -> u64 {
    pi[(i - 1) as usize]
}

pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    (1..=n as u64).permutations(n)
}

impl InputFunction {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// The relabeled function `sigma'` with `sigma'(pi(i)) = (pi(ids of sigma(i)), x)`.
    pub fn conjugate(&self, pi: &Permutation) -> InputFunction {
        let mut entries = vec![(Vec::new(), String::new()); self.n()];
        for (i, (ids, x)) in self.entries.iter().enumerate() {
            let target = apply(pi, i as u64 + 1);
            entries[(target - 1) as usize] = (ids.iter().map(|&j| apply(pi, j)).collect(), x.clone());
        }
        InputFunction { entries }
    }
}

/// Both neighbors on a directed ring: `sigma(i) = (sigma_l(i), sigma_r(i))`
/// for every `n`-cycle `sigma_r` and `sigma_l` its inverse.
pub fn cycle_family(n: usize) -> Vec<InputFunction> {
    if n == 0 {
        return Vec::new();
    }
    // Fix 1 first to enumerate each cyclic order once.
    (2..=n as u64)
        .permutations(n - 1)
        .map(|rest| {
            let order: Vec<u64> = std::iter::once(1).chain(rest).collect();
            let mut right = vec![0; n];
            let mut left = vec![0; n];
            for k in 0..n {
                let (a, b) = (order[k], order[(k + 1) % n]);
                right[(a - 1) as usize] = b;
                left[(b - 1) as usize] = a;
            }
            InputFunction { entries: (0..n).map(|i| (vec![left[i], right[i]], String::new())).collect() }
        })
        .collect()
}

/// Exactly `k` processes have input 1, the rest input 0.
pub fn exactly_k_family(n: usize, k: usize) -> Vec<InputFunction> {
    (0..n)
        .combinations(k)
        .map(|ones| InputFunction {
            entries: (0..n).map(|i| (Vec::new(), if ones.contains(&i) { "1" } else { "0" }.to_string())).collect(),
        })
        .collect()
}

/// Process 1 is the leader; everybody else is defeated.
pub fn leader_family(n: usize) -> Vec<InputFunction> {
    vec![InputFunction {
        entries: (0..n).map(|i| (Vec::new(), if i == 0 { "leader" } else { "defeated" }.to_string())).collect(),
    }]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub n: usize,
    pub size: usize,
    pub n_prime: bool,
    /// `size mod n`.
    pub residue: usize,
    pub order_invariant: bool,
    /// A member and a permutation whose conjugate leaves the family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<(InputFunction, Permutation)>,
    pub pass: bool,
}

/// Size not divisible by prime `n`, and closure under conjugation by all of `S_n`.
pub fn check_input_family(family: &[InputFunction], n: usize) -> Result<FamilyReport, WsbError> {
    if n > 6 {
        return Err(WsbError::Guard { what: "input family".into(), n });
    }
    let members: BTreeSet<&InputFunction> = family.iter().collect();
    let mut counterexample = None;
    'outer: for pi in all_permutations(n) {
        for sigma in &members {
            if !members.contains(&sigma.conjugate(&pi)) {
                counterexample = Some(((*sigma).clone(), pi));
                break 'outer;
            }
        }
    }
    let size = members.len();
    let n_prime = is_prime(n as u64);
    let residue = if n == 0 { 0 } else { size % n };
    let order_invariant = counterexample.is_none();
    Ok(FamilyReport {
        n,
        size,
        n_prime,
        residue,
        order_invariant,
        counterexample,
        pass: order_invariant && (!n_prime || residue != 0),
    })
}

/// Whether `pi` preserves the order inside `set`.
fn order_preserving(pi: &Permutation, set: &BTreeSet<u64>) -> bool {
    set.iter().tuple_windows().all(|(&a, &b)| apply(pi, a) < apply(pi, b))
}

/// All `(pi(exec), pi . sigma . pi^-1)` for permutations order preserving on
/// the execution's SIM set and on its complement.
pub fn equivalence_class(
    exec: &ExecutionRecord,
    sigma: &InputFunction,
) -> Result<BTreeSet<ClassMember>, WsbError> {
    let n = exec.n;
    if n > 6 {
        return Err(WsbError::Guard { what: "equivalence class".into(), n });
    }
    let sim = exec.classify().sim;
    let rest: BTreeSet<u64> = (1..=n as u64).filter(|i| !sim.contains(i)).collect();
    Ok(all_permutations(n)
        .filter(|pi| order_preserving(pi, &sim) && order_preserving(pi, &rest))
        .map(|pi| (exec.relabel(&pi), sigma.conjugate(&pi)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        assert_eq!(cycle_family(5).len(), 24);
        assert_eq!(exactly_k_family(5, 2).len(), 10);
        for sigma in cycle_family(4) {
            // sigma_l and sigma_r are mutually inverse.
            for (i, (ids, _)) in sigma.entries.iter().enumerate() {
                let r = ids[1] as usize;
                assert_eq!(sigma.entries[r - 1].0[0], i as u64 + 1);
            }
        }
    }

    #[test]
    fn family_checks() {
        let r = check_input_family(&cycle_family(5), 5).unwrap();
        assert!(r.pass && r.order_invariant);
        assert_eq!((r.size, r.residue), (24, 4));
        let r = check_input_family(&exactly_k_family(5, 2), 5).unwrap();
        assert!(!r.pass && r.order_invariant && r.residue == 0);
        let r = check_input_family(&leader_family(5), 5).unwrap();
        assert!(!r.pass && !r.order_invariant);
    }
}
