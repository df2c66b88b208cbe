//! Cover-free set families from low-degree polynomials over finite fields,
//! and the color-reduction schedule built from them.
//!
//! Color `c` (1-based) is the polynomial whose coefficient vector, read as a
//! base-`q` number with the constant term least significant, equals `c - 1`.
//! Its set is `{x*q + p(x) + 1 : x in GF(q)}` inside the ground set
//! `1..=q*q`. Two distinct polynomials of degree at most `d` agree on at most
//! `d` points, so `k*d < q` makes the family `k`-cover-free.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prime powers with a tabulated irreducible polynomial, as
/// `(q, p, coefficients of x^0..x^{e-1} of the monic modulus)`.
const EXTENSIONS: &[(u64, u64, &[u64])] = &[
    (4, 2, &[1, 1]),       // x^2 + x + 1
    (8, 2, &[1, 1, 0]),    // x^3 + x + 1
    (9, 3, &[1, 0]),       // x^2 + 1
    (16, 2, &[1, 1, 0, 0]), // x^4 + x + 1
    (25, 5, &[2, 0]),      // x^2 + 2
    (27, 3, &[1, 2, 0]),   // x^3 + 2x + 1
    (32, 2, &[1, 0, 1, 0, 0]), // x^5 + x^2 + 1
];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Field sizes usable by [`construct_family`]: primes and the tabulated
/// prime powers.
pub fn is_supported_order(q: u64) -> bool {
    is_prime(q) || EXTENSIONS.iter().any(|e| e.0 == q)
}

/// A finite field with elements encoded as `0..q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Field {
    Prime(u64),
    /// Elements are base-`p` digit vectors; operations are tabulated.
    Extension { q: u64, add: Vec<u8>, mul: Vec<u8> },
}

impl Field {
    pub fn new(q: u64) -> Option<Field> {
        if is_prime(q) {
            return Some(Field::Prime(q));
        }
        let &(q, p, modulus) = EXTENSIONS.iter().find(|e| e.0 == q)?;
        let e = modulus.len();
        let digits = |mut v: u64| -> Vec<u64> {
            (0..e)
                .map(|_| {
                    let d = v % p;
                    v /= p;
                    d
                })
                .collect()
        };
        let encode = |ds: &[u64]| ds.iter().rev().fold(0, |acc, &d| acc * p + d);
        let n = q as usize;
        let mut add = vec![0u8; n * n];
        let mut mul = vec![0u8; n * n];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                let mut prod = vec![0u64; 2 * e];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // Reduce using x^e = -(modulus lower terms).
                for deg in (e..2 * e).rev() {
                    let c = prod[deg];
                    if c != 0 {
                        prod[deg] = 0;
                        for (i, m) in modulus.iter().enumerate() {
                            prod[deg - e + i] = (prod[deg - e + i] + (p - m % p) * c) % p;
                        }
                    }
                }
                add[a as usize * n + b as usize] = encode(&sum) as u8;
                mul[a as usize * n + b as usize] = encode(&prod[..e]) as u8;
            }
        }
        Some(Field::Extension { q, add, mul })
    }

    pub fn order(&self) -> u64 {
        match self {
            Field::Prime(p) => *p,
            Field::Extension { q, .. } => *q,
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self {
            Field::Prime(p) => ((a as u128 + b as u128) % *p as u128) as u64,
            Field::Extension { q, add, .. } => add[(a * q + b) as usize] as u64,
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self {
            Field::Prime(p) => ((a as u128 * b as u128) % *p as u128) as u64,
            Field::Extension { q, mul, .. } => mul[(a * q + b) as usize] as u64,
        }
    }

    /// Horner evaluation; `coeffs[i]` multiplies `x^i`.
    pub fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyRepr {
    /// Sets are computed on demand from polynomials over the field.
    Polynomial(Field),
    /// Explicit sets, each sorted ascending.
    Explicit(Vec<Vec<u64>>),
}

/// A set family over the ground set `1..=ground_size`, indexed by colors `1..=m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverFreeFamily {
    pub k: u64,
    pub m: u64,
    pub d: u64,
    pub q: u64,
    pub ground_size: u64,
    pub repr: FamilyRepr,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverFreeError {
    #[error("k and m must be positive")]
    BadParameters,
    #[error("family dump line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Smallest supported field size `q` with a degree bound `d >= 1` such that
/// `k*d < q` and `q^(d+1) >= m`, together with the largest such `d`.
pub fn choose_parameters(k: u64, m: u64) -> (u64, u64) {
    let mut q = k + 1;
    loop {
        if is_supported_order(q) {
            let d = (q - 1) / k;
            if d >= 1 && pow_at_least(q, d + 1, m) {
                return (d, q);
            }
        }
        q += 1;
    }
}

fn pow_at_least(base: u64, exp: u64, target: u64) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc *= base as u128;
        if acc >= target as u128 {
            return true;
        }
    }
    acc >= target as u128
}

/// Builds the polynomial family for `m` colors that is `k`-cover-free.
pub fn construct_family(k: u64, m: u64) -> Result<CoverFreeFamily, CoverFreeError> {
    if k == 0 || m == 0 {
        return Err(CoverFreeError::BadParameters);
    }
    let (d, q) = choose_parameters(k, m);
    let field = Field::new(q).expect("supported order");
    Ok(CoverFreeFamily { k, m, d, q, ground_size: q * q, repr: FamilyRepr::Polynomial(field) })
}

impl CoverFreeFamily {
    pub fn explicit(k: u64, ground_size: u64, sets: Vec<Vec<u64>>) -> Self {
        let sets: Vec<Vec<u64>> = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        CoverFreeFamily { k, m: sets.len() as u64, d: 0, q: 0, ground_size, repr: FamilyRepr::Explicit(sets) }
    }

    pub fn len(&self) -> u64 {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Coefficients of color `color`'s polynomial, constant term first.
    fn coefficients(&self, color: u64) -> Vec<u64> {
        let mut rest = color - 1;
        (0..=self.d)
            .map(|_| {
                let c = rest % self.q;
                rest /= self.q;
                c
            })
            .collect()
    }

    /// Sorted elements of the set for color `color` (1-based).
    pub fn set(&self, color: u64) -> Option<Vec<u64>> {
        if color == 0 || color > self.m {
            return None;
        }
        match &self.repr {
            FamilyRepr::Explicit(sets) => Some(sets[(color - 1) as usize].clone()),
            FamilyRepr::Polynomial(field) => {
                let coeffs = self.coefficients(color);
                // x*q dominates, so iterating x ascending yields sorted output.
                Some((0..self.q).map(|x| x * self.q + field.eval(&coeffs, x) + 1).collect())
            }
        }
    }

    /// All sets, colors in order. Intended for small families.
    pub fn sets(&self) -> Vec<Vec<u64>> {
        (1..=self.m).map(|c| self.set(c).unwrap()).collect()
    }

    /// The family dump: a header line, then one line per color.
    pub fn dump(&self) -> String {
        let mut out = format!("k={} m={} d={} q={} ground_size={}\n", self.k, self.m, self.d, self.q, self.ground_size);
        for c in 1..=self.m {
            let s = self.set(c).unwrap();
            out.push_str(&s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        out
    }
}

impl FromStr for CoverFreeFamily {
    type Err = CoverFreeError;

    /// Parses a family dump into an explicit family.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate();
        let fmt_err = |line: usize, message: &str| CoverFreeError::Format { line, message: message.to_string() };
        let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "missing header"))?;
        let mut fields = std::collections::BTreeMap::new();
        for tok in header.split_whitespace() {
            let (key, value) = tok.split_once('=').ok_or_else(|| fmt_err(1, "expected key=value"))?;
            let value: u64 = value.parse().map_err(|_| fmt_err(1, "expected an integer"))?;
            fields.insert(key, value);
        }
        let get = |key: &str| fields.get(key).copied().ok_or_else(|| fmt_err(1, &format!("missing {key}")));
        let (k, m, ground_size) = (get("k")?, get("m")?, get("ground_size")?);
        let mut sets = Vec::new();
        for (n, line) in lines {
            let set: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| fmt_err(n + 1, "expected integers"))?;
            if set.iter().any(|&e| e == 0 || e > ground_size) {
                return Err(fmt_err(n + 1, "element outside the ground set"));
            }
            sets.push(set);
        }
        if sets.len() as u64 != m {
            return Err(fmt_err(1, "set count does not match m"));
        }
        let mut fam = CoverFreeFamily::explicit(k, ground_size, sets);
        fam.d = fields.get("d").copied().unwrap_or(0);
        fam.q = fields.get("q").copied().unwrap_or(0);
        Ok(fam)
    }
}

impl fmt::Display for CoverFreeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} m={} d={} q={} ground_size={}", self.k, self.m, self.d, self.q, self.ground_size)
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(width: usize) -> Self {
        Bits(vec![0; width.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn first_missing(&self, width: usize) -> Option<usize> {
        (0..width).find(|&i| !self.get(i))
    }
    fn or(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }
}

/// Whether no set of the family is covered by the union of `min(k, m-1)`
/// other sets. Exact: a branching search over which set covers the first
/// uncovered element.
pub fn verify_coverfree(fam: &CoverFreeFamily) -> bool {
    let sets = fam.sets();
    let r = fam.k.min(fam.m.saturating_sub(1)) as usize;
    (0..sets.len()).all(|i| !is_covered(&sets, i, r))
}

fn is_covered(sets: &[Vec<u64>], target: usize, r: usize) -> bool {
    let s0 = &sets[target];
    let width = s0.len();
    if width == 0 {
        return true;
    }
    let mut parts: Vec<Bits> = Vec::new();
    for (j, s) in sets.iter().enumerate() {
        if j == target {
            continue;
        }
        let mut b = Bits::new(width);
        for (pos, e) in s0.iter().enumerate() {
            if s.binary_search(e).is_ok() {
                b.set(pos);
            }
        }
        if b.count() > 0 {
            parts.push(b);
        }
    }
    // A cover using a dominated part stays a cover with its dominator.
    parts.sort_by_key(|b| std::cmp::Reverse(b.count()));
    let mut kept: Vec<Bits> = Vec::new();
    for p in parts {
        if !kept.iter().any(|k| p.is_subset(k)) {
            kept.push(p);
        }
    }
    let max_part = kept.first().map_or(0, |b| b.count() as usize);
    cover_search(&kept, Bits::new(width), width, r, max_part)
}

fn cover_search(parts: &[Bits], covered: Bits, width: usize, left: usize, max_part: usize) -> bool {
    let Some(e) = covered.first_missing(width) else {
        return true;
    };
    let missing = width - covered.count() as usize;
    if left == 0 || missing > left * max_part {
        return false;
    }
    parts.iter().filter(|p| p.get(e)).any(|p| cover_search(parts, covered.or(p), width, left - 1, max_part))
}

/// Palette sizes `c_0 = N > c_1 > ... > c_T` and the families between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionSchedule {
    pub id_bound: u64,
    pub delta: u64,
    pub palette_sizes: Vec<u64>,
    /// `families[i]` maps colors `1..=palette_sizes[i]` into `1..=palette_sizes[i+1]`.
    pub families: Vec<CoverFreeFamily>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub id_bound: u64,
    pub delta: u64,
    pub rounds: usize,
    pub palette_sizes: Vec<u64>,
    pub field_sizes: Vec<u64>,
}

impl ReductionSchedule {
    /// Number of reduction rounds `T`.
    pub fn rounds(&self) -> usize {
        self.families.len()
    }

    pub fn final_palette(&self) -> u64 {
        *self.palette_sizes.last().unwrap()
    }

    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            id_bound: self.id_bound,
            delta: self.delta,
            rounds: self.rounds(),
            palette_sizes: self.palette_sizes.clone(),
            field_sizes: self.families.iter().map(|f| f.q).collect(),
        }
    }
}

/// Iterates [`construct_family`] from `N` colors while the ground set shrinks.
pub fn reduction_schedule(id_bound: u64, delta: u64) -> ReductionSchedule {
    let (id_bound, delta) = (id_bound.max(1), delta.max(1));
    let mut sizes = vec![id_bound];
    let mut families = Vec::new();
    loop {
        let c = *sizes.last().unwrap();
        let fam = construct_family(delta, c).expect("positive parameters");
        if fam.ground_size >= c {
            break;
        }
        sizes.push(fam.ground_size);
        families.push(fam);
    }
    ReductionSchedule { id_bound, delta, palette_sizes: sizes, families }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_fields_are_fields() {
        for &(q, _, _) in EXTENSIONS {
            let f = Field::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                if a != 0 {
                    let inverses = (1..q).filter(|&b| f.mul(a, b) == 1).count();
                    assert_eq!(inverses, 1, "q={q} a={a}");
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn parameter_examples() {
        assert_eq!(choose_parameters(2, 25), (2, 5));
        assert_eq!(choose_parameters(2, 65536), (5, 11));
        let f = construct_family(2, 25).unwrap();
        assert_eq!(f.ground_size, 25);
        assert!(f.sets().iter().all(|s| s.len() == 5));
    }

    #[test]
    fn small_families() {
        let f = construct_family(1, 2).unwrap();
        let (a, b) = (f.set(1).unwrap(), f.set(2).unwrap());
        assert!(a.iter().any(|e| !b.contains(e)) && b.iter().any(|e| !a.contains(e)));
        assert!(!verify_coverfree(&CoverFreeFamily::explicit(1, 2, vec![vec![1], vec![1, 2]])));
        assert!(verify_coverfree(&CoverFreeFamily::explicit(2, 3, vec![vec![1], vec![2], vec![3]])));
    }

    #[test]
    fn schedule_examples() {
        let s = reduction_schedule(65536, 2);
        assert_eq!(s.palette_sizes, vec![65536, 121, 25]);
        assert_eq!(s.rounds(), 2);
        assert_eq!(reduction_schedule(25, 2).rounds(), 0);
        assert_eq!(reduction_schedule(10_000, 2).palette_sizes, vec![10_000, 81, 25]);
    }

    #[test]
    fn dump_round_trip() {
        let f = construct_family(2, 30).unwrap();
        let parsed: CoverFreeFamily = f.dump().parse().unwrap();
        assert_eq!(parsed.sets(), f.sets());
        assert_eq!((parsed.k, parsed.m, parsed.d, parsed.q, parsed.ground_size), (f.k, f.m, f.d, f.q, f.ground_size));
        assert!("k=1 m=2 ground_size=3\n1\n".parse::<CoverFreeFamily>().is_err());
        assert!("k=1 m=1 ground_size=3\n4\n".parse::<CoverFreeFamily>().is_err());
    }
}
