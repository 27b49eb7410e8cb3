//! Integer combinatorics of characteristic sequences `(v_0, ..., v_h)` and
//! the numerical semigroups they generate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::SeedStream;

/// A nonnegative integer or `+∞`.
/// Serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    Finite(u64),
    Infinite,
}

impl Serialize for Ext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ext::Finite(v) => s.serialize_u64(*v),
            Ext::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ext::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(Ext::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t}"))),
        }
    }
}

impl Ext {
    pub fn finite(self) -> Option<u64> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    /// `k * self`, with `0 * ∞ = 0`.
    pub fn times(self, k: u64) -> Ext {
        match self {
            Ext::Finite(v) => Ext::Finite(k * v),
            Ext::Infinite if k == 0 => Ext::Finite(0),
            Ext::Infinite => Ext::Infinite,
        }
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => a.cmp(b),
            (Ext::Finite(_), Ext::Infinite) => Ordering::Less,
            (Ext::Infinite, Ext::Finite(_)) => Ordering::Greater,
            (Ext::Infinite, Ext::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialEq<u64> for Ext {
    fn eq(&self, other: &u64) -> bool {
        *self == Ext::Finite(*other)
    }
}

impl PartialOrd<u64> for Ext {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        Some(self.cmp(&Ext::Finite(*other)))
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        match (self, rhs) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a + b),
            _ => Ext::Infinite,
        }
    }
}

impl From<u64> for Ext {
    fn from(v: u64) -> Self {
        Ext::Finite(v)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharSeqError {
    #[error("characteristic sequence is empty")]
    Empty,
    #[error("entry v_{index} is not positive")]
    NonPositive { index: usize },
    #[error("gcd chain e = {e:?} is not strictly decreasing to 1 (fails at index {index})")]
    Char1Violation { e: Vec<u64>, index: usize },
    #[error("e_{prev}*v_{k} = {lhs} is not below e_{k}*v_{next} = {rhs} at k = {k}", prev = .k - 1, next = .k + 1)]
    Char2Violation { k: usize, lhs: u64, rhs: u64 },
}

/// A validated `n`-characteristic sequence with its derived gcd chain.
///
/// `e[k] = gcd(v_0, ..., v_k)` and `n_k = e_{k-1}/e_k` for `1 <= k <= h`.
/// By convention `v_{h+1} = ∞` and `e_{-1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharSequence {
    v: Vec<u64>,
    e: Vec<u64>,
}

impl CharSequence {
    /// Checks the gcd-chain condition and the growth inequalities.
    pub fn new(raw: &[u64]) -> Result<Self, CharSeqError> {
        if raw.is_empty() {
            return Err(CharSeqError::Empty);
        }
        if let Some(index) = raw.iter().position(|&v| v == 0) {
            return Err(CharSeqError::NonPositive { index });
        }
        let mut e = Vec::with_capacity(raw.len());
        let mut g = 0u64;
        for &v in raw {
            g = g.gcd(&v);
            e.push(g);
        }
        for k in 1..e.len() {
            if e[k] >= e[k - 1] {
                return Err(CharSeqError::Char1Violation { e, index: k });
            }
        }
        if *e.last().unwrap() != 1 {
            let index = e.len() - 1;
            return Err(CharSeqError::Char1Violation { e, index });
        }
        let h = raw.len() - 1;
        for k in 1..h {
            let lhs = e[k - 1] * raw[k];
            let rhs = e[k] * raw[k + 1];
            if lhs >= rhs {
                return Err(CharSeqError::Char2Violation { k, lhs, rhs });
            }
        }
        Ok(Self { v: raw.to_vec(), e })
    }

    pub fn values(&self) -> &[u64] {
        &self.v
    }

    /// The gcd chain `(e_0, ..., e_h)`.
    pub fn gcds(&self) -> &[u64] {
        &self.e
    }

    /// Length index `h`.
    pub fn h(&self) -> usize {
        self.v.len() - 1
    }

    /// `v_0 = i_0(f, x)`.
    pub fn n(&self) -> u64 {
        self.v[0]
    }

    /// `v_k`, infinite for `k > h`.
    pub fn v(&self, k: usize) -> Ext {
        self.v.get(k).copied().map_or(Ext::Infinite, Ext::Finite)
    }

    /// `e_k` for `0 <= k <= h`; `e_k = 1` beyond `h`.
    pub fn e(&self, k: usize) -> u64 {
        self.e.get(k).copied().unwrap_or(1)
    }

    /// `e_{k-1}`, with the convention `e_{-1} = 0`.
    pub fn e_before(&self, k: usize) -> u64 {
        if k == 0 {
            0
        } else {
            self.e(k - 1)
        }
    }

    /// `n_k = e_{k-1}/e_k` for `1 <= k <= h`.
    pub fn n_k(&self, k: usize) -> u64 {
        assert!((1..=self.h()).contains(&k), "n_k needs 1 <= k <= h");
        self.e[k - 1] / self.e[k]
    }

    /// `(n_1, ..., n_h)`.
    pub fn ns(&self) -> Vec<u64> {
        (1..=self.h()).map(|k| self.n_k(k)).collect()
    }

    /// `e_{k-1} v_k`, the contact bound of level `k`; infinite for `k > h`.
    pub fn contact_bound(&self, k: usize) -> Ext {
        self.v(k).times(self.e_before(k))
    }

    /// The characteristic `(v_0/e_k, ..., v_k/e_k)` of the `k`-th key
    /// polynomial.
    pub fn key_prefix(&self, k: usize) -> CharSequence {
        let e = self.e[k];
        let raw: Vec<u64> = self.v[..=k].iter().map(|v| v / e).collect();
        CharSequence::new(&raw).expect("prefix of a valid sequence is valid")
    }

    /// The unique `(a_0, ..., a_{k-1})` with
    /// `n_k v_k = a_0 v_0 + ... + a_{k-1} v_{k-1}`, `a_0 > 0` and
    /// `0 <= a_i < n_i`, found by reducing from the top index.
    pub fn bezout(&self, k: usize) -> Vec<u64> {
        assert!((1..=self.h()).contains(&k), "bezout needs 1 <= k <= h");
        let target = self.n_k(k) * self.v[k];
        let a = self
            .bounded_digits(target, k)
            .expect("characteristic conditions guarantee a Bezout relation");
        debug_assert!(a[0] > 0);
        a
    }

    /// Writes `target` as `a_0 v_0 + ... + a_{m-1} v_{m-1}` with
    /// `0 <= a_i < n_i` for `i >= 1`, if possible.
    fn bounded_digits(&self, target: u64, m: usize) -> Option<Vec<u64>> {
        let mut a = vec![0u64; m];
        let mut rest = target;
        for i in (1..m).rev() {
            // rest must become divisible by e_{i-1}; v_i/e_i is invertible mod n_i
            let step = self.v[i];
            let modulus = self.e[i - 1];
            let digit = (0..self.n_k(i)).find(|&d| {
                d * step <= rest && (rest - d * step).is_multiple_of(modulus)
            })?;
            a[i] = digit;
            rest -= digit * step;
        }
        if !rest.is_multiple_of(self.v[0]) {
            return None;
        }
        a[0] = rest / self.v[0];
        Some(a)
    }

    /// Canonical expansion of a semigroup element `N = a_0 v_0 + ... + a_h v_h`
    /// with `0 <= a_i < n_i` for `1 <= i <= h`; `None` if `N` is a gap.
    pub fn semigroup_digits(&self, target: u64) -> Option<Vec<u64>> {
        self.bounded_digits(target, self.v.len())
    }

    /// Conductor `c = Σ (n_k - 1) v_k - v_0 + 1`.
    pub fn conductor(&self) -> u64 {
        let s: u64 = (1..=self.h()).map(|k| (self.n_k(k) - 1) * self.v[k]).sum();
        s + 1 - self.v[0]
    }

    /// Membership in `v_0 N + ... + v_h N`.
    pub fn semigroup_contains(&self, target: u64) -> bool {
        self.semigroup_digits(target).is_some()
    }

    /// Positive integers outside the semigroup, ascending.
    pub fn gaps(&self) -> Vec<u64> {
        (1..self.conductor())
            .filter(|&m| !self.semigroup_contains(m))
            .collect()
    }

    /// `true` iff each `v_k` is the least element of the semigroup outside
    /// `v_0 N + ... + v_{k-1} N`.
    pub fn minimal_generators_check(&self) -> bool {
        (1..=self.h()).all(|k| {
            let sub = Submonoid::new(&self.v[..k], self.v[k]);
            if sub.contains(self.v[k] as usize) {
                return false;
            }
            (1..self.v[k]).all(|m| !self.semigroup_contains(m) || sub.contains(m as usize))
        })
    }

    /// The smallest `N_0` such that every `N >= N_0` is an intersection
    /// number with some branch: `e_{h-1} v_h`, or `1` for a smooth branch.
    pub fn min_universal(&self) -> u64 {
        if self.h() == 0 {
            1
        } else {
            self.e[self.h() - 1] * self.v[self.h()]
        }
    }
}

impl fmt::Display for CharSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.v.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Reachability table for `g_0 N + ... + g_m N` up to a bound.
struct Submonoid {
    reach: Vec<bool>,
}

impl Submonoid {
    fn new(gens: &[u64], bound: u64) -> Self {
        let bound = bound as usize;
        let mut reach = vec![false; bound + 1];
        reach[0] = true;
        for m in 1..=bound {
            reach[m] = gens
                .iter()
                .any(|&g| (g as usize) <= m && reach[m - g as usize]);
        }
        Self { reach }
    }

    fn contains(&self, m: usize) -> bool {
        self.reach[m]
    }
}

/// Parses `4,6,13` into a validated sequence.
impl std::str::FromStr for CharSequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let raw = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        CharSequence::new(&raw).map_err(|e| e.to_string())
    }
}

/// Knobs for [`random_sequence`].
#[derive(Clone, Debug)]
pub struct SequenceShape {
    pub max_h: usize,
    pub max_v0: u64,
    /// Candidate values for each `n_k`.
    pub factors: Vec<u64>,
    /// How far above its lower bound each `v_k` may be placed, in units of
    /// `e_k`.
    pub window: u64,
    /// Require `v_0 < v_1` (the `x`-axis transverse to the branch).
    pub transverse: bool,
}

impl Default for SequenceShape {
    fn default() -> Self {
        Self {
            max_h: 3,
            max_v0: 12,
            factors: vec![2, 3],
            window: 4,
            transverse: false,
        }
    }
}

/// Draws a valid characteristic sequence: first an `e`-chain from products
/// of `shape.factors`, then each `v_k` in a window above its lower bound.
pub fn random_sequence(shape: &SequenceShape, rng: &mut SeedStream) -> CharSequence {
    let mut ns = Vec::new();
    let mut v0 = 1u64;
    let h = rng.gen_range(0..=shape.max_h);
    for _ in 0..h {
        let options: Vec<u64> = shape
            .factors
            .iter()
            .copied()
            .filter(|&f| v0 * f <= shape.max_v0)
            .collect();
        let Some(&n) = options.choose(rng) else { break };
        ns.push(n);
        v0 *= n;
    }
    extend_sequence(&[v0], &ns, shape, rng)
}

/// Completes a valid prefix `(v_0, ..., v_j)` using the given remaining
/// `n_k` values, which must multiply to `e_j`.
pub fn extend_sequence(
    prefix: &[u64],
    ns: &[u64],
    shape: &SequenceShape,
    rng: &mut SeedStream,
) -> CharSequence {
    let mut v = prefix.to_vec();
    let mut e = prefix.iter().fold(0u64, |g, &x| g.gcd(&x));
    let mut prev_bound = if v.len() >= 2 {
        let k = v.len() - 1;
        let e_prev = v[..k].iter().fold(0u64, |g, &x| g.gcd(&x));
        Some(e_prev * v[k])
    } else {
        None
    };
    for &n in ns {
        let e_next = e / n;
        // v = e_next * t with gcd(t, n) = 1; t above the growth bound
        let min_t = match prev_bound {
            // e * v_next > prev_bound
            Some(b) => b / (e * e_next) + 1,
            None if shape.transverse => v[0] / e_next + 1,
            None => 1,
        };
        let candidates: Vec<u64> = (min_t..min_t + shape.window * n)
            .filter(|t| t.gcd(&n) == 1)
            .collect();
        let t = *candidates.choose(rng).expect("window contains a unit");
        let next = e_next * t;
        prev_bound = Some(e * next);
        v.push(next);
        e = e_next;
    }
    CharSequence::new(&v).expect("generator respects the characteristic conditions")
}
