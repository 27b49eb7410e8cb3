//! Exact coefficient fields.
//!
//! Everything downstream is generic over [`Field`], a context object that
//! performs the arithmetic on its associated element type. Two contexts
//! exist: [`Rationals`] (characteristic zero, arbitrary precision) and
//! [`PrimeField`] (word-sized odd or even prime modulus).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest modulus accepted for prime fields; products of two reduced
/// residues must fit in a `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} exceeds the supported word size (max {MAX_PRIME})")]
    ModulusTooLarge(u64),
    #[error("cannot parse field element {0:?}")]
    Parse(String),
    #[error("element {found:?} belongs to a different field than {expected}")]
    ContextMismatch { expected: String, found: String },
}

/// Arithmetic context for an exact field.
///
/// Elements carry no reference to their context, so every operation goes
/// through the context. Containers that hold elements also hold the context
/// and compare contexts before combining.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn characteristic(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` only for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// `acc += a * b`. Hot loop of every series product.
    fn mul_add_assign(&self, acc: &mut Self::Elem, a: &Self::Elem, b: &Self::Elem) {
        let t = self.mul(a, b);
        *acc = self.add(acc, &t);
    }

    /// `acc -= a * b`.
    fn mul_sub_assign(&self, acc: &mut Self::Elem, a: &Self::Elem, b: &Self::Elem) {
        let t = self.mul(a, b);
        *acc = self.sub(acc, &t);
    }

    /// A nonzero element drawn from the seed stream.
    fn random_nonzero(&self, rng: &mut SeedStream) -> Self::Elem;

    /// Canonical text form: `a` or `a/b` for rationals, `r mod p` for prime fields.
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem, FieldError>;

    /// Short tag used on the command line and in JSON: `q` or `fp:<p>`.
    fn tag(&self) -> String;

    /// The element as a rational number, for fields of characteristic zero.
    fn to_rational(&self, _a: &Self::Elem) -> Option<BigRational> {
        None
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// The rational numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

/// Range of numerators used by [`Rationals::random_nonzero`].
const RATIONAL_SAMPLE_NUMER: i64 = 64;
const RATIONAL_SAMPLE_DENOM: i64 = 3;

impl Field for Rationals {
    type Elem = BigRational;

    fn characteristic(&self) -> u64 {
        0
    }
    fn to_rational(&self, a: &BigRational) -> Option<BigRational> {
        Some(a.clone())
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn mul_add_assign(&self, acc: &mut BigRational, a: &BigRational, b: &BigRational) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *acc += a * b;
    }
    fn mul_sub_assign(&self, acc: &mut BigRational, a: &BigRational, b: &BigRational) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *acc -= a * b;
    }

    fn random_nonzero(&self, rng: &mut SeedStream) -> BigRational {
        let mut num = rng.gen_range(1..=RATIONAL_SAMPLE_NUMER);
        if rng.gen_bool(0.5) {
            num = -num;
        }
        let den = rng.gen_range(1..=RATIONAL_SAMPLE_DENOM);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn format(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn parse(&self, s: &str) -> Result<BigRational, FieldError> {
        let t = s.trim();
        if t.contains("mod") {
            return Err(FieldError::ContextMismatch {
                expected: self.tag(),
                found: s.to_string(),
            });
        }
        let bad = || FieldError::Parse(s.to_string());
        match t.split_once('/') {
            None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(BigRational::new(n, d))
            }
        }
    }

    fn tag(&self) -> String {
        "q".to_string()
    }
}

/// The prime field of order `p`, residues stored reduced in `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_PRIME {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::CompositeModulus(p));
        }
        Ok(Self { p })
    }

    /// Image of a rational number, `None` when `p` divides its denominator.
    pub fn reduce(&self, a: &BigRational) -> Option<u64> {
        let p = BigInt::from(self.p);
        let den = u64::try_from(a.denom().mod_floor(&p)).expect("residue fits");
        let num = u64::try_from(a.numer().mod_floor(&p)).expect("residue fits");
        self.inv(&den).map(|d| self.mul(&num, &d))
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (a * b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        Some(self.pow(a, self.p - 2))
    }
    fn mul_add_assign(&self, acc: &mut u64, a: &u64, b: &u64) {
        *acc = (*acc + a * b) % self.p;
    }
    fn mul_sub_assign(&self, acc: &mut u64, a: &u64, b: &u64) {
        *acc = (*acc + self.p - (a * b) % self.p) % self.p;
    }

    fn random_nonzero(&self, rng: &mut SeedStream) -> u64 {
        rng.gen_range(1..self.p)
    }

    fn format(&self, a: &u64) -> String {
        format!("{a} mod {}", self.p)
    }

    fn parse(&self, s: &str) -> Result<u64, FieldError> {
        let bad = || FieldError::Parse(s.to_string());
        let t = s.trim();
        let (value, modulus) = match t.split_once("mod") {
            Some((v, m)) => (v.trim(), Some(m.trim())),
            None => (t, None),
        };
        if let Some(m) = modulus {
            let m: u64 = m.parse().map_err(|_| bad())?;
            if m != self.p {
                return Err(FieldError::ContextMismatch {
                    expected: self.tag(),
                    found: s.to_string(),
                });
            }
        }
        if let Some((n, d)) = value.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            let d = self.inv(&self.reduce_i64(d)).ok_or_else(bad)?;
            return Ok(self.mul(&self.reduce_i64(n), &d));
        }
        let v: i64 = value.parse().map_err(|_| bad())?;
        Ok(self.reduce_i64(v))
    }

    fn tag(&self) -> String {
        format!("fp:{}", self.p)
    }
}

/// Which field a computation runs over, as chosen at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Rationals,
    Prime(u64),
}

impl std::str::FromStr for FieldKind {
    type Err = FieldError;

    /// Accepts `q` or `fp:<p>`.
    fn from_str(s: &str) -> Result<Self, FieldError> {
        let t = s.trim();
        if t == "q" || t == "Q" {
            return Ok(FieldKind::Rationals);
        }
        match t.strip_prefix("fp:") {
            Some(p) => p
                .parse()
                .map(FieldKind::Prime)
                .map_err(|_| FieldError::Parse(s.to_string())),
            None => Err(FieldError::Parse(s.to_string())),
        }
    }
}

/// A validated run-time field choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldContext {
    Rationals(Rationals),
    Prime(PrimeField),
}

impl FieldContext {
    pub fn new(kind: FieldKind) -> Result<Self, FieldError> {
        match kind {
            FieldKind::Rationals => Ok(FieldContext::Rationals(Rationals)),
            FieldKind::Prime(p) => PrimeField::new(p).map(FieldContext::Prime),
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldContext::Rationals(f) => f.characteristic(),
            FieldContext::Prime(f) => f.characteristic(),
        }
    }
}

/// Deterministic random source. The only stateful object in the crate; do
/// not share one stream between concurrent tasks, derive child streams with
/// [`SeedStream::derive`] instead.
#[derive(Clone, Debug)]
pub struct SeedStream {
    rng: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for sub-task `index` of a run seeded with `seed`.
    pub fn derive(seed: u64, index: u64) -> Self {
        Self::new(Self::derive_seed(seed, index))
    }

    /// The seed behind [`SeedStream::derive`].
    pub fn derive_seed(seed: u64, index: u64) -> u64 {
        // splitmix64 finalizer keeps neighbouring indices far apart
        let mut z = seed ^ index.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Runs `$body` with `$f` bound to the concrete field behind a
/// [`FieldContext`].
#[macro_export]
macro_rules! with_field {
    ($ctx:expr, |$f:ident| $body:expr) => {
        match $ctx {
            $crate::field::FieldContext::Rationals($f) => $body,
            $crate::field::FieldContext::Prime($f) => $body,
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contexts() {
        let f = FieldContext::new(FieldKind::Prime(101)).unwrap();
        assert_eq!(f.characteristic(), 101);
        let q = FieldContext::new(FieldKind::Rationals).unwrap();
        assert_eq!(q.characteristic(), 0);
        assert_eq!(
            FieldContext::new(FieldKind::Prime(6)),
            Err(FieldError::CompositeModulus(6))
        );
        assert_eq!(
            PrimeField::new(1),
            Err(FieldError::CompositeModulus(1))
        );
        assert!(PrimeField::new(2).is_ok());
        assert!(matches!(
            PrimeField::new(4294967311),
            Err(FieldError::ModulusTooLarge(_))
        ));
    }

    #[test]
    fn kind_parse() {
        assert_eq!("q".parse::<FieldKind>().unwrap(), FieldKind::Rationals);
        assert_eq!("fp:101".parse::<FieldKind>().unwrap(), FieldKind::Prime(101));
        assert!("fp:x".parse::<FieldKind>().is_err());
        assert!("r".parse::<FieldKind>().is_err());
    }

    #[test]
    fn random_nonzero_is_nonzero_and_deterministic() {
        let fp = PrimeField::new(101).unwrap();
        let mut a = SeedStream::new(1);
        let mut b = SeedStream::new(1);
        for _ in 0..500 {
            let x = fp.random_nonzero(&mut a);
            assert!((1..=100).contains(&x));
            assert_eq!(x, fp.random_nonzero(&mut b));
        }
        let mut a = SeedStream::new(1);
        let mut b = SeedStream::new(1);
        for _ in 0..200 {
            let x = Rationals.random_nonzero(&mut a);
            assert!(!x.is_zero());
            assert_eq!(x, Rationals.random_nonzero(&mut b));
        }
    }

    #[test]
    fn derived_streams_differ() {
        let mut a = SeedStream::derive(7, 0);
        let mut b = SeedStream::derive(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn text_forms() {
        let q = Rationals;
        let x = q.parse("-3/6").unwrap();
        assert_eq!(q.format(&x), "-1/2");
        assert_eq!(q.format(&q.from_i64(5)), "5");
        assert!(q.parse("3 mod 7").is_err());
        assert!(q.parse("1/0").is_err());

        let fp = PrimeField::new(7).unwrap();
        assert_eq!(fp.parse("10 mod 7").unwrap(), 3);
        assert_eq!(fp.parse("-1").unwrap(), 6);
        assert_eq!(fp.parse("1/2").unwrap(), 4);
        assert_eq!(fp.format(&3), "3 mod 7");
        assert!(matches!(
            fp.parse("3 mod 11"),
            Err(FieldError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn prime_inverse_table() {
        let fp = PrimeField::new(101).unwrap();
        for a in 1..101u64 {
            assert_eq!(fp.mul(&a, &fp.inv(&a).unwrap()), 1);
        }
        assert_eq!(fp.inv(&0), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rat() -> impl Strategy<Value = BigRational> {
            (-1000i64..1000, 1i64..50)
                .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
        }

        proptest! {
            #[test]
            fn prime_field_axioms(a in 0u64..101, b in 0u64..101, c in 0u64..101) {
                let f = PrimeField::new(101).unwrap();
                prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
                prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                prop_assert_eq!(f.add(&a, &f.neg(&a)), 0);
                prop_assert_eq!(f.sub(&f.add(&a, &b), &b), a);
                if a != 0 {
                    prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
                }
            }

            #[test]
            fn rational_field_axioms(a in rat(), b in rat(), c in rat()) {
                let q = Rationals;
                prop_assert_eq!(q.mul(&q.mul(&a, &b), &c), q.mul(&a, &q.mul(&b, &c)));
                prop_assert_eq!(q.mul(&a, &q.add(&b, &c)), q.add(&q.mul(&a, &b), &q.mul(&a, &c)));
                if !a.is_zero() && !b.is_zero() {
                    let ab = q.mul(&a, &q.inv(&b).unwrap());
                    let ba = q.mul(&b, &q.inv(&a).unwrap());
                    prop_assert_eq!(q.mul(&ab, &ba), q.one());
                }
            }

            #[test]
            fn format_parse_roundtrip(a in rat(), r in 0u64..101) {
                let q = Rationals;
                prop_assert_eq!(q.parse(&q.format(&a)).unwrap(), a);
                let f = PrimeField::new(101).unwrap();
                prop_assert_eq!(f.parse(&f.format(&r)).unwrap(), r);
            }
        }
    }
}
