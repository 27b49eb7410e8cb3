//! Branches at a prescribed logarithmic distance
//! `d(f, g) = i_0(f, g) / (ord f · ord g)`.
//!
//! Every rational `R > 1` is attained when the x-axis is transverse to `f`
//! (`v_0 < v_1`). Either `R = e_{k-1} v_k / v_0^2` and `g = f_{k-1}`, or `R`
//! lies strictly between two such values and `g` is built by the realizer,
//! possibly with an auxiliary characteristic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bayer::{realize_intersection, BayerError};
use crate::charseq::{CharSeqError, CharSequence, Ext};
use crate::field::{Field, SeedStream};
use crate::oracle::{self, OracleConfig, OracleError};
use crate::tower::{KeyTower, TowerError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("R = {0} must exceed 1")]
    InvalidR(String),
    #[error("needs v_0 < v_1, got {0}")]
    HypothesisViolated(String),
    #[error("auxiliary sequence {values:?} is invalid: {source}")]
    AuxSequenceInvalid {
        values: Vec<u64>,
        source: CharSeqError,
    },
    #[error("auxiliary sequence {0:?} does not follow f up to the window")]
    AuxOutOfWindow(Vec<u64>),
    #[error("no unique window for R = {r}: {count} candidates")]
    WindowNotUnique { r: String, count: usize },
    #[error("witness has d = {found}, expected {expected}")]
    Mismatch { expected: String, found: String },
    #[error(transparent)]
    Bayer(#[from] BayerError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceCase {
    KeyPolynomial,
    SGreater1,
    SEqual1,
}

impl DistanceCase {
    pub fn tag(self) -> &'static str {
        match self {
            DistanceCase::KeyPolynomial => "key-polynomial",
            DistanceCase::SGreater1 => "s-greater-1",
            DistanceCase::SEqual1 => "s-equal-1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceWitness<F: Field> {
    pub g: KeyTower<F>,
    pub r: BigRational,
    pub case: DistanceCase,
    /// Window index `k`.
    pub k: usize,
    pub i0: u64,
    /// The characteristic of `g` when it differs from that of `f`.
    pub aux: Option<CharSequence>,
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `e_{k-1} v_k / v_0^2`, infinite for `k = h + 1`.
fn threshold(seq: &CharSequence, k: usize) -> Option<BigRational> {
    let v0 = seq.n();
    match seq.contact_bound(k) {
        Ext::Finite(b) => Some(rat(b, v0 * v0)),
        Ext::Infinite => None,
    }
}

fn to_u64(x: &BigInt) -> u64 {
    u64::try_from(x).expect("value fits in u64")
}

/// Index `k` of the window `(e_{k-2} v_{k-1}, e_{k-1} v_k) / v_0^2` that
/// contains `R`, or `Err(k)` when `R` equals the upper threshold of `k`.
fn window(seq: &CharSequence, r: &BigRational) -> Result<Result<usize, usize>, DistanceError> {
    let mut hits = Vec::new();
    for k in 1..=seq.h() + 1 {
        let lo = if k == 1 {
            BigRational::zero()
        } else {
            threshold(seq, k - 1).expect("inner threshold")
        };
        let hi = threshold(seq, k);
        if let Some(hi) = &hi {
            if r == hi {
                return Ok(Err(k));
            }
        }
        if r > &lo && hi.as_ref().is_none_or(|hi| r < hi) {
            hits.push(k);
        }
    }
    match hits.as_slice() {
        [k] => Ok(Ok(*k)),
        _ => Err(DistanceError::WindowNotUnique {
            r: r.to_string(),
            count: hits.len(),
        }),
    }
}

/// Builds `g` with `d(f, g) = R`, certified by the oracle.
pub fn realize_distance<F: Field>(
    f: &KeyTower<F>,
    r: &BigRational,
    rng: &mut SeedStream,
    config: &OracleConfig,
) -> Result<DistanceWitness<F>, DistanceError> {
    if r <= &BigRational::one() {
        return Err(DistanceError::InvalidR(r.to_string()));
    }
    let seq = f.charseq();
    if seq.h() == 0 || seq.values()[0] >= seq.values()[1] {
        return Err(DistanceError::HypothesisViolated(seq.to_string()));
    }
    let v0 = seq.n();
    let witness = match window(seq, r)? {
        Err(k) => {
            let g = f.sub_tower(k - 1, config)?;
            let i0 = seq.values()[k];
            DistanceWitness {
                g,
                r: r.clone(),
                case: DistanceCase::KeyPolynomial,
                k,
                i0,
                aux: None,
            }
        }
        Ok(k) => {
            let e = seq.e(k - 1);
            // R (v_0/e)^2 = r/s in lowest terms
            let scaled = r * rat((v0 / e) * (v0 / e), 1);
            let (num, den) = (to_u64(scaled.numer()), to_u64(scaled.denom()));
            if den == 1 {
                let n = num * e * e;
                let w = realize_intersection(f, seq, n, rng, config)?;
                DistanceWitness {
                    g: w.tower,
                    r: r.clone(),
                    case: DistanceCase::SEqual1,
                    k,
                    i0: n,
                    aux: None,
                }
            } else {
                let aux = auxiliary_sequence(seq, k, num, den)?;
                let n = num * e;
                let w = realize_intersection(f, &aux, n, rng, config)?;
                DistanceWitness {
                    g: w.tower,
                    r: r.clone(),
                    case: DistanceCase::SGreater1,
                    k,
                    i0: n,
                    aux: Some(aux),
                }
            }
        }
    };
    let d = oracle::logdist(f.branch(), witness.g.branch(), config)?;
    let d = rat(*d.numer(), *d.denom());
    if &d != r {
        return Err(DistanceError::Mismatch {
            expected: r.to_string(),
            found: d.to_string(),
        });
    }
    Ok(witness)
}

/// `(s v_0/e_{k-1}, ..., s v_{k-1}/e_{k-1}, r)`, checked to be a
/// characteristic sequence with `v'_j / e'_0 = v_j / e_0` for `j < k` and
/// `v'_k / e'_0 < v_k / e_0`.
pub fn auxiliary_sequence(
    seq: &CharSequence,
    k: usize,
    r: u64,
    s: u64,
) -> Result<CharSequence, DistanceError> {
    debug_assert_eq!(r.gcd(&s), 1);
    let e = seq.e(k - 1);
    let mut values: Vec<u64> = seq.values()[..k].iter().map(|v| s * v / e).collect();
    values.push(r);
    let aux = CharSequence::new(&values).map_err(|source| DistanceError::AuxSequenceInvalid {
        values: values.clone(),
        source,
    })?;
    let (v0, w0) = (seq.n(), aux.n());
    let same_prefix = (0..k).all(|j| values[j] * v0 == seq.values()[j] * w0);
    let below = match seq.v(k) {
        Ext::Finite(vk) => r * v0 < vk * w0,
        Ext::Infinite => true,
    };
    if !(same_prefix && below) {
        return Err(DistanceError::AuxOutOfWindow(values));
    }
    Ok(aux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use crate::tower::{build_tower, BranchSpec};

    fn seq(v: &[u64]) -> CharSequence {
        CharSequence::new(v).unwrap()
    }

    fn tower<F: Field>(field: &F, v: &[u64]) -> KeyTower<F> {
        build_tower(&BranchSpec::standard(field, seq(v))).unwrap()
    }

    #[test]
    fn distance_examples_on_the_cusp() {
        let cfg = OracleConfig::default();
        let f = tower(&Rationals, &[2, 3]);
        let mut rng = SeedStream::new(5);

        let w = realize_distance(&f, &rat(3, 2), &mut rng, &cfg).unwrap();
        assert_eq!(w.case, DistanceCase::KeyPolynomial);
        assert_eq!(w.g.branch(), f.key(0));

        let w = realize_distance(&f, &rat(5, 2), &mut rng, &cfg).unwrap();
        assert_eq!((w.case, w.k, w.i0), (DistanceCase::SEqual1, 2, 10));

        let w = realize_distance(&f, &rat(7, 4), &mut rng, &cfg).unwrap();
        assert_eq!((w.case, w.k, w.i0), (DistanceCase::SEqual1, 2, 7));

        assert!(matches!(
            realize_distance(&f, &rat(1, 1), &mut rng, &cfg),
            Err(DistanceError::InvalidR(_))
        ));
    }

    #[test]
    fn s_greater_one_uses_an_auxiliary_sequence() {
        let cfg = OracleConfig::default();
        let f = tower(&Rationals, &[2, 3]);
        let mut rng = SeedStream::new(6);
        // 13/8 · 4 = 13/2, so s = 2
        let w = realize_distance(&f, &rat(13, 8), &mut rng, &cfg).unwrap();
        assert_eq!(w.case, DistanceCase::SGreater1);
        assert_eq!(w.aux.unwrap().values(), &[4, 6, 13]);
        assert_eq!(w.i0, 13);
        // 5/4 < 3/2 sits in the first window
        let w = realize_distance(&f, &rat(5, 4), &mut rng, &cfg).unwrap();
        assert_eq!((w.case, w.k), (DistanceCase::SGreater1, 1));
        assert_eq!(w.aux.unwrap().values(), &[4, 5]);
    }

    #[test]
    fn key_polynomial_case_for_every_level() {
        let cfg = OracleConfig::default();
        let fp = PrimeField::new(101).unwrap();
        let s = seq(&[4, 6, 13]);
        let f = tower(&fp, &[4, 6, 13]);
        let mut rng = SeedStream::new(8);
        for k in 1..=s.h() {
            let r = threshold(&s, k).unwrap();
            let w = realize_distance(&f, &r, &mut rng, &cfg).unwrap();
            assert_eq!(w.case, DistanceCase::KeyPolynomial);
            assert_eq!(w.g.branch(), f.key(k - 1));
        }
    }

    #[test]
    fn hypothesis_is_enforced() {
        let cfg = OracleConfig::default();
        let f = tower(&Rationals, &[3, 2]);
        let mut rng = SeedStream::new(1);
        assert!(matches!(
            realize_distance(&f, &rat(2, 1), &mut rng, &cfg),
            Err(DistanceError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn auxiliary_sequence_checks() {
        let s = seq(&[4, 6, 13]);
        let a = auxiliary_sequence(&s, 2, 25, 4).unwrap();
        assert_eq!(a.values(), &[8, 12, 25]);
        assert!(matches!(
            auxiliary_sequence(&s, 2, 25, 2),
            Err(DistanceError::AuxOutOfWindow(_))
        ));
        assert!(auxiliary_sequence(&s, 2, 13, 2).is_err());
    }
}
