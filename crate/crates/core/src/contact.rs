//! The intersection formula as an executable check.
//!
//! Given two towers `F`, `G` with characteristics `(v_i)`, `(v'_i)`, the
//! contact index `k` is the least `k` with
//! `i_0(f, g) <= inf(e'_{k-1} v_k, e_{k-1} v'_k)`. The analyzer takes `i_0`
//! from the oracle, locates `k`, and then checks every clause of the formula
//! independently, so a wrong prediction shows up as a failed clause rather
//! than a wrong answer.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::charseq::{CharSequence, Ext};
use crate::field::Field;
use crate::oracle::{self, OracleConfig, OracleError};
use crate::series::BranchPoly;
use crate::tower::KeyTower;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContactError {
    #[error("no contact index k <= {max_k} with i0 = {i0} below the bound")]
    NoContactIndex { i0: u64, max_k: usize },
    #[error("i0 = {i0} is divisible by neither n/d = {a} nor n'/d = {b}")]
    CongruenceFalsified { i0: u64, a: u64, b: u64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Result of one clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Pass,
    Fail,
    NotApplicable,
}

impl Clause {
    fn of(ok: bool) -> Self {
        if ok {
            Clause::Pass
        } else {
            Clause::Fail
        }
    }

    pub fn ok(self) -> bool {
        self != Clause::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseChecks {
    /// `v_i / v_0 = v'_i / v'_0` for `i < k`.
    pub ratios: Clause,
    /// `i_0 <= inf(e'_{k-1} v_k, e_{k-1} v'_k)`.
    pub bound: Clause,
    /// Strict case: `i_0 = e_{k-1} e'_{k-1} i_0(f_{k-1}, g_{k-1})`.
    pub reduction: Clause,
    /// `k > 1`: `i_0 > inf(e'_{k-2} v_{k-1}, e_{k-2} v'_{k-1})`.
    pub lower: Clause,
    /// Strict case: `e_{k-1} e'_{k-1}` divides `i_0`.
    pub congruence: Clause,
    /// `f_0, ..., f_{k-2}` act as key polynomials of `g`.
    pub sharing: Clause,
}

impl ClauseChecks {
    pub fn all_pass(&self) -> bool {
        [
            self.ratios,
            self.bound,
            self.reduction,
            self.lower,
            self.congruence,
            self.sharing,
        ]
        .iter()
        .all(|c| c.ok())
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let named = [
            ("ratios", self.ratios),
            ("bound", self.bound),
            ("reduction", self.reduction),
            ("lower", self.lower),
            ("congruence", self.congruence),
            ("sharing", self.sharing),
        ];
        named
            .iter()
            .filter(|(_, c)| !c.ok())
            .map(|(n, _)| *n)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContactReport {
    pub k: usize,
    pub i0: u64,
    pub bound_k: Ext,
    pub equality_case: bool,
    pub checks: ClauseChecks,
}

/// `inf(e'_{k-1} v_k, e_{k-1} v'_k)`.
pub fn mixed_bound(f: &CharSequence, g: &CharSequence, k: usize) -> Ext {
    let a = f.v(k).times(g.e_before(k));
    let b = g.v(k).times(f.e_before(k));
    a.min(b)
}

fn ratio_equal(f: &CharSequence, g: &CharSequence, i: usize) -> bool {
    f.values()[i] * g.n() == g.values()[i] * f.n()
}

/// Runs the intersection formula on a pair of towers.
pub fn analyze_pair<F: Field>(
    f: &KeyTower<F>,
    g: &KeyTower<F>,
    config: &OracleConfig,
) -> Result<ContactReport, ContactError> {
    let i0 = oracle::i0(f.branch(), g.branch(), config)?;
    analyze_with_i0(f, g, i0, config)
}

/// As [`analyze_pair`] with `i_0(f, g)` already known.
pub fn analyze_with_i0<F: Field>(
    f: &KeyTower<F>,
    g: &KeyTower<F>,
    i0: u64,
    config: &OracleConfig,
) -> Result<ContactReport, ContactError> {
    let (sf, sg) = (f.charseq(), g.charseq());
    let max_k = sf.h().min(sg.h()) + 1;
    let k = (1..=max_k)
        .find(|&k| mixed_bound(sf, sg, k) >= i0)
        .ok_or(ContactError::NoContactIndex { i0, max_k })?;
    let bound_k = mixed_bound(sf, sg, k);
    let equality_case = bound_k == i0;

    let ratios = Clause::of((0..k).all(|i| ratio_equal(sf, sg, i)));
    let bound = Clause::of(bound_k >= i0);
    let lower = if k > 1 {
        Clause::of(mixed_bound(sf, sg, k - 1) < i0)
    } else {
        Clause::NotApplicable
    };
    let scale = sf.e(k - 1) * sg.e(k - 1);
    let (reduction, congruence) = if equality_case {
        (Clause::NotApplicable, Clause::NotApplicable)
    } else {
        let sub = oracle::intersection_number_with(f.key(k - 1), g.key(k - 1), config)?;
        let reduced = sub.value.finite().map(|s| s * scale);
        (Clause::of(reduced == Some(i0)), Clause::of(i0.is_multiple_of(scale)))
    };
    let sharing = Clause::of(sharing_holds(f, g, k, config)?);
    Ok(ContactReport {
        k,
        i0,
        bound_k,
        equality_case,
        checks: ClauseChecks {
            ratios,
            bound,
            reduction,
            lower,
            congruence,
            sharing,
        },
    })
}

/// For `i <= k - 2`: `deg f_i = n'/e'_i` and `i_0(g, f_i) = v'_{i+1}`.
fn sharing_holds<F: Field>(
    f: &KeyTower<F>,
    g: &KeyTower<F>,
    k: usize,
    config: &OracleConfig,
) -> Result<bool, ContactError> {
    let sg = g.charseq();
    for i in 0..k.saturating_sub(1) {
        let key = f.key(i);
        if key.ydeg() as u64 != sg.n() / sg.e(i) {
            return Ok(false);
        }
        let expected = sg.values()[i + 1];
        let cfg = OracleConfig {
            initial_precision: expected as usize + 1,
            cap: config.cap.max(expected),
        };
        let r = oracle::intersection_number_with(g.branch(), key, &cfg)?;
        if r.value.finite() != Some(expected) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For `0 < i < k`: `n/e_i = n'/e'_i`, `n_i = n'_i` and
/// `e'_{i-1} v_i = e_{i-1} v'_i`.
pub fn ratio_consequences(f: &CharSequence, g: &CharSequence, report: &ContactReport) -> bool {
    (1..report.k).all(|i| {
        f.n() / f.e(i) == g.n() / g.e(i)
            && f.n_k(i) == g.n_k(i)
            && g.e(i - 1) * f.values()[i] == f.e(i - 1) * g.values()[i]
    })
}

/// Which of `n/d`, `n'/d` divide `i_0(f, g)`, with `n = i_0(f, x)`,
/// `n' = i_0(g, x)`, `d = gcd(n, n')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceWitness {
    pub i0: u64,
    pub n: u64,
    pub n_prime: u64,
    pub d: u64,
    pub by_n_over_d: bool,
    pub by_n_prime_over_d: bool,
}

impl CongruenceWitness {
    /// `i_0 = n n' - 1` while neither of `n`, `n'` divides the other.
    pub fn is_kulk_exception(&self) -> bool {
        self.i0 + 1 == self.n * self.n_prime
            && !self.n_prime.is_multiple_of(self.n)
            && !self.n.is_multiple_of(self.n_prime)
    }
}

/// Congruence of `i_0` modulo `n/d` or `n'/d`, with the smooth reference
/// branch `x`.
pub fn congruence_check<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<CongruenceWitness, ContactError> {
    let i0 = oracle::i0(f, g, config)?;
    congruence_with_i0(f.mult_x() as u64, g.mult_x() as u64, i0)
}

pub fn congruence_with_i0(n: u64, n_prime: u64, i0: u64) -> Result<CongruenceWitness, ContactError> {
    let d = n.gcd(&n_prime);
    let (a, b) = (n / d, n_prime / d);
    let w = CongruenceWitness {
        i0,
        n,
        n_prime,
        d,
        by_n_over_d: i0.is_multiple_of(a),
        by_n_prime_over_d: i0.is_multiple_of(b),
    };
    if !(w.by_n_over_d || w.by_n_prime_over_d) {
        return Err(ContactError::CongruenceFalsified { i0, a, b });
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StiReport {
    /// `d_x(f, g)`, `d_x(f, h)`, `d_x(g, h)`.
    pub dx: [Ratio<u64>; 3],
    pub holds: bool,
}

/// The two smallest of three `d_x` values coincide.
pub fn sti_holds(dx: [Ratio<u64>; 3]) -> bool {
    let mut s = dx;
    s.sort();
    s[0] == s[1]
}

pub fn sti_check<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    h: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<StiReport, ContactError> {
    let dx = [
        oracle::dx(f, g, config)?,
        oracle::dx(f, h, config)?,
        oracle::dx(g, h, config)?,
    ];
    Ok(StiReport {
        dx,
        holds: sti_holds(dx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::series::{Precision, YPoly};
    use crate::tower::{build_tower, BranchSpec, Perturbation};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn seq(v: &[u64]) -> CharSequence {
        CharSequence::new(v).unwrap()
    }

    fn spec(v: &[u64], xi: &[i64]) -> BranchSpec<Rationals> {
        BranchSpec::new(&Rationals, seq(v), xi.iter().map(|&x| q(x)).collect(), vec![]).unwrap()
    }

    fn branch(terms: &[(usize, usize, i64)]) -> BranchPoly<Rationals> {
        let t: Vec<_> = terms.iter().map(|&(j, i, c)| (j, i, q(c))).collect();
        BranchPoly::try_from(YPoly::from_terms(&Rationals, &t, Precision::Exact)).unwrap()
    }

    #[test]
    fn cusps_with_different_xi_meet_at_the_first_bound() {
        let cfg = OracleConfig::default();
        let f = build_tower(&spec(&[2, 3], &[1])).unwrap();
        let g = build_tower(&spec(&[2, 3], &[2])).unwrap();
        let r = analyze_pair(&f, &g, &cfg).unwrap();
        assert_eq!((r.i0, r.k, r.equality_case), (6, 1, true));
        assert_eq!(r.bound_k, Ext::Finite(6));
        assert!(r.checks.all_pass());
        assert!(ratio_consequences(f.charseq(), g.charseq(), &r));
    }

    #[test]
    fn branch_against_its_own_key_polynomial() {
        let cfg = OracleConfig::default();
        let f = build_tower(&spec(&[4, 6, 13], &[1, 1])).unwrap();
        let g = build_tower(&spec(&[2, 3], &[1])).unwrap();
        let r = analyze_pair(&f, &g, &cfg).unwrap();
        assert_eq!((r.i0, r.k, r.equality_case), (13, 2, true));
        assert!(r.checks.all_pass());
        assert!(ratio_consequences(f.charseq(), g.charseq(), &r));
    }

    #[test]
    fn strict_case_reduces_to_the_previous_level() {
        let cfg = OracleConfig::default();
        let f = build_tower(&spec(&[2, 3], &[1])).unwrap();
        let g = build_tower(
            &spec(&[2, 3], &[1])
                .with_perturbation(Perturbation::new(vec![5, 0], q(1)))
                .unwrap(),
        )
        .unwrap();
        let r = analyze_pair(&f, &g, &cfg).unwrap();
        assert_eq!((r.i0, r.k, r.equality_case), (10, 2, false));
        assert_eq!(r.bound_k, Ext::Infinite);
        assert_eq!(r.checks.reduction, Clause::Pass);
        assert_eq!(r.checks.congruence, Clause::Pass);
        assert!(r.checks.all_pass());
    }

    #[test]
    fn ratio_consequence_examples() {
        let r = ContactReport {
            k: 2,
            i0: 13,
            bound_k: Ext::Finite(13),
            equality_case: true,
            checks: ClauseChecks {
                ratios: Clause::Pass,
                bound: Clause::Pass,
                reduction: Clause::NotApplicable,
                lower: Clause::Pass,
                congruence: Clause::NotApplicable,
                sharing: Clause::Pass,
            },
        };
        assert!(ratio_consequences(&seq(&[4, 6, 13]), &seq(&[2, 3]), &r));
        assert!(!ratio_consequences(&seq(&[2, 5]), &seq(&[2, 7]), &r));
        let one = ContactReport { k: 1, ..r };
        assert!(ratio_consequences(&seq(&[2, 5]), &seq(&[2, 7]), &one));
    }

    #[test]
    fn congruence_examples() {
        let w = congruence_with_i0(4, 2, 8).unwrap();
        assert!(w.by_n_over_d && w.d == 2);
        let w = congruence_with_i0(2, 2, 7).unwrap();
        assert!(w.by_n_over_d && w.by_n_prime_over_d);
        assert_eq!(
            congruence_with_i0(2, 3, 5),
            Err(ContactError::CongruenceFalsified { i0: 5, a: 2, b: 3 })
        );
        let cfg = OracleConfig::default();
        let f = build_tower(&spec(&[4, 6, 13], &[1, 1])).unwrap();
        let g = branch(&[(2, 0, 1), (0, 3, 1), (1, 2, 1)]);
        let w = congruence_check(f.branch(), &g, &cfg).unwrap();
        assert_eq!((w.n, w.n_prime, w.d), (4, 2, 2));
        assert!(w.by_n_over_d || w.by_n_prime_over_d);
        assert!(!w.is_kulk_exception());
    }

    #[test]
    fn sti_examples() {
        let cfg = OracleConfig::default();
        let lines = [
            branch(&[(1, 0, 1), (0, 1, 1)]),
            branch(&[(1, 0, 1), (0, 1, 2)]),
            branch(&[(1, 0, 1), (0, 1, 3)]),
        ];
        let r = sti_check(&lines[0], &lines[1], &lines[2], &cfg).unwrap();
        assert_eq!(r.dx, [Ratio::from_integer(1); 3]);
        assert!(r.holds);

        let f = branch(&[(2, 0, 1), (0, 3, 1)]);
        let g = branch(&[(2, 0, 1), (0, 3, 2)]);
        let h = BranchPoly::y(&Rationals);
        // y meets the cusps in 3: d_x = 3/2; the transverse x-axis is y here
        let r = sti_check(&f, &g, &h, &cfg).unwrap();
        assert_eq!(r.dx, [Ratio::new(3, 2); 3]);
        assert!(r.holds);

        let l = branch(&[(1, 0, 1), (0, 1, 1)]);
        let r = sti_check(&f, &g, &l, &cfg).unwrap();
        assert_eq!(r.dx, [Ratio::new(3, 2), Ratio::new(1, 1), Ratio::new(1, 1)]);
        assert!(r.holds);
        assert!(!sti_holds([Ratio::new(1, 1), Ratio::new(2, 1), Ratio::new(3, 1)]));
    }
}
