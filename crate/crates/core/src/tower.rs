//! Branches with a prescribed characteristic, built as towers of key
//! polynomials
//!
//! ```text
//! f_0 = y,   f_i = f_{i-1}^{n_i} + ξ_i x^{a_0} f_0^{a_1} ... f_{i-2}^{a_{i-1}}
//! ```
//!
//! where `(a_0, ..., a_{i-1})` is the Bézout relation of `n_i v_i`. Every
//! tower is checked against the oracle before it is handed out.
//!
//! A tower may also carry perturbations. A perturbation at level `j` with
//! exponents `(a_0, ..., a_j)` adds `c x^{a_0} f_0^{a_1} ... f_{j-1}^{a_j}` to
//! `f_j`, and the levels above are then built on the perturbed `f_j`. Its
//! weight `(a_0 v_0 + ... + a_j v_j) / e_j` is the intersection number of the
//! term with the level-`j` branch; above `n_j v_j / e_j` the perturbed
//! polynomial keeps the characteristic of `f_j`.

use thiserror::Error;

use crate::charseq::{CharSequence, Ext};
use crate::field::{Field, SeedStream};
use crate::oracle::{intersection_number_with, IntersectionNumber, OracleConfig, OracleError};
use crate::series::{BranchPoly, SeriesError, YPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerturbationError {
    #[error("no exponents given")]
    Empty,
    #[error("level {level} is above the top level {h}")]
    LevelTooHigh { level: usize, h: usize },
    #[error("exponent of x must be positive")]
    NoXFactor,
    #[error("coefficient is zero")]
    ZeroCoefficient,
    #[error("y-degree {term} of the term is not below {limit}")]
    DegreeTooHigh { term: u64, limit: u64 },
    #[error("weight {weight} does not exceed {bound}; the characteristic would change")]
    WeightTooLow { weight: u64, bound: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error("expected {expected} coefficients xi, got {found}")]
    XiLength { expected: usize, found: usize },
    #[error("xi_{index} is zero")]
    ZeroXi { index: usize },
    #[error("perturbation {index}: {source}")]
    Perturbation {
        index: usize,
        source: PerturbationError,
    },
    #[error("tower verification failed at k = {k}: expected {expected}, oracle gave {found}")]
    VerificationFailed { k: usize, expected: u64, found: String },
    #[error("branch has y-degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("level {k} is above the top level {h}")]
    LevelOutOfRange { k: usize, h: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The term `coeff · x^{a_0} f_0^{a_1} ... f_{j-1}^{a_j}` added at level
/// `j = exponents.len() - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation<F: Field> {
    pub exponents: Vec<u64>,
    pub coeff: F::Elem,
}

impl<F: Field> Perturbation<F> {
    pub fn new(exponents: Vec<u64>, coeff: F::Elem) -> Self {
        Self { exponents, coeff }
    }

    pub fn level(&self) -> usize {
        self.exponents.len().saturating_sub(1)
    }
}

/// `(a_0 v_0 + ... + a_j v_j) / e_j`.
pub fn perturbation_weight(seq: &CharSequence, exponents: &[u64]) -> u64 {
    let j = exponents.len() - 1;
    let s: u64 = exponents
        .iter()
        .zip(seq.values())
        .map(|(a, v)| a * v)
        .sum();
    s / seq.e(j)
}

/// The weight a level-`j` perturbation must exceed: `n_j v_j / e_j`, and 0 on
/// the smooth level.
pub fn perturbation_bound(seq: &CharSequence, level: usize) -> u64 {
    if level == 0 {
        0
    } else {
        seq.n_k(level) * seq.values()[level] / seq.e(level)
    }
}

/// y-degree of `f_0^{a_1} ... f_{j-1}^{a_j}`.
fn term_ydeg(seq: &CharSequence, exponents: &[u64]) -> u64 {
    exponents
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * (seq.n() / seq.e(i - 1)))
        .sum()
}

fn check_perturbation(seq: &CharSequence, exponents: &[u64]) -> Result<(), PerturbationError> {
    if exponents.is_empty() {
        return Err(PerturbationError::Empty);
    }
    let level = exponents.len() - 1;
    if level > seq.h() {
        return Err(PerturbationError::LevelTooHigh { level, h: seq.h() });
    }
    if exponents[0] == 0 {
        return Err(PerturbationError::NoXFactor);
    }
    let limit = seq.n() / seq.e(level);
    let term = term_ydeg(seq, exponents);
    if term >= limit {
        return Err(PerturbationError::DegreeTooHigh { term, limit });
    }
    let weight = perturbation_weight(seq, exponents);
    let bound = perturbation_bound(seq, level);
    if weight <= bound {
        return Err(PerturbationError::WeightTooLow { weight, bound });
    }
    Ok(())
}

/// A recipe for a branch: characteristic, the coefficients `ξ_1..ξ_h` and
/// optional perturbations.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSpec<F: Field> {
    field: F,
    charseq: CharSequence,
    xi: Vec<F::Elem>,
    perturbations: Vec<Perturbation<F>>,
}

impl<F: Field> BranchSpec<F> {
    pub fn new(
        field: &F,
        charseq: CharSequence,
        xi: Vec<F::Elem>,
        perturbations: Vec<Perturbation<F>>,
    ) -> Result<Self, TowerError> {
        if xi.len() != charseq.h() {
            return Err(TowerError::XiLength {
                expected: charseq.h(),
                found: xi.len(),
            });
        }
        if let Some(i) = xi.iter().position(|c| field.is_zero(c)) {
            return Err(TowerError::ZeroXi { index: i + 1 });
        }
        for (index, p) in perturbations.iter().enumerate() {
            let wrap = |source| TowerError::Perturbation { index, source };
            if field.is_zero(&p.coeff) {
                return Err(wrap(PerturbationError::ZeroCoefficient));
            }
            check_perturbation(&charseq, &p.exponents).map_err(wrap)?;
        }
        Ok(Self {
            field: field.clone(),
            charseq,
            xi,
            perturbations,
        })
    }

    /// All `ξ_i = 1`, no perturbation.
    pub fn standard(field: &F, charseq: CharSequence) -> Self {
        let xi = vec![field.one(); charseq.h()];
        Self::new(field, charseq, xi, Vec::new()).expect("unit coefficients are valid")
    }

    /// Random nonzero `ξ_i`, no perturbation.
    pub fn random(field: &F, charseq: CharSequence, rng: &mut SeedStream) -> Self {
        let xi = (0..charseq.h()).map(|_| field.random_nonzero(rng)).collect();
        Self::new(field, charseq, xi, Vec::new()).expect("nonzero coefficients are valid")
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn charseq(&self) -> &CharSequence {
        &self.charseq
    }

    pub fn xi(&self) -> &[F::Elem] {
        &self.xi
    }

    pub fn perturbations(&self) -> &[Perturbation<F>] {
        &self.perturbations
    }

    /// The same recipe with one more perturbation.
    pub fn with_perturbation(&self, p: Perturbation<F>) -> Result<Self, TowerError> {
        let mut ps = self.perturbations.clone();
        ps.push(p);
        Self::new(&self.field, self.charseq.clone(), self.xi.clone(), ps)
    }

    /// The recipe of the key polynomial `f_k`, for the sequence
    /// `(v_0/e_k, ..., v_k/e_k)`.
    pub fn prefix(&self, k: usize) -> Self {
        let ps = self
            .perturbations
            .iter()
            .filter(|p| p.level() <= k)
            .cloned()
            .collect();
        Self::new(&self.field, self.charseq.key_prefix(k), self.xi[..k].to_vec(), ps)
            .expect("prefix of a valid recipe is valid")
    }

    /// Expands the recipe into `f_0, ..., f_h` without checking it.
    fn expand(&self) -> Result<Vec<BranchPoly<F>>, TowerError> {
        let field = &self.field;
        let seq = &self.charseq;
        let mut polys: Vec<BranchPoly<F>> = Vec::with_capacity(seq.h() + 1);
        for i in 0..=seq.h() {
            let mut f = if i == 0 {
                YPoly::y(field)
            } else {
                let a = seq.bezout(i);
                let lead = polys[i - 1].as_ypoly().pow(seq.n_k(i) as u32);
                let tail = monomial_in_keys(field, &polys, &a, &self.xi[i - 1]);
                &lead + &tail
            };
            for p in self.perturbations.iter().filter(|p| p.level() == i) {
                f = &f + &monomial_in_keys(field, &polys, &p.exponents, &p.coeff);
            }
            polys.push(BranchPoly::try_from(f)?);
        }
        Ok(polys)
    }
}

/// `c · x^{a_0} f_0^{a_1} ... f_{m-1}^{a_m}` for `m = a.len() - 1`.
fn monomial_in_keys<F: Field>(
    field: &F,
    polys: &[BranchPoly<F>],
    a: &[u64],
    c: &F::Elem,
) -> YPoly<F> {
    let mut t = YPoly::monomial(field, c.clone(), a[0] as usize, 0);
    for (j, &e) in a.iter().enumerate().skip(1) {
        if e > 0 {
            t = &t * &polys[j - 1].as_ypoly().pow(e as u32);
        }
    }
    t
}

/// A verified tower of key polynomials. `polys[h]` is the branch itself.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyTower<F: Field> {
    polys: Vec<BranchPoly<F>>,
    spec: BranchSpec<F>,
}

impl<F: Field> KeyTower<F> {
    pub fn polys(&self) -> &[BranchPoly<F>] {
        &self.polys
    }

    pub fn key(&self, k: usize) -> &BranchPoly<F> {
        &self.polys[k]
    }

    /// The branch `f_h`.
    pub fn branch(&self) -> &BranchPoly<F> {
        self.polys.last().expect("a tower has at least f_0")
    }

    pub fn spec(&self) -> &BranchSpec<F> {
        &self.spec
    }

    pub fn charseq(&self) -> &CharSequence {
        &self.spec.charseq
    }

    pub fn field(&self) -> &F {
        &self.spec.field
    }

    pub fn h(&self) -> usize {
        self.spec.charseq.h()
    }

    /// The tower `f_0, ..., f_k`, verified again for its own characteristic.
    pub fn sub_tower(&self, k: usize, config: &OracleConfig) -> Result<KeyTower<F>, TowerError> {
        if k > self.h() {
            return Err(TowerError::LevelOutOfRange { k, h: self.h() });
        }
        let tower = KeyTower {
            polys: self.polys[..=k].to_vec(),
            spec: self.spec.prefix(k),
        };
        tower.verify(config)?;
        Ok(tower)
    }

    /// Checks `deg_y f_k = v_0/e_k`, `i_0(f_h, f_k) = v_{k+1}` for `k < h`
    /// and `i_0(f_h, x) = v_0`.
    pub fn verify(&self, config: &OracleConfig) -> Result<(), TowerError> {
        let seq = self.charseq();
        let v = seq.values();
        for (k, f) in self.polys.iter().enumerate() {
            let expected = (seq.n() / seq.e(k)) as usize;
            if f.ydeg() != expected {
                return Err(TowerError::DegreeMismatch {
                    expected,
                    found: f.ydeg(),
                });
            }
        }
        let top = self.branch();
        if top.mult_x() as u64 != v[0] {
            return Err(TowerError::VerificationFailed {
                k: self.h(),
                expected: v[0],
                found: top.mult_x().to_string(),
            });
        }
        for k in 0..self.h() {
            let expected = v[k + 1];
            let cfg = OracleConfig {
                // the predicted value fits in one pass
                initial_precision: expected as usize + 1,
                cap: config.cap.max(expected),
            };
            let r = intersection_number_with(top, &self.polys[k], &cfg)?;
            if r.value != IntersectionNumber::Finite(expected) {
                let found = match r.value {
                    IntersectionNumber::Finite(x) => x.to_string(),
                    IntersectionNumber::Exhausted { cap } => format!("more than {cap}"),
                };
                return Err(TowerError::VerificationFailed { k, expected, found });
            }
        }
        Ok(())
    }
}

/// Expands `spec` and verifies the result with the oracle.
pub fn build_tower<F: Field>(spec: &BranchSpec<F>) -> Result<KeyTower<F>, TowerError> {
    build_tower_with(spec, &OracleConfig::default())
}

pub fn build_tower_with<F: Field>(
    spec: &BranchSpec<F>,
    config: &OracleConfig,
) -> Result<KeyTower<F>, TowerError> {
    let tower = KeyTower {
        polys: spec.expand()?,
        spec: spec.clone(),
    };
    tower.verify(config)?;
    Ok(tower)
}

/// `i_0(f_h, g) <= v_{k+1}` for a monic `g` of y-degree `v_0/e_k`.
pub fn key3_bound_check<F: Field>(
    tower: &KeyTower<F>,
    g: &BranchPoly<F>,
    k: usize,
) -> Result<bool, TowerError> {
    let seq = tower.charseq();
    if k > seq.h() {
        return Err(TowerError::LevelOutOfRange { k, h: seq.h() });
    }
    let expected = (seq.n() / seq.e(k)) as usize;
    if g.ydeg() != expected {
        return Err(TowerError::DegreeMismatch {
            expected,
            found: g.ydeg(),
        });
    }
    let Ext::Finite(bound) = seq.v(k + 1) else {
        return Ok(true);
    };
    // with the cap at the bound, exhaustion means the bound is exceeded
    let cfg = OracleConfig {
        initial_precision: bound as usize + 1,
        cap: bound,
    };
    let r = intersection_number_with(tower.branch(), g, &cfg)?;
    Ok(matches!(r.value, IntersectionNumber::Finite(v) if v <= bound))
}

/// Outcome of the Abhyankar–Moh test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmVerdict {
    /// `g` is irreducible with the same semigroup as the tower's branch.
    Certified { i0: u64 },
    Inconclusive(AmReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmReason {
    MultiplicityDiffers { mult_x: usize },
    IntersectionTooSmall { i0: u64, bound: u64 },
    Exhausted,
}

/// Certifies `g` as equisingular to the tower's branch when
/// `i_0(g, x) = v_0` and `i_0(f_h, g) > e_{h-1} v_h`.
pub fn am_criterion<F: Field>(
    tower: &KeyTower<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<AmVerdict, TowerError> {
    let seq = tower.charseq();
    if g.mult_x() as u64 != seq.n() {
        return Ok(AmVerdict::Inconclusive(AmReason::MultiplicityDiffers {
            mult_x: g.mult_x(),
        }));
    }
    let bound = seq.contact_bound(seq.h()).finite().expect("v_h is finite");
    match intersection_number_with(tower.branch(), g, config) {
        Ok(r) => match r.value {
            IntersectionNumber::Finite(i0) if i0 > bound => Ok(AmVerdict::Certified { i0 }),
            IntersectionNumber::Finite(i0) => Ok(AmVerdict::Inconclusive(
                AmReason::IntersectionTooSmall { i0, bound },
            )),
            IntersectionNumber::Exhausted { .. } => Ok(AmVerdict::Inconclusive(AmReason::Exhausted)),
        },
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charseq::{random_sequence, SequenceShape};
    use crate::field::{PrimeField, Rationals};
    use crate::oracle::i0;
    use crate::series::Precision;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn seq(v: &[u64]) -> CharSequence {
        CharSequence::new(v).unwrap()
    }

    fn poly(terms: &[(usize, usize, i64)]) -> YPoly<Rationals> {
        let t: Vec<_> = terms.iter().map(|&(j, i, c)| (j, i, q(c))).collect();
        YPoly::from_terms(&Rationals, &t, Precision::Exact)
    }

    fn tower(v: &[u64]) -> KeyTower<Rationals> {
        build_tower(&BranchSpec::standard(&Rationals, seq(v))).unwrap()
    }

    #[test]
    fn tower_examples() {
        let t = tower(&[2, 3]);
        assert_eq!(t.key(0).as_ypoly(), &YPoly::y(&Rationals));
        assert_eq!(t.key(1).as_ypoly(), &poly(&[(2, 0, 1), (0, 3, 1)]));

        let t = tower(&[4, 6, 13]);
        assert_eq!(t.key(2).as_ypoly(), &poly(&[(4, 0, 1), (2, 3, 2), (0, 6, 1), (1, 5, 1)]));

        let t = tower(&[1]);
        assert_eq!(t.polys().len(), 1);
        assert_eq!(t.branch().as_ypoly(), &YPoly::y(&Rationals));
    }

    #[test]
    fn perturbation_validation() {
        let s = seq(&[2, 3]);
        let p = |e: Vec<u64>| Perturbation::new(e, q(1));
        let spec = BranchSpec::standard(&Rationals, s.clone());
        assert!(matches!(
            spec.with_perturbation(p(vec![2, 2])),
            Err(TowerError::Perturbation { source: PerturbationError::DegreeTooHigh { .. }, .. })
        ));
        assert!(spec.with_perturbation(p(vec![3])).is_ok());
        assert!(matches!(
            spec.with_perturbation(p(vec![3, 0])),
            Err(TowerError::Perturbation { source: PerturbationError::WeightTooLow { weight: 6, bound: 6 }, .. })
        ));
        assert!(matches!(
            spec.with_perturbation(p(vec![0, 1])),
            Err(TowerError::Perturbation { source: PerturbationError::NoXFactor, .. })
        ));
        assert!(matches!(
            spec.with_perturbation(p(vec![1, 0, 0])),
            Err(TowerError::Perturbation { source: PerturbationError::LevelTooHigh { .. }, .. })
        ));
        assert!(matches!(
            BranchSpec::new(&Rationals, s.clone(), vec![q(0)], vec![]),
            Err(TowerError::ZeroXi { index: 1 })
        ));
        assert!(matches!(
            BranchSpec::new(&Rationals, s, vec![], vec![]),
            Err(TowerError::XiLength { expected: 1, found: 0 })
        ));
    }

    #[test]
    fn perturbed_branch_meets_original_in_the_weight() {
        let cfg = OracleConfig::default();
        let base = BranchSpec::standard(&Rationals, seq(&[4, 6, 13]));
        let f = build_tower(&base).unwrap();
        for (exps, weight) in [(vec![7, 0, 0], 28u64), (vec![4, 1, 1], 35), (vec![2, 1, 1], 27)] {
            assert_eq!(perturbation_weight(f.charseq(), &exps), weight);
            let g = build_tower(&base.with_perturbation(Perturbation::new(exps, q(3))).unwrap()).unwrap();
            assert_eq!(i0(f.branch(), g.branch(), &cfg).unwrap(), weight);
        }
        // a level-1 perturbation rebuilds the level above
        let g = build_tower(&base.with_perturbation(Perturbation::new(vec![4, 0], q(1))).unwrap()).unwrap();
        assert_eq!(i0(f.key(1), g.key(1), &cfg).unwrap(), 8);
        assert!(matches!(am_criterion(&f, g.branch(), &cfg).unwrap(), AmVerdict::Certified { i0 } if i0 > 26));
    }

    #[test]
    fn key3_examples() {
        let f = tower(&[4, 6, 13]);
        let g = BranchPoly::try_from(poly(&[(2, 0, 1), (0, 3, 2)])).unwrap();
        assert!(key3_bound_check(&f, &g, 1).unwrap());
        assert_eq!(i0(f.branch(), &g, &OracleConfig::default()).unwrap(), 12);
        assert!(key3_bound_check(&f, f.key(1), 1).unwrap());
        let c = tower(&[2, 3]);
        assert!(key3_bound_check(&c, &BranchPoly::y(&Rationals), 0).unwrap());
        assert!(matches!(
            key3_bound_check(&c, c.branch(), 0),
            Err(TowerError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn am_examples() {
        let cfg = OracleConfig::default();
        let f = tower(&[2, 3]);
        let g = poly(&[(2, 0, 1), (0, 3, 1), (2, 2, 1)]).normalize_monic(32).unwrap();
        assert_eq!(am_criterion(&f, &g, &cfg).unwrap(), AmVerdict::Certified { i0: 10 });
        let line = BranchPoly::try_from(poly(&[(1, 0, 1), (0, 1, 1)])).unwrap();
        assert_eq!(
            am_criterion(&f, &line, &cfg).unwrap(),
            AmVerdict::Inconclusive(AmReason::MultiplicityDiffers { mult_x: 1 })
        );
        let g = BranchPoly::try_from(poly(&[(2, 0, 1), (0, 3, 2)])).unwrap();
        assert_eq!(
            am_criterion(&f, &g, &cfg).unwrap(),
            AmVerdict::Inconclusive(AmReason::IntersectionTooSmall { i0: 6, bound: 6 })
        );
    }

    #[test]
    fn sub_towers_verify_for_the_scaled_sequence() {
        let cfg = OracleConfig::default();
        let f = tower(&[4, 6, 13]);
        let s = f.sub_tower(1, &cfg).unwrap();
        assert_eq!(s.charseq().values(), &[2, 3]);
        assert_eq!(s.branch(), f.key(1));
    }

    #[test]
    fn random_towers_over_small_prime_including_p_dividing_v0() {
        let fp = PrimeField::new(5).unwrap();
        let cfg = OracleConfig::default();
        let shape = SequenceShape {
            factors: vec![2, 5],
            max_v0: 10,
            ..SequenceShape::default()
        };
        for i in 0..20 {
            let mut rng = SeedStream::derive(11, i);
            let s = random_sequence(&shape, &mut rng);
            let spec = BranchSpec::random(&fp, s, &mut rng);
            build_tower_with(&spec, &cfg).unwrap();
        }
    }
}
