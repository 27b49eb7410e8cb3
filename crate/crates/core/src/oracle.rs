//! Ground-truth intersection numbers.
//!
//! For monic distinguished `f, g` the intersection multiplicity is the
//! x-adic order of `Res_y(f, g)`. Determinants are taken over the truncated
//! ring `K[x]/(x^W)`, which is a local ring: pivoting on the entry of least
//! order makes every elimination step exact (no division by non-units), and
//! the order of the determinant is the sum of the pivot orders. When that sum
//! reaches `W` the determinant vanishes modulo `x^W` and the working
//! precision is doubled.
//!
//! Over the rationals the entries of the elimination grow quickly, so exact
//! rational inputs are handled modulo enough primes instead: the order of
//! the resultant can only go up under reduction, and it stays put unless the
//! prime divides its lowest coefficient, which is bounded a priori.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{is_prime, Field, PrimeField, MAX_PRIME};
use crate::series::{BranchPoly, Precision, SeriesError, XSeries, YPoly};

/// First working precision tried by the oracle.
pub const DEFAULT_INITIAL_PRECISION: usize = 64;
/// Default largest intersection number the oracle will certify.
pub const DEFAULT_CAP: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("cap must be at least 1")]
    InvalidCap,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("intersection number exceeds cap {cap} (or the branches share a component)")]
    PrecisionExhausted { cap: u64 },
}

/// Oracle settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub initial_precision: usize,
    pub cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            initial_precision: DEFAULT_INITIAL_PRECISION,
            cap: DEFAULT_CAP,
        }
    }
}

impl OracleConfig {
    pub fn with_cap(cap: u64) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }
}

/// Outcome of an intersection computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntersectionNumber {
    Finite(u64),
    /// The resultant vanished to every precision up to the cap.
    Exhausted { cap: u64 },
}

impl IntersectionNumber {
    pub fn finite(self) -> Option<u64> {
        match self {
            IntersectionNumber::Finite(v) => Some(v),
            IntersectionNumber::Exhausted { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntersectionResult {
    pub value: IntersectionNumber,
    /// The last working precision (x-adic) used.
    pub precision_used: usize,
}

impl IntersectionResult {
    /// The finite value, or `PrecisionExhausted`.
    pub fn value(&self) -> Result<u64, OracleError> {
        match self.value {
            IntersectionNumber::Finite(v) => Ok(v),
            IntersectionNumber::Exhausted { cap } => Err(OracleError::PrecisionExhausted { cap }),
        }
    }
}

/// Truncated-ring arithmetic on dense coefficient slices.
struct Trunc<'a, F: Field> {
    f: &'a F,
}

impl<F: Field> Trunc<'_, F> {
    fn order(&self, a: &[F::Elem]) -> Option<usize> {
        a.iter().position(|c| !self.f.is_zero(c))
    }

    /// `a * b mod x^w`.
    fn mul(&self, a: &[F::Elem], b: &[F::Elem], w: usize) -> Vec<F::Elem> {
        let f = self.f;
        let mut out = vec![f.zero(); w];
        for (i, ai) in a.iter().enumerate().take(w) {
            if f.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(w - i) {
                f.mul_add_assign(&mut out[i + j], ai, bj);
            }
        }
        out
    }

    /// `acc -= a * b mod x^w`, with `acc` of length `w`.
    fn mul_sub_into(&self, acc: &mut [F::Elem], a: &[F::Elem], b: &[F::Elem]) {
        let f = self.f;
        let w = acc.len();
        for (i, ai) in a.iter().enumerate().take(w) {
            if f.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(w - i) {
                f.mul_sub_assign(&mut acc[i + j], ai, bj);
            }
        }
    }

    /// Inverse of a unit modulo `x^w`.
    fn inverse(&self, u: &[F::Elem], w: usize) -> Vec<F::Elem> {
        let f = self.f;
        let u0 = f.inv(&u[0]).expect("pivot unit has nonzero constant term");
        let mut out = vec![f.zero(); w];
        if w == 0 {
            return out;
        }
        out[0] = u0.clone();
        for k in 1..w {
            let mut s = f.zero();
            for j in 1..=k.min(u.len().saturating_sub(1)) {
                f.mul_add_assign(&mut s, &u[j], &out[k - j]);
            }
            out[k] = f.neg(&f.mul(&s, &u0));
        }
        out
    }
}

/// Determinant of a square matrix over `K[x]/(x^w)`.
pub(crate) struct TruncDet<E> {
    /// Order of the determinant, `None` if it vanishes modulo `x^w`.
    pub order: Option<usize>,
    /// The determinant modulo `x^w` (only when requested).
    pub value: Option<Vec<E>>,
}

/// Determinant of `mat` (row-major, entries dense mod `x^w`) over the local
/// ring `K[x]/(x^w)`.
///
/// The determinant of the remaining block is only needed modulo
/// `x^(w - accumulated pivot orders)`, so the working length shrinks as the
/// elimination proceeds.
pub(crate) fn det_truncated<F: Field>(
    field: &F,
    mut mat: Vec<Vec<Vec<F::Elem>>>,
    w: usize,
    want_value: bool,
) -> TruncDet<F::Elem> {
    let t = Trunc { f: field };
    let n = mat.len();
    let mut work = w;
    let mut acc = 0usize;
    let mut negate = false;
    let mut value = want_value.then(|| {
        let mut one = vec![field.zero(); w];
        if w > 0 {
            one[0] = field.one();
        }
        one
    });
    for row in mat.iter_mut() {
        for e in row.iter_mut() {
            e.truncate(work);
        }
    }
    let vanished = TruncDet {
        order: None,
        value: want_value.then(|| vec![field.zero(); w]),
    };
    for c in 0..n {
        let pivot_row = (c..n)
            .filter_map(|r| t.order(&mat[r][c]).map(|o| (o, r)))
            .min();
        let Some((v, r)) = pivot_row else {
            return vanished;
        };
        if v >= work {
            return vanished;
        }
        if r != c {
            mat.swap(r, c);
            negate = !negate;
        }
        let new_work = work - v;
        let pivot = std::mem::take(&mut mat[c][c]);
        if let Some(val) = value.as_mut() {
            *val = t.mul(val, &pivot, w);
        }
        let unit: Vec<F::Elem> = pivot[v..].to_vec();
        let unit_inv = t.inverse(&unit, new_work);
        let (top, rest) = mat.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in rest.iter_mut() {
            let a = std::mem::take(&mut row[c]);
            let lead = t.order(&a);
            for e in row[c + 1..].iter_mut() {
                e.resize(work, field.zero());
                e.truncate(new_work);
            }
            let Some(_) = lead else { continue };
            // a has order >= v, so a / x^v is exact
            let shifted: Vec<F::Elem> = a[v.min(a.len())..].to_vec();
            let q = t.mul(&shifted, &unit_inv, new_work);
            for (e, p) in row[c + 1..].iter_mut().zip(&pivot_row[c + 1..]) {
                t.mul_sub_into(e, &q, p);
            }
        }
        acc += v;
        work = new_work;
    }
    if let Some(val) = value.as_mut() {
        if negate {
            for c in val.iter_mut() {
                *c = field.neg(c);
            }
        }
    }
    TruncDet {
        order: Some(acc),
        value,
    }
}

/// Coefficients of a y-polynomial as dense x-vectors mod `x^w`, index = y power.
fn dense_coeffs<F: Field>(p: &YPoly<F>, w: usize) -> Vec<Vec<F::Elem>> {
    let f = p.field();
    p.coeffs()
        .iter()
        .map(|s| {
            let mut c = s.coeffs().to_vec();
            c.resize(w, f.zero());
            c.truncate(w);
            c
        })
        .collect()
}

fn aligned_precision<F: Field>(f: &YPoly<F>, g: &YPoly<F>, w: usize) -> usize {
    let p = f.precision().min(g.precision());
    p.bound().map_or(w, |b| b.min(w))
}

/// Sylvester resultant `Res_y(f, g)` modulo `x^w` (and never beyond the
/// inputs' precision). Rows are the `deg g` shifts of `f` followed by the
/// `deg f` shifts of `g`, highest power of `y` first.
pub fn resultant_y<F: Field>(
    f: &YPoly<F>,
    g: &YPoly<F>,
    w: usize,
) -> Result<XSeries<F>, OracleError> {
    if f.field() != g.field() {
        return Err(SeriesError::ContextMismatch.into());
    }
    let field = f.field();
    let w = aligned_precision(f, g, w);
    let (Some(m), Some(n)) = (f.ydeg(), g.ydeg()) else {
        return Ok(XSeries::zero(field, Precision::Mod(w)));
    };
    let size = m + n;
    if size == 0 {
        return Ok(XSeries::one(field).truncate(Precision::Mod(w)));
    }
    let fc = dense_coeffs(f, w);
    let gc = dense_coeffs(g, w);
    let zero = vec![field.zero(); w];
    let mut mat = vec![vec![zero.clone(); size]; size];
    for r in 0..n {
        for (j, c) in fc.iter().enumerate() {
            // column index counts from the highest power
            mat[r][r + m - j] = c.clone();
        }
    }
    for r in 0..m {
        for (j, c) in gc.iter().enumerate() {
            mat[n + r][r + n - j] = c.clone();
        }
    }
    let det = det_truncated(field, mat, w, true);
    Ok(XSeries::new(
        field,
        det.value.expect("value requested"),
        Precision::Mod(w),
    ))
}

/// Matrix of multiplication by `g` on `R[y]/(f)`, `R = K[x]/(x^w)`, in the
/// basis `1, y, ..., y^(n-1)`. Its determinant is `Res_y(f, g)` for monic `f`.
fn multiplication_matrix<F: Field>(
    f: &BranchPoly<F>,
    g: &YPoly<F>,
    w: usize,
) -> Vec<Vec<Vec<F::Elem>>> {
    let field = f.field();
    let t = Trunc { f: field };
    let n = f.ydeg();
    let fc = dense_coeffs(f.as_ypoly(), w);
    let zero = vec![field.zero(); w];
    // r = g mod f
    let mut r = dense_coeffs(g, w);
    while r.len() > n {
        let lead = r.pop().unwrap();
        let shift = r.len() - n;
        for (j, c) in fc[..n].iter().enumerate() {
            t.mul_sub_into(&mut r[shift + j], &lead, c);
        }
    }
    r.resize(n, zero.clone());
    let mut cols = Vec::with_capacity(n);
    for _ in 0..n {
        cols.push(r.clone());
        // r <- y * r mod f
        let lead = r.pop().unwrap();
        r.insert(0, zero.clone());
        for (j, c) in fc[..n].iter().enumerate() {
            t.mul_sub_into(&mut r[j], &lead, c);
        }
    }
    // row j, column i = coefficient of y^j in y^i g mod f
    (0..n)
        .map(|j| (0..n).map(|i| cols[i][j].clone()).collect())
        .collect()
}

/// `Res_y(f, g)` modulo `x^w` as the determinant of multiplication by `g`
/// modulo the monic `f`.
pub fn norm_resultant<F: Field>(
    f: &BranchPoly<F>,
    g: &YPoly<F>,
    w: usize,
) -> Result<XSeries<F>, OracleError> {
    if f.field() != g.field() {
        return Err(SeriesError::ContextMismatch.into());
    }
    let w = aligned_precision(f.as_ypoly(), g, w);
    let mat = multiplication_matrix(f, g, w);
    let det = det_truncated(f.field(), mat, w, true);
    Ok(XSeries::new(
        f.field(),
        det.value.expect("value requested"),
        Precision::Mod(w),
    ))
}

/// Order of `Res_y(f, g)` at working precision `w`, `None` if it vanishes
/// modulo `x^w`.
fn resultant_order<F: Field>(f: &BranchPoly<F>, g: &BranchPoly<F>, w: usize) -> Option<usize> {
    // the smaller degree gives the smaller matrix
    let (modulus, other) = if f.ydeg() <= g.ydeg() { (f, g) } else { (g, f) };
    let mat = multiplication_matrix(modulus, other.as_ypoly(), w);
    det_truncated(modulus.field(), mat, w, false).order
}

/// `i_0(f, g)` with the default configuration.
pub fn intersection_number<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    cap: u64,
) -> Result<IntersectionResult, OracleError> {
    intersection_number_with(f, g, &OracleConfig::with_cap(cap))
}

/// `i_0(f, g) = ord_x Res_y(f, g)`, doubling the working precision until the
/// order is below it or the cap is passed.
pub fn intersection_number_with<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<IntersectionResult, OracleError> {
    if config.cap < 1 {
        return Err(OracleError::InvalidCap);
    }
    if f.field() != g.field() {
        return Err(SeriesError::ContextMismatch.into());
    }
    if let (Some(rf), Some(rg)) = (IntegralImage::of(f), IntegralImage::of(g)) {
        return multimodular(&rf, &rg, config);
    }
    direct(f, g, config)
}

fn direct<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<IntersectionResult, OracleError> {
    let limit = (config.cap as usize).saturating_add(1);
    let input_bound = f.precision().min(g.precision()).bound();
    let mut t = config.initial_precision.max(1).min(limit);
    loop {
        let w = input_bound.map_or(t, |b| b.min(t));
        if let Some(order) = resultant_order(f, g, w) {
            return Ok(IntersectionResult {
                value: IntersectionNumber::Finite(order as u64),
                precision_used: w,
            });
        }
        if w < t || t >= limit {
            return Ok(IntersectionResult {
                value: IntersectionNumber::Exhausted { cap: config.cap },
                precision_used: w,
            });
        }
        t = (t * 2).min(limit);
    }
}

/// An exact branch with rational coefficients, with the common denominator
/// and the coefficient norm of its integral multiple.
struct IntegralImage {
    terms: Vec<(usize, usize, BigRational)>,
    ydeg: usize,
    denom: BigInt,
    norm: BigInt,
}

impl IntegralImage {
    fn of<F: Field>(f: &BranchPoly<F>) -> Option<Self> {
        if f.precision() != Precision::Exact {
            return None;
        }
        let field = f.field();
        let terms = f
            .as_ypoly()
            .terms()
            .into_iter()
            .map(|(y, x, c)| field.to_rational(&c).map(|c| (y, x, c)))
            .collect::<Option<Vec<_>>>()?;
        let denom = terms.iter().fold(BigInt::one(), |d, t| d.lcm(t.2.denom()));
        let norm = terms
            .iter()
            .map(|t| (t.2.abs() * BigRational::from(denom.clone())).to_integer())
            .sum();
        Some(Self {
            terms,
            ydeg: f.ydeg(),
            denom,
            norm,
        })
    }

    fn reduce(&self, fp: &PrimeField) -> Option<BranchPoly<PrimeField>> {
        let terms = self
            .terms
            .iter()
            .map(|(y, x, c)| fp.reduce(c).map(|c| (*y, *x, c)))
            .collect::<Option<Vec<_>>>()?;
        BranchPoly::try_from(YPoly::from_terms(fp, &terms, Precision::Exact)).ok()
    }
}

/// `ord_x Res_y(f, g)` for rational `f, g` from its images modulo primes.
///
/// With `F, G` the integral multiples of `f, g`, the lowest coefficient of
/// `Res_y(F, G)` is a nonzero integer of absolute value at most
/// `|F|_1^deg G |G|_1^deg F`. Each good prime gives an order at least the true
/// one, and primes whose product exceeds that bound cannot all divide it, so
/// the least order seen is exact.
fn multimodular(
    f: &IntegralImage,
    g: &IntegralImage,
    config: &OracleConfig,
) -> Result<IntersectionResult, OracleError> {
    if f.ydeg == g.ydeg && f.terms == g.terms {
        // Res = 0
        return Ok(IntersectionResult {
            value: IntersectionNumber::Exhausted { cap: config.cap },
            precision_used: (config.cap as usize).saturating_add(1),
        });
    }
    let bound = num_traits::pow(f.norm.clone(), g.ydeg) * num_traits::pow(g.norm.clone(), f.ydeg);
    let bad = &f.denom * &g.denom;
    let mut product = BigInt::one();
    let mut best: Option<IntersectionResult> = None;
    let mut precision_used = 0;
    let mut p = MAX_PRIME;
    while product <= bound {
        while !is_prime(p) || (&bad % p).is_zero() {
            p -= 2;
        }
        let fp = PrimeField::new(p).expect("prime below the word bound");
        p -= 2;
        let (Some(fr), Some(gr)) = (f.reduce(&fp), g.reduce(&fp)) else {
            continue;
        };
        product *= fp.modulus();
        let cfg = match best.and_then(|b| b.value.finite()) {
            Some(0) => break,
            // only a smaller value matters now
            Some(v) => OracleConfig {
                initial_precision: v as usize,
                cap: (v - 1).max(1),
            },
            None => *config,
        };
        let r = direct(&fr, &gr, &cfg)?;
        precision_used = precision_used.max(r.precision_used);
        match (r.value.finite(), best.and_then(|b| b.value.finite())) {
            (Some(v), Some(b)) if v >= b => {}
            (Some(_), _) | (None, None) => best = Some(r),
            (None, Some(_)) => {}
        }
    }
    let value = best.map_or(IntersectionNumber::Exhausted { cap: config.cap }, |b| b.value);
    Ok(IntersectionResult {
        value,
        precision_used,
    })
}

/// `i_0` as a plain number, failing on exhaustion.
pub fn i0<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<u64, OracleError> {
    intersection_number_with(f, g, config)?.value()
}

/// `d_x(f, g) = i_0(f, g) / (i_0(f, x) i_0(g, x))`.
pub fn dx<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<Ratio<u64>, OracleError> {
    let v = i0(f, g, config)?;
    Ok(Ratio::new(v, (f.mult_x() * g.mult_x()) as u64))
}

/// Logarithmic distance `d(f, g) = i_0(f, g) / (ord f · ord g)`.
pub fn logdist<F: Field>(
    f: &BranchPoly<F>,
    g: &BranchPoly<F>,
    config: &OracleConfig,
) -> Result<Ratio<u64>, OracleError> {
    let v = i0(f, g, config)?;
    Ok(Ratio::new(v, (f.order() * g.order()) as u64))
}

/// `gcd`-free helper used by reports: `a / b` in lowest terms.
pub fn ratio(a: u64, b: u64) -> Ratio<u64> {
    let g = a.gcd(&b).max(1);
    Ratio::new_raw(a / g, b / g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn poly(terms: &[(usize, usize, i64)]) -> YPoly<Rationals> {
        let t: Vec<_> = terms.iter().map(|&(j, i, c)| (j, i, q(c))).collect();
        YPoly::from_terms(&Rationals, &t, Precision::Exact)
    }

    fn branch(terms: &[(usize, usize, i64)]) -> BranchPoly<Rationals> {
        BranchPoly::try_from(poly(terms)).unwrap()
    }

    fn cusp() -> BranchPoly<Rationals> {
        branch(&[(2, 0, 1), (0, 3, 1)])
    }

    fn f413() -> BranchPoly<Rationals> {
        // (y^2 + x^3)^2 + x^5 y
        branch(&[(4, 0, 1), (2, 3, 2), (0, 6, 1), (1, 5, 1)])
    }

    /// Independent determinant: Laplace expansion over `K[x]/(x^w)`.
    fn laplace_det(m: &[Vec<XSeries<Rationals>>], w: usize) -> XSeries<Rationals> {
        let n = m.len();
        if n == 0 {
            return XSeries::one(&Rationals);
        }
        let mut acc = XSeries::zero(&Rationals, Precision::Exact);
        for c in 0..n {
            let minor: Vec<Vec<_>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, e)| e.clone())
                        .collect()
                })
                .collect();
            let term = (&m[0][c] * &laplace_det(&minor, w)).truncate(Precision::Mod(w));
            acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc.truncate(Precision::Mod(w))
    }

    /// Sylvester matrix built independently, entry by entry.
    fn sylvester_laplace(f: &YPoly<Rationals>, g: &YPoly<Rationals>, w: usize) -> XSeries<Rationals> {
        let m = f.ydeg().unwrap();
        let n = g.ydeg().unwrap();
        let size = m + n;
        let mut mat = vec![vec![XSeries::zero(&Rationals, Precision::Exact); size]; size];
        for r in 0..n {
            for j in 0..=m {
                mat[r][r + m - j] = f.coeff(j);
            }
        }
        for r in 0..m {
            for j in 0..=n {
                mat[n + r][r + n - j] = g.coeff(j);
            }
        }
        laplace_det(&mat, w)
    }

    #[test]
    fn resultant_examples() {
        let r = resultant_y(cusp().as_ypoly(), &YPoly::y(&Rationals), 16).unwrap();
        assert_eq!(r.order(), Some(3));
        assert_eq!(r.terms().count(), 1);

        let a = poly(&[(1, 0, 1), (0, 1, -1)]);
        let b = poly(&[(1, 0, 1), (0, 1, 1)]);
        let r = resultant_y(&a, &b, 16).unwrap();
        assert_eq!(r.order(), Some(1));
        let c = r.coeff(1);
        assert!(c == q(2) || c == q(-2));

        let r = resultant_y(f413().as_ypoly(), f413().as_ypoly(), 32).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn determinant_matches_laplace_expansion() {
        let pairs = [
            (cusp().into_ypoly(), poly(&[(2, 0, 1), (0, 3, 2)])),
            (f413().into_ypoly(), cusp().into_ypoly()),
            (poly(&[(3, 0, 1), (1, 2, 1), (0, 5, 3)]), poly(&[(2, 0, 1), (1, 1, -1), (0, 4, 1)])),
        ];
        for (f, g) in pairs {
            for w in [4, 9, 16] {
                assert_eq!(resultant_y(&f, &g, w).unwrap(), sylvester_laplace(&f, &g, w).truncate(Precision::Mod(w)));
            }
        }
    }

    #[test]
    fn sylvester_and_norm_routes_agree() {
        let gs = [
            cusp().into_ypoly(),
            poly(&[(2, 0, 1), (0, 3, 2)]),
            poly(&[(1, 0, 1), (0, 1, 1)]),
            poly(&[(3, 0, 1), (2, 1, 2), (0, 4, -1)]),
        ];
        for g in gs {
            let a = resultant_y(f413().as_ypoly(), &g, 40).unwrap();
            let b = norm_resultant(&f413(), &g, 40).unwrap();
            assert!(a == b || a == -&b, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn intersection_examples() {
        let cap = DEFAULT_CAP;
        let y = BranchPoly::y(&Rationals);
        let v = |f: &BranchPoly<Rationals>, g: &BranchPoly<Rationals>| {
            intersection_number(f, g, cap).unwrap().value
        };
        assert_eq!(v(&cusp(), &y), IntersectionNumber::Finite(3));
        let cusp2 = branch(&[(2, 0, 1), (0, 3, 2)]);
        assert_eq!(v(&cusp(), &cusp2), IntersectionNumber::Finite(6));
        assert_eq!(v(&f413(), &cusp()), IntersectionNumber::Finite(13));
        assert_eq!(v(&f413(), &y), IntersectionNumber::Finite(6));
        assert_eq!(
            v(&cusp(), &cusp()),
            IntersectionNumber::Exhausted { cap }
        );
        assert_eq!(
            intersection_number(&cusp(), &y, 0),
            Err(OracleError::InvalidCap)
        );
    }

    #[test]
    fn exhaustion_respects_small_caps() {
        let y = BranchPoly::y(&Rationals);
        let r = intersection_number(&cusp(), &y, 2).unwrap();
        assert_eq!(r.value, IntersectionNumber::Exhausted { cap: 2 });
        let r = intersection_number(&cusp(), &y, 3).unwrap();
        assert_eq!(r.value, IntersectionNumber::Finite(3));
    }

    #[test]
    fn finite_input_precision_limits_the_answer() {
        // (1 + x^2) y^2 + x^3 normalised mod x^12 still meets y^2 + x^3 in 10
        let g = poly(&[(2, 0, 1), (2, 2, 1), (0, 3, 1)]).normalize_monic(12).unwrap();
        let cfg = OracleConfig::default();
        assert_eq!(i0(&cusp(), &g, &cfg).unwrap(), 10);
        let coarse = g.truncate(Precision::Mod(8));
        assert_eq!(
            i0(&cusp(), &coarse, &cfg),
            Err(OracleError::PrecisionExhausted { cap: DEFAULT_CAP })
        );
    }

    #[test]
    fn dx_and_logdist_examples() {
        let cfg = OracleConfig::default();
        let y = BranchPoly::y(&Rationals);
        assert_eq!(dx(&cusp(), &y, &cfg).unwrap(), Ratio::new(3, 2));
        let cusp2 = branch(&[(2, 0, 1), (0, 3, 2)]);
        assert_eq!(dx(&cusp(), &cusp2, &cfg).unwrap(), Ratio::new(3, 2));
        assert_eq!(dx(&f413(), &cusp(), &cfg).unwrap(), Ratio::new(13, 8));
        assert_eq!(logdist(&cusp(), &y, &cfg).unwrap(), Ratio::new(3, 2));
        let line = branch(&[(1, 0, 1), (0, 1, 1)]);
        assert_eq!(i0(&cusp(), &line, &cfg).unwrap(), 2);
        assert_eq!(logdist(&cusp(), &line, &cfg).unwrap(), Ratio::new(1, 1));
        assert_eq!(logdist(&f413(), &cusp(), &cfg).unwrap(), Ratio::new(13, 8));
        assert!(matches!(
            dx(&cusp(), &cusp(), &cfg),
            Err(OracleError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn prime_field_matches_rationals_on_integer_examples() {
        let fp = PrimeField::new(101).unwrap();
        let f = BranchPoly::try_from(YPoly::from_terms(
            &fp,
            &[(4, 0, 1), (2, 3, 2), (0, 6, 1), (1, 5, 1)],
            Precision::Exact,
        ))
        .unwrap();
        let g = BranchPoly::try_from(YPoly::from_terms(&fp, &[(2, 0, 1), (0, 3, 1)], Precision::Exact)).unwrap();
        assert_eq!(i0(&f, &g, &OracleConfig::default()).unwrap(), 13);
    }

    #[test]
    fn precision_soundness_on_examples() {
        let y = BranchPoly::y(&Rationals);
        let pairs = [(f413(), cusp()), (cusp(), y.clone()), (f413(), y)];
        for (f, g) in pairs {
            let base = i0(&f, &g, &OracleConfig::default()).unwrap();
            for start in [base as usize + 1, 2 * base as usize + 3, 200] {
                let cfg = OracleConfig { initial_precision: start, cap: DEFAULT_CAP };
                let r = intersection_number_with(&f, &g, &cfg).unwrap();
                assert_eq!(r.value, IntersectionNumber::Finite(base));
            }
        }
    }

    #[test]
    fn multimodular_survives_an_unlucky_prime() {
        let q = Rationals;
        let big = BigRational::from(BigInt::from(MAX_PRIME));
        // Res = P x + x^2 has order 1, but 2 modulo P
        let f = BranchPoly::try_from(YPoly::from_terms(&q, &[(1, 0, q.one())], Precision::Exact)).unwrap();
        let g = BranchPoly::try_from(YPoly::from_terms(
            &q,
            &[(1, 0, q.one()), (0, 1, big), (0, 2, q.one())],
            Precision::Exact,
        ))
        .unwrap();
        let fp = PrimeField::new(MAX_PRIME).unwrap();
        let (fr, gr) = (IntegralImage::of(&f).unwrap().reduce(&fp).unwrap(), IntegralImage::of(&g).unwrap().reduce(&fp).unwrap());
        assert_eq!(i0(&fr, &gr, &OracleConfig::default()), Ok(2));
        assert_eq!(i0(&f, &g, &OracleConfig::default()), Ok(1));
        assert_eq!(direct(&f, &g, &OracleConfig::default()).unwrap().value.finite(), Some(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random monic distinguished polynomial over F_101 of y-degree 1..=3.
        fn branch_poly() -> impl Strategy<Value = BranchPoly<PrimeField>> {
            (1usize..=3, proptest::collection::vec((0usize..3, 1usize..6, 1u64..101), 1..5)).prop_map(
                |(n, terms)| {
                    let fp = PrimeField::new(101).unwrap();
                    let mut t: Vec<(usize, usize, u64)> =
                        terms.into_iter().filter(|(j, _, _)| *j < n).collect();
                    t.push((n, 0, 1));
                    BranchPoly::try_from(YPoly::from_terms(&fp, &t, Precision::Exact)).unwrap()
                },
            )
        }

        /// Same shape over the rationals, with small denominators.
        fn rational_branch() -> impl Strategy<Value = BranchPoly<Rationals>> {
            (1usize..=3, proptest::collection::vec((0usize..3, 1usize..6, -30i64..30, 1i64..7), 1..5)).prop_map(
                |(n, terms)| {
                    let mut t: Vec<(usize, usize, BigRational)> = terms
                        .into_iter()
                        .filter(|&(j, _, a, _)| j < n && a != 0)
                        .map(|(j, i, a, b)| (j, i, BigRational::new(a.into(), b.into())))
                        .collect();
                    t.push((n, 0, BigRational::one()));
                    BranchPoly::try_from(YPoly::from_terms(&Rationals, &t, Precision::Exact)).unwrap()
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn multimodular_matches_rational_elimination(f in rational_branch(), g in rational_branch()) {
                let cfg = OracleConfig::with_cap(256);
                let a = intersection_number_with(&f, &g, &cfg).unwrap().value;
                let b = direct(&f, &g, &cfg).unwrap().value;
                prop_assert_eq!(a, b);
            }

            #[test]
            fn symmetric(f in branch_poly(), g in branch_poly()) {
                let cfg = OracleConfig::with_cap(512);
                let a = intersection_number_with(&f, &g, &cfg).unwrap().value;
                let b = intersection_number_with(&g, &f, &cfg).unwrap().value;
                prop_assert_eq!(a, b);
            }

            #[test]
            fn multiplicative(f in branch_poly(), g in branch_poly(), h in branch_poly()) {
                let cfg = OracleConfig::with_cap(512);
                let gh = g.mul(&h).unwrap();
                let lhs = intersection_number_with(&f, &gh, &cfg).unwrap().value.finite();
                let a = intersection_number_with(&f, &g, &cfg).unwrap().value.finite();
                let b = intersection_number_with(&f, &h, &cfg).unwrap().value.finite();
                if let (Some(a), Some(b)) = (a, b) {
                    prop_assert_eq!(lhs, Some(a + b));
                }
            }

            #[test]
            fn bounded_below_by_orders(f in branch_poly(), g in branch_poly()) {
                let cfg = OracleConfig::with_cap(512);
                if let Some(v) = intersection_number_with(&f, &g, &cfg).unwrap().value.finite() {
                    prop_assert!(v >= (f.order() * g.order()) as u64);
                }
            }

            #[test]
            fn doubling_never_changes_a_finite_answer(f in branch_poly(), g in branch_poly()) {
                let cfg = OracleConfig::with_cap(512);
                if let Some(v) = intersection_number_with(&f, &g, &cfg).unwrap().value.finite() {
                    for start in [v as usize + 1, 2 * v as usize + 2] {
                        let c = OracleConfig { initial_precision: start, cap: 512 };
                        prop_assert_eq!(intersection_number_with(&f, &g, &c).unwrap().value.finite(), Some(v));
                    }
                }
            }

            #[test]
            fn sylvester_and_norm_agree(f in branch_poly(), g in branch_poly()) {
                let a = resultant_y(f.as_ypoly(), g.as_ypoly(), 20).unwrap();
                let b = norm_resultant(&f, g.as_ypoly(), 20).unwrap();
                prop_assert!(a == b || a == -&b);
            }
        }
    }
}
