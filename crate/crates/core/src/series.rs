//! Power series in `x` known modulo `x^T`, polynomials in `y` over them, and
//! the monic distinguished polynomials that stand for branches.
//!
//! A series is either exact (a polynomial, known to every precision) or known
//! modulo `x^T`. Every operation returns the weakest precision of its inputs,
//! so a coefficient that is reported is always correct.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("polynomial is not monic in y")]
    NotMonic,
    #[error("polynomial is not distinguished: the y^{0} coefficient does not vanish at x = 0")]
    NotDistinguished(usize),
    #[error("a branch polynomial must have positive degree in y")]
    ConstantInY,
    #[error("leading coefficient is not a unit of K[[x]]")]
    LeadingNotUnit,
    #[error("perturbation term of y-degree {term} does not stay below the branch degree {branch}")]
    PerturbationDegree { term: usize, branch: usize },
    #[error("precision {precision} is too small to certify a polynomial of y-degree {ydeg}")]
    PrecisionTooSmall { precision: usize, ydeg: usize },
}

/// How much of a series is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    /// Known modulo `x^T`.
    Mod(usize),
    /// Known completely (a polynomial in `x`).
    Exact,
}

impl Precision {
    pub fn bound(self) -> Option<usize> {
        match self {
            Precision::Mod(t) => Some(t),
            Precision::Exact => None,
        }
    }

    pub fn is_exact(self) -> bool {
        self == Precision::Exact
    }

    /// Precision after multiplying by `x^k`.
    pub fn shifted(self, k: usize) -> Precision {
        match self {
            Precision::Mod(t) => Precision::Mod(t + k),
            Precision::Exact => Precision::Exact,
        }
    }

    /// `true` when the coefficient of `x^i` is known.
    pub fn covers(self, i: usize) -> bool {
        match self {
            Precision::Mod(t) => i < t,
            Precision::Exact => true,
        }
    }
}

impl PartialOrd for Precision {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Precision {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Precision::Exact, Precision::Exact) => Ordering::Equal,
            (Precision::Exact, Precision::Mod(_)) => Ordering::Greater,
            (Precision::Mod(_), Precision::Exact) => Ordering::Less,
            (Precision::Mod(a), Precision::Mod(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Mod(t) => write!(f, "O(x^{t})"),
            Precision::Exact => f.write_str("exact"),
        }
    }
}

/// A univariate series in `x`.
///
/// Coefficients are stored densely by exponent with trailing zeros removed;
/// every stored exponent is below the precision bound.
#[derive(Clone, Debug, PartialEq)]
pub struct XSeries<F: Field> {
    field: F,
    coeffs: Vec<F::Elem>,
    precision: Precision,
}

impl<F: Field> XSeries<F> {
    pub fn new(field: &F, mut coeffs: Vec<F::Elem>, precision: Precision) -> Self {
        if let Precision::Mod(t) = precision {
            coeffs.truncate(t);
        }
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        Self {
            field: field.clone(),
            coeffs,
            precision,
        }
    }

    pub fn zero(field: &F, precision: Precision) -> Self {
        Self::new(field, Vec::new(), precision)
    }

    pub fn constant(field: &F, c: F::Elem, precision: Precision) -> Self {
        Self::new(field, vec![c], precision)
    }

    pub fn one(field: &F) -> Self {
        Self::constant(field, field.one(), Precision::Exact)
    }

    /// `c * x^exp`, exact.
    pub fn monomial(field: &F, c: F::Elem, exp: usize) -> Self {
        let mut coeffs = vec![field.zero(); exp + 1];
        coeffs[exp] = c;
        Self::new(field, coeffs, Precision::Exact)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Dense coefficients, index = exponent.
    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> F::Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &F::Elem)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !self.field.is_zero(c))
    }

    /// `true` when no nonzero coefficient is known.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The x-adic order, or `None` when the series vanishes to its known
    /// precision (or is exactly zero).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !self.field.is_zero(c))
    }

    /// Exponent of the last stored coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn truncate(&self, precision: Precision) -> Self {
        Self::new(
            &self.field,
            self.coeffs.clone(),
            self.precision.min(precision),
        )
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(SeriesError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => f.add(a, b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Ok(Self::new(f, coeffs, self.precision.min(other.precision)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let f = &self.field;
        let precision = self.precision.min(other.precision);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(f, precision));
        }
        let mut len = self.coeffs.len() + other.coeffs.len() - 1;
        if let Some(t) = precision.bound() {
            len = len.min(t);
        }
        let mut out = vec![f.zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                f.mul_add_assign(&mut out[i + j], a, b);
            }
        }
        Ok(Self::new(f, out, precision))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        Self::new(
            f,
            self.coeffs.iter().map(|a| f.mul(a, c)).collect(),
            self.precision,
        )
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        let f = &self.field;
        if self.is_zero() {
            return Self::zero(f, self.precision.shifted(k));
        }
        let mut coeffs = vec![f.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(f, coeffs, self.precision.shifted(k))
    }

    /// Inverse of a unit (nonzero constant term), computed modulo `x^t`
    /// (and never beyond the series' own precision).
    pub fn inverse(&self, t: usize) -> Result<Self, SeriesError> {
        let f = &self.field;
        let a0 = f.inv(&self.coeff(0)).ok_or(SeriesError::LeadingNotUnit)?;
        let t = self.precision.bound().map_or(t, |p| p.min(t));
        let mut out = vec![f.zero(); t];
        if t > 0 {
            out[0] = a0.clone();
        }
        for k in 1..t {
            let mut s = f.zero();
            for j in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                f.mul_add_assign(&mut s, &self.coeffs[j], &out[k - j]);
            }
            out[k] = f.neg(&f.mul(&s, &a0));
        }
        Ok(Self::new(f, out, Precision::Mod(t)))
    }
}

impl<F: Field> Add for &XSeries<F> {
    type Output = XSeries<F>;
    fn add(self, rhs: Self) -> XSeries<F> {
        self.checked_add(rhs).expect("series context mismatch")
    }
}

impl<F: Field> Sub for &XSeries<F> {
    type Output = XSeries<F>;
    fn sub(self, rhs: Self) -> XSeries<F> {
        self.checked_sub(rhs).expect("series context mismatch")
    }
}

impl<F: Field> Mul for &XSeries<F> {
    type Output = XSeries<F>;
    fn mul(self, rhs: Self) -> XSeries<F> {
        self.checked_mul(rhs).expect("series context mismatch")
    }
}

impl<F: Field> Neg for &XSeries<F> {
    type Output = XSeries<F>;
    fn neg(self) -> XSeries<F> {
        let f = &self.field;
        XSeries {
            field: f.clone(),
            coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect(),
            precision: self.precision,
        }
    }
}

/// A polynomial in `y` whose coefficients are series in `x`, all known to
/// one shared precision. No monicity is assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct YPoly<F: Field> {
    field: F,
    coeffs: Vec<XSeries<F>>,
    precision: Precision,
}

impl<F: Field> YPoly<F> {
    /// Builds a polynomial from its `y^0, y^1, ...` coefficients. The shared
    /// precision is the weakest among them.
    pub fn new(field: &F, coeffs: Vec<XSeries<F>>) -> Self {
        let precision = coeffs
            .iter()
            .map(XSeries::precision)
            .min()
            .unwrap_or(Precision::Exact);
        Self::with_precision(field, coeffs, precision)
    }

    fn with_precision(field: &F, coeffs: Vec<XSeries<F>>, precision: Precision) -> Self {
        let mut coeffs: Vec<XSeries<F>> =
            coeffs.into_iter().map(|c| c.truncate(precision)).collect();
        while coeffs.last().is_some_and(XSeries::is_zero) {
            coeffs.pop();
        }
        Self {
            field: field.clone(),
            coeffs,
            precision,
        }
    }

    pub fn zero(field: &F) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn one(field: &F) -> Self {
        Self::new(field, vec![XSeries::one(field)])
    }

    /// The polynomial `y`.
    pub fn y(field: &F) -> Self {
        Self::new(
            field,
            vec![XSeries::zero(field, Precision::Exact), XSeries::one(field)],
        )
    }

    /// `c * x^i * y^j`, exact.
    pub fn monomial(field: &F, c: F::Elem, i: usize, j: usize) -> Self {
        let mut coeffs = vec![XSeries::zero(field, Precision::Exact); j];
        coeffs.push(XSeries::monomial(field, c, i));
        Self::new(field, coeffs)
    }

    /// Builds an exact polynomial from `(y, x, c)` terms; repeated terms add.
    pub fn from_terms(field: &F, terms: &[(usize, usize, F::Elem)], precision: Precision) -> Self {
        let ydeg = terms.iter().map(|t| t.0).max();
        let Some(ydeg) = ydeg else {
            return Self::with_precision(field, Vec::new(), precision);
        };
        let mut dense: Vec<Vec<F::Elem>> = vec![Vec::new(); ydeg + 1];
        for (j, i, c) in terms {
            let row = &mut dense[*j];
            if row.len() <= *i {
                row.resize(i + 1, field.zero());
            }
            row[*i] = field.add(&row[*i], c);
        }
        let coeffs = dense
            .into_iter()
            .map(|c| XSeries::new(field, c, precision))
            .collect();
        Self::with_precision(field, coeffs, precision)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Degree in `y`; `None` for the zero polynomial.
    pub fn ydeg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficients of `y^0, y^1, ...`.
    pub fn coeffs(&self) -> &[XSeries<F>] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> XSeries<F> {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| XSeries::zero(&self.field, self.precision))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero terms as `(y exponent, x exponent, coefficient)`, sorted.
    pub fn terms(&self) -> Vec<(usize, usize, F::Elem)> {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(j, s)| s.terms().map(move |(i, c)| (j, i, c.clone())))
            .collect()
    }

    pub fn truncate(&self, precision: Precision) -> Self {
        Self::with_precision(
            &self.field,
            self.coeffs.clone(),
            self.precision.min(precision),
        )
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(SeriesError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let precision = self.precision.min(other.precision);
        let coeffs = (0..n)
            .map(|j| self.coeff(j).checked_add(&other.coeff(j)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::with_precision(&self.field, coeffs, precision))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let precision = self.precision.min(other.precision);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::with_precision(&self.field, Vec::new(), precision));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![XSeries::zero(&self.field, precision); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a.checked_mul(b)?.truncate(precision);
                coeffs[i + j] = coeffs[i + j].checked_add(&prod)?;
            }
        }
        Ok(Self::with_precision(&self.field, coeffs, precision))
    }

    pub fn pow(&self, m: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field).truncate(self.precision);
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        Self::with_precision(
            &self.field,
            self.coeffs.iter().map(|s| s.scale(c)).collect(),
            self.precision,
        )
    }

    /// Multiply by `x^k`.
    pub fn shift_x(&self, k: usize) -> Self {
        Self::with_precision(
            &self.field,
            self.coeffs.iter().map(|s| s.shift(k)).collect(),
            self.precision.shifted(k),
        )
    }

    /// Multiply by a series in `x`.
    pub fn mul_series(&self, s: &XSeries<F>) -> Result<Self, SeriesError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.checked_mul(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(&self.field, coeffs))
    }

    /// Divides by a unit leading coefficient, producing the monic
    /// distinguished polynomial of the same curve germ (same intersection
    /// numbers), known modulo `x^precision`.
    pub fn normalize_monic(&self, precision: usize) -> Result<BranchPoly<F>, SeriesError> {
        let n = self.ydeg().ok_or(SeriesError::ConstantInY)?;
        let lead_inv = self.coeffs[n].inverse(precision)?;
        let mut p = self.mul_series(&lead_inv)?;
        // leading coefficient is 1 up to the working precision; pin it exactly
        p.coeffs[n] = XSeries::one(&self.field).truncate(p.precision);
        BranchPoly::try_from(p)
    }
}

impl<F: Field> Add for &YPoly<F> {
    type Output = YPoly<F>;
    fn add(self, rhs: Self) -> YPoly<F> {
        self.checked_add(rhs).expect("polynomial context mismatch")
    }
}

impl<F: Field> Sub for &YPoly<F> {
    type Output = YPoly<F>;
    fn sub(self, rhs: Self) -> YPoly<F> {
        self.checked_sub(rhs).expect("polynomial context mismatch")
    }
}

impl<F: Field> Mul for &YPoly<F> {
    type Output = YPoly<F>;
    fn mul(self, rhs: Self) -> YPoly<F> {
        self.checked_mul(rhs).expect("polynomial context mismatch")
    }
}

impl<F: Field> Neg for &YPoly<F> {
    type Output = YPoly<F>;
    fn neg(self) -> YPoly<F> {
        YPoly {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            precision: self.precision,
        }
    }
}

impl<F: Field> fmt::Display for YPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            f.write_str("0")?;
        }
        for (k, (j, i, c)) in terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono = match (i, j) {
                (0, 0) => String::new(),
                (i, 0) => format!("x^{i}"),
                (0, j) => format!("y^{j}"),
                (i, j) => format!("x^{i}*y^{j}"),
            };
            let c = self.field.format(c);
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c == "1" || c.starts_with("1 mod") {
                write!(f, "{mono}")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        if let Precision::Mod(t) = self.precision {
            write!(f, " + O(x^{t})")?;
        }
        Ok(())
    }
}

/// A monic polynomial in `y` of positive degree whose lower coefficients all
/// vanish at `x = 0`, so that `f(0, y) = y^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchPoly<F: Field>(YPoly<F>);

impl<F: Field> TryFrom<YPoly<F>> for BranchPoly<F> {
    type Error = SeriesError;

    fn try_from(p: YPoly<F>) -> Result<Self, SeriesError> {
        let n = match p.ydeg() {
            None | Some(0) => return Err(SeriesError::ConstantInY),
            Some(n) => n,
        };
        let lead = &p.coeffs[n];
        let f = &p.field;
        if !(lead.coeffs().len() == 1 && lead.coeffs()[0] == f.one()) {
            return Err(SeriesError::NotMonic);
        }
        if let Some(t) = p.precision.bound() {
            if t <= n {
                return Err(SeriesError::PrecisionTooSmall { precision: t, ydeg: n });
            }
        }
        for (j, c) in p.coeffs[..n].iter().enumerate() {
            if !f.is_zero(&c.coeff(0)) {
                return Err(SeriesError::NotDistinguished(j));
            }
        }
        Ok(BranchPoly(p))
    }
}

impl<F: Field> BranchPoly<F> {
    /// The smooth branch `y`.
    pub fn y(field: &F) -> Self {
        BranchPoly(YPoly::y(field))
    }

    pub fn as_ypoly(&self) -> &YPoly<F> {
        &self.0
    }

    pub fn into_ypoly(self) -> YPoly<F> {
        self.0
    }

    pub fn field(&self) -> &F {
        &self.0.field
    }

    pub fn precision(&self) -> Precision {
        self.0.precision
    }

    pub fn ydeg(&self) -> usize {
        self.0.coeffs.len() - 1
    }

    /// `i_0(f, x)`; equal to the y-degree because `f(0, y) = y^n`.
    pub fn mult_x(&self) -> usize {
        self.ydeg()
    }

    /// The multiplicity `ord f`: least total degree of a monomial.
    pub fn order(&self) -> usize {
        let n = self.ydeg();
        self.0.coeffs[..n]
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.order().map(|i| i + j))
            .fold(n, usize::min)
    }

    /// `f(x, 0)`.
    pub fn eval_y_zero(&self) -> XSeries<F> {
        self.0.coeff(0)
    }

    pub fn truncate(&self, precision: Precision) -> Self {
        BranchPoly(self.0.truncate(precision))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.0.checked_mul(&other.0).map(BranchPoly)
    }

    pub fn pow(&self, m: u32) -> Self {
        if m == 0 {
            // y^0 is not a branch; callers wanting the unit use YPoly
            return self.clone();
        }
        BranchPoly(self.0.pow(m))
    }

    /// `f + term`, where `term` has y-degree below `ydeg(f)` and every
    /// coefficient divisible by `x`. The result is again monic and
    /// distinguished.
    pub fn perturbed(&self, term: &YPoly<F>) -> Result<Self, SeriesError> {
        if let Some(d) = term.ydeg() {
            if d >= self.ydeg() {
                return Err(SeriesError::PerturbationDegree {
                    term: d,
                    branch: self.ydeg(),
                });
            }
        }
        BranchPoly::try_from(self.0.checked_add(term)?)
    }
}

impl<F: Field> fmt::Display for BranchPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
