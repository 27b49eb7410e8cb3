//! JSON forms of branches and recipes. Field elements are written as strings
//! so that rationals travel without loss; keys come out sorted, so
//! serialize → parse → serialize is byte-identical.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::charseq::{CharSeqError, CharSequence};
use crate::field::{Field, FieldError};
use crate::series::{BranchPoly, Precision, SeriesError, YPoly};
use crate::tower::{build_tower_with, BranchSpec, KeyTower, Perturbation, TowerError};
use crate::oracle::OracleConfig;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("term y^{y} x^{x} is outside a branch of y-degree {ydeg} known mod x^{precision}")]
    TermOutOfRange {
        y: usize,
        x: usize,
        ydeg: usize,
        precision: String,
    },
    #[error("recipe is for field {found}, but the run uses {expected}")]
    FieldMismatch { expected: String, found: String },
    #[error("expected a branch, a recipe or a build result")]
    UnknownShape,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    CharSeq(#[from] CharSeqError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// `Precision` as an integer or the string `"exact"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecisionJson {
    Mod(usize),
    Tag(ExactTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactTag {
    Exact,
}

impl From<Precision> for PrecisionJson {
    fn from(p: Precision) -> Self {
        match p {
            Precision::Mod(t) => PrecisionJson::Mod(t),
            Precision::Exact => PrecisionJson::Tag(ExactTag::Exact),
        }
    }
}

impl From<PrecisionJson> for Precision {
    fn from(p: PrecisionJson) -> Self {
        match p {
            PrecisionJson::Mod(t) => Precision::Mod(t),
            PrecisionJson::Tag(ExactTag::Exact) => Precision::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub y: usize,
    pub x: usize,
    pub c: String,
}

/// A branch: the monic `y^ydeg` is implicit, the other terms are listed by
/// y-degree then x-degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPolyJson {
    pub ydeg: usize,
    pub precision: PrecisionJson,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationJson {
    pub a: Vec<u64>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpecJson {
    pub field: String,
    pub char: Vec<u64>,
    pub xi: Vec<String>,
    #[serde(default)]
    pub perturbations: Vec<PerturbationJson>,
}

/// Output of `branch build`: the recipe, the branch and its key polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerJson {
    pub spec: BranchSpecJson,
    pub branch: BranchPolyJson,
    pub keys: Vec<BranchPolyJson>,
}

pub fn branch_to_json<F: Field>(p: &BranchPoly<F>) -> BranchPolyJson {
    let n = p.ydeg();
    let field = p.field();
    let mut terms: Vec<TermJson> = p
        .as_ypoly()
        .terms()
        .into_iter()
        .filter(|(j, _, _)| *j < n)
        .map(|(y, x, c)| TermJson {
            y,
            x,
            c: field.format(&c),
        })
        .collect();
    terms.sort_by_key(|t| (t.y, t.x));
    BranchPolyJson {
        ydeg: n,
        precision: p.precision().into(),
        terms,
    }
}

pub fn branch_from_json<F: Field>(field: &F, j: &BranchPolyJson) -> Result<BranchPoly<F>, JsonError> {
    let precision: Precision = j.precision.into();
    let mut terms = Vec::with_capacity(j.terms.len() + 1);
    for t in &j.terms {
        if t.y >= j.ydeg || !precision.covers(t.x) {
            return Err(JsonError::TermOutOfRange {
                y: t.y,
                x: t.x,
                ydeg: j.ydeg,
                precision: precision.to_string(),
            });
        }
        terms.push((t.y, t.x, field.parse(&t.c)?));
    }
    terms.push((j.ydeg, 0, field.one()));
    Ok(BranchPoly::try_from(YPoly::from_terms(field, &terms, precision))?)
}

pub fn spec_to_json<F: Field>(s: &BranchSpec<F>) -> BranchSpecJson {
    let f = s.field();
    BranchSpecJson {
        field: f.tag(),
        char: s.charseq().values().to_vec(),
        xi: s.xi().iter().map(|c| f.format(c)).collect(),
        perturbations: s
            .perturbations()
            .iter()
            .map(|p| PerturbationJson {
                a: p.exponents.clone(),
                c: f.format(&p.coeff),
            })
            .collect(),
    }
}

pub fn spec_from_json<F: Field>(field: &F, j: &BranchSpecJson) -> Result<BranchSpec<F>, JsonError> {
    if j.field != field.tag() {
        return Err(JsonError::FieldMismatch {
            expected: field.tag(),
            found: j.field.clone(),
        });
    }
    let seq = CharSequence::new(&j.char)?;
    let xi = j
        .xi
        .iter()
        .map(|c| field.parse(c))
        .collect::<Result<Vec<_>, _>>()?;
    let ps = j
        .perturbations
        .iter()
        .map(|p| Ok(Perturbation::new(p.a.clone(), field.parse(&p.c)?)))
        .collect::<Result<Vec<_>, FieldError>>()?;
    Ok(BranchSpec::new(field, seq, xi, ps)?)
}

pub fn tower_to_json<F: Field>(t: &KeyTower<F>) -> TowerJson {
    TowerJson {
        spec: spec_to_json(t.spec()),
        branch: branch_to_json(t.branch()),
        keys: t.polys().iter().map(branch_to_json).collect(),
    }
}

/// What a JSON input file may hold.
pub enum Loaded<F: Field> {
    Branch(BranchPoly<F>),
    Spec(BranchSpec<F>),
}

/// Reads a bare branch, a recipe, or a build result (whose recipe is used).
pub fn load<F: Field>(field: &F, text: &str) -> Result<Loaded<F>, JsonError> {
    let v: Value = serde_json::from_str(text)?;
    let Value::Object(map) = &v else {
        return Err(JsonError::UnknownShape);
    };
    if let Some(spec) = map.get("spec") {
        let j: BranchSpecJson = serde_json::from_value(spec.clone())?;
        return Ok(Loaded::Spec(spec_from_json(field, &j)?));
    }
    if map.contains_key("char") {
        let j: BranchSpecJson = serde_json::from_value(v)?;
        return Ok(Loaded::Spec(spec_from_json(field, &j)?));
    }
    if map.contains_key("ydeg") {
        let j: BranchPolyJson = serde_json::from_value(v)?;
        return Ok(Loaded::Branch(branch_from_json(field, &j)?));
    }
    Err(JsonError::UnknownShape)
}

/// A branch from any accepted input; recipes are built and verified first.
pub fn load_branch<F: Field>(field: &F, text: &str, config: &OracleConfig) -> Result<BranchPoly<F>, JsonError> {
    match load(field, text)? {
        Loaded::Branch(b) => Ok(b),
        Loaded::Spec(s) => Ok(build_tower_with(&s, config)?.branch().clone()),
    }
}

/// A verified tower; needs a recipe or a build result.
pub fn load_tower<F: Field>(field: &F, text: &str, config: &OracleConfig) -> Result<KeyTower<F>, JsonError> {
    match load(field, text)? {
        Loaded::Spec(s) => Ok(build_tower_with(&s, config)?),
        Loaded::Branch(_) => Err(JsonError::UnknownShape),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals, SeedStream};
    use crate::tower::build_tower;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn seq(v: &[u64]) -> CharSequence {
        CharSequence::new(v).unwrap()
    }

    #[test]
    fn cusp_json() {
        let t = build_tower(&BranchSpec::standard(&Rationals, seq(&[2, 3]))).unwrap();
        let s = serde_json::to_string(&branch_to_json(t.branch())).unwrap();
        assert_eq!(s, r#"{"ydeg":2,"precision":"exact","terms":[{"y":0,"x":3,"c":"1"}]}"#);
    }

    #[test]
    fn branch_round_trip_is_byte_identical() {
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let p = YPoly::from_terms(
            &Rationals,
            &[(3, 0, q(1, 1)), (1, 2, q(-3, 7)), (0, 5, q(2, 1)), (0, 4, q(1, 2))],
            Precision::Mod(9),
        );
        let b = BranchPoly::try_from(p).unwrap();
        let s1 = serde_json::to_string(&branch_to_json(&b)).unwrap();
        let back = branch_from_json(&Rationals, &serde_json::from_str(&s1).unwrap()).unwrap();
        assert_eq!(back, b);
        assert_eq!(serde_json::to_string(&branch_to_json(&back)).unwrap(), s1);
    }

    #[test]
    fn spec_round_trip_is_byte_identical() {
        let fp = PrimeField::new(101).unwrap();
        let mut rng = SeedStream::new(3);
        let spec = BranchSpec::random(&fp, seq(&[4, 6, 13]), &mut rng)
            .with_perturbation(Perturbation::new(vec![4, 1, 1], fp.from_i64(-2)))
            .unwrap();
        let s1 = serde_json::to_string(&spec_to_json(&spec)).unwrap();
        let back = spec_from_json(&fp, &serde_json::from_str(&s1).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(serde_json::to_string(&spec_to_json(&back)).unwrap(), s1);
        assert!(matches!(
            spec_from_json(&Rationals, &serde_json::from_str(&s1).unwrap()),
            Err(JsonError::FieldMismatch { .. })
        ));
    }

    #[test]
    fn loading_accepts_every_shape() {
        let cfg = OracleConfig::default();
        let t = build_tower(&BranchSpec::standard(&Rationals, seq(&[4, 6, 13]))).unwrap();
        let built = serde_json::to_string(&tower_to_json(&t)).unwrap();
        let spec = serde_json::to_string(&spec_to_json(t.spec())).unwrap();
        let bare = serde_json::to_string(&branch_to_json(t.branch())).unwrap();
        for text in [&built, &spec, &bare] {
            assert_eq!(&load_branch(&Rationals, text, &cfg).unwrap(), t.branch());
        }
        assert_eq!(load_tower(&Rationals, &built, &cfg).unwrap(), t);
        assert!(matches!(load_tower(&Rationals, &bare, &cfg), Err(JsonError::UnknownShape)));
        assert!(matches!(load_branch(&Rationals, "[1]", &cfg), Err(JsonError::UnknownShape)));
    }

    #[test]
    fn malformed_terms_are_rejected() {
        let bad = r#"{"ydeg":2,"precision":"exact","terms":[{"y":2,"x":1,"c":"1"}]}"#;
        assert!(matches!(
            branch_from_json(&Rationals, &serde_json::from_str(bad).unwrap()),
            Err(JsonError::TermOutOfRange { .. })
        ));
        let bad = r#"{"ydeg":2,"precision":4,"terms":[{"y":0,"x":4,"c":"1"}]}"#;
        assert!(branch_from_json(&Rationals, &serde_json::from_str(bad).unwrap()).is_err());
        let not_distinguished = r#"{"ydeg":2,"precision":"exact","terms":[{"y":0,"x":0,"c":"1"}]}"#;
        assert!(matches!(
            branch_from_json(&Rationals, &serde_json::from_str(not_distinguished).unwrap()),
            Err(JsonError::Series(SeriesError::NotDistinguished(0)))
        ));
    }
}
