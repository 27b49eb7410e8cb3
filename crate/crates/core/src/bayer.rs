//! Intersection numbers attainable between two equisingularity classes.
//!
//! For characteristics `(v_i)`, `(v'_i)` put
//! `I_k = inf(e_{k-1} v'_k, e'_{k-1} v_k)` and let `rho` be the largest index
//! with `v_j / v_0 = v'_j / v'_0` for all `j <= rho`. The attainable values
//! are the `N > 0` with `I_{k-1} <= N < I_k` and `e_{k-1} e'_{k-1} | N` for
//! some `1 <= k <= rho + 1`. When `I_{rho+1}` is finite it is attainable as
//! well; [`Mode::Literal`] leaves it out and [`Mode::Extended`] includes it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charseq::{CharSequence, Ext};
use crate::contact::mixed_bound;
use crate::field::{Field, SeedStream};
use crate::oracle::{intersection_number_with, OracleConfig, OracleError};
use crate::tower::{build_tower_with, BranchSpec, KeyTower, Perturbation, TowerError};

/// Retries of the random choices before a realization gives up.
pub const GENERICITY_BUDGET: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BayerError {
    #[error("{n} is not an attainable intersection number for {f} against {g}")]
    NotAttainable { n: u64, f: String, g: String },
    #[error("no generic choice found after {attempts} attempts (seed stream exhausted its budget)")]
    GenericityBudgetExhausted { attempts: usize },
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Literal,
    #[default]
    Extended,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "literal" => Ok(Mode::Literal),
            "extended" => Ok(Mode::Extended),
            _ => Err(format!("unknown mode `{s}` (expected literal or extended)")),
        }
    }
}

/// `{N > 0 : lo <= N < hi, modulus | N}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub lo: u64,
    pub hi: Ext,
    pub modulus: u64,
}

impl Stratum {
    pub fn contains(&self, n: u64) -> bool {
        n > 0 && n >= self.lo && self.hi > n && n.is_multiple_of(self.modulus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BayerSet {
    pub rho: usize,
    /// `I_0, ..., I_{rho+1}`.
    pub bounds: Vec<Ext>,
    pub strata: Vec<Stratum>,
    /// `I_{rho+1}` when finite and the mode is extended.
    pub endpoint: Option<u64>,
    pub mode: Mode,
}

impl BayerSet {
    pub fn contains(&self, n: u64) -> bool {
        self.endpoint == Some(n) || self.strata.iter().any(|s| s.contains(n))
    }

    /// Members in `1..=limit`, ascending.
    pub fn members(&self, limit: u64) -> Vec<u64> {
        (1..=limit).filter(|&n| self.contains(n)).collect()
    }

    /// Where a member sits, which decides how it is realized.
    pub fn locate(&self, n: u64) -> Option<Location> {
        for (i, s) in self.strata.iter().enumerate() {
            let k = i + 1;
            if !s.contains(n) {
                continue;
            }
            return Some(if n == s.lo && k > 1 {
                Location::LeftEndpoint { k }
            } else {
                Location::Interior { k }
            });
        }
        (self.endpoint == Some(n)).then_some(Location::Endpoint)
    }
}

impl fmt::Display for BayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .strata
            .iter()
            .map(|s| format!("[{}, {}) mod {}", s.lo, s.hi, s.modulus))
            .chain(self.endpoint.map(|e| format!("{{{e}}}")))
            .collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}

/// Where an attainable `N` lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Location {
    /// `N = I_{k-1}` with `k > 1`.
    LeftEndpoint { k: usize },
    /// `I_{k-1} < N < I_k`, or `k = 1`.
    Interior { k: usize },
    /// `N = I_{rho+1}`.
    Endpoint,
}

/// Largest `i <= min(h, h')` with `v_j / v_0 = v'_j / v'_0` for all `j <= i`.
pub fn rho(f: &CharSequence, g: &CharSequence) -> usize {
    let top = f.h().min(g.h());
    (1..=top)
        .take_while(|&i| f.values()[i] * g.n() == g.values()[i] * f.n())
        .last()
        .unwrap_or(0)
}

pub fn bayer_set(f: &CharSequence, g: &CharSequence, mode: Mode) -> BayerSet {
    let rho = rho(f, g);
    let bounds: Vec<Ext> = (0..=rho + 1).map(|k| mixed_bound(f, g, k)).collect();
    let strata = (1..=rho + 1)
        .map(|k| Stratum {
            lo: bounds[k - 1].finite().expect("inner bounds are finite"),
            hi: bounds[k],
            modulus: f.e(k - 1) * g.e(k - 1),
        })
        .collect();
    let endpoint = match mode {
        Mode::Literal => None,
        Mode::Extended => bounds[rho + 1].finite(),
    };
    BayerSet {
        rho,
        bounds,
        strata,
        endpoint,
        mode,
    }
}

/// The set for two branches of the same characteristic:
/// `e_{k-2} v_{k-1} <= N < e_{k-1} v_k` with `e_{k-1}^2 | N`.
pub fn equal_char_set(seq: &CharSequence) -> BayerSet {
    let h = seq.h();
    let bounds: Vec<Ext> = (0..=h + 1).map(|k| seq.contact_bound(k)).collect();
    let strata = (1..=h + 1)
        .map(|k| Stratum {
            lo: bounds[k - 1].finite().expect("inner bounds are finite"),
            hi: bounds[k],
            modulus: seq.e(k - 1) * seq.e(k - 1),
        })
        .collect();
    BayerSet {
        rho: h,
        bounds,
        strata,
        endpoint: None,
        mode: Mode::Literal,
    }
}

/// `e_{h-1} v_h`: every `N` from here on is attained by a branch of the same
/// characteristic.
pub fn min_universal(seq: &CharSequence) -> u64 {
    seq.min_universal()
}

/// A branch of the requested characteristic meeting `f` in exactly `i0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<F: Field> {
    pub tower: KeyTower<F>,
    pub i0: u64,
    pub location: Location,
    /// Random draws used before the oracle accepted the candidate.
    pub attempts: usize,
}

/// Recipe for `G`: copy the levels `<= shared` of `f` and draw the rest.
fn shared_spec<F: Field>(
    f: &KeyTower<F>,
    seq_g: &CharSequence,
    shared: usize,
    extra: Option<Vec<u64>>,
    rng: &mut SeedStream,
) -> Result<BranchSpec<F>, TowerError> {
    let field = f.field();
    let fspec = f.spec();
    let mut xi: Vec<F::Elem> = fspec.xi()[..shared].to_vec();
    while xi.len() < seq_g.h() {
        xi.push(field.random_nonzero(rng));
    }
    let mut ps: Vec<Perturbation<F>> = fspec
        .perturbations()
        .iter()
        .filter(|p| p.level() <= shared)
        .cloned()
        .collect();
    if let Some(exponents) = extra {
        ps.push(Perturbation::new(exponents, field.random_nonzero(rng)));
    }
    BranchSpec::new(field, seq_g.clone(), xi, ps)
}

/// Exponents `(a_0, ..., a_j)` of the level-`j` term realizing weight `w`
/// against the key polynomial of `sub`: the canonical digits of
/// `w - v_0` with one more `v_0`.
fn level_term(sub: &CharSequence, w: u64) -> Option<Vec<u64>> {
    let mut a = sub.semigroup_digits(w.checked_sub(sub.n())?)?;
    a[0] += 1;
    Some(a)
}

/// Builds a branch `g` with characteristic `seq_g` and `i_0(f, g) = n`,
/// certified by the oracle.
pub fn realize_intersection<F: Field>(
    f: &KeyTower<F>,
    seq_g: &CharSequence,
    n: u64,
    rng: &mut SeedStream,
    config: &OracleConfig,
) -> Result<Witness<F>, BayerError> {
    let set = bayer_set(f.charseq(), seq_g, Mode::Extended);
    let not_attainable = || BayerError::NotAttainable {
        n,
        f: f.charseq().to_string(),
        g: seq_g.to_string(),
    };
    let location = set.locate(n).ok_or_else(not_attainable)?;
    let (shared, extra) = match location {
        Location::LeftEndpoint { k } => (k - 2, None),
        Location::Interior { k } => {
            let modulus = set.strata[k - 1].modulus;
            let sub = seq_g.key_prefix(k - 1);
            let term = level_term(&sub, n / modulus).ok_or_else(not_attainable)?;
            (k - 1, Some(term))
        }
        Location::Endpoint => (set.rho, None),
    };
    let cfg = OracleConfig {
        initial_precision: n as usize + 1,
        cap: config.cap.max(n),
    };
    for attempt in 1..=GENERICITY_BUDGET {
        let spec = shared_spec(f, seq_g, shared, extra.clone(), rng)?;
        let tower = match build_tower_with(&spec, config) {
            Ok(t) => t,
            Err(TowerError::VerificationFailed { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let r = intersection_number_with(f.branch(), tower.branch(), &cfg)?;
        if r.value.finite() == Some(n) {
            return Ok(Witness {
                tower,
                i0: n,
                location,
                attempts: attempt,
            });
        }
    }
    Err(BayerError::GenericityBudgetExhausted {
        attempts: GENERICITY_BUDGET,
    })
}
