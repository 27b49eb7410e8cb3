//! Seeded random campaigns: many constructed branches, each run through a
//! theorem check. Trial `i` draws from `SeedStream::derive(seed, i)`, so any
//! single trial can be replayed, and results come back sorted by trial index
//! whatever the thread scheduling.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bayer::{bayer_set, realize_intersection, Mode};
use crate::charseq::{extend_sequence, random_sequence, CharSequence, SequenceShape};
use crate::contact::{analyze_pair, congruence_with_i0, ratio_consequences, sti_holds, ContactError};
use crate::field::{Field, SeedStream};
use crate::oracle::{self, intersection_number_with, OracleConfig};
use crate::tower::{
    build_tower_with, perturbation_bound, BranchSpec, KeyTower, Perturbation, TowerError,
};

/// Attempts at drawing a pair whose branches are distinct.
const DRAW_ATTEMPTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Tower invariants on random recipes.
    Towers,
    IntersectionFormula,
    Sti,
    Congruence,
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "towers" => Ok(Theorem::Towers),
            "intersection-formula" => Ok(Theorem::IntersectionFormula),
            "sti" => Ok(Theorem::Sti),
            "congruence" => Ok(Theorem::Congruence),
            _ => Err(format!(
                "unknown theorem `{s}` (expected towers, intersection-formula, sti or congruence)"
            )),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Towers => "towers",
            Theorem::IntersectionFormula => "intersection-formula",
            Theorem::Sti => "sti",
            Theorem::Congruence => "congruence",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub trials: usize,
    pub seed: u64,
    pub shape: SequenceShape,
    pub oracle: OracleConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            shape: SequenceShape::default(),
            oracle: OracleConfig::default(),
        }
    }
}

/// One trial's verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Pass { summary: String },
    /// The check ran and the theorem's prediction failed.
    Falsified { summary: String },
    /// The trial could not be carried out (oracle cap, genericity budget).
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CampaignReport {
    pub theorem: Theorem,
    pub field: String,
    pub trials: usize,
    pub passed: usize,
    pub seed: u64,
    /// Per-trial seeds, in trial order.
    pub seeds: Vec<u64>,
    pub failures: Vec<TrialRecord>,
}

impl CampaignReport {
    pub fn falsified(&self) -> bool {
        self.failures
            .iter()
            .any(|r| matches!(r.outcome, Outcome::Falsified { .. }))
    }

    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `trials` independent trials of `theorem` in parallel.
pub fn run_campaign<F: Field>(field: &F, theorem: Theorem, config: &CampaignConfig) -> CampaignReport {
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = SeedStream::derive_seed(config.seed, trial as u64);
            let mut rng = SeedStream::new(seed);
            TrialRecord {
                trial,
                seed,
                outcome: run_trial(field, theorem, config, &mut rng),
            }
        })
        .collect();
    let passed = records
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Pass { .. }))
        .count();
    CampaignReport {
        theorem,
        field: field.tag(),
        trials: config.trials,
        passed,
        seed: config.seed,
        seeds: records.iter().map(|r| r.seed).collect(),
        failures: records
            .into_iter()
            .filter(|r| !matches!(r.outcome, Outcome::Pass { .. }))
            .collect(),
    }
}

pub fn run_trial<F: Field>(
    field: &F,
    theorem: Theorem,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Outcome {
    let result = match theorem {
        Theorem::Towers => tower_trial(field, config, rng),
        Theorem::IntersectionFormula => formula_trial(field, config, rng),
        Theorem::Sti => sti_trial(field, config, rng),
        Theorem::Congruence => congruence_trial(field, config, rng),
    };
    result.unwrap_or_else(|e| e)
}

fn error(e: impl fmt::Display) -> Outcome {
    Outcome::Error {
        message: e.to_string(),
    }
}

fn tower_error(e: TowerError) -> Outcome {
    match e {
        TowerError::VerificationFailed { .. } | TowerError::DegreeMismatch { .. } => {
            Outcome::Falsified {
                summary: e.to_string(),
            }
        }
        e => error(e),
    }
}

fn tower_trial<F: Field>(
    field: &F,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<Outcome, Outcome> {
    let seq = random_sequence(&config.shape, rng);
    let spec = random_spec(field, &seq, rng);
    let t = build_tower_with(&spec, &config.oracle).map_err(tower_error)?;
    Ok(Outcome::Pass {
        summary: format!("{} with {} perturbation(s)", t.charseq(), spec.perturbations().len()),
    })
}

fn formula_trial<F: Field>(
    field: &F,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<Outcome, Outcome> {
    let (f, g, _) = random_pair(field, config, rng)?;
    let report = match analyze_pair(&f, &g, &config.oracle) {
        Ok(r) => r,
        Err(e @ ContactError::NoContactIndex { .. }) => {
            return Err(Outcome::Falsified {
                summary: e.to_string(),
            })
        }
        Err(e) => return Err(error(e)),
    };
    let ratios = ratio_consequences(f.charseq(), g.charseq(), &report);
    let summary = format!(
        "{} vs {}: i0 = {}, k = {}, {}",
        f.charseq(),
        g.charseq(),
        report.i0,
        report.k,
        if report.equality_case { "equality" } else { "strict" }
    );
    if report.checks.all_pass() && ratios {
        Ok(Outcome::Pass { summary })
    } else {
        let mut failed = report.checks.failures();
        if !ratios {
            failed.push("ratio consequences");
        }
        Ok(Outcome::Falsified {
            summary: format!("{summary}; failed: {}", failed.join(", ")),
        })
    }
}

fn sti_trial<F: Field>(
    field: &F,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<Outcome, Outcome> {
    for _ in 0..DRAW_ATTEMPTS {
        let (f, g, _) = random_pair(field, config, rng)?;
        let h = related_tower(field, &f, config, rng)?;
        let gh = intersection_number_with(g.branch(), h.branch(), &config.oracle).map_err(error)?;
        let fh = intersection_number_with(f.branch(), h.branch(), &config.oracle).map_err(error)?;
        if gh.value.finite().is_none() || fh.value.finite().is_none() {
            continue;
        }
        let dx = [
            oracle::dx(f.branch(), g.branch(), &config.oracle).map_err(error)?,
            oracle::dx(f.branch(), h.branch(), &config.oracle).map_err(error)?,
            oracle::dx(g.branch(), h.branch(), &config.oracle).map_err(error)?,
        ];
        let summary = format!("d_x = {}, {}, {}", dx[0], dx[1], dx[2]);
        return Ok(if sti_holds(dx) {
            Outcome::Pass { summary }
        } else {
            Outcome::Falsified { summary }
        });
    }
    Err(error("could not draw three distinct branches"))
}

fn congruence_trial<F: Field>(
    field: &F,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<Outcome, Outcome> {
    let (f, g, i0) = random_pair(field, config, rng)?;
    let (n, m) = (f.charseq().n(), g.charseq().n());
    match congruence_with_i0(n, m, i0) {
        Ok(w) if w.is_kulk_exception() => Ok(Outcome::Falsified {
            summary: format!("i0 = {i0} = {n}·{m} - 1 with neither multiplicity dividing the other"),
        }),
        Ok(w) => Ok(Outcome::Pass {
            summary: format!(
                "i0 = {i0}, n = {n}, n' = {m}: divisible by {}",
                if w.by_n_over_d { "n/d" } else { "n'/d" }
            ),
        }),
        Err(e) => Ok(Outcome::Falsified {
            summary: e.to_string(),
        }),
    }
}

/// A random certified perturbation at `level`: digits below `n_i`, and the
/// least `a_0` clearing the weight bound plus a random margin.
pub fn random_perturbation<F: Field>(
    field: &F,
    seq: &CharSequence,
    level: usize,
    rng: &mut SeedStream,
) -> Perturbation<F> {
    let v = seq.values();
    let mut a: Vec<u64> = vec![0; level + 1];
    for (i, ai) in a.iter_mut().enumerate().skip(1) {
        *ai = rng.gen_range(0..seq.n_k(i));
    }
    let rest: u64 = (1..=level).map(|i| a[i] * v[i]).sum();
    let need = perturbation_bound(seq, level) * seq.e(level);
    let a0 = if rest >= need { 1 } else { (need - rest) / v[0] + 1 };
    a[0] = a0.max(1) + rng.gen_range(0..3);
    Perturbation::new(a, field.random_nonzero(rng))
}

/// Random `ξ` and, one time in three, a random perturbation.
pub fn random_spec<F: Field>(field: &F, seq: &CharSequence, rng: &mut SeedStream) -> BranchSpec<F> {
    let spec = BranchSpec::random(field, seq.clone(), rng);
    if rng.gen_ratio(1, 3) {
        let level = rng.gen_range(0..=seq.h());
        let p = random_perturbation(field, seq, level, rng);
        spec.with_perturbation(p).expect("random perturbations are certified")
    } else {
        spec
    }
}

/// Factors `w = n_1 ... n_m` drawn from the shape with `w * base <= max_v0`.
fn random_scale(shape: &SequenceShape, base: u64, rng: &mut SeedStream) -> Vec<u64> {
    let mut ns = Vec::new();
    let mut w = 1;
    while rng.gen_ratio(1, 2) {
        let options: Vec<u64> = shape
            .factors
            .iter()
            .copied()
            .filter(|&f| base * w * f <= shape.max_v0)
            .collect();
        let Some(&n) = options.choose(rng) else { break };
        ns.push(n);
        w *= n;
    }
    ns
}

/// A second tower related to `f` in one of several ways: unrelated, same
/// characteristic with a shared prefix, a characteristic sharing a scaled
/// prefix, or a realizer witness for a random attainable value.
pub fn related_tower<F: Field>(
    field: &F,
    f: &KeyTower<F>,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<KeyTower<F>, Outcome> {
    let sf = f.charseq();
    let build = |spec: &BranchSpec<F>| build_tower_with(spec, &config.oracle).map_err(tower_error);
    match rng.gen_range(0..4) {
        0 => {
            let sg = random_sequence(&config.shape, rng);
            build(&random_spec(field, &sg, rng))
        }
        1 | 2 => {
            let j = rng.gen_range(0..=sf.h());
            let sg = if rng.gen_ratio(1, 2) {
                sf.clone()
            } else {
                let prefix = sf.key_prefix(j);
                let ns = random_scale(&config.shape, prefix.n(), rng);
                let w: u64 = ns.iter().product();
                let scaled: Vec<u64> = prefix.values().iter().map(|v| v * w).collect();
                extend_sequence(&scaled, &ns, &config.shape, rng)
            };
            let mut xi: Vec<F::Elem> = f.spec().xi()[..j].to_vec();
            while xi.len() < sg.h() {
                xi.push(field.random_nonzero(rng));
            }
            let mut ps: Vec<_> = f
                .spec()
                .perturbations()
                .iter()
                .filter(|p| p.level() <= j)
                .cloned()
                .collect();
            if rng.gen_ratio(1, 2) || (j == sg.h() && sg == *sf) {
                let level = rng.gen_range(j..=sg.h());
                ps.push(random_perturbation(field, &sg, level, rng));
            }
            let spec = BranchSpec::new(field, sg, xi, ps).map_err(tower_error)?;
            build(&spec)
        }
        _ => {
            let sg = random_sequence(&config.shape, rng);
            let set = bayer_set(sf, &sg, Mode::Extended);
            let members = set.members(4 * sf.n() * sg.n() + 40);
            let n = *members.choose(rng).expect("attainable sets are infinite or have members");
            realize_intersection(f, &sg, n, rng, &config.oracle)
                .map(|w| w.tower)
                .map_err(error)
        }
    }
}

/// A random tower and a related one meeting it in a finite `i_0`.
pub fn random_pair<F: Field>(
    field: &F,
    config: &CampaignConfig,
    rng: &mut SeedStream,
) -> Result<(KeyTower<F>, KeyTower<F>, u64), Outcome> {
    for _ in 0..DRAW_ATTEMPTS {
        let sf = random_sequence(&config.shape, rng);
        let f = build_tower_with(&random_spec(field, &sf, rng), &config.oracle).map_err(tower_error)?;
        let g = related_tower(field, &f, config, rng)?;
        let (f, g) = if rng.gen_ratio(1, 2) { (f, g) } else { (g, f) };
        let r = intersection_number_with(f.branch(), g.branch(), &config.oracle).map_err(error)?;
        if let Some(i0) = r.value.finite() {
            return Ok((f, g, i0));
        }
    }
    Err(error("could not draw two distinct branches"))
}
