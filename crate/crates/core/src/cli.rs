//! The `branches` command line. All logic lives here so it can be driven in
//! tests; the binary only forwards `argv` and the exit status.
//!
//! Exit status: 0 on success, 1 on a domain error (diagnostic JSON on
//! stderr), 2 when a check contradicts a theorem, 64 on bad usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::bayer::{bayer_set, realize_intersection, BayerError, Mode};
use crate::campaign::{run_campaign, CampaignConfig, Theorem};
use crate::charseq::{CharSequence, SequenceShape};
use crate::contact::ContactError;
use crate::distance::{realize_distance, DistanceError};
use crate::field::{Field, FieldContext, FieldKind, SeedStream};
use crate::json::{self, JsonError, Loaded};
use crate::oracle::{self, IntersectionNumber, OracleConfig, DEFAULT_CAP};
use crate::tower::{am_criterion, build_tower_with, AmVerdict, BranchSpec, Perturbation, TowerError};
use crate::with_field;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_FALSIFIED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "BRANCHES_SEED";

#[derive(Parser, Debug)]
#[command(name = "branches", version, about = "Intersection theory of plane branches, exactly.")]
pub struct Cli {
    /// Coefficient field: `q` or `fp:<p>`.
    #[arg(long, global = true, default_value = "q")]
    pub field: FieldKind,
    /// Seed for every random choice.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Largest intersection number the oracle certifies.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    /// Write the JSON result here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Characteristic-sequence combinatorics.
    Charseq {
        #[command(subcommand)]
        command: CharseqCommand,
    },
    /// Build or verify branches.
    Branch {
        #[command(subcommand)]
        command: BranchCommand,
    },
    /// Intersection multiplicity of two branches.
    Intersect {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Attainable intersection numbers of two characteristics.
    Bayer(BayerArgs),
    /// A branch of a given characteristic meeting `f` in `n`.
    Realize {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g_char: CharSequence,
        #[arg(long)]
        n: u64,
    },
    /// A branch at logarithmic distance `r` from `f`.
    Distance {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        r: BigRational,
    },
    /// Random falsification campaign for a theorem.
    Check(CheckArgs),
}

#[derive(Subcommand, Debug)]
pub enum CharseqCommand {
    /// Gcds, conductor, gaps and Bézout relations.
    Info { seq: CharSequence },
}

#[derive(Subcommand, Debug)]
pub enum BranchCommand {
    /// Expand and verify a key-polynomial tower.
    Build {
        #[arg(long = "char")]
        charseq: CharSequence,
        /// Comma-separated `ξ_1, ..., ξ_h`; all 1 by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random_xi")]
        xi: Option<Vec<String>>,
        /// Draw the `ξ_i` from the seed.
        #[arg(long)]
        random_xi: bool,
        /// `a0,a1,..:coeff`, repeatable.
        #[arg(long = "perturb")]
        perturb: Vec<String>,
    },
    /// Check a branch: a recipe is rebuilt and verified; a bare branch is
    /// tested against the reference tower of `--char`.
    Verify {
        #[arg(long)]
        f: PathBuf,
        #[arg(long = "char")]
        charseq: Option<CharSequence>,
    },
}

#[derive(Args, Debug)]
pub struct BayerArgs {
    #[arg(long)]
    pub f_char: CharSequence,
    #[arg(long)]
    pub g_char: CharSequence,
    #[arg(long, default_value = "extended")]
    pub mode: Mode,
    /// List members up to this value.
    #[arg(long, default_value_t = 60)]
    pub limit: u64,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub theorem: Theorem,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Largest `v_0` of the random characteristics.
    #[arg(long, default_value_t = 12)]
    pub char_max: u64,
    /// Largest `h` of the random characteristics.
    #[arg(long, default_value_t = 3)]
    pub max_h: usize,
}

/// A failed command: exit status plus a diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn domain(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_DOMAIN,
            kind,
            message: e.to_string(),
        }
    }

    fn falsified(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_FALSIFIED,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        match e {
            JsonError::Tower(t) => t.into(),
            e => Failure::domain("input", e),
        }
    }
}

impl From<TowerError> for Failure {
    fn from(e: TowerError) -> Self {
        match e {
            TowerError::VerificationFailed { .. } => Failure::falsified("tower-verification", e),
            e => Failure::domain("tower", e),
        }
    }
}

impl From<BayerError> for Failure {
    fn from(e: BayerError) -> Self {
        match e {
            BayerError::NotAttainable { .. } => Failure::domain("not-attainable", e),
            BayerError::GenericityBudgetExhausted { .. } => Failure::domain("genericity-budget", e),
            BayerError::Tower(t) => t.into(),
            e => Failure::domain("oracle", e),
        }
    }
}

impl From<DistanceError> for Failure {
    fn from(e: DistanceError) -> Self {
        match e {
            DistanceError::AuxSequenceInvalid { .. }
            | DistanceError::AuxOutOfWindow(_)
            | DistanceError::WindowNotUnique { .. }
            | DistanceError::Mismatch { .. } => Failure::falsified("distance", e),
            DistanceError::Bayer(b) => b.into(),
            DistanceError::Tower(t) => t.into(),
            e => Failure::domain("distance", e),
        }
    }
}

impl From<ContactError> for Failure {
    fn from(e: ContactError) -> Self {
        match e {
            ContactError::Oracle(o) => Failure::domain("oracle", o),
            e => Failure::falsified("contact", e),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and writes
/// its JSON result to `out` (or the `--output` file) and diagnostics to
/// `err`. Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok((value, code)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            let written = match &cli.output {
                Some(path) => std::fs::write(path, format!("{text}\n")),
                None => writeln!(out, "{text}"),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "{}", json!({"error": "io", "message": e.to_string()}));
                return EXIT_DOMAIN;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "{}", json!({"error": f.kind, "message": f.message}));
            f.code
        }
    }
}

/// Runs a parsed command; returns the JSON result and its exit status.
pub fn execute(cli: &Cli) -> Result<(Value, i32), Failure> {
    let ctx = FieldContext::new(cli.field).map_err(|e| Failure::domain("field", e))?;
    let config = OracleConfig::with_cap(cli.cap.max(1));
    with_field!(ctx, |f| dispatch(&f, cli, &config))
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::domain("io", format!("{}: {e}", path.display())))
}

fn ratio_string(r: num_rational::Ratio<u64>) -> String {
    r.to_string()
}

fn dispatch<F: Field>(field: &F, cli: &Cli, config: &OracleConfig) -> Result<(Value, i32), Failure> {
    let mut rng = SeedStream::new(cli.seed);
    let value = match &cli.command {
        Command::Charseq {
            command: CharseqCommand::Info { seq },
        } => charseq_info(seq),
        Command::Branch {
            command:
                BranchCommand::Build {
                    charseq,
                    xi,
                    random_xi,
                    perturb,
                },
        } => {
            let xi = match (xi, random_xi) {
                (Some(xs), _) => xs
                    .iter()
                    .map(|s| field.parse(s))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::domain("input", e))?,
                (None, true) => (0..charseq.h()).map(|_| field.random_nonzero(&mut rng)).collect(),
                (None, false) => vec![field.one(); charseq.h()],
            };
            let ps = perturb
                .iter()
                .map(|p| parse_perturbation(field, p))
                .collect::<Result<Vec<_>, _>>()?;
            let spec = BranchSpec::new(field, charseq.clone(), xi, ps)?;
            let tower = build_tower_with(&spec, config)?;
            serde_json::to_value(json::tower_to_json(&tower)).expect("serializable")
        }
        Command::Branch {
            command: BranchCommand::Verify { f, charseq },
        } => verify(field, &read(f)?, charseq.as_ref(), config)?,
        Command::Intersect { f, g } => {
            let f = json::load_branch(field, &read(f)?, config)?;
            let g = json::load_branch(field, &read(g)?, config)?;
            let r = oracle::intersection_number_with(&f, &g, config)
                .map_err(|e| Failure::domain("oracle", e))?;
            match r.value {
                IntersectionNumber::Finite(i0) => {
                    let dx = num_rational::Ratio::new(i0, (f.mult_x() * g.mult_x()) as u64);
                    let d = num_rational::Ratio::new(i0, (f.order() * g.order()) as u64);
                    json!({
                        "i0": i0,
                        "dx": ratio_string(dx),
                        "d": ratio_string(d),
                        "precision_used": r.precision_used,
                    })
                }
                IntersectionNumber::Exhausted { cap } => json!({
                    "i0": "exhausted",
                    "cap": cap,
                    "dx": null,
                    "d": null,
                    "precision_used": r.precision_used,
                }),
            }
        }
        Command::Bayer(a) => {
            let set = bayer_set(&a.f_char, &a.g_char, a.mode);
            let mut v = serde_json::to_value(&set).expect("serializable");
            v["members"] = json!(set.members(a.limit));
            v["limit"] = json!(a.limit);
            v
        }
        Command::Realize { f, g_char, n } => {
            let tower = json::load_tower(field, &read(f)?, config)?;
            let w = realize_intersection(&tower, g_char, *n, &mut rng, config)?;
            json!({
                "g": json::tower_to_json(&w.tower),
                "i0": w.i0,
                "i0_verified": true,
                "location": w.location,
                "attempts": w.attempts,
            })
        }
        Command::Distance { f, r } => {
            let tower = json::load_tower(field, &read(f)?, config)?;
            let w = realize_distance(&tower, r, &mut rng, config)?;
            json!({
                "g": json::tower_to_json(&w.g),
                "case": w.case.tag(),
                "k": w.k,
                "i0": w.i0,
                "d": w.r.to_string(),
                "aux": w.aux.map(|s| s.values().to_vec()),
            })
        }
        Command::Check(a) => {
            let cfg = CampaignConfig {
                trials: a.trials,
                seed: cli.seed,
                shape: SequenceShape {
                    max_h: a.max_h,
                    max_v0: a.char_max.max(1),
                    ..SequenceShape::default()
                },
                oracle: *config,
            };
            let report = run_campaign(field, a.theorem, &cfg);
            let code = if report.falsified() {
                EXIT_FALSIFIED
            } else if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_DOMAIN
            };
            return Ok((serde_json::to_value(&report).expect("serializable"), code));
        }
    };
    Ok((value, EXIT_OK))
}

fn charseq_info(seq: &CharSequence) -> Value {
    json!({
        "v": seq.values(),
        "e": seq.gcds(),
        "n": seq.ns(),
        "conductor": seq.conductor(),
        "gaps": seq.gaps(),
        "bezout": (1..=seq.h()).map(|k| seq.bezout(k)).collect::<Vec<_>>(),
        "min_universal": seq.min_universal(),
        "minimal_generators": seq.minimal_generators_check(),
    })
}

/// `a0,a1,...:coeff`.
fn parse_perturbation<F: Field>(field: &F, text: &str) -> Result<Perturbation<F>, Failure> {
    let bad = || Failure::domain("input", format!("perturbation `{text}` is not of the form a0,a1,..:coeff"));
    let (exps, coeff) = text.split_once(':').ok_or_else(bad)?;
    let a = exps
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    let c = field.parse(coeff).map_err(|e| Failure::domain("input", e))?;
    Ok(Perturbation::new(a, c))
}

fn verify<F: Field>(
    field: &F,
    text: &str,
    charseq: Option<&CharSequence>,
    config: &OracleConfig,
) -> Result<Value, Failure> {
    match json::load(field, text)? {
        Loaded::Spec(spec) => {
            if let Some(c) = charseq {
                if c != spec.charseq() {
                    return Err(Failure::domain(
                        "input",
                        format!("recipe has characteristic {}, not {c}", spec.charseq()),
                    ));
                }
            }
            let tower = build_tower_with(&spec, config)?;
            Ok(json!({
                "char": tower.charseq().values(),
                "verified": true,
                "mult_x": tower.branch().mult_x(),
            }))
        }
        Loaded::Branch(g) => {
            let c = charseq.ok_or_else(|| {
                Failure::domain("input", "a bare branch needs --char to compare against")
            })?;
            let reference = build_tower_with(&BranchSpec::standard(field, c.clone()), config)?;
            let verdict = am_criterion(&reference, &g, config)?;
            Ok(match verdict {
                AmVerdict::Certified { i0 } => json!({
                    "char": c.values(),
                    "certified": true,
                    "i0_with_reference": i0,
                }),
                AmVerdict::Inconclusive(reason) => json!({
                    "char": c.values(),
                    "certified": false,
                    "reason": format!("{reason:?}"),
                }),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("branches").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn charseq_info_output() {
        let (code, out, _) = call(&["charseq", "info", "4,6,13"]);
        assert_eq!(code, 0);
        let v = parse(&out);
        assert_eq!(v["conductor"], 16);
        assert_eq!(v["gaps"], json!([1, 2, 3, 5, 7, 9, 11, 15]));
        assert_eq!(v["bezout"], json!([[3], [5, 1]]));
        assert_eq!(v["e"], json!([4, 2, 1]));
    }

    #[test]
    fn bayer_output() {
        let (code, out, _) = call(&["bayer", "--f-char", "2,3", "--g-char", "2,3", "--limit", "12"]);
        assert_eq!(code, 0);
        assert_eq!(parse(&out)["members"], json!([4, 6, 7, 8, 9, 10, 11, 12]));
        let (_, out, _) = call(&["bayer", "--f-char", "4,6,13", "--g-char", "2,3", "--mode", "literal"]);
        assert_eq!(parse(&out)["members"], json!([8, 12]));
    }

    #[test]
    fn usage_errors_exit_64_and_help_exits_0() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["charseq", "info", "4,6,13", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["charseq", "info", "4,6,8"]).0, EXIT_USAGE);
    }

    #[test]
    fn domain_errors_exit_1_with_json() {
        let (code, _, err) = call(&["--field", "fp:4", "charseq", "info", "2,3"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert_eq!(parse(&err)["error"], "field");
        let (code, _, err) = call(&["branch", "build", "--char", "2,3", "--perturb", "2,2:1"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert_eq!(parse(&err)["error"], "tower");
    }

    #[test]
    fn build_intersect_realize_distance_pipeline() {
        let dir = std::env::temp_dir().join(format!("branches-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("f.json");
        let g = dir.join("g.json");
        let p = |x: &PathBuf| x.to_str().unwrap().to_string();
        assert_eq!(call(&["branch", "build", "--char", "2,3", "-o", &p(&f)]).0, 0);
        std::fs::write(&g, r#"{"ydeg":1,"precision":"exact","terms":[]}"#).unwrap();
        let (code, out, _) = call(&["intersect", "--f", &p(&f), "--g", &p(&g)]);
        assert_eq!(code, 0);
        let v = parse(&out);
        assert_eq!(v["i0"], 3);
        assert_eq!(v["dx"], "3/2");
        let (code, out, _) = call(&["intersect", "--f", &p(&f), "--g", &p(&f)]);
        assert_eq!(code, 0);
        assert_eq!(parse(&out)["i0"], "exhausted");

        let (code, out, _) = call(&["realize", "--f", &p(&f), "--g-char", "2,3", "--n", "10", "--seed", "4"]);
        assert_eq!(code, 0);
        let v = parse(&out);
        assert_eq!(v["i0_verified"], true);
        assert_eq!(v["i0"], 10);
        let (code, _, err) = call(&["realize", "--f", &p(&f), "--g-char", "2,3", "--n", "5"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert_eq!(parse(&err)["error"], "not-attainable");

        let (code, out, _) = call(&["distance", "--f", &p(&f), "--r", "7/4"]);
        assert_eq!(code, 0);
        let v = parse(&out);
        assert_eq!((v["d"].clone(), v["i0"].clone()), (json!("7/4"), json!(7)));

        let (code, out, _) = call(&["branch", "verify", "--f", &p(&f)]);
        assert_eq!(code, 0);
        assert_eq!(parse(&out)["verified"], true);
        let (code, out, _) = call(&["branch", "verify", "--f", &p(&g), "--char", "2,3"]);
        assert_eq!(code, 0);
        assert_eq!(parse(&out)["certified"], false);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn identical_seed_and_args_give_identical_output() {
        let args = ["--field", "fp:101", "--seed", "9", "check", "--theorem", "sti", "--trials", "5", "--char-max", "6"];
        let a = call(&args);
        let b = call(&args);
        assert_eq!(a.0, 0);
        assert_eq!(a, b);
        let args = ["--field", "fp:101", "--seed", "3", "branch", "build", "--char", "4,6,13", "--random-xi"];
        assert_eq!(call(&args), call(&args));
    }
}
