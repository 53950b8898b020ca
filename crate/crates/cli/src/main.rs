use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use betti_core::betti::{in_betti_locus, MonodromyDatum};
use betti_core::experiment::{equivalence_suite, SuiteConfig};
use betti_core::filtered::{jordan_holder, s_equivalent, slope_stability, FilteredLocalSystem, StabilityClass};
use betti_core::git::{git_equivalent, ORBIT_BUDGET};
use betti_core::invariant::Backend;
use betti_core::json::{cocharacter_from_json, parse_weights, weights_to_json, FieldKind};
use betti_core::quiver::{king_check, pairing, pairing_via_degree, rep_to_point, ChiTheta, QuiverPoint};
use betti_core::root_datum::{r_stability, GroupKind};
use betti_core::scalar::rational_to_json;
use betti_core::surface::SurfaceRep;
use betti_core::{Error, Fp, Rational, Scalar};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_FALSE: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INCOMPLETE: u8 = 4;

#[derive(Parser)]
#[command(name = "betti", version, about = "Filtered local systems, quiver stability and GIT checks in exact arithmetic")]
struct Cli {
    /// Invariant-subspace backend.
    #[arg(long, value_enum, default_value_t = BackendArg::Auto, global = true)]
    backend: BackendArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Exhaustive,
    Spin,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Exhaustive => Backend::ExhaustiveFp,
            BackendArg::Spin => Backend::Spin,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Slope,
    King,
    R,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Gl,
    Sl,
}

#[derive(Subcommand)]
enum Command {
    /// Exit 0 iff the surface relation holds.
    CheckRelation { rep: PathBuf },
    /// Parabolic degree of a filtered local system.
    Degree { fls: PathBuf },
    /// Stability verdict; exit 1 when unstable.
    Stability {
        fls: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Slope)]
        method: Method,
        /// Group for the R-stability check.
        #[arg(long, value_enum, default_value_t = Group::Gl)]
        group: Group,
    },
    /// Quiver point of a filtered local system (weights carried along).
    Lift { fls: PathBuf },
    /// Filtered local system (or bare representation) of a quiver point.
    Project { point: PathBuf },
    /// `⟨μ, χ_θ⟩` and its degree-formula counterpart.
    Pairing { point: PathBuf, mu: PathBuf, theta: PathBuf },
    /// Agreement suite: slope vs King, R vs slope, S-equivalence vs GIT equivalence.
    EquivalenceSuite {
        #[arg(long, default_value = "F5")]
        field: String,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        genus: usize,
        #[arg(long, default_value_t = 2)]
        punctures: usize,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u128,
        #[arg(long, default_value_t = 300)]
        pair_cap: usize,
        /// Add wall-clock time to the summary (breaks byte stability).
        #[arg(long)]
        timing: bool,
    },
    /// Jordan–Hölder filtration and associated graded.
    Jh { fls: PathBuf },
    /// S-equivalence of two filtered local systems.
    SEquiv { a: PathBuf, b: PathBuf },
    /// GIT equivalence of two quiver points under the given weights (finite fields).
    GitEquiv {
        a: PathBuf,
        b: PathBuf,
        theta: PathBuf,
        #[arg(long, default_value_t = ORBIT_BUDGET)]
        budget: u128,
    },
    /// Membership in the fixed-Levi-monodromy locus.
    BettiLocus {
        point: PathBuf,
        gamma: PathBuf,
        m: PathBuf,
        #[arg(long)]
        strict_equality: bool,
    },
}

struct Outcome {
    out: String,
    code: u8,
}

impl Outcome {
    fn ok(v: Value) -> Self {
        Outcome { out: v.to_string(), code: 0 }
    }

    fn flag(v: Value, good: bool) -> Self {
        Outcome { out: v.to_string(), code: if good { 0 } else { EXIT_FALSE } }
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow::Error::new(Error::Parse(format!("{}: {e}", path.display()))))
}

macro_rules! with_field {
    ($kind:expr, $f:ident => $body:expr) => {
        match $kind {
            FieldKind::Rational => {
                type $f = Rational;
                $body
            }
            FieldKind::Prime(p) => with_field!(@prime p, $f => $body; 2 3 5 7 11 13),
        }
    };
    (@prime $p:ident, $f:ident => $body:expr; $($q:literal)*) => {
        match $p {
            $($q => {
                type $f = Fp<$q>;
                $body
            })*
            other => Err(anyhow::Error::new(Error::Parse(format!("unsupported prime {other}")))),
        }
    };
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_MALFORMED;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Parse(_)) | Some(Error::DimensionMismatch(_)) | Some(Error::NotSquare { .. }) => EXIT_MALFORMED,
        Some(Error::IncompleteLattice(_)) | Some(Error::BudgetExceeded { .. }) => EXIT_INCOMPLETE,
        Some(_) => EXIT_PRECONDITION,
        None => EXIT_MALFORMED,
    }
}

fn stability<F: Scalar>(v: &Value, method: Method, group: Group, backend: Backend) -> anyhow::Result<Outcome> {
    let fls = FilteredLocalSystem::<F>::from_json(v)?;
    let (mut out, class) = match method {
        Method::Slope => {
            let verdict = slope_stability(&fls, backend)?;
            (verdict.to_json(), verdict.class)
        }
        Method::King => {
            let point = rep_to_point(&fls)?;
            let weights: Vec<Vec<Rational>> = fls.flags().iter().map(|f| f.weights().to_vec()).collect();
            let report = king_check(&point, &weights, backend)?;
            let mut out = report.verdict.to_json();
            out["chains_checked"] = json!(report.chains_checked);
            out["min_pairing"] = json!(report.min_pairing);
            out["limit_failures"] = json!(report.limit_failures);
            (out, report.verdict.class)
        }
        Method::R => {
            let kind = match group {
                Group::Gl => GroupKind::Gl,
                Group::Sl => GroupKind::Sl,
            };
            let report = r_stability(&fls, kind, backend)?;
            let mut out = report.verdict.to_json();
            out["parabolics_checked"] = json!(report.parabolics_checked);
            out["min_pairing"] = json!(report.min_pairing.as_ref().map(rational_to_json));
            out["cone_samples_agree"] = json!(report.cone_samples_agree);
            out["conjugation_independent"] = json!(report.conjugation_independent);
            (out, report.verdict.class)
        }
    };
    if out.get("certificate").and_then(Value::as_str) == Some("incomplete") && class != StabilityClass::Unstable {
        return Err(Error::IncompleteLattice("verdict withheld".into()).into());
    }
    out["degree"] = rational_to_json(&fls.degree());
    Ok(Outcome::flag(out, class.is_semistable()))
}

fn lift<F: Scalar>(v: &Value) -> anyhow::Result<Outcome> {
    let fls = FilteredLocalSystem::<F>::from_json(v)?;
    let weights: Vec<Vec<Rational>> = fls.flags().iter().map(|f| f.weights().to_vec()).collect();
    let mut out = rep_to_point(&fls)?.to_json();
    out["weights"] = weights_to_json(&weights);
    Ok(Outcome::ok(out))
}

fn project<F: Scalar>(v: &Value) -> anyhow::Result<Outcome> {
    let point = QuiverPoint::<F>::from_json(v)?;
    if !point.relation_holds()? {
        return Err(Error::RelationViolated.into());
    }
    Ok(Outcome::ok(match v.get("weights") {
        Some(w) => point.to_fls(&parse_weights(w, point.presentation().punctures())?)?.to_json(),
        None => point.to_rep()?.to_json(),
    }))
}

fn pairing_cmd<F: Scalar>(p: &Value, mu: &Value, theta: &Value) -> anyhow::Result<Outcome> {
    let point = QuiverPoint::<F>::from_json(p)?;
    let weights = parse_weights(theta, point.presentation().punctures())?;
    let mu = cocharacter_from_json(mu, &point)?;
    let chi = ChiTheta::new(&weights, point.partitions())?;
    let direct = pairing(&mu, &chi)?;
    let fls = point.to_fls(&weights)?;
    let via = pairing_via_degree(&mu.v0, &fls);
    let out = match via {
        Ok(q) => json!({
            "pairing": direct,
            "degree_formula": rational_to_json(&q),
            "agree": q == Rational::from_integer(direct.into()),
        }),
        Err(e) => json!({ "pairing": direct, "degree_formula": null, "note": e.to_string() }),
    };
    Ok(Outcome::ok(out))
}

fn jh<F: Scalar>(v: &Value, backend: Backend) -> anyhow::Result<Outcome> {
    let fls = FilteredLocalSystem::<F>::from_json(v)?;
    Ok(Outcome::ok(jordan_holder(&fls, backend)?.to_json()))
}

fn s_equiv<F: Scalar>(a: &Value, b: &Value, backend: Backend) -> anyhow::Result<Outcome> {
    let fa = FilteredLocalSystem::<F>::from_json(a)?;
    let fb = FilteredLocalSystem::<F>::from_json(b)?;
    let r = s_equivalent(&fa, &fb, backend)?;
    Ok(Outcome::flag(json!(r), r))
}

fn git_equiv<F: Scalar>(a: &Value, b: &Value, theta: &Value, backend: Backend, budget: u128) -> anyhow::Result<Outcome> {
    let pa = QuiverPoint::<F>::from_json(a)?;
    let pb = QuiverPoint::<F>::from_json(b)?;
    let weights = parse_weights(theta, pa.presentation().punctures())?;
    let r = git_equivalent(&pa, &pb, &weights, backend, budget)?;
    Ok(Outcome::flag(json!(r), r))
}

fn betti_locus<F: Scalar>(p: &Value, gamma: &Value, m: &Value, strict: bool) -> anyhow::Result<Outcome> {
    let point = QuiverPoint::<F>::from_json(p)?;
    let labels = point.presentation().punctures().to_vec();
    let gamma = parse_weights(gamma, &labels)?;
    let m = MonodromyDatum::<F>::from_json(m, &labels)?;
    let r = in_betti_locus(&point, &gamma, &m, strict)?;
    Ok(Outcome::flag(json!(r), r))
}

fn suite<F: Scalar>(cfg: &SuiteConfig, timing: bool) -> anyhow::Result<Outcome> {
    let (lines, report) = equivalence_suite::<F>(cfg)?;
    let mut out = String::new();
    for l in &lines {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out.push_str(&report.summary_json(timing).to_string());
    Ok(Outcome { out, code: if report.all_agree() { 0 } else { EXIT_FALSE } })
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let backend: Backend = cli.backend.into();
    match cli.command {
        Command::CheckRelation { rep } => {
            let v = read_json(&rep)?;
            let holds = with_field!(FieldKind::detect(&v)?, F => match SurfaceRep::<F>::from_json(&v) {
                Ok(_) => Ok(true),
                Err(Error::RelationViolated) => Ok(false),
                Err(e) => Err(anyhow::Error::new(e)),
            })?;
            Ok(Outcome::flag(json!(holds), holds))
        }
        Command::Degree { fls } => {
            let v = read_json(&fls)?;
            with_field!(FieldKind::detect(&v)?, F => {
                let f = FilteredLocalSystem::<F>::from_json(&v)?;
                Ok(Outcome::ok(rational_to_json(&f.degree())))
            })
        }
        Command::Stability { fls, method, group } => {
            let v = read_json(&fls)?;
            with_field!(FieldKind::detect(&v)?, F => stability::<F>(&v, method, group, backend))
        }
        Command::Lift { fls } => {
            let v = read_json(&fls)?;
            with_field!(FieldKind::detect(&v)?, F => lift::<F>(&v))
        }
        Command::Project { point } => {
            let v = read_json(&point)?;
            with_field!(FieldKind::detect(&v)?, F => project::<F>(&v))
        }
        Command::Pairing { point, mu, theta } => {
            let (p, m, t) = (read_json(&point)?, read_json(&mu)?, read_json(&theta)?);
            with_field!(FieldKind::detect(&p)?, F => pairing_cmd::<F>(&p, &m, &t))
        }
        Command::EquivalenceSuite { field, rank, genus, punctures, exhaustive, samples, seed, budget, pair_cap, timing } => {
            let samples = if exhaustive { None } else { samples };
            if !exhaustive && samples.is_none() {
                return Err(Error::Parse("pass --exhaustive or --samples N".into()).into());
            }
            let cfg = SuiteConfig { genus, punctures, rank, samples, seed, budget, pair_cap };
            with_field!(FieldKind::parse(&field)?, F => suite::<F>(&cfg, timing))
        }
        Command::Jh { fls } => {
            let v = read_json(&fls)?;
            with_field!(FieldKind::detect(&v)?, F => jh::<F>(&v, backend))
        }
        Command::SEquiv { a, b } => {
            let (va, vb) = (read_json(&a)?, read_json(&b)?);
            with_field!(FieldKind::detect(&va)?, F => s_equiv::<F>(&va, &vb, backend))
        }
        Command::GitEquiv { a, b, theta, budget } => {
            let (va, vb, t) = (read_json(&a)?, read_json(&b)?, read_json(&theta)?);
            with_field!(FieldKind::detect(&va)?, F => git_equiv::<F>(&va, &vb, &t, backend, budget))
        }
        Command::BettiLocus { point, gamma, m, strict_equality } => {
            let (p, g, mv) = (read_json(&point)?, read_json(&gamma)?, read_json(&m)?);
            with_field!(FieldKind::detect(&p)?, F => betti_locus::<F>(&p, &g, &mv, strict_equality))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_MALFORMED } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            println!("{}", o.out);
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
