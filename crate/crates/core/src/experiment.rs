//! Agreement suites over enumerated or sampled instances, reported as JSON lines
//! with a summary trailer.
//!
//! Instances are evaluated on a rayon pool and reassembled by index, so output is
//! deterministic for a fixed configuration and seed.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::filtered::{s_equivalent, slope_stability, StabilityClass};
use crate::flags::in_standard_parabolic;
use crate::git::{closed_orbit_representative, git_equivalent, ORBIT_BUDGET};
use crate::invariant::Backend;
use crate::quiver::{king_check, rep_to_point, GaugeElement, QuiverPoint};
use crate::root_datum::{r_stability, GroupKind};
use crate::sample::{default_weights, genus_zero_slice, random_fls, random_gauge, random_invertible, random_parabolic, seeded};
use crate::scalar::{Rational, Scalar};
use crate::surface::SurfacePresentation;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub agree: usize,
    pub total: usize,
}

impl Tally {
    pub fn record(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.agree += 1;
        }
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.agree as f64 / self.total as f64
        }
    }

    pub fn is_full(&self) -> bool {
        self.agree == self.total
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub instances: usize,
    pub tallies: BTreeMap<String, Tally>,
    /// Full instance dumps for every disagreement.
    pub counterexamples: Vec<Value>,
    /// Instances per lattice-coverage certificate.
    pub certificates: BTreeMap<String, usize>,
    pub elapsed_ms: u128,
}

impl ExperimentReport {
    pub fn all_agree(&self) -> bool {
        self.tallies.values().all(Tally::is_full)
    }

    pub fn tally(&self, key: &str) -> Tally {
        self.tallies.get(key).copied().unwrap_or_default()
    }

    /// Timing is left out unless asked for, which keeps reports byte-stable.
    pub fn summary_json(&self, with_timing: bool) -> Value {
        let tallies: serde_json::Map<String, Value> = self
            .tallies
            .iter()
            .map(|(k, t)| (k.clone(), json!({ "agree": t.agree, "total": t.total })))
            .collect();
        let mut v = json!({
            "summary": true,
            "instances": self.instances,
            "tallies": tallies,
            "all_agree": self.all_agree(),
            "certificates": self.certificates,
            "counterexamples": self.counterexamples,
        });
        if with_timing {
            v["elapsed_ms"] = json!(self.elapsed_ms as u64);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub genus: usize,
    pub punctures: usize,
    pub rank: usize,
    /// `None` enumerates the genus-zero slice.
    pub samples: Option<usize>,
    pub seed: u64,
    pub budget: u128,
    /// Upper bound on the number of pairs fed to the S-equivalence comparison.
    pub pair_cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { genus: 0, punctures: 2, rank: 2, samples: None, seed: 0, budget: 50_000_000, pair_cap: 300 }
    }
}

fn class_str(r: &Result<StabilityClass>) -> Value {
    match r {
        Ok(c) => json!(c.as_str()),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn same(a: &Result<StabilityClass>, b: &Result<StabilityClass>) -> bool {
    matches!((a, b), (Ok(x), Ok(y)) if x == y)
}

fn dump<F: Scalar>(point: &QuiverPoint<F>, weights: &[Vec<Rational>]) -> Value {
    json!({
        "point": point.to_json(),
        "weights": weights.iter().map(|w| w.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

struct Evaluated {
    slope: Result<StabilityClass>,
    king: Result<StabilityClass>,
    r: Result<StabilityClass>,
    coverage: String,
}

fn evaluate<F: Scalar>(point: &QuiverPoint<F>, weights: &[Vec<Rational>]) -> Evaluated {
    let fls = point.to_fls(weights);
    let (slope, r, coverage) = match &fls {
        Ok(f) => {
            let s = slope_stability(f, Backend::Auto);
            let coverage = s.as_ref().map(|v| v.coverage.as_str().to_string()).unwrap_or_else(|_| "error".into());
            (s.map(|v| v.class), r_stability(f, GroupKind::Gl, Backend::Auto).map(|r| r.verdict.class), coverage)
        }
        Err(e) => (Err(Error::Precondition(e.to_string())), Err(Error::Precondition(e.to_string())), "error".into()),
    };
    let king = king_check(point, weights, Backend::Auto).map(|k| k.verdict.class);
    Evaluated { slope, king, r, coverage }
}

/// Instances of the configured type with full flags and [`default_weights`].
pub fn suite_instances<F: Scalar>(cfg: &SuiteConfig) -> Result<Vec<QuiverPoint<F>>> {
    let parts = vec![vec![1; cfg.rank]; cfg.punctures];
    match cfg.samples {
        None => {
            if cfg.genus != 0 {
                return Err(Error::Precondition("exhaustive enumeration is implemented for genus zero".into()));
            }
            genus_zero_slice(&parts, cfg.budget)
        }
        Some(count) => {
            let pres = SurfacePresentation::with_labels(cfg.genus, cfg.punctures);
            let weights = vec![default_weights(cfg.rank); cfg.punctures];
            let mut rng = seeded(cfg.seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let Some(f) = random_fls::<F>(&pres, &parts, &weights, &mut rng, 1000)? else {
                    return Err(Error::Precondition("sampler rejected every draw".into()));
                };
                let p = rep_to_point(&f)?;
                let g = random_gauge(&p, &mut rng);
                out.push(g.act(&p)?);
            }
            Ok(out)
        }
    }
}

/// Slope vs King, R vs slope, and (over finite fields) S-equivalence vs GIT equivalence.
pub fn equivalence_suite<F: Scalar>(cfg: &SuiteConfig) -> Result<(Vec<Value>, ExperimentReport)> {
    let start = Instant::now();
    let points = suite_instances::<F>(cfg)?;
    let weights = vec![default_weights(cfg.rank); cfg.punctures];
    let evals: Vec<Evaluated> = points.par_iter().map(|p| evaluate(p, &weights)).collect();
    let mut report = ExperimentReport { instances: points.len(), ..Default::default() };
    let mut lines = Vec::with_capacity(points.len());
    let mut semistable = Vec::new();
    for (i, (p, e)) in points.iter().zip(&evals).enumerate() {
        let sk = same(&e.slope, &e.king);
        let rs = same(&e.r, &e.slope);
        report.tallies.entry("slope_vs_king".into()).or_default().record(sk);
        report.tallies.entry("r_vs_slope".into()).or_default().record(rs);
        *report.certificates.entry(e.coverage.clone()).or_default() += 1;
        if !(sk && rs) {
            let mut d = dump(p, &weights);
            d["index"] = json!(i);
            d["slope"] = class_str(&e.slope);
            d["king"] = class_str(&e.king);
            d["r"] = class_str(&e.r);
            report.counterexamples.push(d);
        }
        if matches!(e.slope, Ok(c) if c.is_semistable()) {
            semistable.push(i);
        }
        lines.push(json!({
            "index": i,
            "slope": class_str(&e.slope),
            "king": class_str(&e.king),
            "r": class_str(&e.r),
        }));
    }
    if F::is_finite_field() && !semistable.is_empty() {
        let pairs = equivalence_pairs(&points, &semistable, cfg)?;
        let results: Vec<(Result<bool>, Result<bool>)> = pairs
            .par_iter()
            .map(|(_, p, q)| {
                let s = p
                    .to_fls(&weights)
                    .and_then(|a| q.to_fls(&weights).and_then(|b| s_equivalent(&a, &b, Backend::Auto)));
                let g = git_equivalent(p, q, &weights, Backend::Auto, ORBIT_BUDGET);
                (s, g)
            })
            .collect();
        for ((label, p, q), (s, g)) in pairs.iter().zip(&results) {
            let ok = matches!((s, g), (Ok(a), Ok(b)) if a == b);
            report.tallies.entry("s_equiv_vs_git".into()).or_default().record(ok);
            let show = |r: &Result<bool>| match r {
                Ok(b) => json!(b),
                Err(e) => json!({ "error": e.to_string() }),
            };
            if !ok {
                report.counterexamples.push(json!({
                    "pair": label,
                    "p": dump(p, &weights),
                    "q": dump(q, &weights),
                    "s_equivalent": show(s),
                    "git_equivalent": show(g),
                }));
            }
            lines.push(json!({ "pair": label, "s_equivalent": show(s), "git_equivalent": show(g) }));
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok((lines, report))
}

type Pair<F> = (String, QuiverPoint<F>, QuiverPoint<F>);

/// Random pairs of semistable instances, `P_x`-twisted gauge copies, and closed-orbit limits.
fn equivalence_pairs<F: Scalar>(points: &[QuiverPoint<F>], semistable: &[usize], cfg: &SuiteConfig) -> Result<Vec<Pair<F>>> {
    let weights = vec![default_weights(cfg.rank); cfg.punctures];
    let per_kind = (cfg.pair_cap / 3).max(1);
    let stride = (semistable.len() / per_kind).max(1);
    let mut rng = seeded(cfg.seed ^ 0x9a1f);
    let mut out = Vec::new();
    for &i in semistable.iter().step_by(stride).take(per_kind) {
        let p = &points[i];
        let j = semistable[rng.gen_range(0..semistable.len())];
        out.push((format!("{i}~{j}"), p.clone(), points[j].clone()));
        let twist = GaugeElement {
            g0: random_invertible(p.rank(), &mut rng),
            gx: p.partitions().iter().map(|part| random_parabolic(part, &mut rng)).collect(),
        };
        debug_assert!(twist.gx.iter().zip(p.partitions()).all(|(g, part)| in_standard_parabolic(part, g)));
        out.push((format!("{i}~twist"), p.clone(), twist.act_unchecked(p)?));
        let limit = closed_orbit_representative(p, &weights, Backend::Auto)?;
        out.push((format!("{i}~limit"), p.clone(), limit));
    }
    Ok(out)
}
