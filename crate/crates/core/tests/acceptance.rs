//! Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Tolerances are pinned below. Everything is exact, so agreement thresholds are
//! 100% and numeric comparisons are equality of rationals or field elements.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use betti_core::betti::{in_betti_locus, levi_monodromy_map, MonodromyDatum};
use betti_core::experiment::{equivalence_suite, ExperimentReport, SuiteConfig};
use betti_core::filtered::{
    degree_zero_stability, s_equivalent, slope_stability, FilteredLocalSystem, StabilityClass, WeightedFlag,
};
use betti_core::flags::{Flag, GradedCocharacter};
use betti_core::git::{git_equivalent, ORBIT_BUDGET};
use betti_core::invariant::Backend;
use betti_core::quiver::{
    king_check, levi_normalized, limit, pairing, pairing_via_degree, rep_to_point, ChiTheta, QuiverCocharacter,
};
use betti_core::root_datum::{dominance_report, dot, r_stability, GroupKind, RootDatum};
use betti_core::sample::{
    genus_zero_slice, random_gauge, random_invertible, random_parabolic, random_rep, seeded, stable_flag, Rng64,
};
use betti_core::surface::{relation_product, SurfacePresentation, SurfaceRep};
use betti_core::{Matrix, Rational, Scalar, Subspace, F3, F5, F7};
use num_traits::Zero;
use rand::Rng;

const C1_RUNTIME: Duration = Duration::from_secs(1);
const C2_MIN_INSTANCES: usize = 10_000;
const C3_MIN_PAIRS: usize = 1_000;
const C4_MIN_INSTANCES: usize = 400;
const C5_MIN_PAIRS: usize = 200;
const C6_MIN_INSTANCES: usize = 200;
const C7_SAMPLES: usize = 100;
const C9_TRANSPORTS: usize = 50;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

struct Line {
    ok: bool,
}

fn report(n: usize, name: &str, ok: bool, detail: String) -> Line {
    println!("criterion {n} [{name}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    Line { ok }
}

fn worked_example() -> FilteredLocalSystem<Rational> {
    let rep = SurfaceRep::new(
        SurfacePresentation::with_labels(0, 3),
        2,
        vec![],
        vec![],
        vec![Matrix::from_i64(&[[1, 1], [0, 1]]), Matrix::from_i64(&[[1, -1], [0, 1]]), Matrix::identity(2)],
    )
    .unwrap();
    let wf = || WeightedFlag::standard(&[1, 1], vec![q(1, 3), q(-1, 3)]).unwrap();
    FilteredLocalSystem::new(rep, vec![wf(), wf(), WeightedFlag::trivial(2)]).unwrap()
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let f = worked_example();
    let degree = f.degree();
    let lattice = f.invariant_lattice(Backend::Auto).unwrap();
    let lines: Vec<&Subspace<Rational>> = lattice.proper().collect();
    let e1 = Subspace::coordinate(2, [0]);
    let unique = lines.len() == 1 && *lines[0] == e1 && lattice.is_complete();
    let sub = f.sub_degree(&e1).unwrap();
    let verdict = slope_stability(&f, Backend::Auto).unwrap();
    let irreducible = f.rep().is_irreducible(Backend::Auto).unwrap();
    let elapsed = start.elapsed();
    let ok = degree.is_zero()
        && unique
        && sub == q(-2, 3)
        && verdict.class == StabilityClass::Stable
        && !irreducible
        && elapsed < C1_RUNTIME;
    report(
        1,
        "worked example",
        ok,
        format!(
            "deg={degree}, invariant lines={}, deg(L')={sub}, verdict={}, irreducible={irreducible}, {:?} < {:?}",
            lines.len(),
            verdict.class.as_str(),
            elapsed,
            C1_RUNTIME
        ),
    )
}

fn suite() -> ExperimentReport {
    let cfg = SuiteConfig { pair_cap: 300, ..Default::default() };
    equivalence_suite::<F5>(&cfg).unwrap().1
}

fn criterion_2(r: &ExperimentReport) -> Line {
    let t = r.tally("slope_vs_king");
    let ok = t.is_full() && t.total >= C2_MIN_INSTANCES;
    report(
        2,
        "slope = King on the F5 rank-2 slice",
        ok,
        format!("{}/{} agree, need >= {C2_MIN_INSTANCES} instances, {} ms", t.agree, t.total, r.elapsed_ms),
    )
}

fn criterion_8(r: &ExperimentReport) -> Line {
    let t = r.tally("r_vs_slope");
    let ok = t.is_full() && t.total >= C2_MIN_INSTANCES;
    report(8, "R-stability = slope stability for GL_2 over F5", ok, format!("{}/{} agree", t.agree, t.total))
}

fn random_composition(n: usize, rng: &mut Rng64) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut run = 1;
    for _ in 1..n {
        if rng.gen_bool(0.5) {
            parts.push(run);
            run = 1;
        } else {
            run += 1;
        }
    }
    parts.push(run);
    parts
}

fn random_weights(k: usize, rng: &mut Rng64) -> Vec<Rational> {
    let d = [1, 2, 3, 6][rng.gen_range(0..4)];
    let mut nums: Vec<i64> = Vec::new();
    while nums.len() < k {
        let x = rng.gen_range(-6..=6);
        if !nums.contains(&x) {
            nums.push(x);
        }
    }
    nums.sort_by(|a, b| b.cmp(a));
    nums.into_iter().map(|x| q(x, d)).collect()
}

/// Reducible instance: every generator in the Borel subgroup, flags grown from eigenlines,
/// everything conjugated by a random matrix.
fn reducible_fls<F: Scalar>(
    rng: &mut Rng64,
    genus: usize,
    punctures: usize,
    n: usize,
    degree_zero: bool,
) -> Option<FilteredLocalSystem<F>> {
    let full = vec![1; n];
    let a: Vec<Matrix<F>> = (0..genus).map(|_| random_parabolic(&full, rng)).collect();
    let b: Vec<Matrix<F>> = (0..genus).map(|_| random_parabolic(&full, rng)).collect();
    let mut c: Vec<Matrix<F>> = (0..punctures - 1).map(|_| random_parabolic(&full, rng)).collect();
    c.push(relation_product(n, &a, &b, &c).unwrap().inverse().unwrap());
    let mut flags = Vec::new();
    for cx in &c {
        let part = random_composition(n, rng);
        let flag = stable_flag(cx, &part, rng).unwrap()?;
        flags.push(WeightedFlag::new(flag, random_weights(part.len(), rng)).unwrap());
    }
    if degree_zero {
        let deg: Rational = flags.iter().map(|f| f.degree()).sum();
        let shift = deg / Rational::from_integer((n as i64).into());
        let w: Vec<Rational> = flags[0].weights().iter().map(|x| x - &shift).collect();
        flags[0] = WeightedFlag::new(flags[0].flag().clone(), w).unwrap();
    }
    let rep = SurfaceRep::new(SurfacePresentation::with_labels(genus, punctures), n, a, b, c).unwrap();
    let g = random_invertible(n, rng);
    FilteredLocalSystem::new(rep, flags).unwrap().conjugate(&g).ok()
}

/// Compares both evaluations of `⟨μ, χ_θ⟩` on random invariant chains with random
/// increasing weights. Returns (pairs, agreements, pairs whose limit exists).
fn pairing_pairs<F: Scalar>(count: usize, seed: u64) -> (usize, usize, usize) {
    let mut rng = seeded(seed);
    let (mut total, mut agree, mut limits) = (0, 0, 0);
    while total < count {
        let n = rng.gen_range(2..=3);
        let genus = rng.gen_range(0..=1);
        let punctures = rng.gen_range(1..=3);
        let Some(start) = reducible_fls::<F>(&mut rng, genus, punctures, n, false) else { continue };
        let weights: Vec<Vec<Rational>> = start.flags().iter().map(|f| f.weights().to_vec()).collect();
        let base = rep_to_point(&start).unwrap();
        let point = random_gauge(&base, &mut rng).act(&base).unwrap();
        // the gauge moves `v0` too, so chains are read off the moved system
        let fls = point.to_fls(&weights).unwrap();
        let chi = ChiTheta::new(&weights, point.partitions()).unwrap();
        let chains = fls.invariant_lattice(Backend::Auto).unwrap().proper_chains(10_000);
        for _ in 0..4 {
            let chain = if chains.is_empty() || rng.gen_bool(0.1) {
                vec![]
            } else {
                chains[rng.gen_range(0..chains.len())].clone()
            };
            let flag = Flag::from_proper(n, chain).unwrap();
            let mut top_first = vec![rng.gen_range(-3..=3)];
            for _ in 1..flag.len() {
                let next = top_first.last().unwrap() + rng.gen_range(1..=3);
                top_first.push(next);
            }
            let decreasing: Vec<i64> = top_first.iter().rev().copied().collect();
            let v0 = GradedCocharacter::from_flag(&flag, &decreasing).unwrap();
            let vx = point
                .partitions()
                .iter()
                .zip(point.c_in())
                .map(|(p, c)| levi_normalized(p, c, &flag, &top_first).unwrap())
                .collect();
            let mu = QuiverCocharacter { v0, vx };
            let direct = pairing(&mu, &chi).unwrap();
            let via = pairing_via_degree(&mu.v0, &fls).unwrap();
            total += 1;
            if via == Rational::from_integer(direct.into()) {
                agree += 1;
            }
            if limit(&point, &mu).unwrap().is_some() {
                limits += 1;
            }
        }
    }
    (total, agree, limits)
}

fn criterion_3() -> Line {
    let (tq, aq, lq) = pairing_pairs::<Rational>(C3_MIN_PAIRS / 2 + 4, 31);
    let (tf, af, lf) = pairing_pairs::<F7>(C3_MIN_PAIRS / 2 + 4, 37);
    let ok = tq == aq && tf == af && tq + tf >= C3_MIN_PAIRS;
    report(
        3,
        "pairing identity, direct vs degree formula",
        ok,
        format!("Q {aq}/{tq}, F7 {af}/{tf}; limit exists on {} of {} pairs", lq + lf, tq + tf),
    )
}

fn trivial_weight_check<F: Scalar>(rep: SurfaceRep<F>, rng: &mut Rng64) -> bool {
    let fls = FilteredLocalSystem::with_trivial_weights(rep);
    let weights: Vec<Vec<Rational>> = fls.flags().iter().map(|f| f.weights().to_vec()).collect();
    let point = rep_to_point(&fls).unwrap();
    let chi = ChiTheta::of_fls(&fls).unwrap();
    let g = random_gauge(&point, rng);
    let king = king_check(&point, &weights, Backend::Auto).unwrap().verdict.class;
    let slope = slope_stability(&fls, Backend::Auto).unwrap().class;
    chi.is_trivial() && chi.evaluate(&g).unwrap() == F::one() && king.is_semistable() && slope.is_semistable()
}

fn criterion_4() -> Line {
    let mut rng = seeded(4);
    let (mut total, mut ok_count) = (0, 0);
    // every relation-satisfying rank-2 point over F3 with two punctures in genus zero
    let pres = SurfacePresentation::with_labels(0, 2);
    for c1 in betti_core::sample::all_invertible::<F3>(2, 1 << 20).unwrap() {
        let rep = SurfaceRep::new(pres.clone(), 2, vec![], vec![], vec![c1.clone(), c1.inverse().unwrap()]).unwrap();
        total += 1;
        ok_count += trivial_weight_check(rep, &mut rng) as usize;
    }
    for i in 0..360 {
        let genus = i % 2;
        let punctures = 1 + i % 3;
        let n = 2 + i % 2;
        let pres = SurfacePresentation::with_labels(genus, punctures);
        total += 1;
        ok_count += match i % 3 {
            0 => trivial_weight_check(random_rep::<F5>(&pres, n, &mut rng).unwrap(), &mut rng),
            1 => trivial_weight_check(random_rep::<F7>(&pres, n, &mut rng).unwrap(), &mut rng),
            _ => trivial_weight_check(random_rep::<Rational>(&pres, n, &mut rng).unwrap(), &mut rng),
        } as usize;
    }
    let ok = ok_count == total && total >= C4_MIN_INSTANCES;
    report(4, "trivial weights: all semistable, trivial character", ok, format!("{ok_count}/{total}"))
}

/// Genus one, one puncture, rank 2 over F5: `a`, `b` upper triangular with diagonal
/// characters, `c` solved from the relation.
fn extension(chars: [(i64, i64); 2], u: i64, v: i64, lower: bool, weighted: bool) -> FilteredLocalSystem<F5> {
    let [(a1, b1), (a2, b2)] = chars;
    let mut a = Matrix::<F5>::from_i64(&[[a1, u], [0, a2]]);
    let mut b = Matrix::<F5>::from_i64(&[[b1, v], [0, b2]]);
    if lower {
        let w = Matrix::<F5>::from_i64(&[[0, 1], [1, 0]]);
        a = a.conjugate_by(&w).unwrap();
        b = b.conjugate_by(&w).unwrap();
    }
    let c = relation_product(2, std::slice::from_ref(&a), std::slice::from_ref(&b), &[]).unwrap().inverse().unwrap();
    let rep = SurfaceRep::new(SurfacePresentation::with_labels(1, 1), 2, vec![a], vec![b], vec![c]).unwrap();
    if weighted {
        let step = if lower { Subspace::coordinate(2, [1]) } else { Subspace::coordinate(2, [0]) };
        let flag = Flag::from_proper(2, vec![step]).unwrap();
        if let Ok(f) = FilteredLocalSystem::new(rep.clone(), vec![WeightedFlag::new(flag, vec![q(1, 3), q(-1, 3)]).unwrap()]) {
            return f;
        }
    }
    FilteredLocalSystem::with_trivial_weights(rep)
}

fn criterion_5() -> Line {
    let mut rng = seeded(5);
    let nz = |rng: &mut Rng64| rng.gen_range(1..5i64);
    let mut pairs: Vec<(FilteredLocalSystem<F5>, FilteredLocalSystem<F5>)> = Vec::new();
    while pairs.len() < C5_MIN_PAIRS + 40 {
        let l1 = (nz(&mut rng), nz(&mut rng));
        let l2 = (nz(&mut rng), nz(&mut rng));
        let (u, v) = (rng.gen_range(0..5), rng.gen_range(0..5));
        let weighted = rng.gen_bool(0.25);
        let p = extension([l1, l2], u, v, false, weighted);
        let q2 = match pairs.len() % 4 {
            // split against non-split, same lines
            0 => extension([l1, l2], 0, 0, false, weighted),
            // the extension in the opposite direction
            1 => extension([l2, l1], rng.gen_range(0..5), rng.gen_range(0..5), true, weighted),
            // different lines
            2 => extension([(nz(&mut rng), nz(&mut rng)), l2], u, v, false, weighted),
            // proportional extension classes
            _ => {
                let s = nz(&mut rng);
                extension([l1, l2], u * s, v * s, false, weighted)
            }
        };
        if p.partitions() != q2.partitions() || p.degree() != q2.degree() {
            continue;
        }
        let semistable = |f: &FilteredLocalSystem<F5>| slope_stability(f, Backend::Auto).unwrap().class.is_semistable();
        if semistable(&p) && semistable(&q2) {
            pairs.push((p, q2));
        }
    }
    let (mut agree, mut trues, mut splits) = (0, 0, 0);
    for (a, b) in &pairs {
        let wa: Vec<Vec<Rational>> = a.flags().iter().map(|f| f.weights().to_vec()).collect();
        let pa = rep_to_point(a).unwrap();
        let pb = rep_to_point(b).unwrap();
        let s = s_equivalent(a, b, Backend::Auto).unwrap();
        let g = git_equivalent(&pa, &pb, &wa, Backend::Auto, ORBIT_BUDGET).unwrap();
        agree += (s == g) as usize;
        trues += s as usize;
        splits += (b.rep().a()[0].get(0, 1).is_zero() && b.rep().a()[0].get(1, 0).is_zero()) as usize;
    }
    let ok = agree == pairs.len() && pairs.len() >= C5_MIN_PAIRS && trues > 0 && trues < pairs.len() && splits > 0;
    report(
        5,
        "S-equivalence = GIT equivalence over F5",
        ok,
        format!("{agree}/{} agree, {trues} equivalent, {splits} with a split partner", pairs.len()),
    )
}

fn criterion_6() -> Line {
    let mut rng = seeded(6);
    let (mut total, mut agree, mut nonstable) = (0, 0, 0);
    while total < C6_MIN_INSTANCES + 40 {
        let n = rng.gen_range(2..=3);
        let genus = rng.gen_range(0..=1);
        let punctures = rng.gen_range(1..=3);
        let (sign, slope) = match total % 3 {
            0 => {
                let Some(f) = reducible_fls::<F5>(&mut rng, genus, punctures, n, true) else { continue };
                (degree_zero_stability(&f, Backend::Auto).unwrap().class, slope_stability(&f, Backend::Auto).unwrap().class)
            }
            1 => {
                let Some(f) = reducible_fls::<F7>(&mut rng, genus, punctures, n, true) else { continue };
                (degree_zero_stability(&f, Backend::Auto).unwrap().class, slope_stability(&f, Backend::Auto).unwrap().class)
            }
            _ => {
                let Some(f) = reducible_fls::<Rational>(&mut rng, genus, punctures, n, true) else { continue };
                (degree_zero_stability(&f, Backend::Auto).unwrap().class, slope_stability(&f, Backend::Auto).unwrap().class)
            }
        };
        total += 1;
        agree += (sign == slope) as usize;
        nonstable += (slope != StabilityClass::Stable) as usize;
    }
    let ok = agree == total && total >= C6_MIN_INSTANCES;
    report(
        6,
        "degree-zero sign test = slope stability",
        ok,
        format!("{agree}/{total} agree, {nonstable} not stable"),
    )
}

fn criterion_7() -> Line {
    let mut rng = seeded(7);
    let (mut total, mut dual_ok, mut dominance_ok, mut levi_defects) = (0, 0, 0, 0);
    for rd in [RootDatum::sl(2), RootDatum::sl(3), RootDatum::gl(2), RootDatum::gl(3)] {
        let n = rd.ambient();
        for _ in 0..C7_SAMPLES {
            let mut mu: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.gen_range(-5..=5i64).into())).collect();
            if rd.kind() == GroupKind::Sl {
                let s: Rational = mu.iter().cloned().sum();
                mu[n - 1] -= s;
            }
            let chi: Vec<Rational> = (0..n).map(|_| Rational::from_integer(rng.gen_range(-5..=5i64).into())).collect();
            let lhs = dot(&mu, &rd.normalize_character(&chi).unwrap());
            let rhs = dot(&rd.dual_cochar_of_char(&chi), &rd.dual_char_of_cochar(&mu));
            let rep = dominance_report(&rd, &mu).unwrap();
            total += 1;
            dual_ok += (lhs == rhs) as usize;
            dominance_ok += (rep.nonnegative_on_parabolic && rep.dominant) as usize;
            levi_defects += (!rep.trivial_on_levi_roots) as usize;
        }
    }
    let ok = dual_ok == total && dominance_ok == total;
    report(
        7,
        "duality and dominance for A_1, A_2",
        ok,
        format!(
            "duality {dual_ok}/{total}, dominance {dominance_ok}/{total}; chi_mu nontrivial on a Levi coroot in {levi_defects} samples"
        ),
    )
}

/// Degree, three verdicts, Betti-locus membership and S-equivalence under gauge and conjugation.
fn invariance_battery<F: Scalar>(fls: &FilteredLocalSystem<F>, partner: Option<&FilteredLocalSystem<F>>, rng: &mut Rng64) -> (usize, usize) {
    let weights: Vec<Vec<Rational>> = fls.flags().iter().map(|f| f.weights().to_vec()).collect();
    let point = rep_to_point(fls).unwrap();
    let base = (
        fls.degree(),
        slope_stability(fls, Backend::Auto).unwrap().class,
        king_check(&point, &weights, Backend::Auto).unwrap().verdict.class,
        r_stability(fls, GroupKind::Gl, Backend::Auto).unwrap().verdict.class,
    );
    let levi = levi_monodromy_map(&point, &weights).unwrap();
    let m_same = MonodromyDatum::new(levi.clone()).unwrap();
    let mut bumped = levi;
    bumped[0][0] = bumped[0][0].scale(&F::from_i64(2));
    let m_other = MonodromyDatum::new(bumped).unwrap();
    let locus = |p: &betti_core::quiver::QuiverPoint<F>| {
        (in_betti_locus(p, &weights, &m_same, false).unwrap(), in_betti_locus(p, &weights, &m_other, false).unwrap())
    };
    let base_locus = locus(&point);
    let semistable = base.1.is_semistable() && base.0.is_zero();
    let base_s = match partner {
        Some(p) if semistable => Some(s_equivalent(fls, p, Backend::Auto).unwrap()),
        _ => None,
    };
    let (mut total, mut ok) = (0, 0);
    for k in 0..C9_TRANSPORTS {
        let (moved_point, moved) = if k % 2 == 0 {
            let g = random_gauge(&point, rng);
            let p = g.act(&point).unwrap();
            let f = p.to_fls(&weights).unwrap();
            (p, f)
        } else {
            let g = random_invertible(fls.rank(), rng);
            let f = fls.conjugate(&g).unwrap();
            (rep_to_point(&f).unwrap(), f)
        };
        let now = (
            moved.degree(),
            slope_stability(&moved, Backend::Auto).unwrap().class,
            king_check(&moved_point, &weights, Backend::Auto).unwrap().verdict.class,
            r_stability(&moved, GroupKind::Gl, Backend::Auto).unwrap().verdict.class,
        );
        let s_ok = match (base_s, partner) {
            (Some(b), Some(p)) => {
                s_equivalent(&moved, p, Backend::Auto).unwrap() == b && s_equivalent(&moved, fls, Backend::Auto).unwrap()
            }
            _ => true,
        };
        total += 1;
        ok += (now == base && locus(&moved_point) == base_locus && base_locus.0 && s_ok) as usize;
    }
    (total, ok)
}

fn criterion_9() -> Line {
    let mut rng = seeded(9);
    let (mut total, mut ok) = (0, 0);
    let worked = worked_example();
    let (t, o) = invariance_battery(&worked, Some(&worked), &mut rng);
    total += t;
    ok += o;
    let weights = vec![vec![q(1, 3), q(-1, 3)]; 2];
    let slice = genus_zero_slice::<F5>(&[vec![1, 1], vec![1, 1]], 50_000_000).unwrap();
    let picks: Vec<FilteredLocalSystem<F5>> =
        (0..12).map(|i| slice[(i * 1063) % slice.len()].to_fls(&weights).unwrap()).collect();
    for (i, f) in picks.iter().enumerate() {
        let partner = &picks[(i + 1) % picks.len()];
        let partner = if partner.degree().is_zero() && slope_stability(partner, Backend::Auto).unwrap().class.is_semistable() {
            Some(partner)
        } else {
            Some(f)
        };
        let (t, o) = invariance_battery(f, partner, &mut rng);
        total += t;
        ok += o;
    }
    for _ in 0..3 {
        let f = loop {
            if let Some(f) = reducible_fls::<F7>(&mut rng, 1, 2, 3, true) {
                break f;
            }
        };
        let (t, o) = invariance_battery(&f, Some(&f), &mut rng);
        total += t;
        ok += o;
    }
    report(
        9,
        "gauge and conjugation invariance",
        ok == total,
        format!("{ok}/{total} transports ({C9_TRANSPORTS} per instance)"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let suite = suite();
    let lines = [
        criterion_1(),
        criterion_2(&suite),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(&suite),
        criterion_9(),
    ];
    let passed = lines.iter().filter(|l| l.ok).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1?}", lines.len(), start.elapsed());
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
