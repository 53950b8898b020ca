//! Root data of type A in ambient coordinates, weights as rational cocharacters,
//! parabolics from weights, the cocharacter/character duality, and R-stability for
//! `GL_n` and `SL_n`.
//!
//! Cocharacters and characters are both vectors in `Q^n` paired by the dot product.
//! For `SL_n` cocharacters have coordinate sum zero and characters are taken modulo
//! `(1, ..., 1)`, represented by their sum-zero projection.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::filtered::{FilteredLocalSystem, StabilityClass, StabilityVerdict, Witness};
use crate::flags::{common_adapted_basis, Flag};
use crate::invariant::{Backend, Coverage};
use crate::matrix::Matrix;
use crate::quiver::{QuiverPoint, GaugeElement};
use crate::scalar::{rational_from_json, rational_to_json, Rational, Scalar};
use crate::subspace::Subspace;

pub type QVec = Vec<Rational>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(n: usize, i: usize) -> QVec {
    (0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect()
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn project_sum_zero(v: &[Rational]) -> QVec {
    let mean = v.iter().cloned().sum::<Rational>() / q(v.len() as i64);
    v.iter().map(|x| x - &mean).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Gl,
    Sl,
}

impl GroupKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GL" | "GL_N" => Ok(GroupKind::Gl),
            "SL" | "SL_N" => Ok(GroupKind::Sl),
            _ => Err(Error::Parse(format!("unknown group {s}, expected GL or SL"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDatum {
    kind: GroupKind,
    ambient: usize,
    /// Basis `e_i` of the cocharacter space.
    coroot_basis: Vec<QVec>,
    /// Dual basis `e_i*`.
    dual_basis: Vec<QVec>,
    simple_roots: Vec<QVec>,
    /// `ω_k` paired with the simple coroots to `δ`.
    fundamental_weights: Vec<QVec>,
    roots: Vec<QVec>,
}

impl RootDatum {
    /// `GL_n`: `e_i = ε_i`, `e_i* = ε_i*`, `ω_k = ε_1 + ... + ε_k`.
    pub fn gl(n: usize) -> Self {
        Self::type_a(GroupKind::Gl, n)
    }

    /// `SL_n`: `e_i = α_i^∨`, `e_i* = ω_i` (projected to sum zero).
    pub fn sl(n: usize) -> Self {
        Self::type_a(GroupKind::Sl, n)
    }

    pub fn of_kind(kind: GroupKind, n: usize) -> Self {
        Self::type_a(kind, n)
    }

    fn type_a(kind: GroupKind, n: usize) -> Self {
        let simple_roots: Vec<QVec> = (0..n.saturating_sub(1))
            .map(|i| unit(n, i).iter().zip(unit(n, i + 1)).map(|(a, b)| a - b).collect())
            .collect();
        let omega = |k: usize| -> QVec {
            let raw: QVec = (0..n).map(|i| if i < k { Rational::one() } else { Rational::zero() }).collect();
            match kind {
                GroupKind::Gl => raw,
                GroupKind::Sl => project_sum_zero(&raw),
            }
        };
        let fundamental_weights: Vec<QVec> = (1..n).map(omega).collect();
        let mut roots = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    roots.push(unit(n, i).iter().zip(unit(n, j)).map(|(a, b)| a - b).collect());
                }
            }
        }
        let (coroot_basis, dual_basis) = match kind {
            GroupKind::Gl => ((0..n).map(|i| unit(n, i)).collect(), (0..n).map(|i| unit(n, i)).collect()),
            GroupKind::Sl => (simple_roots.clone(), fundamental_weights.clone()),
        };
        RootDatum { kind, ambient: n, coroot_basis, dual_basis, simple_roots, fundamental_weights, roots }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Rank of the maximal torus.
    pub fn rank(&self) -> usize {
        self.coroot_basis.len()
    }

    pub fn coroot_basis(&self) -> &[QVec] {
        &self.coroot_basis
    }

    pub fn dual_basis(&self) -> &[QVec] {
        &self.dual_basis
    }

    pub fn simple_roots(&self) -> &[QVec] {
        &self.simple_roots
    }

    pub fn fundamental_weights(&self) -> &[QVec] {
        &self.fundamental_weights
    }

    pub fn roots(&self) -> &[QVec] {
        &self.roots
    }

    pub fn coroot(r: &[Rational]) -> QVec {
        let s = q(2) / dot(r, r);
        r.iter().map(|x| x * &s).collect()
    }

    /// Positive roots: positive against the generic vector `(n, n-1, ..., 1)`.
    pub fn is_positive(&self, r: &[Rational]) -> bool {
        let generic: QVec = (0..self.ambient).map(|i| q((self.ambient - i) as i64)).collect();
        dot(r, &generic).is_positive()
    }

    /// `⟨e_i, e_j*⟩`, the identity matrix.
    pub fn pairing_matrix(&self) -> Vec<Vec<Rational>> {
        self.coroot_basis.iter().map(|e| self.dual_basis.iter().map(|f| dot(e, f)).collect()).collect()
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.pairing_matrix().iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if *x != if i == j { Rational::one() } else { Rational::zero() } {
                    return Err(Error::Precondition("coroot basis and dual basis are not dual".into()));
                }
            }
        }
        for (i, a) in self.simple_roots.iter().enumerate() {
            for (j, w) in self.fundamental_weights.iter().enumerate() {
                let expect = if i == j { Rational::one() } else { Rational::zero() };
                if dot(&Self::coroot(a), w) != expect {
                    return Err(Error::Precondition("fundamental weights are not dual to simple coroots".into()));
                }
            }
        }
        for r in &self.roots {
            let neg: QVec = r.iter().map(|x| -x.clone()).collect();
            if !self.roots.contains(&neg) {
                return Err(Error::Precondition("root system not closed under negation".into()));
            }
        }
        Ok(())
    }

    /// Coordinate vector in the cocharacter space of this datum.
    pub fn normalize_cocharacter(&self, mu: &[Rational]) -> Result<QVec> {
        if mu.len() != self.ambient {
            return Err(Error::DimensionMismatch(format!("cocharacter of length {} for rank {}", mu.len(), self.ambient)));
        }
        if self.kind == GroupKind::Sl && !mu.iter().cloned().sum::<Rational>().is_zero() {
            return Err(Error::Precondition("SL_n cocharacters have coordinate sum zero".into()));
        }
        Ok(mu.to_vec())
    }

    pub fn normalize_character(&self, chi: &[Rational]) -> Result<QVec> {
        if chi.len() != self.ambient {
            return Err(Error::DimensionMismatch(format!("character of length {} for rank {}", chi.len(), self.ambient)));
        }
        Ok(match self.kind {
            GroupKind::Gl => chi.to_vec(),
            GroupKind::Sl => project_sum_zero(chi),
        })
    }

    /// `χ_μ = Σ ⟨μ, e_i*⟩ e_i*`.
    pub fn dual_char_of_cochar(&self, mu: &[Rational]) -> QVec {
        let mut out = vec![Rational::zero(); self.ambient];
        for f in &self.dual_basis {
            let c = dot(mu, f);
            for (o, x) in out.iter_mut().zip(f) {
                *o += &c * x;
            }
        }
        out
    }

    /// `μ_χ = Σ ⟨e_i, χ⟩ e_i`.
    pub fn dual_cochar_of_char(&self, chi: &[Rational]) -> QVec {
        let mut out = vec![Rational::zero(); self.ambient];
        for e in &self.coroot_basis {
            let c = dot(e, chi);
            for (o, x) in out.iter_mut().zip(e) {
                *o += &c * x;
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let vs = |xs: &[QVec]| -> Value {
            Value::Array(xs.iter().map(|v| Value::Array(v.iter().map(rational_to_json).collect())).collect())
        };
        json!({
            "group": match self.kind { GroupKind::Gl => "GL", GroupKind::Sl => "SL" },
            "rank": self.rank(),
            "ambient": self.ambient,
            "simple_coroots": vs(&self.simple_roots.iter().map(|r| Self::coroot(r)).collect::<Vec<_>>()),
            "fundamental_weights": vs(&self.fundamental_weights),
            "roots": vs(&self.roots),
        })
    }

    /// Built-ins only: `{"group": "GL"|"SL", "ambient": n}` or `{"type": "A2", "group": ...}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = GroupKind::parse(v.get("group").and_then(Value::as_str).unwrap_or("SL"))?;
        let n = if let Some(n) = v.get("ambient").and_then(Value::as_u64) {
            n as usize
        } else if let Some(t) = v.get("type").and_then(Value::as_str) {
            let r: usize = t
                .strip_prefix('A')
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| Error::Parse(format!("unsupported root system {t}")))?;
            r + 1
        } else {
            return Err(Error::Parse("root datum needs \"ambient\" or \"type\"".into()));
        };
        if n == 0 {
            return Err(Error::Parse("rank must be positive".into()));
        }
        let rd = Self::of_kind(kind, n);
        if let Some(given) = v.get("fundamental_weights") {
            let given: Vec<QVec> = parse_vectors(given)?;
            if given != rd.fundamental_weights {
                return Err(Error::Parse("only the built-in type A data are supported".into()));
            }
        }
        Ok(rd)
    }
}

pub fn parse_vector(v: &Value) -> Result<QVec> {
    v.as_array().ok_or_else(|| Error::Parse("expected a list of rationals".into()))?.iter().map(rational_from_json).collect()
}

pub fn parse_vectors(v: &Value) -> Result<Vec<QVec>> {
    v.as_array().ok_or_else(|| Error::Parse("expected a list of vectors".into()))?.iter().map(parse_vector).collect()
}

/// `lcm` of the denominators.
pub fn common_denominator(v: &[Rational]) -> num_bigint::BigInt {
    use num_integer::Integer;
    v.iter().fold(num_bigint::BigInt::one(), |d, x| d.lcm(x.denom()))
}

/// Roots split by the sign of `⟨θ, r⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicFromWeight {
    pub theta: QVec,
    pub unipotent: Vec<QVec>,
    pub levi: Vec<QVec>,
    pub opposite: Vec<QVec>,
}

impl ParabolicFromWeight {
    /// Roots of `P_θ`: those with `⟨θ, r⟩ ≥ 0`.
    pub fn roots(&self) -> Vec<QVec> {
        self.unipotent.iter().chain(&self.levi).cloned().collect()
    }

    pub fn is_whole_group(&self) -> bool {
        self.unipotent.is_empty()
    }

    /// `P_θ ∩ P_{-θ}` has the Levi roots.
    pub fn negated(&self) -> Self {
        ParabolicFromWeight {
            theta: self.theta.iter().map(|x| -x.clone()).collect(),
            unipotent: self.opposite.clone(),
            levi: self.levi.clone(),
            opposite: self.unipotent.clone(),
        }
    }

    /// Matrix membership for `GL_n`/`SL_n`: entry `(i, j)` scales by `t^{θ_i − θ_j}`.
    pub fn contains<F: Scalar>(&self, g: &Matrix<F>) -> bool {
        in_weight_parabolic(&self.theta, g)
    }
}

pub fn in_weight_parabolic<F: Scalar>(theta: &[Rational], g: &Matrix<F>) -> bool {
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            if !g.get(i, j).is_zero() && theta[i] < theta[j] {
                return false;
            }
        }
    }
    true
}

pub fn parabolic_from_weight(rd: &RootDatum, theta: &[Rational]) -> Result<ParabolicFromWeight> {
    if theta.len() != rd.ambient {
        return Err(Error::DimensionMismatch(format!("weight of length {} for rank {}", theta.len(), rd.ambient)));
    }
    let mut p = ParabolicFromWeight { theta: theta.to_vec(), unipotent: vec![], levi: vec![], opposite: vec![] };
    for r in &rd.roots {
        let s = dot(theta, r);
        if s.is_positive() {
            p.unipotent.push(r.clone());
        } else if s.is_zero() {
            p.levi.push(r.clone());
        } else {
            p.opposite.push(r.clone());
        }
    }
    Ok(p)
}

/// Standard parabolics contain every positive root.
pub fn is_standard(rd: &RootDatum, p: &ParabolicFromWeight) -> bool {
    rd.roots.iter().filter(|r| rd.is_positive(r)).all(|r| !p.opposite.contains(r))
}

/// `χ = Σ c_α ω_α` over simple roots `α` outside the Levi with every `c_α ≤ 0`, some
/// `c_α < 0`, `c_α = 0` on the Levi, and `χ` trivial on the centre of `G`.
pub fn is_antidominant(rd: &RootDatum, chi: &[Rational], p: &ParabolicFromWeight) -> Result<bool> {
    if !is_standard(rd, p) {
        return Err(Error::Precondition("anti-dominance is tested against standard parabolics".into()));
    }
    if chi.len() != rd.ambient {
        return Err(Error::DimensionMismatch("character length".into()));
    }
    if rd.kind == GroupKind::Gl && !chi.iter().cloned().sum::<Rational>().is_zero() {
        return Ok(false);
    }
    let chi = rd.normalize_character(chi)?;
    let mut some_negative = false;
    for a in &rd.simple_roots {
        let c = dot(&RootDatum::coroot(a), &chi);
        if p.levi.contains(a) {
            if !c.is_zero() {
                return Ok(false);
            }
        } else if c.is_positive() {
            return Ok(false);
        } else if c.is_negative() {
            some_negative = true;
        }
    }
    Ok(some_negative)
}

/// Anti-dominant cone generators `−ω_α` for simple `α` outside the Levi, shifted to be
/// trivial on the centre of `GL_n`.
pub fn antidominant_generators(rd: &RootDatum, p: &ParabolicFromWeight) -> Vec<QVec> {
    rd.simple_roots
        .iter()
        .zip(&rd.fundamental_weights)
        .filter(|(a, _)| !p.levi.contains(a))
        .map(|(_, w)| project_sum_zero(w).into_iter().map(|x| -x).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceReport {
    /// `⟨μ, r⟩ ≥ 0` for every root of `P_μ`.
    pub nonnegative_on_parabolic: bool,
    /// `⟨α^∨, χ_μ⟩ ≥ 0` for the simple roots of the Borel adapted to `μ`.
    pub dominant: bool,
    /// `⟨α^∨, χ_μ⟩ = 0` for every Levi root, i.e. `χ_μ` extends to a character of `P_μ`.
    pub trivial_on_levi_roots: bool,
}

/// Dominance of `χ_μ` with respect to `P_μ`, after moving `μ` to the dominant chamber.
pub fn dominance_report(rd: &RootDatum, mu: &[Rational]) -> Result<DominanceReport> {
    let mu = rd.normalize_cocharacter(mu)?;
    let p = parabolic_from_weight(rd, &mu)?;
    let nonnegative_on_parabolic = p.roots().iter().all(|r| !dot(&mu, r).is_negative());
    let mut sorted = mu.clone();
    sorted.sort_by(|a, b| b.cmp(a));
    let chi = rd.dual_char_of_cochar(&sorted);
    let ps = parabolic_from_weight(rd, &sorted)?;
    let dominant = rd.simple_roots.iter().all(|a| !dot(&RootDatum::coroot(a), &chi).is_negative());
    let trivial_on_levi_roots = ps.levi.iter().all(|a| dot(&RootDatum::coroot(a), &chi).is_zero());
    Ok(DominanceReport { nonnegative_on_parabolic, dominant, trivial_on_levi_roots })
}

/// `θ_x` as a diagonal weight in the basis adapted to the flag at `x`: the weight of each
/// adapted basis vector. The flag is then the one stabilized by `P_{−θ_x}`.
pub fn weight_vectors<F: Scalar>(fls: &FilteredLocalSystem<F>) -> Vec<QVec> {
    fls.flags().iter().map(|f| f.vector_weights()).collect()
}

/// `⟨θ, χ⟩ = 0` for every character of `G` (only `det` for `GL_n`).
pub fn degree_zero_g(thetas: &[QVec], kind: GroupKind) -> bool {
    match kind {
        GroupKind::Sl => true,
        GroupKind::Gl => thetas.iter().flatten().cloned().sum::<Rational>().is_zero(),
    }
}

/// Witnesses `g_x = c_{x,1}` when `c_{x,1} c_{x,2} ∈ P_{−θ_x}` at every puncture.
pub fn g_quiver_membership<F: Scalar>(point: &QuiverPoint<F>, thetas: &[QVec]) -> Option<Vec<Matrix<F>>> {
    for ((i, o), th) in point.c_in().iter().zip(point.c_out()).zip(thetas) {
        let neg: QVec = th.iter().map(|x| -x.clone()).collect();
        if !in_weight_parabolic(&neg, &(i * o)) {
            return None;
        }
    }
    Some(point.c_in().to_vec())
}

/// `χ_{v_x} = χ_{−dθ_x}` as a coordinate vector per puncture, with `d` the common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GChi {
    pub d: i64,
    pub per_puncture: Vec<Vec<i64>>,
}

impl GChi {
    pub fn new(thetas: &[QVec]) -> Result<Self> {
        use num_traits::ToPrimitive;
        let all: QVec = thetas.iter().flatten().cloned().collect();
        let d = common_denominator(&all);
        let dq = Rational::from_integer(d.clone());
        let per_puncture = thetas
            .iter()
            .map(|t| {
                t.iter()
                    .map(|x| (-(x * &dq)).to_integer().to_i64().ok_or_else(|| Error::Precondition("weight too large".into())))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(GChi { d: d.to_i64().ok_or_else(|| Error::Precondition("denominator too large".into()))?, per_puncture })
    }

    pub fn is_trivial(&self) -> bool {
        self.per_puncture.iter().flatten().all(|e| *e == 0)
    }

    /// Value on a gauge element whose `v_x` components are block diagonal for the level
    /// sets of `θ_x` (contiguous in standard coordinates).
    pub fn evaluate<F: Scalar>(&self, g: &GaugeElement<F>) -> Result<F> {
        let mut acc = F::one();
        for (es, gx) in self.per_puncture.iter().zip(&g.gx) {
            let mut start = 0;
            while start < es.len() {
                let mut end = start + 1;
                while end < es.len() && es[end] == es[start] {
                    end += 1;
                }
                let det = gx.submatrix(start..end, start..end).determinant()?;
                acc = acc * det.pow_i(es[start]).ok_or_else(|| Error::Singular("Levi block".into()))?;
                start = end;
            }
        }
        Ok(acc)
    }

    /// `⟨μ, χ⟩` for a torus cocharacter `μ` placed at every vertex.
    pub fn pair_torus(&self, mu: &[i64]) -> i64 {
        self.per_puncture.iter().map(|es| es.iter().zip(mu).map(|(e, m)| e * m).sum::<i64>()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct RReport<F: Scalar> {
    pub verdict: StabilityVerdict<F>,
    pub parabolics_checked: usize,
    pub min_pairing: Option<Rational>,
    /// Verdict from 500 random anti-dominant cone elements agrees with the generator test.
    pub cone_samples_agree: bool,
    /// Pairings unchanged when `θ_x` is conjugated by random elements of the parabolic.
    pub conjugation_independent: bool,
}

/// `⟨θ_x, χ_j⟩` for `χ_j = det(V/F_j)^{r} det(F_j)^{−(n−r)}`, `r = dim F_j`, computed in a
/// basis adapted to both the flag at `x` and `F`, where both are diagonal.
fn generator_pairing<F: Scalar>(
    weights: &[Rational],
    lflag: &Flag<F>,
    chain: &Flag<F>,
    step: usize,
    kind: GroupKind,
) -> Result<Rational> {
    let n = chain.ambient() as i64;
    let r = chain.steps()[step].dim() as i64;
    let basis = common_adapted_basis(lflag, chain)?;
    let mut theta: QVec = basis.iter().map(|(i, _, _)| weights[*i].clone()).collect();
    if kind == GroupKind::Sl {
        theta = project_sum_zero(&theta);
    }
    Ok(basis
        .iter()
        .zip(&theta)
        .map(|((_, j, _), th)| th * q(if *j >= step { -(n - r) } else { r }))
        .sum())
}

/// R-stability through the stabilizers of invariant flags and their anti-dominant cone generators.
pub fn r_stability<F: Scalar>(
    fls: &FilteredLocalSystem<F>,
    kind: GroupKind,
    backend: Backend,
) -> Result<RReport<F>> {
    let n = fls.rank();
    if kind == GroupKind::Gl && !fls.degree().is_zero() {
        return Err(Error::Precondition(format!("⟨θ, det⟩ = {} is not zero", fls.degree())));
    }
    // θ-filtered: g_x ρ(c_x) g_x^{-1} ∈ P_{−θ_x} with g_x the inverse adapted basis
    for (f, c) in fls.flags().iter().zip(fls.rep().c()) {
        let g = f.flag().adapted_basis().inverse()?;
        let neg: QVec = f.vector_weights().into_iter().map(|x| -x).collect();
        if !in_weight_parabolic(&neg, &c.conjugate_by(&g)?) {
            return Err(Error::NotThetaFiltered("monodromy is not conjugate into P_{-θ_x}".into()));
        }
    }
    let lattice = fls.invariant_lattice(backend)?;
    let chains = lattice.proper_chains(crate::quiver::CHAIN_LIMIT);
    let mut coverage = lattice.coverage();
    if chains.len() >= crate::quiver::CHAIN_LIMIT {
        coverage = Coverage::Incomplete;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut min_pairing: Option<Rational> = None;
    let mut worst: Option<(Rational, Subspace<F>)> = None;
    let mut zero: Option<Subspace<F>> = None;
    let mut cone_samples_agree = true;
    let mut conjugation_independent = true;
    for chain in &chains {
        let flag = Flag::from_proper(n, chain.clone())?;
        let mut gens = Vec::new();
        for step in 1..flag.len() {
            let mut total = Rational::zero();
            for wf in fls.flags() {
                total += generator_pairing(wf.weights(), wf.flag(), &flag, step, kind)?;
            }
            gens.push(total);
        }
        let gen_ok = gens.iter().all(|g| !g.is_negative());
        let sample_ok = (0..500).all(|_| {
            let s: Rational = gens.iter().map(|g| g * q(rng.gen_range(0..8))).sum();
            !s.is_negative()
        });
        if gen_ok != sample_ok {
            cone_samples_agree = false;
        }
        if F::is_finite_field() || n <= 4 {
            let p = random_stabilizer(&flag, &mut rng);
            for step in 1..flag.len() {
                let mut a = Rational::zero();
                let mut b = Rational::zero();
                for wf in fls.flags() {
                    a += generator_pairing(wf.weights(), wf.flag(), &flag, step, kind)?;
                    b += generator_pairing(wf.weights(), &wf.flag().transport(&p)?, &flag, step, kind)?;
                }
                if a != b {
                    conjugation_independent = false;
                }
            }
        }
        for (k, g) in gens.iter().enumerate() {
            let step = flag.steps()[k + 1].clone();
            if min_pairing.as_ref().is_none_or(|m| g < m) {
                min_pairing = Some(g.clone());
            }
            if g.is_negative() {
                if worst.as_ref().is_none_or(|(w, _)| g < w) {
                    worst = Some((g.clone(), step));
                }
            } else if g.is_zero() && zero.is_none() {
                zero = Some(step);
            }
        }
    }
    let witness = |w: Subspace<F>| -> Result<Witness<F>> {
        Ok(Witness { degree: fls.sub_degree(&w)?, rank: w.dim(), subspace: w })
    };
    let verdict = if let Some((_, w)) = worst {
        StabilityVerdict { class: StabilityClass::Unstable, witness: Some(witness(w)?), coverage }
    } else {
        if coverage == Coverage::Incomplete {
            return Err(Error::IncompleteLattice("compatible parabolics could not all be enumerated".into()));
        }
        match zero {
            Some(w) => StabilityVerdict { class: StabilityClass::SemistableNotStable, witness: Some(witness(w)?), coverage },
            None => StabilityVerdict { class: StabilityClass::Stable, witness: None, coverage },
        }
    };
    Ok(RReport { verdict, parabolics_checked: chains.len(), min_pairing, cone_samples_agree, conjugation_independent })
}

/// Random invertible element of the stabilizer of `flag`.
fn random_stabilizer<F: Scalar>(flag: &Flag<F>, rng: &mut ChaCha8Rng) -> Matrix<F> {
    let n = flag.ambient();
    let b = flag.adapted_basis();
    let mut part = flag.partition();
    part.reverse();
    let mut starts = Vec::new();
    let mut s = 0;
    for l in &part {
        starts.push(s);
        s += l;
    }
    let block_of = |k: usize| starts.iter().rposition(|&st| st <= k).expect("covered");
    loop {
        let mut m = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if block_of(r) <= block_of(c) {
                    m.set(r, c, F::from_i64(rng.gen_range(-3..=3)));
                }
            }
        }
        if m.is_invertible() {
            let bi = b.inverse().expect("basis");
            return &(&b * &m) * &bi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::{slope_stability, WeightedFlag};
    use crate::quiver::{rep_to_point, ChiTheta};
    use crate::scalar::rational;
    use crate::surface::{SurfacePresentation, SurfaceRep};

    type Q = Rational;

    fn v(xs: &[(i64, i64)]) -> QVec {
        xs.iter().map(|&(a, b)| rational(a, b)).collect()
    }

    #[test]
    fn data_are_valid() {
        for n in 1..5 {
            RootDatum::gl(n).validate().unwrap();
            RootDatum::sl(n).validate().unwrap();
        }
        assert_eq!(RootDatum::sl(3).rank(), 2);
        assert_eq!(RootDatum::gl(3).rank(), 3);
        assert_eq!(RootDatum::sl(3).roots().len(), 6);
    }

    #[test]
    fn parabolic_examples() {
        let gl2 = RootDatum::gl(2);
        assert!(parabolic_from_weight(&gl2, &v(&[(0, 1), (0, 1)])).unwrap().is_whole_group());
        let p = parabolic_from_weight(&gl2, &v(&[(1, 3), (-1, 3)])).unwrap();
        assert_eq!(p.unipotent, vec![v(&[(1, 1), (-1, 1)])]);
        assert!(p.contains(&Matrix::<Q>::from_i64(&[[1, 7], [0, 2]])));
        assert!(!p.contains(&Matrix::<Q>::from_i64(&[[1, 0], [7, 2]])));
        let p2 = parabolic_from_weight(&gl2, &v(&[(2, 3), (-2, 3)])).unwrap();
        assert_eq!(p, ParabolicFromWeight { theta: p.theta.clone(), ..p2.clone() });
        assert_eq!(p.negated().negated(), p);
    }

    #[test]
    fn antidominance_examples() {
        let sl2 = RootDatum::sl(2);
        let borel = parabolic_from_weight(&sl2, &v(&[(1, 1), (-1, 1)])).unwrap();
        let w1 = sl2.fundamental_weights()[0].clone();
        let neg: QVec = w1.iter().map(|x| -x.clone()).collect();
        assert!(is_antidominant(&sl2, &neg, &borel).unwrap());
        assert!(!is_antidominant(&sl2, &w1, &borel).unwrap());
        let gens = antidominant_generators(&sl2, &borel);
        assert_eq!(gens.len(), 1);
    }

    #[test]
    fn duality_identity_and_the_levi_defect() {
        let sl3 = RootDatum::sl(3);
        let mu = v(&[(1, 1), (1, 1), (-2, 1)]);
        let chi_mu = sl3.dual_char_of_cochar(&mu);
        let a1 = sl3.simple_roots()[0].clone();
        assert_eq!(dot(&RootDatum::coroot(&a1), &chi_mu), rational(1, 1));
        let rep = dominance_report(&sl3, &mu).unwrap();
        assert!(rep.nonnegative_on_parabolic && rep.dominant && !rep.trivial_on_levi_roots);
        let chi = v(&[(2, 1), (0, 1), (-1, 1)]);
        let lhs = dot(&mu, &chi);
        let rhs = dot(&sl3.dual_cochar_of_char(&chi), &chi_mu);
        assert_eq!(lhs, rhs);
        let gl = RootDatum::gl(3);
        assert_eq!(gl.dual_char_of_cochar(&v(&[(1, 1), (0, 1), (0, 1)])), v(&[(1, 1), (0, 1), (0, 1)]));
    }

    #[test]
    fn degree_zero_examples() {
        let worked = vec![v(&[(-1, 3), (1, 3)]), v(&[(-1, 3), (1, 3)]), v(&[(0, 1), (0, 1)])];
        assert!(degree_zero_g(&worked, GroupKind::Gl));
        assert!(degree_zero_g(&[v(&[(1, 2), (1, 2)])], GroupKind::Sl));
        assert!(!degree_zero_g(&[v(&[(1, 2), (1, 2)])], GroupKind::Gl));
    }

    fn worked_fls() -> FilteredLocalSystem<Q> {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 3),
            2,
            vec![],
            vec![],
            vec![Matrix::from_i64(&[[1, 1], [0, 1]]), Matrix::from_i64(&[[1, -1], [0, 1]]), Matrix::identity(2)],
        )
        .unwrap();
        let wf = || WeightedFlag::standard(&[1, 1], vec![rational(1, 3), rational(-1, 3)]).unwrap();
        FilteredLocalSystem::new(rep, vec![wf(), wf(), WeightedFlag::trivial(2)]).unwrap()
    }

    #[test]
    fn worked_example_is_r_stable() {
        let f = worked_fls();
        let thetas = weight_vectors(&f);
        assert_eq!(thetas[0], v(&[(-1, 3), (1, 3)]));
        let r = r_stability(&f, GroupKind::Gl, Backend::Auto).unwrap();
        assert_eq!(r.verdict.class, StabilityClass::Stable);
        assert!(r.cone_samples_agree && r.conjugation_independent);
        assert_eq!(r_stability(&f, GroupKind::Sl, Backend::Auto).unwrap().verdict.class, StabilityClass::Stable);
        assert_eq!(slope_stability(&f, Backend::Auto).unwrap().class, StabilityClass::Stable);
        let point = rep_to_point(&f).unwrap();
        // the flag is upper triangular, so P_{-θ} is the upper Borel
        assert!(g_quiver_membership(&point, &thetas).is_some());
        let borel = parabolic_from_weight(&RootDatum::gl(2), &v(&[(1, 3), (-1, 3)])).unwrap();
        assert!(borel.contains(&point.c_out()[0]));
    }

    #[test]
    fn g_chi_matches_quiver_chi() {
        let f = worked_fls();
        let thetas = weight_vectors(&f);
        let g = GChi::new(&thetas).unwrap();
        assert_eq!(g.d, 3);
        assert_eq!(g.per_puncture[0], vec![1, -1]);
        let chi = ChiTheta::of_fls(&f).unwrap();
        let elem = GaugeElement {
            g0: Matrix::identity(2),
            gx: vec![
                Matrix::diagonal(&[rational(2, 1), rational(3, 1)]),
                Matrix::diagonal(&[rational(5, 1), rational(1, 7)]),
                Matrix::from_i64(&[[1, 2], [3, 4]]),
            ],
        };
        assert_eq!(g.evaluate(&elem).unwrap(), chi.evaluate(&elem).unwrap());
        // ⟨μ, χ⟩ = −d Σ_x ⟨θ_x, χ_μ⟩ for a torus cocharacter
        let mu = [4i64, -1];
        let chi_mu = RootDatum::gl(2).dual_char_of_cochar(&[rational(4, 1), rational(-1, 1)]);
        let rhs: Rational = thetas.iter().map(|t| dot(t, &chi_mu)).sum::<Rational>() * rational(-3, 1);
        assert_eq!(rational(g.pair_torus(&mu), 1), rhs);
        assert!(GChi::new(&[v(&[(0, 1), (0, 1)])]).unwrap().is_trivial());
    }

    #[test]
    fn trivial_weights_irreducible_is_stable() {
        // irreducible over Q: rotation by 90 degrees at x1, its inverse at x2
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 2),
            2,
            vec![],
            vec![],
            vec![Matrix::<Q>::from_i64(&[[0, -1], [1, 0]]), Matrix::from_i64(&[[0, 1], [-1, 0]])],
        )
        .unwrap();
        let f = FilteredLocalSystem::with_trivial_weights(rep);
        let r = r_stability(&f, GroupKind::Sl, Backend::Auto).unwrap();
        assert_eq!(r.verdict.class, StabilityClass::Stable);
        assert_eq!(r.parabolics_checked, 0);
    }
}
