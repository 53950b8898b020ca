//! Filtered local systems: a surface-group representation with a weighted flag
//! at every puncture, preserved by the local monodromy.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::canonical::rational_canonical_form;
use crate::error::{Error, Result};
use crate::flags::Flag;
use crate::invariant::{enumerate_invariant_subspaces, Backend, Coverage, InvariantLattice};
use crate::iso::isomorphism;
use crate::matrix::Matrix;
use crate::scalar::{rational_from_json, rational_to_json, Rational, Scalar};
use crate::subspace::Subspace;
use crate::surface::SurfaceRep;

/// A flag with one rational weight per piece, top piece first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedFlag<F: Scalar> {
    flag: Flag<F>,
    weights: Vec<Rational>,
}

impl<F: Scalar> WeightedFlag<F> {
    pub fn new(flag: Flag<F>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != flag.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a flag with {} pieces",
                weights.len(),
                flag.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if weights[..i].contains(w) {
                return Err(Error::Precondition(format!("repeated weight {w} on one flag")));
            }
        }
        Ok(WeightedFlag { flag, weights })
    }

    /// `V ⊋ 0` with weight zero.
    pub fn trivial(n: usize) -> Self {
        WeightedFlag { flag: Flag::trivial(n), weights: vec![Rational::zero()] }
    }

    pub fn standard(partition: &[usize], weights: Vec<Rational>) -> Result<Self> {
        WeightedFlag::new(Flag::standard(partition)?, weights)
    }

    pub fn flag(&self) -> &Flag<F> {
        &self.flag
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn partition(&self) -> Vec<usize> {
        self.flag.partition()
    }

    pub fn ambient(&self) -> usize {
        self.flag.ambient()
    }

    /// `Σ_i θ_i λ_i`.
    pub fn degree(&self) -> Rational {
        self.weights
            .iter()
            .zip(self.partition())
            .map(|(w, l)| w * Rational::from_integer(l.into()))
            .sum()
    }

    /// Weight of the basis vectors of `adapted_basis()`, deepest piece first.
    pub fn vector_weights(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.ambient());
        for (w, l) in self.weights.iter().zip(self.partition()).rev() {
            out.extend(std::iter::repeat_n(w.clone(), l));
        }
        out
    }

    pub fn transport(&self, g: &Matrix<F>) -> Result<Self> {
        Ok(WeightedFlag { flag: self.flag.transport(g)?, weights: self.weights.clone() })
    }

    /// Flag `{W ∩ L_i}` on an invariant `w`, in the echelon coordinates of `w`. A step
    /// `S` gets `θ_i` for the largest `i` with `S ⊆ L_i`.
    pub fn induced_sub(&self, w: &Subspace<F>) -> Result<Self> {
        let cuts: Vec<Subspace<F>> =
            self.flag.steps().iter().map(|s| w.intersection(s)).collect::<Result<_>>()?;
        let mut steps = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.flag.len() {
            if cuts[i] != cuts[i + 1] {
                steps.push(w.relative(&cuts[i])?);
                weights.push(self.weights[i].clone());
            }
        }
        steps.push(Subspace::zero(w.dim()));
        WeightedFlag::new(Flag::new(steps)?, weights)
    }

    /// Flag `{(L_i + W)/W}` on the quotient, in complement-index coordinates of `w`.
    /// A step `S` gets `θ_i` for the largest `i` with `(L_i + W)/W = S`.
    pub fn induced_quotient(&self, w: &Subspace<F>) -> Result<Self> {
        let images: Vec<Subspace<F>> = self.flag.steps().iter().map(|s| s.quotient_by(w)).collect();
        let mut steps = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.flag.len() {
            if images[i] != images[i + 1] {
                steps.push(images[i].clone());
                weights.push(self.weights[i].clone());
            }
        }
        steps.push(Subspace::zero(w.ambient() - w.dim()));
        WeightedFlag::new(Flag::new(steps)?, weights)
    }

    pub fn to_json(&self) -> Value {
        let full = self.flag.steps();
        json!({
            "steps": full[1..full.len() - 1].iter().map(Subspace::to_json).collect::<Vec<_>>(),
            "weights": self.weights.iter().map(rational_to_json).collect::<Vec<_>>(),
        })
    }

    /// Accepts `{"steps": [...], "weights": [...]}` or `{"partition": [...], "weights": [...]}`
    /// for a standard flag. Weights list top piece first.
    pub fn from_json(v: &Value, n: usize) -> Result<Self> {
        let weights: Vec<Rational> = v
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("weighted flag lacks \"weights\"".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<_>>()?;
        let flag = if let Some(steps) = v.get("steps").and_then(Value::as_array) {
            Flag::from_step_values(n, steps)?
        } else if let Some(p) = v.get("partition").and_then(Value::as_array) {
            let part: Vec<usize> = p
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse("bad partition".into())))
                .collect::<Result<_>>()?;
            if part.iter().sum::<usize>() != n {
                return Err(Error::Parse(format!("partition {part:?} does not sum to {n}")));
            }
            Flag::standard(&part).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            return Err(Error::Parse("weighted flag needs \"steps\" or \"partition\"".into()));
        };
        WeightedFlag::new(flag, weights).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FilteredLocalSystem<F: Scalar> {
    rep: SurfaceRep<F>,
    flags: Vec<WeightedFlag<F>>,
}

impl<F: Scalar> FilteredLocalSystem<F> {
    /// Flags are given in puncture order; each must be stabilized by its `ρ(c_x)`.
    pub fn new(rep: SurfaceRep<F>, flags: Vec<WeightedFlag<F>>) -> Result<Self> {
        if flags.len() != rep.punctures().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} flags for {} punctures",
                flags.len(),
                rep.punctures().len()
            )));
        }
        for ((label, c), f) in rep.punctures().iter().zip(rep.c()).zip(&flags) {
            if f.ambient() != rep.rank() {
                return Err(Error::DimensionMismatch(format!("flag at {label} has the wrong ambient")));
            }
            for s in f.flag().steps() {
                if let Some(v) = s.invariance_witness(c) {
                    return Err(Error::NotInvariant {
                        generator: format!("c_{label}"),
                        vector: v.iter().map(|x| x.to_string()).collect(),
                    });
                }
            }
        }
        Ok(FilteredLocalSystem { rep, flags })
    }

    /// Trivial flags with weight zero everywhere.
    pub fn with_trivial_weights(rep: SurfaceRep<F>) -> Self {
        let flags = vec![WeightedFlag::trivial(rep.rank()); rep.punctures().len()];
        FilteredLocalSystem { rep, flags }
    }

    pub fn rep(&self) -> &SurfaceRep<F> {
        &self.rep
    }

    pub fn flags(&self) -> &[WeightedFlag<F>] {
        &self.flags
    }

    pub fn flag_at(&self, label: &str) -> Option<&WeightedFlag<F>> {
        self.rep.presentation().puncture_index(label).map(|i| &self.flags[i])
    }

    pub fn rank(&self) -> usize {
        self.rep.rank()
    }

    /// Multiset of flag types, in puncture order.
    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.flags.iter().map(WeightedFlag::partition).collect()
    }

    pub fn degree(&self) -> Rational {
        self.flags.iter().map(WeightedFlag::degree).sum()
    }

    pub fn slope(&self) -> Result<Rational> {
        if self.rank() == 0 {
            return Err(Error::Precondition("slope of a rank-zero system".into()));
        }
        Ok(self.degree() / Rational::from_integer(self.rank().into()))
    }

    /// Degree of the induced sub-system on `w` by the intersection-dimension sum
    /// `Σ θ_i dim(W ∩ L_i / W ∩ L_{i+1})`.
    pub fn sub_degree(&self, w: &Subspace<F>) -> Result<Rational> {
        let mut total = Rational::zero();
        for f in &self.flags {
            let dims: Vec<usize> = f
                .flag()
                .steps()
                .iter()
                .map(|s| w.intersection(s).map(|x| x.dim()))
                .collect::<Result<_>>()?;
            for (i, th) in f.weights().iter().enumerate() {
                total += th * Rational::from_integer((dims[i] - dims[i + 1]).into());
            }
        }
        Ok(total)
    }

    pub fn induced_sub(&self, w: &Subspace<F>) -> Result<Self> {
        let rep = self.rep.restrict(w)?;
        let flags = self.flags.iter().map(|f| f.induced_sub(w)).collect::<Result<_>>()?;
        Ok(FilteredLocalSystem { rep, flags })
    }

    pub fn induced_quotient(&self, w: &Subspace<F>) -> Result<Self> {
        let rep = self.rep.quotient(w)?;
        let flags = self.flags.iter().map(|f| f.induced_quotient(w)).collect::<Result<_>>()?;
        Ok(FilteredLocalSystem { rep, flags })
    }

    /// `(W_1 / W_0)` for invariant `W_0 ⊆ W_1`.
    pub fn subquotient(&self, outer: &Subspace<F>, inner: &Subspace<F>) -> Result<Self> {
        let sub = self.induced_sub(outer)?;
        sub.induced_quotient(&outer.relative(inner)?)
    }

    /// Isomorphic copy: `g ρ g^{-1}` with flags moved by `g`.
    pub fn conjugate(&self, g: &Matrix<F>) -> Result<Self> {
        let rep = self.rep.conjugate(g)?;
        let flags = self.flags.iter().map(|f| f.transport(g)).collect::<Result<_>>()?;
        Ok(FilteredLocalSystem { rep, flags })
    }

    /// Invariant subspaces; flag steps steer representative choice in infinite families.
    pub fn invariant_lattice(&self, backend: Backend) -> Result<InvariantLattice<F>> {
        let markers: Vec<Subspace<F>> =
            self.flags.iter().flat_map(|f| f.flag().proper_steps().iter().cloned()).collect();
        enumerate_invariant_subspaces(self.rank(), &self.rep.generators(), backend, &markers)
    }

    /// Direct sum with `other` in the later coordinates; each step is the sum of the
    /// steps of the summands that carry weights at or below it.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let rep = self.rep.direct_sum(&other.rep)?;
        let n1 = self.rank();
        let n = rep.rank();
        let mut flags = Vec::new();
        for (f1, f2) in self.flags.iter().zip(&other.flags) {
            let (steps, weights) = sum_flag(f1, f2, n1, n)?;
            flags.push(WeightedFlag::new(Flag::new(steps)?, weights)?);
        }
        FilteredLocalSystem::new(rep, flags)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.rep.to_json();
        let mut flags = Map::new();
        for (label, f) in self.rep.punctures().iter().zip(&self.flags) {
            flags.insert(label.clone(), f.to_json());
        }
        v["flags"] = Value::Object(flags);
        v
    }

    /// Representation JSON plus `"flags"`; punctures without a flag get the trivial one.
    pub fn from_json(v: &Value) -> Result<Self> {
        let rep = SurfaceRep::from_json(v)?;
        let empty = Map::new();
        let given = match v.get("flags") {
            None => &empty,
            Some(f) => f.as_object().ok_or_else(|| Error::Parse("\"flags\" must be an object".into()))?,
        };
        for k in given.keys() {
            if rep.presentation().puncture_index(k).is_none() {
                return Err(Error::Parse(format!("flag for unknown puncture {k}")));
            }
        }
        let flags = rep
            .punctures()
            .iter()
            .map(|x| match given.get(x) {
                Some(f) => WeightedFlag::from_json(f, rep.rank()),
                None => Ok(WeightedFlag::trivial(rep.rank())),
            })
            .collect::<Result<Vec<_>>>()?;
        FilteredLocalSystem::new(rep, flags).map_err(|e| match e {
            Error::NotInvariant { .. } => Error::Precondition(format!("flag not preserved by monodromy: {e}")),
            e => e,
        })
    }
}

/// Sum of two weighted flags on `k^{n1} ⊕ k^{n-n1}`: the step for weight `w` is the
/// sum of the steps carrying weights that sit at or below `w` in the merged order.
/// Only defined when the two weight orders are compatible.
fn sum_flag<F: Scalar>(
    f1: &WeightedFlag<F>,
    f2: &WeightedFlag<F>,
    n1: usize,
    n: usize,
) -> Result<(Vec<Subspace<F>>, Vec<Rational>)> {
    // merge the two top-first weight sequences, keeping each one's order
    let (w1, w2) = (f1.weights(), f2.weights());
    let mut merged: Vec<Rational> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < w1.len() || j < w2.len() {
        let take_first = match (w1.get(i), w2.get(j)) {
            (Some(a), Some(b)) if a == b => {
                merged.push(a.clone());
                i += 1;
                j += 1;
                continue;
            }
            (Some(a), Some(b)) => {
                if w2[j..].contains(a) {
                    false
                } else if w1[i..].contains(b) {
                    true
                } else {
                    a < b
                }
            }
            (Some(_), None) => true,
            _ => false,
        };
        if take_first {
            merged.push(w1[i].clone());
            i += 1;
        } else {
            merged.push(w2[j].clone());
            j += 1;
        }
    }
    let pos1: Vec<usize> = w1.iter().map(|w| merged.iter().position(|m| m == w).expect("merged")).collect();
    let pos2: Vec<usize> = w2.iter().map(|w| merged.iter().position(|m| m == w).expect("merged")).collect();
    if pos1.windows(2).any(|p| p[0] >= p[1]) || pos2.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Precondition("weight orders of the summands are incompatible".into()));
    }
    let step_at = |f: &WeightedFlag<F>, pos: &[usize], k: usize| -> usize {
        // index of the first step of `f` whose weight position is ≥ k
        pos.iter().position(|&p| p >= k).unwrap_or(f.flag().len())
    };
    let mut steps = Vec::new();
    for k in 0..merged.len() {
        let a = &f1.flag().steps()[step_at(f1, &pos1, k)];
        let b = &f2.flag().steps()[step_at(f2, &pos2, k)];
        let mut vecs: Vec<Vec<F>> = a
            .basis_vectors()
            .into_iter()
            .map(|mut v| {
                v.resize(n, F::zero());
                v
            })
            .collect();
        for v in b.basis_vectors() {
            let mut x = vec![F::zero(); n1];
            x.extend(v);
            vecs.push(x);
        }
        steps.push(Subspace::span(n, &vecs));
    }
    steps.push(Subspace::zero(n));
    Ok((steps, merged))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Stable,
    SemistableNotStable,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::SemistableNotStable => "semistable-not-stable",
            StabilityClass::Unstable => "unstable",
        }
    }

    pub fn is_semistable(&self) -> bool {
        *self != StabilityClass::Unstable
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<F: Scalar> {
    pub subspace: Subspace<F>,
    pub degree: Rational,
    pub rank: usize,
}

impl<F: Scalar> Witness<F> {
    pub fn to_json(&self) -> Value {
        json!({
            "subspace": self.subspace.to_json(),
            "degree": rational_to_json(&self.degree),
            "rank": self.rank,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityVerdict<F: Scalar> {
    pub class: StabilityClass,
    pub witness: Option<Witness<F>>,
    pub coverage: Coverage,
}

impl<F: Scalar> StabilityVerdict<F> {
    pub fn to_json(&self) -> Value {
        json!({
            "class": self.class.as_str(),
            "witness": self.witness.as_ref().map(Witness::to_json),
            "certificate": if self.coverage == Coverage::Incomplete { "incomplete" } else { "complete" },
            "coverage": self.coverage.as_str(),
        })
    }
}

/// Slope comparison over all proper invariant subspaces. The unstable witness has
/// maximal slope, then minimal rank; ties go to the canonical echelon order.
pub fn slope_stability<F: Scalar>(fls: &FilteredLocalSystem<F>, backend: Backend) -> Result<StabilityVerdict<F>> {
    let mu = fls.slope()?;
    let lattice = fls.invariant_lattice(backend)?;
    let mut worst: Option<(Rational, Witness<F>)> = None;
    let mut equal: Option<Witness<F>> = None;
    for w in lattice.proper() {
        let d = fls.sub_degree(w)?;
        let s = &d / Rational::from_integer(w.dim().into());
        let witness = || Witness { subspace: w.clone(), degree: d.clone(), rank: w.dim() };
        match s.cmp(&mu) {
            Ordering::Greater => {
                if worst.as_ref().is_none_or(|(best, _)| s > *best) {
                    worst = Some((s.clone(), witness()));
                }
            }
            Ordering::Equal => {
                if equal.is_none() {
                    equal = Some(witness());
                }
            }
            Ordering::Less => {}
        }
    }
    finish_verdict(&lattice, worst.map(|(_, w)| w), equal)
}

/// Sign-only test for degree-zero systems: stable iff every proper invariant
/// sub-system has negative degree, semistable iff none has positive degree.
pub fn degree_zero_stability<F: Scalar>(
    fls: &FilteredLocalSystem<F>,
    backend: Backend,
) -> Result<StabilityVerdict<F>> {
    if !fls.degree().is_zero() {
        return Err(Error::Precondition(format!("total degree is {}, not zero", fls.degree())));
    }
    let lattice = fls.invariant_lattice(backend)?;
    let mut worst: Option<Witness<F>> = None;
    let mut equal: Option<Witness<F>> = None;
    for w in lattice.proper() {
        let d = fls.sub_degree(w)?;
        if d.is_positive() {
            if worst.as_ref().is_none_or(|b| {
                // compare slopes d/r against the best so far
                &d * Rational::from_integer(b.rank.into()) > &b.degree * Rational::from_integer(w.dim().into())
            }) {
                worst = Some(Witness { subspace: w.clone(), degree: d, rank: w.dim() });
            }
        } else if d.is_zero() && equal.is_none() {
            equal = Some(Witness { subspace: w.clone(), degree: d, rank: w.dim() });
        }
    }
    finish_verdict(&lattice, worst, equal)
}

fn finish_verdict<F: Scalar>(
    lattice: &InvariantLattice<F>,
    worst: Option<Witness<F>>,
    equal: Option<Witness<F>>,
) -> Result<StabilityVerdict<F>> {
    let coverage = lattice.coverage();
    if let Some(w) = worst {
        // a genuine destabilizing subspace settles the question without completeness
        return Ok(StabilityVerdict { class: StabilityClass::Unstable, witness: Some(w), coverage });
    }
    lattice.require_complete()?;
    Ok(match equal {
        Some(w) => StabilityVerdict { class: StabilityClass::SemistableNotStable, witness: Some(w), coverage },
        None => StabilityVerdict { class: StabilityClass::Stable, witness: None, coverage },
    })
}

/// Invariant data of a stable factor used to order `gr`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorCertificate<F: Scalar> {
    pub rank: usize,
    pub partitions: Vec<Vec<usize>>,
    pub weights: Vec<Vec<Rational>>,
    pub canonical_forms: Vec<Matrix<F>>,
}

impl<F: Scalar> FactorCertificate<F> {
    pub fn of(fls: &FilteredLocalSystem<F>) -> Result<Self> {
        Ok(FactorCertificate {
            rank: fls.rank(),
            partitions: fls.partitions(),
            weights: fls.flags().iter().map(|f| f.weights().to_vec()).collect(),
            canonical_forms: fls.rep().generators().iter().map(rational_canonical_form).collect::<Result<_>>()?,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "partitions": self.partitions,
            "weights": self.weights.iter()
                .map(|ws| ws.iter().map(rational_to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "canonical_forms": self.canonical_forms.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct JordanHolder<F: Scalar> {
    /// `0 = W_0 ⊊ W_1 ⊊ ... ⊊ W_k = V`.
    pub filtration: Vec<Subspace<F>>,
    /// `W_j / W_{j-1}` for `j = 1..k`, in filtration order.
    pub factors: Vec<FilteredLocalSystem<F>>,
    /// Factors sorted by certificate.
    pub gr: Vec<(FactorCertificate<F>, FilteredLocalSystem<F>)>,
}

impl<F: Scalar> JordanHolder<F> {
    pub fn to_json(&self) -> Value {
        json!({
            "filtration": self.filtration.iter().map(Subspace::to_json).collect::<Vec<_>>(),
            "factors": self.factors.iter().map(FilteredLocalSystem::to_json).collect::<Vec<_>>(),
            "gr": self.gr.iter().map(|(c, _)| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Jordan–Hölder filtration of a degree-zero semistable system, built from the
/// smallest degree-zero invariant subspace at every stage.
pub fn jordan_holder<F: Scalar>(fls: &FilteredLocalSystem<F>, backend: Backend) -> Result<JordanHolder<F>> {
    let verdict = degree_zero_stability(fls, backend)?;
    if !verdict.class.is_semistable() {
        return Err(Error::Precondition("Jordan–Hölder filtration of an unstable system".into()));
    }
    let n = fls.rank();
    let mut filtration = vec![Subspace::zero(n)];
    let mut factors = Vec::new();
    // current quotient and the subspace of V it is taken by
    let mut below = Subspace::zero(n);
    let mut current = fls.clone();
    loop {
        let step = smallest_degree_zero_sub(&current, backend)?;
        let piece = match &step {
            Some(w) => w.clone(),
            None => Subspace::full(current.rank()),
        };
        factors.push(current.induced_sub(&piece)?);
        let lifted = Subspace::lift_from_quotient(&below, &piece);
        filtration.push(lifted.clone());
        if step.is_none() {
            break;
        }
        current = fls.induced_quotient(&lifted)?;
        below = lifted;
    }
    let mut gr: Vec<(FactorCertificate<F>, FilteredLocalSystem<F>)> =
        factors.iter().map(|f| Ok((FactorCertificate::of(f)?, f.clone()))).collect::<Result<_>>()?;
    gr.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(JordanHolder { filtration, factors, gr })
}

fn smallest_degree_zero_sub<F: Scalar>(
    fls: &FilteredLocalSystem<F>,
    backend: Backend,
) -> Result<Option<Subspace<F>>> {
    let lattice = fls.invariant_lattice(backend)?;
    lattice.require_complete()?;
    for w in lattice.proper() {
        if fls.sub_degree(w)?.is_zero() {
            return Ok(Some(w.clone()));
        }
    }
    Ok(None)
}

/// Isomorphism of the associated graded objects.
pub fn s_equivalent<F: Scalar>(
    f1: &FilteredLocalSystem<F>,
    f2: &FilteredLocalSystem<F>,
    backend: Backend,
) -> Result<bool> {
    if f1.rank() != f2.rank() || f1.rep().presentation() != f2.rep().presentation() {
        return Err(Error::Precondition("S-equivalence of systems of different shape".into()));
    }
    let g1 = jordan_holder(f1, backend)?.gr;
    let g2 = jordan_holder(f2, backend)?.gr;
    gr_match(&g1, &g2)
}

/// Perfect matching of factors under isomorphism.
pub fn gr_match<F: Scalar>(
    g1: &[(FactorCertificate<F>, FilteredLocalSystem<F>)],
    g2: &[(FactorCertificate<F>, FilteredLocalSystem<F>)],
) -> Result<bool> {
    if g1.len() != g2.len() {
        return Ok(false);
    }
    let mut used = vec![false; g2.len()];
    for (c1, a) in g1 {
        let mut found = false;
        for (j, (c2, b)) in g2.iter().enumerate() {
            if used[j] || c1 != c2 {
                continue;
            }
            if isomorphism(a, b)?.is_some() {
                used[j] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Fp};
    use crate::surface::SurfacePresentation;

    type Q = Rational;
    type F5 = Fp<5>;

    fn third(s: i64) -> Rational {
        rational(s, 3)
    }

    fn worked_fls() -> FilteredLocalSystem<Q> {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 3),
            2,
            vec![],
            vec![],
            vec![
                Matrix::from_i64(&[[1, 1], [0, 1]]),
                Matrix::from_i64(&[[1, -1], [0, 1]]),
                Matrix::identity(2),
            ],
        )
        .unwrap();
        let full = || WeightedFlag::standard(&[1, 1], vec![third(1), third(-1)]).unwrap();
        FilteredLocalSystem::new(rep, vec![full(), full(), WeightedFlag::trivial(2)]).unwrap()
    }

    #[test]
    fn worked_example() {
        let f = worked_fls();
        assert_eq!(f.degree(), Rational::zero());
        let line = Subspace::coordinate(2, [0]);
        assert_eq!(f.sub_degree(&line).unwrap(), third(-2));
        let sub = f.induced_sub(&line).unwrap();
        assert_eq!(sub.degree(), third(-2));
        assert_eq!(sub.flags()[0].weights(), &[third(-1)]);
        assert_eq!(sub.flags()[2].weights(), &[Rational::zero()]);
        let v = slope_stability(&f, Backend::Auto).unwrap();
        assert_eq!(v.class, StabilityClass::Stable);
        assert_eq!(degree_zero_stability(&f, Backend::Auto).unwrap().class, StabilityClass::Stable);
        let lattice = f.invariant_lattice(Backend::Auto).unwrap();
        assert_eq!(lattice.proper().collect::<Vec<_>>(), vec![&line]);
    }

    #[test]
    fn degree_examples() {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 1),
            2,
            vec![],
            vec![],
            vec![Matrix::<Q>::identity(2)],
        )
        .unwrap();
        let wf = WeightedFlag::standard(&[1, 1], vec![rational(2, 5), rational(-1, 7)]).unwrap();
        let f = FilteredLocalSystem::new(rep.clone(), vec![wf]).unwrap();
        assert_eq!(f.degree(), rational(9, 35));
        let triv = FilteredLocalSystem::with_trivial_weights(rep);
        assert!(triv.degree().is_zero());
        let v = slope_stability(&triv, Backend::Auto).unwrap();
        assert_eq!(v.class, StabilityClass::SemistableNotStable);
        assert_eq!(v.witness.unwrap().rank, 1);
        assert_eq!(
            degree_zero_stability(&triv, Backend::Auto).unwrap().class,
            StabilityClass::SemistableNotStable
        );
    }

    #[test]
    fn repeated_weights_rejected() {
        assert!(WeightedFlag::<Q>::standard(&[1, 1], vec![third(1), third(1)]).is_err());
    }

    #[test]
    fn incompatible_flag_rejected() {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 2),
            2,
            vec![],
            vec![],
            vec![Matrix::<Q>::from_i64(&[[1, 0], [1, 1]]), Matrix::from_i64(&[[1, 0], [-1, 1]])],
        )
        .unwrap();
        let wf = || WeightedFlag::standard(&[1, 1], vec![third(1), third(-1)]).unwrap();
        assert!(matches!(FilteredLocalSystem::new(rep, vec![wf(), wf()]), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn sub_plus_quotient_is_total() {
        let f = worked_fls();
        let line = Subspace::coordinate(2, [0]);
        let s = f.induced_sub(&line).unwrap();
        let q = f.induced_quotient(&line).unwrap();
        assert_eq!(s.degree() + q.degree(), f.degree());
        assert_eq!(q.degree(), third(2));
    }

    fn split_pair() -> (FilteredLocalSystem<F5>, FilteredLocalSystem<F5>) {
        // ρ(c) = diag(2, 3) at x1 and its inverse at x2; weights make both lines degree 0
        let pres = SurfacePresentation::with_labels(0, 2);
        let d = Matrix::diagonal(&[F5::new(2), F5::new(3)]);
        let rep = SurfaceRep::new(pres, 2, vec![], vec![], vec![d.clone(), d.inverse().unwrap()]).unwrap();
        let wf = |a: i64| WeightedFlag::standard(&[1, 1], vec![third(a), third(-a)]).unwrap();
        let f = FilteredLocalSystem::new(rep.clone(), vec![wf(1), wf(-1)]).unwrap();
        let swap = Matrix::from_i64(&[[0, 1], [1, 0]]);
        let g = f.conjugate(&swap).unwrap();
        (f, g)
    }

    #[test]
    fn jordan_holder_of_split_system() {
        let (f, g) = split_pair();
        assert_eq!(slope_stability(&f, Backend::Auto).unwrap().class, StabilityClass::SemistableNotStable);
        let jh = jordan_holder(&f, Backend::Auto).unwrap();
        assert_eq!(jh.factors.len(), 2);
        assert!(jh.factors.iter().all(|x| x.degree().is_zero()));
        assert!(s_equivalent(&f, &g, Backend::Auto).unwrap());
    }

    #[test]
    fn stable_system_is_its_own_gr() {
        let f = worked_fls();
        let jh = jordan_holder(&f, Backend::Auto).unwrap();
        assert_eq!(jh.factors.len(), 1);
        assert_eq!(jh.factors[0], f);
    }

    #[test]
    fn direct_sum_flags() {
        let (f, _) = split_pair();
        let s = f.direct_sum(&f).unwrap();
        assert_eq!(s.rank(), 4);
        assert!(s.degree().is_zero());
        assert_eq!(s.flags()[0].partition(), vec![2, 2]);
    }

    #[test]
    fn json_round_trip() {
        let f = worked_fls();
        let back = FilteredLocalSystem::<Q>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }
}
