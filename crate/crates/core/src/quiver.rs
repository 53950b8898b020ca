//! Quivers with relations and the punctured-surface quiver `Q^D`.
//!
//! `Q^D` has a central vertex `v0` carrying loops `a_i, b_i` and, for each puncture
//! `x`, a vertex `v_x` with arrows `c_{x,1}: v0 → v_x` (`c_x_in`) and
//! `c_{x,2}: v_x → v0` (`c_x_out`). Points of type `[P]` assign invertible matrices
//! to arrows subject to `∏[a_i,b_i] ∏ c_{x,2} c_{x,1} = 1` and
//! `c_{x,1} c_{x,2} ∈ P_x`, where `P_x` is the standard parabolic of the partition at `x`.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::filtered::{FilteredLocalSystem, StabilityClass, StabilityVerdict, WeightedFlag, Witness};
use crate::flags::{arrow_limit, block_ranges, in_standard_levi, in_standard_parabolic, Flag, GradedCocharacter};
use crate::invariant::{Backend, Coverage};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::subspace::Subspace;
use crate::surface::{relation_product, SurfacePresentation, SurfaceRep};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

/// Finite connected directed graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<Arrow>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Precondition("quiver without vertices".into()));
        }
        if arrows.iter().any(|a| a.source >= vertices.len() || a.target >= vertices.len()) {
            return Err(Error::Precondition("arrow endpoint out of range".into()));
        }
        // connectivity of the underlying undirected graph
        let mut seen = vec![false; vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for a in &arrows {
                for (p, q) in [(a.source, a.target), (a.target, a.source)] {
                    if p == v && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if seen.contains(&false) {
            return Err(Error::Precondition("quiver is not connected".into()));
        }
        Ok(Quiver { vertices, arrows })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedQuiver {
    presentation: SurfacePresentation,
    quiver: Quiver,
}

impl PuncturedQuiver {
    pub fn build(presentation: SurfacePresentation) -> Self {
        let mut vertices = vec!["v0".to_string()];
        let mut arrows = Vec::new();
        for i in 1..=presentation.genus() {
            arrows.push(Arrow { name: format!("a{i}"), source: 0, target: 0 });
        }
        for i in 1..=presentation.genus() {
            arrows.push(Arrow { name: format!("b{i}"), source: 0, target: 0 });
        }
        for (k, x) in presentation.punctures().iter().enumerate() {
            vertices.push(format!("v_{x}"));
            arrows.push(Arrow { name: format!("c_{x}_in"), source: 0, target: k + 1 });
            arrows.push(Arrow { name: format!("c_{x}_out"), source: k + 1, target: 0 });
        }
        let quiver = Quiver::new(vertices, arrows).expect("punctured quiver is connected");
        PuncturedQuiver { presentation, quiver }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }

    /// The relation as a path expression equal to the idempotent at `v0`.
    pub fn relation(&self) -> String {
        let mut parts: Vec<String> =
            (1..=self.presentation.genus()).map(|i| format!("[a{i},b{i}]")).collect();
        parts.extend(self.presentation.punctures().iter().map(|x| format!("c_{x}_out·c_{x}_in")));
        if parts.is_empty() {
            "v0 = v0".into()
        } else {
            format!("{} = v0", parts.join("·"))
        }
    }
}

/// Point of `R(Q^D, I^D, [P])` with standard parabolics of the given partitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuiverPoint<F: Scalar> {
    presentation: SurfacePresentation,
    n: usize,
    partitions: Vec<Vec<usize>>,
    a: Vec<Matrix<F>>,
    b: Vec<Matrix<F>>,
    c_in: Vec<Matrix<F>>,
    c_out: Vec<Matrix<F>>,
}

impl<F: Scalar> QuiverPoint<F> {
    /// Checks shapes and invertibility; the relation and membership are separate predicates.
    pub fn new(
        presentation: SurfacePresentation,
        partitions: Vec<Vec<usize>>,
        a: Vec<Matrix<F>>,
        b: Vec<Matrix<F>>,
        c_in: Vec<Matrix<F>>,
        c_out: Vec<Matrix<F>>,
    ) -> Result<Self> {
        let k = presentation.punctures().len();
        if partitions.len() != k || c_in.len() != k || c_out.len() != k {
            return Err(Error::DimensionMismatch(format!("{k} punctures need {k} partitions and arrow pairs")));
        }
        if a.len() != presentation.genus() || b.len() != presentation.genus() {
            return Err(Error::DimensionMismatch("one a- and b-loop per handle".into()));
        }
        let n = a.first().or(c_in.first()).map(Matrix::rows).unwrap_or(0);
        for p in &partitions {
            if p.iter().sum::<usize>() != n || p.contains(&0) {
                return Err(Error::DimensionMismatch(format!("partition {p:?} of {n}")));
            }
        }
        for m in a.iter().chain(&b).chain(&c_in).chain(&c_out) {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!("arrow matrix is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
            if !m.is_invertible() {
                return Err(Error::Singular("arrow matrix".into()));
            }
        }
        Ok(QuiverPoint { presentation, n, partitions, a, b, c_in, c_out })
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    pub fn a(&self) -> &[Matrix<F>] {
        &self.a
    }

    pub fn b(&self) -> &[Matrix<F>] {
        &self.b
    }

    pub fn c_in(&self) -> &[Matrix<F>] {
        &self.c_in
    }

    pub fn c_out(&self) -> &[Matrix<F>] {
        &self.c_out
    }

    /// `c_x = c_{x,2} c_{x,1}`.
    pub fn loops(&self) -> Vec<Matrix<F>> {
        self.c_out.iter().zip(&self.c_in).map(|(o, i)| o * i).collect()
    }

    pub fn relation_holds(&self) -> Result<bool> {
        Ok(relation_product(self.n, &self.a, &self.b, &self.loops())?.is_identity())
    }

    /// `g_x` with `c_{x,1} g_x^{-1} ∈ L_x` and `g_x c_{x,2} ∈ P_x` for every `x`, decided
    /// through `c_{x,1} c_{x,2} ∈ P_x`; the witness is `g_x = c_{x,1}`.
    pub fn membership(&self) -> Option<Vec<Matrix<F>>> {
        for ((p, i), o) in self.partitions.iter().zip(&self.c_in).zip(&self.c_out) {
            if !in_standard_parabolic(p, &(i * o)) {
                return None;
            }
        }
        Some(self.c_in.clone())
    }

    pub fn to_rep(&self) -> Result<SurfaceRep<F>> {
        SurfaceRep::new(self.presentation.clone(), self.n, self.a.clone(), self.b.clone(), self.loops())
    }

    /// Flag at `x` pulled back from the standard flag: `c_{x,1}^{-1}(V_•)`.
    pub fn flag_at(&self, k: usize) -> Result<Flag<F>> {
        Flag::standard(&self.partitions[k])?.transport(&self.c_in[k].inverse()?)
    }

    /// The filtered local system with the given weights (top piece first) per puncture.
    pub fn to_fls(&self, weights: &[Vec<Rational>]) -> Result<FilteredLocalSystem<F>> {
        if weights.len() != self.partitions.len() {
            return Err(Error::DimensionMismatch("one weight list per puncture".into()));
        }
        if self.membership().is_none() {
            return Err(Error::Precondition("point is not of the stated parabolic type".into()));
        }
        let flags = (0..weights.len())
            .map(|k| WeightedFlag::new(self.flag_at(k)?, weights[k].clone()))
            .collect::<Result<_>>()?;
        FilteredLocalSystem::new(self.to_rep()?, flags)
    }

    pub fn with_arrows(&self, a: Vec<Matrix<F>>, b: Vec<Matrix<F>>, c_in: Vec<Matrix<F>>, c_out: Vec<Matrix<F>>) -> Self {
        QuiverPoint { presentation: self.presentation.clone(), n: self.n, partitions: self.partitions.clone(), a, b, c_in, c_out }
    }

    pub fn to_json(&self) -> Value {
        let mut arrows = Map::new();
        for (i, m) in self.a.iter().enumerate() {
            arrows.insert(format!("a{}", i + 1), m.to_json());
        }
        for (i, m) in self.b.iter().enumerate() {
            arrows.insert(format!("b{}", i + 1), m.to_json());
        }
        let mut parts = Map::new();
        for (k, x) in self.presentation.punctures().iter().enumerate() {
            arrows.insert(format!("c_{x}_in"), self.c_in[k].to_json());
            arrows.insert(format!("c_{x}_out"), self.c_out[k].to_json());
            parts.insert(x.clone(), json!(self.partitions[k]));
        }
        json!({
            "field": F::field_name(),
            "genus": self.presentation.genus(),
            "punctures": self.presentation.punctures(),
            "rank": self.n,
            "partitions": parts,
            "arrows": arrows,
        })
    }

    /// Missing `"partitions"` entries default to the trivial partition `[n]`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let arrows = v
            .get("arrows")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("quiver point lacks \"arrows\"".into()))?;
        let genus = v.get("genus").and_then(Value::as_u64).unwrap_or(0) as usize;
        let punctures: Vec<String> = match v.get("punctures").and_then(Value::as_array) {
            Some(p) => p.iter().map(|x| x.as_str().map(String::from).ok_or_else(|| Error::Parse("puncture labels are strings".into()))).collect::<Result<_>>()?,
            None => arrows
                .keys()
                .filter_map(|k| k.strip_prefix("c_").and_then(|r| r.strip_suffix("_in")).map(String::from))
                .collect(),
        };
        let presentation = SurfacePresentation::new(genus, punctures).map_err(|e| Error::Parse(e.to_string()))?;
        let get = |name: String| -> Result<Matrix<F>> {
            Matrix::from_json(arrows.get(&name).ok_or_else(|| Error::Parse(format!("missing arrow {name}")))?)
        };
        let a = (1..=genus).map(|i| get(format!("a{i}"))).collect::<Result<Vec<_>>>()?;
        let b = (1..=genus).map(|i| get(format!("b{i}"))).collect::<Result<Vec<_>>>()?;
        let c_in = presentation.punctures().iter().map(|x| get(format!("c_{x}_in"))).collect::<Result<Vec<_>>>()?;
        let c_out = presentation.punctures().iter().map(|x| get(format!("c_{x}_out"))).collect::<Result<Vec<_>>>()?;
        let n = match v.get("rank").and_then(Value::as_u64) {
            Some(n) => n as usize,
            None => a.first().or(c_in.first()).map(Matrix::rows).ok_or_else(|| Error::Parse("cannot infer rank".into()))?,
        };
        let parts = v.get("partitions").and_then(Value::as_object);
        let partitions = presentation
            .punctures()
            .iter()
            .map(|x| match parts.and_then(|p| p.get(x)) {
                None => Ok(vec![n]),
                Some(p) => p
                    .as_array()
                    .ok_or_else(|| Error::Parse("partition must be a list".into()))?
                    .iter()
                    .map(|l| l.as_u64().map(|l| l as usize).ok_or_else(|| Error::Parse("bad partition entry".into())))
                    .collect(),
            })
            .collect::<Result<Vec<_>>>()?;
        QuiverPoint::new(presentation, partitions, a, b, c_in, c_out).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Canonical lift: `c_{x,1} = h_x`, `c_{x,2} = ρ(c_x) h_x^{-1}` with `h_x` the inverse of
/// the adapted basis of the flag at `x`, so that `h_x` carries that flag to the standard one.
pub fn rep_to_point<F: Scalar>(fls: &FilteredLocalSystem<F>) -> Result<QuiverPoint<F>> {
    let rep = fls.rep();
    let mut c_in = Vec::new();
    let mut c_out = Vec::new();
    for (f, c) in fls.flags().iter().zip(rep.c()) {
        let h = f.flag().adapted_basis().inverse()?;
        if !in_standard_parabolic(&f.partition(), &c.conjugate_by(&h)?) {
            return Err(Error::NoConjugator("monodromy does not preserve the flag".into()));
        }
        c_out.push(c * &h.inverse()?);
        c_in.push(h);
    }
    QuiverPoint::new(rep.presentation().clone(), fls.partitions(), rep.a().to_vec(), rep.b().to_vec(), c_in, c_out)
}

/// Element `(g_{v0}, (g_{v_x}))` of `GL_n × ∏ L_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeElement<F: Scalar> {
    pub g0: Matrix<F>,
    pub gx: Vec<Matrix<F>>,
}

impl<F: Scalar> GaugeElement<F> {
    pub fn identity(n: usize, punctures: usize) -> Self {
        GaugeElement { g0: Matrix::identity(n), gx: vec![Matrix::identity(n); punctures] }
    }

    /// Scalar `z` at every vertex.
    pub fn scalar(n: usize, punctures: usize, z: F) -> Self {
        GaugeElement { g0: Matrix::scalar(n, z.clone()), gx: vec![Matrix::scalar(n, z); punctures] }
    }

    pub fn is_in_levis(&self, partitions: &[Vec<usize>]) -> bool {
        self.gx.iter().zip(partitions).all(|(g, p)| in_standard_levi(p, g))
    }

    /// `a ↦ g0 a g0^{-1}`, `c_{x,1} ↦ g_x c_{x,1} g0^{-1}`, `c_{x,2} ↦ g0 c_{x,2} g_x^{-1}`.
    pub fn act(&self, p: &QuiverPoint<F>) -> Result<QuiverPoint<F>> {
        if !self.is_in_levis(&p.partitions) {
            return Err(Error::Precondition("vertex components must lie in the Levi subgroups".into()));
        }
        self.act_unchecked(p)
    }

    /// The same formula without the Levi condition (used for `P_x`-valued components).
    pub fn act_unchecked(&self, p: &QuiverPoint<F>) -> Result<QuiverPoint<F>> {
        let g0i = self.g0.inverse()?;
        let conj = |m: &Matrix<F>| &(&self.g0 * m) * &g0i;
        let mut c_in = Vec::new();
        let mut c_out = Vec::new();
        for ((i, o), g) in p.c_in.iter().zip(&p.c_out).zip(&self.gx) {
            c_in.push(&(g * i) * &g0i);
            c_out.push(&(&self.g0 * o) * &g.inverse()?);
        }
        Ok(p.with_arrows(p.a.iter().map(conj).collect(), p.b.iter().map(conj).collect(), c_in, c_out))
    }
}

/// `χ_θ(g) = ∏_x ∏_i det(g_{x,i})^{-d_{x,i}}` with `θ_{x,i} = d_{x,i}/d`; trivial at `v0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiTheta {
    pub d: i64,
    /// `d_{x,i}` per puncture, top block first.
    pub exponents: Vec<Vec<i64>>,
    pub partitions: Vec<Vec<usize>>,
}

impl ChiTheta {
    pub fn new(weights: &[Vec<Rational>], partitions: &[Vec<usize>]) -> Result<Self> {
        if weights.len() != partitions.len() {
            return Err(Error::DimensionMismatch("one weight list per puncture".into()));
        }
        let mut d = num_bigint::BigInt::from(1);
        for (ws, p) in weights.iter().zip(partitions) {
            if ws.len() != p.len() {
                return Err(Error::DimensionMismatch(format!("{} weights for partition {p:?}", ws.len())));
            }
            for w in ws {
                d = d.lcm(w.denom());
            }
        }
        let to_i64 = |x: &num_bigint::BigInt| x.to_i64().ok_or_else(|| Error::Precondition("weight denominators too large".into()));
        let exponents = weights
            .iter()
            .map(|ws| ws.iter().map(|w| to_i64(&(w * Rational::from_integer(d.clone())).to_integer())).collect())
            .collect::<Result<_>>()?;
        Ok(ChiTheta { d: to_i64(&d)?, exponents, partitions: partitions.to_vec() })
    }

    pub fn of_fls<F: Scalar>(fls: &FilteredLocalSystem<F>) -> Result<Self> {
        let ws: Vec<Vec<Rational>> = fls.flags().iter().map(|f| f.weights().to_vec()).collect();
        ChiTheta::new(&ws, &fls.partitions())
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().flatten().all(|e| *e == 0)
    }

    /// `Σ θ_{x,i} λ_{x,i}`.
    pub fn degree(&self) -> Rational {
        let mut s = Rational::zero();
        for (es, p) in self.exponents.iter().zip(&self.partitions) {
            for (e, l) in es.iter().zip(p) {
                s += Rational::new((*e * *l as i64).into(), self.d.into());
            }
        }
        s
    }

    pub fn evaluate<F: Scalar>(&self, g: &GaugeElement<F>) -> Result<F> {
        let mut acc = F::one();
        for ((es, p), gx) in self.exponents.iter().zip(&self.partitions).zip(&g.gx) {
            for (e, r) in es.iter().zip(block_ranges(p)) {
                let det = gx.submatrix(r.clone(), r).determinant()?;
                acc = acc * det.pow_i(-e).ok_or_else(|| Error::Singular("Levi block".into()))?;
            }
        }
        Ok(acc)
    }
}

/// One-parameter subgroup of `G_P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverCocharacter<F: Scalar> {
    pub v0: GradedCocharacter<F>,
    pub vx: Vec<GradedCocharacter<F>>,
}

impl<F: Scalar> QuiverCocharacter<F> {
    pub fn trivial(n: usize, punctures: usize) -> Self {
        QuiverCocharacter { v0: GradedCocharacter::trivial(n), vx: vec![GradedCocharacter::trivial(n); punctures] }
    }

    pub fn scaled(&self, m: i64) -> Result<Self> {
        Ok(QuiverCocharacter {
            v0: self.v0.scaled(m)?,
            vx: self.vx.iter().map(|c| c.scaled(m)).collect::<Result<_>>()?,
        })
    }
}

/// `n` with `χ(μ(t)) = t^n`, read off from block determinants of `μ_{v_x}(t)`.
pub fn pairing<F: Scalar>(mu: &QuiverCocharacter<F>, chi: &ChiTheta) -> Result<i64> {
    let mut total = 0i64;
    for ((c, es), p) in mu.vx.iter().zip(&chi.exponents).zip(&chi.partitions) {
        let n = c.rank();
        let ranges = block_ranges(p);
        let blocks: Vec<Subspace<F>> = ranges.iter().map(|r| Subspace::coordinate(n, r.clone())).collect();
        for (k, w) in c.weights().iter().enumerate() {
            let e = c.eigenspace(k);
            let dims: Vec<usize> = blocks.iter().map(|b| e.intersection(b).map(|s| s.dim())).collect::<Result<_>>()?;
            if dims.iter().sum::<usize>() != e.dim() {
                return Err(Error::Precondition("cocharacter does not land in the Levi subgroup".into()));
            }
            for (d, ex) in dims.iter().zip(es) {
                total -= ex * w * *d as i64;
            }
        }
    }
    Ok(total)
}

/// `−d Σ_j (d'_j − d'_{j−1}) deg(L_j)` over the steps `L_j` of the flag of `μ_{v0}`,
/// top step first, `d'_j` the weight of the `j`-th piece and `d'_0 = 0`.
pub fn pairing_via_degree<F: Scalar>(mu_v0: &GradedCocharacter<F>, fls: &FilteredLocalSystem<F>) -> Result<Rational> {
    let chi = ChiTheta::of_fls(fls)?;
    let flag = mu_v0.to_flag();
    for s in flag.proper_steps() {
        if !fls.rep().is_invariant(s) {
            return Err(Error::LimitDoesNotExist("flag of the cocharacter is not invariant".into()));
        }
    }
    let mut top_first: Vec<i64> = mu_v0.weights().to_vec();
    top_first.reverse();
    let mut prev = 0i64;
    let mut sum = Rational::zero();
    for (j, w) in top_first.iter().enumerate() {
        sum += fls.sub_degree(&flag.steps()[j])? * Rational::from_integer((w - prev).into());
        prev = *w;
    }
    Ok(-sum * Rational::from_integer(chi.d.into()))
}

/// Cocharacter at `v_x` attached to the chain `F` at `v0`: on each Levi block `C_i` it
/// grades the induced filtration `proj_{C_i}(V_i ∩ c_{x,1}(F_j))` by the weights of `F`.
pub fn levi_normalized<F: Scalar>(
    partition: &[usize],
    c_in: &Matrix<F>,
    chain: &Flag<F>,
    top_first_weights: &[i64],
) -> Result<GradedCocharacter<F>> {
    let n = chain.ambient();
    let moved = chain.transport(c_in)?;
    let mut cols: Vec<(i64, Vec<F>)> = Vec::new();
    for r in block_ranges(partition) {
        let upper = Subspace::coordinate(n, 0..r.end);
        let mut span = Subspace::zero(r.len());
        let mut chosen: Vec<Vec<F>> = Vec::new();
        for j in (0..chain.len()).rev() {
            let cut = upper.intersection(&moved.steps()[j])?;
            let proj: Vec<Vec<F>> = cut.basis_vectors().iter().map(|v| v[r.clone()].to_vec()).collect();
            for v in proj {
                if !span.contains_vector(&v) {
                    chosen.push(v.clone());
                    span = Subspace::span(r.len(), &chosen);
                    let mut full = vec![F::zero(); n];
                    full[r.clone()].clone_from_slice(&v);
                    cols.push((top_first_weights[j], full));
                }
            }
        }
    }
    from_weighted_columns(n, cols)
}

/// Groups `(weight, vector)` pairs into a cocharacter with decreasing weights.
pub fn from_weighted_columns<F: Scalar>(n: usize, mut cols: Vec<(i64, Vec<F>)>) -> Result<GradedCocharacter<F>> {
    cols.sort_by(|a, b| b.0.cmp(&a.0));
    let mut weights: Vec<i64> = Vec::new();
    let mut mults: Vec<usize> = Vec::new();
    for (w, _) in &cols {
        if weights.last() == Some(w) {
            *mults.last_mut().expect("nonempty") += 1;
        } else {
            weights.push(*w);
            mults.push(1);
        }
    }
    let vecs: Vec<Vec<F>> = cols.into_iter().map(|(_, v)| v).collect();
    GradedCocharacter::new(weights, mults, Matrix::from_cols(n, &vecs))
}

/// Cocharacter of `G_P` from an invariant chain (outermost first) with all weight gaps 1.
pub fn chain_cocharacter<F: Scalar>(point: &QuiverPoint<F>, chain: &[Subspace<F>]) -> Result<QuiverCocharacter<F>> {
    let flag = Flag::from_proper(point.rank(), chain.to_vec())?;
    let k = flag.len() as i64;
    let decreasing: Vec<i64> = (0..k).rev().collect();
    let top_first: Vec<i64> = (0..k).collect();
    let v0 = GradedCocharacter::from_flag(&flag, &decreasing)?;
    let vx = point
        .partitions
        .iter()
        .zip(&point.c_in)
        .map(|(p, c)| levi_normalized(p, c, &flag, &top_first))
        .collect::<Result<_>>()?;
    Ok(QuiverCocharacter { v0, vx })
}

/// `lim_{t→0} μ(t)·φ`, arrow by arrow, if it exists.
pub fn limit<F: Scalar>(point: &QuiverPoint<F>, mu: &QuiverCocharacter<F>) -> Result<Option<QuiverPoint<F>>> {
    let mut loops = Vec::new();
    for m in point.a.iter().chain(&point.b) {
        match arrow_limit(&mu.v0, m, &mu.v0)? {
            Some(l) => loops.push(l),
            None => return Ok(None),
        }
    }
    let b = loops.split_off(point.a.len());
    let mut c_in = Vec::new();
    let mut c_out = Vec::new();
    for ((i, o), mx) in point.c_in.iter().zip(&point.c_out).zip(&mu.vx) {
        match (arrow_limit(mx, i, &mu.v0)?, arrow_limit(&mu.v0, o, mx)?) {
            (Some(li), Some(lo)) => {
                c_in.push(li);
                c_out.push(lo);
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(point.with_arrows(loops, b, c_in, c_out)))
}

pub const CHAIN_LIMIT: usize = 200_000;

#[derive(Clone, Debug)]
pub struct KingReport<F: Scalar> {
    pub verdict: StabilityVerdict<F>,
    pub chains_checked: usize,
    pub min_pairing: Option<i64>,
    /// Chains whose cocharacter has no limit on the point.
    pub limit_failures: usize,
}

/// Numerical criterion over cocharacters attached to invariant chains with unit gaps.
pub fn king_check<F: Scalar>(
    point: &QuiverPoint<F>,
    weights: &[Vec<Rational>],
    backend: Backend,
) -> Result<KingReport<F>> {
    let chi = ChiTheta::new(weights, &point.partitions)?;
    if !chi.degree().is_zero() {
        return Err(Error::Precondition(format!("χ_θ is nontrivial on scalars (degree {})", chi.degree())));
    }
    let fls = point.to_fls(weights)?;
    let lattice = fls.invariant_lattice(backend)?;
    let chains = lattice.proper_chains(CHAIN_LIMIT);
    let mut coverage = lattice.coverage();
    if chains.len() >= CHAIN_LIMIT {
        coverage = Coverage::Incomplete;
    }
    let mut min_pairing: Option<i64> = None;
    let mut limit_failures = 0;
    let mut negative: Option<(i64, Subspace<F>)> = None;
    let mut zero: Option<Subspace<F>> = None;
    for chain in &chains {
        let mu = chain_cocharacter(point, chain)?;
        let p = pairing(&mu, &chi)?;
        if limit(point, &mu)?.is_none() {
            limit_failures += 1;
        }
        min_pairing = Some(min_pairing.map_or(p, |m| m.min(p)));
        if chain.len() == 1 {
            let w = &chain[0];
            if p < 0 && negative.as_ref().is_none_or(|(q, _)| p < *q) {
                negative = Some((p, w.clone()));
            } else if p == 0 && zero.is_none() {
                zero = Some(w.clone());
            }
        } else if p < 0 && negative.is_none() {
            // multi-step chains are sums of single-step pairings with positive gaps,
            // so some single step is already negative; keep the chain's deepest step
            negative = Some((p, chain.last().expect("nonempty").clone()));
        }
    }
    let witness = |w: Subspace<F>| -> Result<Witness<F>> {
        Ok(Witness { degree: fls.sub_degree(&w)?, rank: w.dim(), subspace: w })
    };
    let verdict = if let Some((_, w)) = negative {
        StabilityVerdict { class: StabilityClass::Unstable, witness: Some(witness(w)?), coverage }
    } else {
        if coverage == Coverage::Incomplete {
            return Err(Error::IncompleteLattice("King check could not enumerate every invariant chain".into()));
        }
        match zero {
            Some(w) => StabilityVerdict { class: StabilityClass::SemistableNotStable, witness: Some(witness(w)?), coverage },
            None => StabilityVerdict { class: StabilityClass::Stable, witness: None, coverage },
        }
    };
    Ok(KingReport { verdict, chains_checked: chains.len(), min_pairing, limit_failures })
}
