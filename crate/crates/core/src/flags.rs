//! Flags, parabolic subgroups of `GL_n` as flag stabilizers, and graded cocharacters.
//!
//! A flag is `V = V_1 ⊋ V_2 ⊋ ... ⊋ V_{m+1} = 0`; its type is the partition
//! `λ_i = dim V_i/V_{i+1}` listed from the top piece down. The standard flag of a
//! partition has `V_i = span(e_1, ..., e_{d_i})` with `d_i = dim V_i`, so its
//! stabilizer is block upper triangular and the deepest piece occupies the first
//! coordinates. Adapted bases follow the same convention: deepest piece first.

use std::ops::Range;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag<F: Scalar> {
    steps: Vec<Subspace<F>>,
}

impl<F: Scalar> Flag<F> {
    /// Validates a full chain of steps from the whole space down to zero.
    pub fn new(steps: Vec<Subspace<F>>) -> Result<Self> {
        let first = steps.first().ok_or_else(|| Error::Precondition("flag without steps".into()))?;
        let n = first.ambient();
        if !first.is_full() {
            return Err(Error::Precondition("first flag step must be the whole space".into()));
        }
        if !steps.last().expect("nonempty").is_zero() || steps.len() < 2 {
            return Err(Error::Precondition("last flag step must be zero".into()));
        }
        for w in steps.windows(2) {
            if w[1].ambient() != n {
                return Err(Error::DimensionMismatch("flag steps in different ambient spaces".into()));
            }
            if w[1].dim() >= w[0].dim() || !w[0].contains(&w[1]) {
                return Err(Error::Precondition("flag steps must be strictly decreasing".into()));
            }
        }
        Ok(Flag { steps })
    }

    /// Flag through the given proper subspaces (outermost first), adding `V` and `0`.
    pub fn from_proper(n: usize, proper: Vec<Subspace<F>>) -> Result<Self> {
        let mut steps = vec![Subspace::full(n)];
        steps.extend(proper);
        steps.push(Subspace::zero(n));
        Flag::new(steps)
    }

    /// `V ⊋ 0`.
    pub fn trivial(n: usize) -> Self {
        Flag { steps: vec![Subspace::full(n), Subspace::zero(n)] }
    }

    /// Standard flag of a partition given top piece first.
    pub fn standard(partition: &[usize]) -> Result<Self> {
        if partition.is_empty() || partition.contains(&0) {
            return Err(Error::Precondition(format!("invalid partition {partition:?}")));
        }
        let n: usize = partition.iter().sum();
        let mut steps = Vec::new();
        let mut d = n;
        for &l in partition {
            steps.push(Subspace::coordinate(n, 0..d));
            d -= l;
        }
        steps.push(Subspace::zero(n));
        Ok(Flag { steps })
    }

    pub fn ambient(&self) -> usize {
        self.steps[0].ambient()
    }

    pub fn steps(&self) -> &[Subspace<F>] {
        &self.steps
    }

    /// Number of pieces `V_i / V_{i+1}`.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.ambient() == 0
    }

    /// Steps strictly between `V` and `0`.
    pub fn proper_steps(&self) -> &[Subspace<F>] {
        &self.steps[1..self.steps.len() - 1]
    }

    pub fn partition(&self) -> Vec<usize> {
        self.steps.windows(2).map(|w| w[0].dim() - w[1].dim()).collect()
    }

    /// Basis (as columns) whose first `dim V_i` vectors span `V_i` for every `i`.
    /// The standard flag gets the identity.
    pub fn adapted_basis(&self) -> Matrix<F> {
        let n = self.ambient();
        let mut chosen: Vec<Vec<F>> = Vec::with_capacity(n);
        let mut span = Subspace::zero(n);
        for step in self.steps.iter().rev().skip(1) {
            for v in step.basis_vectors() {
                if !span.contains_vector(&v) {
                    chosen.push(v);
                    span = Subspace::span(n, &chosen);
                }
            }
        }
        Matrix::from_cols(n, &chosen)
    }

    pub fn is_stabilized_by(&self, g: &Matrix<F>) -> bool {
        self.steps.iter().all(|s| s.is_invariant(g))
    }

    /// Image flag `g(V_•)`.
    pub fn transport(&self, g: &Matrix<F>) -> Result<Self> {
        if !g.is_invertible() {
            return Err(Error::Singular("flag transport".into()));
        }
        Ok(Flag { steps: self.steps.iter().map(|s| s.image(g)).collect() })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ambient": self.ambient(),
            "steps": self.steps.iter().map(Subspace::to_json).collect::<Vec<_>>(),
        })
    }

    /// Accepts the step list with or without the trivial ends `V` and `0`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("ambient")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("flag lacks \"ambient\"".into()))? as usize;
        let steps = v
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("flag lacks \"steps\"".into()))?;
        Self::from_step_values(n, steps)
    }

    pub fn from_step_values(n: usize, steps: &[Value]) -> Result<Self> {
        let mut subs: Vec<Subspace<F>> =
            steps.iter().map(|s| Subspace::from_json(s, n)).collect::<Result<_>>()?;
        if subs.first().is_none_or(|s| !s.is_full()) {
            subs.insert(0, Subspace::full(n));
        }
        if subs.last().is_none_or(|s| !s.is_zero()) {
            subs.push(Subspace::zero(n));
        }
        Flag::new(subs).map_err(|e| Error::Parse(format!("bad flag: {e}")))
    }
}

/// Basis adapted to both flags at once. Entry `(i, j, v)` lies in `L_i ∩ F_j` and spans a
/// complement of `L_{i+1} ∩ F_j + L_i ∩ F_{j+1}` there; entries run deepest `L` piece first.
pub fn common_adapted_basis<F: Scalar>(l: &Flag<F>, f: &Flag<F>) -> Result<Vec<(usize, usize, Vec<F>)>> {
    let n = l.ambient();
    if f.ambient() != n {
        return Err(Error::DimensionMismatch("flags in different spaces".into()));
    }
    let (ls, fs) = (l.steps(), f.steps());
    let mut out = Vec::with_capacity(n);
    for i in (0..l.len()).rev() {
        for j in (0..f.len()).rev() {
            let big = ls[i].intersection(&fs[j])?;
            let mut span = ls[i + 1].intersection(&fs[j])?.sum(&ls[i].intersection(&fs[j + 1])?)?;
            for v in big.basis_vectors() {
                if !span.contains_vector(&v) {
                    span = span.sum(&Subspace::span(n, std::slice::from_ref(&v)))?;
                    out.push((i, j, v));
                }
            }
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// Coordinate ranges of the pieces of the standard flag of `partition`, indexed
/// top piece first.
pub fn block_ranges(partition: &[usize]) -> Vec<Range<usize>> {
    let n: usize = partition.iter().sum();
    let mut hi = n;
    partition
        .iter()
        .map(|&l| {
            let r = hi - l..hi;
            hi -= l;
            r
        })
        .collect()
}

/// Membership in the standard parabolic of `partition` (block upper triangular).
pub fn in_standard_parabolic<F: Scalar>(partition: &[usize], g: &Matrix<F>) -> bool {
    let ranges = block_ranges(partition);
    for (i, ri) in ranges.iter().enumerate() {
        for rj in &ranges[i + 1..] {
            // rows of a higher piece, columns of a deeper piece must vanish
            for r in ri.clone() {
                for c in rj.clone() {
                    if !g.get(r, c).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Membership in the standard Levi of `partition` (block diagonal).
pub fn in_standard_levi<F: Scalar>(partition: &[usize], g: &Matrix<F>) -> bool {
    let ranges = block_ranges(partition);
    for (i, ri) in ranges.iter().enumerate() {
        for (j, rj) in ranges.iter().enumerate() {
            if i == j {
                continue;
            }
            for r in ri.clone() {
                for c in rj.clone() {
                    if !g.get(r, c).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Diagonal blocks of `g` for the standard flag of `partition`, top piece first.
pub fn standard_blocks<F: Scalar>(partition: &[usize], g: &Matrix<F>) -> Vec<Matrix<F>> {
    block_ranges(partition).into_iter().map(|r| g.submatrix(r.clone(), r)).collect()
}

/// Block-diagonal part of `g` for the standard flag of `partition`.
pub fn standard_levi_part<F: Scalar>(partition: &[usize], g: &Matrix<F>) -> Matrix<F> {
    let mut out = Matrix::zeros(g.rows(), g.cols());
    for r in block_ranges(partition) {
        out.set_block(r.start, r.start, &g.submatrix(r.clone(), r));
    }
    out
}

/// Block-diagonal matrix from blocks listed top piece first.
pub fn from_standard_blocks<F: Scalar>(blocks: &[Matrix<F>]) -> Matrix<F> {
    let rev: Vec<Matrix<F>> = blocks.iter().rev().cloned().collect();
    Matrix::block_diag(&rev)
}

/// Parabolic subgroup of `GL_n`, stored through the flag it stabilizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Parabolic<F: Scalar> {
    flag: Flag<F>,
}

impl<F: Scalar> Parabolic<F> {
    pub fn new(flag: Flag<F>) -> Self {
        Parabolic { flag }
    }

    pub fn standard(partition: &[usize]) -> Result<Self> {
        Ok(Parabolic { flag: Flag::standard(partition)? })
    }

    pub fn flag(&self) -> &Flag<F> {
        &self.flag
    }

    /// The type `[P]`.
    pub fn partition(&self) -> Vec<usize> {
        self.flag.partition()
    }

    pub fn contains(&self, g: &Matrix<F>) -> Result<bool> {
        if g.rows() != self.flag.ambient() || !g.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix against a parabolic of GL_{}",
                g.rows(),
                g.cols(),
                self.flag.ambient()
            )));
        }
        Ok(self.flag.is_stabilized_by(g))
    }

    /// Induced map on `⊕ V_i/V_{i+1}`, written block-diagonally in the adapted basis
    /// and transported back to the original coordinates.
    pub fn levi_factor(&self, p: &Matrix<F>) -> Result<Matrix<F>> {
        if !self.contains(p)? {
            return Err(Error::Precondition("element is not in the parabolic".into()));
        }
        let b = self.flag.adapted_basis();
        let bi = b.inverse()?;
        let local = &(&bi * p) * &b;
        let mut part = self.partition();
        part.reverse();
        let mut diag = Matrix::zeros(local.rows(), local.cols());
        let mut start = 0;
        for l in part {
            diag.set_block(start, start, &local.submatrix(start..start + l, start..start + l));
            start += l;
        }
        Ok(&(&b * &diag) * &bi)
    }
}

/// Diagonalized one-parameter subgroup `t ↦ B diag(t^{w}) B^{-1}` of `GL_n`.
/// Columns of `B` are grouped by weight, weights strictly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedCocharacter<F: Scalar> {
    weights: Vec<i64>,
    mults: Vec<usize>,
    basis: Matrix<F>,
}

impl<F: Scalar> GradedCocharacter<F> {
    pub fn new(weights: Vec<i64>, mults: Vec<usize>, basis: Matrix<F>) -> Result<Self> {
        if weights.len() != mults.len() || weights.is_empty() {
            return Err(Error::Precondition("one multiplicity per weight required".into()));
        }
        if weights.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Precondition(format!("weights {weights:?} not strictly decreasing")));
        }
        if mults.contains(&0) || mults.iter().sum::<usize>() != basis.rows() {
            return Err(Error::Precondition("multiplicities must be positive and sum to n".into()));
        }
        if !basis.is_invertible() {
            return Err(Error::Singular("cocharacter basis".into()));
        }
        Ok(GradedCocharacter { weights, mults, basis })
    }

    /// The constant cocharacter `t ↦ 1`.
    pub fn trivial(n: usize) -> Self {
        GradedCocharacter { weights: vec![0], mults: vec![n], basis: Matrix::identity(n) }
    }

    /// Diagonal cocharacter with the given weight on each standard basis vector.
    pub fn diagonal(per_vector: &[i64]) -> Self {
        let n = per_vector.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| per_vector[b].cmp(&per_vector[a]).then(a.cmp(&b)));
        let mut weights: Vec<i64> = Vec::new();
        let mut mults: Vec<usize> = Vec::new();
        for &i in &order {
            if weights.last() == Some(&per_vector[i]) {
                *mults.last_mut().expect("nonempty") += 1;
            } else {
                weights.push(per_vector[i]);
                mults.push(1);
            }
        }
        let cols: Vec<Vec<F>> = order
            .iter()
            .map(|&i| {
                let mut v = vec![F::zero(); n];
                v[i] = F::one();
                v
            })
            .collect();
        GradedCocharacter { weights, mults, basis: Matrix::from_cols(n, &cols) }
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    /// Weight attached to each basis column.
    pub fn column_weights(&self) -> Vec<i64> {
        self.weights
            .iter()
            .zip(&self.mults)
            .flat_map(|(&w, &m)| std::iter::repeat_n(w, m))
            .collect()
    }

    /// Span of the basis columns of weight `weights[k]`.
    pub fn eigenspace(&self, k: usize) -> Subspace<F> {
        let start: usize = self.mults[..k].iter().sum();
        let cols: Vec<Vec<F>> = (start..start + self.mults[k]).map(|c| self.basis.col(c)).collect();
        Subspace::span(self.rank(), &cols)
    }

    pub fn is_central(&self) -> bool {
        self.weights.len() == 1
    }

    pub fn scaled(&self, m: i64) -> Result<Self> {
        if m <= 0 {
            return Err(Error::Precondition("cocharacters scale by positive integers".into()));
        }
        Ok(GradedCocharacter {
            weights: self.weights.iter().map(|w| w * m).collect(),
            mults: self.mults.clone(),
            basis: self.basis.clone(),
        })
    }

    /// `g μ g^{-1}`.
    pub fn conjugate(&self, g: &Matrix<F>) -> Self {
        GradedCocharacter { weights: self.weights.clone(), mults: self.mults.clone(), basis: g * &self.basis }
    }

    /// Flag of accumulated eigenspaces of weight ≥ w; its stabilizer is `P_μ`.
    pub fn to_flag(&self) -> Flag<F> {
        let n = self.rank();
        let k = self.weights.len();
        let mut steps = Vec::with_capacity(k + 1);
        for i in 0..k {
            let upto: usize = self.mults[..k - i].iter().sum();
            let cols: Vec<Vec<F>> = (0..upto).map(|c| self.basis.col(c)).collect();
            steps.push(Subspace::span(n, &cols));
        }
        steps.push(Subspace::zero(n));
        Flag { steps }
    }

    /// Cocharacter with `P_μ` the stabilizer of `flag`; `weights` strictly decreasing,
    /// the largest going to the deepest piece.
    pub fn from_flag(flag: &Flag<F>, weights: &[i64]) -> Result<Self> {
        if weights.len() != flag.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a flag with {} pieces",
                weights.len(),
                flag.len()
            )));
        }
        let mut mults = flag.partition();
        mults.reverse();
        GradedCocharacter::new(weights.to_vec(), mults, flag.adapted_basis())
    }

    /// `lim_{t→0} μ(t) g μ(t)^{-1}` if it exists.
    pub fn conjugation_limit(&self, g: &Matrix<F>) -> Result<Option<Matrix<F>>> {
        arrow_limit(self, g, self)
    }

    pub fn to_json(&self) -> Value {
        json!({"weights": self.weights, "mults": self.mults, "basis": self.basis.to_json()})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ints = |key: &str| -> Result<Vec<i64>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("cocharacter lacks \"{key}\"")))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Parse(format!("non-integer in \"{key}\""))))
                .collect()
        };
        let weights = ints("weights")?;
        let mults: Vec<usize> = ints("mults")?
            .into_iter()
            .map(|m| usize::try_from(m).map_err(|_| Error::Parse("negative multiplicity".into())))
            .collect::<Result<_>>()?;
        let n: usize = mults.iter().sum();
        let basis = match v.get("basis") {
            Some(b) => Matrix::from_json(b)?,
            None => Matrix::identity(n),
        };
        GradedCocharacter::new(weights, mults, basis).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `lim_{t→0} μ_t(t) φ μ_s(t)^{-1}` for an arrow `φ` from the `μ_s` space to the `μ_t` space.
/// In adapted bases entry `(r, c)` carries `t^{w_t(r) - w_s(c)}`; the limit exists iff no
/// nonzero entry has a negative exponent, and keeps the exponent-zero entries.
pub fn arrow_limit<F: Scalar>(
    target: &GradedCocharacter<F>,
    phi: &Matrix<F>,
    source: &GradedCocharacter<F>,
) -> Result<Option<Matrix<F>>> {
    let local = &(&target.basis.inverse()? * phi) * &source.basis;
    let wt = target.column_weights();
    let ws = source.column_weights();
    let mut lim = Matrix::zeros(local.rows(), local.cols());
    for r in 0..local.rows() {
        for c in 0..local.cols() {
            let v = local.get(r, c);
            if v.is_zero() {
                continue;
            }
            match (wt[r] - ws[c]).signum() {
                -1 => return Ok(None),
                0 => lim.set(r, c, v.clone()),
                _ => {}
            }
        }
    }
    Ok(Some(&(&target.basis * &lim) * &source.basis.inverse()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Fp, Rational};
    use crate::subspace::all_subspaces;

    type Q = Rational;
    type F3 = Fp<3>;

    #[test]
    fn membership_examples() {
        let p = Parabolic::<Q>::standard(&[1, 1]).unwrap();
        assert!(p.contains(&Matrix::from_i64(&[[2, 5], [0, 3]])).unwrap());
        assert!(!p.contains(&Matrix::from_i64(&[[0, 1], [1, 0]])).unwrap());
        assert!(in_standard_parabolic(&[1, 1], &Matrix::<Q>::from_i64(&[[2, 5], [0, 3]])));
        assert!(!in_standard_parabolic(&[1, 1], &Matrix::<Q>::from_i64(&[[2, 0], [1, 3]])));
        assert!(p.contains(&Matrix::identity(3)).is_err());
    }

    #[test]
    fn levi_factor_examples() {
        let p = Parabolic::<Q>::standard(&[1, 1]).unwrap();
        let u = Matrix::from_i64(&[[1, 1], [0, 1]]);
        assert!(p.levi_factor(&u).unwrap().is_identity());
        let d = Matrix::from_i64(&[[4, 0], [0, 7]]);
        assert_eq!(p.levi_factor(&d).unwrap(), d);
        // partition (1, 2): the deep line e1, then a 2-dim top block
        let p = Parabolic::<Q>::standard(&[2, 1]).unwrap();
        let g = Matrix::from_i64(&[[2, 1, 1], [0, 1, 3], [0, 4, 1]]);
        let l = p.levi_factor(&g).unwrap();
        assert_eq!(l, Matrix::from_i64(&[[2, 0, 0], [0, 1, 3], [0, 4, 1]]));
        assert_eq!(l, standard_levi_part(&[2, 1], &g));
    }

    #[test]
    fn cocharacter_flag_examples() {
        let central = GradedCocharacter::<Q>::new(vec![1], vec![2], Matrix::identity(2)).unwrap();
        assert_eq!(central.to_flag(), Flag::trivial(2));
        let mu = GradedCocharacter::<Q>::diagonal(&[1, 0]);
        assert_eq!(mu.to_flag(), Flag::standard(&[1, 1]).unwrap());
        assert!(GradedCocharacter::<Q>::from_flag(&Flag::trivial(2), &[1, 0]).is_err());
    }

    #[test]
    fn round_trip_over_f3() {
        for line in all_subspaces::<F3>(2).unwrap().into_iter().filter(|w| w.dim() == 1) {
            let f = Flag::from_proper(2, vec![line]).unwrap();
            let mu = GradedCocharacter::from_flag(&f, &[3, -1]).unwrap();
            assert_eq!(mu.to_flag(), f);
        }
        let f = Flag::<F3>::trivial(2);
        assert_eq!(GradedCocharacter::from_flag(&f, &[5]).unwrap().to_flag(), f);
    }

    #[test]
    fn limit_iff_membership_exhaustive_f3() {
        let elems = F3::elements().unwrap();
        let flags: Vec<Flag<F3>> = all_subspaces::<F3>(2)
            .unwrap()
            .into_iter()
            .filter(|w| w.dim() == 1)
            .map(|w| Flag::from_proper(2, vec![w]).unwrap())
            .collect();
        for f in &flags {
            let mu = GradedCocharacter::from_flag(f, &[1, 0]).unwrap();
            for a in &elems {
                for b in &elems {
                    for c in &elems {
                        for d in &elems {
                            let g = Matrix::from_vec(2, 2, vec![*a, *b, *c, *d]);
                            if !g.is_invertible() {
                                continue;
                            }
                            let lim = mu.conjugation_limit(&g).unwrap();
                            assert_eq!(lim.is_some(), f.is_stabilized_by(&g));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn common_basis_splits_both_flags() {
        let subs = all_subspaces::<F3>(3).unwrap();
        let proper: Vec<_> = subs.iter().filter(|w| !w.is_zero() && !w.is_full()).collect();
        for a in &proper {
            for b in &proper {
                let l = Flag::from_proper(3, vec![(*a).clone()]).unwrap();
                let f = Flag::from_proper(3, vec![(*b).clone()]).unwrap();
                let basis = common_adapted_basis(&l, &f).unwrap();
                assert_eq!(basis.len(), 3);
                for i in 0..=l.len() {
                    for j in 0..=f.len() {
                        let vs: Vec<Vec<F3>> =
                            basis.iter().filter(|(p, q, _)| *p >= i && *q >= j).map(|t| t.2.clone()).collect();
                        let expect = l.steps()[i].intersection(&f.steps()[j]).unwrap();
                        assert_eq!(Subspace::span(3, &vs), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn adapted_basis_of_standard_flag_is_identity() {
        let f = Flag::<Q>::standard(&[2, 1, 1]).unwrap();
        assert!(f.adapted_basis().is_identity());
        assert_eq!(f.partition(), vec![2, 1, 1]);
        assert_eq!(block_ranges(&[2, 1, 1]), vec![2..4, 1..2, 0..1]);
    }
}
