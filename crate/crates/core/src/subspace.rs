//! Subspaces of `F^n` in canonical reduced-echelon form.

use num_traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// A subspace, stored as the nonzero rows of its reduced row echelon basis.
/// Two subspaces are equal iff their representations are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace<F: Scalar> {
    ambient: usize,
    basis: Matrix<F>,
    pivots: Vec<usize>,
}

impl<F: Scalar> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::zeros(0, ambient), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::identity(ambient), pivots: (0..ambient).collect() }
    }

    /// Span of the given (column) vectors.
    pub fn span(ambient: usize, vectors: &[Vec<F>]) -> Self {
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        Self::from_rows(&Matrix::from_rows(ambient, vectors.to_vec()))
    }

    /// Row space of `m`.
    pub fn from_rows(m: &Matrix<F>) -> Self {
        let (r, pivots) = m.rref_with_pivots();
        let basis = r.submatrix(0..pivots.len(), 0..m.cols());
        Subspace { ambient: m.cols(), basis, pivots }
    }

    /// Column space of `m`.
    pub fn column_space(m: &Matrix<F>) -> Self {
        Self::from_rows(&m.transpose())
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let vecs: Vec<Vec<F>> = indices
            .into_iter()
            .map(|i| {
                let mut v = vec![F::zero(); ambient];
                v[i] = F::one();
                v
            })
            .collect();
        Self::span(ambient, &vecs)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Canonical basis matrix (rows).
    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<F>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch(format!(
                "subspaces of k^{} and k^{}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Coordinates of `v` in the canonical basis, or `None` if `v` is not in the subspace.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        let coords: Vec<F> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let residual = self.reduce(v);
        if residual.iter().all(|x| x.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    /// `v` minus its echelon projection: zero at pivot positions, zero iff `v` lies here.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut out = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let f = out[p].clone();
            if f.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let b = self.basis.get(i, c);
                if !b.is_zero() {
                    *o = o.clone() - f.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    pub fn contains(&self, other: &Self) -> bool {
        other.basis.row_vecs().iter().all(|v| self.contains_vector(v))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        Ok(Self::from_rows(&self.basis.stack(&other.basis)))
    }

    /// Orthogonal complement under the standard bilinear pairing.
    pub fn annihilator(&self) -> Self {
        if self.is_zero() {
            return Subspace::full(self.ambient);
        }
        Subspace::span(self.ambient, &self.basis.kernel())
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        if self.contains(other) {
            return Ok(other.clone());
        }
        if other.contains(self) {
            return Ok(self.clone());
        }
        Ok(self.annihilator().sum(&other.annihilator())?.annihilator())
    }

    /// Image under the linear map `m` (acting on column vectors).
    pub fn image(&self, m: &Matrix<F>) -> Self {
        let vecs: Vec<Vec<F>> = self.basis.row_vecs().iter().map(|v| m.mul_vec(v)).collect();
        Subspace::span(m.rows(), &vecs)
    }

    /// Preimage `{v : m v ∈ self}` for a square `m`.
    pub fn preimage(&self, m: &Matrix<F>) -> Self {
        // rows of ann(self) * m annihilate the preimage
        let ann = self.annihilator();
        if ann.is_zero() {
            return Subspace::full(m.cols());
        }
        let cond = &ann.basis * m;
        Subspace::span(m.cols(), &cond.kernel())
    }

    /// First vector `v` of the basis with `m v ∉ self`, if any.
    pub fn invariance_witness(&self, m: &Matrix<F>) -> Option<Vec<F>> {
        self.basis.row_vecs().into_iter().find(|v| !self.contains_vector(&m.mul_vec(v)))
    }

    pub fn is_invariant(&self, m: &Matrix<F>) -> bool {
        self.invariance_witness(m).is_none()
    }

    /// Indices of standard basis vectors spanning a complement (the non-pivot columns).
    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.ambient).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Image of `v` in the quotient `k^n / self`, in coordinates of the complement indices.
    pub fn quotient_coordinates(&self, v: &[F]) -> Vec<F> {
        let r = self.reduce(v);
        self.complement_indices().iter().map(|&i| r[i].clone()).collect()
    }

    /// Matrix whose columns are the canonical basis vectors.
    pub fn basis_columns(&self) -> Matrix<F> {
        self.basis.transpose()
    }

    /// Expresses a subspace of `self` in the coordinates of `self`'s basis.
    pub fn relative(&self, inner: &Self) -> Result<Subspace<F>> {
        let coords: Vec<Vec<F>> = inner
            .basis_vectors()
            .iter()
            .map(|v| {
                self.coordinates(v).ok_or_else(|| {
                    Error::Precondition("subspace is not contained in the ambient subspace".into())
                })
            })
            .collect::<Result<_>>()?;
        Ok(Subspace::span(self.dim(), &coords))
    }

    /// Inverse of [`Subspace::relative`]: a subspace given in coordinates of `self`.
    pub fn embed(&self, inner: &Subspace<F>) -> Subspace<F> {
        let vecs: Vec<Vec<F>> = inner
            .basis_vectors()
            .iter()
            .map(|c| {
                let mut v = vec![F::zero(); self.ambient];
                for (i, ci) in c.iter().enumerate() {
                    if ci.is_zero() {
                        continue;
                    }
                    for (k, x) in v.iter_mut().enumerate() {
                        *x = x.clone() + ci.clone() * self.basis.get(i, k).clone();
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.ambient, &vecs)
    }

    /// Image of `self` in the quotient by `w`, in quotient coordinates of `w`.
    pub fn quotient_by(&self, w: &Subspace<F>) -> Subspace<F> {
        let vecs: Vec<Vec<F>> =
            self.basis_vectors().iter().map(|v| w.quotient_coordinates(v)).collect();
        Subspace::span(self.ambient - w.dim(), &vecs)
    }

    /// Preimage in `k^n` of a subspace of `k^n / w` given in quotient coordinates.
    pub fn lift_from_quotient(w: &Subspace<F>, q: &Subspace<F>) -> Subspace<F> {
        let comp = w.complement_indices();
        let mut vecs = w.basis_vectors();
        for c in q.basis_vectors() {
            let mut v = vec![F::zero(); w.ambient];
            for (i, x) in c.iter().enumerate() {
                v[comp[i]] = x.clone();
            }
            vecs.push(v);
        }
        Subspace::span(w.ambient, &vecs)
    }

    pub fn to_json(&self) -> Value {
        self.basis.to_json()
    }

    /// Parses a list of spanning row vectors; `ambient` is needed for the zero subspace.
    pub fn from_json(v: &Value, ambient: usize) -> Result<Self> {
        let m = Matrix::<F>::from_json(v)?;
        if m.rows() == 0 {
            return Ok(Subspace::zero(ambient));
        }
        if m.cols() != ambient {
            return Err(Error::Parse(format!(
                "subspace vectors have length {}, expected {ambient}",
                m.cols()
            )));
        }
        Ok(Subspace::from_rows(&m))
    }
}

/// All subspaces of `F^n` for a finite field, in canonical form, ordered by dimension.
pub fn all_subspaces<F: Scalar>(n: usize) -> Result<Vec<Subspace<F>>> {
    let elems = F::elements()
        .ok_or_else(|| Error::Precondition("subspace enumeration needs a finite field".into()))?;
    let mut out = Vec::new();
    for k in 0..=n {
        for pivots in combinations(n, k) {
            // free entries: row i, column c > pivots[i], c not a pivot
            let free: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| {
                    let piv = pivots.clone();
                    (pivots[i] + 1..n).filter(move |c| !piv.contains(c)).map(move |c| (i, c))
                })
                .collect();
            let mut counter = vec![0usize; free.len()];
            loop {
                let mut m = Matrix::zeros(k, n);
                for (i, &p) in pivots.iter().enumerate() {
                    m.set(i, p, F::one());
                }
                for (slot, &(i, c)) in free.iter().enumerate() {
                    m.set(i, c, elems[counter[slot]].clone());
                }
                out.push(Subspace { ambient: n, basis: m, pivots: pivots.clone() });
                // odometer increment
                let mut pos = 0;
                loop {
                    if pos == counter.len() {
                        break;
                    }
                    counter[pos] += 1;
                    if counter[pos] < elems.len() {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
                if pos == counter.len() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// True if `v` is the zero vector.
pub fn is_zero_vector<F: Scalar>(v: &[F]) -> bool {
    v.iter().all(Zero::is_zero)
}
