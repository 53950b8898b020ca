//! Fundamental groups of punctured surfaces and their matrix representations.

use std::collections::HashSet;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::invariant::{enumerate_invariant_subspaces, Backend};
use crate::matrix::{commutator, Matrix};
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// Genus-`g` surface minus an ordered list of punctures. The group has generators
/// `a_1..a_g, b_1..b_g, c_x` and the single relation `∏[a_i,b_i] ∏ c_x = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfacePresentation {
    genus: usize,
    punctures: Vec<String>,
}

impl SurfacePresentation {
    pub fn new(genus: usize, punctures: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &punctures {
            if !seen.insert(p) {
                return Err(Error::Precondition(format!("duplicate puncture label {p:?}")));
            }
        }
        Ok(SurfacePresentation { genus, punctures })
    }

    /// Punctures labelled `x1, x2, ...`.
    pub fn with_labels(genus: usize, count: usize) -> Self {
        SurfacePresentation { genus, punctures: (1..=count).map(|i| format!("x{i}")).collect() }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn punctures(&self) -> &[String] {
        &self.punctures
    }

    pub fn puncture_index(&self, label: &str) -> Option<usize> {
        self.punctures.iter().position(|p| p == label)
    }

    /// Generator names in the order `a_i, b_i, c_x`.
    pub fn generator_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.genus).map(|i| format!("a{i}")).collect();
        names.extend((1..=self.genus).map(|i| format!("b{i}")));
        names.extend(self.punctures.iter().map(|x| format!("c_{x}")));
        names
    }
}

/// Value of `∏[A_i,B_i] ∏ C_x` in presentation order.
pub fn relation_product<F: Scalar>(
    n: usize,
    a: &[Matrix<F>],
    b: &[Matrix<F>],
    c: &[Matrix<F>],
) -> Result<Matrix<F>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch("unequal numbers of a and b generators".into()));
    }
    for m in a.iter().chain(b).chain(c) {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "generator of size {}x{} in a rank-{n} representation",
                m.rows(),
                m.cols()
            )));
        }
    }
    let mut acc = Matrix::identity(n);
    for (ai, bi) in a.iter().zip(b) {
        acc = &acc * &commutator(ai, bi)?;
    }
    for cx in c {
        acc = &acc * cx;
    }
    Ok(acc)
}

/// Matrix representation of the punctured-surface group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceRep<F: Scalar> {
    presentation: SurfacePresentation,
    n: usize,
    a: Vec<Matrix<F>>,
    b: Vec<Matrix<F>>,
    c: Vec<Matrix<F>>,
}

impl<F: Scalar> SurfaceRep<F> {
    /// Validates sizes, invertibility and the surface relation.
    pub fn new(
        presentation: SurfacePresentation,
        n: usize,
        a: Vec<Matrix<F>>,
        b: Vec<Matrix<F>>,
        c: Vec<Matrix<F>>,
    ) -> Result<Self> {
        let rep = Self::new_unchecked(presentation, n, a, b, c)?;
        if !rep.verify_relation()? {
            return Err(Error::RelationViolated);
        }
        Ok(rep)
    }

    /// Validates sizes and invertibility only.
    pub fn new_unchecked(
        presentation: SurfacePresentation,
        n: usize,
        a: Vec<Matrix<F>>,
        b: Vec<Matrix<F>>,
        c: Vec<Matrix<F>>,
    ) -> Result<Self> {
        if a.len() != presentation.genus || b.len() != presentation.genus {
            return Err(Error::DimensionMismatch(format!(
                "genus {} needs {} a- and b-generators, got {} and {}",
                presentation.genus,
                presentation.genus,
                a.len(),
                b.len()
            )));
        }
        if c.len() != presentation.punctures.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} punctures but {} puncture matrices",
                presentation.punctures.len(),
                c.len()
            )));
        }
        let names = presentation.generator_names();
        for (name, m) in names.iter().zip(a.iter().chain(&b).chain(&c)) {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_invertible() {
                return Err(Error::Singular(format!("generator {name}")));
            }
        }
        Ok(SurfaceRep { presentation, n, a, b, c })
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn genus(&self) -> usize {
        self.presentation.genus
    }

    pub fn punctures(&self) -> &[String] {
        &self.presentation.punctures
    }

    pub fn a(&self) -> &[Matrix<F>] {
        &self.a
    }

    pub fn b(&self) -> &[Matrix<F>] {
        &self.b
    }

    pub fn c(&self) -> &[Matrix<F>] {
        &self.c
    }

    pub fn c_at(&self, label: &str) -> Option<&Matrix<F>> {
        self.presentation.puncture_index(label).map(|i| &self.c[i])
    }

    /// All generator images in the order `a_i, b_i, c_x`.
    pub fn generators(&self) -> Vec<Matrix<F>> {
        self.a.iter().chain(&self.b).chain(&self.c).cloned().collect()
    }

    pub fn verify_relation(&self) -> Result<bool> {
        Ok(relation_product(self.n, &self.a, &self.b, &self.c)?.is_identity())
    }

    /// `g ρ g^{-1}` on every generator.
    pub fn conjugate(&self, g: &Matrix<F>) -> Result<Self> {
        let gi = g.inverse()?;
        let conj = |ms: &[Matrix<F>]| ms.iter().map(|m| &(g * m) * &gi).collect::<Vec<_>>();
        Ok(SurfaceRep {
            presentation: self.presentation.clone(),
            n: self.n,
            a: conj(&self.a),
            b: conj(&self.b),
            c: conj(&self.c),
        })
    }

    /// Generator and vector witnessing that `w` is not invariant.
    pub fn invariance_failure(&self, w: &Subspace<F>) -> Option<(String, Vec<F>)> {
        let names = self.presentation.generator_names();
        for (name, m) in names.iter().zip(self.generators()) {
            if let Some(v) = w.invariance_witness(&m) {
                return Some((name.clone(), v));
            }
        }
        None
    }

    pub fn is_invariant(&self, w: &Subspace<F>) -> bool {
        self.invariance_failure(w).is_none()
    }

    fn check_invariant(&self, w: &Subspace<F>) -> Result<()> {
        if w.ambient() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "subspace of k^{} for a rank-{} representation",
                w.ambient(),
                self.n
            )));
        }
        if let Some((generator, v)) = self.invariance_failure(w) {
            return Err(Error::NotInvariant {
                generator,
                vector: v.iter().map(|x| x.to_string()).collect(),
            });
        }
        Ok(())
    }

    /// Representation on an invariant subspace, in its canonical echelon basis.
    pub fn restrict(&self, w: &Subspace<F>) -> Result<Self> {
        self.check_invariant(w)?;
        let basis = w.basis_vectors();
        let restrict_one = |m: &Matrix<F>| {
            let cols: Vec<Vec<F>> = basis
                .iter()
                .map(|v| w.coordinates(&m.mul_vec(v)).expect("invariant subspace"))
                .collect();
            Matrix::from_cols(w.dim(), &cols)
        };
        Ok(SurfaceRep {
            presentation: self.presentation.clone(),
            n: w.dim(),
            a: self.a.iter().map(restrict_one).collect(),
            b: self.b.iter().map(restrict_one).collect(),
            c: self.c.iter().map(restrict_one).collect(),
        })
    }

    /// Representation on `k^n / w` in the coordinates of the complement indices of `w`.
    pub fn quotient(&self, w: &Subspace<F>) -> Result<Self> {
        self.check_invariant(w)?;
        let comp = w.complement_indices();
        let q = comp.len();
        let quotient_one = |m: &Matrix<F>| {
            let cols: Vec<Vec<F>> = comp.iter().map(|&j| w.quotient_coordinates(&m.col(j))).collect();
            Matrix::from_cols(q, &cols)
        };
        Ok(SurfaceRep {
            presentation: self.presentation.clone(),
            n: q,
            a: self.a.iter().map(quotient_one).collect(),
            b: self.b.iter().map(quotient_one).collect(),
            c: self.c.iter().map(quotient_one).collect(),
        })
    }

    /// Direct sum, block diagonal with `self` first.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.presentation != other.presentation {
            return Err(Error::Precondition("direct sum of representations of different groups".into()));
        }
        let sum = |x: &[Matrix<F>], y: &[Matrix<F>]| {
            x.iter().zip(y).map(|(p, q)| Matrix::block_diag(&[p.clone(), q.clone()])).collect()
        };
        Ok(SurfaceRep {
            presentation: self.presentation.clone(),
            n: self.n + other.n,
            a: sum(&self.a, &other.a),
            b: sum(&self.b, &other.b),
            c: sum(&self.c, &other.c),
        })
    }

    pub fn to_json(&self) -> Value {
        let mut c = Map::new();
        for (x, m) in self.presentation.punctures.iter().zip(&self.c) {
            c.insert(x.clone(), m.to_json());
        }
        json!({
            "field": F::field_name(),
            "genus": self.presentation.genus,
            "punctures": self.presentation.punctures,
            "rank": self.n,
            "A": self.a.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "B": self.b.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "C": Value::Object(c),
        })
    }

    /// `"A"`/`"B"` may be omitted in genus zero; `"rank"` is inferred when absent.
    pub fn from_json(v: &Value) -> Result<Self> {
        let genus = v.get("genus").and_then(Value::as_u64).unwrap_or(0) as usize;
        let c_obj = v
            .get("C")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("representation lacks \"C\"".into()))?;
        let punctures: Vec<String> = match v.get("punctures") {
            Some(p) => p
                .as_array()
                .ok_or_else(|| Error::Parse("\"punctures\" must be a list".into()))?
                .iter()
                .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::Parse("puncture labels are strings".into())))
                .collect::<Result<_>>()?,
            None => c_obj.keys().cloned().collect(),
        };
        let presentation = SurfacePresentation::new(genus, punctures).map_err(|e| Error::Parse(e.to_string()))?;
        let list = |key: &str| -> Result<Vec<Matrix<F>>> {
            match v.get(key) {
                None => Ok(vec![]),
                Some(x) => x
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("\"{key}\" must be a list")))?
                    .iter()
                    .map(Matrix::from_json)
                    .collect(),
            }
        };
        let (a, b) = (list("A")?, list("B")?);
        let c: Vec<Matrix<F>> = presentation
            .punctures
            .iter()
            .map(|x| {
                Matrix::from_json(c_obj.get(x).ok_or_else(|| Error::Parse(format!("no matrix for puncture {x}")))?)
            })
            .collect::<Result<_>>()?;
        let n = match v.get("rank").and_then(Value::as_u64) {
            Some(n) => n as usize,
            None => c.first().or(a.first()).map(|m| m.rows()).ok_or_else(|| Error::Parse("cannot infer rank".into()))?,
        };
        let rep = SurfaceRep::new_unchecked(presentation, n, a, b, c).map_err(|e| Error::Parse(e.to_string()))?;
        if !rep.verify_relation()? {
            return Err(Error::RelationViolated);
        }
        Ok(rep)
    }

    /// True iff the only invariant subspaces are `0` and the whole space.
    pub fn is_irreducible(&self, backend: Backend) -> Result<bool> {
        if self.n == 0 {
            return Err(Error::Precondition("irreducibility of the zero representation".into()));
        }
        if self.n == 1 {
            return Ok(true);
        }
        let lattice = enumerate_invariant_subspaces(self.n, &self.generators(), backend, &[])?;
        if lattice.subspaces().iter().any(|w| !w.is_zero() && !w.is_full()) {
            return Ok(false);
        }
        lattice.require_complete()?;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Fp, Rational};

    type Q = Rational;

    pub(crate) fn worked_rep() -> SurfaceRep<Q> {
        SurfaceRep::new(
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
        .unwrap()
    }

    #[test]
    fn relation_examples() {
        assert!(worked_rep().verify_relation().unwrap());
        let torus = SurfaceRep::<Q>::new(
            SurfacePresentation::with_labels(1, 0),
            2,
            vec![Matrix::identity(2)],
            vec![Matrix::identity(2)],
            vec![],
        );
        assert!(torus.is_ok());
        let bad = SurfaceRep::<Q>::new(
            SurfacePresentation::with_labels(0, 1),
            2,
            vec![],
            vec![],
            vec![Matrix::from_i64(&[[2, 0], [0, 1]])],
        );
        assert_eq!(bad.unwrap_err(), Error::RelationViolated);
        assert!(SurfacePresentation::new(0, vec!["x".into(), "x".into()]).is_err());
    }

    #[test]
    fn restriction_to_the_invariant_line() {
        let rep = worked_rep();
        let line = Subspace::span(2, &[vec![Q::from_integer(1.into()), Q::from_integer(0.into())]]);
        let sub = rep.restrict(&line).unwrap();
        assert_eq!(sub.rank(), 1);
        for c in sub.c() {
            assert!(c.is_identity());
        }
        assert!(sub.verify_relation().unwrap());
        assert_eq!(rep.restrict(&Subspace::full(2)).unwrap(), rep);
        assert_eq!(rep.restrict(&Subspace::zero(2)).unwrap().rank(), 0);
        let other = Subspace::span(2, &[vec![Q::from_integer(0.into()), Q::from_integer(1.into())]]);
        assert!(matches!(rep.restrict(&other), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn irreducibility() {
        assert!(!worked_rep().is_irreducible(Backend::Auto).unwrap());
        type F5 = Fp<5>;
        // permutation matrices of S_2 together with a non-scalar diagonal
        let swap: Matrix<F5> = Matrix::from_i64(&[[0, 1], [1, 0]]);
        let diag: Matrix<F5> = Matrix::from_i64(&[[2, 0], [0, 3]]);
        let c3 = (&swap * &diag).inverse().unwrap();
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 3),
            2,
            vec![],
            vec![],
            vec![swap, diag, c3],
        )
        .unwrap();
        // oracle: no line of F5^2 is fixed by both the swap and diag(2,3)
        let lines = crate::subspace::all_subspaces::<F5>(2).unwrap();
        let oracle = !lines.iter().any(|w| w.dim() == 1 && rep.is_invariant(w));
        assert_eq!(rep.is_irreducible(Backend::ExhaustiveFp).unwrap(), oracle);
        assert!(oracle);
    }

    #[test]
    fn quotient_of_upper_triangular() {
        let rep = worked_rep();
        let line = Subspace::span(2, &[vec![Q::from_integer(1.into()), Q::from_integer(0.into())]]);
        let q = rep.quotient(&line).unwrap();
        assert_eq!(q.rank(), 1);
        assert!(q.c().iter().all(Matrix::is_identity));
    }
}
