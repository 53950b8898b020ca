//! Common invariant subspaces of a finite set of invertible matrices.
//!
//! Two backends:
//! * `ExhaustiveFp` scans every subspace of `F_p^n` (budget `p^n ≤ 10^7`).
//! * `Spin` works over any field. In rank ≤ 3 it is exact: invariant lines are
//!   common eigenlines, invariant hyperplanes are annihilators of common
//!   eigenlines of the transposes. When a common eigenspace has dimension ≥ 2
//!   over an infinite field there are infinitely many invariant subspaces; the
//!   lattice then lists one representative for every possible position relative
//!   to the supplied marker subspaces (flag steps), which is all that degree and
//!   slope computations can see. In rank ≥ 4 the spun lattice carries no
//!   completeness certificate.

use std::collections::BTreeSet;

use crate::canonical::characteristic_polynomial;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::{all_subspaces, Subspace};

/// Largest `p^n` the exhaustive backend will scan.
pub const EXHAUSTIVE_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    ExhaustiveFp,
    Spin,
    /// Exhaustive over finite fields within budget, spin otherwise.
    Auto,
}

/// How much of the invariant-subspace lattice a result is known to cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coverage {
    /// Every invariant subspace is listed.
    Complete,
    /// Infinitely many invariant subspaces; every position relative to the markers is represented.
    Representative,
    /// No certificate; some invariant subspaces may be missing.
    Incomplete,
}

impl Coverage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Coverage::Complete => "complete",
            Coverage::Representative => "representative",
            Coverage::Incomplete => "incomplete",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantLattice<F: Scalar> {
    ambient: usize,
    subspaces: Vec<Subspace<F>>,
    coverage: Coverage,
}

impl<F: Scalar> InvariantLattice<F> {
    pub fn new(ambient: usize, subspaces: impl IntoIterator<Item = Subspace<F>>, coverage: Coverage) -> Self {
        let mut set: BTreeSet<Subspace<F>> = subspaces.into_iter().collect();
        set.insert(Subspace::zero(ambient));
        set.insert(Subspace::full(ambient));
        let mut subspaces: Vec<Subspace<F>> = set.into_iter().collect();
        subspaces.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.cmp(b)));
        InvariantLattice { ambient, subspaces, coverage }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Listed subspaces, ordered by dimension then canonical basis.
    pub fn subspaces(&self) -> &[Subspace<F>] {
        &self.subspaces
    }

    /// Nonzero proper members.
    pub fn proper(&self) -> impl Iterator<Item = &Subspace<F>> {
        self.subspaces.iter().filter(|w| !w.is_zero() && !w.is_full())
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn is_complete(&self) -> bool {
        self.coverage != Coverage::Incomplete
    }

    pub fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteLattice(format!(
                "{} invariant subspaces found in rank {}, no completeness certificate",
                self.subspaces.len(),
                self.ambient
            )))
        }
    }

    pub fn contains(&self, w: &Subspace<F>) -> bool {
        self.subspaces.binary_search_by(|a| a.dim().cmp(&w.dim()).then_with(|| a.cmp(w))).is_ok()
    }

    /// Closure under pairwise sums and intersections.
    pub fn meet_join(&self) -> Self {
        let mut set: BTreeSet<Subspace<F>> = self.subspaces.iter().cloned().collect();
        loop {
            let list: Vec<Subspace<F>> = set.iter().cloned().collect();
            let mut added = false;
            for (i, a) in list.iter().enumerate() {
                for b in &list[i + 1..] {
                    for w in [a.sum(b).expect("same ambient"), a.intersection(b).expect("same ambient")] {
                        if set.insert(w) {
                            added = true;
                        }
                    }
                }
            }
            if !added {
                break;
            }
        }
        InvariantLattice::new(self.ambient, set, self.coverage)
    }

    /// Strict chains `V ⊋ W_1 ⊋ ... ⊋ W_k ⊋ 0` with `k ≥ 1` through listed members,
    /// outermost first, at most `limit` of them.
    pub fn proper_chains(&self, limit: usize) -> Vec<Vec<Subspace<F>>> {
        let proper: Vec<&Subspace<F>> = self.proper().collect();
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..proper.len()).rev().map(|i| vec![i]).collect();
        while let Some(chain) = stack.pop() {
            if out.len() >= limit {
                break;
            }
            let last = proper[*chain.last().expect("nonempty")];
            out.push(chain.iter().map(|&i| proper[i].clone()).collect());
            for (j, w) in proper.iter().enumerate().rev() {
                if w.dim() < last.dim() && last.contains(w) {
                    let mut next = chain.clone();
                    next.push(j);
                    stack.push(next);
                }
            }
        }
        out
    }
}

fn check_generators<F: Scalar>(n: usize, gens: &[Matrix<F>]) -> Result<()> {
    for (i, g) in gens.iter().enumerate() {
        if g.rows() != n || g.cols() != n {
            return Err(Error::DimensionMismatch(format!("generator {i} is not {n}x{n}")));
        }
        if !g.is_invertible() {
            return Err(Error::Singular(format!("generator {i}")));
        }
    }
    Ok(())
}

/// Common invariant subspaces of `gens` acting on `F^n`.
///
/// `markers` only matter when the spin backend meets an infinite family of
/// invariant subspaces: representatives are then chosen for each position
/// relative to the markers.
pub fn enumerate_invariant_subspaces<F: Scalar>(
    n: usize,
    gens: &[Matrix<F>],
    backend: Backend,
    markers: &[Subspace<F>],
) -> Result<InvariantLattice<F>> {
    check_generators(n, gens)?;
    let backend = match backend {
        Backend::Auto if F::is_finite_field() && exhaustive_cost::<F>(n) <= EXHAUSTIVE_BUDGET => {
            Backend::ExhaustiveFp
        }
        Backend::Auto => Backend::Spin,
        b => b,
    };
    match backend {
        Backend::ExhaustiveFp => exhaustive(n, gens),
        _ => spin(n, gens, markers),
    }
}

fn exhaustive_cost<F: Scalar>(n: usize) -> u128 {
    (F::characteristic() as u128).saturating_pow(n as u32)
}

fn exhaustive<F: Scalar>(n: usize, gens: &[Matrix<F>]) -> Result<InvariantLattice<F>> {
    if !F::is_finite_field() {
        return Err(Error::Precondition("exhaustive backend needs a finite field".into()));
    }
    let cost = exhaustive_cost::<F>(n);
    if cost > EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded { needed: cost, budget: EXHAUSTIVE_BUDGET });
    }
    let found = all_subspaces::<F>(n)?
        .into_iter()
        .filter(|w| gens.iter().all(|g| w.is_invariant(g)));
    Ok(InvariantLattice::new(n, found, Coverage::Complete))
}

/// Eigenspaces `ker(g - λ)` for the roots `λ` of the characteristic polynomial in `F`.
fn eigenspaces<F: Scalar>(g: &Matrix<F>) -> Result<Option<Vec<Subspace<F>>>> {
    let n = g.rows();
    let chi = characteristic_polynomial(g)?;
    let Some(roots) = F::roots(&chi) else {
        return Ok(None);
    };
    Ok(Some(
        roots
            .into_iter()
            .map(|l| {
                let shifted = g - &Matrix::scalar(n, l);
                Subspace::span(n, &shifted.kernel())
            })
            .collect(),
    ))
}

/// Maximal subspaces on which every generator acts by a scalar, or `None` when an
/// eigenvalue computation was undecidable.
pub fn common_eigenspaces<F: Scalar>(n: usize, gens: &[Matrix<F>]) -> Result<Option<Vec<Subspace<F>>>> {
    let mut spaces = vec![Subspace::full(n)];
    for g in gens {
        let Some(eig) = eigenspaces(g)? else {
            return Ok(None);
        };
        let mut next = Vec::new();
        for s in &spaces {
            for e in &eig {
                let w = s.intersection(e)?;
                if !w.is_zero() {
                    next.push(w);
                }
            }
        }
        spaces = next;
        if spaces.is_empty() {
            break;
        }
    }
    Ok(Some(spaces))
}

/// A vector of `s` outside every listed proper subspace of `s` (moment-curve search).
fn generic_vector<F: Scalar>(s: &Subspace<F>, avoid: &[&Subspace<F>]) -> Option<Vec<F>> {
    let basis = s.basis_vectors();
    let d = basis.len();
    let tries = (avoid.len() + 1) * d.max(1) + 1;
    for k in 0..tries as i64 {
        let kk = F::from_i64(k);
        let mut coeff = F::one();
        let mut v = vec![F::zero(); s.ambient()];
        for b in &basis {
            for (x, y) in v.iter_mut().zip(b) {
                *x = x.clone() + coeff.clone() * y.clone();
            }
            coeff = coeff * kk.clone();
        }
        if avoid.iter().all(|t| !t.contains_vector(&v)) {
            return Some(v);
        }
    }
    None
}

/// Lines of `e`, one per position relative to `markers`; all lines over a finite field.
fn representative_lines<F: Scalar>(e: &Subspace<F>, markers: &[Subspace<F>]) -> Result<(Vec<Subspace<F>>, bool)> {
    let n = e.ambient();
    if e.dim() == 1 {
        return Ok((vec![e.clone()], false));
    }
    if F::is_finite_field() {
        let lines = all_subspaces::<F>(e.dim())?
            .into_iter()
            .filter(|w| w.dim() == 1)
            .map(|w| e.embed(&w))
            .collect();
        return Ok((lines, false));
    }
    let mut members: BTreeSet<Subspace<F>> = BTreeSet::new();
    members.insert(e.clone());
    for m in markers {
        let w = e.intersection(m)?;
        if !w.is_zero() {
            members.insert(w);
        }
    }
    loop {
        let list: Vec<Subspace<F>> = members.iter().cloned().collect();
        let mut added = false;
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let w = a.intersection(b)?;
                if !w.is_zero() && members.insert(w) {
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let mut lines = Vec::new();
    for s in &members {
        if s.dim() == 1 {
            lines.push(s.clone());
            continue;
        }
        let inside: Vec<&Subspace<F>> =
            members.iter().filter(|t| t.dim() < s.dim() && s.contains(t)).collect();
        let v = generic_vector(s, &inside)
            .ok_or_else(|| Error::IncompleteLattice("no generic vector found".into()))?;
        lines.push(Subspace::span(n, &[v]));
    }
    Ok((lines, true))
}

fn spin<F: Scalar>(n: usize, gens: &[Matrix<F>], markers: &[Subspace<F>]) -> Result<InvariantLattice<F>> {
    if n <= 1 {
        return Ok(InvariantLattice::new(n, [], Coverage::Complete));
    }
    if n > 3 {
        return spin_words(n, gens);
    }
    let Some(primal) = common_eigenspaces(n, gens)? else {
        return spin_words(n, gens);
    };
    let mut found = Vec::new();
    let mut infinite = false;
    for e in &primal {
        let (lines, fam) = representative_lines(e, markers)?;
        infinite |= fam;
        found.extend(lines);
    }
    if n == 3 {
        let transposes: Vec<Matrix<F>> = gens.iter().map(Matrix::transpose).collect();
        let Some(dual) = common_eigenspaces(n, &transposes)? else {
            return spin_words(n, gens);
        };
        let dual_markers: Vec<Subspace<F>> = markers.iter().map(Subspace::annihilator).collect();
        for e in &dual {
            let (lines, fam) = representative_lines(e, &dual_markers)?;
            infinite |= fam;
            found.extend(lines.iter().map(Subspace::annihilator));
        }
    }
    let coverage = if infinite { Coverage::Representative } else { Coverage::Complete };
    Ok(InvariantLattice::new(n, found, coverage))
}

/// Smallest invariant subspace containing `v`.
pub fn spin_vector<F: Scalar>(n: usize, gens: &[Matrix<F>], v: &[F]) -> Subspace<F> {
    let mut w = Subspace::span(n, &[v.to_vec()]);
    loop {
        let mut vecs = w.basis_vectors();
        for b in w.basis_vectors() {
            for g in gens {
                vecs.push(g.mul_vec(&b));
            }
        }
        let next = Subspace::span(n, &vecs);
        if next.dim() == w.dim() {
            return w;
        }
        w = next;
    }
}

/// Uncertified search: spin eigenvectors of generators and of words of length ≤ 3.
fn spin_words<F: Scalar>(n: usize, gens: &[Matrix<F>]) -> Result<InvariantLattice<F>> {
    let mut words: Vec<Matrix<F>> = gens.to_vec();
    for a in gens {
        for b in gens {
            words.push(a * b);
            for c in gens {
                words.push(&(a * b) * c);
            }
        }
    }
    let mut found = BTreeSet::new();
    for w in &words {
        if let Some(eig) = eigenspaces(w)? {
            for e in eig {
                for v in e.basis_vectors() {
                    found.insert(spin_vector(n, gens, &v));
                }
            }
        }
    }
    Ok(InvariantLattice::new(n, found, Coverage::Incomplete).meet_join())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Fp, Rational};

    type F3 = Fp<3>;
    type Q = Rational;

    fn q(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| Q::from_integer(x.into())).collect()
    }

    #[test]
    fn identity_over_f3_has_every_subspace() {
        let lat = enumerate_invariant_subspaces::<F3>(2, &[Matrix::identity(2)], Backend::ExhaustiveFp, &[])
            .unwrap();
        assert_eq!(lat.subspaces().len(), 6);
        assert_eq!(lat.coverage(), Coverage::Complete);
    }

    #[test]
    fn worked_generators_over_q() {
        let gens: Vec<Matrix<Q>> = vec![
            Matrix::from_i64(&[[1, 1], [0, 1]]),
            Matrix::from_i64(&[[1, -1], [0, 1]]),
            Matrix::identity(2),
        ];
        let lat = enumerate_invariant_subspaces(2, &gens, Backend::Spin, &[]).unwrap();
        assert_eq!(lat.coverage(), Coverage::Complete);
        let expected = vec![Subspace::zero(2), Subspace::span(2, &[q(&[1, 0])]), Subspace::full(2)];
        assert_eq!(lat.subspaces(), expected.as_slice());
    }

    #[test]
    fn reflection_eigenlines() {
        let gens: Vec<Matrix<Q>> = vec![Matrix::from_i64(&[[0, 1], [1, 0]])];
        let lat = enumerate_invariant_subspaces(2, &gens, Backend::Auto, &[]).unwrap();
        let mut lines: Vec<Subspace<Q>> = lat.proper().cloned().collect();
        lines.sort();
        let mut expected = vec![Subspace::span(2, &[q(&[1, 1])]), Subspace::span(2, &[q(&[1, -1])])];
        expected.sort();
        assert_eq!(lines, expected);
    }

    #[test]
    fn scalar_generators_give_marker_representatives() {
        let gens: Vec<Matrix<Q>> = vec![Matrix::identity(3)];
        let line = Subspace::span(3, &[q(&[1, 0, 0])]);
        let plane = Subspace::span(3, &[q(&[1, 0, 0]), q(&[0, 1, 0])]);
        let lat = enumerate_invariant_subspaces(3, &gens, Backend::Spin, &[line.clone(), plane.clone()])
            .unwrap();
        assert_eq!(lat.coverage(), Coverage::Representative);
        assert!(lat.contains(&line));
        assert!(lat.contains(&plane));
        // a line inside the plane but off the marker line, and a line off the plane
        assert!(lat.proper().any(|w| w.dim() == 1 && plane.contains(w) && *w != line));
        assert!(lat.proper().any(|w| w.dim() == 1 && !plane.contains(w)));
        // a plane through the marker line other than the marker plane
        assert!(lat.proper().any(|w| w.dim() == 2 && w.contains(&line) && *w != plane));
    }

    #[test]
    fn spin_agrees_with_exhaustive_over_f3() {
        let gens: Vec<Matrix<F3>> = vec![Matrix::from_i64(&[[1, 1, 0], [0, 1, 0], [0, 0, 2]])];
        let ex = enumerate_invariant_subspaces(3, &gens, Backend::ExhaustiveFp, &[]).unwrap();
        let sp = enumerate_invariant_subspaces(3, &gens, Backend::Spin, &[]).unwrap();
        assert_eq!(ex.subspaces(), sp.subspaces());
        assert_eq!(ex.meet_join(), ex);
    }

    #[test]
    fn chains_of_a_full_flag() {
        let gens: Vec<Matrix<F3>> = vec![Matrix::from_i64(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]])];
        let lat = enumerate_invariant_subspaces(3, &gens, Backend::Auto, &[]).unwrap();
        assert_eq!(lat.proper().count(), 2);
        // {W2}, {W1}, {W2 ⊃ W1}
        assert_eq!(lat.proper_chains(100).len(), 3);
    }
}
