//! GIT equivalence of semistable quiver points over finite fields.
//!
//! A degree-zero semistable point degenerates, along the cocharacter of a maximal
//! chain of degree-zero invariant subspaces, to a point whose pairing with `χ_θ` is
//! zero. Two points are equivalent when these limits lie in one orbit. The orbit
//! test lets the vertex components at `v_x` range over `P_x`: points with the same
//! filtered local system can differ by a unipotent twist at `v_x` that no element of
//! `L_x` undoes.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flags::{common_adapted_basis, in_standard_parabolic, Flag, GradedCocharacter};
use crate::invariant::Backend;
use crate::iso::intertwiners;
use crate::matrix::Matrix;
use crate::quiver::{king_check, limit, QuiverCocharacter, QuiverPoint};
use crate::scalar::{Rational, Scalar};
use crate::subspace::Subspace;

pub const ORBIT_BUDGET: u128 = 5_000_000;

/// Maximal chain `0 ⊊ W_1 ⊊ ... ⊊ W_k ⊊ V` of degree-zero invariant subspaces, innermost
/// first; each step is the smallest degree-zero invariant subspace above the previous.
pub fn degree_zero_chain<F: Scalar>(
    point: &QuiverPoint<F>,
    weights: &[Vec<Rational>],
    backend: Backend,
) -> Result<Vec<Subspace<F>>> {
    let fls = point.to_fls(weights)?;
    let lattice = fls.invariant_lattice(backend)?;
    lattice.require_complete()?;
    let mut chain: Vec<Subspace<F>> = Vec::new();
    loop {
        let current = chain.last().cloned().unwrap_or_else(|| Subspace::zero(point.rank()));
        let mut next = None;
        for w in lattice.proper() {
            if w.dim() > current.dim() && w.contains(&current) && fls.sub_degree(w)?.is_zero() {
                next = Some(w.clone());
                break;
            }
        }
        match next {
            Some(w) => chain.push(w),
            None => return Ok(chain),
        }
    }
}

/// Limit of `point` along the cocharacter of its maximal degree-zero chain, after
/// re-lifting `c_{x,1}` to a basis adapted to both the flag at `x` and the chain.
pub fn closed_orbit_representative<F: Scalar>(
    point: &QuiverPoint<F>,
    weights: &[Vec<Rational>],
    backend: Backend,
) -> Result<QuiverPoint<F>> {
    let n = point.rank();
    let mut chain = degree_zero_chain(point, weights, backend)?;
    chain.reverse();
    let flag = Flag::from_proper(n, chain)?;
    let k = flag.len() as i64;
    let v0 = GradedCocharacter::from_flag(&flag, &(0..k).rev().collect::<Vec<_>>())?;
    let loops = point.loops();
    let mut c_in = Vec::new();
    let mut c_out = Vec::new();
    let mut vx = Vec::new();
    for (idx, c) in loops.iter().enumerate() {
        let common = common_adapted_basis(&point.flag_at(idx)?, &flag)?;
        let cols: Vec<Vec<F>> = common.iter().map(|t| t.2.clone()).collect();
        let basis = Matrix::from_cols(n, &cols);
        vx.push(GradedCocharacter::diagonal(&common.iter().map(|t| t.1 as i64).collect::<Vec<_>>()));
        c_in.push(basis.inverse()?);
        c_out.push(c * &basis);
    }
    let relifted = point.with_arrows(point.a().to_vec(), point.b().to_vec(), c_in, c_out);
    debug_assert!(relifted.membership().is_some());
    limit(&relifted, &QuiverCocharacter { v0, vx })?
        .ok_or_else(|| Error::LimitDoesNotExist("degree-zero chain cocharacter".into()))
}

/// `(g_{v0}, (g_{v_x}))` with `g_{v_x} ∈ P_x` carrying `p` to `q`, found by running `g_{v0}`
/// through every point of the space of intertwiners of the underlying representations.
pub fn orbit_element<F: Scalar>(
    p: &QuiverPoint<F>,
    q: &QuiverPoint<F>,
    budget: u128,
) -> Result<Option<(Matrix<F>, Vec<Matrix<F>>)>> {
    let elems = F::elements().ok_or_else(|| Error::Precondition("orbit enumeration needs a finite field".into()))?;
    if p.rank() != q.rank() || p.partitions() != q.partitions() || p.presentation() != q.presentation() {
        return Ok(None);
    }
    let gens = |x: &QuiverPoint<F>| -> Vec<Matrix<F>> {
        x.a().iter().chain(x.b()).cloned().chain(x.loops()).collect()
    };
    let basis = intertwiners(&gens(p), &gens(q), &[])?;
    let size = (elems.len() as u128).checked_pow(basis.len() as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    if basis.is_empty() {
        return Ok(None);
    }
    let inv_in: Vec<Matrix<F>> = p.c_in().iter().map(Matrix::inverse).collect::<Result<_>>()?;
    let mut idx = vec![0usize; basis.len()];
    loop {
        let mut g0 = Matrix::zeros(p.rank(), p.rank());
        for (b, &i) in basis.iter().zip(&idx) {
            if !elems[i].is_zero() {
                g0 = &g0 + &b.scale(&elems[i]);
            }
        }
        if g0.is_invertible() {
            let gx: Vec<Matrix<F>> =
                q.c_in().iter().zip(&inv_in).map(|(qi, pi)| &(qi * &g0) * pi).collect();
            if gx.iter().zip(p.partitions()).all(|(g, part)| in_standard_parabolic(part, g)) {
                return Ok(Some((g0, gx)));
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(None);
            }
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Whether two semistable points of the same type have meeting orbit closures.
pub fn git_equivalent<F: Scalar>(
    p: &QuiverPoint<F>,
    q: &QuiverPoint<F>,
    weights: &[Vec<Rational>],
    backend: Backend,
    budget: u128,
) -> Result<bool> {
    if !F::is_finite_field() {
        return Err(Error::Precondition("GIT equivalence is decided over finite fields only".into()));
    }
    for x in [p, q] {
        if !king_check(x, weights, backend)?.verdict.class.is_semistable() {
            return Err(Error::Precondition("GIT equivalence of an unstable point".into()));
        }
    }
    let cp = closed_orbit_representative(p, weights, backend)?;
    let cq = closed_orbit_representative(q, weights, backend)?;
    Ok(orbit_element(&cp, &cq, budget)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::{s_equivalent, FilteredLocalSystem, WeightedFlag};
    use crate::quiver::{pairing, rep_to_point, ChiTheta, GaugeElement};
    use crate::scalar::{rational, Fp};
    use crate::surface::{SurfacePresentation, SurfaceRep};

    type F5 = Fp<5>;

    fn f5(rows: &[[i64; 2]; 2]) -> Matrix<F5> {
        Matrix::from_i64(rows)
    }

    fn weights() -> Vec<Vec<Rational>> {
        vec![vec![Rational::zero()]]
    }

    /// Genus one, one puncture, trivial flag: `a` fixes `e1`, `b` acts on it by a scalar.
    fn extension(u: i64) -> FilteredLocalSystem<F5> {
        // a = [[1, u], [0, 1]], b = [[2, 0], [0, 2]] commute, so c = 1
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(1, 1),
            2,
            vec![f5(&[[1, u], [0, 1]])],
            vec![f5(&[[2, 0], [0, 2]])],
            vec![Matrix::identity(2)],
        )
        .unwrap();
        FilteredLocalSystem::with_trivial_weights(rep)
    }

    #[test]
    fn split_and_nonsplit_extensions_are_equivalent() {
        let split = rep_to_point(&extension(0)).unwrap();
        let nonsplit = rep_to_point(&extension(1)).unwrap();
        let w = weights();
        assert!(git_equivalent(&split, &nonsplit, &w, Backend::Auto, ORBIT_BUDGET).unwrap());
        assert!(s_equivalent(&extension(0), &extension(1), Backend::Auto).unwrap());
        // the limit of the non-split point is the split one up to orbit
        let lim = closed_orbit_representative(&nonsplit, &w, Backend::Auto).unwrap();
        assert!(orbit_element(&lim, &split, ORBIT_BUDGET).unwrap().is_some());
        let mu = crate::quiver::chain_cocharacter(&nonsplit, &[Subspace::coordinate(2, [0])]).unwrap();
        assert_eq!(pairing(&mu, &ChiTheta::new(&w, nonsplit.partitions()).unwrap()).unwrap(), 0);
    }

    #[test]
    fn different_graded_pieces_are_not_equivalent() {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(1, 1),
            2,
            vec![f5(&[[1, 0], [0, 1]])],
            vec![f5(&[[3, 0], [0, 2]])],
            vec![Matrix::identity(2)],
        )
        .unwrap();
        let other = rep_to_point(&FilteredLocalSystem::with_trivial_weights(rep)).unwrap();
        let split = rep_to_point(&extension(0)).unwrap();
        assert!(!git_equivalent(&split, &other, &weights(), Backend::Auto, ORBIT_BUDGET).unwrap());
    }

    #[test]
    fn gauge_copies_are_equivalent() {
        let p = rep_to_point(&extension(1)).unwrap();
        let g = GaugeElement { g0: f5(&[[1, 2], [3, 4]]), gx: vec![Matrix::scalar(2, F5::new(3))] };
        let q = g.act(&p).unwrap();
        assert!(git_equivalent(&p, &q, &weights(), Backend::Auto, ORBIT_BUDGET).unwrap());
    }

    #[test]
    fn unipotent_twist_leaves_the_levi_orbit() {
        // same filtered local system, c_{x1,1} twisted by an element of U_x
        let pres = SurfacePresentation::with_labels(0, 2);
        let d = Matrix::diagonal(&[F5::new(2), F5::new(3)]);
        let rep = SurfaceRep::new(pres, 2, vec![], vec![], vec![d.clone(), d.inverse().unwrap()]).unwrap();
        let wf = |s| WeightedFlag::standard(&[1, 1], vec![rational(s, 3), rational(-s, 3)]).unwrap();
        let fls = FilteredLocalSystem::new(rep, vec![wf(1), wf(-1)]).unwrap();
        let p = rep_to_point(&fls).unwrap();
        let u = f5(&[[1, 1], [0, 1]]);
        let twist = GaugeElement { g0: Matrix::identity(2), gx: vec![u, Matrix::identity(2)] };
        let q = twist.act_unchecked(&p).unwrap();
        let w = [vec![rational(1, 3), rational(-1, 3)], vec![rational(-1, 3), rational(1, 3)]];
        assert_eq!(q.to_fls(&w).unwrap(), fls);
        // no (g0, torus, torus) carries p to q
        let elems = F5::elements().unwrap();
        for a in &elems {
            for b in &elems {
                for c in &elems {
                    for e in &elems {
                        let g0 = Matrix::from_vec(2, 2, vec![*a, *b, *c, *e]);
                        if !g0.is_invertible() {
                            continue;
                        }
                        let gx: Vec<Matrix<F5>> =
                            q.c_in().iter().zip(p.c_in()).map(|(qi, pi)| &(qi * &g0) * &pi.inverse().unwrap()).collect();
                        let g = GaugeElement { g0, gx };
                        if g.is_in_levis(p.partitions()) {
                            assert_ne!(g.act(&p).unwrap(), q);
                        }
                    }
                }
            }
        }
        // but the orbit test with P_x-valued components relates them
        assert!(orbit_element(&p, &q, ORBIT_BUDGET).unwrap().is_some());
    }
}
