//! Isomorphism of filtered local systems by linear algebra on intertwiners.
//!
//! Intertwiners `X` with `X ρ_1(γ) = ρ_2(γ) X` and `X(L^1_{x,i}) ⊆ L^2_{x,i}` form a
//! linear space. An invertible member exists iff `det(Σ c_j X_j)` is a nonzero
//! polynomial; it has degree at most `n` in each `c_j`, so it is nonzero iff it is
//! nonzero somewhere on the grid `{0, ..., n}^k` (needs `char = 0` or `char > n`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filtered::FilteredLocalSystem;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::subspace::Subspace;

pub const SEARCH_BUDGET: u128 = 2_000_000;

/// Basis of `{X : X A_j = B_j X for all j}` (`X` is `m × n`, `A_j` is `n × n`,
/// `B_j` is `m × m`), with extra constraints `X(S_i) ⊆ T_i`.
pub fn intertwiners<F: Scalar>(
    a: &[Matrix<F>],
    b: &[Matrix<F>],
    subspace_pairs: &[(&Subspace<F>, &Subspace<F>)],
) -> Result<Vec<Matrix<F>>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch("generator lists differ in length".into()));
    }
    let n = a.first().map(Matrix::rows).or(subspace_pairs.first().map(|p| p.0.ambient())).unwrap_or(0);
    let m = b.first().map(Matrix::rows).or(subspace_pairs.first().map(|p| p.1.ambient())).unwrap_or(0);
    let var = |r: usize, c: usize| r * n + c;
    let mut rows: Vec<Vec<F>> = Vec::new();
    for (ma, mb) in a.iter().zip(b) {
        for r in 0..m {
            for c in 0..n {
                let mut eq = vec![F::zero(); m * n];
                for k in 0..n {
                    eq[var(r, k)] = eq[var(r, k)].clone() + ma.get(k, c).clone();
                }
                for k in 0..m {
                    eq[var(k, c)] = eq[var(k, c)].clone() - mb.get(r, k).clone();
                }
                rows.push(eq);
            }
        }
    }
    for (s, t) in subspace_pairs {
        let ann = t.annihilator();
        for v in s.basis_vectors() {
            for f in ann.basis_vectors() {
                let mut eq = vec![F::zero(); m * n];
                for r in 0..m {
                    for c in 0..n {
                        eq[var(r, c)] = f[r].clone() * v[c].clone();
                    }
                }
                rows.push(eq);
            }
        }
    }
    if rows.is_empty() {
        rows.push(vec![F::zero(); m * n]);
    }
    let sys = Matrix::from_rows(m * n, rows);
    Ok(sys.kernel().into_iter().map(|v| Matrix::from_vec(m, n, v)).collect())
}

fn combine<F: Scalar>(basis: &[Matrix<F>], coeffs: &[F]) -> Matrix<F> {
    let mut out = Matrix::zeros(basis[0].rows(), basis[0].cols());
    for (x, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            out = &out + &x.scale(c);
        }
    }
    out
}

/// An invertible element of the span of `basis`, or `None` when none exists.
pub fn invertible_in_span<F: Scalar>(basis: &[Matrix<F>], budget: u128) -> Result<Option<Matrix<F>>> {
    let Some(first) = basis.first() else { return Ok(None) };
    if !first.is_square() {
        return Ok(None);
    }
    let n = first.rows();
    if let Some(x) = basis.iter().find(|x| x.is_invertible()) {
        return Ok(Some(x.clone()));
    }
    let k = basis.len();
    let grid: Vec<F> = if F::characteristic() == 0 || F::characteristic() > n as u64 {
        (0..=n as i64).map(F::from_i64).collect()
    } else {
        F::elements().expect("finite field")
    };
    // cheap random probes before the certified sweep
    let mut rng = ChaCha8Rng::seed_from_u64(0x15);
    let pool: Vec<F> = F::elements().unwrap_or_else(|| (-50..=50).map(F::from_i64).collect());
    for _ in 0..24 {
        let coeffs: Vec<F> = (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let x = combine(basis, &coeffs);
        if x.is_invertible() {
            return Ok(Some(x));
        }
    }
    let size = (grid.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    let mut idx = vec![0usize; k];
    loop {
        let coeffs: Vec<F> = idx.iter().map(|&i| grid[i].clone()).collect();
        let x = combine(basis, &coeffs);
        if x.is_invertible() {
            return Ok(Some(x));
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(None);
            }
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `X` with `X ρ_1 X^{-1} = ρ_2` carrying each weighted flag of `f1` onto that of `f2`.
pub fn isomorphism<F: Scalar>(
    f1: &FilteredLocalSystem<F>,
    f2: &FilteredLocalSystem<F>,
) -> Result<Option<Matrix<F>>> {
    if f1.rank() != f2.rank() || f1.rep().presentation() != f2.rep().presentation() {
        return Ok(None);
    }
    for (w1, w2) in f1.flags().iter().zip(f2.flags()) {
        if w1.weights() != w2.weights() || w1.partition() != w2.partition() {
            return Ok(None);
        }
    }
    if f1.rank() == 0 {
        return Ok(Some(Matrix::zeros(0, 0)));
    }
    let pairs: Vec<(&Subspace<F>, &Subspace<F>)> = f1
        .flags()
        .iter()
        .zip(f2.flags())
        .flat_map(|(w1, w2)| w1.flag().proper_steps().iter().zip(w2.flag().proper_steps()))
        .collect();
    let basis = intertwiners(&f1.rep().generators(), &f2.rep().generators(), &pairs)?;
    invertible_in_span(&basis, SEARCH_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtered::WeightedFlag;
    use crate::scalar::{rational, Fp, Rational};
    use crate::surface::{SurfacePresentation, SurfaceRep};

    type Q = Rational;
    type F5 = Fp<5>;

    fn unipotent_fls<F: Scalar>(weights: bool) -> FilteredLocalSystem<F> {
        let rep = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 2),
            2,
            vec![],
            vec![],
            vec![Matrix::from_i64(&[[1, 1], [0, 1]]), Matrix::from_i64(&[[1, -1], [0, 1]])],
        )
        .unwrap();
        if weights {
            let wf = |s| WeightedFlag::standard(&[1, 1], vec![rational(s, 3), rational(-s, 3)]).unwrap();
            FilteredLocalSystem::new(rep, vec![wf(1), wf(-1)]).unwrap()
        } else {
            FilteredLocalSystem::with_trivial_weights(rep)
        }
    }

    #[test]
    fn conjugated_copy_is_isomorphic() {
        let f = unipotent_fls::<Q>(true);
        let g = Matrix::from_i64(&[[2, 1], [1, 1]]);
        let h = f.conjugate(&g).unwrap();
        let x = isomorphism(&f, &h).unwrap().expect("isomorphic");
        let xi = x.inverse().unwrap();
        for (a, b) in f.rep().generators().iter().zip(h.rep().generators()) {
            assert_eq!(&(&x * a) * &xi, b);
        }
    }

    #[test]
    fn unipotent_not_isomorphic_to_identity() {
        let f = unipotent_fls::<F5>(false);
        let id = SurfaceRep::new(
            SurfacePresentation::with_labels(0, 2),
            2,
            vec![],
            vec![],
            vec![Matrix::identity(2), Matrix::identity(2)],
        )
        .unwrap();
        let triv = FilteredLocalSystem::with_trivial_weights(id);
        assert!(isomorphism(&f, &triv).unwrap().is_none());
    }

    #[test]
    fn weights_must_match() {
        let f = unipotent_fls::<Q>(true);
        let g = unipotent_fls::<Q>(false);
        assert!(isomorphism(&f, &g).unwrap().is_none());
    }

    #[test]
    fn span_search_certifies_absence() {
        // nilpotent span: [[0, a], [0, 0]]
        let basis = vec![Matrix::<F5>::from_i64(&[[0, 1], [0, 0]])];
        assert!(invertible_in_span(&basis, SEARCH_BUDGET).unwrap().is_none());
        // diag(a, b): needs both coefficients nonzero
        let basis = vec![Matrix::<F5>::from_i64(&[[1, 0], [0, 0]]), Matrix::from_i64(&[[0, 0], [0, 1]])];
        assert!(invertible_in_span(&basis, SEARCH_BUDGET).unwrap().is_some());
    }
}
