//! Characteristic polynomials, invariant factors and rational canonical form.
//!
//! Invariant factors come from the Smith normal form of `xI - A` over `F[x]`.
//! Two square matrices are conjugate over `F` iff their invariant factors agree.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Monic invariant factors `f_1 | f_2 | ... | f_k` of degree ≥ 1; their product is
/// the characteristic polynomial.
pub fn invariant_factors<F: Scalar>(a: &Matrix<F>) -> Result<Vec<Poly<F>>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut m: Vec<Vec<Poly<F>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = Poly::constant(-a.get(i, j).clone());
                    if i == j {
                        c.add(&Poly::x())
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();

    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        loop {
            // pivot of least degree in the trailing block
            let mut best: Option<(usize, usize, usize)> = None;
            for (i, row) in m.iter().enumerate().skip(k) {
                for (j, p) in row.iter().enumerate().skip(k) {
                    if let Some(d) = p.degree() {
                        if best.is_none_or(|(_, _, bd)| d < bd) {
                            best = Some((i, j, d));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                // trailing block is zero; cannot happen for xI - A
                return Err(Error::Singular("characteristic matrix lost rank".into()));
            };
            m.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            let pivot = m[k][k].clone();
            let mut clean = true;
            for i in k + 1..n {
                let (q, r) = m[i][k].div_rem(&pivot);
                if !q.is_zero() {
                    for j in k..n {
                        let t = m[k][j].mul(&q);
                        m[i][j] = m[i][j].sub(&t);
                    }
                }
                if !r.is_zero() {
                    clean = false;
                }
            }
            for j in k + 1..n {
                let (q, r) = m[k][j].div_rem(&pivot);
                if !q.is_zero() {
                    for row in m.iter_mut().skip(k) {
                        let t = row[k].mul(&q);
                        row[j] = row[j].sub(&t);
                    }
                }
                if !r.is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let mut offender = None;
            'scan: for i in k + 1..n {
                for j in k + 1..n {
                    if !m[i][j].div_rem(&pivot).1.is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    for j in k..n {
                        let t = m[i][j].clone();
                        m[k][j] = m[k][j].add(&t);
                    }
                }
                None => break,
            }
        }
        diag.push(m[k][k].monic());
    }
    Ok(diag.into_iter().filter(|p| p.degree().unwrap_or(0) >= 1).collect())
}

pub fn characteristic_polynomial<F: Scalar>(a: &Matrix<F>) -> Result<Poly<F>> {
    Ok(invariant_factors(a)?.iter().fold(Poly::one(), |acc, f| acc.mul(f)))
}

/// Minimal polynomial (the largest invariant factor).
pub fn minimal_polynomial<F: Scalar>(a: &Matrix<F>) -> Result<Poly<F>> {
    Ok(invariant_factors(a)?.pop().unwrap_or_else(Poly::one))
}

/// Companion matrix of a monic polynomial, with ones on the subdiagonal.
pub fn companion<F: Scalar>(p: &Poly<F>) -> Matrix<F> {
    let d = p.degree().unwrap_or(0);
    let mut m = Matrix::zeros(d, d);
    for i in 1..d {
        m.set(i, i - 1, F::one());
    }
    for i in 0..d {
        m.set(i, d - 1, -p.coeffs()[i].clone());
    }
    m
}

/// Rational canonical form: block diagonal of companion matrices of the invariant factors.
pub fn rational_canonical_form<F: Scalar>(a: &Matrix<F>) -> Result<Matrix<F>> {
    let blocks: Vec<Matrix<F>> = invariant_factors(a)?.iter().map(companion).collect();
    if blocks.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    Ok(Matrix::block_diag(&blocks))
}

pub fn are_conjugate<F: Scalar>(a: &Matrix<F>, b: &Matrix<F>) -> Result<bool> {
    if a.rows() != b.rows() {
        return Ok(false);
    }
    Ok(invariant_factors(a)? == invariant_factors(b)?)
}
