//! Univariate polynomials over a [`Scalar`] field.

use std::fmt;


use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Dense polynomial, coefficients from the constant term upward, never with a
/// trailing zero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly<F: Scalar> {
    coeffs: Vec<F>,
}

impl<F: Scalar> Poly<F> {
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        Poly::new(vec![c])
    }

    /// `x - root`.
    pub fn linear(root: F) -> Self {
        Poly::new(vec![-root, F::one()])
    }

    pub fn x() -> Self {
        Poly::new(vec![F::zero(), F::one()])
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.last()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) => {
                let inv = lc.inverse().expect("nonzero leading coefficient");
                Poly::new(self.coeffs.iter().map(|c| c.clone() * inv.clone()).collect())
            }
        }
    }

    pub fn scale(&self, s: &F) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(F::zero);
                let b = other.coeffs.get(i).cloned().unwrap_or_else(F::zero);
                a + b
            })
            .collect();
        Poly::new(c)
    }

    pub fn neg(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![F::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(c)
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lc_inv = d.leading().unwrap().inverse().unwrap();
        let mut r = self.coeffs.clone();
        let mut q = vec![F::zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let coef = r.last().unwrap().clone() * lc_inv.clone();
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[shift + i] = r[shift + i].clone() - coef.clone() * dc.clone();
            }
            q[shift] = coef;
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, m: &Matrix<F>) -> Matrix<F> {
        let n = m.rows();
        let mut acc = Matrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * m) + &Matrix::identity(n).scale(c);
        }
        acc
    }
}

impl<F: Scalar> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "x")?,
                1 => write!(f, "({c})x")?,
                _ if c.is_one() => write!(f, "x^{i}")?,
                _ => write!(f, "({c})x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Fp, Rational};
    use num_traits::{One, Zero};

    #[test]
    fn division_and_gcd() {
        // (x-1)(x-2) and (x-1)(x+3)
        let a = Poly::linear(rational(1, 1)).mul(&Poly::linear(rational(2, 1)));
        let b = Poly::linear(rational(1, 1)).mul(&Poly::linear(rational(-3, 1)));
        assert_eq!(a.gcd(&b), Poly::linear(rational(1, 1)));
        let (q, r) = a.div_rem(&Poly::linear(rational(2, 1)));
        assert_eq!(q, Poly::linear(rational(1, 1)));
        assert!(r.is_zero());
    }

    #[test]
    fn finite_field_roots() {
        type F7 = Fp<7>;
        // x^2 - 2 over F7: 3^2 = 9 = 2, 4^2 = 16 = 2
        let p = Poly::new(vec![F7::new(-2), F7::zero(), F7::one()]);
        assert_eq!(F7::roots(&p).unwrap(), vec![F7::new(3), F7::new(4)]);
    }

    #[test]
    fn matrix_evaluation_is_cayley_hamilton_consistent() {
        let m = Matrix::from_i64(&[[1, 1], [0, 1]]);
        // (x-1)^2 annihilates the Jordan block
        let p: Poly<Rational> = Poly::linear(rational(1, 1)).mul(&Poly::linear(rational(1, 1)));
        assert!(p.eval_matrix(&m).is_zero());
    }
}
