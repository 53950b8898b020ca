//! Dense matrices over a [`Scalar`] field with exact elimination.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix. Vectors are columns (`Vec<F>` of length `rows`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<F: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    pub fn scalar(n: usize, s: F) -> Self {
        Matrix::identity(n).scale(&s)
    }

    pub fn diagonal(entries: &[F]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// Builds from row vectors. All rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols, data }
    }

    /// Builds from column vectors of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<F>]) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, v) in c.iter().enumerate() {
                m.data[i * cols.len() + j] = v.clone();
            }
        }
        m
    }

    pub fn from_i64<const C: usize>(rows: &[[i64; C]]) -> Self {
        Matrix::from_rows(
            C,
            rows.iter().map(|r| r.iter().map(|&v| F::from_i64(v)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &F {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, r: usize) -> Vec<F> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn col_vecs(&self) -> Vec<Vec<F>> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &F) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.clone() * s.clone()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.rows)
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|r| {
                let mut acc = F::zero();
                for (c, x) in v.iter().enumerate() {
                    let a = self.get(r, c);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    /// Submatrix of the given row and column index ranges.
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let cw = cols.len();
        let mut m = Matrix::zeros(rows.len(), cw);
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                m.data[i * cw + j] = self.get(r, c).clone();
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c).clone());
            }
        }
    }

    pub fn block_diag(blocks: &[Self]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(n, m);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "stack width");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Horizontal concatenation.
    pub fn augment(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "augment height");
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, other);
        m
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref_with_pivots(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inverse().expect("nonzero pivot");
            for c in col..m.cols {
                let v = m.get(row, c).clone() * inv.clone();
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = m.get(r, c).clone() - f.clone() * m.get(row, c).clone();
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rref(&self) -> Self {
        self.rref_with_pivots().0
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Basis of the right kernel `{v : self * v = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref_with_pivots();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f).clone();
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<F> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = F::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Ok(F::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let piv = m.get(col, col).clone();
            det = det * piv.clone();
            let inv = piv.inverse().expect("nonzero pivot");
            for r in col + 1..n {
                let f = m.get(r, col).clone() * inv.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c).clone() - f.clone() * m.get(col, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let (r, pivots) = self.augment(&Matrix::identity(n)).rref_with_pivots();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular(format!("{n}x{n} matrix has rank {}", self.rank())));
        }
        Ok(r.submatrix(0..n, n..2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// `g * self * g^{-1}`.
    pub fn conjugate_by(&self, g: &Self) -> Result<Self> {
        Ok(&(g * self) * &g.inverse()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|r| Value::Array(self.row(r).iter().map(F::to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let mut out = Vec::with_capacity(rows.len());
        let mut width = None;
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
            let parsed: Vec<F> = row.iter().map(F::from_json).collect::<Result<_>>()?;
            match width {
                None => width = Some(parsed.len()),
                Some(w) if w != parsed.len() => {
                    return Err(Error::Parse("ragged matrix rows".into()));
                }
                _ => {}
            }
            out.push(parsed);
        }
        Ok(Matrix::from_rows(width.unwrap_or(0), out))
    }

    /// Maps every entry into another field.
    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(f).collect())
    }
}

impl<F: Scalar> fmt::Display for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<F: Scalar> Mul for &Matrix<F> {
    type Output = Matrix<F>;
    fn mul(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimensions");
        let mut out: Matrix<F> = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * rhs.cols + c;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }
}

impl<F: Scalar> Add for &Matrix<F> {
    type Output = Matrix<F>;
    fn add(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum dimensions");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<F: Scalar> Sub for &Matrix<F> {
    type Output = Matrix<F>;
    fn sub(self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference dimensions");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<F: Scalar> Neg for &Matrix<F> {
    type Output = Matrix<F>;
    fn neg(self) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a.clone()).collect(),
        }
    }
}

/// Ordered product of a list of square matrices of size `n`.
pub fn product<'a, F: Scalar>(n: usize, ms: impl IntoIterator<Item = &'a Matrix<F>>) -> Matrix<F> {
    ms.into_iter().fold(Matrix::identity(n), |acc, m| &acc * m)
}

/// `a b a^{-1} b^{-1}`.
pub fn commutator<F: Scalar>(a: &Matrix<F>, b: &Matrix<F>) -> Result<Matrix<F>> {
    Ok(&(&(a * b) * &a.inverse()?) * &b.inverse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Fp, Rational};
    use num_traits::Zero;

    type F5 = Fp<5>;

    #[test]
    fn rref_examples() {
        let id: Matrix<Rational> = Matrix::identity(2);
        assert_eq!(id.rref(), id);
        let m: Matrix<Rational> = Matrix::from_i64(&[[1, 1], [0, 1]]);
        assert_eq!(m.rref(), id);
        assert_eq!(m.rank(), 2);
        let s: Matrix<Rational> = Matrix::from_i64(&[[1, 2, 3], [2, 4, 6], [1, 0, 1]]);
        assert_eq!(s.rank(), 2);
        assert_eq!(s.rref(), Matrix::from_i64(&[[1, 0, 1], [0, 1, 1], [0, 0, 0]]));
    }

    #[test]
    fn kernel_and_inverse() {
        let s: Matrix<Rational> = Matrix::from_i64(&[[1, 2, 3], [2, 4, 6]]);
        let k = s.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(s.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        let m: Matrix<Rational> = Matrix::from_i64(&[[2, 1], [7, 4]]);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert_eq!(m.determinant().unwrap(), rational(1, 1));
        let sing: Matrix<F5> = Matrix::from_i64(&[[1, 2], [2, 4]]);
        assert!(sing.inverse().is_err());
        assert_eq!(sing.determinant().unwrap(), F5::new(0));
    }

    #[test]
    fn json_round_trip() {
        let m: Matrix<Rational> = Matrix::from_rows(
            2,
            vec![vec![rational(1, 2), rational(-3, 1)], vec![rational(0, 1), rational(5, 7)]],
        );
        let j = m.to_json();
        assert_eq!(j, serde_json::json!([["1/2", "-3"], ["0", "5/7"]]));
        assert_eq!(Matrix::<Rational>::from_json(&j).unwrap(), m);
        assert!(Matrix::<Rational>::from_json(&serde_json::json!([["1"], ["1", "2"]])).is_err());
    }

    #[test]
    fn commutator_of_commuting_pair_is_identity() {
        let a: Matrix<F5> = Matrix::from_i64(&[[2, 0], [0, 3]]);
        let b: Matrix<F5> = Matrix::from_i64(&[[4, 0], [0, 1]]);
        assert!(commutator(&a, &b).unwrap().is_identity());
    }
}
