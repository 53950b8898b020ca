//! Fixed Levi monodromy: the Levi factor of the monodromy at each `v_x` and the
//! locus where it matches a prescribed element up to conjugacy in the Levi.

use serde_json::{Map, Value};

use crate::canonical::are_conjugate;
use crate::error::{Error, Result};
use crate::flags::{from_standard_blocks, standard_blocks};
use crate::matrix::Matrix;
use crate::quiver::QuiverPoint;
use crate::scalar::{Rational, Scalar};

/// Per puncture, the diagonal blocks of `M_x` (top piece first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyDatum<F: Scalar> {
    pub blocks: Vec<Vec<Matrix<F>>>,
}

impl<F: Scalar> MonodromyDatum<F> {
    pub fn new(blocks: Vec<Vec<Matrix<F>>>) -> Result<Self> {
        for bs in &blocks {
            for b in bs {
                if !b.is_square() {
                    return Err(Error::NotSquare { rows: b.rows(), cols: b.cols() });
                }
                if !b.is_invertible() {
                    return Err(Error::Singular("Levi block".into()));
                }
            }
        }
        Ok(MonodromyDatum { blocks })
    }

    pub fn identity(partitions: &[Vec<usize>]) -> Self {
        MonodromyDatum { blocks: partitions.iter().map(|p| p.iter().map(|&l| Matrix::identity(l)).collect()).collect() }
    }

    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|bs| bs.iter().map(Matrix::rows).collect()).collect()
    }

    /// `M_x` as a block-diagonal matrix in standard coordinates.
    pub fn element(&self, k: usize) -> Matrix<F> {
        from_standard_blocks(&self.blocks[k])
    }

    pub fn to_json(&self, labels: &[String]) -> Value {
        let mut m = Map::new();
        for (label, bs) in labels.iter().zip(&self.blocks) {
            let blocks: Vec<Value> = bs.iter().map(Matrix::to_json).collect();
            m.insert(label.clone(), serde_json::json!({ "blocks": blocks }));
        }
        Value::Object(m)
    }

    /// `{"x1": {"blocks": [...]}, ...}` read in the order of `labels`.
    pub fn from_json(v: &Value, labels: &[String]) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("monodromy datum must be an object".into()))?;
        let mut blocks = Vec::new();
        for label in labels {
            let entry = obj.get(label).ok_or_else(|| Error::Parse(format!("missing puncture {label}")))?;
            let list = entry
                .get("blocks")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("{label}: expected \"blocks\"")))?;
            blocks.push(list.iter().map(Matrix::from_json).collect::<Result<Vec<_>>>()?);
        }
        if obj.len() != labels.len() {
            return Err(Error::Parse("monodromy datum has unknown punctures".into()));
        }
        Self::new(blocks)
    }
}

fn check_gamma<F: Scalar>(point: &QuiverPoint<F>, gamma: &[Vec<Rational>]) -> Result<()> {
    if gamma.len() != point.partitions().len() {
        return Err(Error::DimensionMismatch("one weight list per puncture".into()));
    }
    for (g, p) in gamma.iter().zip(point.partitions()) {
        if g.len() != p.len() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} flag pieces", g.len(), p.len())));
        }
        if g.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Precondition("weights must be strictly decreasing".into()));
        }
    }
    Ok(())
}

/// Levi factor of `g_x c_{x,2} c_{x,1} g_x^{-1} = c_{x,1} c_{x,2}` (witness `g_x = c_{x,1}`),
/// as blocks top piece first.
pub fn levi_monodromy_map<F: Scalar>(point: &QuiverPoint<F>, gamma: &[Vec<Rational>]) -> Result<Vec<Vec<Matrix<F>>>> {
    check_gamma(point, gamma)?;
    if point.membership().is_none() {
        return Err(Error::Precondition("point is not in the parabolic membership locus".into()));
    }
    Ok(point
        .c_in()
        .iter()
        .zip(point.c_out())
        .zip(point.partitions())
        .map(|((i, o), p)| standard_blocks(p, &(i * o)))
        .collect())
}

/// Levi monodromy matches `m` blockwise, up to conjugacy or (when `strict`) on the nose.
pub fn in_betti_locus<F: Scalar>(
    point: &QuiverPoint<F>,
    gamma: &[Vec<Rational>],
    m: &MonodromyDatum<F>,
    strict: bool,
) -> Result<bool> {
    if m.partitions() != point.partitions() {
        return Ok(false);
    }
    let levi = match levi_monodromy_map(point, gamma) {
        Ok(l) => l,
        Err(Error::Precondition(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    for (have, want) in levi.iter().zip(&m.blocks) {
        for (a, b) in have.iter().zip(want) {
            let ok = if strict { a == b } else { are_conjugate(a, b)? };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
