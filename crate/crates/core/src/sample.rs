//! Seeded random instances and exhaustive slices over small prime fields.
//!
//! Representations are drawn with every generator random except `c` at the last
//! puncture, which is solved from the relation. Flags at the other punctures are
//! random conjugates of the standard flag with parabolic monodromy; at the last
//! puncture a flag is grown from eigenlines of the solved monodromy, and the draw is
//! rejected when its characteristic polynomial does not split far enough.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::characteristic_polynomial;
use crate::error::{Error, Result};
use crate::filtered::{FilteredLocalSystem, WeightedFlag};
use crate::flags::{block_ranges, in_standard_parabolic, Flag};
use crate::matrix::Matrix;
use crate::quiver::{GaugeElement, QuiverPoint};
use crate::scalar::{Rational, Scalar};
use crate::subspace::Subspace;
use crate::surface::{relation_product, SurfacePresentation, SurfaceRep};

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform over a finite field, integers in `[-3, 3]` over `Q`.
pub fn random_scalar<F: Scalar>(rng: &mut Rng64) -> F {
    match F::characteristic() {
        0 => F::from_i64(rng.gen_range(-3..=3)),
        p => F::from_i64(rng.gen_range(0..p as i64)),
    }
}

pub fn random_nonzero<F: Scalar>(rng: &mut Rng64) -> F {
    loop {
        let x: F = random_scalar(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_matrix<F: Scalar>(rows: usize, cols: usize, rng: &mut Rng64) -> Matrix<F> {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| random_scalar(rng)).collect())
}

pub fn random_invertible<F: Scalar>(n: usize, rng: &mut Rng64) -> Matrix<F> {
    loop {
        let m = random_matrix(n, n, rng);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Invertible element of the standard parabolic of `partition`.
pub fn random_parabolic<F: Scalar>(partition: &[usize], rng: &mut Rng64) -> Matrix<F> {
    let n: usize = partition.iter().sum();
    let ranges = block_ranges(partition);
    let mut m = Matrix::zeros(n, n);
    for (i, ri) in ranges.iter().enumerate() {
        m.set_block(ri.start, ri.start, &random_invertible(ri.len(), rng));
        // deeper pieces sit in earlier coordinates: fill the block above the diagonal
        for rj in &ranges[i + 1..] {
            m.set_block(rj.start, ri.start, &random_matrix(rj.len(), ri.len(), rng));
        }
    }
    debug_assert!(in_standard_parabolic(partition, &m));
    m
}

/// Invertible block-diagonal element of the standard Levi of `partition`.
pub fn random_levi<F: Scalar>(partition: &[usize], rng: &mut Rng64) -> Matrix<F> {
    let n: usize = partition.iter().sum();
    let mut m = Matrix::zeros(n, n);
    for r in block_ranges(partition) {
        m.set_block(r.start, r.start, &random_invertible(r.len(), rng));
    }
    m
}

/// Random representation, the last `c` solved from the relation.
pub fn random_rep<F: Scalar>(presentation: &SurfacePresentation, n: usize, rng: &mut Rng64) -> Result<SurfaceRep<F>> {
    let k = presentation.punctures().len();
    if k == 0 {
        return Err(Error::Precondition("sampling needs at least one puncture".into()));
    }
    let g = presentation.genus();
    let a: Vec<Matrix<F>> = (0..g).map(|_| random_invertible(n, rng)).collect();
    let b: Vec<Matrix<F>> = (0..g).map(|_| random_invertible(n, rng)).collect();
    let mut c: Vec<Matrix<F>> = (0..k - 1).map(|_| random_invertible(n, rng)).collect();
    let prod = relation_product(n, &a, &b, &c)?;
    c.push(prod.inverse()?);
    SurfaceRep::new(presentation.clone(), n, a, b, c)
}

/// A full flag stabilized by `c`, grown one eigenline at a time (deepest first), or
/// `None` when some quotient has no eigenvalue in the field.
pub fn stable_full_flag<F: Scalar>(c: &Matrix<F>, rng: &mut Rng64) -> Result<Option<Vec<Subspace<F>>>> {
    let n = c.rows();
    let Some(roots) = F::roots(&characteristic_polynomial(c)?) else {
        return Ok(None);
    };
    let mut steps: Vec<Subspace<F>> = Vec::new();
    let mut w = Subspace::zero(n);
    while w.dim() < n {
        let mut found = None;
        let mut order: Vec<usize> = (0..roots.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        for &ri in &order {
            let shifted = c - &Matrix::scalar(n, roots[ri].clone());
            // v with (c - λ)v ∈ w
            let rows: Vec<Vec<F>> = (0..n).map(|j| w.quotient_coordinates(&shifted.col(j))).collect();
            let q = Matrix::from_rows(n - w.dim(), rows).transpose();
            let kernel = q.kernel();
            let candidates: Vec<Vec<F>> = kernel.into_iter().filter(|v| !w.contains_vector(v)).collect();
            if candidates.is_empty() {
                continue;
            }
            let mut v = candidates[rng.gen_range(0..candidates.len())].clone();
            for other in &candidates {
                let s: F = random_scalar(rng);
                let mixed: Vec<F> = v.iter().zip(other).map(|(x, y)| x.clone() + s.clone() * y.clone()).collect();
                if !w.contains_vector(&mixed) {
                    v = mixed;
                }
            }
            found = Some(v);
            break;
        }
        let Some(v) = found else { return Ok(None) };
        let mut basis = w.basis_vectors();
        basis.push(v);
        w = Subspace::span(n, &basis);
        steps.push(w.clone());
    }
    Ok(Some(steps))
}

/// Flag of type `partition` stabilized by `c`, coarsened from a stable full flag.
pub fn stable_flag<F: Scalar>(c: &Matrix<F>, partition: &[usize], rng: &mut Rng64) -> Result<Option<Flag<F>>> {
    let n = c.rows();
    if partition.len() == 1 {
        return Ok(Some(Flag::trivial(n)));
    }
    let Some(full) = stable_full_flag(c, rng)? else { return Ok(None) };
    let mut dims = Vec::new();
    let mut d = n;
    for l in &partition[..partition.len() - 1] {
        d -= l;
        dims.push(d);
    }
    let proper: Vec<Subspace<F>> = dims.iter().map(|&d| full[d - 1].clone()).collect();
    Flag::from_proper(n, proper).map(Some)
}

/// Strictly decreasing, sum zero, step `2/(n+1)`; `(1/3, -1/3)` in rank 2.
pub fn default_weights(n: usize) -> Vec<Rational> {
    (0..n).map(|i| Rational::new(((n - 1) as i64 - 2 * i as i64).into(), ((n + 1) as i64).into())).collect()
}

/// Filtered local system with flags of the given types, or `None` after `tries` rejections.
pub fn random_fls<F: Scalar>(
    presentation: &SurfacePresentation,
    partitions: &[Vec<usize>],
    weights: &[Vec<Rational>],
    rng: &mut Rng64,
    tries: usize,
) -> Result<Option<FilteredLocalSystem<F>>> {
    let k = presentation.punctures().len();
    if partitions.len() != k || weights.len() != k || k == 0 {
        return Err(Error::DimensionMismatch("one partition and weight list per puncture".into()));
    }
    let n: usize = partitions[0].iter().sum();
    let g = presentation.genus();
    for _ in 0..tries {
        let a: Vec<Matrix<F>> = (0..g).map(|_| random_invertible(n, rng)).collect();
        let b: Vec<Matrix<F>> = (0..g).map(|_| random_invertible(n, rng)).collect();
        let mut c = Vec::new();
        let mut flags = Vec::new();
        for x in 0..k - 1 {
            let h: Matrix<F> = random_invertible(n, rng);
            let p = random_parabolic(&partitions[x], rng);
            c.push(p.conjugate_by(&h)?);
            flags.push(WeightedFlag::new(Flag::standard(&partitions[x])?.transport(&h)?, weights[x].clone())?);
        }
        let last = relation_product(n, &a, &b, &c)?.inverse()?;
        let Some(flag) = stable_flag(&last, &partitions[k - 1], rng)? else { continue };
        c.push(last);
        flags.push(WeightedFlag::new(flag, weights[k - 1].clone())?);
        let rep = SurfaceRep::new(presentation.clone(), n, a, b, c)?;
        return FilteredLocalSystem::new(rep, flags).map(Some);
    }
    Ok(None)
}

/// `g0` random invertible, `g_x` random in the Levi of the point.
pub fn random_gauge<F: Scalar>(point: &QuiverPoint<F>, rng: &mut Rng64) -> GaugeElement<F> {
    GaugeElement {
        g0: random_invertible(point.rank(), rng),
        gx: point.partitions().iter().map(|p| random_levi(p, rng)).collect(),
    }
}

/// Every invertible matrix over a finite field, in lexicographic order of entries.
pub fn all_invertible<F: Scalar>(n: usize, budget: u128) -> Result<Vec<Matrix<F>>> {
    all_matrices(n, budget, |_| true)
}

/// Every element of the standard parabolic of `partition` over a finite field.
pub fn all_parabolic<F: Scalar>(partition: &[usize], budget: u128) -> Result<Vec<Matrix<F>>> {
    let n = partition.iter().sum();
    all_matrices(n, budget, |m| in_standard_parabolic(partition, m))
}

fn all_matrices<F: Scalar>(n: usize, budget: u128, keep: impl Fn(&Matrix<F>) -> bool) -> Result<Vec<Matrix<F>>> {
    let elems = F::elements().ok_or_else(|| Error::Precondition("enumeration needs a finite field".into()))?;
    let size = (elems.len() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n * n];
    loop {
        let m = Matrix::from_vec(n, n, idx.iter().map(|&i| elems[i].clone()).collect());
        if m.is_invertible() && keep(&m) {
            out.push(m);
        }
        let mut pos = n * n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Genus-zero slice of the parabolic locus: `c_{x,1} = 1` and `c_{x,2} = b_x ∈ P_x` at all
/// but the last puncture, every `h ∈ GL_n` as `c_{x,1}` at the last, `c_{x,2}` solved from
/// the relation, kept when the membership condition holds there.
pub fn genus_zero_slice<F: Scalar>(partitions: &[Vec<usize>], budget: u128) -> Result<Vec<QuiverPoint<F>>> {
    let k = partitions.len();
    if k < 2 {
        return Err(Error::Precondition("the slice needs at least two punctures".into()));
    }
    let n: usize = partitions[0].iter().sum();
    let gl = all_invertible::<F>(n, budget)?;
    let pars: Vec<Vec<Matrix<F>>> =
        partitions[..k - 1].iter().map(|p| all_parabolic::<F>(p, budget)).collect::<Result<_>>()?;
    let total = pars.iter().fold(gl.len() as u128, |acc, p| acc.saturating_mul(p.len() as u128));
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let pres = SurfacePresentation::with_labels(0, k);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k - 1];
    loop {
        let bs: Vec<Matrix<F>> = idx.iter().zip(&pars).map(|(&i, p)| p[i].clone()).collect();
        let prod = bs.iter().fold(Matrix::identity(n), |acc, b| &acc * b);
        let last = prod.inverse()?;
        for h in &gl {
            if !in_standard_parabolic(&partitions[k - 1], &last.conjugate_by(h)?) {
                continue;
            }
            let mut c_in = vec![Matrix::identity(n); k - 1];
            let mut c_out = bs.clone();
            c_in.push(h.clone());
            c_out.push(&last * &h.inverse()?);
            out.push(QuiverPoint::new(pres.clone(), partitions.to_vec(), vec![], vec![], c_in, c_out)?);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < pars[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
