//! Exact scalar fields: arbitrary-precision rationals and prime fields.
//!
//! Everything in the crate is generic over [`Scalar`]. There is no floating
//! point anywhere; weights are always [`Rational`] regardless of the field the
//! matrices live over.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Arbitrary-precision rational number, always in lowest terms with positive
/// denominator.
pub type Rational = BigRational;

/// An exact field usable as matrix entries.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Eq
    + Hash
    + Ord
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn inverse(&self) -> Option<Self>;

    fn from_i64(v: i64) -> Self;

    /// Image of a rational number; `None` when the denominator vanishes.
    fn from_rational(q: &Rational) -> Option<Self>;

    /// Field characteristic, `0` for the rationals.
    fn characteristic() -> u64;

    /// Every element of the field, when it is finite.
    fn elements() -> Option<Vec<Self>>;

    /// Distinct roots of `poly` lying in the field. `None` means the backend
    /// could not decide (coefficients too large to factor).
    fn roots(poly: &Poly<Self>) -> Option<Vec<Self>>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Short label for the field, e.g. `Q` or `F5`.
    fn field_name() -> String;

    fn pow_i(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq.clone();
            }
            sq = sq.clone() * sq;
            e >>= 1;
        }
        Some(acc)
    }

    fn is_finite_field() -> bool {
        Self::characteristic() != 0
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let q = Rational::from_str(t).map_err(|_| Error::Parse(format!("not a rational: {t:?}")))?;
    if q.denom().is_zero() {
        return Err(Error::Parse(format!("zero denominator: {t:?}")));
    }
    Ok(q)
}

pub fn rational_to_json(q: &Rational) -> Value {
    Value::String(q.to_string())
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(BigInt::from(i)))
            .ok_or_else(|| Error::Parse(format!("non-integer number {n}; use \"p/q\""))),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

impl Scalar for Rational {
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Option<Self> {
        Some(q.clone())
    }

    fn characteristic() -> u64 {
        0
    }

    fn elements() -> Option<Vec<Self>> {
        None
    }

    fn roots(poly: &Poly<Self>) -> Option<Vec<Self>> {
        rational_roots(poly)
    }

    fn to_json(&self) -> Value {
        rational_to_json(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        rational_from_json(v)
    }

    fn field_name() -> String {
        "Q".to_string()
    }
}

/// Largest integer whose divisors we are willing to enumerate by trial division.
const DIVISOR_LIMIT: u64 = 1 << 40;

fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > DIVISOR_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    Some(small)
}

/// Rational roots by the rational root theorem on the integer-scaled polynomial.
fn rational_roots(poly: &Poly<Rational>) -> Option<Vec<Rational>> {
    if poly.degree().is_none() {
        return Some(Vec::new());
    }
    let denom_lcm = poly
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = poly
        .coeffs()
        .iter()
        .map(|c| (c * Rational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    let mut roots = Vec::new();
    if ints[0].is_zero() {
        roots.push(Rational::zero());
        while ints.len() > 1 && ints[0].is_zero() {
            ints.remove(0);
        }
    }
    if ints.len() <= 1 {
        return Some(roots);
    }
    let p_divs = divisors(&ints[0])?;
    let q_divs = divisors(ints.last().expect("nonempty"))?;
    let scaled = Poly::new(ints.iter().map(|i| Rational::from_integer(i.clone())).collect());
    for p in &p_divs {
        for q in &q_divs {
            for sign in [1i64, -1] {
                let cand = Rational::new(BigInt::from(*p) * sign, BigInt::from(*q));
                if scaled.eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}

/// Residue class modulo the odd prime `P`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    pub fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }

    pub fn value(&self) -> u64 {
        self.0
    }
}

impl<const P: u64> Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fp((self.0 + rhs.0) % P)
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fp((self.0 + P - rhs.0) % P)
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fp((self.0 * rhs.0) % P)
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u64> Div for Fp<P> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.inverse().expect("division by zero in prime field")
    }
}

impl<const P: u64> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Fp<P> {
    fn one() -> Self {
        Fp(1 % P)
    }
}

impl<const P: u64> Scalar for Fp<P> {
    fn inverse(&self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // Fermat: a^(p-2)
        let mut e = P - 2;
        let mut acc = 1u64;
        let mut b = self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % P;
            }
            b = b * b % P;
            e >>= 1;
        }
        Some(Fp(acc))
    }

    fn from_i64(v: i64) -> Self {
        Fp::new(v)
    }

    fn from_rational(q: &Rational) -> Option<Self> {
        let p = BigInt::from(P);
        let num = q.numer().mod_floor(&p).to_u64()?;
        let den = q.denom().mod_floor(&p).to_u64()?;
        let den = Fp::<P>(den).inverse()?;
        Some(Fp(num) * den)
    }

    fn characteristic() -> u64 {
        P
    }

    fn elements() -> Option<Vec<Self>> {
        Some((0..P).map(Fp).collect())
    }

    fn roots(poly: &Poly<Self>) -> Option<Vec<Self>> {
        if poly.degree().is_none() {
            return Some(Vec::new());
        }
        Some((0..P).map(Fp).filter(|x| poly.eval(x).is_zero()).collect())
    }

    fn to_json(&self) -> Value {
        json!({"mod": P, "val": self.0})
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Object(map) => {
                let m = map
                    .get("mod")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("finite-field scalar lacks \"mod\"".into()))?;
                if m != P {
                    return Err(Error::Parse(format!("expected modulus {P}, found {m}")));
                }
                let val = map
                    .get("val")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| Error::Parse("finite-field scalar lacks \"val\"".into()))?;
                Ok(Fp::new(val))
            }
            Value::Number(n) => n
                .as_i64()
                .map(Fp::new)
                .ok_or_else(|| Error::Parse(format!("bad residue {n}"))),
            other => Err(Error::Parse(format!("expected finite-field scalar, got {other}"))),
        }
    }

    fn field_name() -> String {
        format!("F{P}")
    }
}
