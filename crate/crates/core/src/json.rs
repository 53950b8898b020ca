//! Input helpers shared by the front ends: field detection, weight lists and
//! quiver cocharacters.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flags::GradedCocharacter;
use crate::quiver::{chain_cocharacter, QuiverCocharacter, QuiverPoint};
use crate::scalar::{rational_from_json, rational_to_json, Rational, Scalar};
use crate::subspace::Subspace;

/// Primes the front end instantiates `Fp` for.
pub const SUPPORTED_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Rational,
    Prime(u64),
}

impl FieldKind {
    /// `"Q"`, `"F5"`, `"GF(5)"` or a bare prime.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") || t.eq_ignore_ascii_case("rational") {
            return Ok(FieldKind::Rational);
        }
        let digits = t
            .strip_prefix(['F', 'f'])
            .or_else(|| t.strip_prefix("GF(").and_then(|r| r.strip_suffix(')')))
            .unwrap_or(t);
        let p: u64 = digits.parse().map_err(|_| Error::Parse(format!("unknown field {s}")))?;
        if !SUPPORTED_PRIMES.contains(&p) {
            return Err(Error::Parse(format!("F{p} is not a supported prime field (2 to 13)")));
        }
        Ok(FieldKind::Prime(p))
    }

    /// From `"field"`, else from the first `{"mod": p}` entry found, else `Q`.
    pub fn detect(v: &Value) -> Result<Self> {
        match v.get("field") {
            Some(Value::String(s)) => Self::parse(s),
            Some(Value::Number(n)) => Self::parse(&n.to_string()),
            Some(_) => Err(Error::Parse("\"field\" must be a string".into())),
            None => Ok(find_modulus(v)?.map_or(FieldKind::Rational, FieldKind::Prime)),
        }
    }
}

fn find_modulus(v: &Value) -> Result<Option<u64>> {
    match v {
        Value::Object(m) => {
            if let Some(p) = m.get("mod") {
                let p = p.as_u64().ok_or_else(|| Error::Parse("\"mod\" must be a positive integer".into()))?;
                return FieldKind::parse(&p.to_string()).map(|_| Some(p));
            }
            for x in m.values() {
                if let Some(p) = find_modulus(x)? {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        }
        Value::Array(xs) => {
            for x in xs {
                if let Some(p) = find_modulus(x)? {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

/// Weight lists per puncture from `[[..], ..]`, `{"x1": [..], ..}` or `{"weights": ...}`.
pub fn parse_weights(v: &Value, labels: &[String]) -> Result<Vec<Vec<Rational>>> {
    let list = |x: &Value| -> Result<Vec<Rational>> {
        x.as_array().ok_or_else(|| Error::Parse("weights must be lists".into()))?.iter().map(rational_from_json).collect()
    };
    let v = v.get("weights").unwrap_or(v);
    match v {
        Value::Array(xs) => {
            if xs.len() != labels.len() {
                return Err(Error::Parse(format!("{} weight lists for {} punctures", xs.len(), labels.len())));
            }
            xs.iter().map(list).collect()
        }
        Value::Object(m) => labels
            .iter()
            .map(|l| m.get(l).map(list).unwrap_or_else(|| Err(Error::Parse(format!("no weights for {l}")))))
            .collect(),
        _ => Err(Error::Parse("weights must be a list or an object".into())),
    }
}

pub fn weights_to_json(weights: &[Vec<Rational>]) -> Value {
    Value::Array(weights.iter().map(|w| Value::Array(w.iter().map(rational_to_json).collect())).collect())
}

pub fn cocharacter_to_json<F: Scalar>(mu: &QuiverCocharacter<F>) -> Value {
    json!({
        "v0": mu.v0.to_json(),
        "vx": mu.vx.iter().map(GradedCocharacter::to_json).collect::<Vec<_>>(),
    })
}

/// `{"v0": .., "vx": [..]}`, or `{"chain": [subspace, ..]}` (outermost first) for the
/// cocharacter attached to an invariant chain.
pub fn cocharacter_from_json<F: Scalar>(v: &Value, point: &QuiverPoint<F>) -> Result<QuiverCocharacter<F>> {
    if let Some(chain) = v.get("chain") {
        let subs: Vec<Subspace<F>> = chain
            .as_array()
            .ok_or_else(|| Error::Parse("\"chain\" must be a list".into()))?
            .iter()
            .map(|s| Subspace::from_json(s, point.rank()))
            .collect::<Result<_>>()?;
        return chain_cocharacter(point, &subs);
    }
    let v0 = GradedCocharacter::from_json(v.get("v0").ok_or_else(|| Error::Parse("cocharacter lacks \"v0\"".into()))?)?;
    let vx: Vec<GradedCocharacter<F>> = v
        .get("vx")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("cocharacter lacks \"vx\"".into()))?
        .iter()
        .map(GradedCocharacter::from_json)
        .collect::<Result<_>>()?;
    if vx.len() != point.partitions().len() || v0.rank() != point.rank() || vx.iter().any(|c| c.rank() != point.rank()) {
        return Err(Error::Parse("cocharacter does not match the point".into()));
    }
    Ok(QuiverCocharacter { v0, vx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_detection() {
        assert_eq!(FieldKind::detect(&json!({"field": "F7"})).unwrap(), FieldKind::Prime(7));
        assert_eq!(FieldKind::detect(&json!({"field": "Q"})).unwrap(), FieldKind::Rational);
        assert_eq!(FieldKind::detect(&json!({"C": {"x": [[{"mod": 5, "val": 1}]]}})).unwrap(), FieldKind::Prime(5));
        assert_eq!(FieldKind::detect(&json!({"C": {"x": [["1/2"]]}})).unwrap(), FieldKind::Rational);
        assert!(FieldKind::parse("F4").is_err());
        assert!(FieldKind::parse("F17").is_err());
    }

    #[test]
    fn weight_forms() {
        let labels = vec!["x1".to_string(), "x2".to_string()];
        let a = parse_weights(&json!([["1/3", "-1/3"], [0]]), &labels).unwrap();
        let b = parse_weights(&json!({"weights": {"x2": [0], "x1": ["1/3", "-1/3"]}}), &labels).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_weights(&weights_to_json(&a), &labels).unwrap(), a);
        assert!(parse_weights(&json!([[0]]), &labels).is_err());
    }
}
