//! JSON form of exact zeta rationals and graded coefficient tables.
//!
//! ```text
//! ZetaRational:
//!   { "schema_version": 1,
//!     "numerator":   [[a, b, num, den], ...],   // num/den * q^a t^b
//!     "denominator": [[a, b], ...],             // prod (1 - q^a t^b)
//!     "prefactor":   [num, den, e_q] }          // num/den * q^e_q
//! GradedCoefficients:
//!   { "schema_version": 1, "truncation": K,
//!     "coefficients": [{"k": k, "terms": [[a, num, den], ...]}, ...] }
//! ```
//! Integers are JSON numbers of arbitrary size.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Number, Value};

use super::laurent::{LaurentPoly, QPoly};
use super::rational::{GradedCoefficients, ZetaRational};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn big_number(n: &BigInt) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("integer literal is valid JSON"))
}

fn parse_big(v: &Value) -> Result<BigInt> {
    let s = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(Error::InvalidParameter(format!("expected integer, got {v}"))),
    };
    BigInt::from_str(&s).map_err(|e| Error::InvalidParameter(format!("bad integer {s}: {e}")))
}

fn parse_i64(v: &Value) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::InvalidParameter(format!("expected small integer, got {v}")))
}

fn rational(num: &Value, den: &Value) -> Result<BigRational> {
    let d = parse_big(den)?;
    if d == BigInt::from(0) {
        return Err(Error::InvalidParameter("zero denominator".into()));
    }
    Ok(BigRational::new(parse_big(num)?, d))
}

pub fn zeta_to_json(z: &ZetaRational<BigRational>) -> Value {
    let numerator: Vec<Value> = z
        .numerator()
        .terms()
        .map(|(a, b, c)| json!([a, b, big_number(c.numer()), big_number(c.denom())]))
        .collect();
    let denominator: Vec<Value> = z.denominator().iter().map(|(a, b)| json!([a, b])).collect();
    let (c, e) = z.prefactor();
    json!({
        "schema_version": SCHEMA_VERSION,
        "numerator": numerator,
        "denominator": denominator,
        "prefactor": [big_number(c.numer()), big_number(c.denom()), e],
    })
}

pub fn zeta_from_json(v: &Value) -> Result<ZetaRational<BigRational>> {
    let arr = |key: &str| {
        v.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidParameter(format!("missing array field {key}")))
    };
    let mut num = LaurentPoly::zero();
    for t in arr("numerator")? {
        let t = t
            .as_array()
            .filter(|t| t.len() == 4)
            .ok_or_else(|| Error::InvalidParameter("numerator entries are [a, b, num, den]".into()))?;
        num.add_term(parse_i64(&t[0])?, parse_i64(&t[1])?, rational(&t[2], &t[3])?);
    }
    let mut den = Vec::new();
    for f in arr("denominator")? {
        let f = f
            .as_array()
            .filter(|f| f.len() == 2)
            .ok_or_else(|| Error::InvalidParameter("denominator entries are [a, b]".into()))?;
        den.push((parse_i64(&f[0])?, parse_i64(&f[1])?));
    }
    let p = arr("prefactor")?;
    if p.len() != 3 {
        return Err(Error::InvalidParameter("prefactor is [num, den, e_q]".into()));
    }
    ZetaRational::new(num, den, rational(&p[0], &p[1])?, parse_i64(&p[2])?)
}

pub fn graded_to_json(g: &GradedCoefficients<BigRational>) -> Value {
    let coeffs: Vec<Value> = g
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let terms: Vec<Value> = p
                .terms()
                .map(|(a, c)| json!([a, big_number(c.numer()), big_number(c.denom())]))
                .collect();
            json!({"k": k, "terms": terms})
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "truncation": g.truncation(),
        "coefficients": coeffs,
    })
}

pub fn graded_from_json(v: &Value) -> Result<GradedCoefficients<BigRational>> {
    let entries = v
        .get("coefficients")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidParameter("missing coefficients".into()))?;
    let mut coeffs = vec![QPoly::zero(); entries.len()];
    for e in entries {
        let k = e
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidParameter("coefficient entry without k".into()))?
            as usize;
        if k >= coeffs.len() {
            return Err(Error::InvalidParameter(format!("k = {k} out of range")));
        }
        let terms = e
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidParameter("coefficient entry without terms".into()))?;
        for t in terms {
            let t = t
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| Error::InvalidParameter("terms are [a, num, den]".into()))?;
            coeffs[k].add_term(parse_i64(&t[0])?, rational(&t[1], &t[2])?);
        }
    }
    Ok(GradedCoefficients::from_coeffs(coeffs))
}
