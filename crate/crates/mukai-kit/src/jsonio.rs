//! JSON number handling shared by every serialized type.
//!
//! Integers round-trip exactly: values with magnitude below 2^53 are emitted
//! as plain JSON numbers, anything larger as a decimal string. Rationals are
//! emitted as `{"num": ..., "den": ...}` with the same integer rule, and are
//! accepted back from that form, from a bare integer, or from a `"p/q"`
//! string.

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SAFE_LIMIT: u64 = 1 << 53;

fn fits_plain(x: &BigInt) -> bool {
    match x.to_u64_digits() {
        (_, digits) if digits.is_empty() => true,
        (_, digits) => digits.len() == 1 && digits[0] < SAFE_LIMIT,
    }
}

pub fn bigint_to_json(x: &BigInt) -> serde_json::Value {
    if fits_plain(x) {
        let (sign, digits) = x.to_u64_digits();
        let mag = digits.first().copied().unwrap_or(0) as i64;
        let v = if sign == Sign::Minus { -mag } else { mag };
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(x.to_string())
    }
}

pub fn json_to_bigint(v: &serde_json::Value) -> Result<BigInt, String> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(format!("expected an integer, got {n}"))
            }
        }
        serde_json::Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|e| format!("bad integer literal {s:?}: {e}")),
        other => Err(format!("expected an integer, got {other}")),
    }
}

pub fn ratio_to_json(x: &BigRational) -> serde_json::Value {
    serde_json::json!({
        "num": bigint_to_json(x.numer()),
        "den": bigint_to_json(x.denom()),
    })
}

pub fn json_to_ratio(v: &serde_json::Value) -> Result<BigRational, String> {
    match v {
        serde_json::Value::Object(map) => {
            let num = map.get("num").ok_or("rational missing \"num\"")?;
            let den = map.get("den").ok_or("rational missing \"den\"")?;
            let num = json_to_bigint(num)?;
            let den = json_to_bigint(den)?;
            // strict canonical form: this is what the serializer emits, and
            // accepting equivalent encodings would let tampered bytes parse
            // back to the original value
            if !den.is_positive() {
                return Err("rational denominator must be positive".into());
            }
            if !num.gcd(&den).is_one() {
                return Err("rational must be in lowest terms".into());
            }
            Ok(BigRational::new(num, den))
        }
        serde_json::Value::String(s) if s.contains('/') => {
            let (p, q) = s.split_once('/').unwrap();
            let num = p.trim().parse::<BigInt>().map_err(|e| e.to_string())?;
            let den = q.trim().parse::<BigInt>().map_err(|e| e.to_string())?;
            if den.is_zero() {
                return Err("rational with zero denominator".into());
            }
            Ok(BigRational::new(num, den))
        }
        other => json_to_bigint(other).map(BigRational::from_integer),
    }
}

pub mod int_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        bigint_to_json(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        json_to_bigint(&v).map_err(DeError::custom)
    }
}

pub mod int_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<serde_json::Value> = xs.iter().map(bigint_to_json).collect();
        vals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let vals = Vec::<serde_json::Value>::deserialize(d)?;
        vals.iter()
            .map(|v| json_to_bigint(v).map_err(DeError::custom))
            .collect()
    }
}

pub mod int_mat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<Vec<serde_json::Value>> = xs
            .iter()
            .map(|row| row.iter().map(bigint_to_json).collect())
            .collect();
        vals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        let vals = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        vals.iter()
            .map(|row| {
                row.iter()
                    .map(|v| json_to_bigint(v).map_err(DeError::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod ratio_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        ratio_to_json(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        json_to_ratio(&v).map_err(DeError::custom)
    }
}

pub mod ratio_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<serde_json::Value> = xs.iter().map(ratio_to_json).collect();
        vals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let vals = Vec::<serde_json::Value>::deserialize(d)?;
        vals.iter()
            .map(|v| json_to_ratio(v).map_err(DeError::custom))
            .collect()
    }
}

pub mod ratio_mat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Vec<BigRational>], s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<Vec<serde_json::Value>> = xs
            .iter()
            .map(|row| row.iter().map(ratio_to_json).collect())
            .collect();
        vals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<Vec<BigRational>>, D::Error> {
        let vals = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        vals.iter()
            .map(|row| {
                row.iter()
                    .map(|v| json_to_ratio(v).map_err(DeError::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod opt_int_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => bigint_to_json(v).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        v.map(|v| json_to_bigint(&v).map_err(DeError::custom))
            .transpose()
    }
}

pub mod opt_ratio_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => ratio_to_json(v).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<BigRational>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        v.map(|v| json_to_ratio(&v).map_err(DeError::custom))
            .transpose()
    }
}

/// `true` for the values that survive a JSON round trip as plain numbers.
pub fn serializes_as_plain_number(x: &BigInt) -> bool {
    fits_plain(x)
}
