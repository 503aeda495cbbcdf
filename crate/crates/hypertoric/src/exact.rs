//! Exact rational level scalars and their wire format.
//!
//! A flat level is a vector in `Im ℍ ≅ ℝ³` whose components are either exact
//! rationals (serialized as `"p/q"` strings, round-tripping bit-exactly) or
//! `f64` values (serialized as JSON numbers).

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::algebra::ImQuaternion;

/// One level component: exact rational or floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelScalar {
    Rational(BigRational),
    Float(f64),
}

impl LevelScalar {
    pub fn zero() -> Self {
        LevelScalar::Rational(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        LevelScalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        LevelScalar::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, LevelScalar::Rational(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LevelScalar::Rational(r) => r.to_f64().expect("rational out of f64 range"),
            LevelScalar::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            LevelScalar::Rational(r) => Some(r),
            LevelScalar::Float(_) => None,
        }
    }
}

impl fmt::Display for LevelScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelScalar::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            LevelScalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d = BigInt::from_str(den).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(n, d))
}

impl Serialize for LevelScalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            LevelScalar::Rational(r) => {
                let s = if r.denom().is_one() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                };
                ser.serialize_str(&s)
            }
            LevelScalar::Float(x) => ser.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for LevelScalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LevelScalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a number or a rational string \"p/q\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<LevelScalar, E> {
                Ok(LevelScalar::Float(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<LevelScalar, E> {
                Ok(LevelScalar::Float(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<LevelScalar, E> {
                Ok(LevelScalar::Float(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<LevelScalar, E> {
                parse_rational(v).map(LevelScalar::Rational).map_err(E::custom)
            }
        }
        de.deserialize_any(V)
    }
}

/// A level vector in `Im ℍ` with per-component exactness.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelVector(pub [LevelScalar; 3]);

impl LevelVector {
    pub fn zero() -> Self {
        LevelVector([LevelScalar::zero(), LevelScalar::zero(), LevelScalar::zero()])
    }

    pub fn from_f64(v: ImQuaternion) -> Self {
        LevelVector([LevelScalar::Float(v.i), LevelScalar::Float(v.j), LevelScalar::Float(v.k)])
    }

    pub fn from_ints(i: i64, j: i64, k: i64) -> Self {
        LevelVector([LevelScalar::from_int(i), LevelScalar::from_int(j), LevelScalar::from_int(k)])
    }

    pub fn from_rationals(r: [BigRational; 3]) -> Self {
        let [a, b, c] = r;
        LevelVector([LevelScalar::Rational(a), LevelScalar::Rational(b), LevelScalar::Rational(c)])
    }

    pub fn is_rational(&self) -> bool {
        self.0.iter().all(LevelScalar::is_rational)
    }

    pub fn to_im(&self) -> ImQuaternion {
        ImQuaternion::new(self.0[0].to_f64(), self.0[1].to_f64(), self.0[2].to_f64())
    }

    pub fn component(&self, c: usize) -> &LevelScalar {
        &self.0[c]
    }

    pub fn rationals(&self) -> Option<[BigRational; 3]> {
        match (&self.0[0], &self.0[1], &self.0[2]) {
            (LevelScalar::Rational(a), LevelScalar::Rational(b), LevelScalar::Rational(c)) => {
                Some([a.clone(), b.clone(), c.clone()])
            }
            _ => None,
        }
    }

    /// Exact scaling by an integer (used by metric-scaling transforms).
    pub fn scaled_rational(&self, factor: &BigRational) -> LevelVector {
        LevelVector(std::array::from_fn(|c| match &self.0[c] {
            LevelScalar::Rational(r) => LevelScalar::Rational(r * factor),
            LevelScalar::Float(x) => LevelScalar::Float(x * factor.to_f64().unwrap()),
        }))
    }
}

impl Serialize for LevelVector {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(3))?;
        for s in &self.0 {
            seq.serialize_element(s)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LevelVector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LevelVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a 3-element level vector")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LevelVector, A::Error> {
                let a = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let b = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let c = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(2, &self))?;
                if seq.next_element::<LevelScalar>()?.is_some() {
                    return Err(de::Error::invalid_length(4, &self));
                }
                Ok(LevelVector([a, b, c]))
            }
        }
        de.deserialize_seq(V)
    }
}

/// Signum helper used when comparing exact levels up to simultaneous sign.
pub fn rational_neg(r: &BigRational) -> BigRational {
    -r.clone()
}

pub fn rational_abs(r: &BigRational) -> BigRational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_string_roundtrip() {
        for s in ["3/2", "-7/3", "0", "12"] {
            let r = parse_rational(s).unwrap();
            let ls = LevelScalar::Rational(r.clone());
            let json = serde_json::to_string(&ls).unwrap();
            let back: LevelScalar = serde_json::from_str(&json).unwrap();
            assert_eq!(back, ls);
        }
    }

    #[test]
    fn float_roundtrip_is_bit_exact() {
        let x = 0.1 + 0.2;
        let ls = LevelScalar::Float(x);
        let json = serde_json::to_string(&ls).unwrap();
        let back: LevelScalar = serde_json::from_str(&json).unwrap();
        match back {
            LevelScalar::Float(y) => assert_eq!(x.to_bits(), y.to_bits()),
            _ => panic!("expected float"),
        }
    }

    #[test]
    fn bad_rationals_rejected() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        let r: Result<LevelVector, _> = serde_json::from_str("[1,2]");
        assert!(r.is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rational_roundtrip_bit_exact(p in -1_000_000_000i64..1_000_000_000, q in 1i64..1_000_000) {
                let ls = LevelScalar::from_ratio(p, q);
                let json = serde_json::to_string(&ls).unwrap();
                let back: LevelScalar = serde_json::from_str(&json).unwrap();
                prop_assert_eq!(back, ls);
            }

            #[test]
            fn float_roundtrip_bit_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL) {
                let ls = LevelScalar::Float(x);
                let json = serde_json::to_string(&ls).unwrap();
                let back: LevelScalar = serde_json::from_str(&json).unwrap();
                match back {
                    LevelScalar::Float(y) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                    _ => prop_assert!(false, "expected float"),
                }
            }
        }
    }
}
