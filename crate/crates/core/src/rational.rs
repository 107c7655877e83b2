//! Rational helpers shared by every module.
//!
//! All arithmetic in the crate is exact over `BigRational`. Serialized
//! rationals are `"p/q"` strings with `q > 0` and `gcd(p, q) = 1`; integers
//! are written without a denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

pub fn format_q(x: &Q) -> String {
    // BigRational keeps itself reduced with a positive denominator.
    x.to_string()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Scales a rational vector to coprime integers, first nonzero entry positive.
/// The zero vector is returned unchanged.
pub fn primitive_integer_vector(xs: &[Q]) -> Vec<Q> {
    let den = common_denominator(xs);
    let ints: Vec<BigInt> = xs.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return xs.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| Q::from_integer(x / &g * &sign)).collect()
}

/// Formats `x` with 12 significant digits, for figures.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub(crate) mod serde_q {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse_q(&s).map_err(de::Error::custom),
            Raw::Int(n) => Ok(q(n)),
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        #[derive(Deserialize)]
        struct W(#[serde(with = "super")] Q);

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
            Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod mat {
        use super::*;
        use serde::ser::SerializeSeq;

        #[derive(Deserialize)]
        struct Row(#[serde(with = "super::vec")] Vec<Q>);

        pub fn serialize<S: Serializer>(rows: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rows.len()))?;
            for r in rows {
                let strs: Vec<String> = r.iter().map(format_q).collect();
                seq.serialize_element(&strs)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Q>>, D::Error> {
            Ok(Vec::<Row>::deserialize(d)?.into_iter().map(|r| r.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/4").unwrap(), qf(3, 2));
        assert_eq!(parse_q(" -2 ").unwrap(), q(-2));
        assert_eq!(format_q(&qf(-6, 4)), "-3/2");
        assert_eq!(format_q(&qf(4, 2)), "2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn primitive_vector() {
        let v = primitive_integer_vector(&[qf(-1, 2), q(3), qf(3, 2)]);
        assert_eq!(v, vec![q(1), q(-6), q(-3)]);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig12(1.3542486889354093), "1.35424868894");
        assert_eq!(sig12(24.0), "24");
        assert_eq!(sig12(0.0), "0");
    }
}
