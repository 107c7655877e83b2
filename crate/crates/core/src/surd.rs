//! Real quadratic surds `a + b·√d` over the rationals.
//!
//! Exit times of rays through quadratic cones are roots of rational
//! quadratics, so this is the only algebraic extension the crate needs.
//! Values carry an exact representation and can produce isolating rational
//! intervals of any width.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_q, parse_q, sig12, Q};

/// `rational + irrational·√radicand` with a square-free `radicand > 1`, or a
/// plain rational (`irrational = 0`, `radicand = 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: Q,
    irrational: Q,
    radicand: BigInt,
}

/// Writes `n = s²·d` with `d` square-free (up to a trial-division bound for
/// very large cofactors).
fn square_free_decompose(n: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.is_positive());
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut core = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while &p * &p <= rest && p <= limit {
        let mut k = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            k += 1;
        }
        for _ in 0..k / 2 {
            square *= &p;
        }
        if k % 2 == 1 {
            core *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        square *= r;
    } else {
        core *= rest;
    }
    (square, core)
}

impl Surd {
    pub fn new(rational: Q, irrational: Q, radicand: BigInt) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if irrational.is_zero() || radicand.is_zero() {
            return Self::from_rational(rational);
        }
        let (square, core) = square_free_decompose(&radicand);
        let irrational = irrational * Q::from_integer(square);
        if core.is_one() {
            return Self::from_rational(rational + irrational);
        }
        Surd { rational, irrational, radicand: core }
    }

    pub fn from_rational(x: Q) -> Self {
        Surd { rational: x, irrational: Q::zero(), radicand: BigInt::one() }
    }

    pub fn zero() -> Self {
        Self::from_rational(Q::zero())
    }

    /// Square root of a non-negative rational.
    pub fn sqrt(x: &Q) -> Option<Self> {
        if x.is_negative() {
            return None;
        }
        let d = x.denom().clone();
        let n = x.numer() * &d;
        Some(Self::new(Q::zero(), Q::new(BigInt::one(), d), n))
    }

    pub fn rational_part(&self) -> &Q {
        &self.rational
    }

    pub fn irrational_part(&self) -> &Q {
        &self.irrational
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    pub fn to_rational(&self) -> Option<Q> {
        self.is_rational().then(|| self.rational.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Surd { rational: self.rational.clone(), irrational: -&self.irrational, radicand: self.radicand.clone() }
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.rational.cmp(&Q::zero());
        let sb = self.irrational.cmp(&Q::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa != sb.reverse() {
            // both non-negative or both non-positive, and b ≠ 0
            return sb;
        }
        let a2 = &self.rational * &self.rational;
        let b2d = &self.irrational * &self.irrational * Q::from_integer(self.radicand.clone());
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    /// Monic minimal polynomial, coefficients in ascending degree.
    pub fn minimal_polynomial(&self) -> Vec<Q> {
        if self.is_rational() {
            return vec![-&self.rational, Q::one()];
        }
        let a = &self.rational;
        let b2d = &self.irrational * &self.irrational * Q::from_integer(self.radicand.clone());
        vec![a * a - b2d, -(a + a), Q::one()]
    }

    /// Rational interval `[lo, hi]` containing the value, of width at most
    /// `|irrational|·2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (Q, Q) {
        if self.is_rational() {
            return (self.rational.clone(), self.rational.clone());
        }
        let scale = BigInt::one() << bits;
        let r = (&self.radicand * &scale * &scale).sqrt();
        let lo = Q::new(r.clone(), scale.clone());
        let hi = Q::new(r + 1, scale);
        let (a, b) = (&self.rational, &self.irrational);
        let (x, y) = (a + b * &lo, a + b * &hi);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    }

    /// Interval containing the value but not its conjugate.
    pub fn isolating_interval(&self) -> (Q, Q) {
        if self.is_rational() {
            return self.enclosure(0);
        }
        let mut bits = 4;
        loop {
            let (lo, hi) = self.enclosure(bits);
            let (clo, chi) = self.conjugate().enclosure(bits);
            if hi < clo || chi < lo {
                return (lo, hi);
            }
            bits *= 2;
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return self.rational.to_f64().unwrap_or(f64::NAN);
        }
        let (lo, hi) = self.enclosure(96);
        ((lo + hi) / Q::from_integer(BigInt::from(2))).to_f64().unwrap_or(f64::NAN)
    }

    /// A rational strictly between `self` and `other`, which must differ.
    pub fn rational_between(&self, other: &Surd) -> Q {
        let (a, b) = if self < other { (self, other) } else { (other, self) };
        assert!(a != b, "rational_between on equal values");
        let mut bits = 8;
        loop {
            let (_, ahi) = a.enclosure(bits);
            let (blo, _) = b.enclosure(bits);
            if ahi < blo {
                return (ahi + blo) / Q::from_integer(BigInt::from(2));
            }
            if a.is_rational() && b.is_rational() {
                return (&a.rational + &b.rational) / Q::from_integer(BigInt::from(2));
            }
            bits *= 2;
        }
    }

    /// Distinct real roots of `c2·t² + c1·t + c0`, ascending. A vanishing
    /// polynomial has no reported roots.
    pub fn quadratic_roots(c2: &Q, c1: &Q, c0: &Q) -> Vec<Surd> {
        if c2.is_zero() {
            if c1.is_zero() {
                return Vec::new();
            }
            return vec![Surd::from_rational(-c0 / c1)];
        }
        let disc = c1 * c1 - Q::from_integer(BigInt::from(4)) * c2 * c0;
        let two_a = c2 * Q::from_integer(BigInt::from(2));
        if disc.is_negative() {
            return Vec::new();
        }
        if disc.is_zero() {
            return vec![Surd::from_rational(-c1 / &two_a)];
        }
        let root = Surd::sqrt(&disc).expect("non-negative discriminant");
        let base = Surd::from_rational(-c1.clone());
        let mut roots = vec![(&base - &root).scale(&two_a.recip()), (&base + &root).scale(&two_a.recip())];
        roots.sort();
        roots
    }

    pub fn scale(&self, k: &Q) -> Surd {
        Surd::new(&self.rational * k, &self.irrational * k, self.radicand.clone())
    }

    pub fn add_rational(&self, k: &Q) -> Surd {
        Surd { rational: &self.rational + k, ..self.clone() }
    }

    pub fn recip(&self) -> Surd {
        assert!(!self.is_zero(), "reciprocal of zero");
        let norm = &self.rational * &self.rational
            - &self.irrational * &self.irrational * Q::from_integer(self.radicand.clone());
        self.conjugate().scale(&norm.recip())
    }

    fn common_radicand(&self, other: &Surd) -> BigInt {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => other.radicand.clone(),
            (_, true) => self.radicand.clone(),
            _ => {
                assert_eq!(self.radicand, other.radicand, "surds from different quadratic fields");
                self.radicand.clone()
            }
        }
    }

    /// Whether `self` and `other` can be combined arithmetically.
    pub fn same_field(&self, other: &Surd) -> bool {
        self.is_rational() || other.is_rational() || self.radicand == other.radicand
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        let d = self.common_radicand(o);
        Surd::new(&self.rational + &o.rational, &self.irrational + &o.irrational, d)
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        let d = self.common_radicand(o);
        Surd::new(&self.rational - &o.rational, &self.irrational - &o.irrational, d)
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        let d = self.common_radicand(o);
        let dq = Q::from_integer(d.clone());
        let rational = &self.rational * &o.rational + &self.irrational * &o.irrational * dq;
        let irrational = &self.rational * &o.irrational + &self.irrational * &o.rational;
        Surd::new(rational, irrational, d)
    }
}

impl Div for &Surd {
    type Output = Surd;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Surd) -> Surd {
        self * &o.recip()
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rational: -&self.rational, irrational: -&self.irrational, radicand: self.radicand.clone() }
    }
}

impl From<Q> for Surd {
    fn from(x: Q) -> Self {
        Surd::from_rational(x)
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.same_field(other) {
            return (self - other).signum();
        }
        // 1, √d, √e are linearly independent, so distinct fields never tie.
        let mut bits = 16;
        loop {
            let (alo, ahi) = self.enclosure(bits);
            let (blo, bhi) = other.enclosure(bits);
            if ahi < blo {
                return Ordering::Less;
            }
            if bhi < alo {
                return Ordering::Greater;
            }
            bits *= 2;
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.rational);
        }
        let b = &self.irrational;
        let coeff = |x: &Q| if x.is_one() { String::new() } else { x.to_string() };
        if self.rational.is_zero() {
            if b.is_negative() {
                write!(f, "-{}√{}", coeff(&-b), self.radicand)
            } else {
                write!(f, "{}√{}", coeff(b), self.radicand)
            }
        } else if b.is_negative() {
            write!(f, "{} - {}√{}", self.rational, coeff(&-b), self.radicand)
        } else {
            write!(f, "{} + {}√{}", self.rational, coeff(b), self.radicand)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SurdWire {
    rational: String,
    irrational: String,
    radicand: String,
    #[serde(default, skip_deserializing)]
    approx: String,
    #[serde(default, skip_deserializing)]
    minimal_polynomial: Vec<String>,
}

impl Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SurdWire {
            rational: format_q(&self.rational),
            irrational: format_q(&self.irrational),
            radicand: self.radicand.to_string(),
            approx: sig12(self.to_f64()),
            minimal_polynomial: self.minimal_polynomial().iter().map(format_q).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Surd {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = SurdWire::deserialize(d)?;
        let a = parse_q(&w.rational).map_err(D::Error::custom)?;
        let b = parse_q(&w.irrational).map_err(D::Error::custom)?;
        let r: BigInt = w.radicand.parse().map_err(D::Error::custom)?;
        if r.is_negative() {
            return Err(D::Error::custom("negative radicand"));
        }
        Ok(Surd::new(a, b, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn s(a: i64, b: i64, d: i64) -> Surd {
        Surd::new(q(a), q(b), BigInt::from(d))
    }

    #[test]
    fn normalizes_square_factors() {
        let x = s(0, 1, 28);
        assert_eq!(x, s(0, 2, 7));
        assert_eq!(s(1, 3, 9), Surd::from_rational(q(10)));
        assert_eq!(Surd::sqrt(&qf(7, 4)).unwrap(), Surd::new(q(0), qf(1, 2), BigInt::from(7)));
    }

    #[test]
    fn signs_and_order() {
        assert_eq!(s(4, -1, 7).signum(), Ordering::Greater);
        assert_eq!(s(2, -1, 7).signum(), Ordering::Less);
        assert!(s(4, -1, 7) < Surd::from_rational(qf(3, 2)));
        assert!(s(4, -1, 7) > Surd::from_rational(qf(4, 3)));
        assert!(s(0, 1, 2) < s(0, 1, 3));
        assert!(s(1, 1, 2) > s(0, 1, 5));
    }

    #[test]
    fn quadratic_roots_of_exit_polynomial() {
        let roots = Surd::quadratic_roots(&q(1), &q(-8), &q(9));
        assert_eq!(roots, vec![s(4, -1, 7), s(4, 1, 7)]);
        assert_eq!(roots[0].minimal_polynomial(), vec![q(9), q(-8), q(1)]);
        assert!((roots[0].to_f64() - 1.354248688).abs() < 1e-9);
    }

    #[test]
    fn field_arithmetic() {
        let x = s(4, -1, 7);
        let y = &x * &x;
        // (4 - √7)² = 23 - 8√7
        assert_eq!(y, s(23, -8, 7));
        assert_eq!(&(&x / &x), &Surd::from_rational(q(1)));
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn isolating_interval_excludes_conjugate() {
        let x = s(4, -1, 7);
        let (lo, hi) = x.isolating_interval();
        assert!(lo <= hi && hi < q(4));
        let between = x.rational_between(&Surd::from_rational(qf(3, 2)));
        assert!(Surd::from_rational(between.clone()) > x && between < qf(3, 2));
    }

    #[test]
    fn serde_round_trip() {
        let x = s(4, -1, 7);
        let json = serde_json::to_string(&x).unwrap();
        assert!(json.contains("\"approx\":\"1.35424868894\""));
        let back: Surd = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn display() {
        assert_eq!(s(4, -1, 7).to_string(), "4 - √7");
        assert_eq!(s(0, 3, 2).to_string(), "3√2");
        assert_eq!(Surd::from_rational(qf(3, 2)).to_string(), "3/2");
    }
}
