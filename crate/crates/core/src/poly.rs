//! Dense polynomials over the rationals, univariate (`Poly`) and in two
//! variables `x, q` (`BiPoly`, stored by powers of `q`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::one();
        Poly { coeffs: c }
    }

    /// `(1 − x)^k`.
    pub fn one_minus_x_pow(k: usize) -> Self {
        (0..k).fold(Poly::one(), |acc, _| &acc * &Poly::from_ints(&[1, -1]))
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: &Q) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    /// `p(x^m)`.
    pub fn compose_power(&self, m: usize) -> Poly {
        let mut c = vec![Q::zero(); self.coeffs.len().saturating_sub(1) * m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[i * m] = a.clone();
        }
        Poly::new(c)
    }

    /// `x^k · self`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        Poly { coeffs: c }
    }

    /// Terms of degree `< k`.
    pub fn truncate(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.iter().take(k).cloned().collect())
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().expect("nonzero");
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Q::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let f = rem.last().expect("nonempty") / &lead;
            for (i, c) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &f * c;
            }
            quot[k] = f;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.scale(&a.leading().recip())
        }
    }

    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(other);
        let l = (self * other).div_rem(&g).0;
        l.scale(&l.leading().recip())
    }

    /// First `n` coefficients of the power series `self / den` (`den(0) ≠ 0`).
    pub fn series_div(&self, den: &Poly, n: usize) -> Vec<Q> {
        let d0 = den.coeff(0);
        assert!(!d0.is_zero(), "denominator vanishes at 0");
        let inv = d0.recip();
        let mut out: Vec<Q> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeff(k);
            for j in 1..=k.min(den.coeffs.len().saturating_sub(1)) {
                acc -= &den.coeffs[j] * &out[k - j];
            }
            out.push(acc * &inv);
        }
        out
    }

    pub fn fmt_var(&self, var: &str) -> String {
        fmt_terms(self.coeffs.iter().enumerate().map(|(i, c)| (c.clone(), monomial_name(var, i))))
    }
}

fn monomial_name(var: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

fn fmt_terms(terms: impl Iterator<Item = (Q, String)>) -> String {
    let mut out = String::new();
    for (c, m) in terms {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        match (mag.is_one(), m.is_empty()) {
            (true, false) => out.push_str(&m),
            (_, true) => out.push_str(&mag.to_string()),
            (false, false) => out.push_str(&format!("{mag}*{m}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Polynomial in `x` and `q`; entry `k` is the coefficient of `q^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    by_q: Vec<Poly>,
}

impl BiPoly {
    pub fn new(mut by_q: Vec<Poly>) -> Self {
        while by_q.last().is_some_and(Poly::is_zero) {
            by_q.pop();
        }
        BiPoly { by_q }
    }

    pub fn zero() -> Self {
        BiPoly { by_q: Vec::new() }
    }

    pub fn from_x(p: Poly) -> Self {
        Self::new(vec![p])
    }

    /// `q^k` (as a polynomial constant in `x`).
    pub fn q_power(k: usize) -> Self {
        let mut v = vec![Poly::zero(); k + 1];
        v[k] = Poly::one();
        BiPoly { by_q: v }
    }

    pub fn by_q(&self) -> &[Poly] {
        &self.by_q
    }

    pub fn q_coeff(&self, k: usize) -> Poly {
        self.by_q.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.by_q.is_empty()
    }

    pub fn q_degree(&self) -> Option<usize> {
        self.by_q.len().checked_sub(1)
    }

    pub fn x_degree(&self) -> Option<usize> {
        self.by_q.iter().filter_map(Poly::degree).max()
    }

    pub fn d_dx(&self) -> BiPoly {
        BiPoly::new(self.by_q.iter().map(Poly::derivative).collect())
    }

    pub fn d_dq(&self) -> BiPoly {
        BiPoly::new(self.by_q.iter().enumerate().skip(1).map(|(k, p)| p.scale(&q(k as i64))).collect())
    }

    pub fn mul_x(&self, p: &Poly) -> BiPoly {
        BiPoly::new(self.by_q.iter().map(|c| c * p).collect())
    }

    pub fn scale(&self, k: &Q) -> BiPoly {
        BiPoly::new(self.by_q.iter().map(|c| c.scale(k)).collect())
    }

    /// All rational coefficients, row-major by `q` power.
    pub fn all_coeffs(&self) -> impl Iterator<Item = &Q> {
        self.by_q.iter().flat_map(|p| p.coeffs().iter())
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, o: &BiPoly) -> BiPoly {
        let n = self.by_q.len().max(o.by_q.len());
        BiPoly::new((0..n).map(|k| &self.q_coeff(k) + &o.q_coeff(k)).collect())
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, o: &BiPoly) -> BiPoly {
        let n = self.by_q.len().max(o.by_q.len());
        BiPoly::new((0..n).map(|k| &self.q_coeff(k) - &o.q_coeff(k)).collect())
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, o: &BiPoly) -> BiPoly {
        if self.is_zero() || o.is_zero() {
            return BiPoly::zero();
        }
        let mut v = vec![Poly::zero(); self.by_q.len() + o.by_q.len() - 1];
        for (i, a) in self.by_q.iter().enumerate() {
            for (j, b) in o.by_q.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        BiPoly::new(v)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.by_q.iter().enumerate().flat_map(|(k, p)| {
            p.coeffs().iter().enumerate().map(move |(i, c)| {
                let m = [monomial_name("x", i), monomial_name("q", k)]
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>()
                    .join("*");
                (c.clone(), m)
            })
        });
        f.write_str(&fmt_terms(terms))
    }
}
