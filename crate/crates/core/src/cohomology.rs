//! `dim Hⁱ(X, O(nD))` for split line bundles on products of projective
//! spaces and elliptic curves, by Bott's formula on `Pᵐ`, Riemann–Roch on
//! an elliptic curve, and the Künneth formula.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomic::PowerSeriesTable;
use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    ProjectiveSpace(u32),
    /// `trivial_degree_zero`: whether the degree-0 part of the ray restricts
    /// to the trivial bundle (otherwise a non-torsion degree-0 bundle).
    EllipticCurve { trivial_degree_zero: bool },
}

impl Factor {
    pub fn dimension(&self) -> usize {
        match self {
            Factor::ProjectiveSpace(m) => *m as usize,
            Factor::EllipticCurve { .. } => 1,
        }
    }

    /// `(h⁰, …, h^dim)` of the degree-`a` bundle; `n` is the multiple of the
    /// ray, used to recognise the structure sheaf at `n = 0`.
    fn cohomology(&self, a: i64, n: usize) -> Vec<BigInt> {
        match *self {
            Factor::ProjectiveSpace(m) => cohomology_projective_space(m, a),
            Factor::EllipticCurve { trivial_degree_zero } => {
                cohomology_elliptic(a, trivial_degree_zero || n == 0).to_vec()
            }
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::ProjectiveSpace(m) => write!(f, "P{m}"),
            Factor::EllipticCurve { trivial_degree_zero: true } => write!(f, "E"),
            Factor::EllipticCurve { trivial_degree_zero: false } => write!(f, "E~"),
        }
    }
}

impl FromStr for Factor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" => Ok(Factor::EllipticCurve { trivial_degree_zero: true }),
            "E~" => Ok(Factor::EllipticCurve { trivial_degree_zero: false }),
            _ => {
                let m: u32 = s
                    .strip_prefix('P')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown factor {s:?} (expected Pm, E or E~)")))?;
                if m == 0 {
                    return Err(Error::InvalidInput("projective space must have dimension >= 1".into()));
                }
                Ok(Factor::ProjectiveSpace(m))
            }
        }
    }
}

/// Parses `P2xP2`, `ExP1`, ….
pub fn parse_factors(spec: &str) -> Result<Vec<Factor>> {
    spec.split('x').map(|p| p.trim().parse()).collect()
}

pub fn format_factors(factors: &[Factor]) -> String {
    factors.iter().map(Factor::to_string).collect::<Vec<_>>().join("x")
}

/// Per-factor degrees `c_j·n` of `nD`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultidegreeRay(Vec<i64>);

impl MultidegreeRay {
    pub fn new(c: Vec<i64>) -> Self {
        MultidegreeRay(c)
    }

    pub fn slopes(&self) -> &[i64] {
        &self.0
    }

    pub fn at(&self, n: usize) -> Vec<i64> {
        self.0.iter().map(|c| c * n as i64).collect()
    }
}

impl FromStr for MultidegreeRay {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad ray entry {x:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(MultidegreeRay)
    }
}

fn binomial(n: i64, k: u32) -> BigInt {
    if n < k as i64 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k as i64 {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bott's formula for `O(a)` on `Pᵐ`.
pub fn cohomology_projective_space(m: u32, a: i64) -> Vec<BigInt> {
    let mut h = vec![BigInt::zero(); m as usize + 1];
    if a >= 0 {
        h[0] = binomial(a + m as i64, m);
    }
    if a < -(m as i64) {
        h[m as usize] = binomial(-a - 1, m);
    }
    h
}

/// `(h⁰, h¹)` of a degree-`e` line bundle on an elliptic curve.
pub fn cohomology_elliptic(e: i64, trivial: bool) -> [BigInt; 2] {
    match e {
        e if e > 0 => [BigInt::from(e), BigInt::zero()],
        e if e < 0 => [BigInt::zero(), BigInt::from(-e)],
        _ if trivial => [BigInt::one(), BigInt::one()],
        _ => [BigInt::zero(), BigInt::zero()],
    }
}

/// `a_{n,i} = dim Hⁱ(X, O(nD))` for `0 ≤ n ≤ N`, `0 ≤ i ≤ d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    pub n_max: usize,
    pub dimension: usize,
    /// `entries[n][i]`.
    pub entries: Vec<Vec<BigInt>>,
    pub factors: Option<Vec<Factor>>,
    pub ray: Option<MultidegreeRay>,
}

impl CoefficientTable {
    pub fn new(dimension: usize, entries: Vec<Vec<BigInt>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("empty coefficient table".into()));
        }
        if entries.iter().any(|r| r.len() != dimension + 1) {
            return Err(Error::InvalidInput("table rows must have d + 1 entries".into()));
        }
        if entries.iter().flatten().any(|x| x < &BigInt::zero()) {
            return Err(Error::InvalidInput("negative cohomology dimension".into()));
        }
        Ok(CoefficientTable { n_max: entries.len() - 1, dimension, entries, factors: None, ray: None })
    }

    pub fn get(&self, n: usize, i: usize) -> &BigInt {
        &self.entries[n][i]
    }

    /// `f_i = Σ_n a_{n,i} xⁿ`.
    pub fn q_slice(&self, i: usize) -> PowerSeriesTable {
        PowerSeriesTable::new(self.entries.iter().map(|r| Q::from_integer(r[i].clone())).collect())
    }

    /// `χ(n) = Σ_i (−1)ⁱ a_{n,i}`.
    pub fn euler_characteristics(&self) -> Vec<BigInt> {
        self.entries
            .iter()
            .map(|r| r.iter().enumerate().fold(BigInt::zero(), |acc, (i, x)| if i % 2 == 0 { acc + x } else { acc - x }))
            .collect()
    }

    /// CSV with header `n,i,dim`: every entry of the `n = 0` row plus all
    /// nonzero entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,i,dim\n");
        for (n, row) in self.entries.iter().enumerate() {
            for (i, x) in row.iter().enumerate() {
                if n == 0 || !x.is_zero() {
                    out.push_str(&format!("{n},{i},{x}\n"));
                }
            }
        }
        out
    }

    /// Reads [`to_csv`](Self::to_csv) output; `sidecar` (if any) supplies
    /// `N` and `d`, otherwise they are inferred from the rows present.
    pub fn from_csv(text: &str, sidecar: Option<&TableSidecar>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "n,i,dim" => {}
            _ => return Err(Error::Parse("expected CSV header `n,i,dim`".into())),
        }
        let mut rows = Vec::new();
        for l in lines {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad CSV row {l:?}")));
            }
            let n: usize = f[0].parse().map_err(|_| Error::Parse(format!("bad n in {l:?}")))?;
            let i: usize = f[1].parse().map_err(|_| Error::Parse(format!("bad i in {l:?}")))?;
            let x: BigInt = f[2].parse().map_err(|_| Error::Parse(format!("bad dim in {l:?}")))?;
            rows.push((n, i, x));
        }
        let n_max = sidecar.map(|s| s.n_max).or_else(|| rows.iter().map(|r| r.0).max()).unwrap_or(0);
        let d = sidecar.map(|s| s.dimension).or_else(|| rows.iter().map(|r| r.1).max()).unwrap_or(0);
        let mut entries = vec![vec![BigInt::zero(); d + 1]; n_max + 1];
        for (n, i, x) in rows {
            if n > n_max || i > d {
                return Err(Error::Parse(format!("entry ({n},{i}) outside table bounds")));
            }
            entries[n][i] = x;
        }
        let mut t = CoefficientTable::new(d, entries)?;
        if let Some(s) = sidecar {
            t.factors = Some(parse_factors(&s.factors)?);
            t.ray = Some(MultidegreeRay(s.ray.clone()));
        }
        Ok(t)
    }

    pub fn sidecar(&self) -> Option<TableSidecar> {
        Some(TableSidecar {
            factors: format_factors(self.factors.as_ref()?),
            ray: self.ray.as_ref()?.0.clone(),
            n_max: self.n_max,
            dimension: self.dimension,
        })
    }

    /// The table restricted to `n ≡ r (mod m)`, reindexed by `n = am + r`.
    pub fn residue_class(&self, m: usize, r: usize) -> Vec<Vec<BigInt>> {
        self.entries.iter().skip(r).step_by(m).cloned().collect()
    }
}

/// JSON sidecar describing how a CSV table was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSidecar {
    pub factors: String,
    pub ray: Vec<i64>,
    #[serde(rename = "N")]
    pub n_max: usize,
    #[serde(rename = "d")]
    pub dimension: usize,
}

/// Künneth: `a_{n,i} = Σ_{i₁+…+i_k = i} Π_j h^{i_j}(factor_j, c_j·n)`.
pub fn kunneth_table(factors: &[Factor], ray: &MultidegreeRay, n_max: usize) -> Result<CoefficientTable> {
    if factors.is_empty() || factors.len() != ray.0.len() {
        return Err(Error::InvalidInput("need one ray slope per factor".into()));
    }
    if ray.0.iter().all(|&c| c == 0) {
        return Err(Error::InvalidInput("ray of the zero divisor".into()));
    }
    if let Some(Factor::ProjectiveSpace(0)) = factors.iter().find(|f| matches!(f, Factor::ProjectiveSpace(0))) {
        return Err(Error::InvalidInput("projective space must have dimension >= 1".into()));
    }
    let d: usize = factors.iter().map(Factor::dimension).sum();
    let entries = (0..=n_max)
        .map(|n| {
            let degrees = ray.at(n);
            factors.iter().zip(&degrees).fold(vec![BigInt::one()], |acc, (f, &a)| {
                let h = f.cohomology(a, n);
                let mut out = vec![BigInt::zero(); acc.len() + h.len() - 1];
                for (i, x) in acc.iter().enumerate() {
                    for (j, y) in h.iter().enumerate() {
                        out[i + j] += x * y;
                    }
                }
                out
            })
        })
        .collect();
    let mut t = CoefficientTable::new(d, entries)?;
    t.factors = Some(factors.to_vec());
    t.ray = Some(ray.clone());
    Ok(t)
}
