//! Néron–Severi lattices of surfaces: intersection pairings, divisor classes
//! and nef/pseudoeffective cone membership.
//!
//! Cones are input data. A polyhedral cone is cut out by finitely many
//! classes `L` (`C` is inside iff `C·L ≥ 0` for all of them); a quadratic
//! cone is one nappe of the light cone `{C·C ≥ 0, C·h ≥ 0}` for an ample
//! reference class `h`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{format_q, parse_q, q, serde_q, Q};
use crate::surd::Surd;

pub const DEFAULT_MAX_RANK: usize = 16;

/// A class in a declared lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    coords: Vec<Q>,
    lattice: Arc<str>,
}

impl DivisorClass {
    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn lattice_id(&self) -> &str {
        &self.lattice
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &DivisorClass) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::ForeignClass(format!("{} vs {}", self.lattice, other.lattice)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check_same(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(DivisorClass { coords, lattice: self.lattice.clone() })
    }

    pub fn try_sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check_same(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        Ok(DivisorClass { coords, lattice: self.lattice.clone() })
    }

    pub fn scaled(&self, k: &Q) -> DivisorClass {
        DivisorClass { coords: self.coords.iter().map(|a| a * k).collect(), lattice: self.lattice.clone() }
    }

    /// `self - t·dir`.
    pub fn shifted(&self, t: &Q, dir: &DivisorClass) -> Result<DivisorClass> {
        self.try_sub(&dir.scaled(t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionForm {
    matrix: Vec<Vec<Q>>,
}

impl IntersectionForm {
    pub fn new(matrix: Vec<Vec<Q>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("intersection matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidInput(format!("intersection matrix not symmetric at ({i},{j})")));
                }
            }
        }
        if linalg::determinant(&matrix).is_zero() {
            return Err(Error::InvalidInput("intersection form is degenerate".into()));
        }
        Ok(IntersectionForm { matrix })
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn pair(&self, a: &[Q], b: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() && !self.matrix[i][j].is_zero() {
                    acc += ai * &self.matrix[i][j] * bj;
                }
            }
        }
        acc
    }
}

/// Cone description; all classes are coordinate vectors in the owning
/// surface's basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeSpec {
    Polyhedral { inequalities: Vec<Vec<Q>> },
    Quadratic { ample_reference: Vec<Q> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    pub source: Arc<str>,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceData {
    id: Arc<str>,
    basis: Vec<String>,
    form: IntersectionForm,
    nef: ConeSpec,
    pseff: ConeSpec,
    negative_curves: Vec<Vec<Q>>,
    point_multiplicities: BTreeMap<usize, u32>,
    pullback: Option<Pullback>,
}

/// Result of [`cone_exit_time`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExitTime {
    Finite(Surd),
    Infinite,
}

impl ExitTime {
    pub fn finite(&self) -> Option<&Surd> {
        match self {
            ExitTime::Finite(t) => Some(t),
            ExitTime::Infinite => None,
        }
    }
}

impl SurfaceData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: &str,
        basis: Vec<String>,
        matrix: Vec<Vec<Q>>,
        nef: ConeSpec,
        pseff: ConeSpec,
        negative_curves: Vec<Vec<Q>>,
        point_multiplicities: BTreeMap<usize, u32>,
    ) -> Result<Self> {
        Self::with_rank_limit(id, basis, matrix, nef, pseff, negative_curves, point_multiplicities, DEFAULT_MAX_RANK)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_rank_limit(
        id: &str,
        basis: Vec<String>,
        matrix: Vec<Vec<Q>>,
        nef: ConeSpec,
        pseff: ConeSpec,
        negative_curves: Vec<Vec<Q>>,
        point_multiplicities: BTreeMap<usize, u32>,
        max_rank: usize,
    ) -> Result<Self> {
        if matrix.len() > max_rank {
            return Err(Error::RankTooLarge { rank: matrix.len(), limit: max_rank });
        }
        let form = IntersectionForm::new(matrix)?;
        let s = SurfaceData {
            id: id.into(),
            basis,
            form,
            nef,
            pseff,
            negative_curves,
            point_multiplicities,
            pullback: None,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.rank();
        if self.basis.len() != n {
            return Err(Error::InvalidInput("basis length differs from matrix size".into()));
        }
        for (i, name) in self.basis.iter().enumerate() {
            if name.is_empty() || self.basis[..i].contains(name) {
                return Err(Error::InvalidInput(format!("bad or duplicate basis label {name:?}")));
            }
        }
        for cone in [&self.nef, &self.pseff] {
            match cone {
                ConeSpec::Polyhedral { inequalities } => {
                    if inequalities.is_empty() || inequalities.iter().any(|l| l.len() != n) {
                        return Err(Error::InvalidInput("polyhedral cone needs inequalities of full length".into()));
                    }
                }
                ConeSpec::Quadratic { ample_reference } => {
                    if ample_reference.len() != n || !self.form.pair(ample_reference, ample_reference).is_positive() {
                        return Err(Error::InvalidInput("quadratic cone reference must satisfy h·h > 0".into()));
                    }
                }
            }
        }
        for (i, c) in self.negative_curves.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidInput(format!("negative curve {i} has wrong length")));
            }
            if !self.form.pair(c, c).is_negative() {
                return Err(Error::InvalidInput(format!("negative curve {i} has C·C >= 0")));
            }
            if !self.contains_coords(&self.pseff, c) {
                return Err(Error::InvalidInput(format!("negative curve {i} is not pseudoeffective")));
            }
        }
        if let Some(&bad) = self.point_multiplicities.keys().find(|&&k| k >= self.negative_curves.len()) {
            return Err(Error::InvalidInput(format!("point multiplicity for unknown curve {bad}")));
        }
        // nef ⊂ pseff, spot-checked on a deterministic sample of small classes
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..256 {
            let v: Vec<Q> = (0..n)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    q(((state >> 33) % 7) as i64 - 3)
                })
                .collect();
            if self.contains_coords(&self.nef, &v) && !self.contains_coords(&self.pseff, &v) {
                return Err(Error::InvalidInput("nef cone is not contained in pseudoeffective cone".into()));
            }
        }
        if let ConeSpec::Quadratic { ample_reference } = &self.nef {
            if !self.contains_coords(&self.pseff, ample_reference) {
                return Err(Error::InvalidInput("nef reference class is not pseudoeffective".into()));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn form(&self) -> &IntersectionForm {
        &self.form
    }

    pub fn rank(&self) -> usize {
        self.form.rank()
    }

    pub fn nef(&self) -> &ConeSpec {
        &self.nef
    }

    pub fn pseff(&self) -> &ConeSpec {
        &self.pseff
    }

    pub fn pullback(&self) -> Option<&Pullback> {
        self.pullback.as_ref()
    }

    pub fn negative_curve_count(&self) -> usize {
        self.negative_curves.len()
    }

    pub fn negative_curve(&self, i: usize) -> DivisorClass {
        self.class(self.negative_curves[i].clone()).expect("validated")
    }

    pub fn negative_curves(&self) -> Vec<DivisorClass> {
        (0..self.negative_curves.len()).map(|i| self.negative_curve(i)).collect()
    }

    pub fn point_multiplicities(&self) -> &BTreeMap<usize, u32> {
        &self.point_multiplicities
    }

    /// Same surface with the negative curves listed in `order`.
    pub fn with_negative_curve_order(&self, order: &[usize]) -> Result<SurfaceData> {
        let n = self.negative_curves.len();
        let mut seen = vec![false; n];
        for &i in order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput("not a permutation of the negative curves".into()));
            }
        }
        if order.len() != n {
            return Err(Error::InvalidInput("not a permutation of the negative curves".into()));
        }
        let mut out = self.clone();
        out.negative_curves = order.iter().map(|&i| self.negative_curves[i].clone()).collect();
        out.point_multiplicities = self
            .point_multiplicities
            .iter()
            .map(|(&old, &m)| (order.iter().position(|&i| i == old).expect("permutation"), m))
            .collect();
        Ok(out)
    }

    pub fn class(&self, coords: Vec<Q>) -> Result<DivisorClass> {
        if coords.len() != self.rank() {
            return Err(Error::InvalidInput(format!("class has {} coordinates, lattice rank is {}", coords.len(), self.rank())));
        }
        Ok(DivisorClass { coords, lattice: self.id.clone() })
    }

    pub fn class_from_ints(&self, coords: &[i64]) -> Result<DivisorClass> {
        self.class(coords.iter().map(|&x| q(x)).collect())
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass { coords: vec![Q::zero(); self.rank()], lattice: self.id.clone() }
    }

    fn owns(&self, c: &DivisorClass) -> Result<()> {
        if *c.lattice != *self.id {
            return Err(Error::ForeignClass(format!("class of {} used on {}", c.lattice, self.id)));
        }
        Ok(())
    }

    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Q> {
        self.owns(a)?;
        self.owns(b)?;
        Ok(self.form.pair(&a.coords, &b.coords))
    }

    fn contains_coords(&self, cone: &ConeSpec, c: &[Q]) -> bool {
        match cone {
            ConeSpec::Polyhedral { inequalities } => {
                inequalities.iter().all(|l| !self.form.pair(c, l).is_negative())
            }
            ConeSpec::Quadratic { ample_reference } => {
                !self.form.pair(c, c).is_negative() && !self.form.pair(c, ample_reference).is_negative()
            }
        }
    }

    pub fn is_nef(&self, c: &DivisorClass) -> Result<bool> {
        cone_contains(&self.nef, c, self)
    }

    /// Carries a class of the source surface to this pulled-back surface.
    pub fn pull_back_class(&self, alpha: &DivisorClass) -> Result<DivisorClass> {
        match &self.pullback {
            Some(p) if *p.source == *alpha.lattice => self.class(alpha.coords.clone()),
            _ => Err(Error::ForeignClass(format!("{} is not pulled back from {}", self.id, alpha.lattice))),
        }
    }

    /// Parses expressions such as `9f1+3f2`, `H - E`, `1/2*H+2E`.
    pub fn parse_class(&self, text: &str) -> Result<DivisorClass> {
        let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |msg: &str| Error::Parse(format!("{msg} in class expression {text:?}"));
        if src.is_empty() {
            return Err(bad("empty"));
        }
        let mut labels: Vec<(usize, Vec<char>)> =
            self.basis.iter().enumerate().map(|(i, l)| (i, l.chars().collect())).collect();
        labels.sort_by_key(|l| std::cmp::Reverse(l.1.len()));
        let mut coords = vec![Q::zero(); self.rank()];
        let mut pos = 0;
        if src == ['0'] {
            return self.class(coords);
        }
        while pos < src.len() {
            let mut sign = Q::one();
            if pos > 0 || src[pos] == '+' || src[pos] == '-' {
                match src.get(pos) {
                    Some('+') => pos += 1,
                    Some('-') => {
                        sign = -sign;
                        pos += 1
                    }
                    _ => return Err(bad("expected + or -")),
                }
            }
            let start = pos;
            while pos < src.len() && (src[pos].is_ascii_digit() || src[pos] == '/') {
                pos += 1;
            }
            let coeff = if pos > start {
                parse_q(&src[start..pos].iter().collect::<String>())?
            } else {
                Q::one()
            };
            if pos < src.len() && src[pos] == '*' && pos > start {
                pos += 1;
            }
            let Some((idx, len)) = labels
                .iter()
                .find(|(_, l)| src[pos..].starts_with(l))
                .map(|(i, l)| (*i, l.len()))
            else {
                return Err(bad("unknown basis label"));
            };
            pos += len;
            coords[idx] += sign * coeff;
        }
        self.class(coords)
    }

    pub fn format_class(&self, c: &DivisorClass) -> String {
        let mut out = String::new();
        for (x, label) in c.coords.iter().zip(&self.basis) {
            if x.is_zero() {
                continue;
            }
            let mag = x.abs();
            if x.is_negative() {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            if !mag.is_one() {
                out.push_str(&format_q(&mag));
                if !mag.is_integer() {
                    out.push('*');
                }
            }
            out.push_str(label);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SurfaceDoc::from(self)).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: SurfaceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_surface(DEFAULT_MAX_RANK)
    }

    pub fn from_json_str_with_limit(text: &str, max_rank: usize) -> Result<Self> {
        let doc: SurfaceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_surface(max_rank)
    }
}

/// `A·B` on `S`.
pub fn intersect(a: &DivisorClass, b: &DivisorClass, s: &SurfaceData) -> Result<Q> {
    s.intersect(a, b)
}

pub fn cone_contains(cone: &ConeSpec, c: &DivisorClass, s: &SurfaceData) -> Result<bool> {
    s.owns(c)?;
    Ok(s.contains_coords(cone, &c.coords))
}

/// `sup { t ≥ 0 : B − t·C ∈ cone }`.
pub fn cone_exit_time(cone: &ConeSpec, b: &DivisorClass, c: &DivisorClass, s: &SurfaceData) -> Result<ExitTime> {
    s.owns(b)?;
    s.owns(c)?;
    if c.is_zero() {
        return Err(Error::ZeroDirection);
    }
    if !s.contains_coords(cone, &b.coords) {
        return Err(Error::BaseOutsideCone);
    }
    let pair = |x: &[Q], y: &[Q]| s.form.pair(x, y);
    match cone {
        ConeSpec::Polyhedral { inequalities } => {
            let best = inequalities
                .iter()
                .filter_map(|l| {
                    let cl = pair(&c.coords, l);
                    cl.is_positive().then(|| pair(&b.coords, l) / cl)
                })
                .min();
            Ok(best.map_or(ExitTime::Infinite, |t| ExitTime::Finite(Surd::from_rational(t))))
        }
        ConeSpec::Quadratic { ample_reference: h } => {
            let bb = pair(&b.coords, &b.coords);
            let bc = pair(&b.coords, &c.coords);
            let cc = pair(&c.coords, &c.coords);
            let bh = pair(&b.coords, h);
            let ch = pair(&c.coords, h);
            // q(t) = (B − tC)², l(t) = (B − tC)·h
            let two = q(2);
            let inside = |t: &Q| {
                let qt = &bb - &two * &bc * t + &cc * t * t;
                let lt = &bh - &ch * t;
                !qt.is_negative() && !lt.is_negative()
            };
            let mut candidates = Surd::quadratic_roots(&cc, &(-&two * &bc), &bb);
            if !ch.is_zero() {
                candidates.push(Surd::from_rational(&bh / &ch));
            }
            let zero = Surd::zero();
            candidates.retain(|t| *t >= zero);
            candidates.sort();
            candidates.dedup();
            for (i, t) in candidates.iter().enumerate() {
                let probe = match candidates.get(i + 1) {
                    Some(next) => t.rational_between(next),
                    None => t.enclosure(4).1 + Q::one(),
                };
                if !inside(&probe) {
                    return Ok(ExitTime::Finite(t.clone()));
                }
            }
            Ok(ExitTime::Infinite)
        }
    }
}

/// Models pullback along a generically finite dominant morphism of degree
/// `m`: the pairing scales by `m`, cones and negative curves are carried over
/// coordinate-wise.
pub fn pullback_embed(s: &SurfaceData, m: u32) -> Result<SurfaceData> {
    if m == 0 {
        return Err(Error::InvalidInput("pullback degree must be positive".into()));
    }
    let k = q(m as i64);
    let matrix = s.form.matrix.iter().map(|r| r.iter().map(|x| x * &k).collect()).collect();
    Ok(SurfaceData {
        id: format!("pullback[{m}]({})", s.id).into(),
        basis: s.basis.iter().map(|b| format!("π*{b}")).collect(),
        form: IntersectionForm { matrix },
        nef: s.nef.clone(),
        pseff: s.pseff.clone(),
        negative_curves: s.negative_curves.clone(),
        point_multiplicities: s.point_multiplicities.clone(),
        pullback: Some(Pullback { source: s.id.clone(), degree: m }),
    })
}

impl fmt::Display for SurfaceData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (basis {})", self.id, self.basis.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum ConeDoc {
    #[serde(rename = "POLYHEDRAL", alias = "polyhedral")]
    Polyhedral {
        #[serde(with = "serde_q::mat")]
        inequalities: Vec<Vec<Q>>,
    },
    #[serde(rename = "QUADRATIC", alias = "quadratic")]
    Quadratic {
        #[serde(with = "serde_q::vec")]
        ample_reference: Vec<Q>,
    },
}

impl From<&ConeSpec> for ConeDoc {
    fn from(c: &ConeSpec) -> Self {
        match c {
            ConeSpec::Polyhedral { inequalities } => ConeDoc::Polyhedral { inequalities: inequalities.clone() },
            ConeSpec::Quadratic { ample_reference } => ConeDoc::Quadratic { ample_reference: ample_reference.clone() },
        }
    }
}

impl From<ConeDoc> for ConeSpec {
    fn from(c: ConeDoc) -> Self {
        match c {
            ConeDoc::Polyhedral { inequalities } => ConeSpec::Polyhedral { inequalities },
            ConeDoc::Quadratic { ample_reference } => ConeSpec::Quadratic { ample_reference },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PullbackDoc {
    source: String,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct SurfaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    basis: Vec<String>,
    #[serde(with = "serde_q::mat")]
    matrix: Vec<Vec<Q>>,
    nef: ConeDoc,
    pseff: ConeDoc,
    #[serde(default, with = "serde_q::mat")]
    negative_curves: Vec<Vec<Q>>,
    #[serde(default)]
    point_multiplicities: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pullback: Option<PullbackDoc>,
}

impl From<&SurfaceData> for SurfaceDoc {
    fn from(s: &SurfaceData) -> Self {
        SurfaceDoc {
            id: Some(s.id.to_string()),
            basis: s.basis.clone(),
            matrix: s.form.matrix.clone(),
            nef: (&s.nef).into(),
            pseff: (&s.pseff).into(),
            negative_curves: s.negative_curves.clone(),
            point_multiplicities: s.point_multiplicities.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            pullback: s.pullback.as_ref().map(|p| PullbackDoc { source: p.source.to_string(), degree: p.degree }),
        }
    }
}

impl SurfaceDoc {
    fn into_surface(self, max_rank: usize) -> Result<SurfaceData> {
        let id = self.id.unwrap_or_else(|| format!("NS({})", self.basis.join(",")));
        let mut mults = BTreeMap::new();
        for (k, v) in self.point_multiplicities {
            let idx: usize = k.parse().map_err(|_| Error::Parse(format!("bad negative-curve index {k:?}")))?;
            mults.insert(idx, v);
        }
        let mut s = SurfaceData::with_rank_limit(
            &id,
            self.basis,
            self.matrix,
            self.nef.into(),
            self.pseff.into(),
            self.negative_curves,
            mults,
            max_rank,
        )?;
        s.pullback = self.pullback.map(|p| Pullback { source: p.source.into(), degree: p.degree });
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::qf;

    #[test]
    fn exe_pairing() {
        let s = fixtures::abelian_exe();
        let f1 = s.parse_class("f1").unwrap();
        let f2 = s.parse_class("f2").unwrap();
        assert_eq!(intersect(&f1, &f2, &s).unwrap(), q(1));
        // adjunction on an abelian surface: 2g − 2 = 0 = C² for an elliptic fibre
        assert_eq!(intersect(&f1, &f1, &s).unwrap(), q(0));
        let b = s.parse_class("9f1+3f2").unwrap();
        let c = s.parse_class("f1+f2+Delta").unwrap();
        assert_eq!(intersect(&b, &c, &s).unwrap(), q(24));
        assert_eq!(intersect(&s.zero_class(), &c, &s).unwrap(), q(0));
    }

    #[test]
    fn foreign_class_rejected() {
        let s = fixtures::abelian_exe();
        let t = fixtures::blowup_plane();
        let e = t.parse_class("E").unwrap();
        let err = intersect(&e, &e, &s).unwrap_err();
        assert!(matches!(err, Error::ForeignClass(_)));
        assert!(err.to_string().starts_with("foreign class"));
    }

    #[test]
    fn quadratic_membership() {
        let s = fixtures::abelian_exe();
        let f1 = s.parse_class("f1").unwrap();
        assert!(cone_contains(s.nef(), &f1, &s).unwrap());
        assert!(cone_contains(s.nef(), &s.zero_class(), &s).unwrap());
        assert!(!cone_contains(s.nef(), &s.parse_class("-f1").unwrap(), &s).unwrap());
    }

    fn bisect_exit(s: &SurfaceData, b: &DivisorClass, c: &DivisorClass, mut lo: Q, mut hi: Q) -> Q {
        for _ in 0..60 {
            let mid = (&lo + &hi) / q(2);
            if cone_contains(s.nef(), &b.shifted(&mid, c).unwrap(), s).unwrap() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn exe_exit_time_matches_bisection() {
        let s = fixtures::abelian_exe();
        let b = s.parse_class("9f1+3f2").unwrap();
        let c = s.parse_class("f1+f2+Delta").unwrap();
        let mu = cone_exit_time(s.nef(), &b, &c, &s).unwrap();
        let mu = mu.finite().unwrap().clone();
        assert_eq!(mu.minimal_polynomial(), vec![q(9), q(-8), q(1)]);
        let approx = bisect_exit(&s, &b, &c, q(0), q(3));
        assert!((crate::rational::to_f64(&approx) - mu.to_f64()).abs() < 1e-12);
        assert!((mu.to_f64() - 1.354248688).abs() < 1e-9);
    }

    #[test]
    fn exit_time_edge_cases() {
        let s = fixtures::abelian_exe();
        let h = s.parse_class("f1+f2+Delta").unwrap();
        assert_eq!(cone_exit_time(s.nef(), &h, &h.scaled(&q(-1)), &s).unwrap(), ExitTime::Infinite);
        assert_eq!(cone_exit_time(s.nef(), &h, &s.zero_class(), &s).unwrap_err(), Error::ZeroDirection);
        let outside = s.parse_class("-f1").unwrap();
        assert_eq!(cone_exit_time(s.nef(), &outside, &h, &s).unwrap_err(), Error::BaseOutsideCone);
        // boundary base moving inward: f1 − t(−f2) stays nef
        let f1 = s.parse_class("f1").unwrap();
        let mf2 = s.parse_class("-f2").unwrap();
        assert_eq!(cone_exit_time(s.nef(), &f1, &mf2, &s).unwrap(), ExitTime::Infinite);
        // boundary base moving outward: f1 − t·f2 leaves at once
        let f2 = s.parse_class("f2").unwrap();
        assert_eq!(cone_exit_time(s.nef(), &f1, &f2, &s).unwrap(), ExitTime::Finite(Surd::zero()));
    }

    #[test]
    fn polyhedral_exit_time() {
        let s = fixtures::blowup_plane();
        let b = s.parse_class("2H-E").unwrap();
        let c = s.parse_class("H-E").unwrap();
        let mu = cone_exit_time(s.nef(), &b, &c, &s).unwrap();
        assert_eq!(mu, ExitTime::Finite(Surd::from_rational(q(1))));
    }

    #[test]
    fn pullback_scales_pairing() {
        let s = fixtures::abelian_exe();
        let same = pullback_embed(&s, 1).unwrap();
        assert_eq!(same.form().matrix(), s.form().matrix());
        let p = pullback_embed(&s, 2).unwrap();
        let f1 = p.pull_back_class(&s.parse_class("f1").unwrap()).unwrap();
        let f2 = p.pull_back_class(&s.parse_class("f2").unwrap()).unwrap();
        assert_eq!(intersect(&f1, &f2, &p).unwrap(), q(2));
        assert_eq!(p.basis()[0], "π*f1");
        assert!(pullback_embed(&s, 0).is_err());
    }

    #[test]
    fn class_expressions() {
        let s = fixtures::blowup_plane();
        let c = s.parse_class("1/2*H - 3E").unwrap();
        assert_eq!(c.coords(), &[qf(1, 2), q(-3)]);
        assert_eq!(s.format_class(&c), "1/2*H-3E");
        assert_eq!(s.format_class(&s.parse_class("H+2E").unwrap()), "H+2E");
        assert_eq!(s.format_class(&s.zero_class()), "0");
        assert!(s.parse_class("H+X").is_err());
        assert!(s.parse_class("").is_err());
    }

    #[test]
    fn invalid_surfaces_rejected() {
        let bad = SurfaceData::new(
            "bad",
            vec!["A".into(), "B".into()],
            vec![vec![q(1), q(2)], vec![q(3), q(1)]],
            ConeSpec::Quadratic { ample_reference: vec![q(1), q(0)] },
            ConeSpec::Quadratic { ample_reference: vec![q(1), q(0)] },
            vec![],
            BTreeMap::new(),
        );
        assert!(bad.is_err());
        let big: Vec<Vec<Q>> = (0..17).map(|i| (0..17).map(|j| q((i == j) as i64)).collect()).collect();
        let err = SurfaceData::new(
            "big",
            (0..17).map(|i| format!("e{i}")).collect(),
            big,
            ConeSpec::Polyhedral { inequalities: vec![vec![q(1); 17]] },
            ConeSpec::Polyhedral { inequalities: vec![vec![q(1); 17]] },
            vec![],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert_eq!(err, Error::RankTooLarge { rank: 17, limit: 16 });
    }

    #[test]
    fn json_round_trip() {
        for s in [fixtures::abelian_exe(), fixtures::blowup_plane()] {
            let text = s.to_json().to_string();
            assert_eq!(SurfaceData::from_json_str(&text).unwrap(), s);
        }
        let p = pullback_embed(&fixtures::abelian_exe(), 3).unwrap();
        assert_eq!(SurfaceData::from_json_str(&p.to_json().to_string()).unwrap(), p);
    }
}
