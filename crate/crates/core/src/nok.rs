//! Newton–Okounkov bodies of big nef classes on surfaces for a flag
//! `(curve C, point x)`, and the two-parameter slice family on `E×E`.
//!
//! For a surface the body is `{(t, y) : 0 ≤ t ≤ μ, α(t) ≤ y ≤ β(t)}` where
//! `μ` is the exit time of `B − tC` from the pseudoeffective cone, `N_t` is
//! the negative part of `B − tC`, `α(t) = ord_x(N_t|_C)` and
//! `β(t) = α(t) + P_t·C`. Both functions are affine on each Zariski chamber.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{cone_exit_time, DivisorClass, ExitTime, SurfaceData};
use crate::linalg;
use crate::rational::{format_q, parse_q, primitive_integer_vector, q, qf, serde_q, Q};
use crate::surd::Surd;
use crate::zariski::gram;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagOnSurface {
    pub curve_class: DivisorClass,
    /// Negative curve through the flag point; `None` for a generic point.
    pub point_on_negative_curve: Option<usize>,
}

impl FlagOnSurface {
    pub fn new(s: &SurfaceData, curve_class: DivisorClass, point_on_negative_curve: Option<usize>) -> Result<Self> {
        if curve_class.is_zero() {
            return Err(Error::InvalidInput("flag curve class is zero".into()));
        }
        if !crate::zariski::is_pseudoeffective(s, &curve_class)? {
            return Err(Error::InvalidInput("flag curve class is not pseudoeffective".into()));
        }
        if let Some(i) = point_on_negative_curve {
            if !s.point_multiplicities().contains_key(&i) {
                return Err(Error::InvalidInput(format!("no point multiplicity recorded for negative curve {i}")));
            }
        }
        Ok(FlagOnSurface { curve_class, point_on_negative_curve })
    }

    pub fn generic(s: &SurfaceData, curve_class: DivisorClass) -> Result<Self> {
        Self::new(s, curve_class, None)
    }
}

/// `slope·t + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affine {
    #[serde(with = "serde_q")]
    pub slope: Q,
    #[serde(with = "serde_q")]
    pub intercept: Q,
}

impl Affine {
    pub fn new(slope: Q, intercept: Q) -> Self {
        Affine { slope, intercept }
    }

    pub fn eval(&self, t: &Q) -> Q {
        &self.slope * t + &self.intercept
    }

    pub fn eval_surd(&self, t: &Surd) -> Surd {
        t.scale(&self.slope).add_rational(&self.intercept)
    }

    /// Exact `∫ self dt` over `[a, b]`.
    fn integral(&self, a: &Surd, b: &Surd) -> Surd {
        let half = qf(1, 2);
        let sq = &(b * b) - &(a * a);
        let lin = b - a;
        &sq.scale(&(&self.slope * half)) + &lin.scale(&self.intercept)
    }
}

impl std::ops::Sub for &Affine {
    type Output = Affine;
    fn sub(self, o: &Affine) -> Affine {
        Affine::new(&self.slope - &o.slope, &self.intercept - &o.intercept)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyPiece {
    pub lower: Affine,
    pub upper: Affine,
}

/// Two-dimensional Newton–Okounkov body given by its chamber structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NokBody {
    /// `0 = t_0 < … < t_m = μ`.
    pub breakpoints: Vec<Surd>,
    /// One piece per interval `[t_k, t_{k+1}]`.
    pub pieces: Vec<BodyPiece>,
    /// Counter-clockwise boundary vertices starting at the lower-left corner.
    pub vertices: Vec<(Surd, Surd)>,
}

impl NokBody {
    fn from_pieces(breakpoints: Vec<Surd>, pieces: Vec<BodyPiece>) -> Self {
        let vertices = polygon_vertices(&breakpoints, &pieces);
        NokBody { breakpoints, pieces, vertices }
    }

    pub fn t_extent(&self) -> &Surd {
        self.breakpoints.last().expect("nonempty body")
    }

    /// Exact Euclidean area.
    pub fn area(&self) -> Surd {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .fold(Surd::zero(), |acc, (p, w)| &acc + &(&p.upper - &p.lower).integral(&w[0], &w[1]))
    }

    fn piece_at(&self, t: &Q) -> Option<&BodyPiece> {
        let t = Surd::from_rational(t.clone());
        if t < self.breakpoints[0] || t > *self.t_extent() {
            return None;
        }
        let k = self.breakpoints.windows(2).position(|w| t <= w[1])?;
        Some(&self.pieces[k])
    }

    /// Membership for rational points.
    pub fn contains(&self, t: &Q, y: &Q) -> bool {
        self.piece_at(t).is_some_and(|p| p.lower.eval(t) <= *y && *y <= p.upper.eval(t))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v["area"] = serde_json::to_value(self.area()).expect("serializable");
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        NokBody::deserialize(v).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn polygon_vertices(breaks: &[Surd], pieces: &[BodyPiece]) -> Vec<(Surd, Surd)> {
    let chain = |f: fn(&BodyPiece) -> &Affine| -> Vec<(Surd, Surd)> {
        let mut pts = Vec::new();
        for (k, t) in breaks.iter().enumerate() {
            let here = f(&pieces[k.min(pieces.len() - 1)]);
            if k > 0 && k < pieces.len() && f(&pieces[k - 1]).slope == here.slope {
                continue;
            }
            pts.push((t.clone(), here.eval_surd(t)));
        }
        // the last point must use the last piece
        if let Some(last) = pts.last_mut() {
            last.1 = f(&pieces[pieces.len() - 1]).eval_surd(&last.0);
        }
        pts
    };
    let mut out = chain(|p| &p.lower);
    let mut upper = chain(|p| &p.upper);
    upper.reverse();
    out.extend(upper);
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Data of one Zariski chamber along the ray `B − tC`: negative-part
/// coefficients `aᵢ(t) = a0ᵢ + a1ᵢ·t` on `support`.
struct Chamber {
    support: Vec<usize>,
    a0: Vec<Q>,
    a1: Vec<Q>,
}

impl Chamber {
    fn solve(s: &SurfaceData, b: &DivisorClass, c: &DivisorClass, support: Vec<usize>) -> Result<Chamber> {
        let curves: Vec<DivisorClass> = support.iter().map(|&i| s.negative_curve(i)).collect();
        let g = gram(s, &support);
        let r0: Vec<Q> = curves.iter().map(|ci| s.intersect(b, ci)).collect::<Result<_>>()?;
        let r1: Vec<Q> = curves.iter().map(|ci| s.intersect(c, ci).map(|x| -x)).collect::<Result<_>>()?;
        let singular = || Error::InconsistentNegativeCurves("singular Gram matrix on chamber support".into());
        let a0 = linalg::solve(&g, &r0).ok_or_else(singular)?;
        let a1 = linalg::solve(&g, &r1).ok_or_else(singular)?;
        Ok(Chamber { support, a0, a1 })
    }

    /// `P_t·D` as an affine function of `t`.
    fn positive_dot(&self, s: &SurfaceData, b: &DivisorClass, c: &DivisorClass, d: &DivisorClass) -> Result<Affine> {
        let mut v0 = s.intersect(b, d)?;
        let mut v1 = -s.intersect(c, d)?;
        for (k, &i) in self.support.iter().enumerate() {
            let cd = s.intersect(&s.negative_curve(i), d)?;
            v0 -= &self.a0[k] * &cd;
            v1 -= &self.a1[k] * &cd;
        }
        Ok(Affine::new(v1, v0))
    }
}

/// Support of the negative part of `B − (t0 + δ)C` for small `δ > 0`,
/// starting from a known subset.
fn support_after(s: &SurfaceData, b: &DivisorClass, c: &DivisorClass, t0: &Q, mut support: Vec<usize>) -> Result<Chamber> {
    loop {
        let ch = Chamber::solve(s, b, c, support.clone())?;
        let mut grew = false;
        for j in 0..s.negative_curve_count() {
            if support.contains(&j) {
                continue;
            }
            let f = ch.positive_dot(s, b, c, &s.negative_curve(j))?;
            let w = f.eval(t0);
            if w.is_negative() || (w.is_zero() && f.slope.is_negative()) {
                support.push(j);
                grew = true;
            }
        }
        if !grew {
            return Ok(ch);
        }
        support.sort_unstable();
        if !linalg::is_negative_definite(&gram(s, &support)) {
            return Err(Error::InconsistentNegativeCurves("support Gram matrix not negative definite".into()));
        }
    }
}

pub fn nok_surface_body(s: &SurfaceData, b: &DivisorClass, flag: &FlagOnSurface) -> Result<NokBody> {
    let c = &flag.curve_class;
    if !s.is_nef(b)? {
        return Err(Error::NotNef);
    }
    if !s.intersect(b, b)?.is_positive() {
        return Err(Error::NotBig);
    }
    let mu = match cone_exit_time(s.pseff(), b, c, s)? {
        ExitTime::Finite(mu) => mu,
        ExitTime::Infinite => {
            return Err(Error::InvalidInput("flag curve direction never leaves the pseudoeffective cone".into()))
        }
    };
    let weights: Vec<(usize, Q)> = match flag.point_on_negative_curve {
        None => Vec::new(),
        Some(_) => s.point_multiplicities().iter().map(|(&i, &m)| (i, q(m as i64))).collect(),
    };
    let mut breakpoints = vec![Surd::zero()];
    let mut pieces: Vec<BodyPiece> = Vec::new();
    let mut t = Q::zero();
    let mut support = Vec::new();
    loop {
        let ch = support_after(s, b, c, &t, support)?;
        let mut lower = Affine::new(Q::zero(), Q::zero());
        for (k, &i) in ch.support.iter().enumerate() {
            if let Some((_, m)) = weights.iter().find(|(j, _)| *j == i) {
                lower.slope += &ch.a1[k] * m;
                lower.intercept += &ch.a0[k] * m;
            }
        }
        let pc = ch.positive_dot(s, b, c, c)?;
        let upper = Affine::new(&lower.slope + &pc.slope, &lower.intercept + &pc.intercept);
        let mut next: Option<Q> = None;
        for j in (0..s.negative_curve_count()).filter(|j| !ch.support.contains(j)) {
            let f = ch.positive_dot(s, b, c, &s.negative_curve(j))?;
            if f.slope.is_negative() {
                let hit = -&f.intercept / &f.slope;
                if hit > t && next.as_ref().is_none_or(|n| hit < *n) {
                    next = Some(hit);
                }
            }
        }
        let piece = BodyPiece { lower, upper };
        let end = match next {
            Some(n) if Surd::from_rational(n.clone()) < mu => Some(n),
            _ => None,
        };
        match pieces.last() {
            Some(prev) if *prev == piece => {
                breakpoints.pop();
            }
            _ => pieces.push(piece),
        }
        match end {
            Some(n) => {
                breakpoints.push(Surd::from_rational(n.clone()));
                t = n;
                support = ch.support;
            }
            None => {
                breakpoints.push(mu);
                break;
            }
        }
    }
    Ok(NokBody::from_pieces(breakpoints, pieces))
}

/// Affine family `B(s, t) = base − s·shift − t·curve` on a surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceFamily {
    pub surface: SurfaceData,
    pub base: DivisorClass,
    pub shift: DivisorClass,
    pub curve: DivisorClass,
    pub epsilon: Q,
    pub label: String,
}

impl SliceFamily {
    /// The same family on `pullback_embed(surface, m)`.
    pub fn pulled_back(&self, m: u32) -> Result<SliceFamily> {
        let surface = crate::lattice::pullback_embed(&self.surface, m)?;
        Ok(SliceFamily {
            base: surface.pull_back_class(&self.base)?,
            shift: surface.pull_back_class(&self.shift)?,
            curve: surface.pull_back_class(&self.curve)?,
            epsilon: self.epsilon.clone(),
            label: format!("{} pulled back (degree {m})", self.label),
            surface,
        })
    }

    /// Grid `s_j = j·ε/k` for `j = 0..k`.
    pub fn grid(&self, k: usize) -> Vec<Q> {
        (0..k).map(|j| &self.epsilon * qf(j as i64, k as i64)).collect()
    }

    pub fn region(&self, grid: &[Q]) -> Result<SliceRegion> {
        slice_region(&self.surface, &self.base, &self.shift, &self.curve, &self.epsilon, grid)
    }
}

/// Restriction of `O(a, b)` on `P²×P²` to `E×E` with `E ⊂ P²` a plane cubic:
/// each hyperplane class restricts to a degree-3 divisor, so the class is
/// `3a·f1 + 3b·f2`.
pub fn restrict_bidegree(exe: &SurfaceData, a: i64, b: i64) -> Result<DivisorClass> {
    exe.class_from_ints(&[3 * a, 3 * b, 0])
}

/// The range of `s` for which `D|_{Y₁} − s·Y₂` stays ample on `P²×E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonChoice {
    pub supremum: Q,
    pub working: Q,
}

/// `O(3,1)|_{P²×E} − s·(E×E)` splits as degree `3 − 3s` on the `P²` factor
/// and degree `3` on `E`; returns the two degrees and whether both are
/// positive.
pub fn split_ample(s: &Q) -> (Q, Q, bool) {
    let first = q(3) - q(3) * s;
    let second = q(3);
    let ample = first.is_positive() && second.is_positive();
    (first, second, ample)
}

pub fn epsilon_sup() -> EpsilonChoice {
    EpsilonChoice { supremum: q(1), working: qf(1, 2) }
}

/// The slice family of `O(3,1)` for the flag whose last three steps live on
/// `E×E`. Higher-dimensional flags `Y_k = P^{d−2−k}×P²` restrict `O(3,1)` to
/// `O(3,1)`, so the family does not depend on `d`.
pub fn build_o31_family(d: i64) -> Result<SliceFamily> {
    if d < 4 {
        return Err(Error::DimensionTooSmall(d));
    }
    let surface = crate::fixtures::abelian_exe();
    let base = restrict_bidegree(&surface, 3, 1)?;
    // [Y₂] on Y₁ = P²×E is 3·pr₁*O(1), restricting to 9·f1
    let shift = surface.class_from_ints(&[9, 0, 0])?;
    let curve = surface.class_from_ints(&[1, 1, 1])?;
    Ok(SliceFamily {
        base,
        shift,
        curve,
        epsilon: epsilon_sup().working,
        label: "O(3,1) on P2xP2 restricted to ExE".into(),
        surface,
    })
}

/// Blow-up of the plane with `B₀ = 2H − E`, `W = H`, `C = H − E`; every exit
/// time is a minimum of ratios, so the boundary is piecewise linear.
pub fn polyhedral_control_family() -> SliceFamily {
    let surface = crate::fixtures::blowup_plane();
    SliceFamily {
        base: surface.class_from_ints(&[2, -1]).expect("rank 2"),
        shift: surface.class_from_ints(&[1, 0]).expect("rank 2"),
        curve: surface.class_from_ints(&[1, -1]).expect("rank 2"),
        epsilon: qf(1, 2),
        label: "2H-E on the blow-up of P2 at a point".into(),
        surface,
    }
}

/// `Q(s,t) = tt·t² + st·s·t + ss·s² + t·t + s·s + one`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPolynomial {
    #[serde(with = "serde_q", rename = "t^2")]
    pub tt: Q,
    #[serde(with = "serde_q", rename = "s*t")]
    pub st: Q,
    #[serde(with = "serde_q", rename = "s^2")]
    pub ss: Q,
    #[serde(with = "serde_q", rename = "t")]
    pub t: Q,
    #[serde(with = "serde_q", rename = "s")]
    pub s: Q,
    #[serde(with = "serde_q", rename = "1")]
    pub one: Q,
}

impl BoundaryPolynomial {
    /// Coefficients in the fixed monomial order `t², st, s², t, s, 1`.
    pub fn coefficients(&self) -> [Q; 6] {
        [self.tt.clone(), self.st.clone(), self.ss.clone(), self.t.clone(), self.s.clone(), self.one.clone()]
    }

    pub fn from_coefficients(c: &[Q; 6]) -> Self {
        let [tt, st, ss, t, s, one] = c.clone();
        BoundaryPolynomial { tt, st, ss, t, s, one }
    }

    /// Coprime integer coefficients, first nonzero coefficient positive.
    pub fn normalized(&self) -> Self {
        let v = primitive_integer_vector(&self.coefficients());
        Self::from_coefficients(&[v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone(), v[4].clone(), v[5].clone()])
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        if !(self.tt.is_zero() && self.st.is_zero() && self.ss.is_zero()) {
            Some(2)
        } else if !(self.t.is_zero() && self.s.is_zero()) {
            Some(1)
        } else if !self.one.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn eval(&self, s: &Q, t: &Surd) -> Surd {
        let quad = &(t * t).scale(&self.tt) + &t.scale(&(&self.st * s));
        let lin = t.scale(&self.t);
        (&quad + &lin).add_rational(&(&self.ss * s * s + &self.s * s + &self.one))
    }

    /// Symmetric matrix of the form in the variables `(s, t, 1)`.
    pub fn matrix(&self) -> Vec<Vec<Q>> {
        let h = qf(1, 2);
        vec![
            vec![self.ss.clone(), &self.st * &h, &self.s * &h],
            vec![&self.st * &h, self.tt.clone(), &self.t * &h],
            vec![&self.s * &h, &self.t * &h, self.one.clone()],
        ]
    }

    /// Whether `a` is a nonzero rational multiple of `self`.
    pub fn proportional_to(&self, other: &BoundaryPolynomial) -> bool {
        !self.is_zero() && !other.is_zero() && self.normalized() == other.normalized()
    }
}

impl fmt::Display for BoundaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["t^2", "s*t", "s^2", "t", "s", ""];
        let mut first = true;
        for (c, m) in self.coefficients().iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (mag.is_one(), m.is_empty()) {
                (true, false) => write!(f, "{m}")?,
                (_, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{m}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSample {
    #[serde(with = "serde_q")]
    pub s: Q,
    pub mu: Surd,
    pub held_out: bool,
}

/// The nef region `{(s, t) : B(s, t) nef}` over a grid, with a fitted exact
/// boundary polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceRegion {
    pub base: DivisorClass,
    pub shift: DivisorClass,
    pub curve: DivisorClass,
    pub epsilon: Q,
    pub boundary_polynomial: BoundaryPolynomial,
    pub samples: Vec<SliceSample>,
}

pub const MIN_FIT_SAMPLES: usize = 5;
pub const HOLDOUT_SAMPLES: usize = 2;

/// Rational and `√d` parts of each monomial in the fixed order, for a sample.
fn monomial_parts(s: &Q, mu: &Surd) -> [(Q, Q); 6] {
    let parts = |x: Surd| (x.rational_part().clone(), x.irrational_part().clone());
    let one = Surd::from_rational(q(1));
    [
        parts(mu * mu),
        parts(mu.scale(s)),
        parts(Surd::from_rational(s * s)),
        parts(mu.clone()),
        parts(Surd::from_rational(s.clone())),
        parts(one),
    ]
}

fn fit_boundary(samples: &[SliceSample]) -> Result<BoundaryPolynomial> {
    let fitting: Vec<&SliceSample> = samples.iter().filter(|x| !x.held_out).collect();
    // degree 1 uses the columns (t, s, 1); degree 2 all six
    for columns in [&[3usize, 4, 5][..], &[0, 1, 2, 3, 4, 5][..]] {
        let mut rows = Vec::new();
        for x in &fitting {
            let parts = monomial_parts(&x.s, &x.mu);
            rows.push(columns.iter().map(|&c| parts[c].0.clone()).collect::<Vec<_>>());
            rows.push(columns.iter().map(|&c| parts[c].1.clone()).collect::<Vec<_>>());
        }
        let ns = linalg::nullspace(&rows, columns.len());
        match ns.len() {
            0 => continue,
            1 => {
                let mut coeffs: [Q; 6] = Default::default();
                for (&c, v) in columns.iter().zip(&ns[0]) {
                    coeffs[c] = v.clone();
                }
                return Ok(BoundaryPolynomial::from_coefficients(&coeffs).normalized());
            }
            _ => return Err(Error::BoundaryUnderdetermined),
        }
    }
    Err(Error::BoundaryNotAlgebraic)
}

pub fn slice_region(
    s: &SurfaceData,
    base: &DivisorClass,
    shift: &DivisorClass,
    curve: &DivisorClass,
    epsilon: &Q,
    grid: &[Q],
) -> Result<SliceRegion> {
    if grid.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: grid.len() });
    }
    if let Some(bad) = grid.iter().find(|x| x.is_negative() || *x >= epsilon) {
        return Err(Error::InvalidInput(format!("grid value {bad} outside [0, {epsilon})")));
    }
    if !s.is_nef(base)? {
        return Err(Error::NotNef);
    }
    let mus: Vec<Surd> = grid
        .par_iter()
        .map(|x| {
            let b = base.shifted(x, shift)?;
            match cone_exit_time(s.nef(), &b, curve, s)? {
                ExitTime::Finite(mu) => Ok(mu),
                ExitTime::Infinite => Err(Error::InvalidInput(format!("unbounded slice at s = {x}"))),
            }
        })
        .collect::<Result<_>>()?;
    let holdout = if grid.len() >= MIN_FIT_SAMPLES + HOLDOUT_SAMPLES { HOLDOUT_SAMPLES } else { 0 };
    let samples: Vec<SliceSample> = grid
        .iter()
        .zip(mus)
        .enumerate()
        .map(|(k, (x, mu))| SliceSample { s: x.clone(), mu, held_out: k + holdout >= grid.len() })
        .collect();
    let boundary_polynomial = fit_boundary(&samples)?;
    if samples.iter().any(|x| !boundary_polynomial.eval(&x.s, &x.mu).is_zero()) {
        return Err(Error::BoundaryNotAlgebraic);
    }
    Ok(SliceRegion {
        base: base.clone(),
        shift: shift.clone(),
        curve: curve.clone(),
        epsilon: epsilon.clone(),
        boundary_polynomial,
        samples,
    })
}

impl SliceRegion {
    pub fn verify(&self) -> bool {
        !self.boundary_polynomial.is_zero()
            && self.samples.iter().all(|x| self.boundary_polynomial.eval(&x.s, &x.mu).is_zero())
    }

    pub fn held_out(&self) -> impl Iterator<Item = &SliceSample> {
        self.samples.iter().filter(|x| x.held_out)
    }

    pub fn to_json(&self, s: &SurfaceData) -> serde_json::Value {
        let class = |c: &DivisorClass| {
            serde_json::json!({
                "expression": s.format_class(c),
                "coords": c.coords().iter().map(format_q).collect::<Vec<_>>(),
            })
        };
        serde_json::json!({
            "surface": s.id(),
            "base": class(&self.base),
            "shift": class(&self.shift),
            "curve": class(&self.curve),
            "epsilon": format_q(&self.epsilon),
            "boundary_polynomial": self.boundary_polynomial,
            "boundary_display": self.boundary_polynomial.to_string(),
            "samples": self.samples,
        })
    }

    pub fn from_json(v: &serde_json::Value, s: &SurfaceData) -> Result<SliceRegion> {
        let perr = |e: serde_json::Error| Error::Parse(e.to_string());
        let bad = |what: &str| Error::Parse(format!("slice document: missing {what}"));
        let class = |key: &str| -> Result<DivisorClass> {
            let coords = v[key]["coords"].as_array().ok_or_else(|| bad(key))?;
            let coords = coords
                .iter()
                .map(|x| x.as_str().ok_or_else(|| bad(key)).and_then(parse_q))
                .collect::<Result<Vec<_>>>()?;
            s.class(coords)
        };
        Ok(SliceRegion {
            base: class("base")?,
            shift: class("shift")?,
            curve: class("curve")?,
            epsilon: parse_q(v["epsilon"].as_str().ok_or_else(|| bad("epsilon"))?)?,
            boundary_polynomial: BoundaryPolynomial::deserialize(&v["boundary_polynomial"]).map_err(perr)?,
            samples: Vec::<SliceSample>::deserialize(&v["samples"]).map_err(perr)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundaryKind {
    PiecewiseLinear,
    NondegenerateConic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicCertificate {
    #[serde(with = "serde_q::mat")]
    pub matrix: Vec<Vec<Q>>,
    #[serde(with = "serde_q")]
    pub determinant: Q,
}

/// The line `s_coeff·s + t_coeff·t + constant = 0`, possibly over a real
/// quadratic field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLine {
    pub s_coeff: Surd,
    pub t_coeff: Surd,
    pub constant: Surd,
}

impl BoundaryLine {
    fn rational(s: Q, t: Q, c: Q) -> Self {
        BoundaryLine { s_coeff: s.into(), t_coeff: t.into(), constant: c.into() }
    }

    pub fn contains(&self, s: &Q, t: &Surd) -> bool {
        if !t.same_field(&self.t_coeff) || !t.same_field(&self.s_coeff) || !t.same_field(&self.constant) {
            return false;
        }
        (&(&self.s_coeff.scale(s) + &(&self.t_coeff * t)) + &self.constant).is_zero()
    }
}

impl fmt::Display for BoundaryLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*s + ({})*t + ({}) = 0", self.s_coeff, self.t_coeff, self.constant)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryVerdict {
    pub kind: BoundaryKind,
    pub boundary_polynomial: BoundaryPolynomial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conic: Option<ConicCertificate>,
    /// Lines of a degenerate boundary that carry at least one sample.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<BoundaryLine>,
    pub exact_samples_on_boundary: usize,
}

/// Factors a degenerate quadratic `Q` into its two real lines.
fn degenerate_lines(p: &BoundaryPolynomial) -> Result<Vec<BoundaryLine>> {
    let complex = || Error::InvalidInput("boundary conic degenerates to a point".into());
    // Q as a quadratic in `u` with the other variable `v`:
    // a·u² + (b·v + d)·u + (c·v² + e·v + f)
    let solve_in = |a: &Q, b: &Q, c: &Q, d: &Q, e: &Q, f: &Q, u_is_t: bool| -> Result<Vec<BoundaryLine>> {
        let four = q(4);
        let alpha = b * b - &four * a * c;
        let beta = q(2) * b * d - &four * a * e;
        let gamma = d * d - &four * a * f;
        let mut out = Vec::new();
        let (root_v, root_1) = if !alpha.is_zero() {
            let r = Surd::sqrt(&alpha).ok_or_else(complex)?;
            let shift = &beta / (q(2) * &alpha);
            (r.clone(), r.scale(&shift))
        } else {
            let r = Surd::sqrt(&gamma).ok_or_else(complex)?;
            (Surd::zero(), r)
        };
        for sign in [q(1), q(-1)] {
            let u = Surd::from_rational(q(2) * a);
            let v = Surd::from_rational(b.clone()).add_rational(&Q::zero());
            let v = &v - &root_v.scale(&sign);
            let k = &Surd::from_rational(d.clone()) - &root_1.scale(&sign);
            let line = if u_is_t {
                BoundaryLine { s_coeff: v, t_coeff: u, constant: k }
            } else {
                BoundaryLine { s_coeff: u, t_coeff: v, constant: k }
            };
            if !out.contains(&line) {
                out.push(line);
            }
        }
        Ok(out)
    };
    let BoundaryPolynomial { tt, st, ss, t, s, one } = p;
    if !tt.is_zero() {
        solve_in(tt, st, ss, t, s, one, true)
    } else if !ss.is_zero() {
        solve_in(ss, st, tt, s, t, one, false)
    } else {
        // st·s·t + t·t + s·s + one = (st·s + t)(st·t + s)/st when degenerate
        Ok(vec![
            BoundaryLine::rational(st.clone(), Q::zero(), t.clone()),
            BoundaryLine::rational(Q::zero(), st.clone(), s.clone()),
        ])
    }
}

pub fn classify_boundary(region: &SliceRegion) -> Result<BoundaryVerdict> {
    let p = &region.boundary_polynomial;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !region.verify() {
        return Err(Error::InvalidInput("region samples do not satisfy the boundary polynomial".into()));
    }
    let on_boundary = region.samples.len();
    let linear_verdict = |pieces: Vec<BoundaryLine>| BoundaryVerdict {
        kind: BoundaryKind::PiecewiseLinear,
        boundary_polynomial: p.clone(),
        conic: None,
        pieces,
        exact_samples_on_boundary: on_boundary,
    };
    match p.degree() {
        Some(0) => Err(Error::InvalidInput("constant boundary polynomial has no zeros".into())),
        Some(1) => Ok(linear_verdict(vec![BoundaryLine::rational(p.s.clone(), p.t.clone(), p.one.clone())])),
        _ => {
            let matrix = p.matrix();
            let determinant = linalg::determinant(&matrix);
            if !determinant.is_zero() {
                if on_boundary < 3 {
                    return Err(Error::InsufficientSamples { needed: 3, got: on_boundary });
                }
                return Ok(BoundaryVerdict {
                    kind: BoundaryKind::NondegenerateConic,
                    boundary_polynomial: p.clone(),
                    conic: Some(ConicCertificate { matrix, determinant }),
                    pieces: Vec::new(),
                    exact_samples_on_boundary: on_boundary,
                });
            }
            let lines = degenerate_lines(p)?;
            let used: Vec<BoundaryLine> = lines
                .into_iter()
                .filter(|l| region.samples.iter().any(|x| l.contains(&x.s, &x.mu)))
                .collect();
            Ok(linear_verdict(used))
        }
    }
}

/// Bodies of `base − s·shift` for each `s` in `grid`.
pub fn slice_bodies(s: &SurfaceData, base: &DivisorClass, shift: &DivisorClass, flag: &FlagOnSurface, grid: &[Q]) -> Result<Vec<(Q, NokBody)>> {
    grid.par_iter()
        .map(|x| Ok((x.clone(), nok_surface_body(s, &base.shifted(x, shift)?, flag)?)))
        .collect()
}

/// Bodies over the sampled values of a region.
pub fn assemble_slice_body(region: &SliceRegion, s: &SurfaceData, flag: &FlagOnSurface) -> Result<Vec<(Q, NokBody)>> {
    let grid: Vec<Q> = region.samples.iter().map(|x| x.s.clone()).collect();
    slice_bodies(s, &region.base, &region.shift, flag, &grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn surd(a: i64, b: i64, d: i64) -> Surd {
        Surd::new(q(a), q(b), d.into())
    }

    fn r(x: i64) -> Surd {
        Surd::from_rational(q(x))
    }

    #[test]
    fn exe_trapezoid() {
        let s = fixtures::abelian_exe();
        let b = s.parse_class("9f1+3f2").unwrap();
        let flag = FlagOnSurface::generic(&s, s.parse_class("f1+f2+Delta").unwrap()).unwrap();
        let body = nok_surface_body(&s, &b, &flag).unwrap();
        let mu = surd(4, -1, 7);
        assert_eq!(body.breakpoints, vec![r(0), mu.clone()]);
        assert_eq!(body.pieces, vec![BodyPiece { lower: Affine::new(q(0), q(0)), upper: Affine::new(q(-6), q(24)) }]);
        let top = &r(24) - &mu.scale(&q(6));
        assert_eq!(body.vertices, vec![(r(0), r(0)), (mu.clone(), r(0)), (mu, top), (r(0), r(24))]);
        assert_eq!(body.area(), r(27));
    }

    #[test]
    fn blowup_generic_point() {
        let s = fixtures::blowup_plane();
        let b = s.parse_class("2H-E").unwrap();
        let flag = FlagOnSurface::generic(&s, s.parse_class("H-E").unwrap()).unwrap();
        let body = nok_surface_body(&s, &b, &flag).unwrap();
        assert_eq!(body.breakpoints, vec![r(0), r(1), r(2)]);
        assert_eq!(body.pieces[0].upper, Affine::new(q(0), q(1)));
        assert_eq!(body.pieces[1].upper, Affine::new(q(-1), q(2)));
        assert!(body.pieces.iter().all(|p| p.lower == Affine::new(q(0), q(0))));
        assert_eq!(body.vertices, vec![(r(0), r(0)), (r(2), r(0)), (r(1), r(1)), (r(0), r(1))]);
        assert_eq!(body.area(), Surd::from_rational(qf(3, 2)));
    }

    #[test]
    fn blowup_point_on_exceptional_curve() {
        let s = fixtures::blowup_plane();
        let b = s.parse_class("2H-E").unwrap();
        let flag = FlagOnSurface::new(&s, s.parse_class("H-E").unwrap(), Some(0)).unwrap();
        let body = nok_surface_body(&s, &b, &flag).unwrap();
        assert_eq!(body.pieces[0].lower, Affine::new(q(0), q(0)));
        assert_eq!(body.pieces[1].lower, Affine::new(q(1), q(-1)));
        assert!(body.pieces.iter().all(|p| p.upper == Affine::new(q(0), q(1))));
        assert_eq!(body.vertices, vec![(r(0), r(0)), (r(1), r(0)), (r(2), r(1)), (r(0), r(1))]);
        assert_eq!(body.area(), Surd::from_rational(qf(3, 2)));
        assert!(body.contains(&qf(3, 2), &qf(3, 4)));
        assert!(!body.contains(&qf(3, 2), &qf(1, 4)));
    }

    #[test]
    fn body_errors() {
        let s = fixtures::blowup_plane();
        let flag = FlagOnSurface::generic(&s, s.parse_class("H-E").unwrap()).unwrap();
        assert_eq!(nok_surface_body(&s, &s.parse_class("H+E").unwrap(), &flag).unwrap_err(), Error::NotNef);
        assert_eq!(nok_surface_body(&s, &s.parse_class("H-E").unwrap(), &flag).unwrap_err(), Error::NotBig);
        assert!(FlagOnSurface::generic(&s, s.zero_class()).is_err());
        assert!(FlagOnSurface::new(&s, s.parse_class("H").unwrap(), Some(3)).is_err());
    }

    #[test]
    fn o31_family_restrictions() {
        let f = build_o31_family(4).unwrap();
        let s = &f.surface;
        assert_eq!(f.base, s.parse_class("9f1+3f2").unwrap());
        assert_eq!(f.shift, s.parse_class("9f1").unwrap());
        assert_eq!(f.curve, s.parse_class("f1+f2+Delta").unwrap());
        assert_eq!(f.epsilon, qf(1, 2));
        assert_eq!(build_o31_family(7).unwrap(), f);
        assert_eq!(build_o31_family(3).unwrap_err(), Error::DimensionTooSmall(3));
        assert_eq!(restrict_bidegree(s, 1, 1).unwrap(), s.parse_class("3f1+3f2").unwrap());
    }

    #[test]
    fn epsilon_split_ampleness() {
        assert_eq!(split_ample(&q(0)), (q(3), q(3), true));
        assert_eq!(split_ample(&qf(1, 2)), (qf(3, 2), q(3), true));
        assert_eq!(split_ample(&q(1)), (q(0), q(3), false));
        assert_eq!(epsilon_sup(), EpsilonChoice { supremum: q(1), working: qf(1, 2) });
    }

    /// (B₀ − sW − tC)² = 2(ab + ac + bc) for B = a·f1 + b·f2 + c·Δ, expanded
    /// by hand with a = 9 − 9s − t, b = 3 − t, c = −t.
    fn hand_expanded_q() -> BoundaryPolynomial {
        BoundaryPolynomial { tt: q(1), st: q(6), ss: q(0), t: q(-8), s: q(-9), one: q(9) }
    }

    #[test]
    fn o31_slice_is_conic() {
        let f = build_o31_family(4).unwrap();
        let grid: Vec<Q> = (0..5).map(|k| qf(k, 10)).collect();
        let region = f.region(&grid).unwrap();
        assert_eq!(region.boundary_polynomial, hand_expanded_q());
        assert_eq!(region.samples[0].mu, surd(4, -1, 7));
        let v = classify_boundary(&region).unwrap();
        assert_eq!(v.kind, BoundaryKind::NondegenerateConic);
        let cert = v.conic.unwrap();
        assert_eq!(cert.determinant, qf(27, 4));
        assert_eq!(cert.matrix[0], vec![q(0), q(3), qf(-9, 2)]);
    }

    #[test]
    fn held_out_samples_lie_on_boundary() {
        let f = build_o31_family(5).unwrap();
        let region = f.region(&f.grid(9)).unwrap();
        assert_eq!(region.held_out().count(), 2);
        for x in region.held_out() {
            assert!(region.boundary_polynomial.eval(&x.s, &x.mu).is_zero());
        }
    }

    #[test]
    fn control_slice_is_linear() {
        let f = polyhedral_control_family();
        let region = f.region(&f.grid(8)).unwrap();
        assert!(region.samples.iter().all(|x| x.mu.is_rational()));
        let v = classify_boundary(&region).unwrap();
        assert_eq!(v.kind, BoundaryKind::PiecewiseLinear);
        assert_eq!(region.boundary_polynomial.degree(), Some(1));
    }

    #[test]
    fn slice_errors() {
        let f = build_o31_family(4).unwrap();
        let short: Vec<Q> = (0..4).map(|k| qf(k, 10)).collect();
        assert_eq!(f.region(&short).unwrap_err(), Error::InsufficientSamples { needed: 5, got: 4 });
        let outside: Vec<Q> = (0..6).map(|k| qf(k, 10)).collect();
        assert!(matches!(f.region(&outside), Err(Error::InvalidInput(_))));
    }

    fn region_with(p: BoundaryPolynomial, samples: Vec<(Q, Surd)>) -> SliceRegion {
        let f = build_o31_family(4).unwrap();
        SliceRegion {
            base: f.base,
            shift: f.shift,
            curve: f.curve,
            epsilon: f.epsilon,
            boundary_polynomial: p,
            samples: samples.into_iter().map(|(s, mu)| SliceSample { s, mu, held_out: false }).collect(),
        }
    }

    #[test]
    fn classify_line_and_line_pair() {
        let line = BoundaryPolynomial { tt: q(0), st: q(0), ss: q(0), t: q(1), s: q(1), one: q(-1) };
        let reg = region_with(line, vec![(q(0), r(1)), (qf(1, 2), Surd::from_rational(qf(1, 2)))]);
        assert_eq!(classify_boundary(&reg).unwrap().kind, BoundaryKind::PiecewiseLinear);

        // (t − s)(t − 2s)
        let pair = BoundaryPolynomial { tt: q(1), st: q(-3), ss: q(2), t: q(0), s: q(0), one: q(0) };
        assert!(linalg::determinant(&pair.matrix()).is_zero());
        let samples = vec![(q(1), r(1)), (q(2), r(2)), (q(3), r(6))];
        let v = classify_boundary(&region_with(pair, samples)).unwrap();
        assert_eq!(v.kind, BoundaryKind::PiecewiseLinear);
        assert_eq!(v.pieces.len(), 2);

        let zero = BoundaryPolynomial { tt: q(0), st: q(0), ss: q(0), t: q(0), s: q(0), one: q(0) };
        assert_eq!(classify_boundary(&region_with(zero, vec![])).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn irrational_line_pair() {
        // t² − 2s² = (t − √2 s)(t + √2 s)
        let p = BoundaryPolynomial { tt: q(1), st: q(0), ss: q(-2), t: q(0), s: q(0), one: q(0) };
        let samples = vec![(q(1), surd(0, 1, 2)), (q(2), surd(0, 2, 2))];
        let v = classify_boundary(&region_with(p, samples)).unwrap();
        assert_eq!(v.kind, BoundaryKind::PiecewiseLinear);
        assert_eq!(v.pieces.len(), 1);
    }

    #[test]
    fn slice_bodies_follow_area_identity() {
        let f = build_o31_family(4).unwrap();
        let flag = FlagOnSurface::generic(&f.surface, f.curve.clone()).unwrap();
        let region = f.region(&f.grid(7)).unwrap();
        let bodies = assemble_slice_body(&region, &f.surface, &flag).unwrap();
        assert_eq!(bodies.len(), 7);
        for ((x, body), sample) in bodies.iter().zip(&region.samples) {
            let b = f.base.shifted(x, &f.shift).unwrap();
            let half_square = f.surface.intersect(&b, &b).unwrap() / q(2);
            assert_eq!(body.area(), Surd::from_rational(half_square));
            assert_eq!(body.t_extent(), &sample.mu);
        }
        assert!(slice_bodies(&f.surface, &f.base, &f.shift, &flag, &[]).unwrap().is_empty());
    }

    #[test]
    fn json_round_trips() {
        let f = build_o31_family(4).unwrap();
        let region = f.region(&f.grid(8)).unwrap();
        let v = region.to_json(&f.surface);
        assert_eq!(SliceRegion::from_json(&v, &f.surface).unwrap(), region);
        let flag = FlagOnSurface::generic(&f.surface, f.curve.clone()).unwrap();
        let body = nok_surface_body(&f.surface, &f.base, &flag).unwrap();
        assert_eq!(NokBody::from_json(&body.to_json()).unwrap(), body);
        let verdict = classify_boundary(&region).unwrap();
        let text = serde_json::to_string(&verdict).unwrap();
        assert_eq!(serde_json::from_str::<BoundaryVerdict>(&text).unwrap(), verdict);
    }
}
