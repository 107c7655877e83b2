//! Guessing closed forms for coefficient tables and certifying that the
//! complexity function `E(x, q) = Σ dim Hⁱ(X, O(nD)) xⁿ qⁱ` is holonomic.
//!
//! A certificate is only issued when every `q`-slice has a rational fit that
//! survives held-out coefficients *and* the emitted operators annihilate the
//! fitted closed form as an exact polynomial identity. A failed search is
//! reported as [`Verdict::NoFitFound`], never as non-holonomicity.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cohomology::{CoefficientTable, TableSidecar};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{BiPoly, Poly};
use crate::rational::{common_denominator, format_q, parse_q, q, Q};

/// Fewest coefficients (`N + 1`) accepted by the guessers.
pub const MIN_GUESS_N: usize = 8;

/// `b_0, …, b_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeriesTable {
    coeffs: Vec<Q>,
}

impl PowerSeriesTable {
    pub fn new(coeffs: Vec<Q>) -> Self {
        PowerSeriesTable { coeffs }
    }

    pub fn from_fn(n_max: usize, f: impl FnMut(usize) -> Q) -> Self {
        Self::new((0..=n_max).map(f).collect())
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self::new(v.iter().map(|&x| q(x)).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// Truncation order `N`.
    pub fn n_max(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn truncated(&self, n_max: usize) -> Self {
        Self::new(self.coeffs[..=n_max.min(self.n_max())].to_vec())
    }

    fn tail(&self, r: usize) -> Self {
        Self::new(self.coeffs[r..].to_vec())
    }

    fn check_guessable(&self) -> Result<()> {
        if self.n_max() < MIN_GUESS_N {
            return Err(Error::TableTooShort { needed: MIN_GUESS_N + 1, got: self.coeffs.len() });
        }
        Ok(())
    }
}

/// `b_n = P(n)` for all `n ≥ transient`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventualPolynomial {
    /// Polynomial in `n`.
    pub polynomial: Poly,
    pub transient: usize,
}

/// `binom(n − r, j)` as a polynomial in `n`.
fn shifted_binomial(r: usize, j: usize) -> Poly {
    let mut p = Poly::one();
    for i in 0..j {
        p = &p * &Poly::new(vec![-q((r + i) as i64), q(1)]);
    }
    let fact: i64 = (1..=j as i64).product();
    p.scale(&q(fact).recip())
}

pub fn fit_eventual_polynomial(t: &PowerSeriesTable, max_degree: usize) -> Result<Option<EventualPolynomial>> {
    t.check_guessable()?;
    let n = t.n_max();
    if max_degree > n / 2 {
        return Err(Error::InvalidInput(format!("max_degree {max_degree} exceeds N/2 = {}", n / 2)));
    }
    for r in 0..=n / 2 {
        let tail = &t.coeffs[r..];
        // difference table, row j = Δʲ tail
        let mut rows = vec![tail.to_vec()];
        let mut found = None;
        for k in 0..=max_degree {
            let next: Vec<Q> = rows[k].windows(2).map(|w| &w[1] - &w[0]).collect();
            let vanishes = !next.is_empty() && next.iter().all(Zero::is_zero);
            rows.push(next);
            if vanishes {
                found = Some(k);
                break;
            }
        }
        if let Some(k) = found {
            let p = (0..=k).fold(Poly::zero(), |acc, j| &acc + &shifted_binomial(r, j).scale(&rows[j][0]));
            return Ok(Some(EventualPolynomial { polynomial: p, transient: r }));
        }
    }
    Ok(None)
}

/// `b_n = [xⁿ] u/v` for `n ≥ transient_prefix.len()`; the prefix holds the
/// actual leading table values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFit {
    pub numerator: Poly,
    pub denominator: Poly,
    pub transient_prefix: Vec<Q>,
}

impl RationalFit {
    /// `(U, V)` with `U/V` equal to the whole series, prefix included.
    pub fn closed_form(&self) -> (Poly, Poly) {
        let r = self.transient_prefix.len();
        if r == 0 {
            return (self.numerator.clone(), self.denominator.clone());
        }
        let head = self.numerator.series_div(&self.denominator, r);
        let correction = Poly::new(self.transient_prefix.iter().zip(head).map(|(a, b)| a - b).collect());
        (&self.numerator + &(&correction * &self.denominator), self.denominator.clone())
    }

    /// `b_0, …, b_{n-1}` of the represented series.
    pub fn expand(&self, n: usize) -> Vec<Q> {
        let (u, v) = self.closed_form();
        u.series_div(&v, n)
    }
}

/// Reduces `u/v`, normalizes `v(0) = 1`; `None` if `v(0) = 0` after reduction.
fn reduce_fraction(u: Poly, v: Poly) -> Option<(Poly, Poly)> {
    if v.is_zero() {
        return None;
    }
    if u.is_zero() {
        return Some((Poly::zero(), Poly::one()));
    }
    let g = u.gcd(&v);
    let (u, _) = u.div_rem(&g);
    let (v, _) = v.div_rem(&g);
    let v0 = v.coeff(0);
    if v0.is_zero() {
        return None;
    }
    let k = v0.recip();
    Some((u.scale(&k), v.scale(&k)))
}

/// Padé-type guess `v·f ≡ u (mod x^{N−holdout+1})`, validated on the last
/// `holdout` coefficients.
pub fn guess_rational(t: &PowerSeriesTable, deg_u: usize, deg_v: usize, holdout: usize) -> Result<Option<RationalFit>> {
    t.check_guessable()?;
    let n = t.n_max();
    if deg_u + deg_v + 2 + holdout > n + 1 {
        return Err(Error::TableTooShort { needed: deg_u + deg_v + 2 + holdout, got: n + 1 });
    }
    let b = &t.coeffs;
    let m = n - holdout;
    let ncols = deg_u + deg_v + 2;
    let rows: Vec<Vec<Q>> = (0..=m)
        .map(|k| {
            let mut row = vec![Q::zero(); ncols];
            if k <= deg_u {
                row[k] = q(-1);
            }
            for j in 0..=deg_v.min(k) {
                row[deg_u + 1 + j] = b[k - j].clone();
            }
            row
        })
        .collect();
    let basis = linalg::nullspace(&rows, ncols);
    let mut candidates = basis.clone();
    if basis.len() > 1 {
        let sum = (0..ncols).map(|c| basis.iter().fold(Q::zero(), |acc, v| acc + &v[c])).collect();
        candidates.push(sum);
    }
    for cand in candidates {
        let u = Poly::new(cand[..=deg_u].to_vec());
        let v = Poly::new(cand[deg_u + 1..].to_vec());
        let Some((u, v)) = reduce_fraction(u, v) else { continue };
        if u.series_div(&v, n + 1) == *b {
            return Ok(Some(RationalFit { numerator: u, denominator: v, transient_prefix: Vec::new() }));
        }
    }
    Ok(None)
}

/// Like [`guess_rational`], but allows the first `r ≤ max_transient`
/// coefficients to deviate from the rational tail.
pub fn guess_rational_eventual(
    t: &PowerSeriesTable,
    deg_u: usize,
    deg_v: usize,
    holdout: usize,
    max_transient: usize,
) -> Result<Option<RationalFit>> {
    if let Some(fit) = guess_rational(t, deg_u, deg_v, holdout)? {
        return Ok(Some(fit));
    }
    for r in 1..=max_transient {
        let tail = t.tail(r);
        if tail.n_max() < MIN_GUESS_N || deg_u + deg_v + 2 + holdout > tail.n_max() + 1 {
            break;
        }
        if let Some(fit) = guess_rational(&tail, deg_u, deg_v, holdout)? {
            return Ok(Some(RationalFit {
                numerator: fit.numerator.shift(r),
                denominator: fit.denominator,
                transient_prefix: t.coeffs[..r].to_vec(),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    X,
    Q,
}

/// `p_0·∂^k + p_1·∂^{k−1} + … + p_k` in the declared variable, with
/// coefficients polynomial in `x` and `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeOperator {
    pub variable: Variable,
    pub coefficients: Vec<BiPoly>,
}

impl OdeOperator {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(BiPoly::is_zero)
    }

    /// Rescales to coprime integer coefficients with a positive first
    /// nonzero coefficient.
    pub fn content_normalized(mut self) -> Self {
        let all: Vec<Q> = self.coefficients.iter().flat_map(|p| p.all_coeffs().cloned()).collect();
        let Some(first) = all.iter().find(|c| !c.is_zero()).cloned() else { return self };
        let den = Q::from_integer(common_denominator(&all));
        let ints: Vec<BigInt> = all.iter().map(|c| (c * &den).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
        let mut k = den / Q::from_integer(g);
        if first < Q::zero() {
            k = -k;
        }
        self.coefficients = self.coefficients.iter().map(|p| p.scale(&k)).collect();
        self
    }

    /// Applies an `x`-operator with coefficients free of `q` to the series
    /// `b`; the result is exact for indices `≤ N − order`.
    pub fn apply_series(&self, b: &[Q]) -> Vec<Q> {
        assert_eq!(self.variable, Variable::X);
        let k = self.order();
        let n = b.len() - 1;
        if n < k {
            return Vec::new();
        }
        let mut out = vec![Q::zero(); n - k + 1];
        for (j, p) in self.coefficients.iter().enumerate() {
            let m = k - j;
            let p = p.q_coeff(0);
            for (l, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for idx in l..out.len() {
                    let src = idx - l + m;
                    out[idx] += c * &b[src] * falling(src, m);
                }
            }
        }
        out
    }

    /// Exact check that the operator annihilates `U/V` (`V` free of `q`).
    pub fn annihilates_rational(&self, u: &BiPoly, v: &Poly) -> bool {
        let k = self.order();
        match self.variable {
            Variable::X => {
                // ∂ʲ(U/V) = N_j / V^{j+1}, N_{j+1} = N_j'·V − (j+1)·N_j·V'
                let dv = v.derivative();
                let mut numerators = vec![u.clone()];
                for j in 0..k {
                    let nj = &numerators[j];
                    let next = &nj.d_dx().mul_x(v) - &nj.mul_x(&dv).scale(&q(j as i64 + 1));
                    numerators.push(next);
                }
                // L(U/V)·V^{k+1} = Σ_j p_{k−j}·N_j·V^{k−j}
                let mut acc = BiPoly::zero();
                let mut vpow = Poly::one();
                for j in (0..=k).rev() {
                    acc = &acc + &(&self.coefficients[k - j] * &numerators[j]).mul_x(&vpow);
                    vpow = &vpow * v;
                }
                acc.is_zero()
            }
            Variable::Q => {
                let mut acc = BiPoly::zero();
                let mut deriv = u.clone();
                for j in 0..=k {
                    acc = &acc + &(&self.coefficients[k - j] * &deriv);
                    deriv = deriv.d_dq();
                }
                acc.is_zero()
            }
        }
    }
}

fn falling(n: usize, m: usize) -> Q {
    q((0..m).map(|i| (n - i) as i64).product())
}

/// Searches operators of order `≤ max_order` with coefficient degree
/// `≤ max_coeff_degree`, smallest order first, validated on the last
/// `holdout` verifiable coefficients.
pub fn guess_ode(t: &PowerSeriesTable, max_order: usize, max_coeff_degree: usize, holdout: usize) -> Result<Option<OdeOperator>> {
    t.check_guessable()?;
    let n = t.n_max();
    let b = &t.coeffs;
    for k in 0..=max_order {
        for deg in 0..=max_coeff_degree {
            let unknowns = (k + 1) * (deg + 1);
            if unknowns + holdout + k > n {
                continue;
            }
            let last_eq = n - k - holdout;
            let rows: Vec<Vec<Q>> = (0..=last_eq)
                .map(|idx| {
                    let mut row = vec![Q::zero(); unknowns];
                    for j in 0..=k {
                        let m = k - j;
                        for l in 0..=deg.min(idx) {
                            let src = idx - l + m;
                            row[j * (deg + 1) + l] = &b[src] * falling(src, m);
                        }
                    }
                    row
                })
                .collect();
            for v in linalg::nullspace(&rows, unknowns) {
                let op = OdeOperator {
                    variable: Variable::X,
                    coefficients: (0..=k).map(|j| BiPoly::from_x(Poly::new(v[j * (deg + 1)..(j + 1) * (deg + 1)].to_vec()))).collect(),
                };
                if op.is_zero() {
                    continue;
                }
                if op.apply_series(b).iter().all(Zero::is_zero) {
                    return Ok(Some(op.content_normalized()));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedHolonomic,
    NoFitFound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Numerator degree bound; defaults to `d`.
    pub deg_num: Option<usize>,
    /// Denominator degree bound; defaults to `d + 1`.
    pub deg_den: Option<usize>,
    pub holdout: usize,
    /// Fit each residue class `n ≡ r (mod m)` separately.
    pub modulus: usize,
    /// Longest transient prefix tried; defaults to `N/4`.
    pub max_transient: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { deg_num: None, deg_den: None, holdout: 10, modulus: 1, max_transient: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceValidation {
    pub slice: usize,
    /// `table − fit` on the held-out coefficients.
    #[serde(with = "crate::rational::serde_q::vec")]
    pub holdout_residuals: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolonomicCertificate {
    pub verdict: Verdict,
    pub dimension: usize,
    pub n_max: usize,
    pub modulus: usize,
    /// One fit per `q`-slice that was fitted.
    pub fits: Vec<RationalFit>,
    /// `E = U(x, q)/V(x)`.
    pub closed_form: Option<(BiPoly, Poly)>,
    pub x_operator: Option<OdeOperator>,
    pub q_operator: Option<OdeOperator>,
    pub validation: Vec<SliceValidation>,
    pub failing_slice: Option<usize>,
    pub source: Option<TableSidecar>,
}

impl HolonomicCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedHolonomic
    }
}

fn fit_slice(series: &PowerSeriesTable, opts: &CertifyOptions, deg_num: usize, deg_den: usize) -> Result<Option<RationalFit>> {
    let max_transient = opts.max_transient.unwrap_or(series.n_max() / 4);
    if opts.modulus <= 1 {
        return guess_rational_eventual(series, deg_num, deg_den, opts.holdout, max_transient);
    }
    let m = opts.modulus;
    let holdout = (opts.holdout / m).max(2);
    let mut num = Poly::zero();
    let mut den = Poly::one();
    for r in 0..m.min(series.coeffs.len()) {
        let class = PowerSeriesTable::new(series.coeffs.iter().skip(r).step_by(m).cloned().collect());
        let Some(fit) = guess_rational_eventual(&class, deg_num, deg_den, holdout, max_transient / m)? else {
            return Ok(None);
        };
        // x^r · g_r(x^m)
        let (u, v) = fit.closed_form();
        let (u, v) = (u.compose_power(m).shift(r), v.compose_power(m));
        let l = den.lcm(&v);
        let l = l.scale(&l.coeff(0).recip());
        num = &(&num * &l.div_rem(&den).0) + &(&u * &l.div_rem(&v).0);
        den = l;
    }
    let Some((num, den)) = reduce_fraction(num, den) else { return Ok(None) };
    let fit = RationalFit { numerator: num, denominator: den, transient_prefix: Vec::new() };
    Ok((fit.expand(series.coeffs.len()) == series.coeffs).then_some(fit))
}

/// Certifies holonomicity of the complexity function of `table`.
pub fn certify_complexity(table: &CoefficientTable, opts: &CertifyOptions) -> Result<HolonomicCertificate> {
    let d = table.dimension;
    let deg_num = opts.deg_num.unwrap_or(d);
    let deg_den = opts.deg_den.unwrap_or(d + 1);
    if opts.modulus == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    let mut cert = HolonomicCertificate {
        verdict: Verdict::NoFitFound,
        dimension: d,
        n_max: table.n_max,
        modulus: opts.modulus,
        fits: Vec::new(),
        closed_form: None,
        x_operator: None,
        q_operator: None,
        validation: Vec::new(),
        failing_slice: None,
        source: table.sidecar(),
    };
    for i in 0..=d {
        let series = table.q_slice(i);
        match fit_slice(&series, opts, deg_num, deg_den)? {
            Some(fit) => {
                let expanded = fit.expand(series.coeffs.len());
                let start = series.coeffs.len().saturating_sub(opts.holdout);
                let holdout_residuals = (start..series.coeffs.len()).map(|n| &series.coeffs[n] - &expanded[n]).collect();
                cert.validation.push(SliceValidation { slice: i, holdout_residuals });
                cert.fits.push(fit);
            }
            None => {
                cert.failing_slice = Some(i);
                return Ok(cert);
            }
        }
    }
    if cert.validation.iter().any(|v| v.holdout_residuals.iter().any(|r| !r.is_zero())) {
        return Ok(cert);
    }
    let closed: Vec<(Poly, Poly)> = cert.fits.iter().map(RationalFit::closed_form).collect();
    let den = closed.iter().fold(Poly::one(), |acc, (_, v)| acc.lcm(v));
    let den = den.scale(&den.coeff(0).recip());
    let num = BiPoly::new(closed.iter().map(|(u, v)| u * &den.div_rem(v).0).collect());
    let x_operator = if num.is_zero() {
        OdeOperator { variable: Variable::X, coefficients: vec![BiPoly::from_x(Poly::one())] }
    } else {
        let p0 = num.mul_x(&den);
        let p1 = &num.mul_x(&den.derivative()) - &num.d_dx().mul_x(&den);
        OdeOperator { variable: Variable::X, coefficients: vec![p0, p1] }.content_normalized()
    };
    let mut q_coeffs = vec![BiPoly::zero(); d + 2];
    q_coeffs[0] = BiPoly::from_x(Poly::one());
    let q_operator = OdeOperator { variable: Variable::Q, coefficients: q_coeffs };
    if !x_operator.annihilates_rational(&num, &den) || !q_operator.annihilates_rational(&num, &den) {
        return Ok(cert);
    }
    cert.closed_form = Some((num, den));
    cert.x_operator = Some(x_operator);
    cert.q_operator = Some(q_operator);
    cert.verdict = Verdict::CertifiedHolonomic;
    Ok(cert)
}

/// Renders `(1 − x)^k` compactly when `v` has that form.
pub fn describe_denominator(v: &Poly) -> String {
    match v.degree() {
        Some(k) if k > 0 && *v == Poly::one_minus_x_pow(k) => {
            if k == 1 {
                "(1 - x)".into()
            } else {
                format!("(1 - x)^{k}")
            }
        }
        _ => format!("({v})"),
    }
}

// JSON wire format: polynomials are ascending coefficient lists of "p/q"
// strings, bivariate ones a list of those indexed by the power of q.

fn poly_json(p: &Poly) -> serde_json::Value {
    p.coeffs().iter().map(format_q).collect::<Vec<_>>().into()
}

fn bipoly_json(p: &BiPoly) -> serde_json::Value {
    p.by_q().iter().map(poly_json).collect::<Vec<_>>().into()
}

fn poly_from(v: &serde_json::Value) -> Result<Poly> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("expected coefficient list".into()))?;
    arr.iter()
        .map(|x| x.as_str().ok_or_else(|| Error::Parse("expected rational string".into())).and_then(parse_q))
        .collect::<Result<Vec<_>>>()
        .map(Poly::new)
}

fn bipoly_from(v: &serde_json::Value) -> Result<BiPoly> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("expected list of coefficient lists".into()))?;
    arr.iter().map(poly_from).collect::<Result<Vec<_>>>().map(BiPoly::new)
}

impl OdeOperator {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variable": self.variable,
            "order": self.order(),
            "coefficients": self.coefficients.iter().map(bipoly_json).collect::<Vec<_>>(),
            "display": self.to_string(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let variable = Variable::deserialize(&v["variable"]).map_err(|e| Error::Parse(e.to_string()))?;
        let coefficients = v["coefficients"]
            .as_array()
            .ok_or_else(|| Error::Parse("operator without coefficients".into()))?
            .iter()
            .map(bipoly_from)
            .collect::<Result<Vec<_>>>()?;
        if coefficients.is_empty() {
            return Err(Error::Parse("operator without coefficients".into()));
        }
        Ok(OdeOperator { variable, coefficients })
    }
}

impl std::fmt::Display for OdeOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let var = match self.variable {
            Variable::X => "x",
            Variable::Q => "q",
        };
        let k = self.order();
        let mut terms = Vec::new();
        for (j, p) in self.coefficients.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let m = k - j;
            let d = match m {
                0 => "f".to_string(),
                1 => format!("d/d{var} f"),
                _ => format!("d^{m}/d{var}^{m} f"),
            };
            terms.push(format!("({p})*{d}"));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{} = 0", terms.join(" + "))
    }
}

impl RationalFit {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "numerator": poly_json(&self.numerator),
            "denominator": poly_json(&self.denominator),
            "transient_prefix": self.transient_prefix.iter().map(format_q).collect::<Vec<_>>(),
            "display": format!("({}) / {}", self.numerator, describe_denominator(&self.denominator)),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        Ok(RationalFit {
            numerator: poly_from(&v["numerator"])?,
            denominator: poly_from(&v["denominator"])?,
            transient_prefix: poly_from(&v["transient_prefix"]).map(|p| {
                let mut c = p.coeffs().to_vec();
                let len = v["transient_prefix"].as_array().map_or(0, Vec::len);
                c.resize(len, Q::zero());
                c
            })?,
        })
    }
}

impl HolonomicCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        let fits: Vec<_> = self
            .fits
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut v = f.to_json();
                v["i"] = i.into();
                v
            })
            .collect();
        serde_json::json!({
            "verdict": self.verdict,
            "d": self.dimension,
            "N": self.n_max,
            "modulus": self.modulus,
            "source": self.source,
            "fits": fits,
            "closed_form": self.closed_form.as_ref().map(|(u, v)| serde_json::json!({
                "numerator": bipoly_json(u),
                "denominator": poly_json(v),
                "display": format!("({u}) / {}", describe_denominator(v)),
            })),
            "x_operator": self.x_operator.as_ref().map(OdeOperator::to_json),
            "q_operator": self.q_operator.as_ref().map(OdeOperator::to_json),
            "validation": self.validation,
            "failing_slice": self.failing_slice,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let perr = |e: serde_json::Error| Error::Parse(e.to_string());
        let usize_at = |key: &str| {
            v[key].as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("certificate: missing {key}")))
        };
        let opt = |key: &str| (!v[key].is_null()).then(|| &v[key]);
        Ok(HolonomicCertificate {
            verdict: Verdict::deserialize(&v["verdict"]).map_err(perr)?,
            dimension: usize_at("d")?,
            n_max: usize_at("N")?,
            modulus: usize_at("modulus")?,
            fits: v["fits"]
                .as_array()
                .ok_or_else(|| Error::Parse("certificate: missing fits".into()))?
                .iter()
                .map(RationalFit::from_json)
                .collect::<Result<_>>()?,
            closed_form: opt("closed_form")
                .map(|c| Ok::<_, Error>((bipoly_from(&c["numerator"])?, poly_from(&c["denominator"])?)))
                .transpose()?,
            x_operator: opt("x_operator").map(OdeOperator::from_json).transpose()?,
            q_operator: opt("q_operator").map(OdeOperator::from_json).transpose()?,
            validation: Vec::<SliceValidation>::deserialize(&v["validation"]).map_err(perr)?,
            failing_slice: opt("failing_slice").and_then(|x| x.as_u64()).map(|x| x as usize),
            source: opt("source").map(|s| TableSidecar::deserialize(s).map_err(perr)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{kunneth_table, parse_factors};
    use crate::rational::qf;

    fn o31_series(n: usize) -> PowerSeriesTable {
        PowerSeriesTable::from_fn(n, |k| {
            let k = k as i64;
            q(((3 * k + 2) * (3 * k + 1) / 2) * ((k + 2) * (k + 1) / 2))
        })
    }

    #[test]
    fn eventual_polynomial_of_o31_table() {
        let fit = fit_eventual_polynomial(&o31_series(20), 4).unwrap().unwrap();
        assert_eq!(fit.transient, 0);
        assert_eq!(fit.polynomial, Poly::new(vec![q(1), q(6), qf(47, 4), q(9), qf(9, 4)]));
        assert_eq!(fit.polynomial.eval(&q(3)), q(550));
    }

    #[test]
    fn eventual_polynomial_edge_cases() {
        let ones = PowerSeriesTable::from_fn(10, |_| q(1));
        assert_eq!(fit_eventual_polynomial(&ones, 2).unwrap().unwrap(), EventualPolynomial { polynomial: Poly::one(), transient: 0 });
        let corrupted = PowerSeriesTable::from_fn(10, |k| if k == 0 { q(7) } else { q(k as i64) });
        let fit = fit_eventual_polynomial(&corrupted, 1).unwrap().unwrap();
        assert_eq!(fit, EventualPolynomial { polynomial: Poly::from_ints(&[0, 1]), transient: 1 });
        let short = PowerSeriesTable::from_ints(&[1, 2, 3]);
        assert!(matches!(fit_eventual_polynomial(&short, 1), Err(Error::TableTooShort { .. })));
        assert!(fit_eventual_polynomial(&ones, 6).is_err());
        let pow2 = PowerSeriesTable::from_fn(12, |k| q(1 << k));
        assert_eq!(fit_eventual_polynomial(&pow2, 3).unwrap(), None);
    }

    #[test]
    fn rational_guesses() {
        let lin = PowerSeriesTable::from_fn(12, |k| q(k as i64 + 1));
        let fit = guess_rational(&lin, 1, 2, 3).unwrap().unwrap();
        assert_eq!(fit.numerator, Poly::one());
        assert_eq!(fit.denominator, Poly::one_minus_x_pow(2));
        let ones = PowerSeriesTable::from_fn(12, |_| q(1));
        let fit = guess_rational(&ones, 1, 1, 3).unwrap().unwrap();
        assert_eq!((fit.numerator, fit.denominator), (Poly::one(), Poly::one_minus_x_pow(1)));
    }

    #[test]
    fn o31_rational_fit_re_expands() {
        let t = o31_series(40);
        let fit = guess_rational(&t, 4, 5, 10).unwrap().unwrap();
        assert_eq!(fit.denominator, Poly::one_minus_x_pow(5));
        assert!(fit.numerator.degree().unwrap() <= 4);
        // independent check: multiply the table by (1 − x)⁵ and truncate
        let times = &Poly::new(t.coeffs().to_vec()) * &Poly::one_minus_x_pow(5);
        assert_eq!(times.truncate(5), fit.numerator);
        assert_eq!(fit.expand(41), t.coeffs());
    }

    #[test]
    fn transient_prefix_is_absorbed() {
        let t = PowerSeriesTable::from_fn(16, |k| if k == 0 { q(7) } else { q(k as i64) });
        assert_eq!(guess_rational(&t, 1, 2, 3).unwrap(), None);
        let fit = guess_rational_eventual(&t, 1, 2, 3, 4).unwrap().unwrap();
        assert_eq!(fit.transient_prefix, vec![q(7)]);
        assert_eq!(fit.expand(17), t.coeffs());
    }

    #[test]
    fn ode_for_geometric_series() {
        let t = PowerSeriesTable::from_fn(12, |_| q(1));
        let op = guess_ode(&t, 1, 1, 2).unwrap().unwrap();
        // (1 − x) f′ − f = 0
        assert_eq!(op.order(), 1);
        assert_eq!(op.coefficients[0], BiPoly::from_x(Poly::from_ints(&[1, -1])));
        assert_eq!(op.coefficients[1], BiPoly::from_x(Poly::from_ints(&[-1])));
        assert!(op.annihilates_rational(&BiPoly::from_x(Poly::one()), &Poly::one_minus_x_pow(1)));
    }

    #[test]
    fn ode_for_factorials() {
        let mut f = 1i64;
        let t = PowerSeriesTable::from_fn(20, |k| {
            if k > 0 {
                f *= k as i64;
            }
            q(f)
        });
        let op = guess_ode(&t, 2, 2, 4).unwrap().unwrap();
        assert_eq!(op.order(), 2);
        assert!(op.apply_series(t.coeffs()).iter().all(Zero::is_zero));
        // the classical operator x²f″ + (3x − 1)f′ + f also annihilates
        let classical = OdeOperator {
            variable: Variable::X,
            coefficients: vec![
                BiPoly::from_x(Poly::from_ints(&[0, 0, 1])),
                BiPoly::from_x(Poly::from_ints(&[-1, 3])),
                BiPoly::from_x(Poly::one()),
            ],
        };
        assert!(classical.apply_series(t.coeffs()).iter().all(Zero::is_zero));
    }

    #[test]
    fn superexponential_table_has_no_operator() {
        let t = PowerSeriesTable::new((0..=24u32).map(|k| Q::from_integer(BigInt::from(2).pow(k * k))).collect());
        assert_eq!(guess_ode(&t, 3, 3, 6).unwrap(), None);
        assert_eq!(guess_rational(&t, 4, 4, 6).unwrap(), None);
    }

    #[test]
    fn certify_o31_table() {
        let table = kunneth_table(&parse_factors("P2xP2").unwrap(), &"3,1".parse().unwrap(), 40).unwrap();
        let cert = certify_complexity(&table, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified());
        let (u, v) = cert.closed_form.clone().unwrap();
        assert_eq!(v, Poly::one_minus_x_pow(5));
        assert_eq!(u.q_degree(), Some(0));
        assert_eq!(cert.x_operator.as_ref().unwrap().order(), 1);
        assert!(cert.validation.iter().all(|s| s.holdout_residuals.iter().all(Zero::is_zero)));
        let back = HolonomicCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn certify_elliptic_times_line() {
        let table = kunneth_table(&parse_factors("ExP1").unwrap(), &"0,1".parse().unwrap(), 40).unwrap();
        let cert = certify_complexity(&table, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified());
        let (u, v) = cert.closed_form.unwrap();
        assert_eq!(u, BiPoly::new(vec![Poly::one(), Poly::one()]));
        assert_eq!(v, Poly::one_minus_x_pow(2));
        let qop = cert.q_operator.unwrap();
        assert_eq!(qop.order(), 3);
        assert_eq!(qop.variable, Variable::Q);
    }

    #[test]
    fn certify_zero_table() {
        let table = CoefficientTable::new(1, vec![vec![BigInt::zero(); 2]; 20]).unwrap();
        let cert = certify_complexity(&table, &CertifyOptions { holdout: 4, ..Default::default() }).unwrap();
        assert!(cert.is_certified());
        let op = cert.x_operator.unwrap();
        assert_eq!(op.order(), 0);
        assert!(!op.is_zero());
    }

    #[test]
    fn certify_with_modulus() {
        // quasi-polynomial: (n/3 + 1) when 3 | n, else 0
        let entries: Vec<Vec<BigInt>> =
            (0..=60).map(|n| vec![BigInt::from(if n % 3 == 0 { n / 3 + 1 } else { 0 })]).collect();
        let table = CoefficientTable::new(0, entries).unwrap();
        let plain = certify_complexity(&table, &CertifyOptions { deg_num: Some(1), deg_den: Some(2), ..Default::default() }).unwrap();
        assert_eq!(plain.verdict, Verdict::NoFitFound);
        let opts = CertifyOptions { deg_num: Some(1), deg_den: Some(2), modulus: 3, ..Default::default() };
        let cert = certify_complexity(&table, &opts).unwrap();
        assert!(cert.is_certified());
        assert_eq!(cert.closed_form.unwrap().1, Poly::one_minus_x_pow(2).compose_power(3));
    }

    #[test]
    fn certify_reports_failing_slice() {
        let entries: Vec<Vec<BigInt>> = (0..=24u32).map(|k| vec![BigInt::from(2).pow(k * k)]).collect();
        let table = CoefficientTable::new(0, entries).unwrap();
        let cert = certify_complexity(&table, &CertifyOptions { deg_num: Some(3), deg_den: Some(3), holdout: 6, ..Default::default() }).unwrap();
        assert_eq!(cert.verdict, Verdict::NoFitFound);
        assert_eq!(cert.failing_slice, Some(0));
        assert!(cert.x_operator.is_none());
    }
}
