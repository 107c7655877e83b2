//! Zariski decomposition `B = P + N` of pseudoeffective classes on a surface
//! with a finite list of negative curves.

use num_traits::{Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::{cone_contains, DivisorClass, SurfaceData};
use crate::linalg;
use crate::rational::{format_q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZariskiDecomposition {
    pub positive_part: DivisorClass,
    /// `(negative-curve index, coefficient)`, sorted by index.
    pub negative_part: Vec<(usize, Q)>,
}

impl ZariskiDecomposition {
    pub fn negative_class(&self, s: &SurfaceData) -> Result<DivisorClass> {
        self.negative_part.iter().try_fold(s.zero_class(), |acc, (i, a)| acc.try_add(&s.negative_curve(*i).scaled(a)))
    }

    pub fn to_json(&self, s: &SurfaceData) -> serde_json::Value {
        // sorted by curve expression so the output does not depend on the
        // order in which negative curves were listed
        let mut n: Vec<(String, String)> =
            self.negative_part.iter().map(|(i, a)| (s.format_class(&s.negative_curve(*i)), format_q(a))).collect();
        n.sort();
        let n: Vec<_> = n.into_iter().map(|(c, a)| json!([c, a])).collect();
        json!({ "P": s.format_class(&self.positive_part), "N": n })
    }

    pub fn from_json(v: &serde_json::Value, s: &SurfaceData) -> Result<Self> {
        let bad = || Error::Parse("malformed decomposition document".into());
        let p = s.parse_class(v.get("P").and_then(|x| x.as_str()).ok_or_else(bad)?)?;
        let curves = s.negative_curves();
        let mut negative_part = Vec::new();
        for entry in v.get("N").and_then(|x| x.as_array()).ok_or_else(bad)? {
            let label = entry.get(0).and_then(|x| x.as_str()).ok_or_else(bad)?;
            let coeff = crate::rational::parse_q(entry.get(1).and_then(|x| x.as_str()).ok_or_else(bad)?)?;
            let class = s.parse_class(label)?;
            let idx = curves.iter().position(|c| *c == class).ok_or_else(bad)?;
            negative_part.push((idx, coeff));
        }
        negative_part.sort_by_key(|e| e.0);
        Ok(ZariskiDecomposition { positive_part: p, negative_part })
    }
}

pub fn is_pseudoeffective(s: &SurfaceData, b: &DivisorClass) -> Result<bool> {
    cone_contains(s.pseff(), b, s)
}

pub(crate) fn gram(s: &SurfaceData, support: &[usize]) -> Vec<Vec<Q>> {
    let curves: Vec<DivisorClass> = support.iter().map(|&i| s.negative_curve(i)).collect();
    curves
        .iter()
        .map(|a| curves.iter().map(|b| s.intersect(a, b).expect("same lattice")).collect())
        .collect()
}

/// Coefficients `a` with `(B − Σ aᵢCᵢ)·Cⱼ = 0` for `j` in `support`.
pub(crate) fn orthogonal_coefficients(s: &SurfaceData, support: &[usize], b: &DivisorClass) -> Result<Vec<Q>> {
    let rhs: Vec<Q> = support.iter().map(|&i| s.intersect(b, &s.negative_curve(i))).collect::<Result<_>>()?;
    linalg::solve(&gram(s, support), &rhs)
        .ok_or_else(|| Error::InconsistentNegativeCurves("singular Gram matrix on support".into()))
}

pub(crate) fn subtract_curves(s: &SurfaceData, b: &DivisorClass, support: &[usize], coeffs: &[Q]) -> Result<DivisorClass> {
    support.iter().zip(coeffs).try_fold(b.clone(), |acc, (&i, a)| acc.try_sub(&s.negative_curve(i).scaled(a)))
}

pub fn zariski_decompose(s: &SurfaceData, b: &DivisorClass) -> Result<ZariskiDecomposition> {
    if !is_pseudoeffective(s, b)? {
        return Err(Error::NotPseudoeffective);
    }
    let mut support: Vec<usize> = Vec::new();
    let (positive, coeffs) = loop {
        let coeffs = orthogonal_coefficients(s, &support, b)?;
        let p = subtract_curves(s, b, &support, &coeffs)?;
        let mut grew = false;
        for j in 0..s.negative_curve_count() {
            if !support.contains(&j) && s.intersect(&p, &s.negative_curve(j))?.is_negative() {
                support.push(j);
                grew = true;
            }
        }
        if !grew {
            break (p, coeffs);
        }
        support.sort_unstable();
        if !linalg::is_negative_definite(&gram(s, &support)) {
            return Err(Error::InconsistentNegativeCurves("support Gram matrix not negative definite".into()));
        }
    };
    if coeffs.iter().any(Signed::is_negative) {
        return Err(Error::InconsistentNegativeCurves("negative coefficient in negative part".into()));
    }
    if !s.is_nef(&positive)? {
        return Err(Error::InconsistentNegativeCurves("positive part is not nef".into()));
    }
    let negative_part = support.into_iter().zip(coeffs).filter(|(_, a)| !a.is_zero()).collect();
    Ok(ZariskiDecomposition { positive_part: positive, negative_part })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{q, qf};

    #[test]
    fn support_does_not_depend_on_curve_order() {
        let s = fixtures::blowup_two_points();
        // B = 2H + E1 + E2: B·E1 = −1, B·E2 = −1, so N = E1 + E2 and P = 2H
        let b = s.parse_class("2H+E1+E2").unwrap();
        let z = zariski_decompose(&s, &b).unwrap();
        assert_eq!(z.positive_part, s.parse_class("2H").unwrap());
        for order in [[0, 1, 2], [2, 1, 0], [1, 2, 0]] {
            let t = s.with_negative_curve_order(&order).unwrap();
            let w = zariski_decompose(&t, &t.parse_class("2H+E1+E2").unwrap()).unwrap();
            assert_eq!(w.to_json(&t), z.to_json(&s));
        }
        // only H − E1 − E2 is negative against 3H − 2E1 − 2E2
        let b = s.parse_class("3H-2E1-2E2").unwrap();
        let z = zariski_decompose(&s, &b).unwrap();
        assert_eq!(z.negative_part, vec![(2, q(1))]);
        assert_eq!(z.positive_part, s.parse_class("2H-E1-E2").unwrap());
    }

    #[test]
    fn nef_input_is_its_own_positive_part() {
        let s = fixtures::blowup_plane();
        let b = s.parse_class("2H-E").unwrap();
        let z = zariski_decompose(&s, &b).unwrap();
        assert_eq!(z.positive_part, b);
        assert!(z.negative_part.is_empty());
    }

    #[test]
    fn blowup_negative_part() {
        let s = fixtures::blowup_plane();
        let z = zariski_decompose(&s, &s.parse_class("H+2E").unwrap()).unwrap();
        assert_eq!(z.positive_part, s.parse_class("H").unwrap());
        assert_eq!(z.negative_part, vec![(0, q(2))]);
        assert_eq!(z.to_json(&s).to_string(), r#"{"N":[["E","2"]],"P":"H"}"#);
        assert_eq!(ZariskiDecomposition::from_json(&z.to_json(&s), &s).unwrap(), z);
    }

    #[test]
    fn exe_everything_pseff_is_nef() {
        let s = fixtures::abelian_exe();
        for text in ["9f1+3f2", "f1", "f1+f2+Delta", "0"] {
            let b = s.parse_class(text).unwrap();
            let z = zariski_decompose(&s, &b).unwrap();
            assert_eq!(z.positive_part, b);
            assert!(z.negative_part.is_empty());
        }
    }

    #[test]
    fn pseudoeffectivity() {
        let s = fixtures::abelian_exe();
        assert!(is_pseudoeffective(&s, &s.parse_class("9f1+3f2").unwrap()).unwrap());
        assert!(is_pseudoeffective(&s, &s.zero_class()).unwrap());
        let t = fixtures::blowup_plane();
        assert!(is_pseudoeffective(&t, &t.zero_class()).unwrap());
        assert!(!is_pseudoeffective(&t, &t.parse_class("2H-3E").unwrap()).unwrap());
        assert_eq!(zariski_decompose(&t, &t.parse_class("2H-3E").unwrap()).unwrap_err(), Error::NotPseudoeffective);
    }

    /// Brute force: 2H−3E is pseudoeffective iff it is a non-negative
    /// combination x·E + y·(H−E) of the generators.
    #[test]
    fn pseff_verdict_matches_generator_search() {
        let t = fixtures::blowup_plane();
        for (a, b) in [(2, -3), (2, -1), (1, 2), (0, 1), (3, -3), (1, -2)] {
            let mut found = false;
            for num in 0..=40 {
                let y = qf(num, 4);
                // H-coefficient forces y = a; E-coefficient: x − y = b
                let x = q(b) + &y;
                if y == q(a) && !x.is_negative() {
                    found = true;
                }
            }
            let class = t.class_from_ints(&[a, b]).unwrap();
            assert_eq!(is_pseudoeffective(&t, &class).unwrap(), found, "{a}H+{b}E");
        }
    }

    #[test]
    fn blowup_chamber_values_on_grid() {
        let s = fixtures::blowup_plane();
        let b = s.parse_class("2H-E").unwrap();
        let c = s.parse_class("H-E").unwrap();
        for k in 0..=8 {
            let t = qf(k, 4);
            let z = zariski_decompose(&s, &b.shifted(&t, &c).unwrap()).unwrap();
            let expected = if t > q(1) { vec![(0, &t - q(1))] } else { vec![] };
            assert_eq!(z.negative_part, expected, "t = {t}");
        }
    }

    #[test]
    fn inconsistent_curves_detected() {
        use crate::lattice::ConeSpec;
        use std::collections::BTreeMap;
        // Two (−1)-curves meeting in 2 points have an indefinite Gram matrix.
        let s = SurfaceData::new(
            "bad",
            vec!["H".into(), "A".into(), "B".into()],
            vec![vec![q(1), q(0), q(0)], vec![q(0), q(-1), q(2)], vec![q(0), q(2), q(-1)]],
            ConeSpec::Polyhedral { inequalities: vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]] },
            ConeSpec::Polyhedral { inequalities: vec![vec![q(1), q(0), q(0)]] },
            vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]],
            BTreeMap::new(),
        )
        .unwrap();
        // b·A = b·B = −1, so both curves enter the support at once
        let b = s.class_from_ints(&[1, -1, -1]).unwrap();
        assert!(matches!(zariski_decompose(&s, &b), Err(Error::InconsistentNegativeCurves(_))));
    }
}
