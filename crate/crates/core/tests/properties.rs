use nokholo_core::cohomology::{kunneth_table, parse_factors, MultidegreeRay};
use nokholo_core::fixtures::{abelian_exe, blowup_plane};
use nokholo_core::holonomic::{certify_complexity, guess_rational, guess_rational_eventual, CertifyOptions, PowerSeriesTable};
use nokholo_core::lattice::{cone_contains, cone_exit_time, intersect, pullback_embed, ExitTime, SurfaceData};
use nokholo_core::nok::{build_o31_family, classify_boundary, nok_surface_body, polyhedral_control_family, FlagOnSurface};
use nokholo_core::rational::{q, qf, Q};
use nokholo_core::zariski::zariski_decompose;
use nokholo_core::DivisorClass;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn runner(cases: u32) -> TestRunner {
    let seed = *b"nokholo-property-fixed-seed-0001";
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
}

fn rational() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| qf(n, d))
}

fn coords(rank: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(rational(), rank)
}

fn surfaces() -> Vec<SurfaceData> {
    vec![abelian_exe(), blowup_plane()]
}

#[test]
fn intersection_is_bilinear_and_symmetric() {
    for s in surfaces() {
        let r = s.rank();
        runner(200)
            .run(&(coords(r), coords(r), coords(r), rational(), rational()), |(a, b, c, x, y)| {
                let (a, b, c) = (s.class(a).unwrap(), s.class(b).unwrap(), s.class(c).unwrap());
                let comb = a.scaled(&x).try_add(&b.scaled(&y)).unwrap();
                let lhs = intersect(&comb, &c, &s).unwrap();
                let rhs = &x * intersect(&a, &c, &s).unwrap() + &y * intersect(&b, &c, &s).unwrap();
                prop_assert_eq!(lhs, rhs);
                prop_assert_eq!(intersect(&a, &b, &s).unwrap(), intersect(&b, &a, &s).unwrap());
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn cones_are_convex() {
    for s in surfaces() {
        let r = s.rank();
        let lambda = (0i64..=12).prop_map(|n| qf(n, 12));
        runner(300)
            .run(&(coords(r), coords(r), lambda), |(a, b, l)| {
                let (a, b) = (s.class(a).unwrap(), s.class(b).unwrap());
                for cone in [s.nef(), s.pseff()] {
                    if cone_contains(cone, &a, &s).unwrap() && cone_contains(cone, &b, &s).unwrap() {
                        let mix = a.scaled(&l).try_add(&b.scaled(&(q(1) - &l))).unwrap();
                        prop_assert!(cone_contains(cone, &mix, &s).unwrap());
                    }
                }
                Ok(())
            })
            .unwrap();
    }
}

fn exit_brackets(s: &SurfaceData, b: &DivisorClass, c: &DivisorClass) -> Option<(Q, Q)> {
    match cone_exit_time(s.nef(), b, c, s) {
        Ok(ExitTime::Finite(mu)) => {
            let (lo, hi) = match mu.to_rational() {
                Some(m) => {
                    let d = qf(1, 1 << 40);
                    (&m - &d, &m + &d)
                }
                None => mu.enclosure(64),
            };
            Some((lo, hi))
        }
        _ => None,
    }
}

#[test]
fn exit_time_separates_inside_from_outside() {
    for s in surfaces() {
        let r = s.rank();
        let checked = std::cell::Cell::new(0);
        runner(300)
            .run(&(coords(r), coords(r)), |(b, c)| {
                let (b, c) = (s.class(b).unwrap(), s.class(c).unwrap());
                if let Some((lo, hi)) = exit_brackets(&s, &b, &c) {
                    if lo.is_negative() {
                        return Ok(());
                    }
                    prop_assert!(cone_contains(s.nef(), &b.shifted(&lo, &c).unwrap(), &s).unwrap());
                    prop_assert!(!cone_contains(s.nef(), &b.shifted(&hi, &c).unwrap(), &s).unwrap());
                    checked.set(checked.get() + 1);
                }
                Ok(())
            })
            .unwrap();
        assert!(checked.get() > 20, "too few finite exits on {}: {}", s.id(), checked.get());
    }
}

#[test]
fn pullback_preserves_membership_and_exit_times() {
    for s in surfaces() {
        let r = s.rank();
        for m in [1u32, 2, 3, 5] {
            let t = pullback_embed(&s, m).unwrap();
            runner(120)
                .run(&(coords(r), coords(r)), |(b, c)| {
                    let (b, c) = (s.class(b).unwrap(), s.class(c).unwrap());
                    let (pb, pc) = (t.pull_back_class(&b).unwrap(), t.pull_back_class(&c).unwrap());
                    for (cone, pcone) in [(s.nef(), t.nef()), (s.pseff(), t.pseff())] {
                        prop_assert_eq!(cone_contains(cone, &b, &s).unwrap(), cone_contains(pcone, &pb, &t).unwrap());
                        prop_assert_eq!(cone_exit_time(cone, &b, &c, &s), cone_exit_time(pcone, &pb, &pc, &t));
                    }
                    Ok(())
                })
                .unwrap();
        }
    }
}

#[test]
fn zariski_invariants_hold_on_random_pseudoeffective_classes() {
    let s = blowup_plane();
    let e = s.negative_curve(0);
    runner(300)
        .run(&coords(2), |c| {
            let b = s.class(c).unwrap();
            let Ok(z) = zariski_decompose(&s, &b) else { return Ok(()) };
            let n = z.negative_class(&s).unwrap();
            prop_assert_eq!(z.positive_part.try_add(&n).unwrap(), b);
            prop_assert!(s.is_nef(&z.positive_part).unwrap());
            prop_assert!(z.negative_part.iter().all(|(_, a)| a.is_positive()));
            prop_assert!(intersect(&z.positive_part, &n, &s).unwrap().is_zero());
            if !z.negative_part.is_empty() {
                prop_assert!(intersect(&z.positive_part, &e, &s).unwrap().is_zero());
            }
            let again = zariski_decompose(&s, &z.positive_part).unwrap();
            prop_assert_eq!(again.positive_part, z.positive_part);
            prop_assert!(again.negative_part.is_empty());
            Ok(())
        })
        .unwrap();
}

#[test]
fn body_area_identity_on_random_big_nef_classes() {
    for s in surfaces() {
        let r = s.rank();
        let curve = match s.rank() {
            3 => s.class_from_ints(&[1, 1, 1]).unwrap(),
            _ => s.class_from_ints(&[1, 0]).unwrap(),
        };
        let flag = FlagOnSurface::generic(&s, curve).unwrap();
        let ints = prop::collection::vec(0i64..=9, r);
        runner(60)
            .run(&ints, |c| {
                let b = s.class(c.iter().map(|&x| q(x)).collect()).unwrap();
                if !s.is_nef(&b).unwrap() || s.intersect(&b, &b).unwrap().is_zero() {
                    return Ok(());
                }
                let body = nok_surface_body(&s, &b, &flag).unwrap();
                let half = s.intersect(&b, &b).unwrap() / q(2);
                prop_assert_eq!(body.area().to_rational(), Some(half));
                for piece in &body.pieces {
                    let zero = q(0);
                    prop_assert!(piece.lower.eval(&zero) <= piece.upper.eval(&zero));
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn boundary_verdicts_are_invariant_under_pullback() {
    for family in [build_o31_family(4).unwrap(), polyhedral_control_family()] {
        let base = classify_boundary(&family.region(&family.grid(9)).unwrap()).unwrap();
        for m in [1u32, 2, 3, 5] {
            let pulled = family.pulled_back(m).unwrap();
            let v = classify_boundary(&pulled.region(&pulled.grid(9)).unwrap()).unwrap();
            assert_eq!(v.kind, base.kind);
            assert!(v.boundary_polynomial.proportional_to(&base.boundary_polynomial));
        }
    }
}

#[test]
fn slice_mu_is_non_increasing() {
    let family = build_o31_family(4).unwrap();
    let region = family.region(&family.grid(12)).unwrap();
    for w in region.samples.windows(2) {
        assert!(w[1].mu <= w[0].mu);
    }
}

#[test]
fn euler_characteristic_is_polynomial() {
    let cases = [("P2xP2", "3,1"), ("P1xP3", "2,1"), ("ExP1", "1,2"), ("E~xP2", "0,1"), ("P2", "-1")];
    for (f, r) in cases {
        let factors = parse_factors(f).unwrap();
        let table = kunneth_table(&factors, &r.parse::<MultidegreeRay>().unwrap(), 30).unwrap();
        let mut chi: Vec<BigInt> = table.euler_characteristics();
        for _ in 0..=table.dimension {
            chi = chi.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        assert!(chi.iter().all(Zero::is_zero), "{f} {r}");
    }
}

#[test]
fn ample_rays_have_no_higher_cohomology() {
    let table = kunneth_table(&parse_factors("P1xP2xE").unwrap(), &"1,2,1".parse().unwrap(), 20).unwrap();
    for n in 1..=20 {
        for i in 1..=table.dimension {
            assert!(table.get(n, i).is_zero());
        }
    }
}

fn fixture_tables() -> Vec<nokholo_core::CoefficientTable> {
    [("P2xP2", "3,1"), ("ExP1", "0,1"), ("P1xP1", "1,-1"), ("P2", "2")]
        .iter()
        .map(|(f, r)| kunneth_table(&parse_factors(f).unwrap(), &r.parse().unwrap(), 40).unwrap())
        .collect()
}

#[test]
fn certificates_are_sound() {
    for table in fixture_tables() {
        let cert = certify_complexity(&table, &CertifyOptions::default()).unwrap();
        assert!(cert.is_certified());
        let (u, v) = cert.closed_form.as_ref().unwrap();
        for i in 0..=table.dimension {
            let series = table.q_slice(i);
            let expanded = u.q_coeff(i).series_div(v, table.n_max + 1);
            assert_eq!(expanded, series.coeffs());
        }
        assert!(cert.x_operator.as_ref().unwrap().annihilates_rational(u, v));
        assert!(cert.q_operator.as_ref().unwrap().annihilates_rational(u, v));
    }
}

#[test]
fn guesses_are_stable_and_monotone_in_bounds() {
    for table in fixture_tables() {
        let d = table.dimension;
        for i in 0..=d {
            let full = table.q_slice(i);
            let short = full.truncated(full.n_max() - 5);
            let a = guess_rational_eventual(&full, d, d + 1, 6, 4).unwrap().unwrap();
            let b = guess_rational_eventual(&short, d, d + 1, 6, 4).unwrap().unwrap();
            assert_eq!(a.closed_form(), b.closed_form());
            let c = guess_rational_eventual(&full, d + 2, d + 3, 6, 4).unwrap().unwrap();
            assert_eq!(a.closed_form(), c.closed_form());
        }
    }
    let t = PowerSeriesTable::from_fn(30, |k| q(k as i64 * k as i64));
    assert!(guess_rational(&t, 2, 3, 4).unwrap().is_some());
}

#[test]
fn zariski_output_is_independent_of_curve_order() {
    let s = nokholo_core::fixtures::blowup_two_points();
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let permuted: Vec<SurfaceData> = orders.iter().map(|o| s.with_negative_curve_order(o).unwrap()).collect();
    runner(200)
        .run(&coords(3), |c| {
            let b = s.class(c.clone()).unwrap();
            let reference = zariski_decompose(&s, &b).map(|z| z.to_json(&s));
            for t in &permuted {
                let got = zariski_decompose(t, &t.class(c.clone()).unwrap()).map(|z| z.to_json(t));
                prop_assert_eq!(&got, &reference);
            }
            Ok(())
        })
        .unwrap();
}
