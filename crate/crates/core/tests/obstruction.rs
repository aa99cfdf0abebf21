use std::f64::consts::PI;
use std::sync::OnceLock;

use nodal_core::ding::{find_solutions, DingConfig};
use nodal_core::green_mass::mass_closed_form;
use nodal_core::math::{conformal_constant, sphere_area};
use nodal_core::numerics::QuadratureSpec;
use nodal_core::obstruction::{
    admissible_t, certificate_potential, certify_no_blowup, coefficient_n3, coefficient_n3_from_lambda,
    coefficient_n4, coefficient_n4_from_lambda, implied_rate, phi_ell, rule_out_by_decay, Branch, BubbleSummary,
    CertifySpec, PointData, Verdict, WeylData, DEADBAND,
};
use nodal_core::{Error, Profile};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::compactified_2d()
}

fn ding_summary() -> &'static BubbleSummary {
    static S: OnceLock<BubbleSummary> = OnceLock::new();
    S.get_or_init(|| {
        let s = find_solutions(2, 3, 1, &DingConfig::default()).unwrap();
        let v = s.with_nodes(1).unwrap().clone().pullback().unwrap();
        BubbleSummary::compute(&v, Some(&WeylData::ProductSphere { p: 2, q: 3 }), &spec()).unwrap()
    })
}

fn standard_summary(n: usize) -> BubbleSummary {
    BubbleSummary::compute(&Profile::standard(n).unwrap(), None, &QuadratureSpec::adaptive_1d()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn ding_bubble_on_a_product_of_spheres_is_ruled_out() {
    let b = ding_summary();
    assert!(b.weyl_otimes_b.unwrap() < 0.0);
    // S²×S³ has scalar curvature 2·1 + 3·2 = 8
    let sg = 8.0;
    for h in [conformal_constant(5) * sg, conformal_constant(5) * sg - 0.3] {
        let point = PointData {
            n: 5,
            h_at_x0: h,
            sg_at_x0: sg,
            weyl: Some(WeylData::ProductSphere { p: 2, q: 3 }),
            mass_at_x0: None,
        };
        let r = implied_rate(&point, b, false).unwrap();
        assert_eq!(r.branch, Branch::N5plus);
        assert_eq!(r.verdict, Verdict::RuledOut);
        assert!(r.lambda_implied < -DEADBAND);
    }
}

#[test]
fn positive_mass_rules_out_the_standard_bubble_in_dimension_three() {
    let b = standard_summary(3);
    assert!(rel(b.lambda, 3f64.sqrt()) < 1e-6);
    let m = mass_closed_form(0.5).unwrap().mass;
    assert!(m > 0.0);
    let point = PointData {
        n: 3,
        h_at_x0: 0.5,
        sg_at_x0: 6.0,
        weyl: None,
        mass_at_x0: Some(m),
    };
    let r = implied_rate(&point, &b, false).unwrap();
    assert_eq!((r.branch, r.verdict), (Branch::N3, Verdict::RuledOut));
    // Λ = -96π²λ² m / ∫|B|⁶
    let expected = -96.0 * PI * PI * 3.0 * m / b.int_v_2star;
    assert!(rel(r.lambda_implied, expected) < 1e-6);
    let d = rule_out_by_decay(&point, &b).unwrap();
    assert_eq!(d.verdict, Verdict::RuledOut);
}

#[test]
fn neutral_point_with_radial_bubble_is_consistent() {
    for n in [5usize, 6] {
        let b = standard_summary(n);
        let sg = -1.3;
        let point = PointData {
            n,
            h_at_x0: conformal_constant(n) * sg,
            sg_at_x0: sg,
            weyl: Some(WeylData::Zero),
            mass_at_x0: None,
        };
        let r = implied_rate(&point, &b, false).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.lambda_implied.abs() <= DEADBAND);
        assert!(r.note.contains("necessary condition only"));
    }
}

#[test]
fn coefficient_identities() {
    let mut summaries = vec![standard_summary(3), standard_summary(4)];
    let sampled = Profile::standard(4)
        .unwrap()
        .rescaled(0.6)
        .unwrap()
        .negated();
    summaries.push(BubbleSummary::compute(&sampled, None, &QuadratureSpec::adaptive_1d()).unwrap());
    let s22 = find_solutions(2, 2, 1, &DingConfig::default()).unwrap();
    for sol in &s22.solutions {
        let v = sol.clone().pullback().unwrap();
        summaries.push(BubbleSummary::compute(&v, None, &spec()).unwrap());
    }
    assert!(summaries.len() >= 4);
    for b in &summaries {
        match b.n {
            3 => assert!(rel(coefficient_n3(b), coefficient_n3_from_lambda(b)) < 1e-6),
            4 => assert!(rel(coefficient_n4(b), coefficient_n4_from_lambda(b)) < 1e-6),
            _ => unreachable!(),
        }
    }
    // standard bubble in dimension 4: λ = 8 and ∫B³ = 2ω₃λ
    let b = &summaries[1];
    assert!(rel(b.lambda, 8.0) < 1e-6);
    assert!(rel(b.int_signed_2star_minus1, 2.0 * sphere_area(3) * 8.0) < 1e-6);
}

#[test]
fn decay_rule_out_cases() {
    let lambda_zero = BubbleSummary {
        n: 4,
        lambda: 0.0,
        alpha: vec![0.0; 4],
        int_v2: None,
        int_v_2star: 10.0,
        int_signed_2star_minus1: 0.0,
        weyl_otimes_b: None,
    };
    let point = PointData {
        n: 4,
        h_at_x0: 1.0 - 0.1,
        sg_at_x0: 6.0,
        weyl: None,
        mass_at_x0: None,
    };
    let r = rule_out_by_decay(&point, &lambda_zero).unwrap();
    assert_eq!(r.verdict, Verdict::ForcesLambdaZero);
    assert_eq!(r.lambda_implied, 0.0);
    let r = rule_out_by_decay(&point, &standard_summary(4)).unwrap();
    assert_eq!(r.verdict, Verdict::RuledOut);

    let b3 = standard_summary(3);
    let zero_mass = PointData {
        n: 3,
        h_at_x0: 0.75,
        sg_at_x0: 6.0,
        weyl: None,
        mass_at_x0: Some(0.0),
    };
    let r = rule_out_by_decay(&zero_mass, &b3).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    let pos = PointData {
        mass_at_x0: Some(0.04),
        ..zero_mass
    };
    assert_eq!(rule_out_by_decay(&pos, &b3).unwrap().verdict, Verdict::RuledOut);
    let five = PointData {
        n: 5,
        h_at_x0: 0.0,
        sg_at_x0: 0.0,
        weyl: Some(WeylData::Zero),
        mass_at_x0: None,
    };
    assert!(rule_out_by_decay(&five, &standard_summary(5)).is_err());
}

#[test]
fn missing_inputs_are_reported() {
    let point = PointData {
        n: 5,
        h_at_x0: 0.0,
        sg_at_x0: 1.0,
        weyl: Some(WeylData::ProductSphere { p: 2, q: 3 }),
        mass_at_x0: None,
    };
    // standard summary has no Weyl⊗B value
    assert!(matches!(
        implied_rate(&point, &standard_summary(5), false),
        Err(Error::MissingInput(_))
    ));
    let wrong = PointData {
        weyl: Some(WeylData::ProductSphere { p: 2, q: 2 }),
        ..point.clone()
    };
    assert!(wrong.weyl.as_ref().unwrap().materialize(5).is_err());
    let mismatch = PointData { n: 6, ..point };
    assert!(implied_rate(&mismatch, ding_summary(), false).is_err());
}

#[test]
fn exactly_critical_families_need_zero_rate() {
    let b = standard_summary(5);
    let point = PointData {
        n: 5,
        h_at_x0: 1.0,
        sg_at_x0: 1.0,
        weyl: Some(WeylData::Zero),
        mass_at_x0: None,
    };
    let loose = implied_rate(&point, &b, false).unwrap();
    assert!(loose.lambda_implied > 0.0);
    assert_eq!(loose.verdict, Verdict::Consistent);
    assert_eq!(implied_rate(&point, &b, true).unwrap().verdict, Verdict::RuledOut);
}

#[test]
fn summary_invariant_is_enforced() {
    let mut b = standard_summary(5);
    b.int_signed_2star_minus1 *= 1.0 + 1e-4;
    assert!(matches!(b.validate(), Err(Error::Inconsistent { .. })));
}

#[test]
fn rate_is_affine_and_increasing_in_h() {
    let b = ding_summary();
    let at = |h: f64| {
        let point = PointData {
            n: 5,
            h_at_x0: h,
            sg_at_x0: 8.0,
            weyl: Some(WeylData::ProductSphere { p: 2, q: 3 }),
            mass_at_x0: None,
        };
        implied_rate(&point, b, false).unwrap().lambda_implied
    };
    let (l0, l1, l2) = (at(0.0), at(1.0), at(2.0));
    let slope = 4.0 * 5.0 / 9.0 * b.int_v2.unwrap() / b.int_v_2star;
    assert!(slope > 0.0);
    assert!(rel(l1 - l0, slope) < 1e-12);
    assert!(rel(l2 - l1, slope) < 1e-12);
}

#[test]
fn certificate_grid() {
    for n in [5usize, 6, 7] {
        let (lo, hi) = admissible_t(n);
        for frac in [0.1, 0.5, 0.9] {
            let t = lo + frac * (hi - lo);
            let r = certify_no_blowup(n, t, &vec![0.0; n], 0.1, &CertifySpec::default()).unwrap();
            assert_eq!(r.verdict, Verdict::CertifiedNoBlowup, "n={n} t={t}: {:?}", r.audit);
            assert_eq!(r.branch, Branch::Certificate);
            assert!(r.audit.iter().filter(|a| a.passed.is_some()).count() >= 5);
            assert!(rel(r.lambda_implied, conformal_constant(n) * (1.0 - t)) < 1e-12);
        }
        assert!(certify_no_blowup(n, 1.0, &vec![0.0; n], 0.1, &CertifySpec::default()).is_err());
        assert!(certify_no_blowup(n, hi, &vec![0.0; n], 0.1, &CertifySpec::default()).is_err());
    }
    let r = certify_no_blowup(6, 1.05, &[0.0; 6], 0.1, &CertifySpec::default()).unwrap();
    assert!((r.lambda_implied + 0.01).abs() < 1e-15);
}

#[test]
fn certificate_potential_shape() {
    let n = 5;
    let xi0 = [0.3, 0.0, -0.2, 0.0, 0.1];
    let c = conformal_constant(n);
    assert_eq!(certificate_potential(n, 1.05, 0.1, &xi0, &xi0), -1.05 * c);
    let mut far = xi0;
    far[0] += 0.25;
    assert_eq!(certificate_potential(n, 1.05, 0.1, &xi0, &far), 1.0);
    let mut near = xi0;
    near[1] += 0.05;
    assert!((certificate_potential(n, 1.05, 0.1, &xi0, &near) - (-1.05 * c + 0.0025)).abs() < 1e-15);
    let r = certify_no_blowup(n, 1.05, &xi0, 0.05, &CertifySpec::default()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedNoBlowup);
}

#[test]
fn verdicts_serialize_in_upper_case() {
    let json = serde_json::to_string(&Verdict::CertifiedNoBlowup).unwrap();
    assert_eq!(json, "\"CERTIFIED_NO_BLOWUP\"");
    let json = serde_json::to_string(&Verdict::ForcesLambdaZero).unwrap();
    assert_eq!(json, "\"FORCES_LAMBDA_ZERO\"");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verdict_is_stable_inside_the_deadband(base in -1e-6f64..1e-6, wiggle in -1.0f64..1.0) {
        let b = standard_summary(4);
        let coeff = coefficient_n4(&b);
        let point = |h: f64| PointData { n: 4, h_at_x0: h, sg_at_x0: 6.0, weyl: None, mass_at_x0: None };
        // h = 1 + base/coeff gives Λ ≈ base
        let h = 1.0 + base / coeff;
        let v0 = implied_rate(&point(h), &b, false).unwrap().verdict;
        let h1 = h + wiggle * DEADBAND / 10.0 / coeff;
        let l1 = implied_rate(&point(h1), &b, false).unwrap();
        let away = base.abs() > 2.0 * DEADBAND;
        if away {
            prop_assert_eq!(v0, l1.verdict);
        }
    }

    #[test]
    fn phi_increases_with_ell_for_negative_curvature(n in 5usize..=8, h in -1.0f64..1.0, ell in 1usize..50) {
        let a = phi_ell(h, -1.0, n, ell).unwrap();
        let b = phi_ell(h, -1.0, n, ell + 1).unwrap();
        prop_assert!(b > a);
    }
}
