use std::f64::consts::PI;
use std::sync::OnceLock;

use nodal_core::ding::{find_solutions, DingConfig};
use nodal_core::green_mass::{green_eval, green_split, mass_closed_form, mass_ode, mass_sweep};
use nodal_core::math::{critical_exponent, sphere_area};
use nodal_core::numerics::{integrate_1d, OdeSpec, QuadratureSpec};
use nodal_core::pohozaev::{mass_boundary_functional, no_perturbation, pohozaev_terms, square_perturbation};
use nodal_core::{Error, Profile};

fn one_node() -> &'static Profile {
    static V: OnceLock<Profile> = OnceLock::new();
    V.get_or_init(|| {
        let s = find_solutions(2, 3, 1, &DingConfig::default()).unwrap();
        s.with_nodes(1).unwrap().clone().pullback().unwrap()
    })
}

fn ode_spec() -> OdeSpec {
    OdeSpec::default().with_tolerances(1e-13, 1e-14)
}

#[test]
fn mass_values() {
    assert!(mass_closed_form(0.75).unwrap().mass.abs() < 1e-16);
    assert!(mass_ode(0.75, &ode_spec()).unwrap().mass.abs() < 1e-6);
    // reference values evaluated in 30-digit arithmetic
    for (h0, expected) in [(0.5, 0.042_833_835_952_018_52), (1.0, -0.025_330_295_910_584_44)] {
        let c = mass_closed_form(h0).unwrap().mass;
        let o = mass_ode(h0, &ode_spec()).unwrap();
        assert!((c - expected).abs() < 1e-14, "h0={h0}: {c}");
        assert!((o.mass - c).abs() < 1e-8, "h0={h0}: {o:?}");
        assert!(o.error < 1e-8);
    }
}

#[test]
fn sign_change_is_bracketed_at_three_quarters() {
    let grid: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
    let rows = mass_sweep(&grid, &ode_spec()).unwrap();
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 1e-8, "{r:?}");
    }
    let changes: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| w[0][1].signum() != w[1][1].signum())
        .map(|w| (w[0][0], w[1][0]))
        .collect();
    assert_eq!(changes.len(), 1);
    assert!(changes[0].0 < 0.75 && 0.75 < changes[0].1);
    // decreasing in h0
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn ode_green_function_matches_the_closed_form() {
    for h0 in [0.3, 1.0, 2.5] {
        let r = mass_ode(h0, &ode_spec()).unwrap();
        let profile = r.green_profile.unwrap();
        assert!(profile.windows(2).all(|w| w[0][0] < w[1][0]));
        for [theta, g] in profile {
            let exact = green_eval(h0, theta).unwrap();
            assert!((g - exact).abs() < 1e-8 * exact.abs().max(1.0), "h0={h0} θ={theta}");
        }
    }
}

#[test]
fn regular_part_converges_to_the_mass() {
    for h0 in [0.2, 0.75, 1.7] {
        let m = mass_closed_form(h0).unwrap().mass;
        let s = green_split(h0, 1e-3).unwrap();
        assert!((s.regular - m).abs() < 2e-4);
        assert!((s.singular - 1.0 / (4.0 * PI * 1e-3)).abs() < 1e-9);
    }
}

#[test]
fn non_coercive_potentials_are_rejected() {
    assert!(matches!(mass_closed_form(-0.1), Err(Error::NonCoercive(_))));
    assert!(matches!(mass_ode(0.0, &ode_spec()), Err(Error::NonCoercive(_))));
}

#[test]
fn bubble_pohozaev_balance() {
    let spec = QuadratureSpec::adaptive_1d();
    for n in [3usize, 5, 6] {
        let v = Profile::standard(n).unwrap();
        for delta in [0.5, 1.0, 2.0] {
            let r = pohozaev_terms(&v, 0.0, critical_exponent(n), delta, &spec).unwrap();
            assert!(r.relative_residual() < 1e-8, "n={n} δ={delta}: {r:?}");
            assert_eq!(r.volume_subcritical_term, 0.0);
        }
    }
}

#[test]
fn nodal_pullback_pohozaev_balance() {
    let v = one_node();
    let spec = QuadratureSpec::compactified_2d();
    for delta in [0.3, 1.0, 3.0] {
        let r = pohozaev_terms(v, 0.0, critical_exponent(5), delta, &spec).unwrap();
        assert!(r.relative_residual() < 1e-5, "δ={delta}: {r:?}");
        // δ-independence of the boundary combination
        assert!(r.boundary_term.abs() < 1e-5 * r.normalizer);
    }
}

#[test]
fn boundary_pieces_are_dilation_invariant() {
    let spec = QuadratureSpec::compactified_2d();
    let s = critical_exponent(5);
    for v in [Profile::standard(5).unwrap(), one_node().clone()] {
        let base = pohozaev_terms(&v, 0.0, s, 1.0, &spec).unwrap().boundary_pieces;
        for mu in [0.5, 2.0] {
            let r = pohozaev_terms(&v.rescaled(mu).unwrap(), 0.0, s, mu, &spec).unwrap();
            let p = r.boundary_pieces;
            for (a, b) in [
                (p.flux, base.flux),
                (p.gradient, base.gradient),
                (p.normal, base.normal),
                (p.power, base.power),
            ] {
                assert!((a - b).abs() < 1e-8 * b.abs().max(1e-6), "μ={mu}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn potential_term_by_integration_by_parts() {
    // ∫_B (x·∇V + (n-2)/2 V) V = δⁿ ω V(δ)²/2 - ∫_B V²  for radial V
    let n = 5;
    let v = Profile::standard(n).unwrap();
    let (h0, delta) = (0.7, 1.3);
    let r = pohozaev_terms(&v, h0, 3.0, delta, &QuadratureSpec::adaptive_1d()).unwrap();
    let omega = sphere_area(n - 1);
    let vd = v.value(&[delta, 0.0, 0.0, 0.0, 0.0]);
    let mass = integrate_1d(
        |t| v.value(&[t, 0.0, 0.0, 0.0, 0.0]).powi(2) * t.powi(4),
        0.0,
        delta,
        &QuadratureSpec::adaptive_1d(),
    )
    .unwrap()
    .value;
    let expected = h0 * (delta.powi(5) * omega * vd * vd / 2.0 - omega * mass);
    assert!((r.volume_potential_term - expected).abs() < 1e-10 * expected.abs());
    // subcritical volume term: n(1/p - 1/2*) ∫_B |V|^p
    let pw = integrate_1d(
        |t| v.value(&[t, 0.0, 0.0, 0.0, 0.0]).powi(3) * t.powi(4),
        0.0,
        delta,
        &QuadratureSpec::adaptive_1d(),
    )
    .unwrap()
    .value;
    let expected = 5.0 * (1.0 / 3.0 - 0.3) * omega * pw;
    assert!((r.volume_subcritical_term - expected).abs() < 1e-10 * expected.abs());
}

#[test]
fn pohozaev_input_checks() {
    let spec = QuadratureSpec::adaptive_1d();
    let b = Profile::standard(5).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| 0.01 + 0.05 * i as f64).collect();
    let sampled = b.sampled_radial(&grid).unwrap();
    assert!(pohozaev_terms(&sampled, 0.0, critical_exponent(5), 10.0, &spec).is_err());
    assert!(pohozaev_terms(&sampled, 0.0, critical_exponent(5), 4.0, &spec).is_ok());
    let off = Profile::standard_bubble(5, 1.0, vec![0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(
        pohozaev_terms(&off, 0.0, critical_exponent(5), 1.0, &spec),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn mass_boundary_functional_keeps_only_the_cross_term() {
    let spec = QuadratureSpec::tensor_2d().with_rel_tol(1e-12);
    for m in [0.0, 0.3, -0.02] {
        for delta in [0.05, 0.1, 0.25, 0.5, 1.0] {
            let val = mass_boundary_functional(m, no_perturbation, delta, &spec).unwrap();
            assert!((val + m / 2.0).abs() < 1e-10, "m={m} δ={delta}: {val}");
        }
    }
}

#[test]
fn mass_boundary_functional_with_quadratic_perturbation() {
    // with β = |x|² everything is radial:
    // value = -m/2 - 3δ²/2 + 4π m δ³ + 12π δ⁵
    let spec = QuadratureSpec::tensor_2d().with_rel_tol(1e-12);
    let m = 0.04;
    let mut gaps = Vec::new();
    for delta in [0.2, 0.1, 0.05] {
        let val = mass_boundary_functional(m, square_perturbation, delta, &spec).unwrap();
        let expected = -m / 2.0 - 1.5 * delta * delta + 4.0 * PI * m * delta.powi(3) + 12.0 * PI * delta.powi(5);
        assert!((val - expected).abs() < 1e-10);
        gaps.push((val + m / 2.0).abs());
    }
    // at least first-order convergence to -m/2
    assert!(gaps[1] < 0.55 * gaps[0] && gaps[2] < 0.55 * gaps[1], "{gaps:?}");
}
