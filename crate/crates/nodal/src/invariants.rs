//! The property suite behind the `invariants` command.

use std::time::Instant;

use nodal_core::curvature::{
    kulkarni_nomizu, weyl_from_decomposition, CurvatureTensor, ProductSphereWeyl, SymmetricTensor, MAX_DIM,
};
use nodal_core::ding::{find_solutions, flat_residual, DingConfig, DingSearch};
use nodal_core::green_mass::{mass_closed_form, mass_ode};
use nodal_core::math::critical_exponent;
use nodal_core::numerics::{integrate_biradial, OdeSpec, QuadratureSpec, SampleStream};
use nodal_core::obstruction::{admissible_t, certify_no_blowup, CertifySpec, Verdict};
use nodal_core::pohozaev::pohozaev_terms;
use nodal_core::profile::{integral, lambda_invariant, Functional};
use nodal_core::weyl_product::{weyl_otimes_b_gradient, weyl_otimes_b_hessian, weyl_otimes_b_montecarlo, weyl_otimes_b_reduced};
use nodal_core::Profile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub group: String,
    /// Measured defect.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantsReport {
    pub checks: Vec<Check>,
}

impl InvariantsReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn group_passed(&self, group: &str) -> bool {
        let mut any = false;
        for c in self.checks.iter().filter(|c| c.group == group) {
            any = true;
            if !c.passed {
                return false;
            }
        }
        any
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let mut out = format!(
            "{:<width$}  {:<10}  {:>12}  {:>10}  {:>8}  result\n",
            "check", "group", "defect", "tolerance", "seconds"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:<10}  {:>12.3e}  {:>10.1e}  {:>8.3}  {}\n",
                c.name,
                c.group,
                c.value,
                c.tolerance,
                c.seconds,
                if c.passed { "PASS" } else { "FAIL" }
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!("    error: {e}\n"));
            }
        }
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            self.failures()
        ));
        out
    }

    fn record<F: FnOnce() -> nodal_core::Result<f64>>(&mut self, group: &str, name: &str, tolerance: f64, f: F) {
        let start = Instant::now();
        let (value, error) = match f() {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.checks.push(Check {
            name: name.to_string(),
            group: group.to_string(),
            value,
            tolerance,
            passed: error.is_none() && value <= tolerance,
            seconds: start.elapsed().as_secs_f64(),
            error,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn random_point(stream: &mut SampleStream, n: usize, spread: f64) -> Vec<f64> {
    (0..n).map(|_| spread * (2.0 * stream.uniform() - 1.0)).collect()
}

/// Largest relative gap between the analytic gradient and Hessian and
/// central differences (`h = 1e-5`) over `points` random points.
fn derivative_defects(v: &Profile, points: usize, seed: u64) -> (f64, f64) {
    let n = v.n();
    let h = 1e-5;
    let mut stream = SampleStream::new(seed, 0);
    let (mut g_worst, mut h_worst) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let x = random_point(&mut stream, n, 2.5);
        let g = v.gradient(&x);
        let hess = v.hessian(&x);
        let g_scale = g.iter().fold(1e-3f64, |m, t| m.max(t.abs()));
        let h_scale = hess.iter().fold(1e-3f64, |m, t| m.max(t.abs()));
        for i in 0..n {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (v.value(&a) - v.value(&b)) / (2.0 * h);
            g_worst = g_worst.max((fd - g[i]).abs() / g_scale);
            let (ga, gb) = (v.gradient(&a), v.gradient(&b));
            for k in 0..n {
                let fd = (ga[k] - gb[k]) / (2.0 * h);
                h_worst = h_worst.max((fd - hess[k * n + i]).abs() / h_scale);
            }
        }
    }
    (g_worst, h_worst)
}

fn random_symmetric(stream: &mut SampleStream, n: usize) -> SymmetricTensor {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = 2.0 * stream.uniform() - 1.0;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymmetricTensor::new(n, data).expect("square data")
}

fn search_fingerprint(s: &DingSearch) -> Vec<u64> {
    s.solutions
        .iter()
        .flat_map(|sol| [sol.a0.to_bits(), sol.energy.to_bits(), sol.residual_sup.to_bits()])
        .collect()
}

/// Runs every check. `quick` skips the Monte-Carlo and second-split checks.
pub fn run(quick: bool) -> InvariantsReport {
    let mut rep = InvariantsReport::default();
    let q1 = QuadratureSpec::adaptive_1d();
    let q2 = QuadratureSpec::compactified_2d();

    let search = find_solutions(2, 3, 2, &DingConfig::default());
    let pullbacks: Vec<Profile> = match &search {
        Ok(s) => s.solutions.iter().filter_map(|sol| sol.clone().pullback().ok()).collect(),
        Err(_) => Vec::new(),
    };
    rep.record("ding", "ding (2,3): solutions with 0, 1, 2 nodes", 0.0, || {
        let s = search.clone()?;
        Ok(s.missing.len() as f64)
    });
    for (k, v) in pullbacks.iter().enumerate() {
        rep.record("ding", &format!("ding (2,3) {k}-node: flat residual"), 1e-6, || flat_residual(v, 2, 3));
    }

    // derivatives against finite differences
    for n in 3..=7 {
        let v = Profile::standard_bubble(n, 0.8, (0..n).map(|i| 0.1 * i as f64).collect()).expect("valid bubble");
        let (g, h) = derivative_defects(&v, 20, n as u64);
        rep.record("gradient", &format!("bubble n={n}: gradient vs FD"), 1e-7, || Ok(g));
        rep.record("gradient", &format!("bubble n={n}: Hessian vs FD"), 1e-6, || Ok(h));
    }
    for (k, v) in pullbacks.iter().enumerate().skip(1) {
        let (g, h) = derivative_defects(v, 20, 100 + k as u64);
        rep.record("gradient", &format!("ding {k}-node: gradient vs FD"), 1e-6, || Ok(g));
        rep.record("gradient", &format!("ding {k}-node: Hessian vs FD"), 1e-5, || Ok(h));
    }

    // quadrature consistency
    for n in [5usize, 6, 7] {
        rep.record("quadrature", &format!("bubble n={n}: biradial vs radial energy"), 1e-7, || {
            let b = Profile::standard(n)?;
            let s = critical_exponent(n);
            let radial = integral(&b, Functional::CriticalPower, &q1)?.value;
            let mut worst = 0.0f64;
            for p in 2..=n - 2 {
                let bi = integrate_biradial(|r1, r2| b.biradial_jet(r1, r2).v.powf(s), p, n - p, &q2)?;
                worst = worst.max(rel(bi.value, radial));
            }
            Ok(worst)
        });
    }
    for n in 3..=7 {
        rep.record("quadrature", &format!("bubble n={n}: lambda routes and closed form"), 1e-6, || {
            let l = lambda_invariant(&Profile::standard(n)?, &q1)?;
            let exact = ((n * (n - 2)) as f64).powf((n as f64 - 2.0) / 2.0);
            Ok(rel(l.quadrature, exact).max(rel(l.kelvin, exact)))
        });
    }
    for (k, v) in pullbacks.iter().enumerate() {
        rep.record("quadrature", &format!("ding {k}-node: lambda routes"), 1e-6, || {
            Ok(lambda_invariant(v, &q2)?.relative_gap())
        });
        rep.record("quadrature", &format!("ding {k}-node: Dirichlet vs critical energy"), 1e-6, || {
            let d = integral(v, Functional::Dirichlet, &q2)?.value;
            let e = integral(v, Functional::CriticalPower, &q2)?.value;
            Ok(rel(d, e))
        });
        rep.record("quadrature", &format!("ding {k}-node: Kelvin involution"), 1e-8, || {
            let kk = v.kelvin()?.kelvin()?;
            let mut stream = SampleStream::new(7, k as u64);
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let x = random_point(&mut stream, 5, 3.0);
                worst = worst.max(rel(kk.value(&x), v.value(&x)));
            }
            Ok(worst)
        });
    }

    // Weyl functional
    let psw = ProductSphereWeyl::new(2, 3).expect("valid split");
    let w = psw.materialize().expect("dimension in range");
    rep.record("weyl", "bubble against S2xS3 Weyl: |value|", 1e-8, || {
        let b = Profile::standard(5)?;
        let g = weyl_otimes_b_gradient(&w, &b, &q2)?.value;
        let h = weyl_otimes_b_hessian(&w, &b, &q2)?.value;
        Ok(g.abs().max(h.abs()))
    });
    for (k, v) in pullbacks.iter().enumerate().skip(1) {
        rep.record("weyl", &format!("ding {k}-node: route agreement"), 1e-6, || {
            let g = weyl_otimes_b_gradient(&w, v, &q2)?.value;
            let h = weyl_otimes_b_hessian(&w, v, &q2)?.value;
            let r = weyl_otimes_b_reduced(&psw, v, &q2)?.value;
            Ok(rel(g, h).max(rel(r, g)))
        });
        rep.record("weyl", &format!("ding {k}-node: strictly negative"), 0.0, || {
            let r = weyl_otimes_b_reduced(&psw, v, &q2)?;
            Ok(if r.value + r.error < 0.0 { 0.0 } else { 1.0 })
        });
        rep.record("weyl", &format!("ding {k}-node: quadratic dilation scaling"), 1e-5, || {
            let base = weyl_otimes_b_gradient(&w, v, &q2)?.value;
            let mut worst = 0.0f64;
            for mu in [0.5, 2.0] {
                let g = weyl_otimes_b_gradient(&w, &v.rescaled(mu)?, &q2)?.value;
                worst = worst.max(rel(g, mu * mu * base));
            }
            Ok(worst)
        });
    }
    if !quick {
        if let Some(v) = pullbacks.get(1) {
            rep.record("weyl", "ding 1-node: Monte-Carlo within 3 sigma", 3.0, || {
                let mc = weyl_otimes_b_montecarlo(&w, v, &QuadratureSpec::montecarlo(1))?;
                let r = weyl_otimes_b_reduced(&psw, v, &q2)?.value;
                Ok((mc.value - r).abs() / mc.stderr)
            });
        }
    }

    // determinism
    rep.record("determinism", "ding search: bit-identical rerun", 0.0, || {
        let a = search.clone()?;
        let b = find_solutions(2, 3, 2, &DingConfig::default())?;
        Ok(if search_fingerprint(&a) == search_fingerprint(&b) { 0.0 } else { 1.0 })
    });
    if let Some(v) = pullbacks.get(1) {
        rep.record("determinism", "weyl gradient route: bit-identical rerun", 0.0, || {
            let a = weyl_otimes_b_gradient(&w, v, &q2)?;
            let b = weyl_otimes_b_gradient(&w, v, &q2)?;
            Ok(if a.value.to_bits() == b.value.to_bits() { 0.0 } else { 1.0 })
        });
        if !quick {
            rep.record("determinism", "monte-carlo: bit-identical rerun per seed", 0.0, || {
                let spec = QuadratureSpec::montecarlo(9).with_rel_tol(3e-2);
                let a = weyl_otimes_b_montecarlo(&w, v, &spec)?;
                let b = weyl_otimes_b_montecarlo(&w, v, &spec)?;
                Ok(if (a.value.to_bits(), a.stderr.to_bits()) == (b.value.to_bits(), b.stderr.to_bits()) {
                    0.0
                } else {
                    1.0
                })
            });
        }
    }
    rep.record("determinism", "mass ODE: bit-identical rerun", 0.0, || {
        let spec = OdeSpec::default().with_tolerances(1e-13, 1e-14);
        let a = mass_ode(0.5, &spec)?.mass;
        let b = mass_ode(0.5, &spec)?.mass;
        Ok(if a.to_bits() == b.to_bits() { 0.0 } else { 1.0 })
    });

    // tensor symmetry sweeps
    rep.record("tensor", "Kulkarni-Nomizu products: curvature symmetries", 1e-13, || {
        let mut stream = SampleStream::new(21, 0);
        let mut worst = 0.0f64;
        for n in 2..=MAX_DIM {
            for _ in 0..10 {
                let (a, b) = (random_symmetric(&mut stream, n), random_symmetric(&mut stream, n));
                worst = worst.max(kulkarni_nomizu(&a, &b)?.symmetry_defects().curvature_max());
            }
        }
        Ok(worst)
    });
    rep.record("tensor", "Weyl part: symmetries and trace", 1e-12, || {
        let mut stream = SampleStream::new(22, 0);
        let mut worst = 0.0f64;
        for n in 4..=MAX_DIM {
            for _ in 0..10 {
                let ab = kulkarni_nomizu(&random_symmetric(&mut stream, n), &random_symmetric(&mut stream, n))?;
                let c = random_symmetric(&mut stream, n);
                let cc = kulkarni_nomizu(&c, &c)?;
                let rm = CurvatureTensor::linear_combination(&[(1.0, &ab), (0.5, &cc)])?;
                let wt = weyl_from_decomposition(&rm, &rm.ricci(), rm.scalar(), n)?.tensor;
                let d = wt.symmetry_defects();
                worst = worst.max(d.curvature_max()).max(d.trace);
            }
        }
        Ok(worst)
    });
    rep.record("tensor", "product-sphere blocks vs decomposition", 1e-12, || {
        let mut worst = 0.0f64;
        for p in 2..=MAX_DIM - 2 {
            for q in 2..=MAX_DIM - p {
                let psw = ProductSphereWeyl::new(p, q)?;
                let (rm, ric, s) = ProductSphereWeyl::product_curvature(p, q)?;
                let wt = weyl_from_decomposition(&rm, &ric, s, p + q)?.tensor;
                let blocks = psw.materialize()?;
                let d = blocks.symmetry_defects();
                worst = worst.max(wt.max_abs_diff(&blocks)).max(d.curvature_max()).max(d.trace);
            }
        }
        Ok(worst)
    });

    // mass, Pohozaev, certificate
    rep.record("mass", "mass on S3: closed form vs ODE over h0 in [0.1, 2]", 1e-8, || {
        let spec = OdeSpec::default().with_tolerances(1e-13, 1e-14);
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let h0 = 0.1 * i as f64;
            worst = worst.max((mass_closed_form(h0)?.mass - mass_ode(h0, &spec)?.mass).abs());
        }
        Ok(worst)
    });
    rep.record("pohozaev", "bubble n=5: relative Pohozaev residual", 1e-8, || {
        let b = Profile::standard(5)?;
        let mut worst = 0.0f64;
        for delta in [0.5, 1.0, 2.0] {
            worst = worst.max(pohozaev_terms(&b, 0.0, critical_exponent(5), delta, &q1)?.relative_residual());
        }
        Ok(worst)
    });
    if let Some(v) = pullbacks.get(1) {
        rep.record("pohozaev", "ding 1-node: relative Pohozaev residual", 1e-5, || {
            Ok(pohozaev_terms(v, 0.0, critical_exponent(5), 1.0, &q2)?.relative_residual())
        });
    }
    rep.record("certificate", "certificate on an (n, t) grid", 0.0, || {
        let mut failed = 0;
        for n in [5usize, 6, 7, 8] {
            let (lo, hi) = admissible_t(n);
            for frac in [0.1, 0.5, 0.9] {
                let t = lo + frac * (hi - lo);
                let r = certify_no_blowup(n, t, &vec![0.0; n], 0.1, &CertifySpec::default())?;
                if r.verdict != Verdict::CertifiedNoBlowup {
                    failed += 1;
                }
            }
        }
        Ok(failed as f64)
    });
    if !quick {
        rep.record("ding", "ding (3,3): 1-node flat residual", 1e-6, || {
            let s = find_solutions(3, 3, 1, &DingConfig::default())?;
            let sol = s
                .with_nodes(1)
                .ok_or_else(|| nodal_core::Error::MissingInput("no 1-node solution for (3,3)".into()))?;
            flat_residual(&sol.clone().pullback()?, 3, 3)
        });
    }
    rep
}
