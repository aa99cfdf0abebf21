//! The contraction `Weyl ⊗ B` of a Weyl tensor with a bubble profile,
//!
//! `C_{n,V} W_{iαjβ} ∫ x^α x^β ∂²ᵢⱼV ((n-2)/2 V + x·∇V) dx`,
//! `C_{n,V} = 4n / (3(n-2)²) · (∫|V|^{2*})^{-1}`,
//!
//! evaluated through the Hessian form above, the integrated-by-parts
//! gradient form `C_{n,V} W_{iαjβ} ∫ x^α x^β ∂ᵢV ∂ⱼV dx`, the closed
//! product-sphere reduction, and a full-dimension Monte-Carlo oracle.
//!
//! For `O(p)×O(q)`-invariant profiles the `n`-dimensional integrals are
//! reduced to `(r₁, r₂)` by averaging the integrand over the two unit
//! spheres, using the moments `E[uᵢuⱼ] = δᵢⱼ/p` and
//! `E[uᵢuⱼuₖuₗ] = (δᵢⱼδₖₗ + δᵢₖδⱼₗ + δᵢₗδⱼₖ)/(p(p+2))`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureTensor, ProductSphereWeyl};
use crate::error::{Error, Result};
use crate::math::sphere_area;
use crate::numerics::{mean_until, MonteCarloEstimate, QuadratureSpec, SampleStream};
use crate::profile::{integral, BiradialJet, Functional, Profile};

/// Largest dimension accepted by the Monte-Carlo oracle.
pub const MAX_MONTECARLO_DIM: usize = 6;

const MC_CELLS: usize = 48;
const MC_BATCH: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteMethod {
    /// Sphere-averaged two-dimensional quadrature.
    Biradial,
    /// Full-dimension sampling, for profiles without a usable split.
    MonteCarlo,
}

/// One route's value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteValue {
    pub value: f64,
    pub error: f64,
    pub method: RouteMethod,
}

/// Product-sphere reduction together with the two groups that must vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedValue {
    pub value: f64,
    pub error: f64,
    /// Largest `|C1 (|∇'V|²|x'|² - (∇'V·x')²)|` seen on the probe points,
    /// relative to the mixed group.
    pub first_factor_group: f64,
    /// Same for the second factor and `C2`.
    pub second_factor_group: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactor {
    /// `C_{n,V}`
    pub value: f64,
    /// `∫|V|^{2*}` as computed here.
    pub critical_energy: f64,
    pub critical_energy_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgreementReport {
    /// `|hessian - gradient|`.
    pub hessian_gradient_gap: Option<f64>,
    /// Sum of the two error estimates.
    pub hessian_gradient_tolerance: Option<f64>,
    /// Relative gaps `|a - b| / max(|a|, |b|)`.
    pub hessian_gradient_relative: Option<f64>,
    pub reduced_gradient_relative: Option<f64>,
    pub reduced_hessian_relative: Option<f64>,
    /// `|montecarlo - reference| / stderr`, reference being the best
    /// deterministic route.
    pub montecarlo_sigmas: Option<f64>,
    pub reduced_nonpositive: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylProductResult {
    pub n: usize,
    pub value_hessian_form: Option<RouteValue>,
    pub value_gradient_form: Option<RouteValue>,
    pub value_reduced: Option<ReducedValue>,
    pub value_montecarlo: Option<MonteCarloEstimate>,
    pub prefactor: Prefactor,
    pub agreement_report: AgreementReport,
}

impl WeylProductResult {
    /// Most accurate available value.
    pub fn best(&self) -> Option<f64> {
        self.value_reduced
            .map(|r| r.value)
            .or(self.value_gradient_form.map(|r| r.value))
            .or(self.value_hessian_form.map(|r| r.value))
            .or(self.value_montecarlo.map(|r| r.value))
    }
}

/// Which routes [`weyl_otimes_b`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Methods {
    pub hessian: bool,
    pub gradient: bool,
    pub reduced: bool,
    pub montecarlo: bool,
}

impl Methods {
    pub fn all() -> Self {
        Methods {
            hessian: true,
            gradient: true,
            reduced: true,
            montecarlo: true,
        }
    }

    pub fn deterministic() -> Self {
        Methods {
            montecarlo: false,
            ..Self::all()
        }
    }
}

fn check_dims(n_w: usize, v: &Profile) -> Result<()> {
    let n = v.n();
    if n <= 4 {
        return Err(Error::invalid(alloc::format!(
            "Weyl⊗B needs n ≥ 5: the weight |x|²|∇V|² is not integrable for n = {n}"
        )));
    }
    if n_w != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "tensor has dimension {n_w}, profile {n}"
        )));
    }
    Ok(())
}

/// `C_{n,V}`, normalized by this module's own `∫|V|^{2*}`.
pub fn prefactor(v: &Profile, spec: &QuadratureSpec) -> Result<Prefactor> {
    let n = v.n() as f64;
    let e = integral(v, Functional::CriticalPower, spec)?;
    if !(e.value > 0.0) {
        return Err(Error::invalid("profile has zero critical energy"));
    }
    Ok(Prefactor {
        value: 4.0 * n / (3.0 * (n - 2.0) * (n - 2.0)) / e.value,
        critical_energy: e.value,
        critical_energy_error: e.error,
    })
}

/// Sphere averages of `W` on the `(p, q)` block decomposition.
///
/// Slot label 0 is the unit vector `(u, 0)`, 1 is `(0, v)`. `four[a][b][c][d]`
/// is `E[W(s_a, s_b, s_c, s_d)]`; `trace[k][a][b]` is
/// `E[Σ_{i in block k} W(eᵢ, s_a, eᵢ, s_b)]`.
struct SphereMoments {
    four: [[[[f64; 2]; 2]; 2]; 2],
    trace: [[[f64; 2]; 2]; 2],
}

impl SphereMoments {
    fn new(w: &CurvatureTensor, p: usize) -> Self {
        let n = w.n;
        let q = n - p;
        let range = |k: usize| if k == 0 { 0..p } else { p..n };
        let dim = |k: usize| if k == 0 { p as f64 } else { q as f64 };
        let mut four = [[[[0.0; 2]; 2]; 2]; 2];
        for (mask, slot) in (0..16usize).map(|m| (m, [m & 1, (m >> 1) & 1, (m >> 2) & 1, (m >> 3) & 1])) {
            let ones = mask.count_ones() as usize;
            let value = match ones {
                0 | 4 => {
                    let k = slot[0];
                    let d = dim(k);
                    let mut acc = 0.0;
                    for i in range(k) {
                        for j in range(k) {
                            acc += w.get(i, i, j, j) + w.get(i, j, i, j) + w.get(i, j, j, i);
                        }
                    }
                    acc / (d * (d + 2.0))
                }
                2 => {
                    // pair up the slots carrying the same label
                    let first: Vec<usize> = (0..4).filter(|&s| slot[s] == 0).collect();
                    let second: Vec<usize> = (0..4).filter(|&s| slot[s] == 1).collect();
                    let mut acc = 0.0;
                    for i in 0..p {
                        for a in p..n {
                            let mut idx = [0usize; 4];
                            idx[first[0]] = i;
                            idx[first[1]] = i;
                            idx[second[0]] = a;
                            idx[second[1]] = a;
                            acc += w.get(idx[0], idx[1], idx[2], idx[3]);
                        }
                    }
                    acc / (p as f64 * q as f64)
                }
                _ => 0.0,
            };
            four[slot[0]][slot[1]][slot[2]][slot[3]] = value;
        }
        let mut trace = [[[0.0; 2]; 2]; 2];
        #[allow(clippy::needless_range_loop)]
        for k in 0..2 {
            for s in 0..2 {
                let mut acc = 0.0;
                for i in range(k) {
                    for a in range(s) {
                        acc += w.get(i, a, i, a);
                    }
                }
                trace[k][s][s] = acc / dim(s);
            }
        }
        SphereMoments { four, trace }
    }

    /// `E[W(∇V, x, ∇V, x)]`.
    fn gradient_form(&self, j: &BiradialJet, r1: f64, r2: f64) -> f64 {
        let g = [j.d1, j.d2];
        let x = [r1, r2];
        let mut acc = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let w = self.four[a][b][c][d];
                        if w != 0.0 {
                            acc += g[a] * x[b] * g[c] * x[d] * w;
                        }
                    }
                }
            }
        }
        acc
    }

    /// `E[W_{iαjβ} x^α x^β ∂²ᵢⱼV] · ((n-2)/2 V + x·∇V)`.
    fn hessian_form(&self, j: &BiradialJet, r1: f64, r2: f64, n: usize) -> f64 {
        let x = [r1, r2];
        let k = (n as f64 - 2.0) / 2.0 * j.v + r1 * j.d1 + r2 * j.d2;
        let (h11, h22) = (j.d11 - j.d1_over_r1, j.d22 - j.d2_over_r2);
        let mut acc = 0.0;
        for b in 0..2 {
            for d in 0..2 {
                let f = &self.four;
                let t = &self.trace;
                let inner = h11 * f[0][b][0][d]
                    + j.d12 * (f[0][b][1][d] + f[1][b][0][d])
                    + h22 * f[1][b][1][d]
                    + j.d1_over_r1 * t[0][b][d]
                    + j.d2_over_r2 * t[1][b][d];
                acc += x[b] * x[d] * inner;
            }
        }
        acc * k
    }
}

/// `Σ W_{ijkl} (aᵢbⱼ - aⱼbᵢ)(cₖdₗ - cₗdₖ)` over `i < j`, `k < l`, which
/// equals `W(a, b, c, d)` for curvature-symmetric `W`.
fn contract(w: &CurvatureTensor, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let n = w.n;
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let left = a[i] * b[j] - a[j] * b[i];
            if left == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in (k + 1)..n {
                    acc += w.get(i, j, k, l) * left * (c[k] * d[l] - c[l] * d[k]);
                }
            }
        }
    }
    acc
}

/// `W_{iαjβ} x^α x^β Hᵢⱼ` with `H` row-major.
fn contract_hessian(w: &CurvatureTensor, x: &[f64], h: &[f64]) -> f64 {
    let n = w.n;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let hij = h[i * n + j];
            if hij == 0.0 {
                continue;
            }
            let mut m = 0.0;
            for a in 0..n {
                for b in 0..n {
                    m += w.get(i, a, j, b) * x[a] * x[b];
                }
            }
            acc += m * hij;
        }
    }
    acc
}

fn split_for(v: &Profile) -> Option<(usize, usize)> {
    let n = v.n();
    if let Some(s) = v.biradial_split() {
        Some(s)
    } else if v.is_radial() {
        Some((n / 2, n - n / 2))
    } else {
        None
    }
}

/// Absolute tolerance in the units of the bare integrals: a tiny fraction of
/// `max|W| ∫|x|²|∇V|²`, so that vanishing contractions terminate on
/// roundoff instead of chasing `abs_tol`.
fn route_spec(w: &CurvatureTensor, v: &Profile, spec: &QuadratureSpec) -> Result<QuadratureSpec> {
    let scale = w.max_abs() * weighted_gradient(v)?;
    Ok(spec.with_abs_tol(spec.abs_tol.max(1e-12 * scale)))
}

fn weighted_gradient(v: &Profile) -> Result<f64> {
    let spec = QuadratureSpec::compactified_2d().with_rel_tol(1e-4);
    match split_for(v) {
        Some((p, q)) => {
            let e = crate::numerics::integrate_biradial(
                |r1, r2| (r1 * r1 + r2 * r2) * v.biradial_jet(r1, r2).grad_sq(),
                p,
                q,
                &spec,
            )?;
            Ok(e.value)
        }
        None => Ok(0.0),
    }
}

fn finish(value: f64, error: f64, pre: &Prefactor, v: &Profile, method: RouteMethod) -> RouteValue {
    let energy_rel = pre.critical_energy_error / pre.critical_energy;
    RouteValue {
        value: pre.value * value,
        error: pre.value * error + (energy_rel + v.model_error()) * (pre.value * value).abs(),
        method,
    }
}

/// Hessian form. Profiles without a radial or biradial structure fall back
/// to the Monte-Carlo sampler, seeded from `spec.seed`.
pub fn weyl_otimes_b_hessian(w: &CurvatureTensor, v: &Profile, spec: &QuadratureSpec) -> Result<RouteValue> {
    check_dims(w.n, v)?;
    let pre = prefactor(v, spec)?;
    let n = v.n();
    match split_for(v) {
        Some((p, q)) => {
            let rs = route_spec(w, v, spec)?;
            let m = SphereMoments::new(w, p);
            let e = crate::numerics::integrate_biradial(
                |r1, r2| m.hessian_form(&v.biradial_jet(r1, r2), r1, r2, n),
                p,
                q,
                &rs,
            )?;
            Ok(finish(e.value, e.error, &pre, v, RouteMethod::Biradial))
        }
        None => {
            let k = (n as f64 - 2.0) / 2.0;
            let est = sample_integral(n, (n / 2, n - n / 2), &montecarlo_spec(spec), |x| {
                let g = v.gradient(x);
                let radial = k * v.value(x) + x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
                contract_hessian(w, x, &v.hessian(x)) * radial
            })?;
            Ok(finish(est.value, 3.0 * est.stderr, &pre, v, RouteMethod::MonteCarlo))
        }
    }
}

/// Gradient form, with the same fallback as [`weyl_otimes_b_hessian`].
pub fn weyl_otimes_b_gradient(w: &CurvatureTensor, v: &Profile, spec: &QuadratureSpec) -> Result<RouteValue> {
    check_dims(w.n, v)?;
    let pre = prefactor(v, spec)?;
    let n = v.n();
    match split_for(v) {
        Some((p, q)) => {
            let rs = route_spec(w, v, spec)?;
            let m = SphereMoments::new(w, p);
            let e = crate::numerics::integrate_biradial(
                |r1, r2| m.gradient_form(&v.biradial_jet(r1, r2), r1, r2),
                p,
                q,
                &rs,
            )?;
            Ok(finish(e.value, e.error, &pre, v, RouteMethod::Biradial))
        }
        None => {
            let est = sample_integral(n, (n / 2, n - n / 2), &montecarlo_spec(spec), |x| {
                let g = v.gradient(x);
                contract(w, &g, x, &g, x)
            })?;
            Ok(finish(est.value, 3.0 * est.stderr, &pre, v, RouteMethod::MonteCarlo))
        }
    }
}

fn montecarlo_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec::montecarlo(spec.seed)
}

/// `-C_{n,V} C3 ω_{p-1} ω_{q-1} ∫∫ (r₁∂₂V - r₂∂₁V)² r₁^{p-1} r₂^{q-1}`.
///
/// The gradient-form contraction splits into a `C1` group on the first
/// factor, a `C2` group on the second and the mixed `C3` group. The first
/// two are evaluated with full vectors on a probe grid and must vanish.
pub fn weyl_otimes_b_reduced(psw: &ProductSphereWeyl, v: &Profile, spec: &QuadratureSpec) -> Result<ReducedValue> {
    check_dims(psw.n(), v)?;
    let (p, q) = (psw.p, psw.q);
    if !v.supports_split(p, q) {
        return Err(Error::invalid(alloc::format!(
            "profile is not O({p})×O({q})-invariant; the product-sphere reduction needs a matching split"
        )));
    }
    let pre = prefactor(v, spec)?;
    let (first, second) = factor_groups(psw, v);
    let tol = 1e-10;
    if first > tol || second > tol {
        return Err(Error::Inconsistent {
            quantity: "vanishing factor groups of the product-sphere contraction".into(),
            first,
            second,
        });
    }
    let w = psw.materialize()?;
    let rs = route_spec(&w, v, spec)?;
    let e = crate::numerics::integrate_biradial(
        |r1, r2| {
            let j = v.biradial_jet(r1, r2);
            let d = r1 * j.d2 - r2 * j.d1;
            d * d
        },
        p,
        q,
        &rs,
    )?;
    let r = finish(-psw.c3 * e.value, psw.c3 * e.error, &pre, v, RouteMethod::Biradial);
    Ok(ReducedValue {
        value: r.value,
        error: r.error,
        first_factor_group: first,
        second_factor_group: second,
    })
}

/// Largest relative size of the `C1` and `C2` groups on a probe grid of
/// points with generic directions.
fn factor_groups(psw: &ProductSphereWeyl, v: &Profile) -> (f64, f64) {
    let (p, n) = (psw.p, psw.n());
    let dir = |len: usize, shift: f64| -> Vec<f64> {
        let raw: Vec<f64> = (0..len).map(|i| 1.0 + shift * (i as f64 + 1.0).sqrt()).collect();
        let s = crate::math::norm(&raw);
        raw.into_iter().map(|c| c / s).collect()
    };
    let (u, w) = (dir(p, 0.37), dir(n - p, -0.21));
    let radii = [0.05, 0.3, 1.0, 2.5, 7.0, 20.0];
    let (mut first, mut second, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    let mut x = vec![0.0; n];
    for &r1 in &radii {
        for &r2 in &radii {
            for i in 0..p {
                x[i] = r1 * u[i];
            }
            for i in p..n {
                x[i] = r2 * w[i - p];
            }
            let g = v.gradient(&x);
            let group = |lo: usize, hi: usize| {
                let (mut gg, mut xx, mut gx) = (0.0, 0.0, 0.0);
                for i in lo..hi {
                    gg += g[i] * g[i];
                    xx += x[i] * x[i];
                    gx += g[i] * x[i];
                }
                (gg * xx - gx * gx, gg * xx)
            };
            let (a, sa) = group(0, p);
            let (b, sb) = group(p, n);
            first = first.max((psw.c1 * a).abs());
            second = second.max((psw.c2 * b).abs());
            scale = scale.max(psw.c1 * sa).max(psw.c2 * sb);
            let g1: f64 = (0..p).map(|i| g[i] * g[i]).sum::<f64>();
            let g2: f64 = (p..n).map(|i| g[i] * g[i]).sum::<f64>();
            scale = scale.max(psw.c3 * (g1 * r2 * r2 + g2 * r1 * r1));
        }
    }
    if scale > 0.0 {
        (first / scale, second / scale)
    } else {
        (0.0, 0.0)
    }
}

/// Full-dimension Monte-Carlo estimate of the gradient form, using the
/// curvature tensor componentwise. `spec.rel_tol` is the relative standard
/// error target, `spec.max_evals` the sample budget.
pub fn weyl_otimes_b_montecarlo(
    w: &CurvatureTensor,
    v: &Profile,
    spec: &QuadratureSpec,
) -> Result<MonteCarloEstimate> {
    check_dims(w.n, v)?;
    let n = v.n();
    if n > MAX_MONTECARLO_DIM {
        return Err(Error::invalid(alloc::format!(
            "Monte-Carlo oracle limited to n ≤ {MAX_MONTECARLO_DIM} (got {n})"
        )));
    }
    let pre = prefactor(v, &QuadratureSpec::adaptive_1d())?;
    let split = split_for(v).unwrap_or((n / 2, n - n / 2));
    let est = sample_integral(n, split, spec, |x| {
        let g = v.gradient(x);
        contract(w, &g, x, &g, x)
    })?;
    Ok(MonteCarloEstimate {
        value: pre.value * est.value,
        stderr: pre.value * est.stderr,
        samples: est.samples,
    })
}

/// Importance-sampled `∫_{ℝⁿ} f`. Points are drawn as `x = (r₁u, r₂v)` with
/// `u, v` uniform on the factor spheres and `sᵢ = rᵢ/(1+rᵢ)` from a
/// piecewise-constant density on a grid of cells, proportional to a pilot
/// estimate of `|f|` mixed with a uniform component.
fn sample_integral<F: Fn(&[f64]) -> f64>(
    n: usize,
    (p, q): (usize, usize),
    spec: &QuadratureSpec,
    f: F,
) -> Result<MonteCarloEstimate> {
    if !(spec.rel_tol > 0.0) || spec.max_evals == 0 {
        return Err(Error::invalid("Monte-Carlo target and budget must be positive"));
    }
    let (kp, kq) = ((p - 1) as i32, (q - 1) as i32);
    let omega = sphere_area(p - 1) * sphere_area(q - 1);
    let cells = MC_CELLS * MC_CELLS;
    let h = 1.0 / MC_CELLS as f64;
    let mut x = vec![0.0; n];

    let weight = |s1: f64, s2: f64, u: &[f64], w: &[f64], x: &mut [f64]| -> f64 {
        let (d1, d2) = (1.0 - s1, 1.0 - s2);
        let (r1, r2) = (s1 / d1, s2 / d2);
        for i in 0..p {
            x[i] = r1 * u[i];
        }
        for i in 0..q {
            x[p + i] = r2 * w[i];
        }
        let val = f(x);
        if val == 0.0 {
            return 0.0;
        }
        omega * val * r1.powi(kp) * r2.powi(kq) / (d1 * d1 * d2 * d2)
    };

    // pilot: a few fixed directions at every cell center
    let mut pilot_stream = SampleStream::new(spec.seed ^ 0x9e37_79b9_7f4a_7c15, u64::MAX);
    let dirs: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .map(|_| {
            let (mut u, mut w) = (vec![0.0; p], vec![0.0; q]);
            pilot_stream.unit_vector(&mut u);
            pilot_stream.unit_vector(&mut w);
            (u, w)
        })
        .collect();
    let mut mass = Vec::with_capacity(cells);
    for a in 0..MC_CELLS {
        for b in 0..MC_CELLS {
            let (s1, s2) = ((a as f64 + 0.5) * h, (b as f64 + 0.5) * h);
            let m: f64 = dirs.iter().map(|(u, w)| weight(s1, s2, u, w, &mut x).abs()).sum();
            mass.push(if m.is_finite() { m } else { 0.0 });
        }
    }
    let total: f64 = mass.iter().sum();
    let uniform = 1.0 / cells as f64;
    let mut cdf = Vec::with_capacity(cells);
    let mut prob = Vec::with_capacity(cells);
    let mut acc = 0.0;
    for &m in &mass {
        let pr = if total > 0.0 { 0.8 * m / total + 0.2 * uniform } else { uniform };
        prob.push(pr);
        acc += pr;
        cdf.push(acc);
    }

    let est = mean_until(
        |stream| {
            let t = stream.uniform() * acc;
            let cell = cdf.partition_point(|&c| c <= t).min(cells - 1);
            let (a, b) = (cell / MC_CELLS, cell % MC_CELLS);
            let s1 = (a as f64 + stream.uniform()) * h;
            let s2 = (b as f64 + stream.uniform()) * h;
            let (mut u, mut w) = ([0.0; MAX_MONTECARLO_DIM], [0.0; MAX_MONTECARLO_DIM]);
            stream.unit_vector(&mut u[..p]);
            stream.unit_vector(&mut w[..q]);
            let mut x = [0.0; MAX_MONTECARLO_DIM];
            let val = weight(s1, s2, &u[..p], &w[..q], &mut x[..n]);
            // density of the cell mixture on the unit square
            let density = prob[cell] * cells as f64 / acc;
            if val.is_finite() {
                val / density
            } else {
                0.0
            }
        },
        spec.seed,
        MC_BATCH,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_evals as u64,
    );
    Ok(est)
}

/// Every requested route on one `(W, V)` pair plus the agreement report.
/// `psw`, when given, must describe `w` and enables the reduced route.
pub fn weyl_otimes_b(
    w: &CurvatureTensor,
    psw: Option<&ProductSphereWeyl>,
    v: &Profile,
    methods: Methods,
    spec: &QuadratureSpec,
    mc_spec: &QuadratureSpec,
) -> Result<WeylProductResult> {
    check_dims(w.n, v)?;
    let pre = prefactor(v, spec)?;
    let hessian = if methods.hessian { Some(weyl_otimes_b_hessian(w, v, spec)?) } else { None };
    let gradient = if methods.gradient { Some(weyl_otimes_b_gradient(w, v, spec)?) } else { None };
    let reduced = match (methods.reduced, psw) {
        (true, Some(psw)) if v.supports_split(psw.p, psw.q) => Some(weyl_otimes_b_reduced(psw, v, spec)?),
        _ => None,
    };
    let montecarlo = if methods.montecarlo && v.n() <= MAX_MONTECARLO_DIM {
        Some(weyl_otimes_b_montecarlo(w, v, mc_spec)?)
    } else {
        None
    };

    let rel = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };
    let mut report = AgreementReport::default();
    if let (Some(h), Some(g)) = (hessian, gradient) {
        report.hessian_gradient_gap = Some((h.value - g.value).abs());
        report.hessian_gradient_tolerance = Some(h.error + g.error);
        report.hessian_gradient_relative = Some(rel(h.value, g.value));
    }
    if let Some(r) = reduced {
        report.reduced_nonpositive = Some(r.value <= 0.0);
        report.reduced_gradient_relative = gradient.map(|g| rel(r.value, g.value));
        report.reduced_hessian_relative = hessian.map(|h| rel(r.value, h.value));
    }
    let reference = reduced
        .map(|r| r.value)
        .or(gradient.map(|g| g.value))
        .or(hessian.map(|h| h.value));
    if let (Some(mc), Some(reference)) = (montecarlo, reference) {
        report.montecarlo_sigmas = Some(if mc.stderr > 0.0 {
            (mc.value - reference).abs() / mc.stderr
        } else if mc.value == reference {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(WeylProductResult {
        n: v.n(),
        value_hessian_form: hessian,
        value_gradient_form: gradient,
        value_reduced: reduced,
        value_montecarlo: montecarlo,
        prefactor: pre,
        agreement_report: report,
    })
}
