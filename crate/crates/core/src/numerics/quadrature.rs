//! Adaptive Gauss–Kronrod quadrature, compactified radial and biradial
//! integrals over ℝⁿ, and fixed tensor Gauss–Legendre rules.
//!
//! Infinite ranges use `s = r/(1+r)`, so `[0, ∞)` becomes `[0, 1)` and the
//! algebraic tails of bubble profiles turn into bounded integrands.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cell::Cell;
use core::cmp::Ordering;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sphere_area, Real as _};

/// Which family of rules a [`QuadratureSpec`] asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Adaptive1d,
    Tensor2d,
    Compactified2d,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Only read by Monte-Carlo rules.
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn adaptive_1d() -> Self {
        QuadratureSpec {
            rule: Rule::Adaptive1d,
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_evals: 2_000_000,
            seed: 0,
        }
    }

    pub fn compactified_2d() -> Self {
        QuadratureSpec {
            rule: Rule::Compactified2d,
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_evals: 40_000_000,
            seed: 0,
        }
    }

    pub fn tensor_2d() -> Self {
        QuadratureSpec {
            rule: Rule::Tensor2d,
            ..Self::compactified_2d()
        }
    }

    pub fn montecarlo(seed: u64) -> Self {
        QuadratureSpec {
            rule: Rule::Montecarlo,
            rel_tol: 1e-2,
            abs_tol: 1e-12,
            max_evals: 20_000_000,
            seed,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals must be positive"));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::adaptive_1d()
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    /// Contribution of the far field (`|x| > 100`) for integrals over ℝⁿ; zero otherwise.
    pub tail: f64,
}

impl Estimate {
    fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            evals: self.evals,
            tail: self.tail * factor,
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_643_474_262,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// Pairwise sum of panel values in left-to-right order.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn adaptive_finite<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
            tail: 0.0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let first = gk21(f, a, b);
    let mut evals = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut resabs = first.resabs;
    heap.push(first);
    let min_width = (b - a).abs() * 1e-13;
    loop {
        let floor = 50.0 * f64::EPSILON * resabs;
        if error <= spec.target(value).max(floor) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if (worst.b - worst.a).abs() < min_width {
            frozen.push(worst);
            continue;
        }
        if evals + 42 > spec.max_evals {
            heap.push(worst);
            let mut all: Vec<Panel> = heap.into_vec();
            all.extend(frozen);
            let (v, e) = totals(&mut all);
            return Err(Error::BudgetExhausted {
                max_evals: spec.max_evals,
                estimate: v,
                error: e,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        evals += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
    }
    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(frozen);
    let (value, error) = totals(&mut all);
    if !value.is_finite() {
        return Err(Error::NonIntegrable(alloc::format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Estimate {
        value,
        error,
        evals,
        tail: 0.0,
    })
}

fn totals(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    (pairwise_sum(&values), pairwise_sum(&errors))
}

/// `∫_a^b f`. `b = +∞` is accepted and handled by `x = a + s/(1-s)`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::invalid("integration bounds must be finite (b may be +inf)"));
    }
    if b == f64::INFINITY {
        let mut g = |s: f64| {
            let d = 1.0 - s;
            let x = a + s / d;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (d * d)
            }
        };
        return adaptive_finite(&mut g, 0.0, 1.0, spec);
    }
    if b < a {
        return adaptive_finite(&mut f, b, a, spec).map(|e| e.scaled(-1.0));
    }
    adaptive_finite(&mut f, a, b, spec)
}

/// The far field only has to be resolved relative to the whole integral.
fn far_spec(spec: &QuadratureSpec, near: f64) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: spec.target(near),
        ..*spec
    }
}

/// Dyadic-shell test for `∫_R^∞ |g(r)| dr`: reports divergence when the shell
/// integrals `∫_{2^k R}^{2^{k+1} R}` stop shrinking.
fn tail_diverges<G: FnMut(f64) -> f64>(g: &mut G, spec: &QuadratureSpec) -> Result<bool> {
    let shell_spec = QuadratureSpec {
        rel_tol: 1e-6,
        ..*spec
    };
    let mut shells = Vec::new();
    let mut r = 64.0;
    for _ in 0..10 {
        let s = adaptive_finite(&mut |x: f64| g(x).abs(), r, 2.0 * r, &shell_spec)?;
        shells.push(s.value);
        r *= 2.0;
    }
    let stalled = shells
        .windows(2)
        .rev()
        .take(4)
        .all(|w| w[0] > spec.abs_tol && w[1] >= 0.95 * w[0]);
    Ok(stalled)
}

/// `∫_{ℝⁿ} f(|x|) dx = ω_{n-1} ∫_0^∞ f(r) r^{n-1} dr`.
pub fn integrate_radial_rn<F: FnMut(f64) -> f64>(
    mut f: F,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let k = (n - 1) as i32;
    let mut weighted = |r: f64| {
        let v = f(r);
        if v == 0.0 {
            0.0
        } else {
            v * r.powi(k)
        }
    };
    if tail_diverges(&mut weighted, spec)? {
        return Err(Error::NonIntegrable(alloc::format!(
            "radial integrand times r^{} does not decay faster than 1/r",
            n - 1
        )));
    }
    let mut g = |s: f64| {
        let d = 1.0 - s;
        let v = weighted(s / d);
        if v == 0.0 {
            0.0
        } else {
            v / (d * d)
        }
    };
    let split = 100.0 / 101.0;
    let near = adaptive_finite(&mut g, 0.0, split, spec)?;
    let far = adaptive_finite(&mut g, split, 1.0, &far_spec(spec, near.value))?;
    let omega = sphere_area(n - 1);
    Ok(Estimate {
        value: omega * (near.value + far.value),
        error: omega * (near.error + far.error),
        evals: near.evals + far.evals,
        tail: omega * far.value,
    })
}

/// Integral over ℝⁿ, `n = p + q`, of an `O(p)×O(q)`-invariant function
/// `F(x', x'') = f(|x'|, |x''|)`:
/// `ω_{p-1} ω_{q-1} ∫∫ f(r₁, r₂) r₁^{p-1} r₂^{q-1} dr₁ dr₂`.
///
/// Evaluated in polar form `(r₁, r₂) = r(cos φ, sin φ)` with `r` compactified.
pub fn integrate_biradial<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    p: usize,
    q: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if p == 0 || q == 0 {
        return Err(Error::invalid("biradial factor dimensions must be positive"));
    }
    let n = p + q;
    let (kp, kq) = ((p - 1) as i32, (q - 1) as i32);
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * 1e-2,
        abs_tol: spec.abs_tol * 1e-2,
        ..*spec
    };
    let evals = Cell::new(0usize);
    let inner_err = Cell::new(0.0f64);
    let failure: Cell<Option<Error>> = Cell::new(None);

    // ∫_0^{π/2} f(r cos φ, r sin φ) cos^{p-1} sin^{q-1} dφ
    let mut angular = |r: f64, absolute: bool| -> f64 {
        let mut h = |phi: f64| {
            let (c, s) = (phi.cos(), phi.sin());
            let v = f(r * c, r * s);
            let v = if absolute { v.abs() } else { v };
            if v == 0.0 {
                0.0
            } else {
                v * c.powi(kp) * s.powi(kq)
            }
        };
        match adaptive_finite(&mut h, 0.0, FRAC_PI_2, &inner_spec) {
            Ok(e) => {
                evals.set(evals.get() + e.evals);
                inner_err.set(e.error);
                e.value
            }
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };

    let nk = (n - 1) as i32;
    let shell_spec = QuadratureSpec {
        rel_tol: 1e-5,
        ..*spec
    };
    {
        let mut radial_abs = |r: f64| angular(r, true) * r.powi(nk);
        let mut shells = Vec::new();
        let mut r = 64.0;
        for _ in 0..8 {
            let s = adaptive_finite(&mut radial_abs, r, 2.0 * r, &shell_spec)?;
            shells.push(s.value);
            r *= 2.0;
        }
        let stalled = shells
            .windows(2)
            .rev()
            .take(3)
            .all(|w| w[0] > spec.abs_tol && w[1] >= 0.95 * w[0]);
        if stalled {
            return Err(Error::NonIntegrable(
                "biradial integrand does not decay fast enough".into(),
            ));
        }
    }
    evals.set(0);

    // the inner errors enter through ∫_0^1 err(r(s)) jac(s) ds ≤ sup err·jac
    let inner_sup = Cell::new(0.0f64);
    let mut g = |s: f64| {
        let d = 1.0 - s;
        let r = s / d;
        let jac = r.powi(nk) / (d * d);
        let v = angular(r, false);
        inner_sup.set(inner_sup.get().max(inner_err.get() * jac));
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    let split = 100.0 / 101.0;
    let near = adaptive_finite(&mut g, 0.0, split, spec)?;
    let far = adaptive_finite(&mut g, split, 1.0, &far_spec(spec, near.value))?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let omega = sphere_area(p - 1) * sphere_area(q - 1);
    let value = omega * (near.value + far.value);
    Ok(Estimate {
        value,
        error: omega * (near.error + far.error + inner_sup.get()),
        evals: evals.get(),
        tail: omega * far.value,
    })
}

/// Nested adaptive integral over the rectangle `[x0, x1] × [y0, y1]`.
pub fn integrate_rect<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * 1e-2,
        abs_tol: spec.abs_tol * 1e-2,
        ..*spec
    };
    let evals = Cell::new(0usize);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let mut g = |x: f64| {
        let mut h = |y: f64| f(x, y);
        match adaptive_finite(&mut h, y0, y1, &inner_spec) {
            Ok(e) => {
                evals.set(evals.get() + e.evals);
                e.value
            }
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    let outer = adaptive_finite(&mut g, x0, x1, spec)?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    Ok(Estimate {
        evals: evals.get(),
        ..outer
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_m`).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; m];
    let mut weights = alloc::vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed tensor-product Gauss–Legendre rule with `m` nodes per axis; exact for
/// polynomials of degree `≤ 2m-1` in each variable.
pub fn integrate_tensor_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    m: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre(m);
    let (hx, cx) = (0.5 * (x1 - x0), 0.5 * (x1 + x0));
    let (hy, cy) = (0.5 * (y1 - y0), 0.5 * (y1 + y0));
    let mut rows = Vec::with_capacity(m);
    for (xi, wi) in nodes.iter().zip(&weights) {
        let x = cx + hx * xi;
        let row: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(yj, wj)| wj * f(x, cy + hy * yj))
            .collect();
        rows.push(wi * pairwise_sum(&row));
    }
    hx * hy * pairwise_sum(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::adaptive_1d()
    }

    #[test]
    fn polynomial_exactness() {
        let e = integrate_1d(|x| x, 0.0, 1.0, &spec()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sine_on_half_period() {
        let e = integrate_1d(|t| t.sin(), 0.0, PI, &spec()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn compactified_half_line() {
        // ∫_0^∞ r²/(1+r)^4 dr = 1/3 (antiderivative -(3r²+3r+1)/(3(1+r)³))
        let e = integrate_1d(|r| r * r / (1.0 + r).powi(4), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-12, "{}", e.value);
    }

    #[test]
    fn reversed_bounds_negate() {
        let e = integrate_1d(|x| x * x, 1.0, 0.0, &spec()).unwrap();
        assert!((e.value + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tight = QuadratureSpec {
            max_evals: 50,
            ..spec()
        };
        let err = integrate_1d(|x| (1.0 / x).sin(), 1e-3, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
    }

    #[test]
    fn rejects_bad_tolerances() {
        let bad = spec().with_rel_tol(0.0);
        assert!(integrate_1d(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn ball_volume_and_gaussian() {
        let ball = integrate_radial_rn(|r| if r < 1.0 { 1.0 } else { 0.0 }, 3, &spec()).unwrap();
        assert!((ball.value - 4.0 * PI / 3.0).abs() < 1e-9, "{}", ball.value);
        let g = integrate_radial_rn(|r| (-r * r).exp(), 2, &spec()).unwrap();
        assert!((g.value - PI).abs() < 1e-12);
    }

    #[test]
    fn radial_divergence_detected() {
        // (1 + r²/8)^{-2} r³ ~ 64/r in n = 4
        let err = integrate_radial_rn(|r| (1.0 + r * r / 8.0).powi(-2), 4, &spec()).unwrap_err();
        assert!(matches!(err, Error::NonIntegrable(_)));
    }

    #[test]
    fn biradial_unit_ball_volume() {
        let e = integrate_biradial(
            |a, b| if a * a + b * b < 1.0 { 1.0 } else { 0.0 },
            2,
            3,
            &QuadratureSpec::compactified_2d().with_rel_tol(1e-9),
        )
        .unwrap();
        assert!((e.value - 8.0 * PI * PI / 15.0).abs() < 1e-7, "{}", e.value);
    }

    #[test]
    fn biradial_matches_radial() {
        let f = |r: f64| (1.0 + r * r).powi(-5);
        let radial = integrate_radial_rn(f, 5, &spec()).unwrap();
        let bi = integrate_biradial(
            |a, b| f((a * a + b * b).sqrt()),
            2,
            3,
            &QuadratureSpec::compactified_2d(),
        )
        .unwrap();
        assert!(((bi.value - radial.value) / radial.value).abs() < 1e-8);
        assert!(bi.tail.abs() < 1e-8 * bi.value);
    }

    #[test]
    fn biradial_antisymmetric_vanishes() {
        let e = integrate_biradial(
            |a, b| (a - b) * (-(a * a + b * b)).exp(),
            2,
            2,
            &QuadratureSpec::compactified_2d(),
        )
        .unwrap();
        assert!(e.value.abs() < 1e-12, "{}", e.value);
    }

    #[test]
    fn tensor_rule_is_exact_to_design_degree() {
        let m = 6;
        // degree 11 in each variable
        let f = |x: f64, y: f64| x.powi(11) * y.powi(10) + 3.0 * x.powi(4) * y;
        let exact = (1.0 / 12.0) * (1.0 / 11.0) + 3.0 * (1.0 / 5.0) * 0.5;
        let v = integrate_tensor_2d(f, (0.0, 1.0), (0.0, 1.0), m);
        assert!((v - exact).abs() < 1e-15, "{v} vs {exact}");
    }

    #[test]
    fn rectangle_nested() {
        let e = integrate_rect(
            |x, y| (x + y).sin(),
            (0.0, 1.0),
            (0.0, 2.0),
            &QuadratureSpec::tensor_2d(),
        )
        .unwrap();
        // ∫∫ sin(x+y) = sin 1 + sin 2 - sin 3
        let exact = 1.0f64.sin() + 2.0f64.sin() - 3.0f64.sin();
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn deterministic_reruns() {
        let f = |r: f64| (1.0 + r * r).powf(-3.5) * (2.0 + (3.0 * r).cos());
        let a = integrate_radial_rn(f, 5, &spec()).unwrap();
        let b = integrate_radial_rn(f, 5, &spec()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }
}
