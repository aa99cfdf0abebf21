//! Members of Σ, the nonzero finite-energy solutions of `ΔV = |V|^{2*-2} V`
//! on ℝⁿ: the closed-form standard bubble, sampled radial profiles and
//! stereographic pullbacks of latitude solutions.
//!
//! Every kind exposes values, gradients and Hessians, the Kelvin transform,
//! and the integral functionals used by the obstruction conditions.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ding::{pullback_jet, LatitudeSolution};
use crate::error::{Error, Result};
use crate::math::{critical_exponent, norm, signed_pow, sphere_area, Real};
use crate::numerics::{
    integrate_biradial, integrate_radial_rn, Estimate, HermiteTable, QuadratureSpec,
};

/// Radial derivatives `V(r)`, `V'(r)`, `V'(r)/r`, `V''(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub v: f64,
    pub d1: f64,
    pub d1_over_r: f64,
    pub d2: f64,
}

/// Derivatives of an `O(p)×O(q)`-invariant function in `(r₁, r₂)`.
/// `d1_over_r1 = ∂₁V/r₁` and `d2_over_r2 = ∂₂V/r₂` stay finite on the axes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BiradialJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d1_over_r1: f64,
    pub d2_over_r2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl BiradialJet {
    fn scaled(self, amp: f64, inv: f64) -> Self {
        let inv2 = inv * inv;
        BiradialJet {
            v: amp * self.v,
            d1: amp * inv * self.d1,
            d2: amp * inv * self.d2,
            d1_over_r1: amp * inv2 * self.d1_over_r1,
            d2_over_r2: amp * inv2 * self.d2_over_r2,
            d11: amp * inv2 * self.d11,
            d12: amp * inv2 * self.d12,
            d22: amp * inv2 * self.d22,
        }
    }

    fn swapped(self) -> Self {
        BiradialJet {
            v: self.v,
            d1: self.d2,
            d2: self.d1,
            d1_over_r1: self.d2_over_r2,
            d2_over_r2: self.d1_over_r1,
            d11: self.d22,
            d12: self.d12,
            d22: self.d11,
        }
    }

    pub fn grad_sq(&self) -> f64 {
        self.d1 * self.d1 + self.d2 * self.d2
    }
}

impl RadialJet {
    fn scaled(self, amp: f64, inv: f64) -> Self {
        RadialJet {
            v: amp * self.v,
            d1: amp * inv * self.d1,
            d1_over_r: amp * inv * inv * self.d1_over_r,
            d2: amp * inv * inv * self.d2,
        }
    }

    fn to_biradial(self, r1: f64, r2: f64) -> BiradialJet {
        let r_sq = r1 * r1 + r2 * r2;
        let (d11, d12, d22) = if r_sq > 0.0 {
            let (a, b) = (r1 * r1 / r_sq, r2 * r2 / r_sq);
            (
                self.d2 * a + self.d1_over_r * b,
                (self.d2 - self.d1_over_r) * r1 * r2 / r_sq,
                self.d2 * b + self.d1_over_r * a,
            )
        } else {
            (self.d2, 0.0, self.d2)
        };
        BiradialJet {
            v: self.v,
            d1: self.d1_over_r * r1,
            d2: self.d1_over_r * r2,
            d1_over_r1: self.d1_over_r,
            d2_over_r2: self.d1_over_r,
            d11,
            d12,
            d22,
        }
    }
}

/// Samples of a radial profile on an increasing grid. The core `r < r_min`
/// uses the even quartic matching `V, V', V''` at `r_min`; the tail
/// `r > r_max` uses `λ r^{2-n} + c r^{-n}` matching `V, V'` at `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub n: usize,
    pub table: HermiteTable,
    #[serde(skip)]
    core: [f64; 3],
    #[serde(skip)]
    tail: [f64; 2],
}

impl RadialSamples {
    pub fn new(n: usize, r: Vec<f64>, v: Vec<f64>, dv: Vec<f64>, ddv: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("profiles need n ≥ 3"));
        }
        if r.first().is_some_and(|&r0| r0 <= 0.0) {
            return Err(Error::invalid("radial grid must be positive"));
        }
        let table = HermiteTable::new(r, v, dv, ddv)?;
        Ok(Self::with_table(n, table))
    }

    /// Second derivatives from the equation `-V'' - (n-1)V'/r = |V|^{2*-2}V`.
    pub fn from_equation(n: usize, r: Vec<f64>, v: Vec<f64>, dv: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("profiles need n ≥ 3"));
        }
        let s = critical_exponent(n);
        let ddv = r
            .iter()
            .zip(v.iter().zip(&dv))
            .map(|(&r, (&v, &d))| -signed_pow(v, s) - (n as f64 - 1.0) * d / r)
            .collect();
        Self::new(n, r, v, dv, ddv)
    }

    /// Rebuild the derived extension data (after deserialization).
    pub fn with_table(n: usize, table: HermiteTable) -> Self {
        let m = table.len();
        let (r0, v0, d0, e0) = (table.x[0], table.y[0], table.dy[0], table.ddy[0]);
        let c = 3.0 * (e0 * r0 - d0) / (r0 * r0 * r0);
        let b = e0 - c * r0 * r0 / 2.0;
        let a = v0 - b * r0 * r0 / 2.0 - c * r0.powi(4) / 24.0;
        let (r1, v1, d1) = (table.x[m - 1], table.y[m - 1], table.dy[m - 1]);
        let nf = n as f64;
        // v = λ r^{2-n} + c r^{-n}, v' = (2-n) λ r^{1-n} - n c r^{-n-1}
        let tc = -(d1 * r1 + (nf - 2.0) * v1) * r1.powf(nf) / 2.0;
        let lambda = (v1 - tc * r1.powf(-nf)) * r1.powf(nf - 2.0);
        RadialSamples {
            n,
            table,
            core: [a, b, c],
            tail: [lambda, tc],
        }
    }

    pub fn jet(&self, r: f64) -> RadialJet {
        let nf = self.n as f64;
        if r < self.table.first() {
            let [a, b, c] = self.core;
            let r2 = r * r;
            let d1_over_r = b + c * r2 / 6.0;
            return RadialJet {
                v: a + b * r2 / 2.0 + c * r2 * r2 / 24.0,
                d1: r * d1_over_r,
                d1_over_r,
                d2: b + c * r2 / 2.0,
            };
        }
        if r > self.table.last() {
            let [l, c] = self.tail;
            let d1 = (2.0 - nf) * l * r.powf(1.0 - nf) - nf * c * r.powf(-nf - 1.0);
            return RadialJet {
                v: l * r.powf(2.0 - nf) + c * r.powf(-nf),
                d1,
                d1_over_r: d1 / r,
                d2: (2.0 - nf) * (1.0 - nf) * l * r.powf(-nf) + nf * (nf + 1.0) * c * r.powf(-nf - 2.0),
            };
        }
        let [v, d1, d2] = self.table.eval(r);
        RadialJet {
            v,
            d1,
            d1_over_r: d1 / r,
            d2,
        }
    }

    /// Coefficient of `r^{2-n}` in the tail model.
    pub fn tail_strength(&self) -> f64 {
        self.tail[0]
    }

    /// Exact resampling of `V*(ρ) = ρ^{2-n} V(1/ρ)` on the inverted grid.
    fn kelvin(&self) -> Result<RadialSamples> {
        let nf = self.n as f64;
        let t = &self.table;
        let m = t.len();
        let mut r = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        let mut dv = Vec::with_capacity(m);
        let mut ddv = Vec::with_capacity(m);
        for i in (0..m).rev() {
            let rho = 1.0 / t.x[i];
            let (y, d, e) = (t.y[i], t.dy[i], t.ddy[i]);
            r.push(rho);
            v.push(rho.powf(2.0 - nf) * y);
            dv.push((2.0 - nf) * rho.powf(1.0 - nf) * y - rho.powf(-nf) * d);
            ddv.push(
                (nf - 1.0) * (nf - 2.0) * rho.powf(-nf) * y
                    + (2.0 * nf - 2.0) * rho.powf(-nf - 1.0) * d
                    + rho.powf(-nf - 2.0) * e,
            );
        }
        RadialSamples::new(self.n, r, v, dv, ddv)
    }
}

/// Storage behind a [`Profile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `(μ/(μ² + |x-a|²/(n(n-2))))^{(n-2)/2}`.
    Standard { mu: f64, center: Vec<f64> },
    Radial(Arc<RadialSamples>),
    /// Pullback of a latitude solution; `swapped` exchanges the roles of the
    /// two factors, so the profile is `O(q)×O(p)`-invariant.
    Biradial {
        solution: Arc<LatitudeSolution>,
        swapped: bool,
    },
}

/// A solution candidate on ℝⁿ. Numeric kinds carry a dilation
/// `V_s(x) = s^{-(n-2)/2} V(x/s)`; all kinds carry a sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    n: usize,
    sign: f64,
    scale: f64,
    kind: ProfileKind,
}

impl Profile {
    /// `B₀⁺(x) = (1 + |x|²/(n(n-2)))^{-(n-2)/2}`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::standard_bubble(n, 1.0, vec![0.0; n])
    }

    pub fn standard_bubble(n: usize, mu: f64, center: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(alloc::format!("profiles need n ≥ 3 (got {n})")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("bubble scale must be positive"));
        }
        if center.len() != n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "center has {} coordinates, expected {n}",
                center.len()
            )));
        }
        Ok(Profile {
            n,
            sign: 1.0,
            scale: 1.0,
            kind: ProfileKind::Standard { mu, center },
        })
    }

    pub fn from_radial_samples(samples: RadialSamples) -> Self {
        Profile {
            n: samples.n,
            sign: 1.0,
            scale: 1.0,
            kind: ProfileKind::Radial(Arc::new(samples)),
        }
    }

    pub fn from_latitude(solution: Arc<LatitudeSolution>) -> Result<Self> {
        if solution.p < 2 || solution.q < 2 {
            return Err(Error::invalid("latitude solutions need p, q ≥ 2"));
        }
        Ok(Profile {
            n: solution.p + solution.q,
            sign: 1.0,
            scale: 1.0,
            kind: ProfileKind::Biradial {
                solution,
                swapped: false,
            },
        })
    }

    /// Reassemble from stored parts.
    pub fn from_parts(n: usize, sign: f64, scale: f64, kind: ProfileKind) -> Result<Self> {
        if sign.abs() != 1.0 || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("sign must be ±1 and scale positive"));
        }
        let expected = match &kind {
            ProfileKind::Standard { center, .. } => center.len(),
            ProfileKind::Radial(s) => s.n,
            ProfileKind::Biradial { solution, .. } => solution.p + solution.q,
        };
        if expected != n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "profile data is {expected}-dimensional, header says {n}"
            )));
        }
        Ok(Profile {
            n,
            sign,
            scale,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    fn m(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    pub fn negated(&self) -> Profile {
        Profile {
            sign: -self.sign,
            ..self.clone()
        }
    }

    /// `μ^{-(n-2)/2} V(x/μ)`.
    pub fn rescaled(&self, mu: f64) -> Result<Profile> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("rescaling factor must be positive"));
        }
        let mut out = self.clone();
        match &mut out.kind {
            ProfileKind::Standard { mu: m0, center } => {
                *m0 *= mu;
                center.iter_mut().for_each(|c| *c *= mu);
            }
            _ => out.scale *= mu,
        }
        Ok(out)
    }

    /// Exchange the two factors of a pullback (`(x', x'') ↦ (x'', x')`).
    /// Radial profiles are returned unchanged.
    pub fn factor_swapped(&self) -> Profile {
        let mut out = self.clone();
        if let ProfileKind::Biradial { swapped, .. } = &mut out.kind {
            *swapped = !*swapped;
        }
        out
    }

    /// Relative accuracy of the profile as a function: zero for closed forms,
    /// the interpolant residual and matching defect for latitude pullbacks.
    pub fn model_error(&self) -> f64 {
        match &self.kind {
            ProfileKind::Biradial { solution, .. } => solution
                .residual_sup
                .max(solution.terminal_slope.abs() / solution.sup_abs().max(f64::MIN_POSITIVE)),
            _ => 0.0,
        }
    }

    /// Largest radius backed by samples, for sampled radial profiles.
    pub fn sampled_extent(&self) -> Option<f64> {
        match &self.kind {
            ProfileKind::Radial(s) => Some(self.scale * s.table.last()),
            _ => None,
        }
    }

    /// Radial about the origin.
    pub fn is_radial(&self) -> bool {
        match &self.kind {
            ProfileKind::Standard { center, .. } => center.iter().all(|&c| c == 0.0),
            ProfileKind::Radial(_) => true,
            ProfileKind::Biradial { .. } => false,
        }
    }

    /// `(p, q)` of the invariance group of a pullback.
    pub fn biradial_split(&self) -> Option<(usize, usize)> {
        match &self.kind {
            ProfileKind::Biradial { solution, swapped } => Some(if *swapped {
                (solution.q, solution.p)
            } else {
                (solution.p, solution.q)
            }),
            _ => None,
        }
    }

    /// True if the profile is `O(p)×O(q)`-invariant with `p + q = n`.
    pub fn supports_split(&self, p: usize, q: usize) -> bool {
        if p + q != self.n || p == 0 || q == 0 {
            return false;
        }
        self.is_radial() || self.biradial_split() == Some((p, q))
    }

    /// Radial jet; only for profiles radial about the origin.
    pub fn radial_jet(&self, r: f64) -> RadialJet {
        debug_assert!(self.is_radial());
        let (amp, inv) = (self.sign * self.scale.powf(-self.m()), 1.0 / self.scale);
        match &self.kind {
            ProfileKind::Standard { mu, .. } => standard_radial_jet(self.n, *mu, r).scaled(self.sign, 1.0),
            ProfileKind::Radial(s) => s.jet(r * inv).scaled(amp, inv),
            ProfileKind::Biradial { .. } => unreachable!("pullbacks are not radial"),
        }
    }

    /// Jet in `(r₁, r₂)`; the caller must have checked [`Profile::supports_split`].
    pub fn biradial_jet(&self, r1: f64, r2: f64) -> BiradialJet {
        match &self.kind {
            ProfileKind::Biradial { solution, swapped } => {
                let (amp, inv) = (self.sign * self.scale.powf(-self.m()), 1.0 / self.scale);
                let (a, b) = if *swapped { (r2, r1) } else { (r1, r2) };
                let j = pullback_jet(solution, a * inv, b * inv).scaled(amp, inv);
                if *swapped {
                    j.swapped()
                } else {
                    j
                }
            }
            _ => {
                let r = (r1 * r1 + r2 * r2).sqrt();
                self.radial_jet(r).to_biradial(r1, r2)
            }
        }
    }

    fn check_point(&self, x: &[f64]) {
        assert_eq!(x.len(), self.n, "point dimension does not match the profile");
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.check_point(x);
        match &self.kind {
            ProfileKind::Standard { mu, center } => {
                let d: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                self.sign * standard_value(self.n, *mu, d)
            }
            ProfileKind::Radial(_) => self.radial_jet(norm(x)).v,
            ProfileKind::Biradial { .. } => {
                let (p, _) = self.biradial_split().unwrap();
                self.biradial_jet(norm(&x[..p]), norm(&x[p..])).v
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.check_point(x);
        match &self.kind {
            ProfileKind::Standard { center, .. } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let j = self.centered_standard_jet(norm(&y));
                y.iter().map(|v| j.d1_over_r * v).collect()
            }
            ProfileKind::Radial(_) => {
                let j = self.radial_jet(norm(x));
                x.iter().map(|v| j.d1_over_r * v).collect()
            }
            ProfileKind::Biradial { .. } => {
                let (p, _) = self.biradial_split().unwrap();
                let j = self.biradial_jet(norm(&x[..p]), norm(&x[p..]));
                x.iter()
                    .enumerate()
                    .map(|(i, v)| if i < p { j.d1_over_r1 * v } else { j.d2_over_r2 * v })
                    .collect()
            }
        }
    }

    /// Row-major `n × n` Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        self.check_point(x);
        let n = self.n;
        let mut h = vec![0.0; n * n];
        let radial_fill = |h: &mut [f64], y: &[f64], j: RadialJet| {
            let r_sq: f64 = y.iter().map(|v| v * v).sum();
            for i in 0..n {
                h[i * n + i] += j.d1_over_r;
                if r_sq > 0.0 {
                    for k in 0..n {
                        h[i * n + k] += (j.d2 - j.d1_over_r) * y[i] * y[k] / r_sq;
                    }
                } else {
                    h[i * n + i] += j.d2 - j.d1_over_r;
                }
            }
        };
        match &self.kind {
            ProfileKind::Standard { center, .. } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                radial_fill(&mut h, &y, self.centered_standard_jet(norm(&y)));
            }
            ProfileKind::Radial(_) => radial_fill(&mut h, x, self.radial_jet(norm(x))),
            ProfileKind::Biradial { .. } => {
                let (p, _) = self.biradial_split().unwrap();
                let (r1, r2) = (norm(&x[..p]), norm(&x[p..]));
                let j = self.biradial_jet(r1, r2);
                for i in 0..n {
                    for k in 0..n {
                        let (a, b) = (i < p, k < p);
                        h[i * n + k] = match (a, b) {
                            (true, true) => {
                                let diag = if i == k { j.d1_over_r1 } else { 0.0 };
                                let radial = if r1 > 0.0 {
                                    (j.d11 - j.d1_over_r1) * x[i] * x[k] / (r1 * r1)
                                } else {
                                    0.0
                                };
                                diag + radial
                            }
                            (false, false) => {
                                let diag = if i == k { j.d2_over_r2 } else { 0.0 };
                                let radial = if r2 > 0.0 {
                                    (j.d22 - j.d2_over_r2) * x[i] * x[k] / (r2 * r2)
                                } else {
                                    0.0
                                };
                                diag + radial
                            }
                            _ => {
                                if r1 > 0.0 && r2 > 0.0 {
                                    j.d12 * x[i] * x[k] / (r1 * r2)
                                } else {
                                    0.0
                                }
                            }
                        };
                    }
                }
            }
        }
        h
    }

    fn centered_standard_jet(&self, r: f64) -> RadialJet {
        match &self.kind {
            ProfileKind::Standard { mu, .. } => standard_radial_jet(self.n, *mu, r).scaled(self.sign, 1.0),
            _ => unreachable!(),
        }
    }

    /// `V*(x) = |x|^{2-n} V(x/|x|²)`.
    ///
    /// Standard bubbles map to standard bubbles; sampled radial profiles are
    /// resampled on the inverted grid; latitude pullbacks are invariant under
    /// the inversion (it is the reflection across the equator of `Sⁿ`, which
    /// lies in the `O(q+1)` symmetry group), so only the dilation is inverted.
    pub fn kelvin(&self) -> Result<Profile> {
        let mut out = self.clone();
        match &self.kind {
            ProfileKind::Standard { mu, center } => {
                let k = (self.n * (self.n - 2)) as f64;
                let a2: f64 = center.iter().map(|c| c * c).sum();
                let d = mu * mu + a2 / k;
                out.kind = ProfileKind::Standard {
                    mu: mu / (k * d),
                    center: center.iter().map(|c| c / (k * d)).collect(),
                };
            }
            ProfileKind::Radial(s) => {
                out.kind = ProfileKind::Radial(Arc::new(s.kelvin()?));
                out.scale = 1.0 / self.scale;
            }
            ProfileKind::Biradial { .. } => out.scale = 1.0 / self.scale,
        }
        Ok(out)
    }

    /// Samples this radial profile on `grid` as a numeric radial profile.
    pub fn sampled_radial(&self, grid: &[f64]) -> Result<Profile> {
        if !self.is_radial() {
            return Err(Error::invalid("only radial profiles can be sampled radially"));
        }
        let jets: Vec<RadialJet> = grid.iter().map(|&r| self.radial_jet(r)).collect();
        let samples = RadialSamples::new(
            self.n,
            grid.to_vec(),
            jets.iter().map(|j| j.v).collect(),
            jets.iter().map(|j| j.d1).collect(),
            jets.iter().map(|j| j.d2).collect(),
        )?;
        Ok(Profile::from_radial_samples(samples))
    }
}

fn standard_value(n: usize, mu: f64, r_sq: f64) -> f64 {
    let k = (n * (n - 2)) as f64;
    let m = (n as f64 - 2.0) / 2.0;
    (mu / (mu * mu + r_sq / k)).powf(m)
}

fn standard_radial_jet(n: usize, mu: f64, r: f64) -> RadialJet {
    let k = (n * (n - 2)) as f64;
    let m = (n as f64 - 2.0) / 2.0;
    let d = mu * mu + r * r / k;
    let v = (mu / d).powf(m);
    // ∂ᵣ (μ/D)^m = -(2m/k) r (μ/D)^m / D
    let d1_over_r = -(2.0 * m / k) * v / d;
    let d2 = d1_over_r * (1.0 - (m + 1.0) * 2.0 * r * r / (k * d));
    RadialJet {
        v,
        d1: d1_over_r * r,
        d1_over_r,
        d2,
    }
}

/// Integrand selector for [`integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `∫ |V|^{2*}`
    CriticalPower,
    /// `∫ V²`, convergent only for `n ≥ 5`.
    Square,
    /// `∫ |V|^{2*-2} V`
    Signed,
    /// `∫ |∇V|²`
    Dirichlet,
}

/// Integral of `f(jet)` over ℝⁿ using the profile's symmetry.
pub fn integrate_jet<F: FnMut(&BiradialJet) -> f64>(
    v: &Profile,
    spec: &QuadratureSpec,
    mut f: F,
) -> Result<Estimate> {
    match v.kind() {
        ProfileKind::Biradial { .. } => {
            let (p, q) = v.biradial_split().unwrap();
            integrate_biradial(|r1, r2| f(&v.biradial_jet(r1, r2)), p, q, spec)
        }
        ProfileKind::Standard { mu, .. } if !v.is_radial() => {
            // translation invariant: integrate the centered bubble
            let centered = Profile::standard_bubble(v.n, *mu, vec![0.0; v.n])?;
            let centered = if v.sign < 0.0 { centered.negated() } else { centered };
            integrate_radial_rn(|r| f(&centered.radial_jet(r).to_biradial(r, 0.0)), v.n, spec)
        }
        _ => integrate_radial_rn(|r| f(&v.radial_jet(r).to_biradial(r, 0.0)), v.n, spec),
    }
}

pub fn integral(v: &Profile, which: Functional, spec: &QuadratureSpec) -> Result<Estimate> {
    let n = v.n();
    let s = critical_exponent(n);
    if which == Functional::Square && n <= 4 {
        return Err(Error::NonIntegrable(alloc::format!(
            "∫V² diverges for n = {n}: bubbles decay like |x|^{{2-n}}"
        )));
    }
    integrate_jet(v, spec, |j| match which {
        Functional::CriticalPower => j.v.abs().powf(s),
        Functional::Square => j.v * j.v,
        Functional::Signed => signed_pow(j.v, s),
        Functional::Dirichlet => j.grad_sq(),
    })
}

/// Both routes to `λ(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    /// `∫|V|^{2*-2}V / ((n-2) ω_{n-1})`
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// `V*(0)`
    pub kelvin: f64,
}

impl LambdaEstimate {
    pub fn value(&self) -> f64 {
        self.quadrature
    }

    pub fn relative_gap(&self) -> f64 {
        let scale = self.quadrature.abs().max(self.kelvin.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.quadrature - self.kelvin).abs() / scale
        }
    }
}

/// Relative agreement required between the two `λ` routes.
pub const LAMBDA_ROUTE_TOL: f64 = 1e-6;

/// `λ(V)`, the coefficient of `|x|^{2-n}` at infinity, by quadrature and by
/// the Kelvin transform. Routes disagreeing by more than `10 × LAMBDA_ROUTE_TOL`
/// are reported as an inconsistency.
pub fn lambda_invariant(v: &Profile, spec: &QuadratureSpec) -> Result<LambdaEstimate> {
    let n = v.n();
    let e = integral(v, Functional::Signed, spec)?;
    let norm = (n as f64 - 2.0) * sphere_area(n - 1);
    let est = LambdaEstimate {
        quadrature: e.value / norm,
        quadrature_error: e.error / norm,
        kelvin: v.kelvin()?.value(&vec![0.0; n]),
    };
    if est.relative_gap() > 10.0 * LAMBDA_ROUTE_TOL {
        return Err(Error::Inconsistent {
            quantity: "lambda".into(),
            first: est.quadrature,
            second: est.kelvin,
        });
    }
    Ok(est)
}

/// `α(V) = ∇V*(0)`, the dipole coefficient of the `|x|^{-n}` term.
pub fn alpha_invariant(v: &Profile) -> Result<Vec<f64>> {
    let k = v.kelvin()?;
    alpha_from_kelvin(v.n(), |y| k.value(y))
}

/// `∇V*(0)` for an arbitrary field `V`, with `V*` formed pointwise.
pub fn alpha_from_field<F: Fn(&[f64]) -> f64>(n: usize, field: F) -> Result<Vec<f64>> {
    alpha_from_kelvin(n, |y| {
        let r_sq: f64 = y.iter().map(|v| v * v).sum();
        let x: Vec<f64> = y.iter().map(|v| v / r_sq).collect();
        r_sq.powf((2.0 - n as f64) / 2.0) * field(&x)
    })
}

/// Central differences at `h = h₀ 2^{-k}` with Richardson elimination of the
/// even error terms.
fn alpha_from_kelvin<F: Fn(&[f64]) -> f64>(n: usize, kelvin: F) -> Result<Vec<f64>> {
    const LEVELS: usize = 6;
    let mut alpha = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut table = [[0.0f64; LEVELS]; LEVELS];
        let mut h = 0.1;
        for k in 0..LEVELS {
            y[i] = h;
            let fp = kelvin(&y);
            y[i] = -h;
            let fm = kelvin(&y);
            y[i] = 0.0;
            table[k][0] = (fp - fm) / (2.0 * h);
            let mut factor = 4.0;
            for j in 1..=k {
                table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / (factor - 1.0);
                factor *= 4.0;
            }
            h /= 2.0;
        }
        let best = table[LEVELS - 1][LEVELS - 1];
        let previous = table[LEVELS - 2][LEVELS - 2];
        let scale = table[0][0].abs().max(kelvin(&y).abs()).max(1.0);
        if !best.is_finite() || (best - previous).abs() > 1e-6 * scale {
            return Err(Error::ExtrapolationFailed(alloc::format!(
                "α component {i} did not settle: {previous} vs {best}"
            )));
        }
        alpha[i] = best;
    }
    Ok(alpha)
}

/// Sup constants of the decay bound
/// `|V| ≤ C₀(1+|x|)^{2-n}, |∇V| ≤ C₁(1+|x|)^{1-n}, |∇²V| ≤ C₂(1+|x|)^{-n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub r_max: f64,
    pub value: f64,
    pub gradient: f64,
    pub hessian: f64,
}

/// Evaluate the decay constants on a log grid in `|x| ∈ [10⁻³, r_max]`
/// (times an angular grid for pullbacks). The Hessian norm is Frobenius.
pub fn decay_check(v: &Profile, r_max: f64, radii: usize) -> Result<DecayReport> {
    if !(r_max > 1e-3) || radii < 2 {
        return Err(Error::invalid("decay grid needs r_max > 1e-3 and ≥ 2 radii"));
    }
    let nf = v.n() as f64;
    let angles: Vec<f64> = if v.is_radial() {
        vec![0.0]
    } else {
        (0..=16).map(|k| core::f64::consts::FRAC_PI_2 * k as f64 / 16.0).collect()
    };
    let (p, q) = v.biradial_split().unwrap_or((1, v.n() - 1));
    let (pf, qf) = (p as f64, q as f64);
    let mut rep = DecayReport {
        r_max,
        value: 0.0,
        gradient: 0.0,
        hessian: 0.0,
    };
    let (lo, hi) = (1e-3f64.ln(), r_max.ln());
    for i in 0..radii {
        let r = (lo + (hi - lo) * i as f64 / (radii - 1) as f64).exp();
        for &phi in &angles {
            let (r1, r2) = (r * phi.cos(), r * phi.sin());
            let j = if v.is_radial() {
                v.radial_jet(r).to_biradial(r, 0.0)
            } else if matches!(v.kind(), ProfileKind::Standard { .. }) {
                let mut x = vec![0.0; v.n()];
                x[0] = r;
                let g = v.gradient(&x);
                let h = v.hessian(&x);
                let w = 1.0 + r;
                rep.value = rep.value.max(w.powf(nf - 2.0) * v.value(&x).abs());
                rep.gradient = rep.gradient.max(w.powf(nf - 1.0) * norm(&g));
                rep.hessian = rep.hessian.max(w.powf(nf) * norm(&h));
                continue;
            } else {
                v.biradial_jet(r1, r2)
            };
            // Frobenius norm of the full Hessian from the (r₁, r₂) jet
            let hess_sq = j.d11 * j.d11
                + 2.0 * j.d12 * j.d12
                + j.d22 * j.d22
                + (pf - 1.0) * j.d1_over_r1 * j.d1_over_r1
                + (qf - 1.0) * j.d2_over_r2 * j.d2_over_r2;
            let w = 1.0 + r;
            rep.value = rep.value.max(w.powf(nf - 2.0) * j.v.abs());
            rep.gradient = rep.gradient.max(w.powf(nf - 1.0) * j.grad_sq().sqrt());
            rep.hessian = rep.hessian.max(w.powf(nf) * hess_sq.sqrt());
        }
    }
    Ok(rep)
}
