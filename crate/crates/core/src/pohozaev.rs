//! Flat-space Pohozaev balance on a ball `B(0, δ)` and the boundary
//! functional of the 3-D Green's function expansion.
//!
//! For `-Δv + h₀v = |v|^{p-2}v` the boundary combination
//!
//! `∫_{∂B} ((n-2)/2 v∂_νv - δ/2 |∇v|² + δ(∂_νv)² + δ/p |v|^p) dσ`
//!
//! equals `n(1/p - 1/2*) ∫_B |v|^p + ∫_B (x·∇v + (n-2)/2 v) h₀ v dx`.
//! Every term is reported separately, solution or not.

use core::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{critical_exponent, sphere_area, Real};
use crate::numerics::{integrate_1d, integrate_rect, QuadratureSpec};
use crate::profile::{BiradialJet, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPieces {
    /// `(n-2)/2 ∫ v ∂_νv`
    pub flux: f64,
    /// `-δ/2 ∫ |∇v|²`
    pub gradient: f64,
    /// `δ ∫ (∂_νv)²`
    pub normal: f64,
    /// `δ/p ∫ |v|^p`
    pub power: f64,
}

impl BoundaryPieces {
    fn total(&self) -> f64 {
        self.flux + self.gradient + self.normal + self.power
    }

    fn max_abs(&self) -> f64 {
        self.flux.abs().max(self.gradient.abs()).max(self.normal.abs()).max(self.power.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub delta: f64,
    pub p_exp: f64,
    pub h0: f64,
    pub boundary_term: f64,
    pub boundary_pieces: BoundaryPieces,
    /// `n(1/p - 1/2*) ∫_B |v|^p`
    pub volume_subcritical_term: f64,
    /// `∫_B (x·∇v + (n-2)/2 v) h₀ v`
    pub volume_potential_term: f64,
    /// Boundary side minus volume side.
    pub residual: f64,
    /// Largest magnitude among the boundary pieces and the volume terms.
    pub normalizer: f64,
    /// Quadrature error bound on `residual`.
    pub error: f64,
}

impl PohozaevReport {
    /// `|residual| / normalizer`, zero when every term vanishes.
    pub fn relative_residual(&self) -> f64 {
        if self.normalizer == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.normalizer
        }
    }
}

/// Integration geometry for a profile: the split used for the polar angle
/// on the sphere, or `None` for radial profiles.
fn geometry(v: &Profile) -> Result<Option<(usize, usize)>> {
    if v.is_radial() {
        Ok(None)
    } else if let Some(split) = v.biradial_split() {
        Ok(Some(split))
    } else {
        Err(Error::Unsupported(
            "Pohozaev terms need a profile radial about the origin or biradial".into(),
        ))
    }
}

pub fn pohozaev_terms(
    v: &Profile,
    h0: f64,
    p_exp: f64,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<PohozaevReport> {
    let n = v.n();
    let nf = n as f64;
    let crit = critical_exponent(n);
    if !(p_exp > 2.0 && p_exp <= crit) {
        return Err(Error::invalid(alloc::format!(
            "exponent p = {p_exp} outside (2, 2*] = (2, {crit}]"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("ball radius must be positive"));
    }
    if !h0.is_finite() {
        return Err(Error::invalid("h0 must be finite"));
    }
    if let Some(extent) = v.sampled_extent() {
        if delta > extent {
            return Err(Error::invalid(alloc::format!(
                "δ = {delta} exceeds the sampled range r ≤ {extent}"
            )));
        }
    }
    let split = geometry(v)?;
    let half = (nf - 2.0) / 2.0;

    // boundary pieces as functions of the jet at (r₁, r₂) on the sphere
    let pieces = |j: &BiradialJet, r1: f64, r2: f64| -> [f64; 4] {
        let dn = (r1 * j.d1 + r2 * j.d2) / delta;
        [
            half * j.v * dn,
            -0.5 * delta * j.grad_sq(),
            delta * dn * dn,
            delta / p_exp * j.v.abs().powf(p_exp),
        ]
    };
    let volume = |j: &BiradialJet, r1: f64, r2: f64| -> [f64; 2] {
        let radial = r1 * j.d1 + r2 * j.d2 + half * j.v;
        [j.v.abs().powf(p_exp), radial * h0 * j.v]
    };

    let surface_spec = QuadratureSpec::adaptive_1d()
        .with_rel_tol(spec.rel_tol.min(1e-10))
        .with_abs_tol(spec.abs_tol);
    let mut bnd = [0.0; 4];
    let mut error = 0.0;
    let vol: [f64; 2];
    match split {
        None => {
            let area = sphere_area(n - 1) * delta.powi(n as i32 - 1);
            let j = v.biradial_jet(delta, 0.0);
            let b = pieces(&j, delta, 0.0);
            for k in 0..4 {
                bnd[k] = area * b[k];
            }
            let omega = sphere_area(n - 1);
            let mut parts = [0.0; 2];
            for (k, part) in parts.iter_mut().enumerate() {
                let e = integrate_1d(
                    |r| {
                        let j = v.biradial_jet(r, 0.0);
                        volume(&j, r, 0.0)[k] * r.powi(n as i32 - 1)
                    },
                    0.0,
                    delta,
                    &surface_spec,
                )?;
                *part = omega * e.value;
                error += omega * e.error;
            }
            vol = parts;
        }
        Some((p, q)) => {
            let omega = sphere_area(p - 1) * sphere_area(q - 1);
            let (kp, kq) = (p as i32 - 1, q as i32 - 1);
            let weight = |phi: f64| phi.cos().powi(kp) * phi.sin().powi(kq);
            let area = omega * delta.powi(n as i32 - 1);
            for (k, slot) in bnd.iter_mut().enumerate() {
                let e = integrate_1d(
                    |phi| {
                        let (r1, r2) = (delta * phi.cos(), delta * phi.sin());
                        pieces(&v.biradial_jet(r1, r2), r1, r2)[k] * weight(phi)
                    },
                    0.0,
                    FRAC_PI_2,
                    &surface_spec,
                )?;
                *slot = area * e.value;
                error += area * e.error;
            }
            let mut parts = [0.0; 2];
            let rect_spec = QuadratureSpec::compactified_2d()
                .with_rel_tol(spec.rel_tol.max(1e-10))
                .with_abs_tol(spec.abs_tol);
            for (k, part) in parts.iter_mut().enumerate() {
                if k == 1 && h0 == 0.0 {
                    continue;
                }
                let e = integrate_rect(
                    |r, phi| {
                        let (r1, r2) = (r * phi.cos(), r * phi.sin());
                        volume(&v.biradial_jet(r1, r2), r1, r2)[k] * weight(phi) * r.powi(n as i32 - 1)
                    },
                    (0.0, delta),
                    (0.0, FRAC_PI_2),
                    &rect_spec,
                )?;
                *part = omega * e.value;
                error += omega * e.error;
            }
            vol = parts;
        }
    }
    let boundary_pieces = BoundaryPieces {
        flux: bnd[0],
        gradient: bnd[1],
        normal: bnd[2],
        power: bnd[3],
    };
    let coeff = nf * (1.0 / p_exp - 1.0 / crit);
    let volume_subcritical_term = coeff * vol[0];
    let volume_potential_term = vol[1];
    let boundary_term = boundary_pieces.total();
    let residual = boundary_term - volume_subcritical_term - volume_potential_term;
    let normalizer = boundary_pieces
        .max_abs()
        .max(volume_subcritical_term.abs())
        .max(volume_potential_term.abs());
    Ok(PohozaevReport {
        delta,
        p_exp,
        h0,
        boundary_term,
        boundary_pieces,
        volume_subcritical_term,
        volume_potential_term,
        residual,
        normalizer,
        error,
    })
}

/// `∫_{∂B(0,δ)} (½ Ĝ ∂_νĜ - δ/2 |∇Ĝ|² + δ (∂_νĜ)²) dσ` for
/// `Ĝ = 1/(4π|x|) + m + β(x)` in ℝ³. `beta` returns `β(x)` and `∇β(x)`.
pub fn mass_boundary_functional<B: Fn(&[f64; 3]) -> (f64, [f64; 3])>(
    mass: f64,
    beta: B,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("sphere radius must be positive"));
    }
    let a = 1.0 / (4.0 * PI);
    let integrand = |theta: f64, phi: f64| {
        let nu = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let x = [delta * nu[0], delta * nu[1], delta * nu[2]];
        let (b, db) = beta(&x);
        let g = a / delta + mass + b;
        // ∇(1/(4π|x|)) = -x/(4π|x|³)
        let grad = [
            -a * nu[0] / (delta * delta) + db[0],
            -a * nu[1] / (delta * delta) + db[1],
            -a * nu[2] / (delta * delta) + db[2],
        ];
        let dn = grad[0] * nu[0] + grad[1] * nu[1] + grad[2] * nu[2];
        let grad_sq = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
        let f = 0.5 * g * dn - 0.5 * delta * grad_sq + delta * dn * dn;
        f * delta * delta * theta.sin()
    };
    // the singular pieces cancel; size the absolute tolerance on them
    let singular = 4.0 * PI * delta * delta * (a / delta + mass.abs()) * a / (delta * delta);
    let spec = spec.with_abs_tol(spec.abs_tol.max(1e-14 * singular));
    let e = integrate_rect(integrand, (0.0, PI), (0.0, 2.0 * PI), &spec)?;
    Ok(e.value)
}

/// `β ≡ 0`.
pub fn no_perturbation(_: &[f64; 3]) -> (f64, [f64; 3]) {
    (0.0, [0.0; 3])
}

/// `β(x) = |x|²`.
pub fn square_perturbation(x: &[f64; 3]) -> (f64, [f64; 3]) {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2], [2.0 * x[0], 2.0 * x[1], 2.0 * x[2]])
}
