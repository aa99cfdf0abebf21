//! Mass of the Green's function of `Δ + h₀` on the round `S³`, constant
//! `h₀ > 0`.
//!
//! With `θ` the geodesic distance to the pole, `G(θ) = 1/(4πθ) + m + o(1)`.
//! The closed form comes from `u = G sin θ`, which solves
//! `u'' + (1 - h₀) u = 0`; the ODE route integrates the radial equation
//! `-G'' - 2 cot θ G' + h₀ G = 0` from the regular antipode and reads off
//! the singular strength and the constant term by extrapolation.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real;
use crate::numerics::{solve_ivp, OdeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMethod {
    ClosedForm,
    Ode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassResult {
    pub h0: f64,
    pub mass: f64,
    /// Absolute error estimate; zero for the closed form.
    pub error: f64,
    pub method: MassMethod,
    /// `(θ, G(θ))` samples of the normalized Green's function.
    pub green_profile: Option<Vec<[f64; 2]>>,
}

/// `G - 1/(4πθ)` split off from the singular part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSplit {
    pub singular: f64,
    pub regular: f64,
}

fn check_h0(h0: f64) -> Result<()> {
    if !h0.is_finite() {
        return Err(Error::invalid("h0 must be finite"));
    }
    if h0 <= 0.0 {
        return Err(Error::NonCoercive(alloc::format!(
            "Δ + h0 on S³ needs h0 > 0 (got {h0}): constants are in the kernel otherwise"
        )));
    }
    Ok(())
}

// |1 - h0| below this uses the degenerate branch
const DEGENERATE: f64 = 1e-12;

/// `m = -ν cot(νπ)/(4π)` with `ν² = 1 - h₀`, continued through `h₀ = 1`
/// and into the hyperbolic branch.
fn closed_mass(h0: f64) -> f64 {
    let d = 1.0 - h0;
    if d.abs() < DEGENERATE {
        -1.0 / (4.0 * PI * PI)
    } else if d > 0.0 {
        let nu = d.sqrt();
        -nu / (nu * PI).tan() / (4.0 * PI)
    } else {
        let kappa = (-d).sqrt();
        -kappa / (kappa * PI).tanh() / (4.0 * PI)
    }
}

pub fn mass_closed_form(h0: f64) -> Result<MassResult> {
    check_h0(h0)?;
    Ok(MassResult {
        h0,
        mass: closed_mass(h0),
        error: 0.0,
        method: MassMethod::ClosedForm,
        green_profile: None,
    })
}

/// `G(θ)` from the closed form, `θ ∈ (0, π]`.
pub fn green_eval(h0: f64, theta: f64) -> Result<f64> {
    check_h0(h0)?;
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::invalid(alloc::format!("θ = {theta} outside (0, π]")));
    }
    let s = PI - theta;
    let d = 1.0 - h0;
    // sin(ν s)/sin(ν π), with the limits s/π and sinh ratios
    let ratio = if d.abs() < DEGENERATE {
        s / PI
    } else if d > 0.0 {
        let nu = d.sqrt();
        (nu * s).sin() / (nu * PI).sin()
    } else {
        let kappa = (-d).sqrt();
        // sinh(κs)/sinh(κπ) without overflow
        (-kappa * theta).exp() * (1.0 - (-2.0 * kappa * s).exp()) / (1.0 - (-2.0 * kappa * PI).exp())
    };
    if theta == PI {
        // s/sin θ → ν/(sin νπ) etc.; take the derivative ratio
        let slope = if d.abs() < DEGENERATE {
            1.0 / PI
        } else if d > 0.0 {
            let nu = d.sqrt();
            nu / (nu * PI).sin()
        } else {
            let kappa = (-d).sqrt();
            kappa / (kappa * PI).sinh()
        };
        return Ok(slope / (4.0 * PI));
    }
    Ok(ratio / (4.0 * PI * theta.sin()))
}

/// `G` as `1/(4πθ)` plus the bounded part; the bounded part uses its
/// Taylor expansion `m + (3h₀-2)θ/(24π) + h₀ m θ²/6` below `θ = 1e-4`.
pub fn green_split(h0: f64, theta: f64) -> Result<GreenSplit> {
    let g = green_eval(h0, theta)?;
    let singular = 1.0 / (4.0 * PI * theta);
    let regular = if theta < 1e-4 {
        let m = closed_mass(h0);
        m + (3.0 * h0 - 2.0) * theta / (24.0 * PI) + h0 * m * theta * theta / 6.0
    } else {
        g - singular
    };
    Ok(GreenSplit { singular, regular })
}

/// Extrapolation nodes `θ_j = θ₀/2^j`.
const THETA0: f64 = 0.4;
const LEVELS: usize = 7;

/// Mass from the radial ODE.
///
/// The solution normalized by `G(π) = 1` starts from its even series at
/// the antipode. Near the pole `F = θG` is smooth with
/// `F(0) = c/(4π)` and `F'(0) = c·m`, so `m = F'(0)/(4π F(0))`; both
/// limits are obtained by Neville extrapolation over `θ_j`.
pub fn mass_ode(h0: f64, spec: &OdeSpec) -> Result<MassResult> {
    check_h0(h0)?;
    // s = π - θ: G'' + 2 cot s G' = h₀ G
    let rhs = |s: f64, y: &[f64; 2]| [y[1], h0 * y[0] - 2.0 * y[1] * s.cos() / s.sin()];
    let g2 = h0 / 3.0;
    let g4 = 1.2 * g2 * (h0 / 2.0 + 2.0 / 3.0);
    let rho = spec.endpoint_series_radius.min(0.05);
    let start = [
        1.0 + g2 * rho * rho / 2.0 + g4 * rho.powi(4) / 24.0,
        g2 * rho + g4 * rho.powi(3) / 6.0,
    ];

    let mut profile = Vec::new();
    let mut s = rho;
    let mut y = start;
    let mut values = Vec::with_capacity(LEVELS);
    let mut slopes = Vec::with_capacity(LEVELS);
    let mut nodes = Vec::with_capacity(LEVELS);
    for j in 0..LEVELS {
        let theta = THETA0 / (1u64 << j) as f64;
        let target = PI - theta;
        let traj = solve_ivp(rhs, s, y, target, spec)?;
        if !traj.completed() {
            return Err(Error::OdeFailure {
                t: traj.t_end(),
                reason: alloc::format!("{:?}", traj.stop),
            });
        }
        if j == 0 {
            let stride = (traj.times.len() / 200).max(1);
            for (k, (&t, st)) in traj.times.iter().zip(&traj.states).enumerate() {
                if k % stride == 0 {
                    profile.push([PI - t, st[0]]);
                }
            }
        }
        s = target;
        y = traj.last();
        // dG/dθ = -dG/ds
        values.push(theta * y[0]);
        slopes.push(y[0] - theta * y[1]);
        nodes.push(theta);
    }
    let (f0, f0_err) = neville_at_zero(&nodes, &values);
    let (df0, df0_err) = neville_at_zero(&nodes, &slopes);
    if !(f0 > 0.0) {
        return Err(Error::ExtrapolationFailed(alloc::format!(
            "singular strength F(0) = {f0:e} is not positive"
        )));
    }
    let mass = df0 / (4.0 * PI * f0);
    let error = df0_err / (4.0 * PI * f0) + mass.abs() * f0_err / f0;
    let tol = 1e-6 * (1.0 + mass.abs());
    if !(error.is_finite() && error < tol) {
        return Err(Error::ExtrapolationFailed(alloc::format!(
            "mass extrapolation error {error:e} above {tol:e}"
        )));
    }
    // normalize so that the singular part is exactly 1/(4πθ)
    let c = 4.0 * PI * f0;
    profile.reverse();
    for pt in &mut profile {
        pt[1] /= c;
    }
    Ok(MassResult {
        h0,
        mass,
        error,
        method: MassMethod::Ode,
        green_profile: Some(profile),
    })
}

/// Polynomial extrapolation of `(x_j, y_j)` to `x = 0`. Returns the value of
/// the diagonal entry with the smallest change from its predecessor, and
/// that change as the error.
fn neville_at_zero(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut t: Vec<f64> = y.to_vec();
    let mut best = (y[n - 1], f64::INFINITY);
    let mut prev_diag = y[0];
    // column k holds the degree-k interpolants on consecutive windows
    for k in 1..n {
        for i in (k..n).rev() {
            let (xa, xb) = (x[i - k], x[i]);
            t[i] = (xa * t[i] - xb * t[i - 1]) / (xa - xb);
        }
        let diag = t[n - 1];
        let change = (diag - prev_diag).abs();
        if change < best.1 {
            best = (diag, change);
        }
        prev_diag = diag;
    }
    best
}

/// `(h₀, closed form, ODE)` rows.
pub fn mass_sweep(h0s: &[f64], spec: &OdeSpec) -> Result<Vec<[f64; 3]>> {
    h0s.iter()
        .map(|&h| Ok([h, mass_closed_form(h)?.mass, mass_ode(h, spec)?.mass]))
        .collect()
}
