//! Nodal `O(p)×O(q+1)`-invariant solutions of the Yamabe equation on the
//! round sphere, `Δ_g Ṽ + n(n-2)/4 Ṽ = |Ṽ|^{2*-2} Ṽ`, found by shooting on the
//! latitude ODE and pulled back to ℝⁿ by stereographic projection.
//!
//! The latitude `t ∈ [0, π/2]` parametrizes `Sⁿ ⊂ ℝᵖ × ℝ^{q+1}` as
//! `ξ = (cos t · θ, sin t · φ)`, so the metric is
//! `dt² + cos²t g_{S^{p-1}} + sin²t g_{S^q}` and invariant functions satisfy
//!
//! ```text
//! u'' = -(q cot t - (p-1) tan t) u' + n(n-2)/4 u - |u|^{4/(n-2)} u.
//! ```
//!
//! Both endpoints are regular singular points. The integration starts and
//! stops on even Taylor patches around them.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{critical_exponent, sphere_area, Real};
use crate::numerics::{
    find_root_bracketed, integrate_1d, solve_ivp, HermiteTable, OdeSpec, QuadratureSpec,
    StopReason, Trajectory,
};
use crate::profile::{BiradialJet, Profile};

/// Linear coefficient `n(n-2)/4` of the sphere equation.
fn linear_coefficient(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 2.0) / 4.0
}

fn nonlinear_exponent(n: usize) -> f64 {
    4.0 / (n as f64 - 2.0)
}

/// The positive constant solution `a* = (n(n-2)/4)^{(n-2)/4}`.
pub fn constant_solution(n: usize) -> f64 {
    linear_coefficient(n).powf((n as f64 - 2.0) / 4.0)
}

fn check_factors(p: usize, q: usize) -> Result<()> {
    if p < 2 || q < 2 {
        return Err(Error::invalid(alloc::format!(
            "factor dimensions must both be at least 2 (got p={p}, q={q})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Nonlinearity {
    k: f64,
    gamma: f64,
}

impl Nonlinearity {
    fn new(n: usize) -> Self {
        Nonlinearity {
            k: linear_coefficient(n),
            gamma: nonlinear_exponent(n),
        }
    }

    fn g(&self, u: f64) -> f64 {
        self.k * u - u.abs().powf(self.gamma) * u
    }

    fn dg(&self, u: f64) -> f64 {
        self.k - (self.gamma + 1.0) * u.abs().powf(self.gamma)
    }
}

/// `u''` from the latitude ODE; the endpoints are excluded.
pub fn latitude_rhs(t: f64, u: f64, du: f64, p: usize, q: usize) -> Result<f64> {
    if !(t > 0.0 && t < FRAC_PI_2) {
        return Err(Error::invalid(
            "latitude ODE is singular at t = 0 and t = π/2; use the endpoint series",
        ));
    }
    Ok(rhs(t, u, du, p as f64, q as f64, Nonlinearity::new(p + q)))
}

#[inline]
fn rhs(t: f64, u: f64, du: f64, p: f64, q: f64, f: Nonlinearity) -> f64 {
    let (s, c) = (t.sin(), t.cos());
    -(q * c / s - (p - 1.0) * s / c) * du + f.g(u)
}

/// Even Taylor data `u = u0 + u2 s²/2 + u4 s⁴/24` at a singular endpoint, where
/// `weight` is the coefficient of the `1/s` drift term (`q` at `t = 0`,
/// `p - 1` at `t = π/2`) and `other` the opposite one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSeries {
    pub u0: f64,
    pub u2: f64,
    pub u4: f64,
}

impl EndpointSeries {
    fn new(u0: f64, weight: f64, other: f64, f: Nonlinearity) -> Self {
        let u2 = f.g(u0) / (weight + 1.0);
        let u4 = 6.0 * u2 * (f.dg(u0) / 2.0 + weight / 3.0 + other) / (weight + 3.0);
        EndpointSeries { u0, u2, u4 }
    }

    /// `[u, du/ds, d²u/ds²]` at distance `s` from the endpoint.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let s2 = s * s;
        [
            self.u0 + self.u2 * s2 / 2.0 + self.u4 * s2 * s2 / 24.0,
            self.u2 * s + self.u4 * s2 * s / 6.0,
            self.u2 + self.u4 * s2 / 2.0,
        ]
    }
}

/// Outcome of one shot from `t = ρ` with `u(0) = a`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub a: f64,
    /// Mismatch between the integrated slope and the slope of the regular
    /// end series at `t = π/2 - ρ`. Zero exactly for regular solutions.
    pub terminal_slope: f64,
    pub end_series: EndpointSeries,
    pub start_series: EndpointSeries,
    pub radius: f64,
    pub divergent: bool,
    pub trajectory: Trajectory<2>,
}

impl Shot {
    /// Sign changes of `u` over the accepted steps.
    pub fn nodes(&self) -> usize {
        sign_changes(self.trajectory.states.iter().map(|y| y[0]))
    }
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for v in values {
        if v != 0.0 {
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Series patch radius for a shot from `a`: the nominal radius, shrunk for
/// large amplitudes whose local frequency grows like `|a|^{γ/2}`.
fn patch_radius(a: f64, n: usize, nominal: f64) -> f64 {
    let astar = constant_solution(n);
    let gamma = nonlinear_exponent(n);
    nominal * (astar / a.abs()).powf(gamma / 2.0).min(1.0)
}

pub fn shoot(a: f64, p: usize, q: usize, spec: &OdeSpec) -> Result<Shot> {
    check_factors(p, q)?;
    spec.validate()?;
    if !a.is_finite() {
        return Err(Error::invalid("shooting value must be finite"));
    }
    let n = p + q;
    let f = Nonlinearity::new(n);
    let (pf, qf) = (p as f64, q as f64);
    let rho = if a == 0.0 {
        spec.endpoint_series_radius
    } else {
        patch_radius(a, n, spec.endpoint_series_radius)
    };
    let start = EndpointSeries::new(a, qf, pf - 1.0, f);
    let [u0, du0, _] = start.eval(rho);
    let t_end = FRAC_PI_2 - rho;
    let trajectory = solve_ivp(
        |t, y: &[f64; 2]| [y[1], rhs(t, y[0], y[1], pf, qf, f)],
        rho,
        [u0, du0],
        t_end,
        spec,
    )?;
    let divergent = matches!(trajectory.stop, StopReason::BlowUp { .. });
    if !divergent && !trajectory.completed() {
        return Err(Error::OdeFailure {
            t: trajectory.t_end(),
            reason: alloc::format!("latitude integration stopped early: {:?}", trajectory.stop),
        });
    }
    let [ue, due] = trajectory.last();
    let (end_series, terminal_slope) = if divergent {
        (EndpointSeries::new(ue, pf - 1.0, qf, f), f64::NAN)
    } else {
        let b = match_end_value(ue, rho, pf, qf, f)?;
        let series = EndpointSeries::new(b, pf - 1.0, qf, f);
        // d/dt = -d/ds at the far end
        let series_slope = -series.eval(rho)[1];
        (series, due - series_slope)
    };
    Ok(Shot {
        a,
        terminal_slope,
        end_series,
        start_series: start,
        radius: rho,
        divergent,
        trajectory,
    })
}

/// Value `b = u(π/2)` whose end series passes through `u_end` at distance `rho`.
fn match_end_value(u_end: f64, rho: f64, p: f64, q: f64, f: Nonlinearity) -> Result<f64> {
    let residual = |b: f64| EndpointSeries::new(b, p - 1.0, q, f).eval(rho)[0] - u_end;
    let mut b = u_end;
    for _ in 0..60 {
        let r = residual(b);
        let h = 1e-7 * b.abs().max(1e-3);
        let slope = (residual(b + h) - residual(b - h)) / (2.0 * h);
        let step = r / slope;
        b -= step;
        if step.abs() <= 1e-15 * b.abs().max(1e-12) {
            return Ok(b);
        }
    }
    if residual(b).abs() <= 1e-12 * u_end.abs().max(1.0) {
        Ok(b)
    } else {
        Err(Error::OdeFailure {
            t: FRAC_PI_2 - rho,
            reason: "could not match the end series".into(),
        })
    }
}

/// A residual-verified nodal solution of the latitude ODE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatitudeSolution {
    pub p: usize,
    pub q: usize,
    /// Shooting value `u(0)`.
    pub a0: f64,
    pub nodes: usize,
    /// Sup of the ODE residual of the interpolant, relative to `sup |u|^{2*-1}`.
    pub residual_sup: f64,
    /// `∫_{Sⁿ} |Ṽ|^{2*}`.
    pub energy: f64,
    /// Matching defect at `π/2` (ideally zero).
    pub terminal_slope: f64,
    pub start: EndpointSeries,
    pub end: EndpointSeries,
    /// Patch radius at both endpoints.
    pub radius: f64,
    /// `u`, `u'`, `u''` on `[radius, π/2 - radius]`.
    pub table: HermiteTable,
}

/// `U(c)` and its derivatives in `c = cos t`, the coordinate the pullback is
/// written in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineJet {
    pub u: f64,
    pub du: f64,
    pub ddu: f64,
    /// `U'(c)/c`, finite at `c = 0` because `u'(π/2) = 0`.
    pub du_over_c: f64,
}

impl LatitudeSolution {
    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// `[u, u', u'']` at latitude `t`.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        if t < self.radius {
            self.start.eval(t)
        } else if t > FRAC_PI_2 - self.radius {
            let [u, du, ddu] = self.end.eval(FRAC_PI_2 - t);
            [u, -du, ddu]
        } else {
            self.table.eval(t)
        }
    }

    /// Derivatives in `c = cos t`. Inside the patches the series is used
    /// directly so no `0/0` forms are evaluated.
    pub fn cosine_jet(&self, t: f64) -> CosineJet {
        if t < self.radius {
            // exact for the quartic patch polynomial up to O(t⁶)
            let s = &self.start;
            let t2 = t * t;
            let ratio = if t < 1e-8 { 1.0 } else { t / t.sin() };
            let du = -(s.u2 + s.u4 * t2 / 6.0) * ratio;
            let num = s.u2 * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0)
                + s.u4 * (1.0 / 3.0 - t2 * t2 / 360.0);
            let ddu = num / (1.0 - t2 / 2.0 + 13.0 * t2 * t2 / 120.0);
            return CosineJet {
                u: s.u0 + s.u2 * t2 / 2.0 + s.u4 * t2 * t2 / 24.0,
                du,
                ddu,
                du_over_c: du / t.cos(),
            };
        }
        if t > FRAC_PI_2 - self.radius {
            let s = FRAC_PI_2 - t;
            let e = &self.end;
            let (sin_s, cos_s) = (s.sin(), s.cos());
            let [u, ds, dds] = e.eval(s);
            // u_t = -u_s, sin t = cos s, cos t = sin s
            let du = ds / cos_s;
            let ddu = (dds * cos_s + ds * sin_s) / (cos_s * cos_s * cos_s);
            let ratio = if s < 1e-8 { 1.0 } else { s / sin_s };
            let du_over_c = (e.u2 + e.u4 * s * s / 6.0) * ratio / cos_s;
            return CosineJet {
                u,
                du,
                ddu,
                du_over_c,
            };
        }
        let [u, d1, d2] = self.table.eval(t);
        let (st, ct) = (t.sin(), t.cos());
        let du = -d1 / st;
        let ddu = (d2 * st - d1 * ct) / (st * st * st);
        CosineJet {
            u,
            du,
            ddu,
            du_over_c: du / ct,
        }
    }

    /// Largest `|u|` over the stored samples and the endpoint values.
    pub fn sup_abs(&self) -> f64 {
        self.table
            .y
            .iter()
            .chain([self.start.u0, self.end.u0].iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Recompute the relative ODE residual of the stored interpolant at the
    /// midpoints of the table intervals.
    pub fn interpolant_residual(&self) -> f64 {
        let f = Nonlinearity::new(self.n());
        let (pf, qf) = (self.p as f64, self.q as f64);
        let scale = self.sup_abs().powf(f.gamma + 1.0).max(f64::MIN_POSITIVE);
        let x = &self.table.x;
        let mut worst = 0.0f64;
        for w in x.windows(2) {
            for frac in [0.25, 0.5, 0.75] {
                let t = w[0] + frac * (w[1] - w[0]);
                let [u, du, ddu] = self.table.eval(t);
                let r = (ddu - rhs(t, u, du, pf, qf, f)).abs();
                worst = worst.max(r);
            }
        }
        worst / scale
    }

    /// Stereographic pullback to ℝⁿ.
    pub fn pullback(self) -> Result<Profile> {
        pullback(Arc::new(self))
    }
}

/// Spectral and search knobs for [`find_solutions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DingConfig {
    /// Integration settings for the scan.
    pub scan_ode: OdeSpec,
    /// Integration settings for the accepted solutions.
    pub solve_ode: OdeSpec,
    /// Scan `a ∈ [a*·scan_min, a*·scan_max]` on a log grid.
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_points: usize,
    /// Accepted solutions must have a relative ODE residual below this.
    pub residual_tol: f64,
    /// Largest step kept in the stored latitude table.
    pub table_step: f64,
}

impl Default for DingConfig {
    fn default() -> Self {
        DingConfig {
            scan_ode: OdeSpec::default().with_tolerances(1e-9, 1e-11),
            solve_ode: OdeSpec::default().with_tolerances(1e-13, 1e-13),
            scan_min: 1.0 / 50.0,
            scan_max: 150.0,
            scan_points: 600,
            residual_tol: 1e-6,
            table_step: 2e-3,
        }
    }
}

/// Result of a node-count search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DingSearch {
    pub solutions: Vec<LatitudeSolution>,
    /// Node counts up to the request for which no bracket was found.
    pub missing: Vec<usize>,
}

impl DingSearch {
    pub fn with_nodes(&self, k: usize) -> Option<&LatitudeSolution> {
        self.solutions.iter().find(|s| s.nodes == k)
    }
}

/// Scan `a > 0`, bracket sign changes of the terminal slope, refine and keep
/// the residual-verified solutions with at most `max_nodes` interior zeros.
/// Negative shooting values give the sign-flipped solutions and are not scanned.
pub fn find_solutions(p: usize, q: usize, max_nodes: usize, cfg: &DingConfig) -> Result<DingSearch> {
    check_factors(p, q)?;
    if cfg.scan_points < 2 || !(cfg.scan_min > 0.0 && cfg.scan_max > cfg.scan_min) {
        return Err(Error::invalid("scan range must be a positive interval with ≥ 2 points"));
    }
    let n = p + q;
    let astar = constant_solution(n);
    let (lo, hi) = ((astar * cfg.scan_min).ln(), (astar * cfg.scan_max).ln());
    let m = cfg.scan_points;
    let mut grid: Vec<f64> = (0..m)
        .map(|i| (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp())
        .collect();
    // The constant solution is known exactly; keep it off the grid nodes.
    for a in grid.iter_mut() {
        if ((*a - astar) / astar).abs() < 1e-9 {
            *a *= 1.0 + 1e-6;
        }
    }
    let mut samples = Vec::with_capacity(m);
    for &a in &grid {
        let shot = shoot(a, p, q, &cfg.scan_ode)?;
        samples.push((a, shot.terminal_slope, shot.divergent));
    }
    let mut solutions: Vec<LatitudeSolution> = Vec::new();
    for w in samples.windows(2) {
        let ((a0, m0, d0), (a1, m1, d1)) = (w[0], w[1]);
        if d0 || d1 || !(m0.is_finite() && m1.is_finite()) || m0.signum() == m1.signum() {
            continue;
        }
        let root = find_root_bracketed(
            |a| {
                shoot(a, p, q, &cfg.solve_ode)
                    .map(|s| s.terminal_slope)
                    .unwrap_or(f64::NAN)
            },
            a0,
            a1,
            1e-14 * a1,
        );
        let Ok(root) = root else { continue };
        let Ok(sol) = build_solution(root.x, p, q, cfg) else {
            continue;
        };
        if sol.nodes <= max_nodes && sol.residual_sup < cfg.residual_tol {
            solutions.push(sol);
        }
    }
    solutions.sort_by(|x, y| x.nodes.cmp(&y.nodes).then(x.a0.total_cmp(&y.a0)));
    let missing = (0..=max_nodes)
        .filter(|k| !solutions.iter().any(|s| s.nodes == *k))
        .collect();
    Ok(DingSearch { solutions, missing })
}

/// Integrate from a converged shooting value and package the solution.
pub fn build_solution(a: f64, p: usize, q: usize, cfg: &DingConfig) -> Result<LatitudeSolution> {
    let spec = OdeSpec {
        max_step: cfg.table_step,
        ..cfg.solve_ode
    };
    let shot = shoot(a, p, q, &spec)?;
    if shot.divergent {
        return Err(Error::OdeFailure {
            t: shot.trajectory.t_end(),
            reason: "solution blows up before the equator".into(),
        });
    }
    let f = Nonlinearity::new(p + q);
    let tr = &shot.trajectory;
    let (pf, qf) = (p as f64, q as f64);
    let ddu: Vec<f64> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(&t, y)| rhs(t, y[0], y[1], pf, qf, f))
        .collect();
    let table = HermiteTable::new(
        tr.times.clone(),
        tr.states.iter().map(|y| y[0]).collect(),
        tr.states.iter().map(|y| y[1]).collect(),
        ddu,
    )?;
    let mut sol = LatitudeSolution {
        p,
        q,
        a0: a,
        nodes: shot.nodes(),
        residual_sup: 0.0,
        energy: 0.0,
        terminal_slope: shot.terminal_slope,
        start: shot.start_series,
        end: shot.end_series,
        radius: shot.radius,
        table,
    };
    sol.residual_sup = sol.interpolant_residual();
    sol.energy = sphere_energy(&sol)?;
    Ok(sol)
}

/// `∫_{Sⁿ} |Ṽ|^{2*} = ω_{p-1} ω_q ∫_0^{π/2} |u|^{2*} cos^{p-1}t sin^q t dt`.
pub fn sphere_energy(sol: &LatitudeSolution) -> Result<f64> {
    let n = sol.n();
    let s = critical_exponent(n);
    let (kp, kq) = ((sol.p - 1) as i32, sol.q as i32);
    let spec = QuadratureSpec::adaptive_1d().with_rel_tol(1e-12);
    let mut pieces = Vec::new();
    let mut knots = alloc::vec![0.0];
    knots.extend(sol.table.x.iter().step_by(16).copied());
    knots.push(FRAC_PI_2);
    knots.dedup();
    for w in knots.windows(2) {
        let e = integrate_1d(
            |t| sol.jet(t)[0].abs().powf(s) * t.cos().powi(kp) * t.sin().powi(kq),
            w[0],
            w[1],
            &spec,
        )?;
        pieces.push(e.value);
    }
    Ok(sphere_area(sol.p - 1) * sphere_area(sol.q) * pieces.iter().sum::<f64>())
}

/// The flat profile `V(x) = (2/(1+|x|²))^{(n-2)/2} u(t(x))` with
/// `cos t = 2|x'|/(1+|x|²)`.
pub fn pullback(sol: Arc<LatitudeSolution>) -> Result<Profile> {
    check_factors(sol.p, sol.q)?;
    Profile::from_latitude(sol)
}

/// Pointwise pullback jet at `(r₁, r₂)` for an unscaled, unflipped solution.
pub(crate) fn pullback_jet(sol: &LatitudeSolution, r1: f64, r2: f64) -> BiradialJet {
    let n = sol.n() as f64;
    let m = (n - 2.0) / 2.0;
    let w = 1.0 + r1 * r1 + r2 * r2;
    let phi = (2.0 / w).powf(m);
    let sin_t = (((r1 - 1.0) * (r1 - 1.0) + r2 * r2) * ((r1 + 1.0) * (r1 + 1.0) + r2 * r2)).sqrt();
    let t = sin_t.atan2(2.0 * r1);
    let j = sol.cosine_jet(t);
    let w2 = w * w;
    let w3 = w2 * w;
    // first derivatives of c = 2r₁/w
    let c1 = 2.0 / w - 4.0 * r1 * r1 / w2;
    let c2 = -4.0 * r1 * r2 / w2;
    let c2_over_r2 = -4.0 * r1 / w2;
    let c11 = -12.0 * r1 / w2 + 16.0 * r1 * r1 * r1 / w3;
    let c12 = -4.0 * r2 / w2 + 16.0 * r1 * r1 * r2 / w3;
    let c22 = -4.0 * r1 / w2 + 16.0 * r1 * r2 * r2 / w3;
    // ∂ᵢΦ = -2m rᵢ Φ / w, ∂ᵢⱼΦ = -2mΦ/w (δᵢⱼ - 2(m+1) rᵢrⱼ/w)
    let phi_over_r = -2.0 * m * phi / w;
    let phi1 = phi_over_r * r1;
    let phi2 = phi_over_r * r2;
    let phi11 = phi_over_r * (1.0 - 2.0 * (m + 1.0) * r1 * r1 / w);
    let phi12 = phi_over_r * (-2.0 * (m + 1.0) * r1 * r2 / w);
    let phi22 = phi_over_r * (1.0 - 2.0 * (m + 1.0) * r2 * r2 / w);
    let v = phi * j.u;
    // c/r₁ = 2/w
    let d1_over_r1 = phi_over_r * j.u + phi * j.du_over_c * (2.0 / w) * c1;
    let d2_over_r2 = phi_over_r * j.u + phi * j.du * c2_over_r2;
    let d11 = phi11 * j.u + 2.0 * phi1 * j.du * c1 + phi * (j.ddu * c1 * c1 + j.du * c11);
    let d12 = phi12 * j.u
        + phi1 * j.du * c2
        + phi2 * j.du * c1
        + phi * (j.ddu * c1 * c2 + j.du * c12);
    let d22 = phi22 * j.u + 2.0 * phi2 * j.du * c2 + phi * (j.ddu * c2 * c2 + j.du * c22);
    BiradialJet {
        v,
        d1: r1 * d1_over_r1,
        d2: r2 * d2_over_r2,
        d1_over_r1,
        d2_over_r2,
        d11,
        d12,
        d22,
    }
}

/// Sup over an interior polar grid of `|ΔV - |V|^{2*-2}V|` with the biradial
/// Laplacian `ΔV = -(∂₁₁V + (p-1)/r₁ ∂₁V + ∂₂₂V + (q-1)/r₂ ∂₂V)`, relative to
/// `sup |V|^{2*-1}` on the same grid.
pub fn flat_residual(v: &Profile, p: usize, q: usize) -> Result<f64> {
    if !v.supports_split(p, q) {
        return Err(Error::DimensionMismatch(alloc::format!(
            "profile is not O({p})×O({q})-invariant in dimension {}",
            v.n()
        )));
    }
    let s = critical_exponent(p + q);
    let (pf, qf) = (p as f64, q as f64);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let radii = 120;
    let angles = 60;
    for i in 0..radii {
        let r = 10f64.powf(-2.0 + 4.0 * (i as f64 + 0.5) / radii as f64);
        for k in 0..angles {
            let phi = FRAC_PI_2 * (k as f64 + 0.5) / angles as f64;
            let (r1, r2) = (r * phi.cos(), r * phi.sin());
            let j = v.biradial_jet(r1, r2);
            let lap = -(j.d11 + (pf - 1.0) * j.d1_over_r1 + j.d22 + (qf - 1.0) * j.d2_over_r2);
            let f = crate::math::signed_pow(j.v, s);
            worst = worst.max((lap - f).abs());
            scale = scale.max(f.abs());
        }
    }
    if scale == 0.0 {
        return Ok(worst);
    }
    Ok(worst / scale)
}
