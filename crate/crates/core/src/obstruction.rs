//! Necessary conditions for blow-up with a prescribed bubble profile, the
//! rule-out logic built on them, and a certificate for the flat
//! non-blow-up construction with negative scalar curvature.
//!
//! The conditions are necessary only: a `CONSISTENT` verdict never claims
//! that a blowing-up family exists.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureTensor, ProductSphereWeyl};
use crate::error::{Error, Result};
use crate::math::{conformal_constant, sphere_area, Real};
use crate::numerics::{integrate_1d, QuadratureSpec};
use crate::profile::{alpha_invariant, integral, lambda_invariant, Functional, Profile};
use crate::weyl_product::{weyl_otimes_b, Methods};

/// Width of the band around `Λ = 0` inside which the sign is not decided.
pub const DEADBAND: f64 = 1e-9;

/// Required agreement of `∫|V|^{2*-2}V` with `(n-2) ω_{n-1} λ`.
pub const SIGNED_INTEGRAL_TOL: f64 = 1e-6;

/// Weyl tensor at the concentration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeylData {
    Zero,
    ProductSphere { p: usize, q: usize },
    Explicit { tensor: CurvatureTensor },
}

impl WeylData {
    pub fn materialize(&self, n: usize) -> Result<CurvatureTensor> {
        match self {
            WeylData::Zero => CurvatureTensor::zeros(n),
            WeylData::ProductSphere { p, q } => {
                if p + q != n {
                    return Err(Error::DimensionMismatch(alloc::format!(
                        "S^{p}×S^{q} in dimension {n}"
                    )));
                }
                ProductSphereWeyl::new(*p, *q)?.materialize()
            }
            WeylData::Explicit { tensor } => {
                if tensor.n != n {
                    return Err(Error::DimensionMismatch(alloc::format!(
                        "tensor of dimension {} at an {n}-dimensional point",
                        tensor.n
                    )));
                }
                Ok(tensor.clone())
            }
        }
    }

    pub fn product(&self) -> Option<ProductSphereWeyl> {
        match self {
            WeylData::ProductSphere { p, q } => ProductSphereWeyl::new(*p, *q).ok(),
            _ => None,
        }
    }
}

/// Geometric data at the concentration point `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointData {
    pub n: usize,
    pub h_at_x0: f64,
    pub sg_at_x0: f64,
    #[serde(default)]
    pub weyl: Option<WeylData>,
    #[serde(default)]
    pub mass_at_x0: Option<f64>,
}

impl PointData {
    /// Mass only for `n = 3`, Weyl data only for `n ≥ 5`.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::invalid("dimension must be at least 3"));
        }
        if !(self.h_at_x0.is_finite() && self.sg_at_x0.is_finite()) {
            return Err(Error::invalid("h(x0) and S_g(x0) must be finite"));
        }
        match (self.n, self.mass_at_x0.is_some(), self.weyl.is_some()) {
            (3, false, _) => Err(Error::MissingInput("n = 3 needs the Green's function mass".into())),
            (3, true, true) => Err(Error::invalid("Weyl data is meaningless for n = 3")),
            (n, true, _) if n != 3 => Err(Error::invalid("the mass is only used for n = 3")),
            (4, _, true) => Err(Error::invalid("Weyl data is only used for n ≥ 5")),
            (n, _, false) if n >= 5 => Err(Error::MissingInput("n ≥ 5 needs the Weyl tensor at x0".into())),
            _ => Ok(()),
        }
    }
}

/// Scalar functionals of a bubble profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleSummary {
    pub n: usize,
    pub lambda: f64,
    pub alpha: Vec<f64>,
    /// `∫V²`, only for `n ≥ 5`.
    #[serde(default)]
    pub int_v2: Option<f64>,
    /// `∫|V|^{2*}`
    pub int_v_2star: f64,
    /// `∫|V|^{2*-2}V`
    pub int_signed_2star_minus1: f64,
    #[serde(default)]
    pub weyl_otimes_b: Option<f64>,
}

impl BubbleSummary {
    /// Computes every functional of `v`; `weyl` adds `Weyl ⊗ B` (n ≥ 5).
    pub fn compute(v: &Profile, weyl: Option<&WeylData>, spec: &QuadratureSpec) -> Result<Self> {
        let n = v.n();
        let lam = lambda_invariant(v, spec)?;
        let summary = BubbleSummary {
            n,
            lambda: lam.value(),
            alpha: alpha_invariant(v)?,
            int_v2: if n >= 5 { Some(integral(v, Functional::Square, spec)?.value) } else { None },
            int_v_2star: integral(v, Functional::CriticalPower, spec)?.value,
            int_signed_2star_minus1: integral(v, Functional::Signed, spec)?.value,
            weyl_otimes_b: match weyl {
                Some(w) if n >= 5 => {
                    let tensor = w.materialize(n)?;
                    let psw = w.product();
                    let methods = Methods {
                        montecarlo: false,
                        hessian: false,
                        ..Methods::all()
                    };
                    let r = weyl_otimes_b(&tensor, psw.as_ref(), v, methods, spec, spec)?;
                    r.best()
                }
                _ => None,
            },
        };
        summary.validate()?;
        Ok(summary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.alpha.len() != self.n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "α has {} components in dimension {}",
                self.alpha.len(),
                self.n
            )));
        }
        let expected = (self.n as f64 - 2.0) * sphere_area(self.n - 1) * self.lambda;
        let scale = expected.abs().max(self.int_signed_2star_minus1.abs());
        if scale > 0.0 && (expected - self.int_signed_2star_minus1).abs() > SIGNED_INTEGRAL_TOL * scale {
            return Err(Error::Inconsistent {
                quantity: "∫|V|^{2*-2}V against (n-2)ω_{n-1}λ".into(),
                first: self.int_signed_2star_minus1,
                second: expected,
            });
        }
        if !(self.int_v_2star > 0.0) {
            return Err(Error::invalid("∫|V|^{2*} must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// The necessary condition holds; says nothing about existence.
    Consistent,
    RuledOut,
    ForcesLambdaZero,
    CertifiedNoBlowup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    N5plus,
    N4,
    N3,
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub term: String,
    pub value: f64,
    /// Outcome, for entries that are checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl AuditEntry {
    fn term(term: &str, value: f64) -> Self {
        AuditEntry {
            term: term.to_string(),
            value,
            passed: None,
        }
    }

    fn check(term: &str, value: f64, passed: bool) -> Self {
        AuditEntry {
            term: term.to_string(),
            value,
            passed: Some(passed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub lambda_implied: f64,
    pub verdict: Verdict,
    pub branch: Branch,
    pub audit: Vec<AuditEntry>,
    pub note: String,
}

impl ObstructionReport {
    pub fn all_checks_pass(&self) -> bool {
        self.audit.iter().all(|a| a.passed != Some(false))
    }
}

const NECESSARY_ONLY: &str =
    "necessary condition only: CONSISTENT does not assert that a blowing-up family exists";

fn sign_verdict(lambda: f64, exactly_critical: bool) -> Verdict {
    if lambda < -DEADBAND || (exactly_critical && lambda > DEADBAND) {
        Verdict::RuledOut
    } else {
        Verdict::Consistent
    }
}

/// `(∫|V|²V)² / (ω₃ ∫|V|⁴)`, the `n = 4` coefficient.
pub fn coefficient_n4(bubble: &BubbleSummary) -> f64 {
    bubble.int_signed_2star_minus1.powi(2) / (sphere_area(3) * bubble.int_v_2star)
}

/// The same coefficient written through `λ`: `4 ω₃ λ² / ∫|V|⁴`.
pub fn coefficient_n4_from_lambda(bubble: &BubbleSummary) -> f64 {
    4.0 * sphere_area(3) * bubble.lambda * bubble.lambda / bubble.int_v_2star
}

/// `-6 (∫|V|⁴V)² / ∫|V|⁶`, the `n = 3` coefficient of the mass.
pub fn coefficient_n3(bubble: &BubbleSummary) -> f64 {
    -6.0 * bubble.int_signed_2star_minus1.powi(2) / bubble.int_v_2star
}

/// The same coefficient written through `λ`: `-96 π² λ² / ∫|V|⁶`.
pub fn coefficient_n3_from_lambda(bubble: &BubbleSummary) -> f64 {
    -96.0 * PI * PI * bubble.lambda * bubble.lambda / bubble.int_v_2star
}

fn check_pair(point: &PointData, bubble: &BubbleSummary) -> Result<()> {
    point.validate()?;
    bubble.validate()?;
    if point.n != bubble.n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "point data in dimension {}, bubble in dimension {}",
            point.n,
            bubble.n
        )));
    }
    Ok(())
}

/// The limit `Λ` that a blowing-up family modeled on the bubble would
/// have, and the verdict from its sign. With `exactly_critical` the
/// exponent is `2*` along the family and only `Λ = 0` is admissible.
pub fn implied_rate(point: &PointData, bubble: &BubbleSummary, exactly_critical: bool) -> Result<ObstructionReport> {
    check_pair(point, bubble)?;
    let n = point.n;
    let nf = n as f64;
    let mut audit = vec![
        AuditEntry::term("h(x0)", point.h_at_x0),
        AuditEntry::term("S_g(x0)", point.sg_at_x0),
        AuditEntry::term("lambda(V)", bubble.lambda),
    ];
    let (lambda, branch) = match n {
        3 => {
            let m = point.mass_at_x0.unwrap();
            let coeff = coefficient_n3(bubble);
            audit.push(AuditEntry::term("mass m_h(x0)", m));
            audit.push(AuditEntry::term("int |V|^4 V", bubble.int_signed_2star_minus1));
            audit.push(AuditEntry::term("int |V|^6", bubble.int_v_2star));
            audit.push(AuditEntry::term("coefficient -6(int |V|^4 V)^2 / int |V|^6", coeff));
            (coeff * m, Branch::N3)
        }
        4 => {
            let coeff = coefficient_n4(bubble);
            let potential = point.h_at_x0 - point.sg_at_x0 / 6.0;
            audit.push(AuditEntry::term("int |V|^2 V", bubble.int_signed_2star_minus1));
            audit.push(AuditEntry::term("int |V|^4", bubble.int_v_2star));
            audit.push(AuditEntry::term("coefficient (int |V|^2 V)^2 / (omega_3 int |V|^4)", coeff));
            audit.push(AuditEntry::term("h(x0) - S_g(x0)/6", potential));
            (coeff * potential, Branch::N4)
        }
        _ => {
            let weyl = point.weyl.as_ref().unwrap();
            let wb = match (weyl, bubble.weyl_otimes_b) {
                (WeylData::Zero, _) => 0.0,
                (_, Some(v)) => v,
                (_, None) => {
                    return Err(Error::MissingInput(
                        "Weyl⊗B of the bubble is required for a nonzero Weyl tensor".into(),
                    ))
                }
            };
            let int_v2 = bubble
                .int_v2
                .ok_or_else(|| Error::MissingInput("∫V² is required for n ≥ 5".into()))?;
            let cn = conformal_constant(n);
            let potential = point.h_at_x0 - cn * point.sg_at_x0;
            let slope = 4.0 * nf / ((nf - 2.0) * (nf - 2.0)) * int_v2 / bubble.int_v_2star;
            audit.push(AuditEntry::term("Weyl (x) B", wb));
            audit.push(AuditEntry::term("int V^2", int_v2));
            audit.push(AuditEntry::term("int |V|^2*", bubble.int_v_2star));
            audit.push(AuditEntry::term("c_n", cn));
            audit.push(AuditEntry::term("h(x0) - c_n S_g(x0)", potential));
            audit.push(AuditEntry::term("slope (4n/(n-2)^2) int V^2 / int |V|^2*", slope));
            (wb + slope * potential, Branch::N5plus)
        }
    };
    audit.push(AuditEntry::term("Lambda", lambda));
    Ok(ObstructionReport {
        lambda_implied: lambda,
        verdict: sign_verdict(lambda, exactly_critical),
        branch,
        audit,
        note: NECESSARY_ONLY.to_string(),
    })
}

/// In low dimension with positive mass (`n = 3`) or `h < S_g/6` (`n = 4`),
/// every admissible bubble has `∫|V|^{2*-2}V = 0`.
pub fn rule_out_by_decay(point: &PointData, bubble: &BubbleSummary) -> Result<ObstructionReport> {
    if !(point.n == 3 || point.n == 4) {
        return Err(Error::invalid(alloc::format!(
            "the decay rule-out applies to n = 3, 4 (got {})",
            point.n
        )));
    }
    check_pair(point, bubble)?;
    let (hypothesis, branch, measure) = if point.n == 3 {
        let m = point.mass_at_x0.unwrap();
        (m > DEADBAND, Branch::N3, ("mass m_h(x0)", m))
    } else {
        let d = point.h_at_x0 - point.sg_at_x0 / 6.0;
        (d < -DEADBAND, Branch::N4, ("h(x0) - S_g(x0)/6", d))
    };
    let mut audit = vec![
        AuditEntry::term(measure.0, measure.1),
        AuditEntry::term("lambda(V)", bubble.lambda),
        AuditEntry::check("hypothesis of the rule-out", measure.1, hypothesis),
    ];
    let verdict = if !hypothesis {
        Verdict::Consistent
    } else if bubble.lambda.abs() <= DEADBAND {
        Verdict::ForcesLambdaZero
    } else {
        Verdict::RuledOut
    };
    let rate = implied_rate(point, bubble, false)?;
    audit.push(AuditEntry::term("Lambda", rate.lambda_implied));
    Ok(ObstructionReport {
        lambda_implied: rate.lambda_implied,
        verdict,
        branch,
        audit,
        note: NECESSARY_ONLY.to_string(),
    })
}

/// `φ_ℓ(ξ) = h(ξ) - c_n (1 + (n-4)ℓ/(3n)) S_g(ξ)`.
pub fn phi_ell(h_at_xi: f64, sg_at_xi: f64, n: usize, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::invalid("ℓ must be at least 1"));
    }
    if n < 3 {
        return Err(Error::invalid("dimension must be at least 3"));
    }
    let nf = n as f64;
    let factor = 1.0 + (nf - 4.0) * ell as f64 / (3.0 * nf);
    Ok(h_at_xi - conformal_constant(n) * factor * sg_at_xi)
}

/// Admissible interval `(1, 1 + (n-4)/(3n))` for the certificate parameter.
pub fn admissible_t(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (1.0, 1.0 + (nf - 4.0) / (3.0 * nf))
}

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, ∞)`.
fn cutoff(x: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = psi(2.0 - x);
    let b = psi(x - 1.0);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// The modified potential `h_δ = 1 - χ(d/δ) + χ(d/δ)(-t c_n + d²)`,
/// `d = |x - ξ₀|`, on a flat chart around `ξ₀`.
pub fn certificate_potential(n: usize, t: f64, delta: f64, xi0: &[f64], x: &[f64]) -> f64 {
    let d_sq: f64 = x.iter().zip(xi0).map(|(a, b)| (a - b) * (a - b)).sum();
    let chi = cutoff(d_sq.sqrt() / delta);
    1.0 - chi + chi * (-t * conformal_constant(n) + d_sq)
}

/// Parameters of the certificate checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifySpec {
    /// Finite-difference step, relative to `δ`.
    pub fd_step: f64,
    pub gradient_tol: f64,
    /// Largest `ℓ` checked.
    pub max_ell: usize,
    /// Allowed deviation of the coercivity ratio `N(δ/2)/N(δ)` from 1/4.
    pub scaling_slack: f64,
}

impl Default for CertifySpec {
    fn default() -> Self {
        CertifySpec {
            fd_step: 1e-3,
            gradient_tol: 1e-8,
            max_ell: 50,
            scaling_slack: 0.1,
        }
    }
}

/// `‖h_δ - 1‖_{L^{n/2}}`.
fn coercivity_norm(n: usize, t: f64, delta: f64) -> Result<f64> {
    let nf = n as f64;
    let cn = conformal_constant(n);
    let spec = QuadratureSpec::adaptive_1d().with_abs_tol(1e-300);
    let e = integrate_1d(
        |r| {
            let chi = cutoff(r / delta);
            let dev = chi * (-t * cn + r * r - 1.0);
            dev.abs().powf(nf / 2.0) * r.powi(n as i32 - 1)
        },
        0.0,
        2.0 * delta,
        &spec,
    )?;
    Ok((sphere_area(n - 1) * e.value).powf(2.0 / nf))
}

/// Builds the modified potential around `ξ₀` on a locally conformally flat
/// background with `S_g ≡ -1` and checks every property the contradiction
/// argument needs; emits `CERTIFIED_NO_BLOWUP` when all hold.
pub fn certify_no_blowup(n: usize, t: f64, xi0: &[f64], delta: f64, spec: &CertifySpec) -> Result<ObstructionReport> {
    if n == 4 {
        return Err(Error::Unsupported(
            "n = 4: the admissible interval for t is empty".into(),
        ));
    }
    if n < 5 {
        return Err(Error::invalid("the certificate needs n ≥ 5"));
    }
    let (lo, hi) = admissible_t(n);
    if !(t > lo && t < hi) {
        return Err(Error::invalid(alloc::format!(
            "t = {t} outside the admissible interval ({lo}, {hi})"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("δ must be positive"));
    }
    if xi0.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "base point has {} coordinates in dimension {n}",
            xi0.len()
        )));
    }
    let cn = conformal_constant(n);
    let sg = -1.0;
    let h = |x: &[f64]| certificate_potential(n, t, delta, xi0, x);
    let mut audit = vec![
        AuditEntry::term("n", n as f64),
        AuditEntry::term("t", t),
        AuditEntry::term("delta", delta),
        AuditEntry::term("c_n", cn),
        AuditEntry::term("S_g", sg),
    ];

    // value at ξ₀
    let h0 = h(xi0);
    let target = -t * cn;
    audit.push(AuditEntry::check("h(xi0) = -t c_n", h0, h0 == target));

    // gradient and Hessian by central differences
    let step = spec.fd_step * delta;
    let shifted = |moves: &[(usize, f64)]| {
        let mut x = xi0.to_vec();
        for &(i, s) in moves {
            x[i] += s;
        }
        h(&x)
    };
    let mut grad_max = 0.0f64;
    for i in 0..n {
        let g = (shifted(&[(i, step)]) - shifted(&[(i, -step)])) / (2.0 * step);
        grad_max = grad_max.max(g.abs());
    }
    audit.push(AuditEntry::check(
        "max |grad h(xi0)| (finite differences)",
        grad_max,
        grad_max < spec.gradient_tol,
    ));
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            hess[i * n + j] = if i == j {
                (shifted(&[(i, step)]) - 2.0 * h0 + shifted(&[(i, -step)])) / (step * step)
            } else {
                (shifted(&[(i, step), (j, step)]) - shifted(&[(i, step), (j, -step)])
                    - shifted(&[(i, -step), (j, step)])
                    + shifted(&[(i, -step), (j, -step)]))
                    / (4.0 * step * step)
            };
        }
    }
    let min_pivot = cholesky_min_pivot(&hess, n);
    audit.push(AuditEntry::check(
        "Hessian of h at xi0: smallest Cholesky pivot",
        min_pivot,
        min_pivot > 0.0,
    ));
    let dev_from_two: f64 = (0..n * n)
        .map(|k| (hess[k] - if k % (n + 1) == 0 { 2.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    audit.push(AuditEntry::term("max |Hessian - 2 I|", dev_from_two));

    // ‖h_δ - 1‖_{L^{n/2}} ≤ C δ²
    let full = coercivity_norm(n, t, delta)?;
    let half = coercivity_norm(n, t, delta / 2.0)?;
    let ratio = half / full;
    audit.push(AuditEntry::term("C(delta) = ||h - 1||_{n/2} / delta^2", full / (delta * delta)));
    audit.push(AuditEntry::term(
        "C(delta/2)",
        half / (delta * delta / 4.0),
    ));
    audit.push(AuditEntry::check(
        "coercivity proxy ratio N(delta/2)/N(delta) (expected 1/4)",
        ratio,
        (ratio - 0.25).abs() <= 0.25 * spec.scaling_slack,
    ));

    // φ_ℓ(ξ₀) > 0 and increasing
    let mut prev = f64::NEG_INFINITY;
    let mut ok = true;
    let mut first = 0.0;
    for ell in 1..=spec.max_ell {
        let phi = phi_ell(h0, sg, n, ell)?;
        if ell == 1 {
            first = phi;
        }
        ok &= phi > 0.0 && phi > prev;
        prev = phi;
    }
    audit.push(AuditEntry::check("phi_1(xi0)", first, ok));
    audit.push(AuditEntry::term("phi_max_ell(xi0)", prev));

    // the blow-up condition would need h(ξ₀) - c_n S_g(ξ₀) ≥ 0
    let contra = h0 - cn * sg;
    audit.push(AuditEntry::check("h(xi0) + c_n = c_n (1 - t)", contra, contra < 0.0));

    let certified = audit.iter().all(|a| a.passed != Some(false));
    Ok(ObstructionReport {
        lambda_implied: contra,
        verdict: if certified { Verdict::CertifiedNoBlowup } else { Verdict::Consistent },
        branch: Branch::Certificate,
        audit,
        note: if certified {
            "Weyl vanishes and h(xi0) - c_n S_g(xi0) < 0, so no bubble can concentrate at xi0".into()
        } else {
            "certificate checks failed; see audit".into()
        },
    })
}

/// Smallest pivot of the Cholesky factorization, or a non-positive value
/// at the first failing pivot.
fn cholesky_min_pivot(a: &[f64], n: usize) -> f64 {
    let mut l = vec![0.0; n * n];
    let mut min = f64::INFINITY;
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return d;
        }
        let ljj = d.sqrt();
        min = min.min(ljj);
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    min
}
