//! Floating-point helpers for `no_std`.
//!
//! `core` does not ship transcendental functions, so [`Real`] forwards to
//! `libm`. Import the trait and call methods as usual: `x.sqrt()`.

use core::f64::consts::PI;

pub trait Real: Copy {
    fn sqrt(self) -> Self;
    fn cbrt(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, e: i32) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn log2(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn atan(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn floor(self) -> Self;
    fn ceil(self) -> Self;
    fn round(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn cbrt(self) -> f64 {
        libm::cbrt(self)
    }
    #[inline]
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    #[inline]
    fn powi(self, e: i32) -> f64 {
        // exponentiation by squaring; exact for small |e|
        let mut base = if e < 0 { 1.0 / self } else { self };
        let mut k = e.unsigned_abs();
        let mut acc = 1.0;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn log2(self) -> f64 {
        libm::log2(self)
    }
    #[inline]
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    #[inline]
    fn tan(self) -> f64 {
        libm::tan(self)
    }
    #[inline]
    fn asin(self) -> f64 {
        libm::asin(self)
    }
    #[inline]
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    #[inline]
    fn atan(self) -> f64 {
        libm::atan(self)
    }
    #[inline]
    fn atan2(self, x: f64) -> f64 {
        libm::atan2(self, x)
    }
    #[inline]
    fn sinh(self) -> f64 {
        libm::sinh(self)
    }
    #[inline]
    fn cosh(self) -> f64 {
        libm::cosh(self)
    }
    #[inline]
    fn tanh(self) -> f64 {
        libm::tanh(self)
    }
    #[inline]
    fn hypot(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
    #[inline]
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    #[inline]
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    #[inline]
    fn round(self) -> f64 {
        libm::round(self)
    }
}

/// Area of the unit sphere `S^{k}` ⊂ ℝ^{k+1}, i.e. `ω_k = 2π^{(k+1)/2} / Γ((k+1)/2)`.
///
/// `ω_0 = 2` counts the two points of `S^0`.
pub fn sphere_area(k: usize) -> f64 {
    let half = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// Critical Sobolev exponent `2* = 2n/(n-2)`.
pub fn critical_exponent(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// `|u|^{s-2} u`, the odd power used by the nonlinearity.
#[inline]
pub fn signed_pow(u: f64, s: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.abs().powf(s - 1.0) * u.signum()
    }
}

/// Euclidean norm.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Conformal coupling constant `c_n = (n-2) / (4(n-1))`.
pub fn conformal_constant(n: usize) -> f64 {
    let n = n as f64;
    (n - 2.0) / (4.0 * (n - 1.0))
}
