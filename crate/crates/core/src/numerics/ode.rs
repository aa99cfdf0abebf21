//! Dormand–Prince 5(4) with Hairer's continuous extension.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Real as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeMethod {
    DormandPrince45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub method: OdeMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radius of the Taylor patch used by callers at singular endpoints.
    pub endpoint_series_radius: f64,
    /// Integration stops (flagged) once any component exceeds this magnitude.
    pub blowup_cap: f64,
    pub max_steps: usize,
    /// Upper bound on |h|; `0` means unbounded.
    pub max_step: f64,
}

impl Default for OdeSpec {
    fn default() -> Self {
        OdeSpec {
            method: OdeMethod::DormandPrince45,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            endpoint_series_radius: 1e-2,
            blowup_cap: 1e12,
            max_steps: 2_000_000,
            max_step: 0.0,
        }
    }
}

impl OdeSpec {
    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("ODE tolerances must be positive"));
        }
        if !(self.endpoint_series_radius > 0.0) {
            return Err(Error::invalid("endpoint series radius must be positive"));
        }
        if !(self.blowup_cap > 0.0) || self.max_steps == 0 {
            return Err(Error::invalid("blow-up cap and step budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    BlowUp { t: f64 },
    StepSizeUnderflow { t: f64 },
    MaxSteps { t: f64 },
}

/// Accepted steps plus the data needed for continuous evaluation.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// `rhs(t_i, y_i)` at every accepted node.
    pub derivs: Vec<[f64; N]>,
    dense: Vec<[[f64; N]; 5]>,
    pub stop: StopReason,
    pub rhs_evals: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&f64::NAN)
    }

    pub fn last(&self) -> [f64; N] {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Dense evaluation; `t` must lie in the covered range.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let k = self.segment(t);
        let h = self.times[k + 1] - self.times[k];
        let th = (t - self.times[k]) / h;
        let th1 = 1.0 - th;
        let r = &self.dense[k];
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    fn segment(&self, t: f64) -> usize {
        let m = self.times.len();
        if m < 2 {
            return 0;
        }
        let forward = self.times[m - 1] >= self.times[0];
        let mut lo = 0;
        let mut hi = m - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let after = if forward {
                t >= self.times[mid]
            } else {
                t <= self.times[mid]
            };
            if after {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

struct Step<const N: usize> {
    y1: [f64; N],
    k7: [f64; N],
    err: f64,
    dense: [[f64; N]; 5],
}

fn dp_step<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    spec: &OdeSpec,
) -> Step<N> {
    let k2 = rhs(t + C2 * h, &axpy(y, &[(h * A21, k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
    let k4 = rhs(
        t + C4 * h,
        &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]),
    );
    let k5 = rhs(
        t + C5 * h,
        &axpy(
            y,
            &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        ),
    );
    let k6 = rhs(
        t + h,
        &axpy(
            y,
            &[
                (h * A61, k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ),
    );
    let y1 = axpy(
        y,
        &[
            (h * A71, k1),
            (h * A73, &k3),
            (h * A74, &k4),
            (h * A75, &k5),
            (h * A76, &k6),
        ],
    );
    let k7 = rhs(t + h, &y1);
    let mut err = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = spec.abs_tol + spec.rel_tol * y[i].abs().max(y1[i].abs());
        err += (e / sc) * (e / sc);
    }
    let err = (err / N as f64).sqrt();
    let mut dense = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y1[i] - y[i];
        let bspl = h * k1[i] - dy;
        dense[0][i] = y[i];
        dense[1][i] = dy;
        dense[2][i] = bspl;
        dense[3][i] = dy - h * k7[i] - bspl;
        dense[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step { y1, k7, err, dense }
}

fn rms_scaled<const N: usize>(v: &[f64; N], y: &[f64; N], spec: &OdeSpec) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = spec.abs_tol + spec.rel_tol * y[i].abs();
        s += (v[i] / sc) * (v[i] / sc);
    }
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    spec: &OdeSpec,
) -> f64 {
    let d0 = rms_scaled(y0, y0, spec);
    let d1 = rms_scaled(f0, y0, spec);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span.abs());
    let dir = span.signum();
    let y1 = axpy(y0, &[(dir * h0, f0)]);
    let f1 = rhs(t0 + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms_scaled(&diff, y0, spec) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span.abs())
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction).
pub fn solve_ivp<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    spec: &OdeSpec,
) -> Result<Trajectory<N>> {
    spec.validate()?;
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    let mut f0 = rhs(t0, &y0);
    let mut traj = Trajectory {
        times: alloc::vec![t0],
        states: alloc::vec![y0],
        derivs: alloc::vec![f0],
        dense: Vec::new(),
        stop: StopReason::Completed,
        rhs_evals: 1,
    };
    if t0 == t1 {
        return Ok(traj);
    }
    if y0.iter().chain(f0.iter()).any(|v| !v.is_finite()) {
        return Err(Error::OdeFailure {
            t: t0,
            reason: "non-finite initial data".into(),
        });
    }
    let span = t1 - t0;
    let dir = span.signum();
    let max_step = if spec.max_step > 0.0 {
        spec.max_step
    } else {
        span.abs()
    };
    let mut h = initial_step(&mut rhs, t0, &y0, &f0, span, spec).min(max_step);
    traj.rhs_evals += 1;
    let mut t = t0;
    let mut y = y0;
    let mut rejected_last = false;
    loop {
        if traj.steps() >= spec.max_steps {
            traj.stop = StopReason::MaxSteps { t };
            break;
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        let hs = if last { remaining } else { h };
        if hs <= 1e-14 * t.abs().max(1.0) && !last {
            traj.stop = StopReason::StepSizeUnderflow { t };
            break;
        }
        let step = dp_step(&mut rhs, t, &y, &f0, dir * hs, spec);
        traj.rhs_evals += 6;
        let finite = step.y1.iter().all(|v| v.is_finite()) && step.err.is_finite();
        if finite && step.err <= 1.0 {
            t = if last { t1 } else { t + dir * hs };
            y = step.y1;
            f0 = step.k7;
            traj.times.push(t);
            traj.states.push(y);
            traj.derivs.push(f0);
            traj.dense.push(step.dense);
            if y.iter().any(|v| v.abs() > spec.blowup_cap) {
                traj.stop = StopReason::BlowUp { t };
                break;
            }
            if last {
                break;
            }
            let mut fac = 0.9 * step.err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (hs * fac).min(max_step);
            rejected_last = false;
        } else {
            if !finite && y.iter().any(|v| v.abs() > 1e-3 * spec.blowup_cap) {
                traj.stop = StopReason::BlowUp { t };
                break;
            }
            let fac = if finite {
                (0.9 * step.err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h = hs * fac;
            rejected_last = true;
        }
    }
    Ok(traj)
}

/// Fixed-step Dormand–Prince integration; used for convergence-order studies.
pub fn solve_fixed<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    steps: usize,
) -> [f64; N] {
    let spec = OdeSpec::default();
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut f = rhs(t0, &y);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let s = dp_step(&mut rhs, t, &y, &f, h, &spec);
        y = s.y1;
        f = s.k7;
    }
    y
}
