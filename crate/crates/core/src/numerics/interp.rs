//! Piecewise quintic Hermite interpolation from values, slopes and second
//! derivatives at the nodes. C² across nodes; exact for quintics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub ddy: Vec<f64>,
}

impl HermiteTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>, ddy: Vec<f64>) -> Result<Self> {
        let m = x.len();
        if m < 2 || y.len() != m || dy.len() != m || ddy.len() != m {
            return Err(Error::DimensionMismatch(alloc::format!(
                "interpolation table needs ≥ 2 nodes and equal-length columns (got {m}, {}, {}, {})",
                y.len(),
                dy.len(),
                ddy.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("interpolation nodes must be strictly increasing"));
        }
        if x.iter().chain(&y).chain(&dy).chain(&ddy).any(|v| !v.is_finite()) {
            return Err(Error::invalid("interpolation table contains non-finite values"));
        }
        Ok(HermiteTable { x, y, dy, ddy })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.x[0]
    }

    pub fn last(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn interval(&self, t: f64) -> usize {
        let m = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(m - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(m - 2),
        }
    }

    /// `[y, y', y'']` at `t`; outside the node range the end polynomial is extended.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let k = self.interval(t);
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (h * self.dy[k], h * self.dy[k + 1]);
        let (e0, e1) = (h * h * self.ddy[k], h * h * self.ddy[k + 1]);
        let c0 = y0;
        let c1 = d0;
        let c2 = 0.5 * e0;
        let c3 = -10.0 * y0 - 6.0 * d0 - 1.5 * e0 + 10.0 * y1 - 4.0 * d1 + 0.5 * e1;
        let c4 = 15.0 * y0 + 8.0 * d0 + 1.5 * e0 - 15.0 * y1 + 7.0 * d1 - e1;
        let c5 = -6.0 * y0 - 3.0 * d0 - 0.5 * e0 + 6.0 * y1 - 3.0 * d1 + 0.5 * e1;
        let p = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
        let dp = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)));
        let ddp = 2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5));
        [p, dp / h, ddp / (h * h)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintic() {
        let f = |x: f64| [
            1.0 - 2.0 * x + x.powi(3) - 0.5 * x.powi(5),
            -2.0 + 3.0 * x * x - 2.5 * x.powi(4),
            6.0 * x - 10.0 * x.powi(3),
        ];
        let xs: Vec<f64> = [0.0, 0.3, 1.1, 2.0].into();
        let cols: Vec<[f64; 3]> = xs.iter().map(|&x| f(x)).collect();
        let table = HermiteTable::new(
            xs.clone(),
            cols.iter().map(|c| c[0]).collect(),
            cols.iter().map(|c| c[1]).collect(),
            cols.iter().map(|c| c[2]).collect(),
        )
        .unwrap();
        for k in 0..=40 {
            let x = 2.0 * k as f64 / 40.0;
            let (got, want) = (table.eval(x), f(x));
            for i in 0..3 {
                assert!((got[i] - want[i]).abs() < 1e-12, "x={x} i={i}");
            }
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        let v = alloc::vec![0.0; 3];
        assert!(HermiteTable::new(alloc::vec![0.0, 2.0, 1.0], v.clone(), v.clone(), v).is_err());
    }
}
