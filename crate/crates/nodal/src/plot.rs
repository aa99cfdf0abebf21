//! Plot-ready CSV with a header row.
//!
//! | input | columns |
//! |---|---|
//! | latitude solution | `t,u,du` on `[0, π/2]` |
//! | any profile on a grid | `r1,r2,V` over `[0, r_max]²` in the split coordinates |
//! | radial profile | `r,V,dV` |
//! | mass sweep | `h0,mass` |

use std::f64::consts::FRAC_PI_2;

use nodal_core::ding::LatitudeSolution;
use nodal_core::Profile;

use crate::document::MassRow;
use crate::error::{CliError, Result};

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn row(w: &mut csv::Writer<Vec<u8>>, values: &[f64]) -> Result<()> {
    w.write_record(values.iter().map(|v| v.to_string())).map_err(csv_err)
}

/// `points` equally spaced latitudes including both ends.
pub fn latitude(sol: &LatitudeSolution, points: usize) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["t", "u", "du"]).map_err(csv_err)?;
    let m = points.max(2);
    for i in 0..m {
        let t = FRAC_PI_2 * i as f64 / (m - 1) as f64;
        let [u, du, _] = sol.jet(t);
        row(&mut w, &[t, u, du])?;
    }
    finish(w)
}

/// `count × count` grid over `[0, r_max]²` in `(|x'|, |x''|)`.
pub fn biradial_grid(v: &Profile, r_max: f64, count: usize) -> Result<Vec<u8>> {
    if r_max.is_nan() || r_max <= 0.0 || count < 2 {
        return Err(CliError::Usage("grid needs r_max > 0 and at least 2 points".into()));
    }
    let mut w = writer();
    w.write_record(["r1", "r2", "V"]).map_err(csv_err)?;
    for i in 0..count {
        for k in 0..count {
            let r1 = r_max * i as f64 / (count - 1) as f64;
            let r2 = r_max * k as f64 / (count - 1) as f64;
            row(&mut w, &[r1, r2, v.biradial_jet(r1, r2).v])?;
        }
    }
    finish(w)
}

pub fn radial(v: &Profile, r_max: f64, count: usize) -> Result<Vec<u8>> {
    if !v.is_radial() {
        return Err(CliError::Usage("radial plot of a non-radial profile".into()));
    }
    if r_max.is_nan() || r_max <= 0.0 || count < 2 {
        return Err(CliError::Usage("grid needs r_max > 0 and at least 2 points".into()));
    }
    let mut w = writer();
    w.write_record(["r", "V", "dV"]).map_err(csv_err)?;
    for i in 0..count {
        let r = r_max * i as f64 / (count - 1) as f64;
        let j = v.radial_jet(r);
        row(&mut w, &[r, j.v, j.d1])?;
    }
    finish(w)
}

pub fn mass_sweep(rows: &[MassRow]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["h0", "mass"]).map_err(csv_err)?;
    for r in rows {
        row(&mut w, &[r.h0, r.mass])?;
    }
    finish(w)
}
