//! On-disk documents. Every document carries `schema_version`.

use std::sync::Arc;

use nodal_core::curvature::CurvatureTensor;
use nodal_core::ding::{EndpointSeries, LatitudeSolution};
use nodal_core::numerics::HermiteTable;
use nodal_core::profile::{ProfileKind, RadialSamples};
use nodal_core::Profile;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn check_version(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(CliError::Schema {
            path: None,
            errors: vec![format!("schema_version {found} is not supported (expected {SCHEMA_VERSION})")],
        });
    }
    Ok(())
}

/// A stored profile: the closed-form bubble, radial samples, or a latitude
/// solution of the sphere ODE together with its pullback placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub n: usize,
    pub sign: f64,
    pub scale: f64,
    #[serde(flatten)]
    pub body: ProfileBody,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileBody {
    Standard {
        mu: f64,
        center: Vec<f64>,
    },
    Radial {
        grid: Vec<f64>,
        values: Vec<f64>,
        first_derivative: Vec<f64>,
        second_derivative: Vec<f64>,
    },
    /// `grid` is the latitude `t`; the Taylor patches cover `t < radius` and
    /// `t > π/2 - radius` with coefficients `[u0, u2, u4]`.
    Latitude {
        p: usize,
        q: usize,
        swapped: bool,
        a0: f64,
        nodes: usize,
        residual_sup: f64,
        energy: f64,
        terminal_slope: f64,
        radius: f64,
        start_series: [f64; 3],
        end_series: [f64; 3],
        grid: Vec<f64>,
        values: Vec<f64>,
        first_derivative: Vec<f64>,
        second_derivative: Vec<f64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Relative sup residual of the flat equation on the sampling grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

pub fn generator() -> String {
    format!("nodal {}", env!("CARGO_PKG_VERSION"))
}

fn series(s: &EndpointSeries) -> [f64; 3] {
    [s.u0, s.u2, s.u4]
}

fn unseries(a: [f64; 3]) -> EndpointSeries {
    EndpointSeries {
        u0: a[0],
        u2: a[1],
        u4: a[2],
    }
}

impl ProfileDocument {
    pub fn from_profile(v: &Profile, metadata: Metadata) -> Self {
        let body = match v.kind() {
            ProfileKind::Standard { mu, center } => ProfileBody::Standard {
                mu: *mu,
                center: center.clone(),
            },
            ProfileKind::Radial(s) => ProfileBody::Radial {
                grid: s.table.x.clone(),
                values: s.table.y.clone(),
                first_derivative: s.table.dy.clone(),
                second_derivative: s.table.ddy.clone(),
            },
            ProfileKind::Biradial { solution: s, swapped } => ProfileBody::Latitude {
                p: s.p,
                q: s.q,
                swapped: *swapped,
                a0: s.a0,
                nodes: s.nodes,
                residual_sup: s.residual_sup,
                energy: s.energy,
                terminal_slope: s.terminal_slope,
                radius: s.radius,
                start_series: series(&s.start),
                end_series: series(&s.end),
                grid: s.table.x.clone(),
                values: s.table.y.clone(),
                first_derivative: s.table.dy.clone(),
                second_derivative: s.table.ddy.clone(),
            },
        };
        ProfileDocument {
            schema_version: SCHEMA_VERSION,
            n: v.n(),
            sign: v.sign(),
            scale: v.scale(),
            body,
            metadata,
        }
    }

    pub fn to_profile(&self) -> Result<Profile> {
        check_version(self.schema_version)?;
        let n = self.n;
        let v = match &self.body {
            ProfileBody::Standard { mu, center } => {
                if self.scale != 1.0 {
                    return Err(CliError::Usage("standard bubbles carry their scale in mu".into()));
                }
                let b = Profile::standard_bubble(n, *mu, center.clone())?;
                if self.sign < 0.0 {
                    b.negated()
                } else {
                    b
                }
            }
            ProfileBody::Radial {
                grid,
                values,
                first_derivative,
                second_derivative,
            } => {
                let s = RadialSamples::new(
                    n,
                    grid.clone(),
                    values.clone(),
                    first_derivative.clone(),
                    second_derivative.clone(),
                )?;
                Profile::from_parts(n, self.sign, self.scale, ProfileKind::Radial(Arc::new(s)))?
            }
            ProfileBody::Latitude {
                p,
                q,
                swapped,
                a0,
                nodes,
                residual_sup,
                energy,
                terminal_slope,
                radius,
                start_series,
                end_series,
                grid,
                values,
                first_derivative,
                second_derivative,
            } => {
                let table = HermiteTable::new(
                    grid.clone(),
                    values.clone(),
                    first_derivative.clone(),
                    second_derivative.clone(),
                )?;
                let solution = LatitudeSolution {
                    p: *p,
                    q: *q,
                    a0: *a0,
                    nodes: *nodes,
                    residual_sup: *residual_sup,
                    energy: *energy,
                    terminal_slope: *terminal_slope,
                    start: unseries(*start_series),
                    end: unseries(*end_series),
                    radius: *radius,
                    table,
                };
                Profile::from_parts(
                    n,
                    self.sign,
                    self.scale,
                    ProfileKind::Biradial {
                        solution: Arc::new(solution),
                        swapped: *swapped,
                    },
                )?
            }
        };
        Ok(v)
    }
}

/// A curvature tensor as a list of nonzero components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDocument {
    pub schema_version: u32,
    pub n: usize,
    /// `[i, j, k, l, value]`, zero-based indices.
    pub components: Vec<(usize, usize, usize, usize, f64)>,
}

impl TensorDocument {
    pub fn from_tensor(t: &CurvatureTensor) -> Self {
        TensorDocument {
            schema_version: SCHEMA_VERSION,
            n: t.n,
            components: t
                .components()
                .into_iter()
                .map(|([i, j, k, l], v)| (i, j, k, l, v))
                .collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<CurvatureTensor> {
        check_version(self.schema_version)?;
        let entries: Vec<([usize; 4], f64)> = self
            .components
            .iter()
            .map(|&(i, j, k, l, v)| ([i, j, k, l], v))
            .collect();
        Ok(CurvatureTensor::from_components(self.n, &entries)?)
    }
}

/// A versioned wrapper for computed results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub generator: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Report<T> {
    pub fn new(body: T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            generator: generator(),
            body,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub h0: f64,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_ode: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSweep {
    pub rows: Vec<MassRow>,
}

/// Versioned input document around a core type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stored<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Stored<T> {
    pub fn new(body: T) -> Self {
        Stored {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }

    pub fn into_inner(self) -> Result<T> {
        check_version(self.schema_version)?;
        Ok(self.body)
    }
}
